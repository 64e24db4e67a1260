use std::path::PathBuf;
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn netfair(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netfair"))
        .args(args)
        .current_dir(root())
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn body(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn pf_sweep_rows_and_header() {
    let text = stdout(&netfair(&["pf-sweep"]));
    assert!(text.starts_with("# netfair "));
    assert!(text.contains("# config_sha256: "));
    let rows = body(&text);
    assert_eq!(rows[0], "multiplier,lambda,p_f,lower_bound");
    let pf = |m: &str| -> f64 {
        let row = rows
            .iter()
            .find(|r| r.split(',').next() == Some(m))
            .unwrap();
        row.split(',').nth(2).unwrap().parse().unwrap()
    };
    assert_eq!(pf("0"), 0.0);
    assert!((pf("1") - 0.01).abs() < 0.005);
    assert!((pf("566") - 0.99).abs() < 0.005);
}

#[test]
fn alpha_sweep_symmetric_row_is_one() {
    let text = stdout(&netfair(&["alpha-sweep"]));
    let first = body(&text)[1];
    let alpha: f64 = first.split(',').nth(6).unwrap().parse().unwrap();
    assert!(first.starts_with("1,1,"));
    assert!((alpha - 1.0).abs() < 1e-6);
}

#[test]
fn outputs_are_reproducible_and_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = netfair(&[
            "sim",
            "--scenario",
            "scenarios/fast_slow.toml",
            "--seed",
            seed,
            "--dump-blocks",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        (
            std::fs::read(out.join("sim_report.toml")).unwrap(),
            std::fs::read(out.join("blocks.ndjson")).unwrap(),
        )
    };
    let a = run("a", "11");
    let b = run("b", "11");
    let c = run("c", "12");
    assert_eq!(a, b);
    assert_ne!(a.0, c.0);
    assert!(String::from_utf8_lossy(&a.0).contains("# seed: 11"));
}

#[test]
fn payoff_then_solve_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("small.toml");
    std::fs::write(
        &scenario,
        "[sim]\nn = 4\nfast = [0, 1]\nrounds = 800\n[game]\nstrategies = [\"S1\", \"S4\"]\nruns = 3\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = netfair(&[
        "payoff",
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("payoff.csv")).unwrap();
    assert_eq!(body(&csv).len(), 5);
    assert!(body(&csv)[0].starts_with("row,col,row_payoff,col_payoff,std_error"));
    let report = stdout(&netfair(&[
        "solve",
        out.join("payoff.csv").to_str().unwrap(),
    ]));
    assert!(report.contains("surviving_rows"));
}

#[test]
fn solve_table1_names_the_removed_strategies() {
    let text = stdout(&netfair(&[
        "solve",
        "fixtures/table1.csv",
        "--tolerance",
        "1",
    ]));
    let report: toml::Table = body(&text).join("\n").parse().unwrap();
    let removed: Vec<(String, String)> = report["removal"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| {
            (
                r["player"].as_str().unwrap().to_string(),
                r["removed"].as_str().unwrap().to_string(),
            )
        })
        .collect();
    for want in [("row", "S3"), ("row", "S4"), ("col", "S4")] {
        assert!(
            removed.contains(&(want.0.into(), want.1.into())),
            "{removed:?}"
        );
    }
}

#[test]
fn ohie_fixture_probability() {
    let text = stdout(&netfair(&["ohie", "fixtures/ohie_undercut.txt"]));
    assert!(text.contains("success_probability = \"2/3\""));
    assert!(text.contains("threshold_factor = \"3/2\""));
    let text = stdout(&netfair(&[
        "ohie",
        "fixtures/ohie_undercut.txt",
        "--no-petty-majority",
    ]));
    assert!(text.contains("success_probability = \"1/3\""));
}

#[test]
fn exit_codes_separate_config_from_numerics() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| -> PathBuf {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    };
    let code = |args: &[&str]| netfair(args).status.code().unwrap();
    let unknown = write("unknown.toml", "colour = \"blue\"\n");
    assert_eq!(code(&["sim", "--scenario", unknown.to_str().unwrap()]), 2);
    let bad_rate = write("rate.toml", "[sim]\nlambda = 100.0\n");
    assert_eq!(code(&["sim", "--scenario", bad_rate.to_str().unwrap()]), 2);
    assert_eq!(code(&["solve", "no/such/file.csv"]), 2);
    assert_eq!(
        code(&["solve", "fixtures/table1.csv", "--tolerance", "-1"]),
        2
    );
    assert_eq!(code(&["ohie"]), 2);
    assert_eq!(code(&["pf-sweep", "--bogus"]), 2);
    let stall = write(
        "stall.toml",
        "[alpha_sweep]\naxis = \"lambda\"\ndelta_b = 1\nlambda_multipliers = [60000]\n",
    );
    assert_eq!(
        code(&["alpha-sweep", "--scenario", stall.to_str().unwrap()]),
        3
    );
}
