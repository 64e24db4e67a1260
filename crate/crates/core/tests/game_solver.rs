use std::fs::File;
use std::path::PathBuf;

use netfair_core::game::{
    best_response_regret, msne_enumerate, remove_dominated, replay, MixedProfile, PayoffMatrix,
    Player, RemovalMode,
};
use proptest::prelude::*;

fn table1() -> PayoffMatrix {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/table1.csv");
    PayoffMatrix::read_csv(File::open(path).unwrap()).unwrap()
}

fn removed(log: &[netfair_core::game::Removal], player: Player) -> Vec<&str> {
    log.iter()
        .filter(|r| r.player == player)
        .map(|r| r.removed.as_str())
        .collect()
}

#[test]
fn table1_iterated_removals() {
    let m = table1();
    let red = remove_dominated(&m, 1.0, RemovalMode::Iterated).unwrap();
    let fast = removed(&red.log, Player::Row);
    let slow = removed(&red.log, Player::Col);
    assert!(fast.contains(&"S3") && fast.contains(&"S4"));
    assert!(slow.contains(&"S4"));
    // fast S1 beats S3 everywhere except against slow S4, 73.75 vs 74.02
    let s3 = red
        .log
        .iter()
        .find(|r| r.player == Player::Row && r.removed == "S3")
        .unwrap();
    assert_eq!(s3.dominator, "S1");
    assert_eq!(s3.forgiven.len(), 1);
    assert_eq!(s3.forgiven[0].opponent, "S4");
    assert!((s3.forgiven[0].shortfall - 0.27).abs() < 1e-9);
    assert_eq!(replay(&m, &red.log).unwrap(), red.matrix);
    assert_eq!(red.matrix.row_strategies(), ["S1"]);
    assert_eq!(red.matrix.col_strategies(), ["S3"]);
}

#[test]
fn table1_single_pass_keeps_the_mixed_core() {
    let m = table1();
    let red = remove_dominated(&m, 1.0, RemovalMode::SinglePass).unwrap();
    assert_eq!(red.matrix.row_strategies(), ["S1", "S2"]);
    assert_eq!(red.matrix.col_strategies(), ["S2", "S3"]);
    assert_eq!(replay(&m, &red.log).unwrap(), red.matrix);

    // closed-form 2x2 mixing: each player makes the other indifferent
    let (a, b) = (
        |i, j| red.matrix.row_payoff(i, j),
        |i, j| red.matrix.col_payoff(i, j),
    );
    let y = (a(1, 1) - a(0, 1)) / (a(0, 0) - a(0, 1) - a(1, 0) + a(1, 1));
    let x = (b(1, 1) - b(1, 0)) / (b(0, 0) - b(0, 1) - b(1, 0) + b(1, 1));
    let report = msne_enumerate(&red.matrix, 1e-9).unwrap();
    assert_eq!(report.equilibria.len(), 1);
    let e = &report.equilibria[0];
    assert!((e.profile.row_mix[0] - x).abs() < 1e-9);
    assert!((e.profile.col_mix[0] - y).abs() < 1e-9);
    // within a percentage point of the published (0.74, 0.32) mix
    assert!((x - 0.74).abs() < 0.01 && (y - 0.32).abs() < 0.01);
}

#[test]
fn published_profiles_have_small_regret_on_their_subgames() {
    let m = table1();
    let first = MixedProfile::from_labels(
        &m,
        &[("S1", 0.74), ("S2", 0.26)],
        &[("S2", 0.32), ("S3", 0.68)],
    )
    .unwrap();
    let r = best_response_regret(&m, &first).unwrap();
    assert!(r.max() < 0.05, "{r:?}");

    let second =
        MixedProfile::from_labels(&m, &[("S1", 0.06), ("S2", 0.94)], &[("S1", 1.0)]).unwrap();
    let sub = m.submatrix(&[0, 1], &[0, 1]).unwrap();
    let on_sub =
        MixedProfile::new(second.row_mix[..2].to_vec(), second.col_mix[..2].to_vec()).unwrap();
    assert!(best_response_regret(&sub, &on_sub).unwrap().max() < 0.05);
    // slow S3 is a large profitable deviation once it is on the table
    assert!(best_response_regret(&m, &second).unwrap().col > 4.0);
}

#[test]
fn every_reported_equilibrium_of_table1_is_self_consistent() {
    let m = table1();
    for eps in [1e-9, 0.05, 0.5] {
        for e in msne_enumerate(&m, eps).unwrap().equilibria {
            assert!(best_response_regret(&m, &e.profile).unwrap().max() <= eps);
        }
    }
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = PayoffMatrix> {
    proptest::collection::vec((0.0f64..10.0, 0.0f64..10.0), rows * cols).prop_map(move |cells| {
        let labels = |p: &str, n| (0..n).map(|i| format!("{p}{i}")).collect();
        PayoffMatrix::new(
            labels("r", rows),
            labels("c", cols),
            cells.chunks(cols).map(|c| c.to_vec()).collect(),
        )
        .unwrap()
    })
}

proptest! {
    #[test]
    fn reduction_never_empties_and_replays(
        m in (1usize..5, 1usize..5).prop_flat_map(|(r, c)| matrix(r, c)),
        tol in 0.0f64..3.0,
        single in any::<bool>(),
    ) {
        let mode = if single { RemovalMode::SinglePass } else { RemovalMode::Iterated };
        let red = remove_dominated(&m, tol, mode).unwrap();
        prop_assert!(red.matrix.n_rows() >= 1 && red.matrix.n_cols() >= 1);
        prop_assert_eq!(replay(&m, &red.log).unwrap(), red.matrix);
    }

    #[test]
    fn enumerated_profiles_pass_the_regret_check(
        m in (1usize..5, 1usize..5).prop_flat_map(|(r, c)| matrix(r, c)),
    ) {
        let report = msne_enumerate(&m, 1e-7).unwrap();
        prop_assert!(!report.equilibria.is_empty() || !report.diagnostics.is_empty());
        for e in &report.equilibria {
            prop_assert!(best_response_regret(&m, &e.profile).unwrap().max() <= 1e-7);
        }
    }

    #[test]
    fn two_by_two_without_pure_equilibrium_has_one_mixed(
        base in proptest::collection::vec(0.0f64..5.0, 4),
        gap in proptest::collection::vec(0.01f64..5.0, 4),
    ) {
        // row wants to match, column wants to mismatch
        let m = PayoffMatrix::new(
            vec!["r0".into(), "r1".into()],
            vec!["c0".into(), "c1".into()],
            vec![
                vec![(base[0] + gap[0], base[2]), (base[1], base[2] + gap[2])],
                vec![(base[0], base[3] + gap[3]), (base[1] + gap[1], base[3])],
            ],
        )
        .unwrap();
        let report = msne_enumerate(&m, 1e-9).unwrap();
        prop_assert_eq!(report.equilibria.len(), 1);
        let e = &report.equilibria[0];
        prop_assert!(e.profile.row_mix.iter().chain(&e.profile.col_mix).all(|&p| p > 0.0 && p < 1.0));
    }
}
