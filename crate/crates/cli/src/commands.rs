use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use netfair_core::analytics::{
    alpha_f, frontrun_lower_bound, frontrun_probability, AlphaResult, AnalyticsError,
    FrontrunQuery, PropagationProfile,
};
use netfair_core::game::{
    best_response_regret, build_payoff_matrix, msne_enumerate, remove_dominated, MixedProfile,
    PayoffMatrix, Regret,
};
use netfair_core::ohie::{
    frontrun_success_probability, total_block_ordering, undercut_decision, BlockRef, OhieChainState,
};
use netfair_core::sim::{simulate, SeededLottery, SimOutcome};
use serde::Serialize;

use crate::output::{header, sha256_hex, Sink};
use crate::scenario::{AlphaAxis, Scenario};
use crate::CliError;

fn resolved(scenario: &Scenario, extra: &[(&str, String)]) -> Result<String, CliError> {
    let mut text = toml::to_string(scenario).map_err(|e| CliError::Config(e.to_string()))?;
    if !extra.is_empty() {
        text.push_str("\n[input]\n");
        for (k, v) in extra {
            let _ = writeln!(text, "{k} = {v:?}");
        }
    }
    Ok(text)
}

fn to_toml<T: Serialize>(value: &T) -> Result<String, CliError> {
    toml::to_string(value).map_err(|e| CliError::Io(format!("cannot render report: {e}")))
}

pub fn pf_sweep(scenario: &Scenario, sink: &Sink) -> Result<(), CliError> {
    let s = &scenario.pf_sweep;
    let query = FrontrunQuery::new(s.top_fraction, s.bottom_percentile, s.advantage_seconds)
        .map_err(|e| CliError::Config(e.to_string()))?;
    if s.multipliers.is_empty() || s.multipliers.iter().any(|m| !(*m >= 0.0 && m.is_finite())) {
        return Err(CliError::Config(
            "pf_sweep.multipliers must be a non-empty list of finite values >= 0".into(),
        ));
    }
    let mut out = header(
        "pf-sweep",
        scenario.seed,
        "lambda in blocks/s; p_f and bound are probabilities",
        &resolved(scenario, &[])?,
    );
    out.push_str("multiplier,lambda,p_f,lower_bound\n");
    for &m in &s.multipliers {
        let lambda = scenario.network.lambda * m;
        let (pf, bound) = if m == 0.0 {
            (0.0, 0.0)
        } else {
            let params = scenario.network_params(m)?;
            (
                frontrun_probability(&params, &query),
                frontrun_lower_bound(&params, &query),
            )
        };
        let _ = writeln!(out, "{m},{lambda},{pf},{bound}");
    }
    sink.emit("pf_sweep.csv", &out)
}

pub fn alpha_sweep(scenario: &Scenario, sink: &Sink) -> Result<(), CliError> {
    let s = &scenario.alpha_sweep;
    let points: Vec<(u32, f64)> = match s.axis {
        AlphaAxis::DeltaB => s.delta_b_values.iter().map(|&b| (b, 1.0)).collect(),
        AlphaAxis::Lambda => s
            .lambda_multipliers
            .iter()
            .map(|&m| (s.delta_b, m))
            .collect(),
    };
    if points.is_empty() {
        return Err(CliError::Config("alpha_sweep has no points".into()));
    }
    let mut jobs = Vec::with_capacity(points.len());
    for &(b, m) in &points {
        if !(m > 0.0 && m.is_finite()) {
            return Err(CliError::Config(format!(
                "lambda multiplier {m} must be positive"
            )));
        }
        let profile = PropagationProfile::linear(s.delta_a, b)
            .map_err(|e| CliError::Config(e.to_string()))?;
        jobs.push((scenario.network_params(m)?, profile));
    }
    if !(s.epsilon > 0.0 && s.epsilon < 1.0) {
        return Err(CliError::Config(format!(
            "epsilon {} must be in (0,1)",
            s.epsilon
        )));
    }

    let mut out = header(
        "alpha-sweep",
        scenario.seed,
        "delta in rounds; lambda in blocks/s; psi and residual are probabilities",
        &resolved(scenario, &[])?,
    );
    out.push_str("delta_a,delta_b,lambda,psi_a,psi_b,residual,alpha_f,rounds\n");
    let row = |out: &mut String, p: &PropagationProfile, lambda: f64, r: &AlphaResult| {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            p.delta_a(),
            p.delta_b(),
            lambda,
            r.psi_a,
            r.psi_b,
            r.residual,
            r.alpha_f,
            r.rounds_evaluated
        );
    };
    for (params, profile) in &jobs {
        match alpha_f(params, profile, s.epsilon) {
            Ok(r) => row(&mut out, profile, params.lambda(), &r),
            Err(AnalyticsError::NonConvergence {
                decide_per_round,
                partial,
            }) => {
                let _ = writeln!(out, "# partial row below did not converge");
                row(&mut out, profile, params.lambda(), &partial);
                sink.emit("alpha_sweep.csv", &out)?;
                return Err(CliError::Numeric(format!(
                    "series for delta_b={} lambda={} stalled: decision probability {decide_per_round:e} per round",
                    profile.delta_b(),
                    params.lambda()
                )));
            }
            Err(e) => return Err(CliError::Config(e.to_string())),
        }
    }
    sink.emit("alpha_sweep.csv", &out)
}

#[derive(Serialize)]
struct SimReport<'a> {
    lottery_rate: f64,
    max_block_size: f64,
    outcome: &'a SimOutcome,
}

pub fn sim(scenario: &Scenario, sink: &Sink) -> Result<(), CliError> {
    let (cfg, distances) = scenario.sim_config()?;
    let run = simulate(
        &cfg,
        &distances,
        &mut SeededLottery::new(cfg.seed, cfg.lottery_rate),
    )
    .map_err(|e| CliError::Config(e.to_string()))?;
    let mut out = header(
        "sim",
        scenario.seed,
        "shares and utilization in percent of total fees; rewards in rounds of fees",
        &resolved(scenario, &[])?,
    );
    out.push_str(&to_toml(&SimReport {
        lottery_rate: cfg.lottery_rate,
        max_block_size: cfg.max_block_size,
        outcome: &run.outcome,
    })?);
    sink.emit("sim_report.toml", &out)?;
    if scenario.sim.dump_blocks {
        let mut buf = Vec::new();
        run.store
            .write_ndjson(&mut buf)
            .map_err(|e| CliError::Io(e.to_string()))?;
        sink.emit(
            "blocks.ndjson",
            &String::from_utf8(buf).expect("json is utf-8"),
        )?;
    }
    Ok(())
}

pub fn payoff(scenario: &Scenario, sink: &Sink) -> Result<(), CliError> {
    let (template, distances) = scenario.sim_config()?;
    let strategies = scenario.game_strategies()?;
    if scenario.game.runs == 0 {
        return Err(CliError::Config("game.runs must be at least 1".into()));
    }
    let matrix = build_payoff_matrix(&strategies, &template, &distances, scenario.game.runs)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let mut out = header(
        "payoff",
        scenario.seed,
        "payoffs in percent of total fees; rows fast, columns slow",
        &resolved(scenario, &[])?,
    );
    let mut buf = Vec::new();
    matrix
        .write_csv(&mut buf)
        .map_err(|e| CliError::Io(e.to_string()))?;
    out.push_str(&String::from_utf8(buf).expect("csv is utf-8"));
    sink.emit("payoff.csv", &out)
}

#[derive(Serialize)]
struct LabelledRegret {
    row: f64,
    col: f64,
}

impl From<Regret> for LabelledRegret {
    fn from(r: Regret) -> Self {
        Self {
            row: r.row,
            col: r.col,
        }
    }
}

#[derive(Serialize)]
struct EquilibriumEntry {
    row_mix: BTreeMap<String, f64>,
    col_mix: BTreeMap<String, f64>,
    row_value: f64,
    col_value: f64,
    regret: LabelledRegret,
    regret_full_game: LabelledRegret,
}

#[derive(Serialize)]
struct ProfileEntry {
    profile: String,
    regret_full_game: LabelledRegret,
    /// Present when the profile only uses surviving strategies.
    regret_reduced_game: Option<LabelledRegret>,
}

#[derive(Serialize)]
struct SolveReport {
    surviving_rows: Vec<String>,
    surviving_cols: Vec<String>,
    removal: Vec<netfair_core::game::Removal>,
    equilibrium: Vec<EquilibriumEntry>,
    diagnostic: Vec<netfair_core::game::SupportDiagnostic>,
    profile: Vec<ProfileEntry>,
}

fn mix_map(labels: &[String], mix: &[f64]) -> BTreeMap<String, f64> {
    labels.iter().cloned().zip(mix.iter().copied()).collect()
}

/// `S1=0.74,S2=0.26 / S2=0.32,S3=0.68`: row mix, slash, column mix.
fn parse_profile(matrix: &PayoffMatrix, spec: &str) -> Result<MixedProfile, CliError> {
    let bad = |why: String| CliError::Config(format!("profile '{spec}': {why}"));
    let (row, col) = spec
        .split_once('/')
        .ok_or_else(|| bad("missing '/'".into()))?;
    let side = |text: &str| -> Result<Vec<(String, f64)>, CliError> {
        text.split(',')
            .map(|item| {
                let (label, p) = item
                    .split_once('=')
                    .ok_or_else(|| bad(format!("'{item}' is not label=probability")))?;
                let p: f64 = p
                    .trim()
                    .parse()
                    .map_err(|_| bad(format!("bad probability in '{item}'")))?;
                Ok((label.trim().to_string(), p))
            })
            .collect()
    };
    let (row, col) = (side(row)?, side(col)?);
    let row: Vec<(&str, f64)> = row.iter().map(|(l, p)| (l.as_str(), *p)).collect();
    let col: Vec<(&str, f64)> = col.iter().map(|(l, p)| (l.as_str(), *p)).collect();
    MixedProfile::from_labels(matrix, &row, &col).map_err(|e| bad(e.to_string()))
}

pub fn solve(scenario: &Scenario, matrix_path: &Path, sink: &Sink) -> Result<(), CliError> {
    let bytes = fs::read(matrix_path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", matrix_path.display())))?;
    let matrix = PayoffMatrix::read_csv(bytes.as_slice())
        .map_err(|e| CliError::Config(format!("{}: {e}", matrix_path.display())))?;
    let g = &scenario.game;
    let reduction = remove_dominated(&matrix, g.tolerance, g.mode.into())
        .map_err(|e| CliError::Config(e.to_string()))?;
    let reduced = &reduction.matrix;
    let report = msne_enumerate(reduced, g.epsilon).map_err(|e| CliError::Config(e.to_string()))?;

    let embed = |m: &MixedProfile| -> MixedProfile {
        let mut row_mix = vec![0.0; matrix.n_rows()];
        let mut col_mix = vec![0.0; matrix.n_cols()];
        for (i, l) in reduced.row_strategies().iter().enumerate() {
            row_mix[matrix.row_index(l).expect("reduced label")] = m.row_mix[i];
        }
        for (j, l) in reduced.col_strategies().iter().enumerate() {
            col_mix[matrix.col_index(l).expect("reduced label")] = m.col_mix[j];
        }
        MixedProfile { row_mix, col_mix }
    };
    let regret = |m: &PayoffMatrix, p: &MixedProfile| {
        best_response_regret(m, p)
            .map(LabelledRegret::from)
            .map_err(|e| CliError::Config(e.to_string()))
    };

    let mut equilibrium = Vec::new();
    for e in &report.equilibria {
        if e.regret.max() > g.epsilon {
            return Err(CliError::Numeric(format!(
                "solver returned a profile with regret {} above epsilon",
                e.regret.max()
            )));
        }
        equilibrium.push(EquilibriumEntry {
            row_mix: mix_map(reduced.row_strategies(), &e.profile.row_mix),
            col_mix: mix_map(reduced.col_strategies(), &e.profile.col_mix),
            row_value: e.row_value,
            col_value: e.col_value,
            regret: e.regret.into(),
            regret_full_game: regret(&matrix, &embed(&e.profile))?,
        });
    }

    let mut profile = Vec::new();
    for spec in &g.profiles {
        let full = parse_profile(&matrix, spec)?;
        let on_reduced = parse_profile(reduced, spec).ok();
        profile.push(ProfileEntry {
            profile: spec.clone(),
            regret_full_game: regret(&matrix, &full)?,
            regret_reduced_game: on_reduced.map(|p| regret(reduced, &p)).transpose()?,
        });
    }

    let extra = [
        ("matrix", matrix_path.display().to_string()),
        ("matrix_sha256", sha256_hex(&bytes)),
    ];
    let mut out = header(
        "solve",
        scenario.seed,
        "payoffs and regrets in the matrix's units",
        &resolved(scenario, &extra)?,
    );
    out.push_str(&to_toml(&SolveReport {
        surviving_rows: reduced.row_strategies().to_vec(),
        surviving_cols: reduced.col_strategies().to_vec(),
        removal: reduction.log,
        equilibrium,
        diagnostic: report.diagnostics,
        profile,
    })?);
    sink.emit("solve_report.toml", &out)
}

#[derive(Serialize)]
struct OhieCase {
    chain: usize,
    case: netfair_core::ohie::LandingCase,
    rank: u64,
    success: bool,
    note: Option<String>,
}

#[derive(Serialize)]
struct OhieUndercut {
    drop_set: Vec<String>,
    next_rank: Option<u64>,
    success_probability: String,
    threshold_factor: Option<String>,
    stealable: f64,
    expected_undercut_reward: f64,
    honest_reward: f64,
    verdict: netfair_core::ohie::Verdict,
    case: Vec<OhieCase>,
}

#[derive(Serialize)]
struct OhieFrontrun {
    target: String,
    candidate_next_rank: u64,
    success_probability: String,
    landing: Vec<netfair_core::ohie::Landing>,
}

#[derive(Serialize)]
struct OhieReport {
    k: usize,
    total_block_ordering: Vec<String>,
    undercut: Option<OhieUndercut>,
    frontrun: Option<OhieFrontrun>,
}

pub fn ohie(scenario: &Scenario, sink: &Sink) -> Result<(), CliError> {
    let o = &scenario.ohie;
    let path = o
        .state
        .as_ref()
        .ok_or_else(|| CliError::Config("no OHIE state file given".into()))?;
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let fixture = OhieChainState::parse(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let state = &fixture.state;
    let cfg = |e: netfair_core::ohie::OhieError| CliError::Config(e.to_string());

    let undercut = if fixture.drop_set.is_empty() {
        None
    } else {
        let r = undercut_decision(state, &fixture.drop_set, o.honest_reward, o.petty_majority)
            .map_err(cfg)?;
        Some(OhieUndercut {
            drop_set: fixture.drop_set.iter().map(BlockRef::to_string).collect(),
            next_rank: r.next_rank,
            success_probability: r.success_probability.to_string(),
            threshold_factor: r.threshold_factor.map(|f| f.to_string()),
            stealable: r.stealable,
            expected_undercut_reward: r.expected_undercut_reward,
            honest_reward: r.honest_reward,
            verdict: r.verdict,
            case: r
                .cases
                .into_iter()
                .map(|c| OhieCase {
                    chain: c.chain,
                    case: c.case,
                    rank: c.rank,
                    success: c.success,
                    note: c.note,
                })
                .collect(),
        })
    };

    let frontrun = match &o.target {
        None => None,
        Some(t) => {
            let target: BlockRef = t.parse().map_err(cfg)?;
            let next = o.candidate_next_rank.unwrap_or_else(|| {
                (0..state.k())
                    .map(|c| state.tip(c).next_rank)
                    .max()
                    .expect("k >= 1")
            });
            let r = frontrun_success_probability(state, next, target).map_err(cfg)?;
            Some(OhieFrontrun {
                target: target.to_string(),
                candidate_next_rank: next,
                success_probability: r.probability.to_string(),
                landing: r.landings,
            })
        }
    };

    let extra = [
        ("state", path.display().to_string()),
        ("state_sha256", sha256_hex(text.as_bytes())),
    ];
    let mut out = header(
        "ohie",
        scenario.seed,
        "ranks are integers; fees in the fixture's units; probabilities exact fractions",
        &resolved(scenario, &extra)?,
    );
    out.push_str(&to_toml(&OhieReport {
        k: state.k(),
        total_block_ordering: total_block_ordering(state)
            .iter()
            .map(|&r| {
                let b = state.block(r).expect("ordered block");
                format!("{r} ({}, {})", b.rank, b.next_rank)
            })
            .collect(),
        undercut,
        frontrun,
    })?);
    sink.emit("ohie_report.toml", &out)
}
