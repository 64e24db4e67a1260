use std::path::{Path, PathBuf};

use netfair_core::analytics::{NetworkParams, DEFAULT_EPSILON, SMALL_P};
use netfair_core::game::RemovalMode;
use netfair_core::sim::{lottery_rate_for, DistanceMatrix, SimConfig, StrategyConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// One scenario document. Every field has a default, and the resolved
/// document (defaults filled in) is echoed into every output.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub seed: u64,
    pub network: Network,
    pub pf_sweep: PfSweep,
    pub alpha_sweep: AlphaSweep,
    pub sim: Sim,
    pub game: Game,
    pub ohie: Ohie,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Network {
    /// Blocks per second.
    pub lambda: f64,
    pub p: f64,
    pub round_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PfSweep {
    pub top_fraction: f64,
    pub bottom_percentile: f64,
    pub advantage_seconds: f64,
    /// Throughput multipliers applied to `network.lambda`.
    pub multipliers: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaAxis {
    DeltaB,
    Lambda,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlphaSweep {
    pub axis: AlphaAxis,
    /// Propagation time of the faster block, in rounds.
    pub delta_a: u32,
    /// Propagation time of the slower block when sweeping `lambda`.
    pub delta_b: u32,
    pub delta_b_values: Vec<u32>,
    /// Throughput multipliers applied to `network.lambda`.
    pub lambda_multipliers: Vec<f64>,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sim {
    pub n: usize,
    pub fast: Vec<usize>,
    pub rounds: u64,
    /// Network block rate in blocks per second.
    pub lambda: f64,
    pub round_seconds: f64,
    /// Fee cap per block in rounds of accrual; absent means one expected
    /// inter-block interval per node.
    pub max_block_size: Option<f64>,
    pub delta_slow: u32,
    pub slow_cluster_size: usize,
    pub fast_strategy: String,
    pub slow_strategy: String,
    /// Per-node strategies; overrides the group strategies when non-empty.
    pub strategies: Vec<String>,
    pub dump_blocks: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Game {
    pub strategies: Vec<String>,
    pub runs: usize,
    pub tolerance: f64,
    pub epsilon: f64,
    pub mode: ModeName,
    /// Extra profiles to evaluate, e.g. `"S1=0.74,S2=0.26 / S2=0.32,S3=0.68"`.
    pub profiles: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    Iterated,
    SinglePass,
}

impl From<ModeName> for RemovalMode {
    fn from(m: ModeName) -> Self {
        match m {
            ModeName::Iterated => RemovalMode::Iterated,
            ModeName::SinglePass => RemovalMode::SinglePass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Ohie {
    pub state: Option<PathBuf>,
    pub honest_reward: f64,
    pub petty_majority: bool,
    /// `chain:position` of a block to frontrun.
    pub target: Option<String>,
    /// next_rank announced by the frontrunning block; defaults to the
    /// largest next_rank among the chain tips.
    pub candidate_next_rank: Option<u64>,
}

impl Default for Network {
    fn default() -> Self {
        Self {
            lambda: 1.0 / 600.0,
            p: SMALL_P,
            round_seconds: 1.0,
        }
    }
}

impl Default for PfSweep {
    fn default() -> Self {
        Self {
            top_fraction: 0.5,
            bottom_percentile: 0.9,
            advantage_seconds: 11.0,
            multipliers: vec![
                0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 46.0, 50.0, 100.0, 200.0, 300.0, 400.0, 500.0,
                566.0,
            ],
        }
    }
}

impl Default for AlphaSweep {
    fn default() -> Self {
        Self {
            axis: AlphaAxis::DeltaB,
            delta_a: 1,
            delta_b: 5,
            delta_b_values: vec![1, 2, 3, 5, 8, 10, 15, 20, 30, 40],
            lambda_multipliers: vec![1.0, 2.0, 5.0, 10.0, 20.0, 46.0, 100.0, 200.0, 300.0, 566.0],
            epsilon: DEFAULT_EPSILON,
        }
    }
}

impl Default for Sim {
    fn default() -> Self {
        Self {
            n: 6,
            fast: vec![0, 1, 2],
            rounds: 20_000,
            lambda: 0.5,
            round_seconds: 1.0,
            max_block_size: None,
            delta_slow: 3,
            slow_cluster_size: 1,
            fast_strategy: "S4".into(),
            slow_strategy: "S4".into(),
            strategies: Vec::new(),
            dump_blocks: false,
        }
    }
}

impl Default for Game {
    fn default() -> Self {
        Self {
            strategies: ["S1", "S2", "S3", "S4"].map(String::from).to_vec(),
            runs: 20,
            tolerance: 1.0,
            epsilon: 1e-6,
            mode: ModeName::Iterated,
            profiles: Vec::new(),
        }
    }
}

impl Default for Ohie {
    fn default() -> Self {
        Self {
            state: None,
            honest_reward: 1.0,
            petty_majority: true,
            target: None,
            candidate_next_rank: None,
        }
    }
}

impl Scenario {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut scenario: Scenario = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        // relative input paths are taken from the scenario file's directory
        if let (Some(state), Some(dir)) = (scenario.ohie.state.as_mut(), path.parent()) {
            if state.is_relative() {
                *state = dir.join(&*state);
            }
        }
        Ok(scenario)
    }

    pub fn network_params(&self, multiplier: f64) -> Result<NetworkParams, CliError> {
        let n = &self.network;
        NetworkParams::new(n.p, n.lambda * multiplier / n.p, n.round_seconds, 1)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn sim_config(&self) -> Result<(SimConfig, DistanceMatrix), CliError> {
        let s = &self.sim;
        let cfg_err = |e: netfair_core::sim::SimError| CliError::Config(e.to_string());
        if s.n == 0 {
            return Err(CliError::Config("sim.n must be at least 1".into()));
        }
        let rate = lottery_rate_for(s.lambda, s.round_seconds, s.n);
        let mut cfg = SimConfig::new(s.n, s.rounds, rate, self.seed).with_fast_set(s.fast.clone());
        if let Some(cap) = s.max_block_size {
            cfg = cfg.with_max_block_size(cap);
        }
        cfg = if s.strategies.is_empty() {
            cfg.with_group_strategies(
                parse_strategy(&s.fast_strategy)?,
                parse_strategy(&s.slow_strategy)?,
            )
        } else {
            let parsed = s
                .strategies
                .iter()
                .map(|x| parse_strategy(x))
                .collect::<Result<Vec<_>, _>>()?;
            cfg.with_strategies(parsed)
        };
        cfg.validate().map_err(cfg_err)?;
        let d = DistanceMatrix::fast_slow(s.n, &s.fast, s.slow_cluster_size, s.delta_slow)
            .map_err(cfg_err)?;
        Ok((cfg, d))
    }

    pub fn game_strategies(&self) -> Result<Vec<(String, StrategyConfig)>, CliError> {
        self.game
            .strategies
            .iter()
            .map(|s| Ok((s.clone(), parse_strategy(s)?)))
            .collect()
    }
}

pub fn parse_strategy(s: &str) -> Result<StrategyConfig, CliError> {
    s.parse()
        .map_err(|e: netfair_core::sim::SimError| CliError::Config(e.to_string()))
}
