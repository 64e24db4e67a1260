//! Discrete-round mining simulator.
//!
//! Each round every node independently wins a lottery; a winner picks a
//! visible parent according to its strategy and claims the fees accrued
//! since that parent (one unit per round, plus the parent's leftover, capped
//! by the block size). Rewards are averaged over every chain of maximal
//! height.

mod block;
mod distance;
mod engine;
mod fairness;
mod strategy;

use thiserror::Error;

pub use block::{Block, BlockId, BlockStore};
pub use distance::DistanceMatrix;
pub use engine::{
    lottery_rate_for, run_simulation, simulate, visible_blocks, Lottery, ScriptedLottery,
    SeededLottery, SimConfig, SimOutcome, SimRun,
};
pub use fairness::eta_fairness_violation;
pub use strategy::{
    select_parent, Candidate, ParentChoice, StrategyConfig, StrategyKind, DEFAULT_KAPPA,
    DEFAULT_MINOR_LEFTOVER,
};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("invalid distance matrix: {0}")]
    InvalidDistance(String),
    #[error("invalid block: {0}")]
    InvalidBlock(String),
}
