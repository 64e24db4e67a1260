//! Parallel-chain ordering by `(rank, next_rank)` and the payoff of
//! jumping ahead in it, either by picking a low-rank chain tip or by
//! forking out blocks whose fees the deviator wants.

mod deviation;
mod state;

use thiserror::Error;

pub use deviation::{
    expected_frontrun_reward, frontrun_success_probability, undercut_decision, FrontrunOutcome,
    Landing, LandingCase, UndercutCase, UndercutReport, Verdict,
};
pub use state::{total_block_ordering, BlockRef, Fixture, OhieBlock, OhieChainState};

#[derive(Debug, Error)]
pub enum OhieError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid chain state: {0}")]
    InvalidState(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no block at {0}")]
    UnknownBlock(BlockRef),
    #[error("chain {chain}: next_rank {next_rank} must exceed rank {rank}")]
    RankViolation {
        chain: usize,
        rank: u64,
        next_rank: u64,
    },
}
