//! Two-player fast-versus-slow game: payoff tables, tolerance-based
//! elimination of dominated strategies, and mixed equilibria.

mod dominance;
mod equilibrium;
mod matrix;
mod payoff;

use thiserror::Error;

use crate::sim::SimError;

pub use dominance::{
    remove_dominated, replay, ForgivenCell, Player, Reduction, Removal, RemovalMode,
};
pub use equilibrium::{
    best_response_regret, expected_payoffs, msne_enumerate, EnumerationReport, Equilibrium,
    MixedProfile, Regret, SupportDiagnostic,
};
pub use matrix::PayoffMatrix;
pub use payoff::build_payoff_matrix;

#[derive(Debug, Error)]
pub enum GameError {
    #[error("invalid payoff matrix: {0}")]
    InvalidMatrix(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("tolerance must be a non-negative number, got {0}")]
    InvalidTolerance(f64),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Sim(#[from] SimError),
}
