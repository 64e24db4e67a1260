//! Closed-form network fairness: the fail function, frontrunning
//! probability and its lower bound, the two-block propagation model, and
//! publishing fairness.

mod alpha;
mod frontrun;
mod params;
mod propagation;

use thiserror::Error;

pub use alpha::{alpha_f, AlphaResult, DEFAULT_EPSILON};
pub use frontrun::{fail, frontrun_lower_bound, frontrun_probability, success, FrontrunQuery};
pub use params::{NetworkParams, SMALL_P};
pub use propagation::PropagationProfile;

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("invalid network parameters: {0}")]
    InvalidParams(String),
    #[error("invalid frontrun query: {0}")]
    InvalidQuery(String),
    #[error("invalid propagation profile: {0}")]
    InvalidProfile(String),
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error(
        "acceptance race does not resolve: decision probability {decide_per_round:e} per round"
    )]
    NonConvergence {
        decide_per_round: f64,
        partial: AlphaResult,
    },
}
