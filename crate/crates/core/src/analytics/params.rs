use serde::{Deserialize, Serialize};

use super::AnalyticsError;

/// Per-query success probability used when a caller only knows the block rate.
///
/// All of the closed forms depend on `lambda * t` products once `p` is this
/// small, so the hash rate is synthesized as `lambda / p`.
pub const SMALL_P: f64 = 1e-9;

/// Mining network parameters.
///
/// `lambda` is always `p * hash_rate`; it is computed on construction and
/// never set independently.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    p: f64,
    hash_rate: f64,
    lambda: f64,
    round_seconds: f64,
    n_nodes: usize,
}

impl NetworkParams {
    pub fn new(
        p: f64,
        hash_rate: f64,
        round_seconds: f64,
        n_nodes: usize,
    ) -> Result<Self, AnalyticsError> {
        if !(p > 0.0 && p < 1.0) {
            return Err(AnalyticsError::InvalidParams(format!(
                "query success probability p must be in (0,1), got {p}"
            )));
        }
        if !(hash_rate > 0.0 && hash_rate.is_finite()) {
            return Err(AnalyticsError::InvalidParams(format!(
                "hash rate must be positive and finite, got {hash_rate}"
            )));
        }
        if !(round_seconds > 0.0 && round_seconds.is_finite()) {
            return Err(AnalyticsError::InvalidParams(format!(
                "round duration must be positive, got {round_seconds}"
            )));
        }
        if n_nodes == 0 {
            return Err(AnalyticsError::InvalidParams(
                "node count must be at least 1".into(),
            ));
        }
        Ok(Self {
            p,
            hash_rate,
            lambda: p * hash_rate,
            round_seconds,
            n_nodes,
        })
    }

    /// Parameters for block rate `lambda` (blocks/second) in the small-`p`
    /// limit, with one-second rounds and a single node.
    pub fn from_lambda(lambda: f64) -> Result<Self, AnalyticsError> {
        Self::from_lambda_with(lambda, 1.0, 1)
    }

    pub fn from_lambda_with(
        lambda: f64,
        round_seconds: f64,
        n_nodes: usize,
    ) -> Result<Self, AnalyticsError> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(AnalyticsError::InvalidParams(format!(
                "block rate must be positive and finite, got {lambda}"
            )));
        }
        Self::new(SMALL_P, lambda / SMALL_P, round_seconds, n_nodes)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn hash_rate(&self) -> f64 {
        self.hash_rate
    }

    /// Block creation rate, blocks per second.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn round_seconds(&self) -> f64 {
        self.round_seconds
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    /// Natural log of the probability that a `phi` fraction of the network
    /// mines nothing for `t` seconds. Always `<= 0`.
    pub(crate) fn log_fail(&self, phi: f64, t: f64) -> f64 {
        // ln((1-p)^(phi*H*t)) without forming the power
        phi * self.hash_rate * t * (-self.p).ln_1p()
    }
}
