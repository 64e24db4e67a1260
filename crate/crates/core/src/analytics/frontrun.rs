use serde::{Deserialize, Serialize};

use super::{AnalyticsError, NetworkParams};

/// Probability that a `phi` fraction of the network fails to mine a block in
/// `t` seconds: `(1-p)^(phi*H*t)`.
pub fn fail(params: &NetworkParams, phi: f64, t: f64) -> Result<f64, AnalyticsError> {
    check_fraction(phi)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(AnalyticsError::Domain(format!(
            "time must be finite and non-negative, got {t}"
        )));
    }
    Ok(params.log_fail(phi, t).exp())
}

/// `1 - fail(phi, t)`, computed without cancellation for small exponents.
pub fn success(params: &NetworkParams, phi: f64, t: f64) -> Result<f64, AnalyticsError> {
    fail(params, phi, t)?;
    Ok(-params.log_fail(phi, t).exp_m1())
}

fn check_fraction(phi: f64) -> Result<(), AnalyticsError> {
    if !(0.0..=1.0).contains(&phi) {
        return Err(AnalyticsError::Domain(format!(
            "network fraction must be in [0,1], got {phi}"
        )));
    }
    Ok(())
}

/// A frontrunning question: does the fastest `top_fraction` of the network
/// mine a transaction before the slowest `1 - bottom_percentile` hears of it?
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontrunQuery {
    top_fraction: f64,
    bottom_percentile: f64,
    advantage_seconds: f64,
}

impl FrontrunQuery {
    pub fn new(
        top_fraction: f64,
        bottom_percentile: f64,
        advantage_seconds: f64,
    ) -> Result<Self, AnalyticsError> {
        if !(top_fraction > 0.0 && top_fraction <= 1.0) {
            return Err(AnalyticsError::InvalidQuery(format!(
                "top fraction M must be in (0,1], got {top_fraction}"
            )));
        }
        if !(0.0..1.0).contains(&bottom_percentile) {
            return Err(AnalyticsError::InvalidQuery(format!(
                "bottom percentile m must be in [0,1), got {bottom_percentile}"
            )));
        }
        if top_fraction > bottom_percentile {
            return Err(AnalyticsError::InvalidQuery(format!(
                "top band M={top_fraction} overlaps bottom band starting at m={bottom_percentile}"
            )));
        }
        if !(advantage_seconds >= 0.0 && advantage_seconds.is_finite()) {
            return Err(AnalyticsError::InvalidQuery(format!(
                "time advantage d must be finite and non-negative, got {advantage_seconds}"
            )));
        }
        Ok(Self {
            top_fraction,
            bottom_percentile,
            advantage_seconds,
        })
    }

    pub fn top_fraction(&self) -> f64 {
        self.top_fraction
    }

    pub fn bottom_percentile(&self) -> f64 {
        self.bottom_percentile
    }

    pub fn advantage_seconds(&self) -> f64 {
        self.advantage_seconds
    }
}

/// Exact frontrunning probability `1 - fail(M, d)`.
pub fn frontrun_probability(params: &NetworkParams, query: &FrontrunQuery) -> f64 {
    -params
        .log_fail(query.top_fraction, query.advantage_seconds)
        .exp_m1()
}

/// Second-order lower bound `x - x^2/2` with `x = M * lambda * d`.
///
/// Negative once `x > 2`; still a valid (if useless) bound there.
pub fn frontrun_lower_bound(params: &NetworkParams, query: &FrontrunQuery) -> f64 {
    let x = query.top_fraction * params.lambda() * query.advantage_seconds;
    x - 0.5 * x * x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bitcoin() -> NetworkParams {
        NetworkParams::from_lambda(1.0 / 600.0).unwrap()
    }

    #[test]
    fn fail_trivial_cases() {
        let params = bitcoin();
        assert_eq!(fail(&params, 0.5, 0.0).unwrap(), 1.0);
        assert_eq!(fail(&params, 0.0, 100.0).unwrap(), 1.0);
    }

    #[test]
    fn fail_matches_exponential_limit() {
        let params = bitcoin();
        let oracle = (-0.5_f64 * (1.0 / 600.0) * 600.0).exp();
        let got = fail(&params, 0.5, 600.0).unwrap();
        assert!((got - 0.60653).abs() < 1e-4);
        assert!((got - oracle).abs() < 1e-8);
    }

    #[test]
    fn fail_converges_to_exponential_as_p_shrinks() {
        let lambda = 0.01;
        let oracle = (-0.3_f64 * lambda * 50.0).exp();
        let mut last_err = f64::INFINITY;
        for p in [1e-2, 1e-4, 1e-6, 1e-8] {
            let params = NetworkParams::new(p, lambda / p, 1.0, 1).unwrap();
            let err = (fail(&params, 0.3, 50.0).unwrap() - oracle).abs();
            assert!(err <= last_err);
            last_err = err;
        }
        assert!(last_err < 1e-9);
    }

    #[test]
    fn fail_does_not_underflow_to_garbage() {
        let params = NetworkParams::from_lambda(1e3).unwrap();
        let f = fail(&params, 1.0, 1e3).unwrap();
        assert_eq!(f, 0.0);
        assert!(success(&params, 1.0, 1e3).unwrap() == 1.0);
    }

    #[test]
    fn fail_rejects_bad_domain() {
        let params = bitcoin();
        assert!(fail(&params, -0.1, 1.0).is_err());
        assert!(fail(&params, 1.1, 1.0).is_err());
        assert!(fail(&params, 0.5, -1.0).is_err());
        assert!(fail(&params, 0.5, f64::NAN).is_err());
    }

    #[test]
    fn fail_is_memoryless() {
        let params = NetworkParams::from_lambda(0.37).unwrap();
        let joint = fail(&params, 1.0, 7.5).unwrap();
        let split = fail(&params, 1.0, 3.0).unwrap() * fail(&params, 1.0, 4.5).unwrap();
        assert!((joint - split).abs() < 1e-15);
    }

    #[test]
    fn query_validation() {
        assert!(FrontrunQuery::new(0.0, 0.9, 1.0).is_err());
        assert!(FrontrunQuery::new(0.5, 1.0, 1.0).is_err());
        assert!(FrontrunQuery::new(0.95, 0.9, 1.0).is_err());
        assert!(FrontrunQuery::new(0.5, 0.9, -1.0).is_err());
        assert!(FrontrunQuery::new(0.5, 0.9, 0.0).is_ok());
    }

    #[test]
    fn bitcoin_frontrun_numbers() {
        let q = FrontrunQuery::new(0.5, 0.9, 11.0).unwrap();
        let pf = frontrun_probability(&bitcoin(), &q);
        assert!((pf - 0.01).abs() <= 0.005, "{pf}");
        let scaled = NetworkParams::from_lambda(566.0 / 600.0).unwrap();
        let pf = frontrun_probability(&scaled, &q);
        assert!((pf - 0.99).abs() <= 0.005, "{pf}");
        // 13 second block interval
        let eth = NetworkParams::from_lambda(1.0 / 13.0).unwrap();
        let pf = frontrun_probability(&eth, &q);
        assert!((pf - 0.36).abs() <= 0.03, "{pf}");
    }

    #[test]
    fn zero_advantage_gives_zero() {
        let q = FrontrunQuery::new(0.5, 0.9, 0.0).unwrap();
        assert_eq!(frontrun_probability(&bitcoin(), &q), 0.0);
        assert_eq!(frontrun_lower_bound(&bitcoin(), &q), 0.0);
    }

    #[test]
    fn lower_bound_bitcoin() {
        let q = FrontrunQuery::new(0.5, 0.9, 11.0).unwrap();
        let x = 0.5 * 11.0 / 600.0;
        let oracle = x - 0.5 * x * x;
        let got = frontrun_lower_bound(&bitcoin(), &q);
        assert!((got - 0.009125).abs() < 1e-6);
        assert!((got - oracle).abs() < 1e-15);
    }
}
