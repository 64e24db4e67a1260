use serde::{Deserialize, Serialize};

use super::{AnalyticsError, NetworkParams, PropagationProfile};

/// Default truncation threshold on the undecided probability mass.
pub const DEFAULT_EPSILON: f64 = 1e-12;

/// A saturated race whose per-round decision probability is below this is
/// treated as never resolving.
const STALL_DECIDE: f64 = 1e-15;

/// Outcome of the two-block acceptance race.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaResult {
    /// Probability that A's block is eventually accepted.
    pub psi_a: f64,
    /// Probability that B's block is eventually accepted.
    pub psi_b: f64,
    /// Probability mass still undecided where the series was cut off.
    pub residual: f64,
    /// `psi_a / (1 - psi_a)`.
    pub alpha_f: f64,
    /// Index of the last round included in the series.
    pub rounds_evaluated: u64,
}

impl AlphaResult {
    /// The ratio with the roles of A and B exchanged, `psi_b / (1 - psi_b)`.
    pub fn alpha_swapped(&self) -> f64 {
        self.psi_b / (1.0 - self.psi_b)
    }

    /// `psi_a / psi_b`, the ratio before approximating `psi_b` by `1 - psi_a`.
    pub fn alpha_direct(&self) -> f64 {
        self.psi_a / self.psi_b
    }
}

/// Neumaier compensated sum.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Per-round transition probabilities of the race.
struct RoundOdds {
    /// A's fraction mines and B's does not.
    win_a: f64,
    /// B's fraction mines and A's does not.
    win_b: f64,
    /// `ln(1 - win_a - win_b)`: both or neither mine.
    log_undecided: f64,
}

fn round_odds(params: &NetworkParams, phi_a: f64, phi_b: f64) -> RoundOdds {
    let t = params.round_seconds();
    let (lfa, lfb) = (params.log_fail(phi_a, t), params.log_fail(phi_b, t));
    let (fail_a, fail_b) = (lfa.exp(), lfb.exp());
    let (succ_a, succ_b) = (-lfa.exp_m1(), -lfb.exp_m1());
    let win_a = succ_a * fail_b;
    let win_b = succ_b * fail_a;
    RoundOdds {
        win_a,
        win_b,
        log_undecided: (-(win_a + win_b)).ln_1p(),
    }
}

/// Publishing fairness of the faster block A over B.
///
/// Sums, over rounds `i >= 1`, the probability that the race is still tied
/// after round `i-1` and only A's fraction mines in round `i`. The product
/// of undecided probabilities is carried in log space. Once the profile is
/// saturated the remaining terms form a geometric series, which is summed
/// in closed form up to the first round where the undecided mass drops
/// below `epsilon`.
///
/// On a stalled race (saturated decision probability below 1e-15 per round)
/// the partial result is returned inside [`AnalyticsError::NonConvergence`].
pub fn alpha_f(
    params: &NetworkParams,
    profile: &PropagationProfile,
    epsilon: f64,
) -> Result<AlphaResult, AnalyticsError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(AnalyticsError::Domain(format!(
            "epsilon must be in (0,1), got {epsilon}"
        )));
    }
    let log_eps = epsilon.ln();
    let saturated = profile.saturation_round().max(1);
    let mut psi_a = CompensatedSum::default();
    let mut psi_b = CompensatedSum::default();
    // round 0 has no accepted fractions, so its undecided factor is exactly 1
    let mut log_undecided = 0.0_f64;

    let finish = |psi_a: CompensatedSum, psi_b: CompensatedSum, log_undecided: f64, rounds| {
        let psi_a = psi_a.value();
        AlphaResult {
            psi_a,
            psi_b: psi_b.value(),
            residual: log_undecided.exp(),
            alpha_f: psi_a / (1.0 - psi_a),
            rounds_evaluated: rounds,
        }
    };

    for round in 1..saturated {
        let odds = round_odds(params, profile.phi_a(round), profile.phi_b(round));
        let reach = log_undecided.exp();
        psi_a.add(reach * odds.win_a);
        psi_b.add(reach * odds.win_b);
        log_undecided += odds.log_undecided;
        if log_undecided < log_eps {
            return Ok(finish(psi_a, psi_b, log_undecided, round as u64));
        }
    }

    let (phi_a, phi_b) = profile.final_split();
    let odds = round_odds(params, phi_a, phi_b);
    let decide = odds.win_a + odds.win_b;
    if decide < STALL_DECIDE {
        let partial = finish(psi_a, psi_b, log_undecided, saturated as u64 - 1);
        return Err(AnalyticsError::NonConvergence {
            decide_per_round: decide,
            partial,
        });
    }
    // smallest n with log_undecided + n * ln(u) < ln(eps)
    let steps = if odds.log_undecided == f64::NEG_INFINITY {
        1.0
    } else {
        ((log_eps - log_undecided) / odds.log_undecided).floor() + 1.0
    };
    let reach = log_undecided.exp();
    // sum_{k<n} u^k = (1 - u^n) / (1 - u), with 1 - u = decide
    let geometric = if odds.log_undecided == f64::NEG_INFINITY {
        1.0 / decide
    } else {
        -(steps * odds.log_undecided).exp_m1() / decide
    };
    psi_a.add(reach * odds.win_a * geometric);
    psi_b.add(reach * odds.win_b * geometric);
    log_undecided += steps * odds.log_undecided;
    let rounds = saturated as u64 - 1 + steps as u64;
    Ok(finish(psi_a, psi_b, log_undecided, rounds))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Round-by-round evaluation of the same series with no closed-form tail.
    fn stepwise(params: &NetworkParams, profile: &PropagationProfile, eps: f64) -> (f64, f64, f64) {
        let t = params.round_seconds();
        let mut undecided = 1.0;
        let (mut a, mut b) = (0.0, 0.0);
        let mut i = 1;
        while undecided >= eps {
            let fa = fail_plain(params, profile.phi_a(i), t);
            let fb = fail_plain(params, profile.phi_b(i), t);
            a += undecided * (1.0 - fa) * fb;
            b += undecided * (1.0 - fb) * fa;
            undecided *= (1.0 - fa) * (1.0 - fb) + fa * fb;
            i += 1;
        }
        (a, b, undecided)
    }

    fn fail_plain(params: &NetworkParams, phi: f64, t: f64) -> f64 {
        // (1-p)^x loses ~1e-7 relative accuracy when 1-p is rounded
        (phi * params.hash_rate() * t * (-params.p()).ln_1p()).exp()
    }

    #[test]
    fn symmetric_profile_is_fair() {
        for lambda in [0.01, 0.2, 1.0, 3.0] {
            for d in [1, 4, 10] {
                let params = NetworkParams::from_lambda(lambda).unwrap();
                let profile = PropagationProfile::linear(d, d).unwrap();
                let r = alpha_f(&params, &profile, DEFAULT_EPSILON).unwrap();
                assert!(
                    (r.alpha_f - 1.0).abs() < 1e-6,
                    "lambda={lambda} d={d}: {r:?}"
                );
            }
        }
    }

    #[test]
    fn matches_stepwise_series() {
        for (lambda, da, db) in [(0.2, 2, 4), (0.05, 1, 9), (0.7, 3, 3), (1.5, 1, 6)] {
            let params = NetworkParams::from_lambda(lambda).unwrap();
            let profile = PropagationProfile::linear(da, db).unwrap();
            let r = alpha_f(&params, &profile, 1e-12).unwrap();
            let (a, b, u) = stepwise(&params, &profile, 1e-12);
            assert!((r.psi_a - a).abs() < 1e-10, "{r:?} vs {a}");
            assert!((r.psi_b - b).abs() < 1e-10);
            assert!(r.residual < 1e-12 && u < 1e-12);
        }
    }

    #[test]
    fn mass_is_conserved() {
        let params = NetworkParams::from_lambda(0.3).unwrap();
        let profile = PropagationProfile::linear(2, 11).unwrap();
        let r = alpha_f(&params, &profile, 1e-9).unwrap();
        assert!((r.psi_a + r.psi_b + r.residual - 1.0).abs() < 1e-9);
        assert!(r.residual < 1e-9);
        assert!(((1.0 - r.psi_a) - r.psi_b).abs() <= r.residual + 1e-15);
    }

    #[test]
    fn swapped_ratio_is_reciprocal() {
        let params = NetworkParams::from_lambda(0.4).unwrap();
        let profile = PropagationProfile::linear(2, 7).unwrap();
        let r = alpha_f(&params, &profile, DEFAULT_EPSILON).unwrap();
        assert!((r.alpha_f * r.alpha_swapped() - 1.0).abs() < 1e-6);
        assert!(r.alpha_f > 1.0);
    }

    #[test]
    fn increasing_in_slow_delay() {
        let params = NetworkParams::from_lambda(0.1).unwrap();
        let mut last = 0.0;
        for db in 2..40 {
            let profile = PropagationProfile::linear(2, db).unwrap();
            let r = alpha_f(&params, &profile, DEFAULT_EPSILON).unwrap();
            assert!(r.alpha_f > last, "delta_b={db}");
            last = r.alpha_f;
        }
    }

    #[test]
    fn stalled_race_reports_partial() {
        let params = NetworkParams::from_lambda(100.0).unwrap();
        let profile = PropagationProfile::linear(1, 1).unwrap();
        match alpha_f(&params, &profile, DEFAULT_EPSILON) {
            Err(AnalyticsError::NonConvergence { partial, .. }) => {
                assert!(partial.residual > 0.99);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_epsilon() {
        let params = NetworkParams::from_lambda(0.3).unwrap();
        let profile = PropagationProfile::linear(1, 2).unwrap();
        assert!(alpha_f(&params, &profile, 0.0).is_err());
        assert!(alpha_f(&params, &profile, 1.0).is_err());
    }
}
