use serde::{Deserialize, Serialize};

use super::AnalyticsError;

const PROFILE_TOL: f64 = 1e-12;

/// Per-round fractions of the network that have accepted each of two
/// competing blocks mined in the same round.
///
/// Entry `i` is the state at the start of round `i` after the race began;
/// entry 0 is the mining round itself, where nobody has accepted either
/// block yet. Rounds past the stored sequence repeat the last entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationProfile {
    delta_a: u32,
    delta_b: u32,
    phi_a: Vec<f64>,
    phi_b: Vec<f64>,
}

impl PropagationProfile {
    /// Builds a profile from explicit per-round fractions.
    ///
    /// Both sequences must cover at least rounds `0..=delta_b` and be
    /// saturated at the `delta_b / (delta_a + delta_b)` split from round
    /// `delta_b` onwards.
    pub fn new(
        delta_a: u32,
        delta_b: u32,
        phi_a: Vec<f64>,
        phi_b: Vec<f64>,
    ) -> Result<Self, AnalyticsError> {
        let profile = Self {
            delta_a,
            delta_b,
            phi_a,
            phi_b,
        };
        profile.validate()?;
        Ok(profile)
    }

    /// Linear propagation from opposite ends of the network.
    ///
    /// Block A reaches `i / delta_a` of the nodes after `i` rounds and block
    /// B reaches `i / delta_b`. A node counts for whichever block reached it
    /// first, so the two fronts meet at round
    /// `t* = delta_a * delta_b / (delta_a + delta_b)`:
    ///
    /// ```text
    /// phi_a(i) = min(i / delta_a, delta_b / (delta_a + delta_b))
    /// phi_b(i) = min(i / delta_b, delta_a / (delta_a + delta_b))
    /// ```
    ///
    /// Both fronts saturate together at `t* <= delta_a <= delta_b`, after
    /// which the fractions sum to one.
    pub fn linear(delta_a: u32, delta_b: u32) -> Result<Self, AnalyticsError> {
        if delta_a == 0 {
            return Err(AnalyticsError::InvalidProfile(
                "propagation delays must be at least one round".into(),
            ));
        }
        if delta_a > delta_b {
            return Err(AnalyticsError::InvalidProfile(format!(
                "delta_a={delta_a} exceeds delta_b={delta_b}; order the blocks so A is faster"
            )));
        }
        let da = f64::from(delta_a);
        let db = f64::from(delta_b);
        let split_a = db / (da + db);
        let split_b = da / (da + db);
        let len = delta_b as usize + 1;
        let mut phi_a = Vec::with_capacity(len);
        let mut phi_b = Vec::with_capacity(len);
        for i in 0..len {
            let i = i as f64;
            phi_a.push((i / da).min(split_a));
            phi_b.push((i / db).min(split_b));
        }
        Self::new(delta_a, delta_b, phi_a, phi_b)
    }

    fn validate(&self) -> Result<(), AnalyticsError> {
        let bad = |msg: String| Err(AnalyticsError::InvalidProfile(msg));
        if self.delta_a == 0 || self.delta_a > self.delta_b {
            return bad(format!(
                "need 1 <= delta_a <= delta_b, got ({}, {})",
                self.delta_a, self.delta_b
            ));
        }
        let needed = self.delta_b as usize + 1;
        if self.phi_a.len() != self.phi_b.len() || self.phi_a.len() < needed {
            return bad(format!(
                "fraction sequences must have equal length >= {needed}"
            ));
        }
        let da = f64::from(self.delta_a);
        let db = f64::from(self.delta_b);
        let (split_a, split_b) = (db / (da + db), da / (da + db));
        for i in 0..self.phi_a.len() {
            let (a, b) = (self.phi_a[i], self.phi_b[i]);
            if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
                return bad(format!("round {i}: fractions ({a}, {b}) outside [0,1]"));
            }
            if a + b > 1.0 + PROFILE_TOL {
                return bad(format!("round {i}: fractions sum to {} > 1", a + b));
            }
            if i > 0 && (a < self.phi_a[i - 1] || b < self.phi_b[i - 1]) {
                return bad(format!("round {i}: fractions decrease"));
            }
            if i >= self.delta_b as usize
                && ((a - split_a).abs() > PROFILE_TOL || (b - split_b).abs() > PROFILE_TOL)
            {
                return bad(format!(
                    "round {i}: expected saturated split ({split_a}, {split_b}), got ({a}, {b})"
                ));
            }
        }
        Ok(())
    }

    pub fn delta_a(&self) -> u32 {
        self.delta_a
    }

    pub fn delta_b(&self) -> u32 {
        self.delta_b
    }

    /// Fraction accepting A's block at round `i`.
    pub fn phi_a(&self, i: usize) -> f64 {
        self.phi_a[i.min(self.phi_a.len() - 1)]
    }

    /// Fraction accepting B's block at round `i`.
    pub fn phi_b(&self, i: usize) -> f64 {
        self.phi_b[i.min(self.phi_b.len() - 1)]
    }

    /// First round from which both fractions stay constant.
    pub fn saturation_round(&self) -> usize {
        let last = self.phi_a.len() - 1;
        (0..=last)
            .rev()
            .take_while(|&i| self.phi_a[i] == self.phi_a[last] && self.phi_b[i] == self.phi_b[last])
            .last()
            .unwrap_or(last)
    }

    /// Saturated split `(phi_a, phi_b)`.
    pub fn final_split(&self) -> (f64, f64) {
        (
            *self.phi_a.last().expect("non-empty"),
            *self.phi_b.last().expect("non-empty"),
        )
    }
}
