use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{GameError, PayoffMatrix};

const PROB_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedProfile {
    pub row_mix: Vec<f64>,
    pub col_mix: Vec<f64>,
}

impl MixedProfile {
    pub fn new(row_mix: Vec<f64>, col_mix: Vec<f64>) -> Result<Self, GameError> {
        for mix in [&row_mix, &col_mix] {
            let sum: f64 = mix.iter().sum();
            if mix.is_empty() || mix.iter().any(|&p| !(p >= 0.0)) || (sum - 1.0).abs() > PROB_TOL {
                return Err(GameError::InvalidProfile(format!(
                    "{mix:?} is not a probability vector"
                )));
            }
        }
        Ok(Self { row_mix, col_mix })
    }

    pub fn pure(n_rows: usize, row: usize, n_cols: usize, col: usize) -> Self {
        let mut row_mix = vec![0.0; n_rows];
        let mut col_mix = vec![0.0; n_cols];
        row_mix[row] = 1.0;
        col_mix[col] = 1.0;
        Self { row_mix, col_mix }
    }

    /// Builds a profile from `(label, probability)` pairs; unnamed
    /// strategies get probability zero.
    pub fn from_labels(
        matrix: &PayoffMatrix,
        row: &[(&str, f64)],
        col: &[(&str, f64)],
    ) -> Result<Self, GameError> {
        let spread = |labels: &[String], pairs: &[(&str, f64)]| {
            let mut mix = vec![0.0; labels.len()];
            for &(l, p) in pairs {
                let i = labels
                    .iter()
                    .position(|x| x == l)
                    .ok_or_else(|| GameError::InvalidProfile(format!("unknown strategy '{l}'")))?;
                mix[i] += p;
            }
            Ok::<_, GameError>(mix)
        };
        Self::new(
            spread(matrix.row_strategies(), row)?,
            spread(matrix.col_strategies(), col)?,
        )
    }

    fn check(&self, matrix: &PayoffMatrix) -> Result<(), GameError> {
        if self.row_mix.len() != matrix.n_rows() || self.col_mix.len() != matrix.n_cols() {
            return Err(GameError::InvalidProfile(format!(
                "profile is {}x{}, matrix is {}x{}",
                self.row_mix.len(),
                self.col_mix.len(),
                matrix.n_rows(),
                matrix.n_cols()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regret {
    pub row: f64,
    pub col: f64,
}

impl Regret {
    pub fn max(&self) -> f64 {
        self.row.max(self.col)
    }
}

/// Expected payoffs `(row, col)` under `profile`.
pub fn expected_payoffs(
    matrix: &PayoffMatrix,
    profile: &MixedProfile,
) -> Result<(f64, f64), GameError> {
    profile.check(matrix)?;
    let (mut a, mut b) = (0.0, 0.0);
    for (i, &x) in profile.row_mix.iter().enumerate() {
        for (j, &y) in profile.col_mix.iter().enumerate() {
            let (u, v) = matrix.payoff(i, j);
            a += x * y * u;
            b += x * y * v;
        }
    }
    Ok((a, b))
}

/// Best gain either player gets from a pure deviation.
pub fn best_response_regret(
    matrix: &PayoffMatrix,
    profile: &MixedProfile,
) -> Result<Regret, GameError> {
    let (a, b) = expected_payoffs(matrix, profile)?;
    let row_best = (0..matrix.n_rows())
        .map(|i| {
            (0..matrix.n_cols())
                .map(|j| profile.col_mix[j] * matrix.row_payoff(i, j))
                .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let col_best = (0..matrix.n_cols())
        .map(|j| {
            (0..matrix.n_rows())
                .map(|i| profile.row_mix[i] * matrix.col_payoff(i, j))
                .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(Regret {
        row: row_best - a,
        col: col_best - b,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub profile: MixedProfile,
    pub row_value: f64,
    pub col_value: f64,
    pub regret: Regret,
}

/// A support pair whose indifference system could not be solved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportDiagnostic {
    pub row_support: Vec<String>,
    pub col_support: Vec<String>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EnumerationReport {
    pub equilibria: Vec<Equilibrium>,
    pub diagnostics: Vec<SupportDiagnostic>,
}

/// Support enumeration over equal-sized support pairs.
///
/// Each candidate solves both indifference systems, drops solutions with
/// negative weights, and keeps the profile if neither player can gain more
/// than `epsilon` by a pure deviation. Duplicates reached from different
/// supports are merged.
pub fn msne_enumerate(matrix: &PayoffMatrix, epsilon: f64) -> Result<EnumerationReport, GameError> {
    if !(epsilon >= 0.0) {
        return Err(GameError::InvalidTolerance(epsilon));
    }
    let mut report = EnumerationReport::default();
    let (m, n) = (matrix.n_rows(), matrix.n_cols());
    for k in 1..=m.min(n) {
        for rows in subsets(m, k) {
            for cols in subsets(n, k) {
                let diag = |reason: String| SupportDiagnostic {
                    row_support: rows
                        .iter()
                        .map(|&i| matrix.row_strategies()[i].clone())
                        .collect(),
                    col_support: cols
                        .iter()
                        .map(|&j| matrix.col_strategies()[j].clone())
                        .collect(),
                    reason,
                };
                // column weights make every supported row indifferent
                let y = match solve_indifference(k, |a, b| matrix.row_payoff(rows[a], cols[b])) {
                    Ok(y) => y,
                    Err(reason) => {
                        report
                            .diagnostics
                            .push(diag(format!("column mix: {reason}")));
                        continue;
                    }
                };
                let x = match solve_indifference(k, |a, b| matrix.col_payoff(rows[b], cols[a])) {
                    Ok(x) => x,
                    Err(reason) => {
                        report.diagnostics.push(diag(format!("row mix: {reason}")));
                        continue;
                    }
                };
                if x.iter().chain(&y).any(|&p| p < -PROB_TOL) {
                    continue;
                }
                let mut profile = MixedProfile {
                    row_mix: vec![0.0; m],
                    col_mix: vec![0.0; n],
                };
                for (a, &i) in rows.iter().enumerate() {
                    profile.row_mix[i] = x[a].max(0.0);
                }
                for (b, &j) in cols.iter().enumerate() {
                    profile.col_mix[j] = y[b].max(0.0);
                }
                normalize(&mut profile.row_mix);
                normalize(&mut profile.col_mix);
                let regret = best_response_regret(matrix, &profile)?;
                if regret.max() > epsilon {
                    continue;
                }
                let duplicate = report.equilibria.iter().any(|e| {
                    close(&e.profile.row_mix, &profile.row_mix)
                        && close(&e.profile.col_mix, &profile.col_mix)
                });
                if !duplicate {
                    let (row_value, col_value) = expected_payoffs(matrix, &profile)?;
                    report.equilibria.push(Equilibrium {
                        profile,
                        row_value,
                        col_value,
                        regret,
                    });
                }
            }
        }
    }
    Ok(report)
}

/// Solves `sum_b u(a, b) w_b = v` for every `a`, `sum_b w_b = 1`.
fn solve_indifference(k: usize, u: impl Fn(usize, usize) -> f64) -> Result<Vec<f64>, String> {
    if k == 1 {
        return Ok(vec![1.0]);
    }
    let mut sys = DMatrix::<f64>::zeros(k + 1, k + 1);
    let mut rhs = DVector::<f64>::zeros(k + 1);
    for a in 0..k {
        for b in 0..k {
            sys[(a, b)] = u(a, b);
        }
        sys[(a, k)] = -1.0;
    }
    for b in 0..k {
        sys[(k, b)] = 1.0;
    }
    rhs[k] = 1.0;
    let scale = sys.amax().max(1.0);
    let lu = sys.clone().full_piv_lu();
    let sol = lu
        .solve(&rhs)
        .ok_or_else(|| "singular indifference system".to_string())?;
    let residual = (&sys * &sol - &rhs).amax();
    let min_pivot = lu
        .u()
        .diagonal()
        .iter()
        .map(|d| d.abs())
        .fold(f64::INFINITY, f64::min);
    if min_pivot < 1e-12 * scale || residual > 1e-8 * scale {
        return Err(format!(
            "ill-conditioned indifference system (pivot {min_pivot:.3e}, residual {residual:.3e})"
        ));
    }
    Ok(sol.iter().take(k).copied().collect())
}

fn normalize(mix: &mut [f64]) {
    let s: f64 = mix.iter().sum();
    mix.iter_mut().for_each(|p| *p /= s);
}

fn close(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-9)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    go(0, n, k, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn pennies() -> PayoffMatrix {
        PayoffMatrix::new(
            labels(&["heads", "tails"]),
            labels(&["heads", "tails"]),
            vec![vec![(2.0, 0.0), (0.0, 2.0)], vec![(0.0, 2.0), (2.0, 0.0)]],
        )
        .unwrap()
    }

    #[test]
    fn matching_pennies_mixes_evenly() {
        let report = msne_enumerate(&pennies(), 1e-9).unwrap();
        assert_eq!(report.equilibria.len(), 1);
        let e = &report.equilibria[0];
        for p in e.profile.row_mix.iter().chain(&e.profile.col_mix) {
            assert!((p - 0.5).abs() < 1e-12);
        }
        assert!((e.row_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn prisoners_dilemma_has_only_mutual_defection() {
        let m = PayoffMatrix::new(
            labels(&["cooperate", "defect"]),
            labels(&["cooperate", "defect"]),
            vec![vec![(3.0, 3.0), (0.0, 5.0)], vec![(5.0, 0.0), (1.0, 1.0)]],
        )
        .unwrap();
        let report = msne_enumerate(&m, 1e-9).unwrap();
        assert_eq!(report.equilibria.len(), 1);
        assert_eq!(report.equilibria[0].profile, MixedProfile::pure(2, 1, 2, 1));
    }

    #[test]
    fn uniform_pennies_has_zero_regret() {
        let p = MixedProfile::new(vec![0.5, 0.5], vec![0.5, 0.5]).unwrap();
        let r = best_response_regret(&pennies(), &p).unwrap();
        assert!(r.row.abs() < 1e-12 && r.col.abs() < 1e-12);
        let pure = MixedProfile::pure(2, 0, 2, 0);
        assert!((best_response_regret(&pennies(), &pure).unwrap().col - 2.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_supports_are_reported_not_fatal() {
        let m = PayoffMatrix::new(
            labels(&["a", "b"]),
            labels(&["x", "y"]),
            vec![vec![(1.0, 1.0), (1.0, 1.0)], vec![(1.0, 1.0), (1.0, 1.0)]],
        )
        .unwrap();
        let report = msne_enumerate(&m, 1e-9).unwrap();
        assert_eq!(report.equilibria.len(), 4);
        assert_eq!(report.diagnostics.len(), 1);
        assert_eq!(report.diagnostics[0].row_support, ["a", "b"]);
    }

    #[test]
    fn rejects_bad_profiles() {
        assert!(MixedProfile::new(vec![0.5, 0.6], vec![1.0]).is_err());
        assert!(MixedProfile::new(vec![1.5, -0.5], vec![1.0]).is_err());
        let p = MixedProfile::new(vec![1.0], vec![1.0]).unwrap();
        assert!(best_response_regret(&pennies(), &p).is_err());
        assert!(
            MixedProfile::from_labels(&pennies(), &[("edge", 1.0)], &[("heads", 1.0)]).is_err()
        );
    }

    #[test]
    fn subsets_are_complete() {
        assert_eq!(subsets(4, 2).len(), 6);
        assert_eq!(subsets(3, 3), vec![vec![0, 1, 2]]);
    }
}
