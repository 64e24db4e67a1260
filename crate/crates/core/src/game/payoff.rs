use rayon::prelude::*;

use super::{GameError, PayoffMatrix};
use crate::sim::{run_simulation, DistanceMatrix, SimConfig, StrategyConfig};

/// Fast-versus-slow payoff table from simulation.
///
/// Cell `(i, j)` runs `strategies[i]` on every fast node and `strategies[j]`
/// on every slow node, averaging group shares over `runs` seeds
/// `template.seed, template.seed + 1, ...`. The same seeds are used in every
/// cell so that cells differ only by strategy. The recorded standard error
/// is the larger of the two players'; it is blank when `runs == 1`.
pub fn build_payoff_matrix(
    strategies: &[(String, StrategyConfig)],
    template: &SimConfig,
    distances: &DistanceMatrix,
    runs: usize,
) -> Result<PayoffMatrix, GameError> {
    if runs == 0 {
        return Err(GameError::InvalidMatrix(
            "need at least one run per cell".into(),
        ));
    }
    if strategies.is_empty() {
        return Err(GameError::InvalidMatrix("no strategies given".into()));
    }
    let k = strategies.len();
    let jobs: Vec<(usize, usize, usize)> = (0..k)
        .flat_map(|i| (0..k).flat_map(move |j| (0..runs).map(move |r| (i, j, r))))
        .collect();
    let shares = jobs
        .par_iter()
        .map(|&(i, j, r)| {
            let cfg = template
                .clone()
                .with_seed(template.seed.wrapping_add(r as u64))
                .with_group_strategies(strategies[i].1, strategies[j].1);
            run_simulation(&cfg, distances).map(|o| (o.fast_share, o.slow_share))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut payoffs = vec![Vec::with_capacity(k); k];
    let mut errors = Vec::with_capacity(k * k);
    for (cell, samples) in shares.chunks(runs).enumerate() {
        let fast: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let slow: Vec<f64> = samples.iter().map(|s| s.1).collect();
        payoffs[cell / k].push((mean(&fast), mean(&slow)));
        errors.push((runs > 1).then(|| std_error(&fast).max(std_error(&slow))));
    }
    let labels: Vec<String> = strategies.iter().map(|s| s.0.clone()).collect();
    PayoffMatrix::with_std_errors(labels.clone(), labels, payoffs, errors)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn std_error(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    (var / xs.len() as f64).sqrt()
}
