use super::{SimError, SimOutcome};

/// Smallest `eta` such that every node with compute share `c` earned at
/// least `(1 - eta) * c` of the blocks on the maximal chains.
///
/// Nodes with zero compute share are skipped.
pub fn eta_fairness_violation(
    outcome: &SimOutcome,
    compute_shares: &[f64],
) -> Result<f64, SimError> {
    if compute_shares.len() != outcome.per_node_blocks.len() {
        return Err(SimError::InvalidConfig(format!(
            "{} compute shares for {} nodes",
            compute_shares.len(),
            outcome.per_node_blocks.len()
        )));
    }
    let total: f64 = compute_shares.iter().sum();
    if (total - 1.0).abs() > 1e-9 || compute_shares.iter().any(|&c| !(c >= 0.0)) {
        return Err(SimError::InvalidConfig(format!(
            "compute shares must be non-negative and sum to 1, got sum {total}"
        )));
    }
    let blocks: f64 = outcome.per_node_blocks.iter().sum();
    if blocks == 0.0 {
        return Ok(1.0);
    }
    let eta = compute_shares
        .iter()
        .zip(&outcome.per_node_blocks)
        .filter(|(&c, _)| c > 0.0)
        .map(|(&c, &b)| 1.0 - (b / blocks) / c)
        .fold(0.0_f64, f64::max);
    Ok(eta.clamp(0.0, 1.0))
}
