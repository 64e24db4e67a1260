use serde::{Deserialize, Serialize};

use super::SimError;

/// `delay(src, dst)`: rounds after creation at which `dst` sees a block
/// mined by `src`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    n: usize,
    delays: Vec<u32>,
}

impl DistanceMatrix {
    pub fn new(rows: Vec<Vec<u32>>) -> Result<Self, SimError> {
        let n = rows.len();
        if n == 0 {
            return Err(SimError::InvalidDistance("empty matrix".into()));
        }
        let mut delays = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(SimError::InvalidDistance(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, &d) in row.iter().enumerate() {
                if i == j && d != 0 {
                    return Err(SimError::InvalidDistance(format!(
                        "self-delay of node {i} must be 0"
                    )));
                }
                if i != j && d == 0 {
                    return Err(SimError::InvalidDistance(format!(
                        "delay {i}->{j} must be at least one round"
                    )));
                }
            }
            delays.extend(row);
        }
        Ok(Self { n, delays })
    }

    /// Every cross-node delay equal to `delay`.
    pub fn uniform(n: usize, delay: u32) -> Result<Self, SimError> {
        Self::new(
            (0..n)
                .map(|i| (0..n).map(|j| if i == j { 0 } else { delay }).collect())
                .collect(),
        )
    }

    /// Fast nodes exchange blocks with everyone in one round. Slow nodes are
    /// grouped into clusters of `slow_cluster_size` consecutive slow indices;
    /// slow nodes in the same cluster also see each other after one round,
    /// while blocks crossing between slow clusters take `delta_slow` rounds.
    pub fn fast_slow(
        n: usize,
        fast_set: &[usize],
        slow_cluster_size: usize,
        delta_slow: u32,
    ) -> Result<Self, SimError> {
        if slow_cluster_size == 0 {
            return Err(SimError::InvalidDistance(
                "slow cluster size must be at least 1".into(),
            ));
        }
        if let Some(&bad) = fast_set.iter().find(|&&i| i >= n) {
            return Err(SimError::InvalidDistance(format!(
                "fast node {bad} out of range for {n} nodes"
            )));
        }
        let mut fast = vec![false; n];
        for &i in fast_set {
            fast[i] = true;
        }
        let mut cluster = vec![usize::MAX; n];
        for (rank, i) in (0..n).filter(|&i| !fast[i]).enumerate() {
            cluster[i] = rank / slow_cluster_size;
        }
        let rows = (0..n)
            .map(|src| {
                (0..n)
                    .map(|dst| {
                        if src == dst {
                            0
                        } else if fast[src] || fast[dst] || cluster[src] == cluster[dst] {
                            1
                        } else {
                            delta_slow
                        }
                    })
                    .collect()
            })
            .collect();
        Self::new(rows)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn delay(&self, src: usize, dst: usize) -> u32 {
        self.delays[src * self.n + dst]
    }
}
