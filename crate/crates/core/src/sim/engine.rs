use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::block::{BlockId, BlockStore};
use super::distance::DistanceMatrix;
use super::strategy::{select_parent, Candidate, StrategyConfig};
use super::SimError;

const LOTTERY_STREAM: u64 = 0;
const TIE_BREAK_STREAM: u64 = 1;

/// Per-node lottery win probability for a network producing `lambda`
/// blocks per second split evenly over `n` nodes.
pub fn lottery_rate_for(lambda: f64, round_seconds: f64, n: usize) -> f64 {
    lambda * round_seconds / n as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub fast_set: Vec<usize>,
    pub rounds: u64,
    /// Per-node, per-round probability of mining a block.
    pub lottery_rate: f64,
    /// Cap on fees one block can take, in rounds of accrual. May be infinite.
    pub max_block_size: f64,
    pub seed: u64,
    pub strategies: Vec<StrategyConfig>,
}

impl SimConfig {
    /// All-petty configuration with no fast nodes and the default cap of
    /// `1 / lottery_rate` rounds of fees.
    pub fn new(n: usize, rounds: u64, lottery_rate: f64, seed: u64) -> Self {
        Self {
            n,
            fast_set: Vec::new(),
            rounds,
            lottery_rate,
            max_block_size: 1.0 / lottery_rate,
            seed,
            strategies: vec![StrategyConfig::petty(); n],
        }
    }

    pub fn with_fast_set(mut self, fast_set: Vec<usize>) -> Self {
        self.fast_set = fast_set;
        self
    }

    pub fn with_max_block_size(mut self, max_block_size: f64) -> Self {
        self.max_block_size = max_block_size;
        self
    }

    pub fn with_strategies(mut self, strategies: Vec<StrategyConfig>) -> Self {
        self.strategies = strategies;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Fast nodes get `fast`, everyone else `slow`.
    pub fn with_group_strategies(mut self, fast: StrategyConfig, slow: StrategyConfig) -> Self {
        self.strategies = (0..self.n)
            .map(|i| if self.is_fast(i) { fast } else { slow })
            .collect();
        self
    }

    pub fn is_fast(&self, node: usize) -> bool {
        self.fast_set.contains(&node)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InvalidConfig(msg));
        if self.n == 0 {
            return bad("need at least one node".into());
        }
        if self.rounds == 0 {
            return bad("need at least one round".into());
        }
        // a rate of exactly 1 is allowed for fully scripted single-miner runs
        if !(self.lottery_rate > 0.0 && self.lottery_rate <= 1.0) {
            return bad(format!("lottery rate {} outside (0,1]", self.lottery_rate));
        }
        if !(self.max_block_size > 0.0) {
            return bad(format!(
                "max block size {} must be positive",
                self.max_block_size
            ));
        }
        if self.fast_set.len() >= self.n {
            return bad(format!(
                "fast set of {} leaves no slow node among {}",
                self.fast_set.len(),
                self.n
            ));
        }
        let mut seen = vec![false; self.n];
        for &i in &self.fast_set {
            if i >= self.n || seen[i] {
                return bad(format!("fast node {i} out of range or repeated"));
            }
            seen[i] = true;
        }
        if self.strategies.len() != self.n {
            return bad(format!(
                "{} strategies for {} nodes",
                self.strategies.len(),
                self.n
            ));
        }
        for s in &self.strategies {
            s.validate()?;
        }
        Ok(())
    }
}

/// Summary of one simulation run. Shares are percentages of the total fee
/// mass, which accrues at one unit per round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    /// Reward per node, averaged over all maximal chains.
    pub per_node_reward: Vec<f64>,
    /// Blocks per node, averaged over all maximal chains.
    pub per_node_blocks: Vec<f64>,
    /// Lottery wins per node, i.e. blocks created.
    pub wins: Vec<u64>,
    /// Times each node deliberately forked below the best visible height.
    pub undercuts: Vec<u64>,
    pub fast_share: f64,
    pub slow_share: f64,
    pub chain_utilization: f64,
    pub fork_count: usize,
    pub orphan_count: usize,
    pub longest_height: u64,
    pub maximal_chain_count: usize,
}

/// Source of per-round lottery outcomes.
pub trait Lottery {
    /// Called exactly once per node per round, nodes in index order.
    fn wins(&mut self, round: u64, node: usize) -> bool;
}

/// Independent Bernoulli trials drawn from a dedicated seeded stream.
#[derive(Debug, Clone)]
pub struct SeededLottery {
    rng: ChaCha8Rng,
    rate: f64,
}

impl SeededLottery {
    pub fn new(seed: u64, rate: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(LOTTERY_STREAM);
        Self { rng, rate }
    }
}

impl Lottery for SeededLottery {
    fn wins(&mut self, _round: u64, _node: usize) -> bool {
        self.rng.random::<f64>() < self.rate
    }
}

/// Fixed schedule of winners per round.
#[derive(Debug, Clone, Default)]
pub struct ScriptedLottery {
    winners: BTreeMap<u64, Vec<usize>>,
}

impl ScriptedLottery {
    pub fn new<I: IntoIterator<Item = (u64, usize)>>(wins: I) -> Self {
        let mut winners: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for (round, node) in wins {
            winners.entry(round).or_default().push(node);
        }
        Self { winners }
    }
}

impl Lottery for ScriptedLottery {
    fn wins(&mut self, round: u64, node: usize) -> bool {
        self.winners
            .get(&round)
            .is_some_and(|nodes| nodes.contains(&node))
    }
}

/// A finished run: the summary plus the full block tree.
#[derive(Debug, Clone)]
pub struct SimRun {
    pub outcome: SimOutcome,
    pub store: BlockStore,
}

/// Runs the seeded simulation. Deterministic in `cfg`.
pub fn run_simulation(cfg: &SimConfig, distances: &DistanceMatrix) -> Result<SimOutcome, SimError> {
    simulate(
        cfg,
        distances,
        &mut SeededLottery::new(cfg.seed, cfg.lottery_rate),
    )
    .map(|run| run.outcome)
}

/// Runs the simulation with an explicit lottery. Tie-breaks still come from
/// `cfg.seed`.
pub fn simulate(
    cfg: &SimConfig,
    distances: &DistanceMatrix,
    lottery: &mut dyn Lottery,
) -> Result<SimRun, SimError> {
    cfg.validate()?;
    if distances.len() != cfg.n {
        return Err(SimError::InvalidDistance(format!(
            "matrix covers {} nodes, config has {}",
            distances.len(),
            cfg.n
        )));
    }
    let mut tie_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    tie_rng.set_stream(TIE_BREAK_STREAM);

    let mut store = BlockStore::new(cfg.max_block_size);
    let mut wins = vec![0u64; cfg.n];
    let mut undercuts = vec![0u64; cfg.n];
    let mut candidates = Vec::new();

    for round in 1..=cfg.rounds {
        for node in 0..cfg.n {
            if !lottery.wins(round, node) {
                continue;
            }
            frontier(&store, node, round, distances, &mut candidates);
            let strategy = &cfg.strategies[node];
            let choice = select_parent(&candidates, strategy, round, &mut tie_rng)
                .expect("genesis is always visible");
            let parent = store.get(choice.parent).expect("candidate from store");
            let claimable = parent.accrued(round).min(cfg.max_block_size);
            let leftover = choice.leftover.min(claimable);
            store.append(choice.parent, node, round, claimable - leftover, leftover)?;
            wins[node] += 1;
            if choice.forked {
                undercuts[node] += 1;
            }
        }
    }

    let outcome = summarize(cfg, &store, wins, undercuts);
    Ok(SimRun { outcome, store })
}

/// Blocks `node` can see in `round`: a block is visible once
/// `round - block.round >= delay(block.miner, node)`.
pub fn visible_blocks(
    store: &BlockStore,
    node: usize,
    round: u64,
    distances: &DistanceMatrix,
) -> Vec<BlockId> {
    store
        .iter()
        .filter(|b| is_visible(b.miner, b.round, node, round, distances))
        .map(|b| b.id)
        .collect()
}

fn is_visible(
    miner: Option<usize>,
    mined: u64,
    node: usize,
    round: u64,
    distances: &DistanceMatrix,
) -> bool {
    match miner {
        None => true,
        Some(m) => mined <= round && round - mined >= u64::from(distances.delay(m, node)),
    }
}

/// Visible blocks at the two greatest visible heights, which is all any
/// strategy looks at.
fn frontier(
    store: &BlockStore,
    node: usize,
    round: u64,
    distances: &DistanceMatrix,
    out: &mut Vec<Candidate>,
) {
    out.clear();
    let mut top: Option<u64> = None;
    for height in (0..=store.max_height()).rev() {
        if let Some(t) = top {
            if height + 1 < t {
                break;
            }
        }
        for &id in store.at_height(height) {
            let b = store.get(id).expect("indexed block");
            if is_visible(b.miner, b.round, node, round, distances) {
                top.get_or_insert(height);
                let seen_at = match b.miner {
                    None => 0,
                    Some(m) => b.round + u64::from(distances.delay(m, node)),
                };
                out.push(Candidate {
                    id,
                    height,
                    round: b.round,
                    leftover: b.leftover,
                    seen_at,
                });
            }
        }
    }
}

fn summarize(
    cfg: &SimConfig,
    store: &BlockStore,
    wins: Vec<u64>,
    undercuts: Vec<u64>,
) -> SimOutcome {
    let chains = store.maximal_chains();
    let mut reward = vec![0.0; cfg.n];
    let mut blocks = vec![0.0; cfg.n];
    for chain in &chains {
        for &id in chain {
            let b = store.get(id).expect("chain block");
            if let Some(m) = b.miner {
                reward[m] += b.reward;
                blocks[m] += 1.0;
            }
        }
    }
    let count = chains.len() as f64;
    for i in 0..cfg.n {
        reward[i] /= count;
        blocks[i] /= count;
    }
    let total_fees = cfg.rounds as f64;
    let (mut fast, mut slow) = (0.0, 0.0);
    for (i, r) in reward.iter().enumerate() {
        if cfg.is_fast(i) {
            fast += r;
        } else {
            slow += r;
        }
    }
    let fast_share = 100.0 * fast / total_fees;
    let slow_share = 100.0 * slow / total_fees;
    SimOutcome {
        per_node_reward: reward,
        per_node_blocks: blocks,
        wins,
        undercuts,
        fast_share,
        slow_share,
        chain_utilization: fast_share + slow_share,
        fork_count: store.fork_count(),
        orphan_count: store.orphan_count(),
        longest_height: store.max_height(),
        maximal_chain_count: chains.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_miner_every_round() {
        let cfg = SimConfig::new(1, 5, 1.0, 0).with_max_block_size(f64::INFINITY);
        let d = DistanceMatrix::uniform(1, 1).unwrap();
        let out = run_simulation(&cfg, &d).unwrap();
        assert_eq!(out.longest_height, 5);
        assert_eq!(out.per_node_reward, vec![5.0]);
        assert_eq!(out.chain_utilization, 100.0);
        assert_eq!(out.fork_count, 0);
    }

    #[test]
    fn alternating_winners_hand_trace() {
        // node 0 wins rounds 1, 5, 9; node 1 wins rounds 3, 7
        let cfg = SimConfig::new(2, 10, 0.5, 11).with_max_block_size(f64::INFINITY);
        let d = DistanceMatrix::uniform(2, 1).unwrap();
        let mut lottery = ScriptedLottery::new([(1, 0), (3, 1), (5, 0), (7, 1), (9, 0)]);
        let run = simulate(&cfg, &d, &mut lottery).unwrap();
        let out = &run.outcome;
        assert_eq!(out.fork_count, 0);
        assert_eq!(out.longest_height, 5);
        // rewards: r1 -> 1, r3 -> 2, r5 -> 2, r7 -> 2, r9 -> 2
        assert_eq!(out.per_node_reward, vec![5.0, 4.0]);
        assert_eq!(out.per_node_blocks, vec![3.0, 2.0]);
        assert_eq!(out.wins, vec![3, 2]);
        assert!((out.chain_utilization - 90.0).abs() < 1e-12);
    }

    #[test]
    fn delayed_view_creates_a_fork() {
        // node 1 cannot see node 0's round-1 block until round 4
        let cfg = SimConfig::new(2, 6, 0.5, 3).with_max_block_size(f64::INFINITY);
        let d = DistanceMatrix::new(vec![vec![0, 3], vec![1, 0]]).unwrap();
        let mut lottery = ScriptedLottery::new([(1, 0), (2, 1)]);
        let run = simulate(&cfg, &d, &mut lottery).unwrap();
        assert_eq!(run.outcome.fork_count, 1);
        assert_eq!(run.outcome.maximal_chain_count, 2);
        // each node owns its tip on one of the two chains
        assert_eq!(run.outcome.per_node_reward, vec![0.5, 1.0]);
        assert_eq!(run.outcome.per_node_blocks, vec![0.5, 0.5]);
    }

    #[test]
    fn visible_blocks_respects_delays() {
        let cfg = SimConfig::new(2, 6, 0.5, 3).with_max_block_size(f64::INFINITY);
        let d = DistanceMatrix::new(vec![vec![0, 3], vec![1, 0]]).unwrap();
        let mut lottery = ScriptedLottery::new([(1, 0)]);
        let run = simulate(&cfg, &d, &mut lottery).unwrap();
        assert_eq!(visible_blocks(&run.store, 1, 3, &d), vec![BlockId::GENESIS]);
        assert_eq!(
            visible_blocks(&run.store, 1, 4, &d),
            vec![BlockId::GENESIS, BlockId(1)]
        );
        assert_eq!(
            visible_blocks(&run.store, 0, 1, &d),
            vec![BlockId::GENESIS, BlockId(1)]
        );
    }

    #[test]
    fn cap_limits_claims() {
        let cfg = SimConfig::new(1, 10, 0.5, 0).with_max_block_size(2.0);
        let d = DistanceMatrix::uniform(1, 1).unwrap();
        let mut lottery = ScriptedLottery::new([(5, 0), (6, 0)]);
        let run = simulate(&cfg, &d, &mut lottery).unwrap();
        assert_eq!(run.outcome.per_node_reward, vec![3.0]);
        assert!((run.outcome.chain_utilization - 30.0).abs() < 1e-12);
    }

    #[test]
    fn undercutter_leaves_kappa() {
        let mut cfg = SimConfig::new(1, 10, 0.5, 0).with_max_block_size(f64::INFINITY);
        cfg.strategies = vec![StrategyConfig::major_undercut(1.5)];
        let d = DistanceMatrix::uniform(1, 1).unwrap();
        let mut lottery = ScriptedLottery::new([(4, 0), (8, 0)]);
        let run = simulate(&cfg, &d, &mut lottery).unwrap();
        let b1 = run.store.get(BlockId(1)).unwrap();
        assert_eq!((b1.reward, b1.leftover), (2.5, 1.5));
        let b2 = run.store.get(BlockId(2)).unwrap();
        assert_eq!((b2.reward, b2.leftover), (4.0, 1.5));
    }

    #[test]
    fn rejects_bad_configs() {
        let d = DistanceMatrix::uniform(2, 1).unwrap();
        let base = SimConfig::new(2, 10, 0.1, 0);
        assert!(run_simulation(&base.clone().with_fast_set(vec![0, 1]), &d).is_err());
        assert!(run_simulation(&base.clone().with_fast_set(vec![5]), &d).is_err());
        assert!(run_simulation(&SimConfig::new(2, 0, 0.1, 0), &d).is_err());
        assert!(run_simulation(&SimConfig::new(2, 10, 0.0, 0), &d).is_err());
        assert!(run_simulation(&base.clone().with_strategies(vec![]), &d).is_err());
        let d3 = DistanceMatrix::uniform(3, 1).unwrap();
        assert!(run_simulation(&base, &d3).is_err());
    }
}
