use std::collections::BTreeMap;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::state::{total_block_ordering, BlockRef, OhieChainState};
use super::OhieError;

/// Where a new block would sit if it landed on one chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Landing {
    pub chain: usize,
    pub rank: u64,
    pub precedes_target: bool,
    /// Why the landing was impossible, if it was.
    pub rejected: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontrunOutcome {
    pub probability: Ratio<u64>,
    pub landings: Vec<Landing>,
}

/// Chance that a block announcing `candidate_next_rank`, landing on a
/// uniformly random chain tip, is ordered before `target`.
pub fn frontrun_success_probability(
    state: &OhieChainState,
    candidate_next_rank: u64,
    target: BlockRef,
) -> Result<FrontrunOutcome, OhieError> {
    if state.block(target).is_none() {
        return Err(OhieError::UnknownBlock(target));
    }
    let mut landings = Vec::with_capacity(state.k());
    let mut hits = 0u64;
    for chain in 0..state.k() {
        let mut next = state.clone();
        let rank = state.tip(chain).next_rank;
        match next.extend(chain, candidate_next_rank, 0.0) {
            Ok(new) => {
                let order = total_block_ordering(&next);
                let at = |r: BlockRef| order.iter().position(|&x| x == r).expect("block in order");
                let precedes = at(new) < at(target);
                hits += u64::from(precedes);
                landings.push(Landing {
                    chain,
                    rank,
                    precedes_target: precedes,
                    rejected: None,
                });
            }
            Err(e) => landings.push(Landing {
                chain,
                rank,
                precedes_target: false,
                rejected: Some(e.to_string()),
            }),
        }
    }
    Ok(FrontrunOutcome {
        probability: Ratio::new(hits, state.k() as u64),
        landings,
    })
}

pub fn expected_frontrun_reward(success_p: f64, reward: f64) -> Result<f64, OhieError> {
    if !(0.0..=1.0).contains(&success_p) {
        return Err(OhieError::InvalidInput(format!(
            "probability {success_p} outside [0, 1]"
        )));
    }
    if !(reward >= 0.0 && reward.is_finite()) {
        return Err(OhieError::InvalidInput(format!(
            "reward {reward} must be non-negative"
        )));
    }
    Ok(success_p * reward)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LandingCase {
    /// Nothing was dropped from this chain; the block simply extends it.
    Extends,
    /// The fork replaces exactly one block, so both branches are equally long.
    EqualFork,
    /// The fork is shorter than the chain it competes with.
    ShorterFork,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UndercutCase {
    pub chain: usize,
    pub case: LandingCase,
    pub rank: u64,
    pub success: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Undercut,
    Honest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UndercutReport {
    pub next_rank: Option<u64>,
    pub cases: Vec<UndercutCase>,
    pub success_probability: Ratio<u64>,
    pub stealable: f64,
    pub expected_undercut_reward: f64,
    pub honest_reward: f64,
    /// How many times the honest reward the stolen fees must exceed;
    /// `None` when no landing succeeds.
    pub threshold_factor: Option<Ratio<u64>>,
    pub verdict: Verdict,
}

/// Evaluates forking out `drop_set` (a suffix of one or more chains) to
/// steal its fees.
///
/// The undercutting block points at the surviving tip of every chain and
/// announces the largest next_rank among them, so it looks like an ordinary
/// fork. It lands on each chain with probability `1/k`: where nothing was
/// dropped it extends the chain; where one block was dropped it ties the
/// original branch and wins only if petty miners prefer its lower next_rank;
/// where more were dropped it is orphaned.
pub fn undercut_decision(
    state: &OhieChainState,
    drop_set: &[BlockRef],
    honest_reward: f64,
    petty_majority: bool,
) -> Result<UndercutReport, OhieError> {
    if !(honest_reward >= 0.0 && honest_reward.is_finite()) {
        return Err(OhieError::InvalidInput(format!(
            "honest reward {honest_reward} must be non-negative"
        )));
    }
    let dropped = dropped_per_chain(state, drop_set)?;
    let stealable: f64 = drop_set
        .iter()
        .map(|&r| state.block(r).expect("validated").fee_value)
        .sum();
    if drop_set.is_empty() {
        return Ok(UndercutReport {
            next_rank: None,
            cases: Vec::new(),
            success_probability: Ratio::from_integer(0),
            stealable,
            expected_undercut_reward: 0.0,
            honest_reward,
            threshold_factor: None,
            verdict: Verdict::Honest,
        });
    }

    let kept_tip = |c: usize| {
        let len = state.chain(c).len() - dropped.get(&c).copied().unwrap_or(0);
        &state.chain(c)[len - 1]
    };
    let next_rank = (0..state.k())
        .map(|c| kept_tip(c).next_rank)
        .max()
        .expect("k >= 1");

    let mut cases = Vec::with_capacity(state.k());
    for chain in 0..state.k() {
        let rank = kept_tip(chain).next_rank;
        let (case, mut success, mut note) = match dropped.get(&chain).copied().unwrap_or(0) {
            0 => (LandingCase::Extends, true, None),
            1 => {
                let rival = state.tip(chain).next_rank;
                let wins = petty_majority && next_rank < rival;
                let note = (!wins).then(|| {
                    if petty_majority {
                        format!("next_rank {next_rank} does not undercut the rival's {rival}")
                    } else {
                        "no petty majority to break the tie".to_string()
                    }
                });
                (LandingCase::EqualFork, wins, note)
            }
            _ => (LandingCase::ShorterFork, false, None),
        };
        if success && next_rank <= rank {
            success = false;
            note = Some(format!("next_rank {next_rank} not above rank {rank}"));
        }
        cases.push(UndercutCase {
            chain,
            case,
            rank,
            success,
            note,
        });
    }

    let k = state.k() as u64;
    let wins = cases.iter().filter(|c| c.success).count() as u64;
    let success_probability = Ratio::new(wins, k);
    let expected = wins as f64 / k as f64 * stealable;
    Ok(UndercutReport {
        next_rank: Some(next_rank),
        cases,
        success_probability,
        stealable,
        expected_undercut_reward: expected,
        honest_reward,
        threshold_factor: (wins > 0).then(|| Ratio::new(k, wins)),
        verdict: if expected > honest_reward {
            Verdict::Undercut
        } else {
            Verdict::Honest
        },
    })
}

/// Number of dropped blocks per chain, after checking each chain loses a
/// non-empty suffix above its genesis.
fn dropped_per_chain(
    state: &OhieChainState,
    drop_set: &[BlockRef],
) -> Result<BTreeMap<usize, usize>, OhieError> {
    let mut per_chain: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &r in drop_set {
        if state.block(r).is_none() {
            return Err(OhieError::UnknownBlock(r));
        }
        if r.position == 0 {
            return Err(OhieError::InvalidInput(format!(
                "cannot drop genesis block {r}"
            )));
        }
        per_chain.entry(r.chain).or_default().push(r.position);
    }
    let mut counts = BTreeMap::new();
    for (chain, mut positions) in per_chain {
        positions.sort_unstable();
        positions.dedup();
        let len = state.chain(chain).len();
        let suffix = positions
            .iter()
            .rev()
            .zip((0..len).rev())
            .all(|(&p, q)| p == q);
        if !suffix {
            return Err(OhieError::InvalidInput(format!(
                "dropped blocks on chain {chain} must be a suffix of the chain"
            )));
        }
        counts.insert(chain, positions.len());
    }
    Ok(counts)
}
