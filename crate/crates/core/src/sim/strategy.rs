use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::block::BlockId;
use super::SimError;

/// Equality slack when comparing claimable fee amounts.
const REWARD_TIE: f64 = 1e-12;

pub const DEFAULT_MINOR_LEFTOVER: f64 = 0.1;
pub const DEFAULT_KAPPA: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    /// Longest chain; among equal-height tips, the one leaving the most fees.
    Petty,
    /// Leaves a small constant in every block; forks a low-value tip.
    MinorUndercut,
    /// Leaves `kappa` in every block; forks a low-value tip.
    MajorUndercut,
    /// Longest chain; among equal-height tips, the one seen first. Baseline
    /// compliant miner.
    FirstSeen,
}

/// A miner's strategy. Amounts are in rounds of fee accrual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    pub kappa: f64,
    pub minor_d: f64,
    /// Undercutters fork when no best tip offers more than this.
    pub threshold: f64,
}

impl StrategyConfig {
    pub fn petty() -> Self {
        Self {
            kind: StrategyKind::Petty,
            kappa: DEFAULT_KAPPA,
            minor_d: DEFAULT_MINOR_LEFTOVER,
            threshold: 0.0,
        }
    }

    pub fn first_seen() -> Self {
        Self {
            kind: StrategyKind::FirstSeen,
            ..Self::petty()
        }
    }

    /// Major undercutting with threshold `kappa`.
    pub fn major_undercut(kappa: f64) -> Self {
        Self {
            kind: StrategyKind::MajorUndercut,
            kappa,
            minor_d: DEFAULT_MINOR_LEFTOVER.min(kappa / 2.0),
            threshold: kappa,
        }
    }

    /// Minor undercutting with threshold `10 * minor_d`.
    pub fn minor_undercut(minor_d: f64) -> Self {
        Self {
            kind: StrategyKind::MinorUndercut,
            kappa: DEFAULT_KAPPA.max(2.0 * minor_d),
            minor_d,
            threshold: 10.0 * minor_d,
        }
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    /// The four strategies of the fast/slow game: `S1` = major(1.5),
    /// `S2` = major(1), `S3` = minor, `S4` = petty.
    pub fn preset(label: &str) -> Option<Self> {
        match label {
            "S1" => Some(Self::major_undercut(1.5)),
            "S2" => Some(Self::major_undercut(1.0)),
            "S3" => Some(Self::minor_undercut(DEFAULT_MINOR_LEFTOVER)),
            "S4" => Some(Self::petty()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.minor_d > 0.0 && self.kappa > self.minor_d && self.kappa.is_finite()) {
            return Err(SimError::InvalidConfig(format!(
                "strategy needs kappa > minor_d > 0, got kappa={} minor_d={}",
                self.kappa, self.minor_d
            )));
        }
        if !(self.threshold >= 0.0) {
            return Err(SimError::InvalidConfig(format!(
                "negative undercut threshold {}",
                self.threshold
            )));
        }
        Ok(())
    }

    /// Fees this strategy leaves unclaimed in every block it mines.
    pub fn leftover(&self) -> f64 {
        match self.kind {
            StrategyKind::Petty | StrategyKind::FirstSeen => 0.0,
            StrategyKind::MinorUndercut => self.minor_d,
            StrategyKind::MajorUndercut => self.kappa,
        }
    }

    pub fn undercuts(&self) -> bool {
        matches!(
            self.kind,
            StrategyKind::MinorUndercut | StrategyKind::MajorUndercut
        )
    }
}

impl fmt::Display for StrategyConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            StrategyKind::Petty => write!(f, "petty"),
            StrategyKind::FirstSeen => write!(f, "first_seen"),
            StrategyKind::MinorUndercut => write!(f, "minor:{}", self.minor_d),
            StrategyKind::MajorUndercut => write!(f, "major:{}", self.kappa),
        }
    }
}

/// Parses `S1`..`S4`, `petty`, `first_seen`, `major:<kappa>`,
/// `minor:<d>`, optionally suffixed with `@<threshold>`.
impl FromStr for StrategyConfig {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SimError::InvalidConfig(format!("unknown strategy '{s}'"));
        let (body, threshold) = match s.split_once('@') {
            Some((body, t)) => (body, Some(t.trim().parse::<f64>().map_err(|_| bad())?)),
            None => (s, None),
        };
        let body = body.trim();
        let base = if let Some(preset) = Self::preset(body) {
            preset
        } else {
            match body.split_once(':') {
                None if body == "petty" => Self::petty(),
                None if body == "first_seen" => Self::first_seen(),
                Some(("major", v)) => Self::major_undercut(v.parse().map_err(|_| bad())?),
                Some(("minor", v)) => Self::minor_undercut(v.parse().map_err(|_| bad())?),
                _ => return Err(bad()),
            }
        };
        let cfg = match threshold {
            Some(t) => base.with_threshold(t),
            None => base,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// A block a miner can currently see, as far as parent selection cares.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub id: BlockId,
    pub height: u64,
    pub round: u64,
    pub leftover: f64,
    /// Round in which the deciding miner first saw this block.
    pub seen_at: u64,
}

impl Candidate {
    pub fn accrued(&self, round: u64) -> f64 {
        (round - self.round) as f64 + self.leftover
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParentChoice {
    pub parent: BlockId,
    /// Leftover the new block intends to set, before capping by what it can claim.
    pub leftover: f64,
    /// Whether the parent sits below the best visible height.
    pub forked: bool,
}

/// Picks the parent for a block mined in `round`.
///
/// Everyone considers the visible blocks of maximal height. Petty miners
/// take the one with the most claimable fees; first-seen miners the one
/// they saw earliest. Undercutters act petty unless every maximal tip pays
/// no more than their threshold, in which case blocks one level below join the
/// candidate set and the richest overall is taken. Ties are broken with
/// `rng`, never by slice order.
pub fn select_parent<R: Rng + ?Sized>(
    visible: &[Candidate],
    strategy: &StrategyConfig,
    round: u64,
    rng: &mut R,
) -> Option<ParentChoice> {
    let max_height = visible.iter().map(|c| c.height).max()?;
    let mut pool: Vec<Candidate> = visible
        .iter()
        .filter(|c| c.height == max_height)
        .copied()
        .collect();
    pool.sort_by_key(|c| c.id);

    let chosen = match strategy.kind {
        StrategyKind::FirstSeen => {
            let first = pool.iter().map(|c| c.seen_at).min()?;
            pool.retain(|c| c.seen_at == first);
            pick(&pool, rng)
        }
        StrategyKind::Petty => richest(&pool, round, rng),
        StrategyKind::MinorUndercut | StrategyKind::MajorUndercut => {
            let starved = pool.iter().all(|c| c.accrued(round) <= strategy.threshold);
            if starved && max_height > 0 {
                pool.extend(visible.iter().filter(|c| c.height + 1 == max_height));
                pool.sort_by_key(|c| c.id);
            }
            richest(&pool, round, rng)
        }
    };
    Some(ParentChoice {
        parent: chosen.id,
        leftover: strategy.leftover(),
        forked: chosen.height < max_height,
    })
}

fn richest<R: Rng + ?Sized>(pool: &[Candidate], round: u64, rng: &mut R) -> Candidate {
    let best = pool
        .iter()
        .map(|c| c.accrued(round))
        .fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<Candidate> = pool
        .iter()
        .filter(|c| c.accrued(round) >= best - REWARD_TIE)
        .copied()
        .collect();
    pick(&tied, rng)
}

fn pick<R: Rng + ?Sized>(pool: &[Candidate], rng: &mut R) -> Candidate {
    if pool.len() == 1 {
        pool[0]
    } else {
        pool[rng.random_range(0..pool.len())]
    }
}
