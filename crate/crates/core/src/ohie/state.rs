use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::OhieError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BlockRef {
    pub chain: usize,
    pub position: usize,
}

impl fmt::Display for BlockRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.chain, self.position)
    }
}

/// `chain:position`.
impl FromStr for BlockRef {
    type Err = OhieError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || OhieError::Parse(format!("block reference '{s}' is not chain:position"));
        let (c, p) = s.split_once(':').ok_or_else(bad)?;
        Ok(Self {
            chain: c.trim().parse().map_err(|_| bad())?,
            position: p.trim().parse().map_err(|_| bad())?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OhieBlock {
    pub chain_id: usize,
    pub position: usize,
    pub rank: u64,
    pub next_rank: u64,
    pub fee_value: f64,
}

impl OhieBlock {
    pub fn id(&self) -> BlockRef {
        BlockRef {
            chain: self.chain_id,
            position: self.position,
        }
    }
}

/// `k` parallel chains, each starting at a rank-0 genesis block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OhieChainState {
    chains: Vec<Vec<OhieBlock>>,
}

/// A parsed state plus the blocks flagged for dropping.
#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub state: OhieChainState,
    pub drop_set: Vec<BlockRef>,
}

impl OhieChainState {
    /// Each inner vector is one chain of `(rank, next_rank, fee_value)`.
    pub fn new(chains: Vec<Vec<(u64, u64, f64)>>) -> Result<Self, OhieError> {
        let chains: Vec<Vec<OhieBlock>> = chains
            .into_iter()
            .enumerate()
            .map(|(c, blocks)| {
                blocks
                    .into_iter()
                    .enumerate()
                    .map(|(position, (rank, next_rank, fee_value))| OhieBlock {
                        chain_id: c,
                        position,
                        rank,
                        next_rank,
                        fee_value,
                    })
                    .collect()
            })
            .collect();
        let state = Self { chains };
        state.validate()?;
        Ok(state)
    }

    fn validate(&self) -> Result<(), OhieError> {
        let bad = |msg: String| Err(OhieError::InvalidState(msg));
        if self.chains.is_empty() {
            return bad("need at least one chain".into());
        }
        for (c, chain) in self.chains.iter().enumerate() {
            match chain.first() {
                None => return bad(format!("chain {c} has no genesis block")),
                Some(g) if g.rank != 0 => {
                    return bad(format!("chain {c} starts at rank {}, not 0", g.rank))
                }
                _ => {}
            }
            for b in chain {
                if b.next_rank <= b.rank {
                    return bad(format!(
                        "block {} has next_rank {} <= rank {}",
                        b.id(),
                        b.next_rank,
                        b.rank
                    ));
                }
                if !(b.fee_value >= 0.0 && b.fee_value.is_finite()) {
                    return bad(format!("block {} has fee value {}", b.id(), b.fee_value));
                }
            }
            for w in chain.windows(2) {
                if w[0].next_rank != w[1].rank {
                    return bad(format!(
                        "block {} announces next_rank {} but its successor has rank {}",
                        w[0].id(),
                        w[0].next_rank,
                        w[1].rank
                    ));
                }
            }
        }
        Ok(())
    }

    /// Parses one block per line, `chain_id, rank, next_rank, fee_value`,
    /// with an optional fifth field `drop` marking the block for the drop
    /// set. Blocks of a chain appear in chain order; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Fixture, OhieError> {
        let mut chains: Vec<Vec<(u64, u64, f64)>> = Vec::new();
        let mut drop_set = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad =
                |what: &str| OhieError::Parse(format!("line {}: {what}: '{raw}'", lineno + 1));
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if !(4..=5).contains(&fields.len()) {
                return Err(bad("expected chain_id, rank, next_rank, fee_value[, drop]"));
            }
            let chain: usize = fields[0].parse().map_err(|_| bad("bad chain id"))?;
            let rank: u64 = fields[1].parse().map_err(|_| bad("bad rank"))?;
            let next_rank: u64 = fields[2].parse().map_err(|_| bad("bad next_rank"))?;
            let fee: f64 = fields[3].parse().map_err(|_| bad("bad fee value"))?;
            if chains.len() <= chain {
                chains.resize(chain + 1, Vec::new());
            }
            if let Some(flag) = fields.get(4) {
                if *flag != "drop" {
                    return Err(bad("fifth field must be 'drop'"));
                }
                drop_set.push(BlockRef {
                    chain,
                    position: chains[chain].len(),
                });
            }
            chains[chain].push((rank, next_rank, fee));
        }
        Ok(Fixture {
            state: Self::new(chains)?,
            drop_set,
        })
    }

    pub fn k(&self) -> usize {
        self.chains.len()
    }

    pub fn chain(&self, c: usize) -> &[OhieBlock] {
        &self.chains[c]
    }

    pub fn tip(&self, c: usize) -> &OhieBlock {
        self.chains[c].last().expect("chains are never empty")
    }

    pub fn block(&self, id: BlockRef) -> Option<&OhieBlock> {
        self.chains.get(id.chain)?.get(id.position)
    }

    pub fn blocks(&self) -> impl Iterator<Item = &OhieBlock> {
        self.chains.iter().flatten()
    }

    /// Appends a block at the tip of `chain`, taking the tip's announced
    /// next_rank as its rank.
    pub fn extend(
        &mut self,
        chain: usize,
        next_rank: u64,
        fee_value: f64,
    ) -> Result<BlockRef, OhieError> {
        if chain >= self.k() {
            return Err(OhieError::InvalidState(format!("no chain {chain}")));
        }
        let rank = self.tip(chain).next_rank;
        if next_rank <= rank {
            return Err(OhieError::RankViolation {
                chain,
                rank,
                next_rank,
            });
        }
        let position = self.chains[chain].len();
        self.chains[chain].push(OhieBlock {
            chain_id: chain,
            position,
            rank,
            next_rank,
            fee_value,
        });
        Ok(BlockRef { chain, position })
    }
}

/// Every block ordered by rank, ties going to the lower chain id.
pub fn total_block_ordering(state: &OhieChainState) -> Vec<BlockRef> {
    let mut all: Vec<&OhieBlock> = state.blocks().collect();
    all.sort_by_key(|b| (b.rank, b.chain_id));
    all.into_iter().map(OhieBlock::id).collect()
}
