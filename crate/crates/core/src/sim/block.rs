use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::SimError;

/// Slack for floating-point fee arithmetic in block validation.
const FEE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BlockId(pub u32);

impl BlockId {
    pub const GENESIS: BlockId = BlockId(0);

    fn index(self) -> usize {
        self.0 as usize
    }
}

/// A mined block. Fees are measured in rounds of accrual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub id: BlockId,
    pub parent: Option<BlockId>,
    /// Creator; `None` only for genesis.
    pub miner: Option<usize>,
    pub round: u64,
    pub height: u64,
    pub reward: f64,
    /// Fees deliberately left for the next miner.
    pub leftover: f64,
}

impl Block {
    /// Fees a child mined in `round` could claim before the block-size cap.
    pub fn accrued(&self, round: u64) -> f64 {
        (round - self.round) as f64 + self.leftover
    }
}

/// Append-only block tree rooted at a genesis block mined in round 0.
#[derive(Debug, Clone)]
pub struct BlockStore {
    blocks: Vec<Block>,
    children: Vec<Vec<BlockId>>,
    by_height: Vec<Vec<BlockId>>,
    max_block_size: f64,
}

impl BlockStore {
    pub fn new(max_block_size: f64) -> Self {
        let genesis = Block {
            id: BlockId::GENESIS,
            parent: None,
            miner: None,
            round: 0,
            height: 0,
            reward: 0.0,
            leftover: 0.0,
        };
        Self {
            blocks: vec![genesis],
            children: vec![Vec::new()],
            by_height: vec![vec![BlockId::GENESIS]],
            max_block_size,
        }
    }

    pub fn genesis(&self) -> &Block {
        &self.blocks[0]
    }

    pub fn get(&self, id: BlockId) -> Option<&Block> {
        self.blocks.get(id.index())
    }

    fn block(&self, id: BlockId) -> &Block {
        &self.blocks[id.index()]
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Block> {
        self.blocks.iter()
    }

    pub fn max_height(&self) -> u64 {
        (self.by_height.len() - 1) as u64
    }

    pub fn at_height(&self, height: u64) -> &[BlockId] {
        self.by_height
            .get(height as usize)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn children(&self, id: BlockId) -> &[BlockId] {
        &self.children[id.index()]
    }

    pub fn max_block_size(&self) -> f64 {
        self.max_block_size
    }

    /// Appends a child of `parent`, checking the tree and fee invariants.
    pub fn append(
        &mut self,
        parent: BlockId,
        miner: usize,
        round: u64,
        reward: f64,
        leftover: f64,
    ) -> Result<BlockId, SimError> {
        let parent_block = self
            .get(parent)
            .ok_or_else(|| SimError::InvalidBlock(format!("unknown parent {parent:?}")))?;
        if round <= parent_block.round {
            return Err(SimError::InvalidBlock(format!(
                "block in round {round} cannot extend parent from round {}",
                parent_block.round
            )));
        }
        if !(reward >= 0.0 && leftover >= 0.0) {
            return Err(SimError::InvalidBlock(format!(
                "negative fee split ({reward}, {leftover})"
            )));
        }
        let limit = parent_block.accrued(round).min(self.max_block_size);
        if reward + leftover > limit + FEE_SLACK {
            return Err(SimError::InvalidBlock(format!(
                "fees {} exceed claimable {limit}",
                reward + leftover
            )));
        }
        let height = parent_block.height + 1;
        let id = BlockId(self.blocks.len() as u32);
        self.blocks.push(Block {
            id,
            parent: Some(parent),
            miner: Some(miner),
            round,
            height,
            reward,
            leftover,
        });
        self.children.push(Vec::new());
        self.children[parent.index()].push(id);
        if self.by_height.len() <= height as usize {
            self.by_height.push(Vec::new());
        }
        self.by_height[height as usize].push(id);
        Ok(id)
    }

    /// Blocks from genesis to `leaf`, inclusive.
    pub fn chain_to(&self, leaf: BlockId) -> Vec<BlockId> {
        let mut chain = Vec::new();
        let mut cursor = Some(leaf);
        while let Some(id) = cursor {
            chain.push(id);
            cursor = self.block(id).parent;
        }
        chain.reverse();
        chain
    }

    /// Every genesis-to-leaf chain whose leaf sits at the maximum height.
    ///
    /// The store is a tree, so there is exactly one such chain per block at
    /// the maximum height.
    pub fn maximal_chains(&self) -> Vec<Vec<BlockId>> {
        self.at_height(self.max_height())
            .iter()
            .map(|&leaf| self.chain_to(leaf))
            .collect()
    }

    /// Number of extra children beyond the first, summed over all blocks.
    pub fn fork_count(&self) -> usize {
        self.children
            .iter()
            .map(|c| c.len().saturating_sub(1))
            .sum()
    }

    /// Non-genesis blocks that lie on no maximal chain.
    pub fn orphan_count(&self) -> usize {
        let mut on_chain = vec![false; self.blocks.len()];
        for leaf in self.at_height(self.max_height()) {
            let mut cursor = Some(*leaf);
            while let Some(id) = cursor {
                if on_chain[id.index()] {
                    break;
                }
                on_chain[id.index()] = true;
                cursor = self.block(id).parent;
            }
        }
        on_chain.iter().skip(1).filter(|&&seen| !seen).count()
    }

    /// Writes one JSON record per block, in creation order.
    pub fn write_ndjson<W: Write>(&self, mut out: W) -> io::Result<()> {
        for block in &self.blocks {
            serde_json::to_writer(&mut out, block)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Leaf-height chains found by walking every path from genesis.
    fn brute_force_chains(store: &BlockStore) -> Vec<Vec<BlockId>> {
        fn walk(store: &BlockStore, path: &mut Vec<BlockId>, out: &mut Vec<Vec<BlockId>>) {
            let last = *path.last().unwrap();
            let kids = store.children(last);
            if kids.is_empty() {
                out.push(path.clone());
            }
            for &k in kids {
                path.push(k);
                walk(store, path, out);
                path.pop();
            }
        }
        let mut all = Vec::new();
        walk(store, &mut vec![BlockId::GENESIS], &mut all);
        let best = all.iter().map(Vec::len).max().unwrap();
        let mut best_chains: Vec<_> = all.into_iter().filter(|c| c.len() == best).collect();
        best_chains.sort();
        best_chains
    }

    #[test]
    fn linear_chain_has_one_maximal_chain() {
        let mut s = BlockStore::new(f64::INFINITY);
        let a = s.append(BlockId::GENESIS, 0, 1, 1.0, 0.0).unwrap();
        let b = s.append(a, 0, 2, 1.0, 0.0).unwrap();
        assert_eq!(s.maximal_chains(), vec![vec![BlockId::GENESIS, a, b]]);
        assert_eq!(s.fork_count(), 0);
        assert_eq!(s.orphan_count(), 0);
    }

    #[test]
    fn tip_fork_gives_two_chains() {
        let mut s = BlockStore::new(f64::INFINITY);
        let a = s.append(BlockId::GENESIS, 0, 1, 1.0, 0.0).unwrap();
        let b = s.append(a, 0, 2, 1.0, 0.0).unwrap();
        let c = s.append(a, 1, 3, 2.0, 0.0).unwrap();
        let chains = s.maximal_chains();
        assert_eq!(chains.len(), 2);
        assert!(chains.contains(&vec![BlockId::GENESIS, a, b]));
        assert!(chains.contains(&vec![BlockId::GENESIS, a, c]));
        assert_eq!(s.fork_count(), 1);
        assert_eq!(s.orphan_count(), 0);
    }

    #[test]
    fn resolved_fork_matches_brute_force() {
        let mut s = BlockStore::new(f64::INFINITY);
        let a = s.append(BlockId::GENESIS, 0, 1, 1.0, 0.0).unwrap();
        let b = s.append(a, 0, 2, 1.0, 0.0).unwrap();
        let c = s.append(a, 1, 3, 2.0, 0.0).unwrap();
        let d = s.append(c, 1, 4, 1.0, 0.0).unwrap();
        let _e = s.append(BlockId::GENESIS, 2, 4, 4.0, 0.0).unwrap();
        let mut chains = s.maximal_chains();
        chains.sort();
        assert_eq!(chains, brute_force_chains(&s));
        assert_eq!(chains, vec![vec![BlockId::GENESIS, a, c, d]]);
        assert!(!chains[0].contains(&b));
        assert_eq!(s.orphan_count(), 2);
    }

    #[test]
    fn rejects_invalid_appends() {
        let mut s = BlockStore::new(3.0);
        assert!(s.append(BlockId(7), 0, 1, 0.0, 0.0).is_err());
        assert!(s.append(BlockId::GENESIS, 0, 0, 0.0, 0.0).is_err());
        assert!(s.append(BlockId::GENESIS, 0, 2, 2.5, 0.0).is_err());
        assert!(s.append(BlockId::GENESIS, 0, 5, 2.0, 1.5).is_err());
        assert!(s.append(BlockId::GENESIS, 0, 5, -1.0, 0.0).is_err());
        assert!(s.append(BlockId::GENESIS, 0, 5, 2.0, 1.0).is_ok());
    }

    #[test]
    fn ndjson_dump_has_one_line_per_block() {
        let mut s = BlockStore::new(f64::INFINITY);
        s.append(BlockId::GENESIS, 0, 1, 1.0, 0.0).unwrap();
        let mut buf = Vec::new();
        s.write_ndjson(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        let back: Block = serde_json::from_str(lines[1]).unwrap();
        assert_eq!(&back, s.get(BlockId(1)).unwrap());
    }
}
