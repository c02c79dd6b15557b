use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

pub const PARTITION_MAX_SIZE: u32 = 12;

/// Set-partitions of a multiset over {1, …, r}: multisets of nonempty subsets
/// of {1, …, r} whose multiset union has multiplicity `signature[i]` for i+1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultisetPartitionTable {
    pub signature: Vec<u32>,
    /// Each partition lists its blocks (sorted 1-based elements) in canonical order.
    pub partitions: Vec<Vec<Vec<usize>>>,
    /// `by_blocks[k]` counts the partitions with k blocks, so par(M, q) = Σ_k by_blocks[k]·q^k.
    pub by_blocks: Vec<u64>,
}

impl MultisetPartitionTable {
    pub fn par(&self, q: &BigRational) -> BigRational {
        self.by_blocks
            .iter()
            .enumerate()
            .rev()
            .fold(BigRational::zero(), |acc, (_, &c)| {
                acc * q + BigRational::from_integer(BigInt::from(c))
            })
    }
}

/// Blocks as bitmasks over r elements, sorted by (size, lexicographic content).
pub(crate) fn canonical_blocks(r: usize) -> Vec<u32> {
    let mut blocks: Vec<u32> = (1..1u32 << r).collect();
    blocks.sort_by_key(|&b| (b.count_ones(), members(b)));
    blocks
}

pub(crate) fn members(b: u32) -> Vec<usize> {
    (0..32)
        .filter(|i| b >> i & 1 == 1)
        .map(|i| i as usize + 1)
        .collect()
}

/// Calls `visit` once per set-partition (as block masks in nondecreasing
/// canonical order).
pub(crate) fn for_each_partition(signature: &[u32], mut visit: impl FnMut(&[u32])) {
    let blocks = canonical_blocks(signature.len());
    let mut remaining = signature.to_vec();
    let mut chosen = Vec::new();
    recurse(&blocks, 0, &mut remaining, &mut chosen, &mut visit);
}

fn recurse(
    blocks: &[u32],
    start: usize,
    remaining: &mut [u32],
    chosen: &mut Vec<u32>,
    visit: &mut impl FnMut(&[u32]),
) {
    if remaining.iter().all(|&c| c == 0) {
        visit(chosen);
        return;
    }
    for (idx, &b) in blocks.iter().enumerate().skip(start) {
        let fits = (0..remaining.len()).all(|i| b >> i & 1 == 0 || remaining[i] > 0);
        if !fits {
            continue;
        }
        for i in 0..remaining.len() {
            if b >> i & 1 == 1 {
                remaining[i] -= 1;
            }
        }
        chosen.push(b);
        recurse(blocks, idx, remaining, chosen, visit);
        chosen.pop();
        for i in 0..remaining.len() {
            if b >> i & 1 == 1 {
                remaining[i] += 1;
            }
        }
    }
}

fn check_size(signature: &[u32]) -> Result<()> {
    let total: u32 = signature.iter().sum();
    if total > PARTITION_MAX_SIZE || signature.len() > 16 {
        return Err(Error::Budget(format!(
            "multiset of size {total} over {} letters exceeds the enumeration cap {PARTITION_MAX_SIZE}",
            signature.len()
        )));
    }
    Ok(())
}

/// par(M, q) = Σ_{B ⊢ M} q^{|B|} by exhaustive enumeration. With `enumerate`
/// set, the partitions themselves are returned as well.
pub fn par_multiset(
    signature: &[u32],
    q: &BigRational,
    enumerate: bool,
) -> Result<(BigRational, Option<MultisetPartitionTable>)> {
    check_size(signature)?;
    let mut by_blocks = vec![0u64; signature.iter().sum::<u32>() as usize + 1];
    let mut partitions = Vec::new();
    for_each_partition(signature, |blocks| {
        by_blocks[blocks.len()] += 1;
        if enumerate {
            partitions.push(blocks.iter().map(|&b| members(b)).collect());
        }
    });
    let table = MultisetPartitionTable {
        signature: signature.to_vec(),
        partitions,
        by_blocks,
    };
    let value = table.par(q);
    Ok((value, enumerate.then_some(table)))
}
