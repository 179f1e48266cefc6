//! Enumeration of balanced rules (truth tables of weight 16) in increasing
//! numeric order, restricted to arbitrary rule-number ranges.

use std::ops::Range;

use crate::error::{Error, Result};

pub const RULE_SPACE: u64 = 1 << 32;
const WEIGHT: u32 = 16;

/// Contiguous slice `index` of `count` equal slices of the rule space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ShardSpec {
    pub index: usize,
    pub count: usize,
}

impl ShardSpec {
    pub const WHOLE: ShardSpec = ShardSpec { index: 0, count: 1 };

    pub fn new(index: usize, count: usize) -> Result<Self> {
        if count == 0 || index >= count {
            return Err(Error::InvalidShard { index, count });
        }
        Ok(ShardSpec { index, count })
    }

    pub fn range(self) -> Range<u64> {
        let lo = RULE_SPACE * self.index as u64 / self.count as u64;
        let hi = RULE_SPACE * (self.index as u64 + 1) / self.count as u64;
        lo..hi
    }

    pub fn contains(self, rule: u32) -> bool {
        self.range().contains(&(rule as u64))
    }

    pub fn is_whole(self) -> bool {
        self.count == 1
    }

    pub fn all(count: usize) -> impl Iterator<Item = ShardSpec> {
        (0..count).map(move |index| ShardSpec { index, count })
    }
}

impl std::fmt::Display for ShardSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.index, self.count)
    }
}

/// Smallest value `>= lo` below 2^32 with exactly `k` bits set.
pub fn next_with_weight(lo: u64, k: u32) -> Option<u64> {
    if lo >= RULE_SPACE || k > 32 {
        return None;
    }
    if (lo as u32).count_ones() == k {
        return Some(lo);
    }
    // Keep the bits of `lo` above some zero position p, set p, then put the
    // remaining ones as low as possible. The lowest feasible p gives the
    // smallest result.
    for p in 0..32u32 {
        if (lo >> p) & 1 == 1 {
            continue;
        }
        let high = (lo >> (p + 1)) << (p + 1) | 1 << p;
        let used = (high as u32).count_ones();
        if used <= k && k - used <= p {
            let fill = (1u64 << (k - used)) - 1;
            return Some(high | fill);
        }
    }
    None
}

/// Gosper's hack: next larger value with the same popcount.
#[inline]
fn next_same_weight(v: u64) -> u64 {
    let t = v | (v - 1);
    (t + 1) | (((!t & (!t).wrapping_neg()) - 1) >> (v.trailing_zeros() + 1))
}

/// Balanced truth tables in `range`, ascending.
#[derive(Debug, Clone)]
pub struct BalancedRules {
    next: Option<u64>,
    end: u64,
}

impl BalancedRules {
    pub fn in_range(range: Range<u64>) -> Self {
        let end = range.end.min(RULE_SPACE);
        let next = next_with_weight(range.start, WEIGHT).filter(|&v| v < end);
        BalancedRules { next, end }
    }

    pub fn all() -> Self {
        Self::in_range(0..RULE_SPACE)
    }
}

impl Iterator for BalancedRules {
    type Item = u32;

    #[inline]
    fn next(&mut self) -> Option<u32> {
        let v = self.next?;
        let n = next_same_weight(v);
        self.next = (n < self.end).then_some(n);
        Some(v as u32)
    }
}

/// Splits `range` into `parts` nearly equal contiguous pieces.
pub fn split_range(range: Range<u64>, parts: usize) -> Vec<Range<u64>> {
    let len = range.end - range.start;
    (0..parts as u64)
        .map(|i| range.start + len * i / parts as u64..range.start + len * (i + 1) / parts as u64)
        .filter(|r| !r.is_empty())
        .collect()
}
