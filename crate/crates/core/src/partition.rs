//! Enumeration of splits of an ordered set into successive blocks.

use crate::vector::FiniteSet;

/// Iterator over the ways to cut `0..len` into at most `max_blocks` nonempty
/// consecutive ranges. Each item lists the exclusive end of every block, so the
/// last entry is always `len`.
///
/// Items come ordered by block count, then lexicographically by cut positions.
#[derive(Clone, Debug)]
pub struct BlockCuts {
    len: usize,
    max_blocks: usize,
    blocks: usize,
    // Cut positions in 1..len, strictly increasing; `None` once exhausted.
    cuts: Option<Vec<usize>>,
}

impl BlockCuts {
    pub fn new(len: usize, max_blocks: usize) -> Self {
        let max_blocks = max_blocks.min(len);
        let cuts = if len == 0 || max_blocks == 0 { None } else { Some(Vec::new()) };
        BlockCuts { len, max_blocks, blocks: 1, cuts }
    }

    fn advance(&mut self) {
        let Some(cuts) = self.cuts.as_mut() else { return };
        let k = cuts.len();
        // Next combination of k cuts from 1..len in lexicographic order.
        let mut i = k;
        while i > 0 {
            i -= 1;
            if cuts[i] < self.len - (k - i) {
                cuts[i] += 1;
                for j in i + 1..k {
                    cuts[j] = cuts[j - 1] + 1;
                }
                return;
            }
        }
        self.blocks += 1;
        if self.blocks > self.max_blocks {
            self.cuts = None;
        } else {
            *cuts = (1..self.blocks).collect();
        }
    }
}

impl Iterator for BlockCuts {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let cuts = self.cuts.as_ref()?;
        let mut ends = cuts.clone();
        ends.push(self.len);
        self.advance();
        Some(ends)
    }
}

/// Every split of `set` into at most `max_blocks` nonempty successive blocks,
/// consecutive in the order of the set's elements.
pub fn enumerate_successive_partitions<I: Ord + Clone>(
    set: &FiniteSet<I>,
    max_blocks: usize,
) -> impl Iterator<Item = Vec<FiniteSet<I>>> + '_ {
    BlockCuts::new(set.len(), max_blocks).map(move |ends| {
        let items = set.as_slice();
        let mut start = 0;
        ends.iter()
            .map(|&end| {
                let block = FiniteSet::new(items[start..end].iter().cloned());
                start = end;
                block
            })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn binomial(n: u64, k: u64) -> u64 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn three_elements_two_blocks() {
        let s = FiniteSet::new([1u64, 5, 9]);
        let got: Vec<Vec<Vec<u64>>> = enumerate_successive_partitions(&s, 2)
            .map(|p| p.iter().map(|b| b.as_slice().to_vec()).collect())
            .collect();
        assert_eq!(got, vec![vec![vec![1, 5, 9]], vec![vec![1], vec![5, 9]], vec![vec![1, 5], vec![9]]]);
    }

    #[test]
    fn empty_set_yields_nothing() {
        assert_eq!(enumerate_successive_partitions(&FiniteSet::<u64>::empty(), 3).count(), 0);
    }

    #[test]
    fn counts_match_binomial_sum_without_duplicates() {
        for n in 1..=10usize {
            let s = FiniteSet::new(1..=n as u64);
            for max_blocks in 1..=n {
                let parts: Vec<_> = enumerate_successive_partitions(&s, max_blocks).collect();
                let expected: u64 = (1..=max_blocks as u64).map(|b| binomial(n as u64 - 1, b - 1)).sum();
                assert_eq!(parts.len() as u64, expected, "n={n} max_blocks={max_blocks}");
                let distinct: HashSet<_> = parts.iter().cloned().collect();
                assert_eq!(distinct.len(), parts.len());
                for p in &parts {
                    assert!(p.windows(2).all(|w| w[0].precedes(&w[1])));
                    assert!(p.iter().all(|b| !b.is_empty()));
                    assert_eq!(p.iter().map(FiniteSet::len).sum::<usize>(), n);
                }
            }
            // Full block budget gives 2^(n-1) compositions.
            assert_eq!(enumerate_successive_partitions(&s, n).count(), 1 << (n - 1));
        }
    }
}
