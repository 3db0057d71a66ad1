use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::node::TreeNode;

/// Node pairs `(s_1, t_1), …, (s_n, t_n)` proposed as a bush.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Bush {
    pub pairs: Vec<(TreeNode, TreeNode)>,
}

/// The first defining condition a candidate violates. Bullets are numbered
/// in the order of the definition: stem order, reach, disjoint segments,
/// segments off the stem.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BushViolation {
    pub bullet: u8,
    pub detail: String,
}

impl Bush {
    pub fn new(pairs: Vec<(TreeNode, TreeNode)>) -> Self {
        Bush { pairs }
    }

    /// `|S| = n`.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn last_s(&self) -> TreeNode {
        self.pairs.last().expect("nonempty bush").0
    }

    pub fn targets(&self) -> impl Iterator<Item = TreeNode> + '_ {
        self.pairs.iter().map(|p| p.1)
    }

    /// Stem `{t : s_1 ⪯ t ⪯ s_n}` plus every connecting segment.
    pub fn nodes(&self) -> BTreeSet<TreeNode> {
        let mut out = BTreeSet::new();
        if let (Some(first), Some(last)) = (self.pairs.first(), self.pairs.last()) {
            out.extend(first.0.segment_to(last.0));
        }
        for &(s, t) in &self.pairs {
            out.extend(s.segment_to(t));
        }
        out
    }

    /// Checks the four defining conditions; `Ok(())` means this is a bush.
    pub fn check(&self) -> Result<(), BushViolation> {
        let fail = |bullet, detail: String| Err(BushViolation { bullet, detail });
        if self.pairs.is_empty() {
            return fail(1, "a bush needs at least one pair".into());
        }
        for (i, w) in self.pairs.windows(2).enumerate() {
            if !w[0].0.precedes(w[1].0) {
                return fail(1, format!("s_{} ⊀ s_{}", i + 1, i + 2));
            }
        }
        for (i, &(s, t)) in self.pairs.iter().enumerate() {
            if !s.precedes_eq(t) {
                return fail(2, format!("s_{0} ⋠ t_{0}", i + 1));
            }
        }
        let segments: Vec<BTreeSet<TreeNode>> = self.pairs.iter().map(|&(s, t)| s.segment_to(t).into_iter().collect()).collect();
        for i in 0..segments.len() {
            for j in i + 1..segments.len() {
                if !segments[i].is_disjoint(&segments[j]) {
                    return fail(3, format!("segments {} and {} intersect", i + 1, j + 1));
                }
            }
        }
        let stem: BTreeSet<TreeNode> = self.pairs[0].0.segment_to(self.last_s()).into_iter().collect();
        for (i, &(s, t)) in self.pairs.iter().enumerate() {
            if s != t && s.segment_to(t).iter().skip(1).any(|u| stem.contains(u)) {
                return fail(4, format!("segment {} runs along the stem", i + 1));
            }
        }
        Ok(())
    }

    pub fn is_bush(&self) -> bool {
        self.check().is_ok()
    }

    /// Pairs `range` as a bush of their own (any run of pairs of a bush is a bush).
    pub fn sub_bush(&self, range: std::ops::Range<usize>) -> Bush {
        Bush { pairs: self.pairs[range].to_vec() }
    }
}

/// Whether two node sets share a node.
pub fn disjoint(a: &BTreeSet<TreeNode>, b: &BTreeSet<TreeNode>) -> bool {
    a.is_disjoint(b)
}
