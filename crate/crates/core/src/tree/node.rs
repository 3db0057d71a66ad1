use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Deepest level we represent; indices at level `n` need `n` bits.
pub const MAX_LEVEL: u32 = 62;

/// A node `(n, i)` of the dyadic tree, `0 ≤ i < 2^n`.
///
/// The derived order is the lexicographic basis order `(0,0), (1,0), (1,1), (2,0), …`,
/// which is unrelated to the tree order `≺`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreeNode {
    level: u32,
    index: u64,
}

impl TreeNode {
    pub const ROOT: TreeNode = TreeNode { level: 0, index: 0 };

    pub fn new(level: u32, index: u64) -> Result<Self> {
        if level > MAX_LEVEL {
            return Err(Error::invalid(format!("tree level {level} exceeds {MAX_LEVEL}")));
        }
        if index >> level != 0 {
            return Err(Error::invalid(format!("index {index} out of range at level {level}")));
        }
        Ok(TreeNode { level, index })
    }

    pub fn level(self) -> u32 {
        self.level
    }

    pub fn index(self) -> u64 {
        self.index
    }

    /// `|t|`: the number of nodes from the root to `t` inclusive.
    pub fn depth(self) -> u32 {
        self.level + 1
    }

    /// Child `2i + bit` at the next level.
    pub fn child(self, bit: bool) -> TreeNode {
        assert!(self.level < MAX_LEVEL, "tree too deep");
        TreeNode { level: self.level + 1, index: 2 * self.index + bit as u64 }
    }

    pub fn parent(self) -> Option<TreeNode> {
        (self.level > 0).then(|| TreeNode { level: self.level - 1, index: self.index >> 1 })
    }

    /// Ancestor at `level ≤ self.level`.
    pub fn ancestor_at(self, level: u32) -> TreeNode {
        assert!(level <= self.level);
        TreeNode { level, index: self.index >> (self.level - level) }
    }

    /// `self ≺ other`.
    pub fn precedes(self, other: TreeNode) -> bool {
        self.level < other.level && other.ancestor_at(self.level) == self
    }

    /// `self ⪯ other`.
    pub fn precedes_eq(self, other: TreeNode) -> bool {
        self == other || self.precedes(other)
    }

    /// Deepest common ancestor.
    pub fn meet(self, other: TreeNode) -> TreeNode {
        let level = self.level.min(other.level);
        let (mut a, mut b) = (self.ancestor_at(level), other.ancestor_at(level));
        while a != b {
            a = a.parent().expect("root is common");
            b = b.parent().expect("root is common");
        }
        a
    }

    /// Step bit taken from level `l - 1` to level `l` on the way to `self`, for `1 ≤ l ≤ level`.
    pub fn bit_at(self, l: u32) -> bool {
        assert!(l >= 1 && l <= self.level);
        (self.index >> (self.level - l)) & 1 == 1
    }

    /// Nodes `s` with `self ⪯ s ⪯ below`, top down. Empty if `self ⋠ below`.
    pub fn segment_to(self, below: TreeNode) -> Vec<TreeNode> {
        if !self.precedes_eq(below) {
            return Vec::new();
        }
        (self.level..=below.level).map(|l| below.ancestor_at(l)).collect()
    }

    /// All `s ⪯ self`, root first.
    pub fn ancestors_inclusive(self) -> Vec<TreeNode> {
        TreeNode::ROOT.segment_to(self)
    }
}

impl fmt::Debug for TreeNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.level, self.index)
    }
}

impl fmt::Display for TreeNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.level, self.index)
    }
}

impl Serialize for TreeNode {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        (self.level, self.index).serialize(s)
    }
}

impl<'de> Deserialize<'de> for TreeNode {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let (level, index) = <(u32, u64)>::deserialize(d)?;
        TreeNode::new(level, index).map_err(serde::de::Error::custom)
    }
}

/// Every node at levels `0..levels`, in basis order.
pub fn nodes_up_to(levels: u32) -> Vec<TreeNode> {
    (0..levels).flat_map(|l| (0..1u64 << l).map(move |i| TreeNode { level: l, index: i })).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(l: u32, i: u64) -> TreeNode {
        TreeNode::new(l, i).unwrap()
    }

    /// `≺` straight from the definition: a chain of child steps.
    fn precedes_by_steps(a: TreeNode, b: TreeNode) -> bool {
        if a.level >= b.level {
            return false;
        }
        let mut frontier = vec![a.index];
        for _ in a.level..b.level {
            frontier = frontier.iter().flat_map(|&i| [2 * i, 2 * i + 1]).collect();
        }
        frontier.contains(&b.index)
    }

    #[test]
    fn order_matches_child_steps() {
        let all = nodes_up_to(5);
        for &a in &all {
            for &b in &all {
                assert_eq!(a.precedes(b), precedes_by_steps(a, b), "{a:?} {b:?}");
            }
        }
    }

    #[test]
    fn meet_and_segments() {
        assert_eq!(t(3, 5).meet(t(3, 4)), t(2, 2));
        assert_eq!(t(3, 5).meet(t(1, 1)), t(1, 1));
        assert_eq!(t(2, 0).meet(t(2, 3)), TreeNode::ROOT);
        assert_eq!(t(1, 1).segment_to(t(3, 6)), vec![t(1, 1), t(2, 3), t(3, 6)]);
        assert!(t(1, 0).segment_to(t(3, 6)).is_empty());
        assert_eq!(t(3, 6).ancestors_inclusive().len(), 4);
        assert!(t(3, 6).bit_at(1) && t(3, 6).bit_at(2) && !t(3, 6).bit_at(3));
    }

    #[test]
    fn validation_and_json() {
        assert!(TreeNode::new(2, 4).is_err());
        assert_eq!(serde_json::to_string(&t(2, 3)).unwrap(), "[2,3]");
        assert_eq!(serde_json::from_str::<TreeNode>("[1,1]").unwrap(), t(1, 1));
        assert!(serde_json::from_str::<TreeNode>("[1,2]").is_err());
        let mut v = vec![t(2, 0), t(1, 1), TreeNode::ROOT, t(1, 0)];
        v.sort();
        assert_eq!(v, vec![TreeNode::ROOT, t(1, 0), t(1, 1), t(2, 0)]);
    }
}
