use serde::{Deserialize, Serialize};

use super::node::TreeNode;
use crate::error::{Error, Result};
use crate::rational::Rational;

/// A branch code `b' = (b'_1, …, b'_r)`: the gaps between successive 1-steps
/// of a branch. `terminated` codes continue with 0-steps forever; extendable
/// codes only fix a prefix of the branch.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BranchCode {
    pub entries: Vec<u64>,
    #[serde(default = "default_terminated")]
    pub terminated: bool,
}

fn default_terminated() -> bool {
    true
}

impl BranchCode {
    pub fn terminated(entries: Vec<u64>) -> Result<Self> {
        let code = BranchCode { entries, terminated: true };
        code.validate()?;
        Ok(code)
    }

    pub fn extendable(entries: Vec<u64>) -> Result<Self> {
        let code = BranchCode { entries, terminated: false };
        code.validate()?;
        Ok(code)
    }

    pub fn validate(&self) -> Result<()> {
        if self.entries.contains(&0) {
            return Err(Error::invalid("branch code entries must be positive"));
        }
        Ok(())
    }

    /// Accepts a bare list `[2,3,2]` (terminated) or the object form.
    pub fn parse(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse(format!("branch code: {e}")))?;
        let code: BranchCode = if value.is_array() {
            BranchCode { entries: serde_json::from_value(value).map_err(|e| Error::Parse(format!("branch code: {e}")))?, terminated: true }
        } else {
            serde_json::from_value(value).map_err(|e| Error::Parse(format!("branch code: {e}")))?
        };
        code.validate()?;
        Ok(code)
    }

    /// Number of weights the code determines: unbounded for terminated codes.
    pub fn covered(&self) -> Option<usize> {
        if self.terminated {
            None
        } else {
            Some(staircase(&self.entries).0.len())
        }
    }

    /// Positions of the 1-steps: the partial sums `b'_1, b'_1 + b'_2, …`.
    pub fn one_positions(&self) -> Vec<u64> {
        self.entries
            .iter()
            .scan(0u64, |acc, &b| {
                *acc += b;
                Some(*acc)
            })
            .collect()
    }
}

/// Block denominators of the staircase for the given entries: each entry `c`
/// after a block of value `1/K` opens a block of value `1/L` repeated `L`
/// times, where `L = c` if `c > K` and `L = K + 1` otherwise. Returns the
/// denominators position by position and the last `K` (0 for no entries).
pub(crate) fn staircase(entries: &[u64]) -> (Vec<u64>, u64) {
    let mut out = Vec::new();
    let mut k = 0u64;
    for &c in entries {
        let l = next_block(k, c);
        out.extend(std::iter::repeat_n(l, l as usize));
        k = l;
    }
    (out, k)
}

/// Value denominator of the block opened by entry `c` after last value `1/k`.
pub(crate) fn next_block(k: u64, c: u64) -> u64 {
    if c > k {
        c
    } else {
        k + 1
    }
}

/// Denominators of the first `m` weights, or an error if an extendable code
/// does not reach that far.
pub fn branch_denominators(code: &BranchCode, m: usize) -> Result<Vec<u64>> {
    let (mut dens, k) = staircase(&code.entries);
    if dens.len() >= m {
        dens.truncate(m);
        return Ok(dens);
    }
    if !code.terminated {
        return Err(Error::invalid(format!(
            "extendable code covers only {} weights, {} requested",
            dens.len(),
            m
        )));
    }
    let have = dens.len() as u64;
    dens.extend((1..=(m as u64 - have)).map(|i| k + i));
    Ok(dens)
}

/// The first `m` weights `w^{(b')}_1, …, w^{(b')}_m`.
pub fn branch_weights(code: &BranchCode, m: usize) -> Result<Vec<Rational>> {
    Ok(branch_denominators(code, m)?.into_iter().map(Rational::unit_fraction).collect())
}

/// The branch nodes at levels `0..=depth`, starting at the root.
pub fn code_to_branch(code: &BranchCode, depth: u32) -> Result<Vec<TreeNode>> {
    let ones = code.one_positions();
    let reach = ones.last().copied().unwrap_or(0);
    if !code.terminated && u64::from(depth) > reach {
        return Err(Error::invalid(format!("extendable code fixes the branch only to level {reach}")));
    }
    let mut node = TreeNode::ROOT;
    let mut path = vec![node];
    for l in 1..=depth {
        node = node.child(ones.binary_search(&u64::from(l)).is_ok());
        path.push(node);
    }
    Ok(path)
}

/// Complete code entries read off a root path (trailing 0-steps are dropped).
pub fn branch_to_code(path: &[TreeNode]) -> Result<Vec<u64>> {
    if path.first() != Some(&TreeNode::ROOT) {
        return Err(Error::invalid("branch path must start at the root"));
    }
    let mut entries = Vec::new();
    let mut last_one = 0u64;
    for w in path.windows(2) {
        if w[1].parent() != Some(w[0]) {
            return Err(Error::invalid(format!("{:?} is not a child of {:?}", w[1], w[0])));
        }
        if w[1].index() & 1 == 1 {
            let l = u64::from(w[1].level());
            entries.push(l - last_one);
            last_one = l;
        }
    }
    Ok(entries)
}

/// Code entries fixed by passing through `s`, and the least admissible value
/// of the next entry (the next 1-step must lie strictly below `s`).
pub fn prefix_through(s: TreeNode) -> (Vec<u64>, u64) {
    let entries = branch_to_code(&s.ancestors_inclusive()).expect("ancestor path is well formed");
    let fixed: u64 = entries.iter().sum();
    (entries, u64::from(s.level()) - fixed + 1)
}

/// Does the branch of `code` pass through `s`?
pub fn code_passes_through(code: &BranchCode, s: TreeNode) -> bool {
    match code_to_branch(code, s.level()) {
        Ok(path) => path.last() == Some(&s),
        Err(_) => false,
    }
}
