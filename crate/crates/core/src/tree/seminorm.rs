use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::bush::Bush;
use super::code::{branch_weights, code_passes_through, next_block, prefix_through, staircase, BranchCode};
use super::node::TreeNode;
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::vector::SparseVector;

pub type TreeVector = SparseVector<TreeNode>;

/// The branch attaining `‖x‖_{k,S}`, given by its code.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeminormWitness {
    pub code: BranchCode,
}

impl SeminormWitness {
    /// `Σ_j w_{k+j} |x(t_j)|` along the witness branch, after checking that it
    /// passes through `s_n`.
    pub fn evaluate(&self, x: &TreeVector, k: usize, bush: &Bush) -> Result<Rational> {
        bush.check().map_err(|v| Error::invalid(format!("not a bush: {}", v.detail)))?;
        if !code_passes_through(&self.code, bush.last_s()) {
            return Err(Error::witness(format!("branch {:?} misses s_n = {}", self.code, bush.last_s())));
        }
        let w = branch_weights(&self.code, k + bush.len()).map_err(|e| Error::witness(e.to_string()))?;
        Ok(bush.targets().enumerate().map(|(j, t)| &w[k + j] * &x.get(&t).abs()).sum())
    }
}

/// `‖x‖_{k,S}`: the best weighted sum over branches through `s_n`.
pub fn bush_seminorm(x: &TreeVector, k: usize, bush: &Bush) -> Result<(Rational, SeminormWitness)> {
    bush.check().map_err(|v| Error::invalid(format!("not a bush (condition {}): {}", v.bullet, v.detail)))?;
    let coeffs: Vec<Rational> = bush.targets().map(|t| x.get(&t).abs()).collect();
    Ok(seminorm_through(bush.last_s(), k, &coeffs))
}

/// Maximizes `Σ_j w_{k+j} v_j` over branches through `s`.
///
/// Past the entries fixed by `s` every choice is either "terminate" or a
/// block length `L`; a block reaching the horizon is only improved by
/// shortening it to end there, so `L ≤ max(L_min, H - P)` suffices.
pub(crate) fn seminorm_through(s: TreeNode, k: usize, coeffs: &[Rational]) -> (Rational, SeminormWitness) {
    let (fixed, cmin) = prefix_through(s);
    let horizon = k + coeffs.len();
    let mut v = vec![Rational::zero(); horizon];
    for (j, c) in coeffs.iter().enumerate() {
        v[k + j] = c.clone();
    }
    let (dens, last) = staircase(&fixed);
    let mut solver = Solver { v: &v, memo: HashMap::new() };
    if dens.len() >= horizon {
        let value = (0..horizon).map(|p| &v[p] / &Rational::from(dens[p])).sum();
        return (value, SeminormWitness { code: BranchCode { entries: fixed, terminated: true } });
    }
    let prefix_value: Rational = dens.iter().enumerate().map(|(p, &d)| &v[p] / &Rational::from(d)).sum();
    let (value, step) = solver.best(dens.len(), last, cmin);
    let mut entries = fixed;
    let mut terminated = true;
    let mut pos = dens.len();
    let mut choice = step;
    loop {
        match choice {
            Step::Terminate => break,
            Step::Block(l) => {
                entries.push(l);
                pos += l as usize;
                if pos >= horizon {
                    terminated = false;
                    break;
                }
                choice = solver.best(pos, l, 1).1;
            }
        }
    }
    (prefix_value + value, SeminormWitness { code: BranchCode { entries, terminated } })
}

#[derive(Clone, Copy, Debug)]
enum Step {
    Terminate,
    Block(u64),
}

struct Solver<'a> {
    v: &'a [Rational],
    memo: HashMap<(usize, u64, u64), (Rational, Step)>,
}

impl Solver<'_> {
    fn horizon(&self) -> usize {
        self.v.len()
    }

    /// Best value of positions `pos+1..=H` given last block value `1/k` and
    /// the least admissible next entry `lo`.
    fn best(&mut self, pos: usize, k: u64, lo: u64) -> (Rational, Step) {
        let h = self.horizon();
        if pos >= h {
            return (Rational::zero(), Step::Terminate);
        }
        let key = (pos, k, lo);
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }
        let mut best: Rational = (pos..h).map(|p| &self.v[p] / &Rational::from(k + (p - pos) as u64 + 1)).sum();
        let mut step = Step::Terminate;
        let lmin = next_block(k, lo).max(k + 1);
        let lmax = lmin.max((h - pos) as u64);
        for l in lmin..=lmax {
            let end = (pos + l as usize).min(h);
            let block: Rational = self.v[pos..end].iter().sum::<Rational>() / Rational::from(l);
            let total = block + self.best(end, l, 1).0;
            if total > best {
                best = total;
                step = Step::Block(l);
            }
        }
        self.memo.insert(key, (best.clone(), step));
        (best, step)
    }
}

/// Exhaustive `‖·‖_{k,S}` over raw code entries up to `cap`, independent of the
/// block reduction above. Only meant for small horizons.
pub fn seminorm_oracle(s: TreeNode, k: usize, coeffs: &[Rational], cap: u64) -> Rational {
    let (fixed, cmin) = prefix_through(s);
    let horizon = k + coeffs.len();
    let value = |code: &BranchCode| -> Rational {
        let w = branch_weights(code, horizon).expect("code covers the horizon");
        coeffs.iter().enumerate().map(|(j, c)| &w[k + j] * c).sum()
    };
    let mut best = Rational::zero();
    let mut stack = vec![fixed];
    while let Some(entries) = stack.pop() {
        let covered = staircase(&entries).0.len();
        let terminated = BranchCode { entries: entries.clone(), terminated: true };
        if covered >= horizon {
            best = best.max(value(&terminated));
            continue;
        }
        best = best.max(value(&terminated));
        let first_free = entries.len() == prefix_through(s).0.len();
        let lo = if first_free { cmin } else { 1 };
        for c in lo..=cap.max(lo) {
            let mut next = entries.clone();
            next.push(c);
            stack.push(next);
        }
    }
    best
}
