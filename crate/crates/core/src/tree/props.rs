//! Finite checks of the growth properties of the branch weights and of `‖·‖`.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::bush::Bush;
use super::code::{branch_denominators, branch_weights, code_to_branch, prefix_through, staircase, BranchCode};
use super::node::TreeNode;
use super::seminorm::{bush_seminorm, TreeVector};
use super::ynorm::{y_norm, ChainLink, YWitness};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// Can any code starting with `prefix`, whose next entry is at least `lo`,
/// have a weight larger than `1/dens[p]` at some position `p < dens.len()`?
///
/// A block value `1/L` with `L > max(dens)` never exceeds a target weight, and
/// neither does anything after it, so only `L ≤ max(dens)` is explored.
fn dominated(prefix: &[u64], lo: u64, dens: &[u64]) -> bool {
    let (own, k) = staircase(prefix);
    let m = dens.len();
    if own.iter().zip(dens).any(|(a, b)| a < b) {
        return false;
    }
    let dmax = dens.iter().copied().max().unwrap_or(0);
    let mut seen = HashSet::new();
    let mut stack = vec![(own.len(), k, lo)];
    while let Some((pos, k, lo)) = stack.pop() {
        if pos >= m || !seen.insert((pos, k, lo)) {
            continue;
        }
        // Terminate here: weights 1/(K+1), 1/(K+2), ….
        if (pos..m).any(|p| k + (p - pos) as u64 + 1 < dens[p]) {
            return false;
        }
        for l in (k + 1).max(lo)..=dmax {
            let end = (pos + l as usize).min(m);
            if (pos..end).any(|p| l < dens[p]) {
                return false;
            }
            stack.push((end, l, 1));
        }
    }
    true
}

/// Smallest number `M` of leading entries of `b'` such that every code agreeing
/// with `b'` on them has `w_j ≤ w^{(b')}_j` for `j = 1, …, m`.
///
/// A terminated `b'` with `r` entries is the only code agreeing with it on
/// `r + 1` entries, so the search ends there at the latest.
pub fn eq23_threshold(code: &BranchCode, m: usize) -> Result<usize> {
    if m == 0 {
        return Err(Error::invalid("m must be at least 1"));
    }
    let dens = branch_denominators(code, m)?;
    for cut in 0..=code.entries.len() {
        if dominated(&code.entries[..cut], 1, &dens) {
            return Ok(cut);
        }
    }
    Ok(code.entries.len() + 1)
}

/// Shallowest level `ℓ` such that every branch through the node of `b'` at
/// level `ℓ` has its first `m` weights dominated by those of `b'`.
pub fn node_threshold(code: &BranchCode, m: usize) -> Result<u32> {
    let dens = branch_denominators(code, m)?;
    let dmax = dens.iter().copied().max().unwrap_or(1);
    let reach: u64 = code.entries.iter().sum();
    let limit = if code.terminated { reach + dmax + 1 } else { reach };
    let limit = u32::try_from(limit).map_err(|_| Error::invalid("branch too deep"))?;
    let path = code_to_branch(code, limit)?;
    for node in path {
        let (prefix, cmin) = prefix_through(node);
        if dominated(&prefix, cmin, &dens) {
            return Ok(node.level());
        }
    }
    Err(Error::invalid(format!("extendable code too short to fix the first {m} weights")))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthCheck {
    pub threshold_level: u32,
    pub nodes: Vec<TreeNode>,
    pub norm: Rational,
    pub bound: Rational,
    pub holds: bool,
    pub witness: YWitness,
}

/// For `x` the sum of the branch nodes of `b'` at the given `levels` (all
/// below the node threshold for `m = levels.len()`), compares `‖x‖` with
/// `Σ_{k≤m} w_k + 1`. With `levels = None` the `m` levels right below the
/// threshold are used.
pub fn eq24_check(code: &BranchCode, m: usize, levels: Option<&[u32]>) -> Result<GrowthCheck> {
    let threshold_level = node_threshold(code, m)?;
    let levels: Vec<u32> = match levels {
        Some(l) => l.to_vec(),
        None => (1..=m as u32).map(|i| threshold_level + i).collect(),
    };
    if levels.len() != m || levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("need m strictly increasing levels"));
    }
    if levels[0] <= threshold_level {
        return Err(Error::invalid(format!("levels must lie below the threshold level {threshold_level}")));
    }
    let path = code_to_branch(code, *levels.last().expect("m ≥ 1"))?;
    let nodes: Vec<TreeNode> = levels.iter().map(|&l| path[l as usize]).collect();
    let x = TreeVector::from_pairs(nodes.iter().map(|&t| (t, Rational::one())));
    let result = y_norm(&x)?;
    let bound: Rational = branch_weights(code, m)?.iter().sum::<Rational>() + Rational::one();
    Ok(GrowthCheck { threshold_level, nodes, holds: result.value <= bound, norm: result.value, bound, witness: result.witness })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SlowGrowthTable {
    /// `n_1 < n_2 < …`, which is also the code `b'`.
    pub ns: Vec<u64>,
    pub code: BranchCode,
    /// `(k, Σ_{n≤k} w_n / λ_k)` for `k = 1, …, K`.
    pub ratios: Vec<(usize, Rational)>,
}

/// Builds `b' = (n_1, n_2, …)` with `inf_{i ≥ n_k} λ_i ≥ (k+1)²` and
/// `n_{k+1} > n_1 + … + n_k`, taking each `n_k` as small as allowed, until the
/// first `kmax` weights are fixed. `lambda[i - 1]` is `λ_i`; the infimum is
/// taken over the values provided.
pub fn eq22_builder(lambda: &[Rational], kmax: usize) -> Result<SlowGrowthTable> {
    if kmax == 0 || kmax > lambda.len() {
        return Err(Error::invalid("need 1 ≤ K ≤ number of λ values"));
    }
    let n = lambda.len();
    let mut suffix_min = lambda.to_vec();
    for i in (0..n.saturating_sub(1)).rev() {
        if suffix_min[i + 1] < suffix_min[i] {
            suffix_min[i] = suffix_min[i + 1].clone();
        }
    }
    let mut ns: Vec<u64> = Vec::new();
    while staircase(&ns).0.len() < kmax {
        let k = ns.len() as u64 + 1;
        let target = Rational::from((k + 1) * (k + 1));
        let floor = ns.last().copied().unwrap_or(0).max(ns.iter().sum()) + 1;
        let next = (floor..=n as u64).find(|&i| suffix_min[i as usize - 1] >= target);
        match next {
            Some(i) => ns.push(i),
            None => {
                return Err(Error::invalid(format!(
                    "no n_{k} within the {n} values of λ: need inf λ_i ≥ {target} past {}",
                    floor - 1
                )))
            }
        }
    }
    let code = BranchCode::extendable(ns.clone())?;
    let w = branch_weights(&code, kmax)?;
    let mut partial = Rational::zero();
    let mut ratios = Vec::with_capacity(kmax);
    for k in 1..=kmax {
        partial += &w[k - 1];
        if !lambda[k - 1].is_positive() {
            return Err(Error::invalid(format!("λ_{k} must be positive")));
        }
        ratios.push((k, &partial / &lambda[k - 1]));
    }
    Ok(SlowGrowthTable { ns, code, ratios })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SplitReport {
    pub norm: Rational,
    pub sup: Rational,
    /// `K ‖x‖_∞ < 0.4 ‖x‖`, the smallness assumption after normalising.
    pub hypothesis: bool,
    /// The optimal chain the split starts from.
    pub chain: Vec<ChainLink>,
    /// Value of the discarded head, at most `K ‖x‖_∞`.
    pub head: Rational,
    /// Remaining bushes, evaluated with shifts starting at `K`.
    pub tail: Vec<Bush>,
    pub tail_value: Rational,
    /// `tail_value > ‖x‖ / 2`.
    pub holds: bool,
}

/// Splits an optimal chain after its first `K` pairs and evaluates the rest
/// with shifts starting at `K`.
pub fn chain_split(x: &TreeVector, k: usize) -> Result<SplitReport> {
    if k == 0 {
        return Err(Error::invalid("K must be at least 1"));
    }
    let result = y_norm(x)?;
    let norm = result.value.clone();
    let sup = x.sup_norm();
    let hypothesis = Rational::from(k as u64) * &sup * Rational::new(5, 2) < norm;
    let YWitness::Chain { links } = result.witness else {
        return Ok(SplitReport {
            norm,
            sup,
            hypothesis,
            chain: vec![],
            head: Rational::zero(),
            tail: vec![],
            tail_value: Rational::zero(),
            holds: false,
        });
    };
    let total: usize = links.iter().map(|l| l.bush.len()).sum();
    if total < k {
        return Err(Error::invalid(format!("optimal chain has only {total} pairs, fewer than K = {k}")));
    }
    let mut head_pairs = 0;
    let mut tail = Vec::new();
    let mut head = Rational::zero();
    for link in &links {
        let len = link.bush.len();
        if head_pairs >= k {
            tail.push(link.bush.clone());
        } else if head_pairs + len <= k {
            head += bush_seminorm(x, head_pairs, &link.bush)?.0;
            head_pairs += len;
        } else {
            let r = k - head_pairs;
            head += bush_seminorm(x, head_pairs, &link.bush.sub_bush(0..r))?.0;
            head_pairs = k;
            tail.push(link.bush.sub_bush(r..len));
        }
    }
    let mut shift = k;
    let mut tail_value = Rational::zero();
    for bush in &tail {
        tail_value += bush_seminorm(x, shift, bush)?.0;
        shift += bush.len();
    }
    let holds = &tail_value * Rational::from(2u64) > norm;
    Ok(SplitReport { norm, sup, hypothesis, chain: links, head, tail, tail_value, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    /// Direct definition: try every continuation of every prefix with raw
    /// entries up to `cap`, down to the horizon `m`.
    fn threshold_oracle(code: &BranchCode, m: usize, cap: u64) -> usize {
        let dens = branch_denominators(code, m).unwrap();
        let violates = |prefix: &[u64]| -> bool {
            let mut stack = vec![prefix.to_vec()];
            while let Some(entries) = stack.pop() {
                let w = branch_denominators(&BranchCode { entries: entries.clone(), terminated: true }, m).unwrap();
                if w.iter().zip(&dens).any(|(a, b)| a < b) {
                    return true;
                }
                if staircase(&entries).0.len() < m {
                    for c in 1..=cap {
                        let mut next = entries.clone();
                        next.push(c);
                        stack.push(next);
                    }
                }
            }
            false
        };
        (0..=code.entries.len()).find(|&cut| !violates(&code.entries[..cut])).unwrap_or(code.entries.len() + 1)
    }

    #[test]
    fn threshold_examples() {
        let empty = BranchCode::terminated(vec![]).unwrap();
        assert_eq!(eq23_threshold(&empty, 1).unwrap(), 0);
        assert_eq!(eq23_threshold(&empty, 2).unwrap(), 0);
        assert_eq!(eq23_threshold(&empty, 3).unwrap(), 1);
        let one = BranchCode::terminated(vec![1]).unwrap();
        assert_eq!(eq23_threshold(&one, 1).unwrap(), 0);
    }

    #[test]
    fn threshold_matches_oracle_and_is_monotone() {
        let codes = [vec![], vec![1], vec![2, 3, 2], vec![3], vec![1, 1, 4], vec![2, 2]];
        for entries in codes {
            for terminated in [true, false] {
                let code = BranchCode { entries: entries.clone(), terminated };
                let mut prev = 0;
                for m in 1..=6 {
                    let Ok(got) = eq23_threshold(&code, m) else {
                        assert!(!terminated);
                        continue;
                    };
                    assert_eq!(got, threshold_oracle(&code, m, 10), "{code:?} m={m}");
                    assert!(got >= prev);
                    prev = got;
                }
            }
        }
    }

    #[test]
    fn node_threshold_fixes_weights() {
        let code = BranchCode::terminated(vec![2, 3, 2]).unwrap();
        for m in 1..=6 {
            let level = node_threshold(&code, m).unwrap();
            let node = *code_to_branch(&code, level).unwrap().last().unwrap();
            let (prefix, cmin) = prefix_through(node);
            let dens = branch_denominators(&code, m).unwrap();
            assert!(dominated(&prefix, cmin, &dens));
            if level > 0 {
                let above = node.parent().unwrap();
                let (prefix, cmin) = prefix_through(above);
                assert!(!dominated(&prefix, cmin, &dens));
            }
        }
    }

    #[test]
    fn growth_bound_on_sample_code() {
        let code = BranchCode::terminated(vec![2, 3, 2]).unwrap();
        let check = eq24_check(&code, 3, None).unwrap();
        assert!(check.holds, "{check:?}");
        assert_eq!(check.bound, q(7, 3));
        assert_eq!(check.witness.evaluate(&TreeVector::from_pairs(check.nodes.iter().map(|&t| (t, Rational::one())))).unwrap(), check.norm);
    }

    #[test]
    fn slow_growth_recipe() {
        let lambda: Vec<Rational> = (1..=40).map(|k: i64| Rational::from(k)).collect();
        let table = eq22_builder(&lambda, 4).unwrap();
        assert_eq!(table.ns, vec![4]);
        assert_eq!(table.ratios[3].1, q(1, 4));
        let table = eq22_builder(&lambda, 20).unwrap();
        assert_eq!(table.ns, vec![4, 9, 16]);
        assert!(table.ratios.iter().all(|(_, r)| !r.is_negative()));
        let flat = vec![Rational::from(3); 40];
        assert!(eq22_builder(&flat, 4).is_err());
    }

    #[test]
    fn split_on_spine() {
        // Eight ones down the left spine: ‖x‖ ≥ H_8 > 2.5, so K = 1 qualifies.
        let spine = code_to_branch(&BranchCode::terminated(vec![]).unwrap(), 7).unwrap();
        let x = TreeVector::from_pairs(spine.iter().map(|&t| (t, Rational::one())));
        let report = chain_split(&x, 1).unwrap();
        assert!(report.hypothesis);
        assert!(report.head <= report.sup);
        assert!(report.holds, "{report:?}");
    }
}
