use std::collections::{BTreeMap, BTreeSet, HashMap};

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use super::bush::Bush;
use super::code::BranchCode;
use super::node::TreeNode;
use super::seminorm::{seminorm_oracle, seminorm_through, SeminormWitness, TreeVector};
use crate::error::{Error, Result};
use crate::implicit::NormResult;
use crate::rational::Rational;

/// Largest support `y_norm` accepts; the chain search is exponential in it.
pub const Y_SUPPORT_CAP: usize = 10;

/// Largest support the exhaustive oracle accepts.
pub const Y_ORACLE_CAP: usize = 6;

/// One bush of a chain and the branch attaining its seminorm.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainLink {
    pub bush: Bush,
    pub code: BranchCode,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum YWitness {
    /// The value is `|x(node)|`.
    Sup { node: TreeNode },
    /// Mutually disjoint bushes with cumulative shifts `0, |S_1|, |S_1|+|S_2|, …`.
    Chain { links: Vec<ChainLink> },
}

impl YWitness {
    pub fn evaluate(&self, x: &TreeVector) -> Result<Rational> {
        match self {
            YWitness::Sup { node } => Ok(x.get(node).abs()),
            YWitness::Chain { links } => {
                let sets: Vec<BTreeSet<TreeNode>> = links.iter().map(|l| l.bush.nodes()).collect();
                for i in 0..sets.len() {
                    for j in i + 1..sets.len() {
                        if !sets[i].is_disjoint(&sets[j]) {
                            return Err(Error::witness(format!("bushes {} and {} share nodes", i + 1, j + 1)));
                        }
                    }
                }
                let mut shift = 0;
                let mut total = Rational::zero();
                for link in links {
                    total += SeminormWitness { code: link.code.clone() }.evaluate(x, shift, &link.bush)?;
                    shift += link.bush.len();
                }
                Ok(total)
            }
        }
    }
}

struct Candidate {
    bush: Bush,
    nodes: FixedBitSet,
    coeffs: Vec<Rational>,
}

/// Bushes whose targets lie in `support`, reduced to the ones that can matter.
///
/// With two or more pairs the bush is forced by its targets: `s_i` must be
/// the meet of `t_i` and `t_n`, those meets must be distinct and strictly
/// above `t_n`, and the shallowest valid `s_n` is the child of the deepest
/// meet toward `t_n` (the node set does not depend on that choice). With one
/// pair every ancestor of `t_1` is a candidate start, trading seminorm value
/// against the size of the node set.
fn candidate_bushes(support: &[TreeNode]) -> Vec<Bush> {
    let mut out = Vec::new();
    for &t in support {
        for s in t.ancestors_inclusive() {
            out.push(Bush::new(vec![(s, t)]));
        }
    }
    for &tn in support {
        let others: Vec<(TreeNode, TreeNode)> = support
            .iter()
            .filter(|&&t| t != tn)
            .map(|&t| (t.meet(tn), t))
            .filter(|&(m, _)| m.precedes(tn))
            .collect();
        for mask in 1u32..(1 << others.len()) {
            let mut chosen: Vec<(TreeNode, TreeNode)> =
                (0..others.len()).filter(|&i| mask >> i & 1 == 1).map(|i| others[i]).collect();
            chosen.sort_by_key(|&(m, _)| m.level());
            if chosen.windows(2).any(|w| w[0].0 == w[1].0) {
                continue;
            }
            let deepest = chosen.last().expect("nonempty").0;
            let sn = tn.ancestor_at(deepest.level() + 1);
            chosen.push((sn, tn));
            let bush = Bush::new(chosen);
            debug_assert!(bush.is_bush(), "{bush:?}");
            out.push(bush);
        }
    }
    out
}

struct ChainSearch<'a> {
    candidates: &'a [Candidate],
    values: HashMap<(usize, usize), (Rational, BranchCode)>,
    memo: HashMap<(FixedBitSet, usize), (Rational, Option<usize>)>,
}

impl ChainSearch<'_> {
    fn seminorm(&mut self, c: usize, shift: usize) -> (Rational, BranchCode) {
        if let Some(hit) = self.values.get(&(c, shift)) {
            return hit.clone();
        }
        let cand = &self.candidates[c];
        let (v, w) = seminorm_through(cand.bush.last_s(), shift, &cand.coeffs);
        self.values.insert((c, shift), (v.clone(), w.code.clone()));
        (v, w.code)
    }

    /// Best continuation once the nodes in `used` are taken and the next
    /// bush is evaluated at `shift`.
    fn best(&mut self, used: &FixedBitSet, shift: usize) -> Rational {
        let key = (used.clone(), shift);
        if let Some(hit) = self.memo.get(&key) {
            return hit.0.clone();
        }
        let mut best = Rational::zero();
        let mut arg = None;
        for c in 0..self.candidates.len() {
            if !self.candidates[c].nodes.is_disjoint(used) {
                continue;
            }
            let value = self.seminorm(c, shift).0;
            if !value.is_positive() {
                continue;
            }
            let mut next = used.clone();
            next.union_with(&self.candidates[c].nodes);
            let total = value + self.best(&next, shift + self.candidates[c].bush.len());
            if total > best {
                best = total;
                arg = Some(c);
            }
        }
        self.memo.insert(key, (best.clone(), arg));
        best
    }

    fn links(&mut self, universe: usize) -> Vec<ChainLink> {
        let mut used = FixedBitSet::with_capacity(universe);
        let mut shift = 0;
        let mut links = Vec::new();
        while let Some(&(_, Some(c))) = self.memo.get(&(used.clone(), shift)) {
            let code = self.seminorm(c, shift).1;
            links.push(ChainLink { bush: self.candidates[c].bush.clone(), code });
            used.union_with(&self.candidates[c].nodes);
            shift += self.candidates[c].bush.len();
        }
        links
    }
}

/// `‖x‖ = ‖x‖_∞ ∨ sup Σ_i ‖x‖_{|S_1|+…+|S_{i-1}|, S_i}` over chains of mutually
/// disjoint bushes.
pub fn y_norm(x: &TreeVector) -> Result<NormResult<YWitness>> {
    let support: Vec<TreeNode> = x.iter().filter(|(_, v)| !v.is_zero()).map(|(t, _)| *t).collect();
    if support.len() > Y_SUPPORT_CAP {
        return Err(Error::cap(format!("support {} exceeds the cap {}", support.len(), Y_SUPPORT_CAP)));
    }
    let Some((&sup_node, sup)) = x.iter().map(|(t, v)| (t, v.abs())).max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(a.0))) else {
        return Ok(NormResult { value: Rational::zero(), witness: YWitness::Chain { links: vec![] } });
    };
    let mut universe: BTreeMap<TreeNode, usize> = BTreeMap::new();
    for t in &support {
        for a in t.ancestors_inclusive() {
            let next = universe.len();
            universe.entry(a).or_insert(next);
        }
    }
    let candidates: Vec<Candidate> = candidate_bushes(&support)
        .into_iter()
        .map(|bush| {
            let mut nodes = FixedBitSet::with_capacity(universe.len());
            for t in bush.nodes() {
                nodes.insert(universe[&t]);
            }
            let coeffs = bush.targets().map(|t| x.get(&t).abs()).collect();
            Candidate { bush, nodes, coeffs }
        })
        .collect();
    let mut search = ChainSearch { candidates: &candidates, values: HashMap::new(), memo: HashMap::new() };
    let chain = search.best(&FixedBitSet::with_capacity(universe.len()), 0);
    if chain > sup {
        let links = search.links(universe.len());
        Ok(NormResult { value: chain, witness: YWitness::Chain { links } })
    } else {
        Ok(NormResult { value: sup, witness: YWitness::Sup { node: sup_node } })
    }
}

/// Exhaustive `‖x‖` straight from the definitions: every bush with targets in
/// the support and starts among their ancestors (grown pair by pair, since
/// every prefix of a bush is a bush), raw-code seminorms, and every ordered
/// chain of pairwise disjoint bushes.
pub fn y_norm_oracle(x: &TreeVector) -> Result<Rational> {
    let support: Vec<TreeNode> = x.iter().filter(|(_, v)| !v.is_zero()).map(|(t, _)| *t).collect();
    if support.len() > Y_ORACLE_CAP {
        return Err(Error::cap(format!("oracle support {} exceeds {}", support.len(), Y_ORACLE_CAP)));
    }
    let mut bushes = Vec::new();
    let mut stack: Vec<Vec<(TreeNode, TreeNode)>> = vec![vec![]];
    while let Some(pairs) = stack.pop() {
        for &t in &support {
            if pairs.iter().any(|p| p.1 == t) {
                continue;
            }
            for s in t.ancestors_inclusive() {
                let mut next = pairs.clone();
                next.push((s, t));
                let bush = Bush::new(next.clone());
                if bush.is_bush() {
                    bushes.push((bush.clone(), bush.nodes()));
                    stack.push(next);
                }
            }
        }
    }
    let mut seminorms: HashMap<(TreeNode, usize, Vec<Rational>), Rational> = HashMap::new();
    let mut value = |bush: &Bush, shift: usize| -> Rational {
        let coeffs: Vec<Rational> = bush.targets().map(|t| x.get(&t).abs()).collect();
        let s = bush.last_s();
        let cap = 2 * (shift + coeffs.len()) as u64 + u64::from(s.level()) + 3;
        seminorms.entry((s, shift, coeffs.clone())).or_insert_with(|| seminorm_oracle(s, shift, &coeffs, cap)).clone()
    };
    fn chain(
        bushes: &[(Bush, BTreeSet<TreeNode>)],
        used: &BTreeSet<TreeNode>,
        shift: usize,
        value: &mut dyn FnMut(&Bush, usize) -> Rational,
        memo: &mut HashMap<(BTreeSet<TreeNode>, usize), Rational>,
    ) -> Rational {
        if let Some(hit) = memo.get(&(used.clone(), shift)) {
            return hit.clone();
        }
        let mut best = Rational::zero();
        for (bush, nodes) in bushes {
            if !nodes.is_disjoint(used) {
                continue;
            }
            let mut next = used.clone();
            next.extend(nodes.iter().copied());
            let total = value(bush, shift) + chain(bushes, &next, shift + bush.len(), value, memo);
            best = best.max(total);
        }
        memo.insert((used.clone(), shift), best.clone());
        best
    }
    let chained = chain(&bushes, &BTreeSet::new(), 0, &mut value, &mut HashMap::new());
    Ok(chained.max(x.sup_norm()))
}
