//! Finite diagnostics of spreading models: spread-out evaluations, growth
//! tables, domination constants and basis distances over sample grids, the
//! two norm combinations, and a search for `ℓ_p` blocks.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::{lorentz_norm, lp_norm, schreier_lorentz_norm, LpExponent, SchreierVariant, WeightSeq};
use crate::error::{Error, Result};
use crate::implicit::{t_dw1_norm, x_norm, TSpec, XSpaceSpec, T_SUPPORT_CAP};
use crate::rational::Rational;
use crate::roots::{default_width, Enclosure};
use crate::tree::{y_norm, TreeNode, TreeVector};
use crate::vector::SeqVector;

/// A norm on finitely supported sequences, evaluated exactly or as a
/// certified enclosure.
pub trait NormOracle: Send + Sync {
    fn describe(&self) -> String;

    fn norm(&self, a: &SeqVector) -> Result<Enclosure>;

    /// The value only depends on the nonzero coefficients in order, not on
    /// where they sit.
    fn subsymmetric(&self) -> bool {
        false
    }
}

pub type Oracle = Arc<dyn NormOracle>;

/// Coefficients `a_1, …, a_n` on the unit vectors `e_1, …, e_n`.
pub fn coeffs(a: &[Rational]) -> SeqVector {
    SeqVector::from_coeffs_at(1, a)
}

pub struct Lp {
    pub p: LpExponent,
    pub width: Rational,
}

impl Lp {
    pub fn new(p: LpExponent) -> Self {
        Lp { p, width: default_width() }
    }
}

impl NormOracle for Lp {
    fn describe(&self) -> String {
        format!("l_{}", self.p)
    }

    fn norm(&self, a: &SeqVector) -> Result<Enclosure> {
        lp_norm(a, &self.p, &self.width)
    }

    fn subsymmetric(&self) -> bool {
        true
    }
}

pub struct Lorentz {
    pub w: WeightSeq,
}

impl NormOracle for Lorentz {
    fn describe(&self) -> String {
        "d(w,1)".into()
    }

    fn norm(&self, a: &SeqVector) -> Result<Enclosure> {
        self.w.validate()?;
        Ok(Enclosure::exact(lorentz_norm(&self.w, a)))
    }

    fn subsymmetric(&self) -> bool {
        true
    }
}

pub struct SchreierLorentz {
    pub w: WeightSeq,
    pub variant: SchreierVariant,
}

impl NormOracle for SchreierLorentz {
    fn describe(&self) -> String {
        "S(d(w,1))".into()
    }

    fn norm(&self, a: &SeqVector) -> Result<Enclosure> {
        self.w.validate()?;
        Ok(Enclosure::exact(schreier_lorentz_norm(&self.w, a, self.variant).0))
    }
}

pub struct SpaceX {
    pub spec: XSpaceSpec,
}

impl NormOracle for SpaceX {
    fn describe(&self) -> String {
        "X".into()
    }

    fn norm(&self, a: &SeqVector) -> Result<Enclosure> {
        Ok(Enclosure::exact(x_norm(&self.spec, a)?.value))
    }
}

pub struct ImplicitLorentz {
    pub spec: TSpec,
}

impl NormOracle for ImplicitLorentz {
    fn describe(&self) -> String {
        "T(d(w,1))".into()
    }

    fn norm(&self, a: &SeqVector) -> Result<Enclosure> {
        Ok(Enclosure::exact(t_dw1_norm(&self.spec, a, T_SUPPORT_CAP)?.value))
    }
}

/// The tree space read along its basis order `e_(0,0), e_(1,0), e_(1,1), …`:
/// sequence index `n ≥ 1` is the node at level `⌊log₂ n⌋`, index `n - 2^level`.
pub struct TreeBasis;

pub fn basis_node(n: u64) -> Result<TreeNode> {
    if n == 0 {
        return Err(Error::invalid("basis indices start at 1"));
    }
    let level = 63 - n.leading_zeros();
    TreeNode::new(level, n - (1 << level))
}

impl NormOracle for TreeBasis {
    fn describe(&self) -> String {
        "Y".into()
    }

    fn norm(&self, a: &SeqVector) -> Result<Enclosure> {
        let mut x = TreeVector::zero();
        for (&i, v) in a.iter() {
            x.set(basis_node(i)?, v.clone());
        }
        Ok(Enclosure::exact(y_norm(&x)?.value))
    }
}

/// `c · N`.
pub struct Scaled {
    pub c: Rational,
    pub inner: Oracle,
}

impl NormOracle for Scaled {
    fn describe(&self) -> String {
        format!("{}*{}", self.c, self.inner.describe())
    }

    fn norm(&self, a: &SeqVector) -> Result<Enclosure> {
        Ok(self.inner.norm(a)?.scale(&self.c))
    }

    fn subsymmetric(&self) -> bool {
        self.inner.subsymmetric()
    }
}

/// `a ↦ Σ_i 16 C_i^{-1} N_i(a)`.
pub struct CombineUpper {
    pub children: Vec<Oracle>,
    pub c: Vec<Rational>,
}

pub fn combine_upper(children: Vec<Oracle>, c: Vec<Rational>) -> Result<CombineUpper> {
    if children.is_empty() {
        return Err(Error::invalid("combine_upper needs at least one norm"));
    }
    if children.len() != c.len() {
        return Err(Error::invalid(format!("{} norms but {} constants", children.len(), c.len())));
    }
    if let Some(bad) = c.iter().find(|ci| !ci.is_positive()) {
        return Err(Error::invalid(format!("constant {bad} must be positive")));
    }
    Ok(CombineUpper { children, c })
}

impl CombineUpper {
    pub fn factor(&self, i: usize) -> Rational {
        Rational::from(16u64) / &self.c[i]
    }
}

impl NormOracle for CombineUpper {
    fn describe(&self) -> String {
        let parts: Vec<String> = self.children.iter().zip(&self.c).map(|(n, c)| format!("16/{c}*{}", n.describe())).collect();
        parts.join(" + ")
    }

    fn norm(&self, a: &SeqVector) -> Result<Enclosure> {
        let mut total = Enclosure::exact(Rational::zero());
        for (i, child) in self.children.iter().enumerate() {
            total = total.add(&child.norm(a)?.scale(&self.factor(i)));
        }
        Ok(total)
    }

    fn subsymmetric(&self) -> bool {
        self.children.iter().all(|c| c.subsymmetric())
    }
}

/// Pointwise maximum of several norms.
pub struct MaxCombine {
    pub children: Vec<Oracle>,
}

pub fn max_combine(children: Vec<Oracle>) -> Result<MaxCombine> {
    if children.is_empty() {
        return Err(Error::invalid("max_combine needs at least one norm"));
    }
    Ok(MaxCombine { children })
}

impl NormOracle for MaxCombine {
    fn describe(&self) -> String {
        let parts: Vec<String> = self.children.iter().map(|n| n.describe()).collect();
        format!("max({})", parts.join(", "))
    }

    fn norm(&self, a: &SeqVector) -> Result<Enclosure> {
        let mut best = self.children[0].norm(a)?;
        for child in &self.children[1..] {
            best = best.max(&child.norm(a)?);
        }
        Ok(best)
    }

    fn subsymmetric(&self) -> bool {
        self.children.iter().all(|c| c.subsymmetric())
    }
}

/// Identically distributed blocks `y_i = Σ_j λ_j e_{(i-1)m + j}`.
pub struct Blocks {
    pub inner: Oracle,
    pub lambda: Vec<Rational>,
}

impl Blocks {
    pub fn m(&self) -> usize {
        self.lambda.len()
    }
}

impl NormOracle for Blocks {
    fn describe(&self) -> String {
        format!("blocks(m={}) of {}", self.m(), self.inner.describe())
    }

    fn norm(&self, a: &SeqVector) -> Result<Enclosure> {
        let m = self.m() as u64;
        let mut x = SeqVector::zero();
        for (&i, ai) in a.iter() {
            for (j, lj) in self.lambda.iter().enumerate() {
                x.set((i - 1) * m + j as u64 + 1, ai * lj);
            }
        }
        self.inner.norm(&x)
    }

    fn subsymmetric(&self) -> bool {
        self.inner.subsymmetric()
    }
}

/// `F(shift, gap) = ‖Σ a_i e_{shift + gap·i}‖` tabulated over shifts and gaps.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpreadingEstimate {
    pub a: Vec<Rational>,
    pub shifts: Vec<u64>,
    pub gaps: Vec<u64>,
    /// `table[r][c] = F(shifts[r], gaps[c])`.
    pub table: Vec<Vec<Enclosure>>,
    pub stabilized: bool,
    /// Common value once stabilized, or the exact value of a subsymmetric norm.
    pub value: Option<Enclosure>,
    /// Largest spread between any table entry and the last one.
    pub residual: Rational,
}

pub const DEFAULT_WINDOW: usize = 3;

/// Evaluates `a` spread out along every shift and gap. Requires `n ≤ shift`
/// for every shift, so the first index used is always admissible.
pub fn sm_estimate(oracle: &dyn NormOracle, a: &[Rational], shifts: &[u64], gaps: &[u64], window: usize) -> Result<SpreadingEstimate> {
    if shifts.is_empty() || gaps.is_empty() {
        return Err(Error::invalid("need at least one shift and one gap"));
    }
    if gaps.contains(&0) {
        return Err(Error::invalid("gaps must be positive"));
    }
    let n = a.len() as u64;
    if let Some(bad) = shifts.iter().find(|&&s| s < n) {
        return Err(Error::invalid(format!("shift {bad} is smaller than the length {n}")));
    }
    if window == 0 {
        return Err(Error::invalid("window must be positive"));
    }
    let mut shifts = shifts.to_vec();
    shifts.sort_unstable();
    shifts.dedup();
    let table: Vec<Vec<Enclosure>> = shifts
        .iter()
        .map(|&s| {
            gaps.iter()
                .map(|&g| {
                    let x = SeqVector::from_pairs(a.iter().enumerate().map(|(i, ai)| (s + g * (i as u64 + 1), ai.clone())));
                    oracle.norm(&x)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let last = table.last().expect("nonempty")[0].clone();
    let stabilized = table.len() >= window && table[table.len() - window..].iter().all(|row| row.iter().all(|e| *e == last));
    let residual = table
        .iter()
        .flatten()
        .map(|e| (&e.hi - &last.lo).max(&last.hi - &e.lo))
        .max()
        .unwrap_or_else(Rational::zero);
    let value = (stabilized || oracle.subsymmetric()).then(|| last.clone());
    Ok(SpreadingEstimate { a: a.to_vec(), shifts, gaps: gaps.to_vec(), table, stabilized, value, residual })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthRow {
    pub n: usize,
    /// `‖Σ_{i≤n} x̃_i‖` when the spread-out values stabilized.
    pub g: Option<Enclosure>,
    /// Value at the largest shift tried.
    pub last: Enclosure,
    /// `g(n) / n`, from the lower end of `g`.
    pub per_n: Option<Rational>,
    pub per_lambda: Option<Rational>,
}

/// `g(n)` for `n = 1, …, N` from sums of `n` ones spread out at shifts
/// `n, 2n, …, (R+1)n`, with the ratios `g(n)/n` and `g(n)/λ_n`.
pub fn growth_report(oracle: &dyn NormOracle, big_n: usize, lambda: Option<&[Rational]>, window: usize) -> Result<Vec<GrowthRow>> {
    if big_n == 0 {
        return Err(Error::invalid("N must be at least 1"));
    }
    if let Some(l) = lambda {
        if l.len() < big_n || l.iter().take(big_n).any(|v| !v.is_positive()) {
            return Err(Error::invalid("need N positive λ values"));
        }
    }
    (1..=big_n)
        .map(|n| {
            let ones = vec![Rational::one(); n];
            let shifts: Vec<u64> = (1..=window as u64 + 1).map(|j| j * n as u64).collect();
            let est = sm_estimate(oracle, &ones, &shifts, &[1], window)?;
            let last = est.table.last().expect("nonempty")[0].clone();
            let per_n = est.value.as_ref().map(|g| &g.lo / &Rational::from(n));
            let per_lambda = match (&est.value, lambda) {
                (Some(g), Some(l)) => Some(&g.lo / &l[n - 1]),
                _ => None,
            };
            Ok(GrowthRow { n, g: est.value, last, per_n, per_lambda })
        })
        .collect()
}

/// Sample points of length `n`: unit vectors, sign vectors (for `n ≤ 10`),
/// extra points, and seeded random rationals, in that order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Grid {
    pub units: bool,
    pub signs: bool,
    pub random: usize,
    pub seed: u64,
    #[serde(default)]
    pub extra: Vec<Vec<Rational>>,
}

impl Default for Grid {
    fn default() -> Self {
        Grid { units: true, signs: true, random: 1000, seed: 0, extra: vec![] }
    }
}

pub const SIGN_GRID_MAX: usize = 10;

impl Grid {
    pub fn points(&self, n: usize) -> Vec<Vec<Rational>> {
        let mut out = Vec::new();
        if self.units {
            for i in 0..n {
                let mut e = vec![Rational::zero(); n];
                e[i] = Rational::one();
                out.push(e);
            }
        }
        if self.signs && n <= SIGN_GRID_MAX {
            for mask in 0u32..(1 << n) {
                out.push((0..n).map(|i| if mask >> i & 1 == 1 { -Rational::one() } else { Rational::one() }).collect());
            }
        }
        out.extend(self.extra.iter().filter(|p| p.len() == n).cloned());
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for _ in 0..self.random {
            out.push((0..n).map(|_| Rational::new(rng.gen_range(-10i64..=10), rng.gen_range(1i64..=10))).collect());
        }
        out
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DominationReport {
    /// Certified lower bound on the best `C` with `C·N₁(a) ≥ N₂(a)`.
    pub c_lower: Rational,
    pub argmax: Vec<Rational>,
    pub samples: usize,
}

/// `max N₂(a) / N₁(a)` over the grid, certified from below.
pub fn domination_constant(n1: &dyn NormOracle, n2: &dyn NormOracle, n: usize, grid: &Grid) -> Result<DominationReport> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    let points = grid.points(n);
    let ratios: Vec<Option<Rational>> = points
        .par_iter()
        .map(|a| {
            let x = coeffs(a);
            if x.is_zero() {
                return Ok(None);
            }
            let top = n2.norm(&x)?;
            let bottom = n1.norm(&x)?;
            if !bottom.hi.is_positive() {
                return Err(Error::invalid(format!("{} vanishes at a nonzero vector", n1.describe())));
            }
            Ok(Some(&top.lo / &bottom.hi))
        })
        .collect::<Result<_>>()?;
    let mut best: Option<(Rational, usize)> = None;
    for (i, r) in ratios.into_iter().enumerate() {
        if let Some(r) = r {
            if best.as_ref().is_none_or(|(b, _)| r > *b) {
                best = Some((r, i));
            }
        }
    }
    let (c_lower, at) = best.ok_or_else(|| Error::invalid("grid has no nonzero points"))?;
    Ok(DominationReport { c_lower, argmax: points[at].clone(), samples: points.len() })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistanceReport {
    pub d_lower: Rational,
    /// `sup N₁/N₂`.
    pub forward: DominationReport,
    /// `sup N₂/N₁`.
    pub backward: DominationReport,
}

/// Lower bound on `d_b` as the product of the two directional constants.
pub fn basis_distance(n1: &dyn NormOracle, n2: &dyn NormOracle, n: usize, grid: &Grid) -> Result<DistanceReport> {
    let forward = domination_constant(n2, n1, n, grid)?;
    let backward = domination_constant(n1, n2, n, grid)?;
    Ok(DistanceReport { d_lower: &forward.c_lower * &backward.c_lower, forward, backward })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockCandidate {
    pub m: usize,
    pub lambda: Vec<Rational>,
    pub constant: Rational,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KrivineReport {
    pub best: BlockCandidate,
    /// Best candidate found for each `m`.
    pub per_m: Vec<BlockCandidate>,
    pub evaluations: usize,
    pub budget_exhausted: bool,
}

/// `d_b` lower bound between `n` identically distributed blocks with
/// coefficients `lambda` and the unit vector basis of `ℓ_p^n`.
pub fn block_distance(oracle: &Oracle, p: &LpExponent, n: usize, lambda: &[Rational], grid: &Grid) -> Result<Rational> {
    let blocks = Blocks { inner: oracle.clone(), lambda: lambda.to_vec() };
    Ok(basis_distance(&blocks, &Lp::new(p.clone()), n, grid)?.d_lower)
}

struct BlockSearch<'a> {
    oracle: &'a Oracle,
    p: &'a LpExponent,
    n: usize,
    grid: &'a Grid,
    /// Evaluation count at which the current block length must stop.
    limit: usize,
    evaluations: usize,
}

impl BlockSearch<'_> {
    /// Evaluates `lambda` and keeps it if it beats `best`; `false` once the
    /// budget share of the current block length is spent.
    fn consider(&mut self, best: &mut Option<BlockCandidate>, lambda: Vec<Rational>) -> Result<bool> {
        if self.evaluations >= self.limit {
            return Ok(false);
        }
        self.evaluations += 1;
        let constant = block_distance(self.oracle, self.p, self.n, &lambda, self.grid)?;
        if best.as_ref().is_none_or(|b| constant < b.constant) {
            *best = Some(BlockCandidate { m: lambda.len(), lambda, constant });
        }
        Ok(true)
    }
}

/// Looks for blocks `y_i = Σ_j λ_j x_{(i-1)m+j}` close to `ℓ_p^n`: for each
/// `m ≤ m_max`, flat blocks first, then small integer patterns, then
/// coordinate refinement of the best pattern. Each `m` gets an equal share
/// of the `budget` evaluations. The result is the best constant found, not a claim of optimality.
pub fn krivine_block_search(oracle: &Oracle, p: &LpExponent, n: usize, m_max: usize, budget: usize, grid: &Grid) -> Result<KrivineReport> {
    if n < 2 || m_max == 0 {
        return Err(Error::invalid("need n ≥ 2 and m_max ≥ 1"));
    }
    if !oracle.subsymmetric() {
        return Err(Error::invalid(format!("{} is not declared subsymmetric", oracle.describe())));
    }
    let share = budget / m_max;
    let mut search = BlockSearch { oracle, p, n, grid, limit: 0, evaluations: 0 };
    let mut exhausted = false;
    let mut per_m: Vec<BlockCandidate> = Vec::new();
    for m in 1..=m_max {
        search.limit = search.evaluations + share;
        let mut best: Option<BlockCandidate> = None;
        if !search.consider(&mut best, vec![Rational::one(); m])? {
            exhausted = true;
            break;
        }
        let mut spent = false;
        if m > 1 {
            let patterns = 3usize.pow((m - 1).min(4) as u32);
            for code in 1..patterns {
                let mut lambda = vec![Rational::one(); m];
                let mut c = code;
                for slot in lambda.iter_mut().skip(1).take(4) {
                    *slot = Rational::from((c % 3) as u64 + 1);
                    c /= 3;
                }
                if !search.consider(&mut best, lambda)? {
                    spent = true;
                    break;
                }
            }
            let mut step = Rational::new(1, 2);
            while !spent && step >= Rational::new(1, 8) {
                let current = best.clone().expect("evaluated at least once");
                for j in 1..m {
                    for sign in [1i64, -1] {
                        let mut lambda = current.lambda.clone();
                        lambda[j] = &lambda[j] + &(&step * &Rational::from(sign));
                        if lambda[j].is_positive() && !search.consider(&mut best, lambda)? {
                            spent = true;
                        }
                    }
                }
                if best.as_ref().map(|b| &b.constant) == Some(&current.constant) {
                    step = &step / &Rational::from(2u64);
                }
            }
        }
        per_m.extend(best);
        exhausted |= spent;
    }
    let best = per_m
        .iter()
        .min_by(|a, b| a.constant.cmp(&b.constant).then(a.m.cmp(&b.m)))
        .cloned()
        .ok_or_else(|| Error::invalid("budget too small for a single evaluation"))?;
    Ok(KrivineReport { best, per_m, evaluations: search.evaluations, budget_exhausted: exhausted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::WeightSeq;
    use crate::rational::q;
    use proptest::prelude::*;

    fn harmonic(n: u64) -> Rational {
        (1..=n).map(Rational::unit_fraction).sum()
    }

    fn lp(p: LpExponent) -> Oracle {
        Arc::new(Lp::new(p))
    }

    fn l1() -> Oracle {
        lp(LpExponent::Finite(Rational::one()))
    }

    fn l2() -> Oracle {
        lp(LpExponent::Finite(Rational::from(2u64)))
    }

    fn linf() -> Oracle {
        lp(LpExponent::Infinity)
    }

    fn dw1() -> Oracle {
        Arc::new(Lorentz { w: WeightSeq::Harmonic })
    }

    fn small_grid() -> Grid {
        Grid { random: 100, ..Grid::default() }
    }

    #[test]
    fn spread_sums_of_ones() {
        let ones = vec![Rational::one(); 4];
        let est = sm_estimate(dw1().as_ref(), &ones, &[4, 5, 9], &[1, 2], 3).unwrap();
        assert!(est.stabilized);
        assert_eq!(est.value.unwrap(), Enclosure::exact(harmonic(4)));
        let s = SchreierLorentz { w: WeightSeq::Harmonic, variant: SchreierVariant::default() };
        let est = sm_estimate(&s, &ones, &[4, 6, 8, 10], &[1], 3).unwrap();
        assert!(est.stabilized);
        assert_eq!(est.value.unwrap(), Enclosure::exact(harmonic(4)));
        let zero = sm_estimate(dw1().as_ref(), &vec![Rational::zero(); 3], &[3], &[1], 1).unwrap();
        assert_eq!(zero.value.unwrap(), Enclosure::exact(Rational::zero()));
        assert!(sm_estimate(dw1().as_ref(), &ones, &[3], &[1], 1).is_err());
    }

    #[test]
    fn growth_of_classical_norms() {
        for row in growth_report(l1().as_ref(), 6, None, 3).unwrap() {
            assert_eq!(row.g.unwrap(), Enclosure::exact(Rational::from(row.n)));
            assert_eq!(row.per_n.unwrap(), Rational::one());
        }
        for row in growth_report(linf().as_ref(), 6, None, 3).unwrap() {
            assert_eq!(row.g.unwrap(), Enclosure::exact(Rational::one()));
        }
        for row in growth_report(dw1().as_ref(), 10, None, 3).unwrap() {
            assert_eq!(row.g.unwrap(), Enclosure::exact(harmonic(row.n as u64)));
        }
    }

    #[test]
    fn domination_examples() {
        let r = domination_constant(l1().as_ref(), l2().as_ref(), 5, &small_grid()).unwrap();
        assert_eq!(r.c_lower, Rational::one());
        assert_eq!(r.argmax, vec![q(1, 1), q(0, 1), q(0, 1), q(0, 1), q(0, 1)]);
        let r = domination_constant(l2().as_ref(), l1().as_ref(), 4, &small_grid()).unwrap();
        assert_eq!(r.c_lower, Rational::from(2u64));
        assert!(r.argmax.iter().all(|a| a.abs() == Rational::one()));
        let r = domination_constant(dw1().as_ref(), dw1().as_ref(), 3, &small_grid()).unwrap();
        assert_eq!(r.c_lower, Rational::one());
        assert_eq!(r.argmax[0], Rational::one());
    }

    #[test]
    fn distance_examples() {
        assert_eq!(basis_distance(dw1().as_ref(), dw1().as_ref(), 4, &small_grid()).unwrap().d_lower, Rational::one());
        assert_eq!(basis_distance(l2().as_ref(), l1().as_ref(), 4, &small_grid()).unwrap().d_lower, Rational::from(2u64));
        let scaled = Scaled { c: q(7, 3), inner: l2() };
        assert_eq!(basis_distance(&scaled, l1().as_ref(), 4, &small_grid()).unwrap().d_lower, Rational::from(2u64));
    }

    #[test]
    fn refining_the_grid_never_lowers_the_bound() {
        let mut prev = Rational::zero();
        for random in [0, 10, 50, 200, 400] {
            let grid = Grid { units: true, signs: false, random, seed: 7, extra: vec![] };
            let s: Oracle = Arc::new(SchreierLorentz { w: WeightSeq::Harmonic, variant: SchreierVariant::default() });
            let d = basis_distance(s.as_ref(), l2().as_ref(), 3, &grid).unwrap().d_lower;
            assert!(d >= prev);
            prev = d;
        }
    }

    #[test]
    fn combinations() {
        let one = combine_upper(vec![l1()], vec![Rational::from(16u64)]).unwrap();
        let two = combine_upper(vec![l1(), l1()], vec![Rational::one(), Rational::one()]).unwrap();
        let both = max_combine(vec![l1(), linf()]).unwrap();
        let a = coeffs(&[q(1, 2), q(3, 1), q(0, 1), q(2, 3)]);
        let base = l1().norm(&a).unwrap();
        assert_eq!(one.norm(&a).unwrap(), base);
        assert_eq!(two.norm(&a).unwrap(), base.scale(&Rational::from(32u64)));
        assert_eq!(both.norm(&a).unwrap(), base);
        assert!(combine_upper(vec![], vec![]).is_err());
        assert!(max_combine(vec![]).is_err());
        assert!(combine_upper(vec![l1()], vec![Rational::zero()]).is_err());
    }

    #[test]
    fn block_constants() {
        let one = block_distance(&l1(), &LpExponent::Finite(Rational::one()), 3, &[Rational::one()], &small_grid()).unwrap();
        assert_eq!(one, Rational::one());
        // Flat blocks in d(w,1): d_b to ℓ₁⁴ is 4 H_m / H_{4m}, attained at e_1 and the constant vector.
        for m in [1u64, 2, 4] {
            let d = block_distance(&dw1(), &LpExponent::Finite(Rational::one()), 4, &vec![Rational::one(); m as usize], &small_grid()).unwrap();
            assert_eq!(d, Rational::from(4u64) * harmonic(m) / harmonic(4 * m));
        }
        let report = krivine_block_search(&linf(), &LpExponent::Finite(Rational::one()), 2, 3, 40, &Grid { random: 20, ..Grid::default() }).unwrap();
        assert!(report.best.constant >= Rational::from(2u64));
        let report = krivine_block_search(&l1(), &LpExponent::Finite(Rational::one()), 3, 2, 10, &small_grid()).unwrap();
        assert_eq!(report.best.constant, Rational::one());
        assert_eq!(report.best.m, 1);
        assert!(krivine_block_search(&(Arc::new(TreeBasis) as Oracle), &LpExponent::Infinity, 2, 1, 1, &small_grid()).is_err());
    }

    #[test]
    fn tree_basis_order() {
        assert_eq!(basis_node(1).unwrap(), TreeNode::ROOT);
        assert_eq!(basis_node(3).unwrap(), TreeNode::new(1, 1).unwrap());
        assert_eq!(basis_node(4).unwrap(), TreeNode::new(2, 0).unwrap());
        assert!(basis_node(0).is_err());
        assert_eq!(TreeBasis.norm(&coeffs(&[q(1, 1)])).unwrap(), Enclosure::exact(Rational::one()));
    }

    fn arb_coeffs(n: usize) -> impl Strategy<Value = Vec<Rational>> {
        prop::collection::vec((-6i64..7, 1i64..4).prop_map(|(a, b)| q(a, b)), n)
    }

    proptest! {
        #[test]
        fn combine_upper_bounds(a in arb_coeffs(4), c1 in 1i64..20, c2 in 1i64..20) {
            let s: Oracle = Arc::new(SchreierLorentz { w: WeightSeq::Harmonic, variant: SchreierVariant::default() });
            let children = vec![dw1(), s, l1()];
            let cs = vec![Rational::from(c1), Rational::from(c2), Rational::from(16u64)];
            let comb = combine_upper(children.clone(), cs.clone()).unwrap();
            let x = coeffs(&a);
            let value = comb.norm(&x).unwrap().lo;
            let mut cap = Rational::zero();
            for (i, child) in children.iter().enumerate() {
                prop_assert!(value >= child.norm(&x).unwrap().hi * comb.factor(i));
                let li = (1..=4).map(|j| child.norm(&SeqVector::unit(j)).unwrap().hi).max().unwrap();
                cap += comb.factor(i) * li;
            }
            prop_assert!(value <= cap * x.l1_norm());
        }

        #[test]
        fn max_combine_properties(a in arb_coeffs(3), b in arb_coeffs(3), c in arb_coeffs(3)) {
            let s: Oracle = Arc::new(SchreierLorentz { w: WeightSeq::Harmonic, variant: SchreierVariant::default() });
            let m = max_combine(vec![dw1(), s.clone(), linf()]).unwrap();
            let (x, y, z) = (coeffs(&a), coeffs(&b), coeffs(&c));
            let mx = m.norm(&x).unwrap().lo;
            let parts: Vec<Rational> = [dw1(), s, linf()].iter().map(|o| o.norm(&x).unwrap().lo).collect();
            prop_assert!(parts.iter().all(|p| mx >= *p));
            prop_assert!(parts.contains(&mx));
            let sum = x.add(&y).add(&z);
            prop_assert!(m.norm(&sum).unwrap().lo <= mx + m.norm(&y).unwrap().lo + m.norm(&z).unwrap().lo);
            prop_assert_eq!(max_combine(vec![dw1(), dw1()]).unwrap().norm(&x).unwrap(), dw1().norm(&x).unwrap());
        }
    }
}
