//! A layered model space, the diagonal operator `T` that shifts every level
//! down with a geometric factor, polynomials in `T`, and the finite
//! certificates built on them.

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::classical::{ell1_family_norm, layer_norm, LayerWitness, LayeredFamily};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::spreading::NormOracle;
use crate::vector::{SeqVector, SparseVector};

/// Coefficients `a^(ℓ)_j` on the generators `w^ℓ_j`, `ℓ ≥ 0`, `j ≥ 1`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DoubleVector(SparseVector<(u32, u64)>);

impl DoubleVector {
    pub fn zero() -> Self {
        DoubleVector(SparseVector::zero())
    }

    /// `w^ℓ_j`.
    pub fn generator(level: u32, j: u64) -> Result<Self> {
        Self::from_entries([(level, j, Rational::one())])
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (u32, u64, Rational)>) -> Result<Self> {
        let mut pairs = Vec::new();
        for (l, j, a) in entries {
            if j == 0 {
                return Err(Error::invalid("positions start at 1"));
            }
            pairs.push(((l, j), a));
        }
        Ok(DoubleVector(SparseVector::from_pairs(pairs)))
    }

    pub fn get(&self, level: u32, j: u64) -> Rational {
        self.0.get(&(level, j))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn entries(&self) -> impl Iterator<Item = (u32, u64, &Rational)> {
        self.0.iter().map(|(&(l, j), a)| (l, j, a))
    }

    pub fn max_level(&self) -> Option<u32> {
        self.0.iter().map(|(&(l, _), _)| l).max()
    }

    /// The row `(a^(ℓ)_j)_j`.
    pub fn level(&self, level: u32) -> SeqVector {
        SeqVector::from_pairs(self.entries().filter(|e| e.0 == level).map(|(_, j, a)| (j, a.clone())))
    }

    pub fn add(&self, other: &Self) -> Self {
        DoubleVector(self.0.add(&other.0))
    }

    pub fn sub(&self, other: &Self) -> Self {
        DoubleVector(self.0.sub(&other.0))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        DoubleVector(self.0.scale(c))
    }
}

#[derive(Serialize, Deserialize)]
struct DoubleVectorJson {
    entries: Vec<(u32, u64, Rational)>,
}

impl Serialize for DoubleVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DoubleVectorJson { entries: self.entries().map(|(l, j, a)| (l, j, a.clone())).collect() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DoubleVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = DoubleVectorJson::deserialize(d)?;
        DoubleVector::from_entries(raw.entries).map_err(serde::de::Error::custom)
    }
}

/// Up to `max_entries` random entries `p/q` with `|p| ≤ 5`, `1 ≤ q ≤ 4` on
/// rows `0 .. rows` and positions `1 ..= max_j`.
pub fn random_double_vector(rng: &mut impl rand::Rng, rows: u32, max_j: u64, max_entries: usize) -> DoubleVector {
    let count = rng.gen_range(0..=max_entries);
    let entries: Vec<(u32, u64, Rational)> = (0..count)
        .map(|_| (rng.gen_range(0..rows), rng.gen_range(1..=max_j), Rational::new(rng.gen_range(-5i64..=5), rng.gen_range(1i64..=4))))
        .collect();
    DoubleVector::from_entries(entries).expect("positions start at 1")
}

/// For each level `ℓ` and term `i`, a term `i'` of level `ℓ + 1` with
/// `δ^(ℓ)_i ≤ δ^(ℓ+1)_{i'}` and `M^(ℓ)_i ≤ M^(ℓ+1)_{i'}`, or the first pair
/// without one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotoneCertificate {
    pub monotone: bool,
    /// `matches[ℓ-1][i-1] = i'`, all 1-based, as far as the check got.
    pub matches: Vec<Vec<usize>>,
    /// `(ℓ, i)` of the first term with no dominating successor.
    pub failure: Option<(usize, usize)>,
}

/// Sufficient condition for `‖a‖_ℓ ≤ ‖a‖_{ℓ+1}` at every level: every term
/// `δ_i ‖a‖_{ℓ_1(𝓖_i)}` is dominated termwise by one on the next level.
pub fn check_layer_monotone(fam: &LayeredFamily) -> Result<MonotoneCertificate> {
    fam.validate()?;
    let mut matches = Vec::new();
    for (idx, pair) in fam.levels.windows(2).enumerate() {
        let (lo, hi) = (&pair[0], &pair[1]);
        let mut row = Vec::new();
        for i in 0..lo.delta.len() {
            let found = (0..hi.delta.len()).find(|&k| lo.delta[i] <= hi.delta[k] && lo.m[i] <= hi.m[k]);
            match found {
                Some(k) => row.push(k + 1),
                None => {
                    matches.push(row);
                    return Ok(MonotoneCertificate { monotone: false, matches, failure: Some((idx + 1, i + 1)) });
                }
            }
        }
        matches.push(row);
    }
    Ok(MonotoneCertificate { monotone: true, matches, failure: None })
}

/// Layered family whose level norms have been certified monotone. Row `ℓ`
/// of a `DoubleVector` is measured with levels `ℓ` and `ℓ + 1`, so rows
/// `0 ..= depth - 1` are usable.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelSpace {
    pub fam: LayeredFamily,
    pub monotone: bool,
}

impl ModelSpace {
    pub fn new(fam: LayeredFamily) -> Result<Self> {
        let monotone = check_layer_monotone(&fam)?.monotone;
        Ok(ModelSpace { fam, monotone })
    }

    pub fn rows(&self) -> u32 {
        self.fam.depth() as u32
    }

    fn check_rows(&self, a: &DoubleVector) -> Result<()> {
        match a.max_level() {
            Some(l) if l >= self.rows() => Err(Error::invalid(format!("row {l} needs level {} of a {}-level family", l + 1, self.rows()))),
            _ => Ok(()),
        }
    }
}

/// Which row and family level attain the host norm.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HostWitness {
    pub row: u32,
    pub level: usize,
    pub term: LayerWitness,
}

impl HostWitness {
    pub fn evaluate(&self, space: &ModelSpace, a: &DoubleVector) -> Result<Rational> {
        if self.level != self.row as usize && self.level != self.row as usize + 1 || self.level == 0 {
            return Err(Error::witness("level must be the row or the next one"));
        }
        self.term.evaluate(&space.fam, self.level, &a.level(self.row))
    }
}

/// `max_ℓ max(‖A^(ℓ)‖_ℓ [ℓ ≥ 1], ‖A^(ℓ)‖_{ℓ+1})`.
pub fn host_norm(space: &ModelSpace, a: &DoubleVector) -> Result<(Rational, Option<HostWitness>)> {
    if !space.monotone {
        return Err(Error::invalid("the family is not certified monotone"));
    }
    space.check_rows(a)?;
    let mut best: Option<(Rational, HostWitness)> = None;
    let mut rows: Vec<u32> = a.entries().map(|e| e.0).collect();
    rows.dedup();
    for row in rows {
        let coeffs = a.level(row);
        for level in [row as usize, row as usize + 1] {
            if level == 0 {
                continue;
            }
            let (value, term) = layer_norm(&space.fam, level, &coeffs)?;
            if best.as_ref().is_none_or(|(b, _)| value > *b) {
                best = Some((value, HostWitness { row, level, term }));
            }
        }
    }
    Ok(match best {
        Some((v, w)) => (v, Some(w)),
        None => (Rational::zero(), None),
    })
}

/// The two outer terms of the sandwich: `max_{ℓ≥1} ‖A^(ℓ)‖_ℓ` and
/// `Σ_ℓ ‖A^(ℓ)‖_{ℓ+1}`.
pub fn sandwich_bounds(space: &ModelSpace, a: &DoubleVector) -> Result<(Rational, Rational)> {
    space.check_rows(a)?;
    let mut lower = Rational::zero();
    let mut upper = Rational::zero();
    let mut rows: Vec<u32> = a.entries().map(|e| e.0).collect();
    rows.dedup();
    for row in rows {
        let coeffs = a.level(row);
        if row >= 1 {
            lower = lower.max(layer_norm(&space.fam, row as usize, &coeffs)?.0);
        }
        upper += layer_norm(&space.fam, row as usize + 1, &coeffs)?.0;
    }
    Ok((lower, upper))
}

fn pow2_inv(k: u64) -> Rational {
    Rational::new(1, num_bigint::BigInt::from(1u8) << k)
}

/// `T w^{ℓ+1}_j = 2^{-(ℓ+1)} w^ℓ_j`, `T w^0_j = 0`.
pub fn apply_t(a: &DoubleVector) -> DoubleVector {
    DoubleVector(SparseVector::from_pairs(
        a.entries().filter(|e| e.0 > 0).map(|(l, j, v)| ((l - 1, j), v * &pow2_inv(u64::from(l)))),
    ))
}

/// A polynomial `c_0 + c_1 t + … + c_d t^d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Polynomial {
    pub coeffs: Vec<Rational>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<Rational>) -> Self {
        Polynomial { coeffs }
    }

    pub fn constant_term(&self) -> Rational {
        self.coeffs.first().cloned().unwrap_or_else(Rational::zero)
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }
}

/// `T^i w^n_j = 2^{-(n + (n-1) + … + (n-i+1))} w^{n-i}_j` for `i ≤ n`, else 0.
pub fn power_factor(n: u32, i: u32) -> Option<Rational> {
    (i <= n).then(|| {
        let (n, i) = (u64::from(n), u64::from(i));
        pow2_inv(i * n - i * (i.saturating_sub(1)) / 2)
    })
}

/// `p(T) A` from the closed form for powers of `T`.
pub fn apply_poly(p: &Polynomial, a: &DoubleVector) -> DoubleVector {
    let mut pairs = Vec::new();
    for (l, j, v) in a.entries() {
        for (i, c) in p.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let Ok(i) = u32::try_from(i) else { break };
            if let Some(f) = power_factor(l, i) {
                pairs.push(((l - i, j), c * v * f));
            }
        }
    }
    DoubleVector(SparseVector::from_pairs(pairs))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NoncompactReport {
    /// `min_j ‖v_j‖`.
    pub c_min: Rational,
    /// `min_{i≠j} ‖v_i - v_j‖`.
    pub pairwise_min: Rational,
    /// Both minima are positive.
    pub separated: bool,
    pub note: String,
}

/// Images `v_j = (p(T) - λ) w^n_j`, `j = 1 … J`, and how far apart they are.
/// Positive separation of finitely many images is evidence, not a proof,
/// that `p(T) - λ` is not compact.
pub fn noncompact_certificate(space: &ModelSpace, p: &Polynomial, lambda: &Rational, n: u32, j_count: u64) -> Result<NoncompactReport> {
    if j_count < 2 {
        return Err(Error::invalid("need at least two images"));
    }
    let images: Vec<DoubleVector> = (1..=j_count)
        .map(|j| {
            let w = DoubleVector::generator(n, j)?;
            Ok(apply_poly(p, &w).sub(&w.scale(lambda)))
        })
        .collect::<Result<_>>()?;
    let norms: Vec<Rational> = images.iter().map(|v| Ok(host_norm(space, v)?.0)).collect::<Result<_>>()?;
    let c_min = norms.iter().min().cloned().expect("j_count ≥ 2");
    let pairs: Vec<(usize, usize)> = (0..images.len()).flat_map(|i| (i + 1..images.len()).map(move |k| (i, k))).collect();
    let gaps: Vec<Rational> =
        pairs.par_iter().map(|&(i, k)| Ok(host_norm(space, &images[i].sub(&images[k]))?.0)).collect::<Result<_>>()?;
    let pairwise_min = gaps.into_iter().min().expect("at least one pair");
    let separated = c_min.is_positive() && pairwise_min.is_positive();
    let note = if separated {
        format!("{j_count} images of level-{n} generators are pairwise separated by at least {pairwise_min}; finite evidence only")
    } else {
        "images are not separated: the operator kills or merges the sampled generators".to_string()
    };
    Ok(NoncompactReport { c_min, pairwise_min, separated, note })
}

/// For each `n`, generator vectors `w^(n)_1, w^(n)_2, …` in a host space that
/// are declared `κ`-equivalent to the `ℓ_1` basis.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kappa: Rational,
    pub families: Vec<Vec<SeqVector>>,
}

impl GeneratorSpec {
    /// Disjoint flat blocks of `block_len` unit vectors with mass 1, laid out
    /// as `w^(1)_1, w^(2)_1, …, w^(N)_1, w^(1)_2, …`.
    pub fn unit_blocks(families: usize, count: usize, block_len: u64) -> Self {
        let mut out = vec![Vec::with_capacity(count); families];
        let mut next = 1u64;
        let mass = Rational::new(1, block_len as i64);
        for _ in 0..count {
            for fam in out.iter_mut() {
                fam.push(SeqVector::from_pairs((next..next + block_len).map(|i| (i, mass.clone()))));
                next += block_len;
            }
        }
        GeneratorSpec { kappa: Rational::one(), families: out }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kappa > Rational::from(3u64) || !self.kappa.is_positive() {
            return Err(Error::invalid("declared equivalence constant must lie in (0, 3]"));
        }
        let mut seen = std::collections::BTreeSet::new();
        for (n, fam) in self.families.iter().enumerate() {
            for (j, w) in fam.iter().enumerate() {
                for (&i, _) in w.iter() {
                    if !seen.insert(i) {
                        return Err(Error::invalid(format!("generator ({}, {}) overlaps an earlier one at index {i}", n + 1, j + 1)));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KrivReport {
    pub y: Vec<SeqVector>,
    /// `‖y + Σ a_j y_j‖`.
    pub lhs: Rational,
    /// `(1/9) δ_n ‖a‖_{ℓ_1(𝓖_n)}` for each `n`.
    pub per_n: Vec<Rational>,
    pub bound: Rational,
    pub holds: bool,
}

/// Builds `y_j = Σ_n δ_n w^(n)_j` and checks
/// `sup_n (1/9) δ_n ‖a‖_{ℓ_1(𝓖_n)} ≤ ‖y + Σ a_j y_j‖` in the host norm, where
/// `𝓖_n` is the family of sets of size at most `M_n`. Host norms given as
/// enclosures are compared from below.
pub fn build_kriv_vectors(
    host: &dyn NormOracle,
    delta: &[Rational],
    m: &[u64],
    generators: &GeneratorSpec,
    a: &[Rational],
    outside: &SeqVector,
) -> Result<KrivReport> {
    generators.validate()?;
    if delta.len() != m.len() || delta.len() != generators.families.len() {
        return Err(Error::invalid("δ, M and the generator families must have the same length"));
    }
    if delta.iter().any(|d| !d.is_positive()) {
        return Err(Error::invalid("δ entries must be positive"));
    }
    let count = a.len();
    if generators.families.iter().any(|f| f.len() < count) {
        return Err(Error::invalid(format!("every family needs at least {count} generators")));
    }
    let used: std::collections::BTreeSet<u64> = generators.families.iter().flatten().flat_map(|w| w.iter().map(|(&i, _)| i)).collect();
    if outside.iter().any(|(i, _)| used.contains(i)) {
        return Err(Error::invalid("the outside vector must avoid the generators' supports"));
    }
    let y: Vec<SeqVector> = (0..count)
        .map(|j| {
            generators
                .families
                .iter()
                .zip(delta)
                .fold(SeqVector::zero(), |acc, (fam, d)| acc.add(&fam[j].scale(d)))
        })
        .collect();
    let total = y.iter().zip(a).fold(outside.clone(), |acc, (yj, aj)| acc.add(&yj.scale(aj)));
    let lhs = host.norm(&total)?.lo;
    let coeffs = SeqVector::from_coeffs_at(1, a);
    let ninth = Rational::new(1, 9);
    let per_n: Vec<Rational> = delta.iter().zip(m).map(|(d, &mn)| &ninth * d * ell1_family_norm(mn, &coeffs)).collect();
    let bound = Rational::max_of(&per_n);
    Ok(KrivReport { y, holds: bound <= lhs, lhs, per_n, bound })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FitReport {
    pub m: Vec<u64>,
    pub fitted: bool,
    /// `(sample index, oracle value, best bound)` for samples left uncovered.
    pub violations: Vec<(usize, Rational, Rational)>,
}

fn family_bound(delta: &[Rational], m: &[u64], a: &SeqVector) -> Rational {
    let terms: Vec<Rational> = delta.iter().zip(m).map(|(d, &mn)| d * ell1_family_norm(mn, a)).collect();
    Rational::max_of(&terms)
}

/// Checks `N(a) ≤ sup_n δ_n ‖a‖_{ℓ_1(𝓖_n)}` for a given `M` on every sample.
pub fn check_upper_family(oracle: &dyn NormOracle, samples: &[Vec<Rational>], delta: &[Rational], m: &[u64]) -> Result<Vec<(usize, Rational, Rational)>> {
    let mut out = Vec::new();
    for (idx, s) in samples.iter().enumerate() {
        let a = SeqVector::from_coeffs_at(1, s);
        let value = oracle.norm(&a)?.hi;
        let bound = family_bound(delta, m, &a);
        if value > bound {
            out.push((idx, value, bound));
        }
    }
    Ok(out)
}

/// Greedy search for increasing `M_1 < M_2 < …` (each at most `m_cap`)
/// making `N(a) ≤ sup_n δ_n ‖a‖_{ℓ_1(𝓖_n)}` on all samples. Each violated
/// sample is repaired by the cheapest single raise of one `M_n` (later
/// entries pushed up to stay increasing); samples no raise can repair are
/// reported.
pub fn fit_upper_family(oracle: &dyn NormOracle, samples: &[Vec<Rational>], delta: &[Rational], m_cap: u64) -> Result<FitReport> {
    if delta.is_empty() || delta.iter().any(|d| !d.is_positive()) {
        return Err(Error::invalid("need positive δ values"));
    }
    if m_cap < delta.len() as u64 {
        return Err(Error::invalid("cap too small for an increasing M"));
    }
    let mut m: Vec<u64> = (1..=delta.len() as u64).collect();
    let vectors: Vec<SeqVector> = samples.iter().map(|s| SeqVector::from_coeffs_at(1, s)).collect();
    let values: Vec<Rational> = vectors.iter().map(|a| Ok(oracle.norm(a)?.hi)).collect::<Result<_>>()?;
    let mut hopeless = vec![false; samples.len()];
    loop {
        let Some(idx) = (0..samples.len()).find(|&i| !hopeless[i] && values[i] > family_bound(delta, &m, &vectors[i])) else {
            break;
        };
        let mut best: Option<(u64, Vec<u64>)> = None;
        for n in 0..delta.len() {
            for target in m[n] + 1..=m_cap - (delta.len() - 1 - n) as u64 {
                let mut trial = m.clone();
                trial[n] = target;
                for k in n + 1..trial.len() {
                    trial[k] = trial[k].max(trial[k - 1] + 1);
                }
                if values[idx] <= family_bound(delta, &trial, &vectors[idx]) {
                    let cost: u64 = trial.iter().zip(&m).map(|(t, o)| t - o).sum();
                    if best.as_ref().is_none_or(|(c, _)| cost < *c) {
                        best = Some((cost, trial));
                    }
                    break;
                }
            }
        }
        match best {
            Some((_, trial)) => m = trial,
            None => hopeless[idx] = true,
        }
    }
    let violations: Vec<(usize, Rational, Rational)> = (0..samples.len())
        .filter(|&i| values[i] > family_bound(delta, &m, &vectors[i]))
        .map(|i| (i, values[i].clone(), family_bound(delta, &m, &vectors[i])))
        .collect();
    Ok(FitReport { fitted: violations.is_empty(), m, violations })
}
