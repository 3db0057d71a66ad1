//! Closed-form sequence norms: `ℓ_p`, Lorentz `d(w,1)`, its Schreier version,
//! and the `ℓ_1(𝓖)` family norms with their layered suprema.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{desc, Rational};
use crate::roots::{self, Enclosure};
use crate::vector::SeqVector;

/// A non-increasing positive weight sequence with `w_1 = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WeightSeq {
    /// `w_n = 1/n`.
    Harmonic,
    /// Explicit prefix, continued by the tail rule.
    Explicit { values: Vec<Rational>, tail: WeightTail },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightTail {
    /// If the last explicit value is `v`, position `len + i` gets `1/(1/v + i)`.
    HarmonicFromLast,
}

impl WeightSeq {
    pub fn explicit(values: Vec<Rational>) -> Result<Self> {
        let w = WeightSeq::Explicit { values, tail: WeightTail::HarmonicFromLast };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if let WeightSeq::Explicit { values, .. } = self {
            if values.first() != Some(&Rational::one()) {
                return Err(Error::invalid("weights must start with w_1 = 1"));
            }
            if values.windows(2).any(|p| p[1] > p[0]) {
                return Err(Error::invalid("weights must be non-increasing"));
            }
            if values.iter().any(|v| !v.is_positive()) {
                return Err(Error::invalid("weights must be positive"));
            }
        }
        Ok(())
    }

    /// `w_n`, 1-based.
    pub fn weight(&self, n: usize) -> Rational {
        assert!(n >= 1, "weights are 1-indexed");
        match self {
            WeightSeq::Harmonic => Rational::unit_fraction(n as u64),
            WeightSeq::Explicit { values, tail } => {
                if n <= values.len() {
                    return values[n - 1].clone();
                }
                match tail {
                    WeightTail::HarmonicFromLast => {
                        let last = values.last().expect("validated nonempty");
                        let steps = Rational::from(n - values.len());
                        (last.recip() + steps).recip()
                    }
                }
            }
        }
    }

    /// `(w_1, …, w_m)`.
    pub fn prefix(&self, m: usize) -> Vec<Rational> {
        (1..=m).map(|n| self.weight(n)).collect()
    }
}

/// Exponent of an `ℓ_p` norm.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpExponent {
    Finite(Rational),
    Infinity,
}

impl std::str::FromStr for LpExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(LpExponent::Infinity),
            other => Ok(LpExponent::Finite(other.parse()?)),
        }
    }
}

impl std::fmt::Display for LpExponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LpExponent::Finite(p) => write!(f, "{p}"),
            LpExponent::Infinity => f.write_str("inf"),
        }
    }
}

impl Serialize for LpExponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for LpExponent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = serde_json::Value::deserialize(d)?;
        let text = match raw {
            serde_json::Value::String(s) => s,
            serde_json::Value::Number(n) if n.is_u64() => n.to_string(),
            other => return Err(serde::de::Error::custom(format!("bad exponent {other}"))),
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// `‖x‖_p`. Exact for `p ∈ {1, ∞}` and whenever the root is rational; otherwise a
/// certified enclosure no wider than `width`.
pub fn lp_norm(x: &SeqVector, p: &LpExponent, width: &Rational) -> Result<Enclosure> {
    match p {
        LpExponent::Infinity => Ok(Enclosure::exact(x.sup_norm())),
        LpExponent::Finite(p) => {
            if *p < Rational::one() {
                return Err(Error::invalid(format!("ℓ_p needs p ≥ 1, got {p}")));
            }
            if *p == Rational::one() {
                return Ok(Enclosure::exact(x.l1_norm()));
            }
            if x.is_zero() {
                return Ok(Enclosure::exact(Rational::zero()));
            }
            let inv = p.recip();
            if p.is_integer() {
                let k: i32 = p.numer().try_into().map_err(|_| Error::invalid("exponent too large"))?;
                let sum: Rational = x.values().map(|a| a.abs().pow(k)).sum();
                return roots::pow(&sum, &inv, width);
            }
            // Fractional p: enclose each |x_i|^p, then the outer root.
            let n = Rational::from(x.support_len() + 1);
            let mut inner_width = width / &n;
            loop {
                let mut sum = Enclosure::exact(Rational::zero());
                for a in x.values() {
                    sum = sum.add(&roots::pow(&a.abs(), p, &inner_width)?);
                }
                let out = roots::pow_enclosure(&sum, &inv, width)?;
                if &out.width() <= width {
                    return Ok(out);
                }
                inner_width = &inner_width / &Rational::from(16);
            }
        }
    }
}

/// `Σ_n w_n x*_n`.
pub fn lorentz_norm(w: &WeightSeq, x: &SeqVector) -> Rational {
    x.decreasing_rearrangement().iter().enumerate().map(|(n, v)| w.weight(n + 1) * v).sum()
}

/// How the Schreier–Lorentz supremum pairs weights with coordinates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchreierVariant {
    /// `sup` over admissible index sets `K` (`|K| ≤ min K`) of the `d(w,1)` norm of `x|_K`.
    #[default]
    SelectedCoordinates,
    /// `sup_{n ≤ k_1 < … < k_n} Σ w_i x*_{k_i}` with `x*` the rearrangement of all of `x`.
    WholeRearrangement,
}

/// The configuration attaining a Schreier–Lorentz supremum.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchreierWitness {
    pub n: u64,
    /// Chosen indices: coordinates of `x` for the selected-coordinates variant,
    /// ranks into `x*` for the whole-rearrangement variant.
    pub k: Vec<u64>,
}

impl SchreierWitness {
    /// Re-evaluates the configuration, checking admissibility.
    pub fn evaluate(&self, w: &WeightSeq, x: &SeqVector, variant: SchreierVariant) -> Result<Rational> {
        if self.k.len() as u64 > self.n || self.k.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::witness("index list must be increasing with at most n entries"));
        }
        if self.k.first().is_some_and(|&k1| k1 < self.n) {
            return Err(Error::witness("admissibility n ≤ k_1 fails"));
        }
        Ok(match variant {
            SchreierVariant::SelectedCoordinates => {
                let mut vals: Vec<Rational> = self.k.iter().map(|k| x.get(k).abs()).collect();
                vals.sort_by(desc);
                vals.iter().enumerate().map(|(i, v)| w.weight(i + 1) * v).sum()
            }
            SchreierVariant::WholeRearrangement => {
                let star = x.decreasing_rearrangement();
                self.k
                    .iter()
                    .enumerate()
                    .map(|(i, &k)| star.get(k as usize - 1).map_or_else(Rational::zero, |v| w.weight(i + 1) * v))
                    .sum()
            }
        })
    }
}

/// The Schreier–Lorentz norm with the configuration attaining it.
pub fn schreier_lorentz_norm(
    w: &WeightSeq,
    x: &SeqVector,
    variant: SchreierVariant,
) -> (Rational, SchreierWitness) {
    let mut best = (Rational::zero(), SchreierWitness { n: 1, k: Vec::new() });
    match variant {
        SchreierVariant::SelectedCoordinates => {
            // For n between consecutive support points the candidate set is fixed and
            // the admissible count only grows, so n = a support point suffices.
            let entries: Vec<(u64, Rational)> = x.iter().map(|(i, a)| (*i, a.abs())).collect();
            for (start, &(n, _)) in entries.iter().enumerate() {
                let mut tail: Vec<&(u64, Rational)> = entries[start..].iter().collect();
                tail.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
                tail.truncate(n as usize);
                let value: Rational = tail.iter().enumerate().map(|(i, (_, v))| w.weight(i + 1) * v).sum();
                if value > best.0 {
                    let mut k: Vec<u64> = tail.iter().map(|(i, _)| *i).collect();
                    k.sort_unstable();
                    best = (value, SchreierWitness { n, k });
                }
            }
        }
        SchreierVariant::WholeRearrangement => {
            // x* is non-increasing, so the best k for a given n is n, n+1, …, 2n−1.
            let star = x.decreasing_rearrangement();
            for n in 1..=star.len() {
                let value: Rational =
                    (0..n).filter_map(|i| star.get(n - 1 + i).map(|v| w.weight(i + 1) * v)).sum();
                if value > best.0 {
                    let k = (n..(2 * n).min(star.len() + 1)).map(|k| k as u64).collect();
                    best = (value, SchreierWitness { n: n as u64, k });
                }
            }
        }
    }
    best
}

/// Sum of the `m` largest `|a_i|`, with the indices used.
pub fn ell1_family_norm_with_set(m: u64, a: &SeqVector) -> (Rational, Vec<u64>) {
    let mut entries: Vec<(u64, Rational)> = a.iter().map(|(i, v)| (*i, v.abs())).collect();
    entries.sort_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0)));
    entries.truncate(m.min(usize::MAX as u64) as usize);
    let value = entries.iter().map(|(_, v)| v).sum();
    let mut set: Vec<u64> = entries.into_iter().map(|(i, _)| i).collect();
    set.sort_unstable();
    (value, set)
}

/// `sup { Σ_{i∈F} |a_i| : |F| ≤ m }`.
pub fn ell1_family_norm(m: u64, a: &SeqVector) -> Rational {
    ell1_family_norm_with_set(m, a).0
}

/// One level of a layered family: the norm `sup_i δ_i ‖a‖_{ℓ_1(𝓖_i)}` with
/// `𝓖_i = { F : |F| ≤ M_i }`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layer {
    pub delta: Vec<Rational>,
    #[serde(rename = "M")]
    pub m: Vec<u64>,
}

/// Per-level sequences `(δ^(ℓ)_i)`, `(M^(ℓ)_i)` for `ℓ = 1 … L`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayeredFamily {
    pub levels: Vec<Layer>,
}

impl LayeredFamily {
    pub fn new(levels: Vec<Layer>) -> Result<Self> {
        let fam = LayeredFamily { levels };
        fam.validate()?;
        Ok(fam)
    }

    pub fn validate(&self) -> Result<()> {
        for (idx, layer) in self.levels.iter().enumerate() {
            let level = idx + 1;
            if layer.delta.len() != layer.m.len() {
                return Err(Error::invalid(format!("level {level}: δ and M lengths differ")));
            }
            if layer.delta.is_empty() {
                return Err(Error::invalid(format!("level {level}: empty layer")));
            }
            if layer.delta.iter().any(|d| !d.is_positive()) {
                return Err(Error::invalid(format!("level {level}: δ entries must be positive")));
            }
            if layer.m.first() == Some(&0) || layer.m.windows(2).any(|p| p[0] >= p[1]) {
                return Err(Error::invalid(format!("level {level}: M must be strictly increasing positive integers")));
            }
        }
        Ok(())
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn layer(&self, level: usize) -> Result<&Layer> {
        if level == 0 || level > self.levels.len() {
            return Err(Error::invalid(format!("level {level} outside 1..={}", self.levels.len())));
        }
        Ok(&self.levels[level - 1])
    }
}

/// Which term of a layer norm attains the supremum.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerWitness {
    /// 1-based index into the level's `(δ_i, M_i)`.
    pub i: usize,
    pub set: Vec<u64>,
}

impl LayerWitness {
    pub fn evaluate(&self, fam: &LayeredFamily, level: usize, a: &SeqVector) -> Result<Rational> {
        let layer = fam.layer(level)?;
        if self.i == 0 || self.i > layer.delta.len() {
            return Err(Error::witness("term index out of range"));
        }
        if self.set.len() as u64 > layer.m[self.i - 1] {
            return Err(Error::witness("index set larger than M_i"));
        }
        let sum: Rational = self.set.iter().map(|j| a.get(j).abs()).sum();
        Ok(&layer.delta[self.i - 1] * &sum)
    }
}

/// `‖a‖_ℓ = max_i δ^(ℓ)_i ‖a‖_{ℓ_1(𝓖^ℓ_i)}`.
pub fn layer_norm(fam: &LayeredFamily, level: usize, a: &SeqVector) -> Result<(Rational, LayerWitness)> {
    let layer = fam.layer(level)?;
    let mut best: Option<(Rational, LayerWitness)> = None;
    for (idx, (delta, &m)) in layer.delta.iter().zip(&layer.m).enumerate() {
        let (sum, set) = ell1_family_norm_with_set(m, a);
        let value = delta * &sum;
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, LayerWitness { i: idx + 1, set }));
        }
    }
    Ok(best.expect("validated nonempty layer"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::vector::SparseVector;
    use proptest::prelude::*;

    fn ones(range: std::ops::RangeInclusive<u64>) -> SeqVector {
        SparseVector::from_pairs(range.map(|i| (i, Rational::one())))
    }

    fn seq(vals: &[i64]) -> SeqVector {
        SparseVector::from_pairs(vals.iter().enumerate().map(|(i, &a)| (i as u64 + 1, Rational::from(a))))
    }

    #[test]
    fn lp_examples() {
        let w = roots::default_width();
        let x = seq(&[1, -2, 3]);
        assert_eq!(lp_norm(&x, &LpExponent::Finite(q(1, 1)), &w).unwrap(), Enclosure::exact(q(6, 1)));
        assert_eq!(lp_norm(&x, &LpExponent::Infinity, &w).unwrap(), Enclosure::exact(q(3, 1)));
        assert_eq!(lp_norm(&seq(&[3, 4]), &LpExponent::Finite(q(2, 1)), &w).unwrap(), Enclosure::exact(q(5, 1)));
        assert!(lp_norm(&x, &LpExponent::Finite(q(1, 2)), &w).is_err());
    }

    #[test]
    fn lp_fractional_exponent_is_certified() {
        let w = roots::default_width();
        // ‖(1,1)‖_{3/2} = 2^(2/3).
        let e = lp_norm(&seq(&[1, 1]), &LpExponent::Finite(q(3, 2)), &w).unwrap();
        assert!(e.width() <= w);
        assert!(e.lo.pow(3) < q(4, 1) && e.hi.pow(3) > q(4, 1));
    }

    #[test]
    fn lorentz_examples() {
        let h = WeightSeq::Harmonic;
        assert_eq!(lorentz_norm(&h, &ones(1..=3)), q(11, 6));
        assert_eq!(lorentz_norm(&h, &ones(7..=7)), q(1, 1));
        assert_eq!(lorentz_norm(&h, &seq(&[2, 1])), q(5, 2));
    }

    #[test]
    fn explicit_weights_continue_harmonically() {
        let w = WeightSeq::explicit(vec![q(1, 1), q(1, 2), q(1, 2)]).unwrap();
        assert_eq!(w.prefix(5), vec![q(1, 1), q(1, 2), q(1, 2), q(1, 3), q(1, 4)]);
        assert!(WeightSeq::explicit(vec![q(1, 2)]).is_err());
        assert!(WeightSeq::explicit(vec![q(1, 1), q(1, 3), q(1, 2)]).is_err());
        let json = serde_json::to_string(&w).unwrap();
        assert_eq!(json, r#"{"kind":"explicit","values":["1","1/2","1/2"],"tail":"harmonic-from-last"}"#);
        assert_eq!(serde_json::from_str::<WeightSeq>(r#"{"kind":"harmonic"}"#).unwrap(), WeightSeq::Harmonic);
    }

    /// All admissible index sets with entries ≤ `horizon` (brute force).
    fn schreier_oracle(w: &WeightSeq, x: &SeqVector, variant: SchreierVariant, horizon: u64) -> Rational {
        let star = x.decreasing_rearrangement();
        let mut best = Rational::zero();
        for mask in 1u32..(1 << horizon) {
            let k: Vec<u64> = (1..=horizon).filter(|i| mask & (1 << (i - 1)) != 0).collect();
            let n = k.len() as u64;
            if k[0] < n {
                continue;
            }
            let value: Rational = match variant {
                SchreierVariant::SelectedCoordinates => {
                    let mut vals: Vec<Rational> = k.iter().map(|i| x.get(i).abs()).collect();
                    vals.sort_by(desc);
                    vals.iter().enumerate().map(|(i, v)| w.weight(i + 1) * v).sum()
                }
                SchreierVariant::WholeRearrangement => k
                    .iter()
                    .enumerate()
                    .map(|(i, &ki)| star.get(ki as usize - 1).map_or_else(Rational::zero, |v| w.weight(i + 1) * v))
                    .sum(),
            };
            if value > best {
                best = value;
            }
        }
        best
    }

    #[test]
    fn schreier_lorentz_examples() {
        let h = WeightSeq::Harmonic;
        for variant in [SchreierVariant::SelectedCoordinates, SchreierVariant::WholeRearrangement] {
            let (v, wit) = schreier_lorentz_norm(&h, &ones(1..=3), variant);
            assert_eq!(v, q(3, 2));
            assert_eq!(wit, SchreierWitness { n: 2, k: vec![2, 3] });
            assert_eq!(schreier_oracle(&h, &ones(1..=3), variant, 8), q(3, 2));

            let (v, wit) = schreier_lorentz_norm(&h, &ones(1..=6), variant);
            assert_eq!(v, q(11, 6));
            assert_eq!(wit, SchreierWitness { n: 3, k: vec![3, 4, 5] });
            assert_eq!(schreier_oracle(&h, &ones(1..=6), variant, 12), q(11, 6));

            assert_eq!(schreier_lorentz_norm(&h, &ones(9..=9), variant).0, q(1, 1));
        }
    }

    #[test]
    fn variants_differ_on_shifted_constant_vectors() {
        // Four ones far out: every selection is admissible for the coordinate
        // reading; the whole-rearrangement reading only reaches n = 2.
        let x = ones(10..=13);
        let h = WeightSeq::Harmonic;
        assert_eq!(schreier_lorentz_norm(&h, &x, SchreierVariant::SelectedCoordinates).0, q(25, 12));
        assert_eq!(schreier_lorentz_norm(&h, &x, SchreierVariant::WholeRearrangement).0, q(3, 2));
    }

    #[test]
    fn ell1_family_examples() {
        let a = seq(&[3, 1, 2]);
        assert_eq!(ell1_family_norm(2, &a), q(5, 1));
        assert_eq!(ell1_family_norm(0, &a), q(0, 1));
        assert_eq!(ell1_family_norm(10, &a), q(6, 1));
    }

    #[test]
    fn layer_norm_examples() {
        let fam = LayeredFamily::new(vec![Layer { delta: vec![q(1, 1), q(1, 2)], m: vec![1, 3] }]).unwrap();
        let (v, wit) = layer_norm(&fam, 1, &ones(1..=3)).unwrap();
        assert_eq!(v, q(3, 2));
        assert_eq!(wit.i, 2);
        assert_eq!(wit.evaluate(&fam, 1, &ones(1..=3)).unwrap(), v);
        assert_eq!(layer_norm(&fam, 1, &ones(4..=4)).unwrap().0, q(1, 1));
        assert_eq!(layer_norm(&fam, 1, &SeqVector::zero()).unwrap().0, q(0, 1));
        assert!(layer_norm(&fam, 2, &ones(1..=1)).is_err());
        assert!(layer_norm(&fam, 0, &ones(1..=1)).is_err());
    }

    #[test]
    fn family_validation() {
        assert!(LayeredFamily::new(vec![Layer { delta: vec![q(1, 1)], m: vec![2, 3] }]).is_err());
        assert!(LayeredFamily::new(vec![Layer { delta: vec![q(1, 1), q(1, 1)], m: vec![3, 3] }]).is_err());
        assert!(LayeredFamily::new(vec![Layer { delta: vec![q(0, 1)], m: vec![1] }]).is_err());
        let json = r#"{"levels":[{"delta":["1","1/2"],"M":[1,3]}]}"#;
        let fam: LayeredFamily = serde_json::from_str(json).unwrap();
        assert_eq!(serde_json::to_string(&fam).unwrap(), json);
    }

    fn arb_vec() -> impl Strategy<Value = SeqVector> {
        prop::collection::vec(-6i64..7, 0..9).prop_map(|v| seq(&v))
    }

    proptest! {
        #[test]
        fn sign_flips_and_permutations_do_not_matter(x in arb_vec(), seed in any::<u64>()) {
            let h = WeightSeq::Harmonic;
            let flipped = SparseVector::from_pairs(x.iter().map(|(i, a)| (*i, if (seed >> (i % 64)) & 1 == 1 { -a } else { a.clone() })));
            let reversed = SparseVector::from_pairs(x.iter().map(|(i, a)| (20 - i, a.clone())));
            prop_assert_eq!(lorentz_norm(&h, &x), lorentz_norm(&h, &flipped));
            prop_assert_eq!(lorentz_norm(&h, &x), lorentz_norm(&h, &reversed));
            prop_assert_eq!(ell1_family_norm(3, &x), ell1_family_norm(3, &reversed));
            for v in [SchreierVariant::SelectedCoordinates, SchreierVariant::WholeRearrangement] {
                prop_assert_eq!(schreier_lorentz_norm(&h, &x, v).0, schreier_lorentz_norm(&h, &flipped, v).0);
            }
        }

        #[test]
        fn schreier_below_lorentz_and_matches_oracle(x in arb_vec()) {
            let h = WeightSeq::Harmonic;
            for v in [SchreierVariant::SelectedCoordinates, SchreierVariant::WholeRearrangement] {
                let (value, wit) = schreier_lorentz_norm(&h, &x, v);
                prop_assert!(value <= lorentz_norm(&h, &x));
                prop_assert_eq!(wit.evaluate(&h, &x, v).unwrap(), value.clone());
                prop_assert_eq!(schreier_oracle(&h, &x, v, 12), value);
            }
        }

        #[test]
        fn layer_norm_is_monotone_in_delta_and_m(x in arb_vec(), bump in 0usize..2) {
            let base = LayeredFamily::new(vec![Layer { delta: vec![q(1, 2), q(1, 3)], m: vec![1, 4] }]).unwrap();
            let mut bigger = base.clone();
            bigger.levels[0].delta[bump] = &bigger.levels[0].delta[bump] + &q(1, 5);
            bigger.levels[0].m[1] += 2;
            prop_assert!(layer_norm(&base, 1, &x).unwrap().0 <= layer_norm(&bigger, 1, &x).unwrap().0);
        }
    }
}
