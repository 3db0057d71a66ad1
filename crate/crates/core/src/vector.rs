//! Finitely supported vectors and finite index sets.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{desc, Rational};

/// A finitely supported map from an ordered index domain to rationals.
///
/// Zero entries are never stored, so the key set is exactly the support.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SparseVector<I: Ord> {
    entries: BTreeMap<I, Rational>,
}

/// Vectors over the positive integers.
pub type SeqVector = SparseVector<u64>;

impl<I: Ord + Clone> Default for SparseVector<I> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<I: Ord + Clone> SparseVector<I> {
    pub fn zero() -> Self {
        SparseVector { entries: BTreeMap::new() }
    }

    pub fn unit(index: I) -> Self {
        let mut v = Self::zero();
        v.set(index, Rational::one());
        v
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (I, Rational)>) -> Self {
        let mut v = Self::zero();
        for (i, a) in pairs {
            let sum = v.get(&i) + a;
            v.set(i, sum);
        }
        v
    }

    pub fn set(&mut self, index: I, value: Rational) {
        if value.is_zero() {
            self.entries.remove(&index);
        } else {
            self.entries.insert(index, value);
        }
    }

    pub fn get(&self, index: &I) -> Rational {
        self.entries.get(index).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn support(&self) -> FiniteSet<I> {
        FiniteSet { items: self.entries.keys().cloned().collect() }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&I, &Rational)> {
        self.entries.iter()
    }

    pub fn values(&self) -> impl Iterator<Item = &Rational> {
        self.entries.values()
    }

    pub fn max_index(&self) -> Option<&I> {
        self.entries.keys().next_back()
    }

    pub fn min_index(&self) -> Option<&I> {
        self.entries.keys().next()
    }

    /// `‖x‖_∞`.
    pub fn sup_norm(&self) -> Rational {
        self.entries.values().map(Rational::abs).max().unwrap_or_else(Rational::zero)
    }

    /// `‖x‖_1`.
    pub fn l1_norm(&self) -> Rational {
        self.entries.values().map(Rational::abs).sum()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        SparseVector { entries: self.entries.iter().map(|(i, a)| (i.clone(), a * c)).collect() }
    }

    pub fn abs(&self) -> Self {
        SparseVector { entries: self.entries.iter().map(|(i, a)| (i.clone(), a.abs())).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (i, a) in &other.entries {
            let sum = out.get(i) + a;
            out.set(i.clone(), sum);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&Rational::from(-1)))
    }

    pub fn map_indices<J: Ord + Clone>(&self, f: impl Fn(&I) -> J) -> SparseVector<J> {
        SparseVector::from_pairs(self.entries.iter().map(|(i, a)| (f(i), a.clone())))
    }

    /// Restriction `Ex`: agrees with `self` on `set`, zero elsewhere.
    pub fn restrict(&self, set: &FiniteSet<I>) -> Self {
        SparseVector {
            entries: self
                .entries
                .iter()
                .filter(|(i, _)| set.contains(i))
                .map(|(i, a)| (i.clone(), a.clone()))
                .collect(),
        }
    }

    /// Restriction to `{ i : pred(i) }`.
    pub fn restrict_by(&self, pred: impl Fn(&I) -> bool) -> Self {
        SparseVector {
            entries: self
                .entries
                .iter()
                .filter(|(i, _)| pred(i))
                .map(|(i, a)| (i.clone(), a.clone()))
                .collect(),
        }
    }

    /// `|x|` sorted non-increasingly, one entry per support point.
    pub fn decreasing_rearrangement(&self) -> Vec<Rational> {
        let mut v: Vec<Rational> = self.entries.values().map(Rational::abs).collect();
        v.sort_by(desc);
        v
    }
}

impl SeqVector {
    /// Builds `Σ coeffs[i] e_{first + i}`.
    pub fn from_coeffs_at(first: u64, coeffs: &[Rational]) -> Self {
        Self::from_pairs(coeffs.iter().enumerate().map(|(i, a)| (first + i as u64, a.clone())))
    }

    /// Checks that every index is a positive integer.
    pub fn validate_positive(&self) -> Result<()> {
        match self.min_index() {
            Some(0) => Err(Error::invalid("sequence indices start at 1")),
            _ => Ok(()),
        }
    }

    /// `[k, ∞) x`.
    pub fn tail_from(&self, k: u64) -> Self {
        SparseVector { entries: self.entries.range(k..).map(|(i, a)| (*i, a.clone())).collect() }
    }
}

#[derive(Serialize, Deserialize)]
struct SparseVectorJson<I> {
    entries: Vec<(I, Rational)>,
}

impl<I: Ord + Clone + Serialize> Serialize for SparseVector<I> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SparseVectorJson { entries: self.entries.iter().map(|(i, a)| (i.clone(), a.clone())).collect() }
            .serialize(serializer)
    }
}

impl<'de, I: Ord + Clone + Deserialize<'de>> Deserialize<'de> for SparseVector<I> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = SparseVectorJson::<I>::deserialize(deserializer)?;
        Ok(SparseVector::from_pairs(raw.entries))
    }
}

/// A finite set of indices kept sorted ascending without duplicates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FiniteSet<I: Ord> {
    items: Vec<I>,
}

impl<I: Ord + Clone> FiniteSet<I> {
    pub fn new(items: impl IntoIterator<Item = I>) -> Self {
        let mut items: Vec<I> = items.into_iter().collect();
        items.sort();
        items.dedup();
        FiniteSet { items }
    }

    pub fn empty() -> Self {
        FiniteSet { items: Vec::new() }
    }

    pub fn as_slice(&self) -> &[I] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, i: &I) -> bool {
        self.items.binary_search(i).is_ok()
    }

    pub fn min(&self) -> Option<&I> {
        self.items.first()
    }

    pub fn max(&self) -> Option<&I> {
        self.items.last()
    }

    pub fn intersection(&self, other: &Self) -> Self {
        FiniteSet { items: self.items.iter().filter(|i| other.contains(i)).cloned().collect() }
    }

    /// `self < other`: `max self < min other`. Empty sets are successive to everything.
    pub fn precedes(&self, other: &Self) -> bool {
        match (self.max(), other.min()) {
            (Some(a), Some(b)) => a < b,
            _ => true,
        }
    }
}

/// Parses a sequence vector from either the full JSON form `{"entries": [...]}`
/// or the bare list form `[[index, value], ...]`.
pub fn parse_seq_vector(text: &str) -> Result<SeqVector> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("vector JSON: {e}")))?;
    let v: SeqVector = match value {
        serde_json::Value::Array(_) => {
            let pairs: Vec<(u64, Rational)> =
                serde_json::from_value(value).map_err(|e| Error::Parse(format!("vector entries: {e}")))?;
            SparseVector::from_pairs(pairs)
        }
        _ => serde_json::from_value(value).map_err(|e| Error::Parse(format!("vector: {e}")))?,
    };
    v.validate_positive()?;
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use proptest::prelude::*;

    fn seq(pairs: &[(u64, i64)]) -> SeqVector {
        SparseVector::from_pairs(pairs.iter().map(|&(i, a)| (i, Rational::from(a))))
    }

    #[test]
    fn restrict_examples() {
        let x = seq(&[(1, 2), (5, 3)]);
        assert_eq!(x.restrict_by(|&i| i >= 3), seq(&[(5, 3)]));
        assert_eq!(x.tail_from(3), seq(&[(5, 3)]));
        assert!(x.restrict(&FiniteSet::empty()).is_zero());
        assert_eq!(seq(&[(1, 1), (2, 1)]).restrict(&FiniteSet::new([2])), seq(&[(2, 1)]));
    }

    #[test]
    fn rearrangement_examples() {
        let x = seq(&[(1, 1), (2, -2), (4, 3)]);
        assert_eq!(x.decreasing_rearrangement(), vec![q(3, 1), q(2, 1), q(1, 1)]);
        assert!(SeqVector::zero().decreasing_rearrangement().is_empty());
        assert_eq!(seq(&[(1, 1), (2, 1)]).decreasing_rearrangement(), vec![q(1, 1), q(1, 1)]);
    }

    #[test]
    fn zeros_are_not_stored() {
        let x = seq(&[(1, 0), (2, 5), (2, -5), (3, 1)]);
        assert_eq!(x.support_len(), 1);
        assert_eq!(x.support().as_slice(), &[3]);
    }

    #[test]
    fn json_forms() {
        let x = seq(&[(1, 1), (4, -2)]);
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, r#"{"entries":[[1,"1"],[4,"-2"]]}"#);
        assert_eq!(parse_seq_vector(&s).unwrap(), x);
        assert_eq!(parse_seq_vector(r#"[[1,1],[4,"-2"]]"#).unwrap(), x);
        assert!(parse_seq_vector("[[0,1]]").is_err());
        assert!(parse_seq_vector("[[1,").is_err());
    }

    #[test]
    fn successive_sets() {
        assert!(FiniteSet::new([1, 2]).precedes(&FiniteSet::new([3])));
        assert!(!FiniteSet::new([1, 3]).precedes(&FiniteSet::new([3])));
        assert!(FiniteSet::<u64>::empty().precedes(&FiniteSet::new([1])));
    }

    fn arb_vec() -> impl Strategy<Value = SeqVector> {
        prop::collection::vec((1u64..20, -5i64..6), 0..10)
            .prop_map(|pairs| SparseVector::from_pairs(pairs.into_iter().map(|(i, a)| (i, Rational::from(a)))))
    }

    fn arb_set() -> impl Strategy<Value = FiniteSet<u64>> {
        prop::collection::vec(1u64..20, 0..12).prop_map(FiniteSet::new)
    }

    proptest! {
        #[test]
        fn restrict_composes_as_intersection(x in arb_vec(), e in arb_set(), f in arb_set()) {
            prop_assert_eq!(x.restrict(&e).restrict(&f), x.restrict(&e.intersection(&f)));
        }

        #[test]
        fn rearrangement_ignores_signs_and_order(x in arb_vec(), shift in 0u64..7, flips in prop::collection::vec(any::<bool>(), 10)) {
            let n = 20u64;
            let moved = SparseVector::from_pairs(x.iter().enumerate().map(|(k, (i, a))| {
                let a = if flips[k % flips.len()] { -a } else { a.clone() };
                ((i + shift) % n + 1, a)
            }));
            // The index map is a bijection on 1..=20, so only order and signs change.
            prop_assert_eq!(x.decreasing_rearrangement(), moved.decreasing_rearrangement());
        }
    }
}
