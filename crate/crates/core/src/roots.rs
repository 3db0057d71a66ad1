//! Certified rational enclosures for real values that are not always rational
//! (roots and fractional powers).

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// A closed interval `[lo, hi]` of rationals known to contain a real value.
/// `lo == hi` means the value is exactly that rational.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Enclosure {
    pub lo: Rational,
    pub hi: Rational,
}

impl Enclosure {
    pub fn exact(v: Rational) -> Self {
        Enclosure { lo: v.clone(), hi: v }
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn exact_value(&self) -> Option<&Rational> {
        self.is_exact().then_some(&self.lo)
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, v: &Rational) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    pub fn add(&self, other: &Enclosure) -> Enclosure {
        Enclosure { lo: &self.lo + &other.lo, hi: &self.hi + &other.hi }
    }

    pub fn scale(&self, c: &Rational) -> Enclosure {
        if c.is_negative() {
            Enclosure { lo: &self.hi * c, hi: &self.lo * c }
        } else {
            Enclosure { lo: &self.lo * c, hi: &self.hi * c }
        }
    }

    /// Enclosure of `max(a, b)`.
    pub fn max(&self, other: &Enclosure) -> Enclosure {
        Enclosure { lo: self.lo.clone().max(other.lo.clone()), hi: self.hi.clone().max(other.hi.clone()) }
    }

    /// Product of two enclosures of non-negative values.
    pub fn mul_nonneg(&self, other: &Enclosure) -> Enclosure {
        Enclosure { lo: &self.lo * &other.lo, hi: &self.hi * &other.hi }
    }

    /// `num / den` for non-negative `num` and strictly positive `den`.
    pub fn div_nonneg(num: &Enclosure, den: &Enclosure) -> Result<Enclosure> {
        if !den.lo.is_positive() {
            return Err(Error::invalid("division by an enclosure that may contain zero"));
        }
        Ok(Enclosure { lo: &num.lo / &den.hi, hi: &num.hi / &den.lo })
    }
}

/// Default certified width, `10^-12`.
pub fn default_width() -> Rational {
    Rational::ten_pow_neg(12)
}

fn exact_integer_root(n: &BigInt, k: u32) -> Option<BigInt> {
    let r = n.nth_root(k);
    (num_traits::pow(r.clone(), k as usize) == *n).then_some(r)
}

/// Enclosure of `x^(1/k)` for `x ≥ 0`, exact when the root is rational.
pub fn nth_root(x: &Rational, k: u32, width: &Rational) -> Result<Enclosure> {
    if x.is_negative() {
        return Err(Error::invalid("root of a negative number"));
    }
    if k == 0 {
        return Err(Error::invalid("zeroth root"));
    }
    if let (Some(p), Some(qd)) = (exact_integer_root(x.numer(), k), exact_integer_root(x.denom(), k)) {
        return Ok(Enclosure::exact(Rational::new(p, qd)));
    }
    let mut digits = 4u32;
    loop {
        let scale = num_traits::pow(BigInt::from(10), digits as usize);
        let scaled = x * &Rational::from_integer(num_traits::pow(scale.clone(), k as usize));
        let lo_int = scaled.floor().nth_root(k);
        let hi_int = scaled.ceil().nth_root(k) + BigInt::one();
        let enc = Enclosure { lo: Rational::new(lo_int, scale.clone()), hi: Rational::new(hi_int, scale) };
        if &enc.width() <= width {
            return Ok(enc);
        }
        digits += 4;
    }
}

fn split_exponent(p: &Rational) -> Result<(u32, u32)> {
    let a: u32 = p.numer().try_into().map_err(|_| Error::invalid(format!("exponent {p} out of range")))?;
    let b: u32 = p.denom().try_into().map_err(|_| Error::invalid(format!("exponent {p} out of range")))?;
    Ok((a, b))
}

/// Enclosure of `x^p` for `x ≥ 0` and rational `p > 0`.
pub fn pow(x: &Rational, p: &Rational, width: &Rational) -> Result<Enclosure> {
    if !p.is_positive() {
        return Err(Error::invalid("exponent must be positive"));
    }
    let (a, b) = split_exponent(p)?;
    nth_root(&x.pow(a as i32), b, width)
}

/// Enclosure of `s^p` where `s` is itself only known as an enclosure of a
/// non-negative value. Uses monotonicity of `t ↦ t^p`.
pub fn pow_enclosure(s: &Enclosure, p: &Rational, width: &Rational) -> Result<Enclosure> {
    let half = width / &Rational::from(2);
    let lo = pow(&s.lo, p, &half)?;
    let hi = pow(&s.hi, p, &half)?;
    Ok(Enclosure { lo: lo.lo, hi: hi.hi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn exact_roots_are_detected() {
        let r = nth_root(&q(9, 4), 2, &default_width()).unwrap();
        assert_eq!(r.exact_value(), Some(&q(3, 2)));
        let r = nth_root(&q(27, 8), 3, &default_width()).unwrap();
        assert_eq!(r.exact_value(), Some(&q(3, 2)));
    }

    #[test]
    fn irrational_roots_are_bracketed() {
        let w = default_width();
        let r = nth_root(&q(2, 1), 2, &w).unwrap();
        assert!(!r.is_exact());
        assert!(r.width() <= w);
        assert!(&r.lo * &r.lo < q(2, 1));
        assert!(&r.hi * &r.hi > q(2, 1));
    }

    #[test]
    fn fractional_power() {
        // 4^(3/2) = 8 exactly; 2^(3/2) irrational.
        assert_eq!(pow(&q(4, 1), &q(3, 2), &default_width()).unwrap().exact_value(), Some(&q(8, 1)));
        let e = pow(&q(2, 1), &q(3, 2), &default_width()).unwrap();
        assert!(e.lo.pow(2) < q(8, 1) && e.hi.pow(2) > q(8, 1));
    }
}
