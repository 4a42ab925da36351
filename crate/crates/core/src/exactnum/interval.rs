use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ArithOp, NumError, Rational};

/// Closed interval `[lo, hi]` with exact rational endpoints.
///
/// Every operation returns an enclosure of all real results over the input
/// intervals; since endpoints are exact there is no rounding to account for.
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
pub struct IntervalValue {
    lo: Rational,
    hi: Rational,
}

#[derive(Deserialize)]
struct RawInterval {
    lo: Rational,
    hi: Rational,
}

impl<'de> Deserialize<'de> for IntervalValue {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = RawInterval::deserialize(deserializer)?;
        IntervalValue::new(raw.lo, raw.hi).map_err(serde::de::Error::custom)
    }
}

impl IntervalValue {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self, NumError> {
        if lo > hi {
            return Err(NumError::InvertedInterval {
                lo: lo.to_string(),
                hi: hi.to_string(),
            });
        }
        Ok(IntervalValue { lo, hi })
    }

    pub fn point(x: Rational) -> Self {
        IntervalValue {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn zero() -> Self {
        Self::point(Rational::zero())
    }

    pub fn one() -> Self {
        Self::point(Rational::one())
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(&Rational::zero())
    }

    pub fn intersects(&self, other: &IntervalValue) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// True when the whole interval lies strictly inside `(lo, hi)`.
    pub fn strictly_inside(&self, lo: &Rational, hi: &Rational) -> bool {
        lo < &self.lo && &self.hi < hi
    }

    pub fn add(&self, rhs: &IntervalValue) -> IntervalValue {
        IntervalValue {
            lo: &self.lo + &rhs.lo,
            hi: &self.hi + &rhs.hi,
        }
    }

    pub fn sub(&self, rhs: &IntervalValue) -> IntervalValue {
        IntervalValue {
            lo: &self.lo - &rhs.hi,
            hi: &self.hi - &rhs.lo,
        }
    }

    pub fn neg(&self) -> IntervalValue {
        IntervalValue {
            lo: -&self.hi,
            hi: -&self.lo,
        }
    }

    pub fn mul(&self, rhs: &IntervalValue) -> IntervalValue {
        if self.is_point() && rhs.is_point() {
            return IntervalValue::point(&self.lo * &rhs.lo);
        }
        let products = [
            &self.lo * &rhs.lo,
            &self.lo * &rhs.hi,
            &self.hi * &rhs.lo,
            &self.hi * &rhs.hi,
        ];
        let lo = products.iter().min().cloned().unwrap_or_default();
        let hi = products.iter().max().cloned().unwrap_or_default();
        IntervalValue { lo, hi }
    }

    pub fn div(&self, rhs: &IntervalValue) -> Result<IntervalValue, NumError> {
        if rhs.contains_zero() {
            return Err(NumError::DivisorContainsZero);
        }
        // 0 is outside rhs, so both endpoints share a sign and are nonzero.
        let inv = IntervalValue {
            lo: rhs.hi.recip()?,
            hi: rhs.lo.recip()?,
        };
        Ok(self.mul(&inv))
    }

    pub fn apply(&self, op: ArithOp, rhs: &IntervalValue) -> Result<IntervalValue, NumError> {
        match op {
            ArithOp::Add => Ok(self.add(rhs)),
            ArithOp::Sub => Ok(self.sub(rhs)),
            ArithOp::Mul => Ok(self.mul(rhs)),
            ArithOp::Div => self.div(rhs),
        }
    }

    /// Widens both endpoints outward to multiples of `2^-bits`.
    pub fn round_outward(&self, bits: u32) -> IntervalValue {
        IntervalValue {
            lo: self.lo.floor_dyadic(bits),
            hi: self.hi.ceil_dyadic(bits),
        }
    }
}

impl fmt::Debug for IntervalValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl fmt::Display for IntervalValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;

    fn iv(lo: &str, hi: &str) -> IntervalValue {
        IntervalValue::new(rat(lo), rat(hi)).unwrap()
    }

    #[test]
    fn textbook_operations() {
        assert_eq!(iv("1", "2").add(&iv("3", "4")), iv("4", "6"));
        assert_eq!(iv("-1", "1").mul(&iv("-1", "1")), iv("-1", "1"));
        assert_eq!(iv("2", "3").div(&iv("1", "2")).unwrap(), iv("1", "3"));
        assert_eq!(iv("1", "2").sub(&iv("3", "5")), iv("-4", "-1"));
    }

    #[test]
    fn division_by_zero_straddling_interval() {
        assert_eq!(
            iv("1", "2").apply(ArithOp::Div, &iv("-1", "1")),
            Err(NumError::DivisorContainsZero)
        );
        assert!(iv("1", "2").div(&iv("0", "1")).is_err());
        assert!(iv("1", "2").div(&IntervalValue::zero()).is_err());
        assert!(iv("1", "2").div(&iv("-3", "-1/2")).is_ok());
    }

    #[test]
    fn zero_membership() {
        assert!(iv("0", "0").contains_zero());
        assert!(iv("-1", "0").contains_zero());
        assert!(iv("0", "3").contains_zero());
        assert!(!iv("1/100", "3").contains_zero());
        assert!(!iv("-3", "-1/100").contains_zero());
    }

    #[test]
    fn inverted_endpoints_rejected() {
        assert!(IntervalValue::new(rat("2"), rat("1")).is_err());
        assert!(serde_json::from_str::<IntervalValue>(r#"{"lo":"2","hi":"1"}"#).is_err());
    }

    #[test]
    fn serde_shape() {
        let s = serde_json::to_string(&iv("1/2", "3")).unwrap();
        assert_eq!(s, r#"{"lo":"1/2","hi":"3"}"#);
    }
}
