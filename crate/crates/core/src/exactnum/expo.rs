//! Certified enclosures of `e^x` for rational `x`.
//!
//! The partial sum `S_M = sum_{k<=M} x^k/k!` is computed exactly. The tail is
//! bounded by `|x|^(M+1)/(M+1)! * 4^ceil(|x|)`, which dominates the Lagrange
//! remainder because `e^|x| <= 4^ceil(|x|)`. `M` grows until that bound is at
//! most `eps/4`, then the endpoints are rounded outward to a dyadic grid of
//! spacing at most `eps/8` so that downstream products stay small.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};

use super::{IntervalValue, NumError, Rational};

/// Largest `|x|` accepted; beyond this the series needs thousands of terms.
pub const MAX_ARGUMENT: u32 = 1024;

/// Returns `[lo, hi]` with `e^x` in it and `hi - lo <= eps`.
pub fn exp_enclosure(x: &Rational, eps: &Rational) -> Result<IntervalValue, NumError> {
    if eps <= &Rational::zero() {
        return Err(NumError::NonPositiveEpsilon(eps.to_string()));
    }
    if x.is_zero() {
        return Ok(IntervalValue::one());
    }

    let abs_x = x.abs();
    let ceil_abs = abs_x
        .ceil()
        .to_u32()
        .filter(|&c| c <= MAX_ARGUMENT)
        .ok_or_else(|| NumError::ArgumentTooLarge(x.to_string()))?;
    let growth = Rational::from(4).pow(ceil_abs);
    let quarter_eps = eps / Rational::from(4);

    let mut sum = Rational::one();
    let mut term = Rational::one();
    // |x|^(k+1) / (k+1)! for the current k
    let mut tail_term = abs_x.clone();
    let mut k: u64 = 0;
    loop {
        let remainder = &tail_term * &growth;
        if remainder <= quarter_eps {
            let lo = if x.is_negative() { &sum - &remainder } else { sum.clone() };
            let hi = &sum + &remainder;
            let bits = grid_bits(eps);
            return IntervalValue::new(lo, hi).map(|iv| iv.round_outward(bits));
        }
        k += 1;
        let k_rat = Rational::from(k as i64);
        term = &term * x / &k_rat;
        sum += &term;
        tail_term = &tail_term * &abs_x / Rational::from(k as i64 + 1);
    }
}

/// Smallest `b` with `2^-b <= eps/8`.
fn grid_bits(eps: &Rational) -> u32 {
    let target = Rational::from(8) / eps;
    let mut bits = 0u32;
    let mut scale = BigInt::one();
    while Rational::from_integer(scale.clone()) < target {
        scale <<= 1;
        bits += 1;
    }
    bits
}
