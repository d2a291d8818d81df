//! Exact-arithmetic helpers.
//!
//! Real-valued user inputs (thresholds, probabilities, weights) are turned
//! into rationals through their shortest round-trip decimal form, so `0.1`
//! means exactly `1/10` rather than the binary value nearest to it. This is
//! what makes strict comparisons like `d_W < ε` land on the intended side at
//! ties.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// The rational whose decimal expansion is the shortest string that
/// round-trips `x`.
pub fn decimal_rational(x: f64) -> Result<BigRational> {
    if !x.is_finite() {
        return Err(Error::invalid("number", format!("{x} is not finite")));
    }
    if x == 0.0 {
        return Ok(BigRational::zero());
    }
    // `{:e}` is the shortest round-trip form, e.g. "3.5e-1"
    let s = format!("{x:e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent form");
    let exp: i64 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let mantissa = mantissa.trim_start_matches('-');
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits: BigInt = format!("{int_part}{frac_part}").parse().expect("decimal digits");
    let scale = exp - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let mut r = if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        r = -r;
    }
    Ok(r)
}

pub fn ratio(num: usize, den: usize) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // fall back to logs for huge numerators/denominators
        let sign = if r.is_negative() { -1.0 } else { 1.0 };
        let n = r.numer().abs().to_biguint().unwrap();
        let d = r.denom().abs().to_biguint().unwrap();
        sign * (ln_biguint(&n) - ln_biguint(&d)).exp()
    })
}

/// Natural log of a big unsigned integer; `-∞` for zero.
pub fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64-bit value");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Exact `n!`.
pub fn factorial(n: u64) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// Exact multinomial coefficient `(Σ parts)! / Π parts!`.
pub fn multinomial(parts: &[u64]) -> BigUint {
    // product of binomials, all intermediate values integral
    let mut total = 0u64;
    let mut acc = BigUint::one();
    for &p in parts {
        for j in 1..=p {
            total += 1;
            acc = acc * total / j;
        }
    }
    acc
}
