//! Exact comparisons involving powers of three.
//!
//! Every logarithmic inequality is turned into an integer one:
//! `3^(p/q) ? a/b` with `q > 0` holds iff `3^p * b^q ? a^q` (or the mirrored
//! form when `p < 0`).

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub fn pow3(e: u32) -> BigUint {
    BigUint::from(3u32).pow(e)
}

/// Smallest `t` with `3^t >= n` (0 for `n <= 1`).
pub fn ceil_log3(n: &BigUint) -> u32 {
    if n <= &BigUint::one() {
        return 0;
    }
    // bits/log2(3) is a close lower estimate; walk up from just below it
    let mut t = ((n.bits() - 1) as f64 / 3f64.log2()).floor() as u32;
    t = t.saturating_sub(1);
    let mut p = pow3(t);
    while &p < n {
        p *= 3u32;
        t += 1;
    }
    t
}

/// `ceil(k * log3 n)` = smallest `t` with `3^t >= n^k`.
pub fn ceil_k_log3(n: u64, k: u32) -> u32 {
    ceil_log3(&BigUint::from(n).pow(k))
}

pub fn ceil_log3_u64(n: u64) -> u32 {
    ceil_log3(&BigUint::from(n))
}

/// Compares `3^exp` with `value` exactly; `value` must be positive.
pub fn cmp_pow3(exp: &BigRational, value: &BigRational) -> Ordering {
    assert!(value.is_positive(), "value must be positive");
    let q = exp.denom().to_u32().expect("exponent denominator fits u32");
    let p = exp.numer();
    let a = value.numer().magnitude().pow(q);
    let b = value.denom().magnitude().pow(q);
    let e = p.magnitude().to_u32().expect("exponent numerator fits u32");
    if p.is_negative() {
        // 3^(-e/q) ? a/b  <=>  b^q ? a^q 3^e
        b.cmp(&(a * pow3(e)))
    } else {
        (pow3(e) * b).cmp(&a)
    }
}

/// Compares `r` with `log3(x)` exactly, `x` positive.
pub fn cmp_with_log3(r: &BigRational, x: &BigRational) -> Ordering {
    cmp_pow3(r, x)
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `ceil(r)` for a rational.
pub fn ceil(r: &BigRational) -> BigInt {
    r.ceil().to_integer()
}

/// Floating approximation of `log3 x`, for display only.
pub fn log3_f64(x: f64) -> f64 {
    x.ln() / 3f64.ln()
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

/// Certified bracket `lo <= r - log3(x) < lo + 10^-digits`, returned as
/// the integer `floor((r - log3 x) * 10^digits)`.
pub fn floor_scaled_gap(r: &BigRational, x: &BigRational, digits: u32) -> BigInt {
    let scale = BigInt::from(10u32).pow(digits);
    let estimate = (to_f64(r) - log3_f64(to_f64(x))) * 10f64.powi(digits as i32);
    let mut n = BigInt::from(estimate.floor() as i64);
    // gap >= n/scale  <=>  r - n/scale >= log3 x  <=>  3^(r - n/scale) >= x
    let holds = |n: &BigInt| {
        let c = BigRational::new(n.clone(), scale.clone());
        cmp_pow3(&(r - c), x) != Ordering::Less
    };
    while !holds(&n) {
        n -= 1;
    }
    while holds(&(&n + 1)) {
        n += 1;
    }
    n
}

pub fn is_zero(r: &BigRational) -> bool {
    r.is_zero()
}
