//! Exact-rational reference for the binomial upper tail.
//!
//! Every finite `f64` is a dyadic rational, so `p = a / 2^s` exactly and the
//! whole tail `Σ C(m,k)·a^k·(2^s − a)^(m−k) / 2^(s·m)` is an integer ratio.
//! This is slow and allocation-heavy; it exists to check the fast path.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::TailQuery;
use crate::error::{Result, StatsError};

/// Largest trial count the oracle accepts.
pub const ORACLE_MAX_TRIALS: u64 = 1000;

/// Splits a probability in `[0, 1]` into `(numerator, shift)` with
/// `p = numerator / 2^shift`.
fn dyadic(p: f64) -> (BigUint, u64) {
    if p == 0.0 {
        return (BigUint::zero(), 0);
    }
    let bits = p.to_bits();
    let exponent = ((bits >> 52) & 0x7ff) as i64;
    let fraction = bits & ((1u64 << 52) - 1);
    let (mantissa, exp2) = if exponent == 0 {
        (fraction, -1074)
    } else {
        (fraction | (1u64 << 52), exponent - 1075)
    };
    // p <= 1 means exp2 <= 0 for any normalized mantissa
    debug_assert!(exp2 <= 0);
    (BigUint::from(mantissa), (-exp2) as u64)
}

fn check(query: &TailQuery) -> Result<()> {
    if query.m() > ORACLE_MAX_TRIALS {
        return Err(StatsError::OracleScale {
            m: query.m(),
            limit: ORACLE_MAX_TRIALS,
        });
    }
    Ok(())
}

/// Exact value of `Σ_{k ∈ range} C(m,k) p^k q^(m−k)` as a rational.
fn exact_mass(m: u64, p: f64, range: std::ops::RangeInclusive<u64>) -> BigRational {
    let (a, shift) = dyadic(p);
    let scale = BigUint::one() << shift;
    let b = &scale - &a;

    // b_pows[j] = b^j
    let mut b_pows = Vec::with_capacity(m as usize + 1);
    b_pows.push(BigUint::one());
    for j in 1..=m as usize {
        let next = &b_pows[j - 1] * &b;
        b_pows.push(next);
    }

    // Binomial coefficients by explicit multiplication along the row.
    let mut coeff = BigUint::one();
    let mut a_pow = BigUint::one();
    let mut numerator = BigUint::zero();
    for k in 0..=m {
        if k > 0 {
            coeff = coeff * BigUint::from(m - k + 1) / BigUint::from(k);
            a_pow *= &a;
        }
        if k > *range.end() {
            break;
        }
        if range.contains(&k) {
            numerator += &coeff * &a_pow * &b_pows[(m - k) as usize];
        }
    }
    let denominator = BigUint::one() << (shift * m);
    BigRational::new(BigInt::from(numerator), BigInt::from(denominator))
}

/// Upper tail `P(X ≥ t)` as an exact rational.
pub fn upper_tail_rational(query: &TailQuery) -> Result<BigRational> {
    check(query)?;
    Ok(exact_mass(query.m(), query.p(), query.t()..=query.m()))
}

/// Upper tail `P(X ≥ t)` by exact summation, rounded to `f64` once at the end.
pub fn upper_tail_oracle(query: &TailQuery) -> Result<f64> {
    let exact = upper_tail_rational(query)?;
    Ok(exact.to_f64().unwrap_or(f64::NAN))
}

/// Lower mass `P(X ≤ t − 1)` by exact summation; zero when `t = 0`.
pub fn lower_mass_oracle(query: &TailQuery) -> Result<f64> {
    check(query)?;
    if query.t() == 0 {
        return Ok(0.0);
    }
    let exact = exact_mass(query.m(), query.p(), 0..=query.t() - 1);
    Ok(exact.to_f64().unwrap_or(f64::NAN))
}

/// Single pmf term `C(m,k) p^k q^(m−k)` as an exact rational.
pub fn pmf_rational(k: u64, m: u64, p: f64) -> Result<BigRational> {
    let query = TailQuery::new(k, m, p)?;
    check(&query)?;
    Ok(exact_mass(m, p, k..=k))
}
