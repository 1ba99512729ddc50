//! Threshold lower bounds from counting malignant fault sets.
//!
//! With `L` locations per round and `r` rounds in the worst case, a cycle
//! fails only if more than `t` of its `rL` locations fail, giving
//! `p_L <= C(rL, t+1) p^(t+1)` and the bound `p_T >= C(rL, t+1)^(-1/t)`.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::stratified::ln_binomial;
use crate::scalar::Scalar;

fn check_domain(l: usize, t: usize, r: usize) -> Result<usize> {
    if t < 1 {
        return Err(Error::Domain("the bound needs t >= 1".into()));
    }
    let n = l
        .checked_mul(r)
        .ok_or_else(|| Error::Domain(format!("r * L overflows for r={r}, L={l}")))?;
    if n < t + 1 {
        return Err(Error::Domain(format!("r * L = {n} is below t + 1 = {}", t + 1)));
    }
    Ok(n)
}

/// `C(rL, t+1)^(-1/t)`.
pub fn threshold_lower_bound<T: Scalar>(l: usize, t: usize, r: usize) -> Result<T> {
    let n = check_domain(l, t, r)?;
    Ok((-ln_binomial::<T>(n, t + 1) / T::of_usize(t)).exp())
}

/// `p_T(r2) / p_T(r1)` for the same `L` and `t`.
pub fn improvement_ratio<T: Scalar>(l: usize, t: usize, r1: usize, r2: usize) -> Result<T> {
    Ok(threshold_lower_bound::<T>(l, t, r2)? / threshold_lower_bound::<T>(l, t, r1)?)
}

fn binomial_exact(n: usize, k: usize) -> BigUint {
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// `C(r1 L, t+1) / C(r2 L, t+1)` in exact arithmetic.
pub fn exact_binomial_ratio(l: usize, t: usize, r1: usize, r2: usize) -> Result<BigRational> {
    let n1 = check_domain(l, t, r1)?;
    let n2 = check_domain(l, t, r2)?;
    Ok(BigRational::new(
        binomial_exact(n1, t + 1).into(),
        binomial_exact(n2, t + 1).into(),
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioCheck {
    pub l: usize,
    pub t: usize,
    pub r1: usize,
    pub r2: usize,
    /// `p_T(r2) / p_T(r1)` from floating point.
    pub ratio: f64,
    /// The same ratio from the exact binomial quotient.
    pub exact_ratio: f64,
    /// `(r1/r2)^(1 + 1/t)`.
    pub floor: f64,
    /// `C(r1 L, t+1) r2^(t+1) >= C(r2 L, t+1) r1^(t+1)` in exact integers.
    pub exact_holds: bool,
}

/// Checks `p_T(r2) / p_T(r1) >= (r1/r2)^(1 + 1/t)` for `r1 >= r2`.
pub fn check_improvement(l: usize, t: usize, r1: usize, r2: usize) -> Result<RatioCheck> {
    if r1 < r2 || r2 == 0 {
        return Err(Error::Domain(format!("need r1 >= r2 >= 1, got {r1}, {r2}")));
    }
    let q = exact_binomial_ratio(l, t, r1, r2)?;
    let bound = BigRational::new(BigUint::from(r1).pow(t as u32 + 1).into(), BigUint::from(r2).pow(t as u32 + 1).into());
    let exact_holds = q >= bound;
    let exact_ratio = q
        .to_f64()
        .ok_or_else(|| Error::Domain("exact ratio does not fit a float".into()))?
        .powf(1.0 / t as f64);
    Ok(RatioCheck {
        l,
        t,
        r1,
        r2,
        ratio: improvement_ratio(l, t, r1, r2)?,
        exact_ratio,
        floor: (r1 as f64 / r2 as f64).powf(1.0 + 1.0 / t as f64),
        exact_holds,
    })
}
