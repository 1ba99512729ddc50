//! Pseudothreshold: the rate where `p_L(p)` crosses the unencoded rate `2p/3`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::runner::Experiment;
use crate::scalar::Scalar;

/// A logical error rate with a 95% interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate<T> {
    pub p_l: T,
    pub low: T,
    pub high: T,
}

/// Anything that yields `p_L` at a physical rate.
pub trait RateCurve<T: Scalar> {
    fn estimate(&self, p: T) -> Result<RateEstimate<T>>;
}

/// Fresh direct Monte Carlo at every queried rate.
pub struct DirectCurve<'e> {
    pub experiment: &'e Experiment,
}

impl RateCurve<f64> for DirectCurve<'_> {
    fn estimate(&self, p: f64) -> Result<RateEstimate<f64>> {
        let s = self.experiment.run_point(p)?;
        Ok(RateEstimate {
            p_l: s.p_l,
            low: s.ci_low,
            high: s.ci_high,
        })
    }
}

/// Wraps a closure; exact curves have `low == high == p_l`.
pub struct FnCurve<F>(pub F);

impl<T: Scalar, F: Fn(T) -> RateEstimate<T>> RateCurve<T> for FnCurve<F> {
    fn estimate(&self, p: T) -> Result<RateEstimate<T>> {
        Ok((self.0)(p))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pseudothreshold<T> {
    pub p_th: T,
    /// Crossing of the upper rate curve, a lower end for `p_th`.
    pub low: T,
    /// Crossing of the lower rate curve, an upper end for `p_th`.
    pub high: T,
    /// Every `(p, p_L)` queried, in order.
    pub samples: Vec<(T, T)>,
}

#[derive(Clone, Copy)]
enum Branch {
    Central,
    Low,
    High,
}

impl Branch {
    fn pick<T: Copy>(self, e: &RateEstimate<T>) -> T {
        match self {
            Branch::Central => e.p_l,
            Branch::Low => e.low,
            Branch::High => e.high,
        }
    }
}

/// Log-space bisection on `p_L(p) - 2p/3` inside `[p_low, p_high]`.
///
/// The central curve must change sign over the bracket. The interval ends
/// fall back to the bracket edges when their curves do not.
pub fn estimate_pseudothreshold<T: Scalar, C: RateCurve<T> + ?Sized>(
    curve: &C,
    p_low: T,
    p_high: T,
    iterations: usize,
) -> Result<Pseudothreshold<T>> {
    if !(p_low > T::zero() && p_low < p_high) {
        return Err(Error::Domain(format!("bad bracket [{p_low}, {p_high}]")));
    }
    let mut samples = Vec::new();
    let mut query = |p: T| -> Result<RateEstimate<T>> {
        let e = curve.estimate(p)?;
        samples.push((p, e.p_l));
        Ok(e)
    };
    let lo_e = query(p_low)?;
    let hi_e = query(p_high)?;
    let gap = |p: T, v: T| v - T::of(2.0 / 3.0) * p;

    let mut ends = [T::zero(); 3];
    for (slot, branch) in [Branch::Central, Branch::Low, Branch::High].into_iter().enumerate() {
        let g_lo = gap(p_low, branch.pick(&lo_e));
        let g_hi = gap(p_high, branch.pick(&hi_e));
        if (g_lo < T::zero()) == (g_hi < T::zero()) {
            match branch {
                Branch::Central => {
                    let curve = samples
                        .iter()
                        .map(|(p, v)| format!("p={:e} p_L={:e}", p.as_f64(), v.as_f64()))
                        .collect::<Vec<_>>()
                        .join(", ");
                    return Err(Error::NoSignChange {
                        low: p_low.as_f64(),
                        high: p_high.as_f64(),
                        curve,
                    });
                }
                _ => ends[slot] = if g_lo >= T::zero() { p_low } else { p_high },
            }
            continue;
        }
        let (mut a, mut b) = (p_low.ln(), p_high.ln());
        let lo_negative = g_lo < T::zero();
        for _ in 0..iterations {
            let mid = (a + b) / T::of(2.0);
            let p = mid.exp();
            let g = gap(p, branch.pick(&query(p)?));
            if (g < T::zero()) == lo_negative {
                a = mid;
            } else {
                b = mid;
            }
        }
        ends[slot] = ((a + b) / T::of(2.0)).exp();
    }
    Ok(Pseudothreshold {
        p_th: ends[0],
        low: ends[2].min(ends[0]),
        high: ends[1].max(ends[0]),
        samples,
    })
}
