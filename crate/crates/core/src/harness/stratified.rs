//! Logical error rates at low `p` by stratifying on the number of faults.
//!
//! Every location fails independently with probability `p`, and a shot never
//! runs past the policy's round cap, so only the first `N = cap * L`
//! locations matter. Conditioned on exactly `k` of them failing, the failed
//! locations are a uniform `k`-subset, hence
//!
//! ```text
//! p_L(p) = sum_k Binom(k; N, p) * f_k
//! ```
//!
//! where `f_k` is the logical failure rate given `k` faults. Each `f_k` is
//! estimated once by sampling; the sum is then evaluated for any `p`. The
//! tail beyond the largest sampled stratum is bounded by the binomial tail
//! and added to the upper end of the interval.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extraction::{random_fault, FaultSource, FaultValue, LocationKind, NoiseModel};
use crate::harness::pseudothreshold::{RateCurve, RateEstimate};
use crate::harness::shot::ShotRunner;
use crate::harness::stats::Z95;
use crate::scalar::Scalar;

/// Exactly `k` failed locations among the first `horizon` of a shot.
pub struct KFaultSource<'r> {
    positions: Vec<usize>,
    cursor: usize,
    consumed: usize,
    round_start: usize,
    round_end: usize,
    noise: NoiseModel,
    rng: &'r mut ChaCha8Rng,
}

impl<'r> KFaultSource<'r> {
    pub fn new(horizon: usize, k: usize, noise: NoiseModel, rng: &'r mut ChaCha8Rng) -> Self {
        let mut positions = index::sample(rng, horizon, k).into_vec();
        positions.sort_unstable();
        Self {
            positions,
            cursor: 0,
            consumed: 0,
            round_start: 0,
            round_end: 0,
            noise,
            rng,
        }
    }
}

impl FaultSource for KFaultSource<'_> {
    fn begin_round(&mut self, _first: usize, len: usize) {
        self.round_start = self.consumed;
        self.round_end = self.consumed + len;
        self.consumed += len;
    }

    fn next_fault(&mut self) -> Option<usize> {
        let &g = self.positions.get(self.cursor)?;
        if g >= self.round_end {
            return None;
        }
        self.cursor += 1;
        Some(g - self.round_start)
    }

    fn fault_value(&mut self, kind: LocationKind) -> Option<FaultValue> {
        self.noise.enabled(kind).then(|| random_fault(kind, self.rng))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StratifiedPlan {
    /// Total shots over all strata.
    pub budget: u64,
    /// Share of the budget spent on the pilot pass.
    pub pilot_fraction: f64,
    /// Range of `p` the estimate should serve; drives allocation and the cutoff.
    pub p_low: f64,
    pub p_high: f64,
    /// Largest acceptable binomial tail mass beyond the last stratum at `p_high`.
    pub tail_tolerance: f64,
    pub seed: u64,
}

impl StratifiedPlan {
    pub fn new(budget: u64, p_low: f64, p_high: f64, seed: u64) -> Self {
        Self {
            budget,
            pilot_fraction: 0.1,
            p_low,
            p_high,
            tail_tolerance: 1e-12,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(0.0 < self.p_low && self.p_low <= self.p_high && self.p_high < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "stratified range [{}, {}] must satisfy 0 < low <= high < 1",
                self.p_low, self.p_high
            )));
        }
        if !(0.0..=1.0).contains(&self.pilot_fraction) || self.budget == 0 {
            return Err(Error::InvalidConfig("invalid stratified budget".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Stratum {
    pub k: usize,
    pub shots: u64,
    pub failures: u64,
    pub rounds_sum: u64,
}

impl Stratum {
    pub fn rate(&self) -> f64 {
        if self.shots == 0 {
            0.0
        } else {
            self.failures as f64 / self.shots as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StratifiedEstimate {
    /// Locations in the first `cap` rounds.
    pub horizon: usize,
    pub strata: Vec<Stratum>,
}

/// `ln C(n, k)` as a sum of logarithms.
pub fn ln_binomial<T: Scalar>(n: usize, k: usize) -> T {
    let k = k.min(n - k.min(n));
    (0..k).fold(T::zero(), |acc, i| acc + T::of_usize(n - i).ln() - T::of_usize(i + 1).ln())
}

/// `Binom(k; n, p)` evaluated in log space.
pub fn binomial_pmf<T: Scalar>(n: usize, k: usize, p: T) -> T {
    if k > n {
        return T::zero();
    }
    if p <= T::zero() {
        return if k == 0 { T::one() } else { T::zero() };
    }
    if p >= T::one() {
        return if k == n { T::one() } else { T::zero() };
    }
    let lp = ln_binomial::<T>(n, k) + T::of_usize(k) * p.ln() + T::of_usize(n - k) * (-p).ln_1p();
    lp.exp()
}

/// `P(Binom(n, p) > k)`.
pub fn binomial_tail<T: Scalar>(n: usize, k: usize, p: T) -> T {
    let head = (0..=k.min(n)).fold(T::zero(), |acc, j| acc + binomial_pmf(n, j, p));
    // summing the head loses precision for tiny tails; sum the tail directly then
    let tail = (k + 1..=n)
        .take(400)
        .fold(T::zero(), |acc, j| acc + binomial_pmf(n, j, p));
    if tail < T::of(1e-3) {
        tail
    } else {
        (T::one() - head).max(T::zero())
    }
}

fn stratum_seed(seed: u64, k: usize) -> u64 {
    // splitmix64 finalizer keeps strata streams unrelated
    let mut z = seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn sample_stratum(
    runner: &ShotRunner<'_>,
    noise: NoiseModel,
    horizon: usize,
    seed: u64,
    k: usize,
    shots: std::ops::Range<u64>,
) -> Result<Stratum> {
    let key = stratum_seed(seed, k);
    let (failures, rounds_sum, count) = shots
        .into_par_iter()
        .map(|shot| {
            let mut rng = ChaCha8Rng::seed_from_u64(key);
            rng.set_stream(shot);
            let mut source = KFaultSource::new(horizon, k, noise, &mut rng);
            runner.run(&mut source, None)
        })
        .try_fold(
            || (0u64, 0u64, 0u64),
            |(f, r, c), res| {
                let s = res?;
                Ok::<_, Error>((f + u64::from(s.logical_error), r + s.rounds as u64, c + 1))
            },
        )
        .try_reduce(|| (0, 0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1, a.2 + b.2)))?;
    Ok(Stratum {
        k,
        shots: count,
        failures,
        rounds_sum,
    })
}

/// Samples `f_k` for `k = 0..=k_max` under the plan's budget.
pub fn estimate_strata(runner: &ShotRunner<'_>, noise: NoiseModel, plan: &StratifiedPlan) -> Result<StratifiedEstimate> {
    plan.validate()?;
    if runner.two_stage() {
        return Err(Error::InvalidConfig(
            "stratified estimation needs full rounds; disable the two-stage refinement".into(),
        ));
    }
    let horizon = runner.round_cap() * runner.extractor().schedule().location_count();
    let mut k_max = 1;
    while k_max < horizon && binomial_tail(horizon, k_max, plan.p_high) > plan.tail_tolerance {
        k_max += 1;
    }

    // no faults: the shot is deterministic
    let mut strata = vec![sample_stratum(runner, noise, horizon, plan.seed, 0, 0..1)?];
    let pilot = ((plan.budget as f64 * plan.pilot_fraction) / k_max as f64).ceil().max(1.0) as u64;
    for k in 1..=k_max {
        strata.push(sample_stratum(runner, noise, horizon, plan.seed, k, 0..pilot)?);
    }
    let mut estimate = StratifiedEstimate { horizon, strata };

    // Neyman-style allocation for the worst relative error over the p range
    let remaining = plan.budget.saturating_sub(pilot * k_max as u64 + 1);
    if remaining > 0 {
        let grid: Vec<f64> = (0..=8)
            .map(|i| plan.p_low * (plan.p_high / plan.p_low).powf(i as f64 / 8.0))
            .collect();
        let totals: Vec<f64> = grid
            .iter()
            .map(|&p| estimate.central(p).max(f64::MIN_POSITIVE))
            .collect();
        let scores: Vec<f64> = (1..=k_max)
            .map(|k| {
                let s = &estimate.strata[k];
                // a stratum with no pilot failures keeps its pilot size
                if s.failures == 0 {
                    return 0.0;
                }
                let f = s.failures as f64 / s.shots as f64;
                let sd = (f * (1.0 - f)).sqrt();
                grid.iter()
                    .zip(&totals)
                    .map(|(&p, &tot)| binomial_pmf(horizon, k, p) * sd / tot)
                    .fold(0.0, f64::max)
            })
            .collect();
        let sum: f64 = scores.iter().sum();
        if sum > 0.0 {
            for (i, score) in scores.iter().enumerate() {
                let k = i + 1;
                let extra = (remaining as f64 * score / sum).floor() as u64;
                if extra > 0 {
                    let more = sample_stratum(runner, noise, horizon, plan.seed, k, pilot..pilot + extra)?;
                    let s = &mut estimate.strata[k];
                    s.shots += more.shots;
                    s.failures += more.failures;
                    s.rounds_sum += more.rounds_sum;
                }
            }
        }
    }
    Ok(estimate)
}

impl StratifiedEstimate {
    pub fn k_max(&self) -> usize {
        self.strata.len() - 1
    }

    pub fn total_shots(&self) -> u64 {
        self.strata.iter().map(|s| s.shots).sum()
    }

    pub fn central(&self, p: f64) -> f64 {
        self.strata
            .iter()
            .map(|s| binomial_pmf(self.horizon, s.k, p) * s.rate())
            .sum()
    }

    /// Estimate with a 95% interval: per-stratum Agresti-Coull variances
    /// combined by the stratum weights, plus the truncated tail on the high side.
    pub fn rate<T: Scalar>(&self, p: T) -> RateEstimate<T> {
        let z = T::of(Z95);
        let mut central = T::zero();
        let mut var = T::zero();
        for s in &self.strata {
            let w = binomial_pmf(self.horizon, s.k, p);
            central = central + w * T::of(s.rate());
            if s.k > 0 && s.shots > 0 {
                let n = T::of(s.shots as f64) + z * z;
                let f = (T::of(s.failures as f64) + z * z / T::of(2.0)) / n;
                var = var + w * w * f * (T::one() - f) / n;
            }
        }
        let tail = binomial_tail(self.horizon, self.k_max(), p);
        let half = z * var.sqrt();
        RateEstimate {
            p_l: central,
            low: (central - half).max(T::zero()),
            high: (central + half + tail).min(T::one()),
        }
    }

    /// Expected rounds per shot at rate `p`.
    pub fn avg_rounds(&self, p: f64) -> f64 {
        self.strata
            .iter()
            .filter(|s| s.shots > 0)
            .map(|s| binomial_pmf(self.horizon, s.k, p) * s.rounds_sum as f64 / s.shots as f64)
            .sum()
    }
}

impl<T: Scalar> RateCurve<T> for StratifiedEstimate {
    fn estimate(&self, p: T) -> Result<RateEstimate<T>> {
        Ok(self.rate(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pmf_sums_to_one() {
        let total: f64 = (0..=50).map(|k| binomial_pmf(50, k, 0.3)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((binomial_pmf::<f64>(10, 2, 0.5) - 45.0 / 1024.0).abs() < 1e-15);
    }

    #[test]
    fn tail_matches_direct_sum() {
        let direct: f64 = (4..=100).map(|k| binomial_pmf(100, k, 0.01)).sum();
        assert!((binomial_tail(100, 3, 0.01) - direct).abs() < 1e-15);
        assert!((binomial_tail::<f64>(10, 0, 0.5) - (1.0 - 1.0 / 1024.0)).abs() < 1e-12);
    }

    #[test]
    fn k_fault_source_places_every_fault() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut s = KFaultSource::new(30, 7, NoiseModel::depolarizing(0.0), &mut rng);
        let mut seen = Vec::new();
        for round in 0..3 {
            s.begin_round(0, 10);
            while let Some(pos) = s.next_fault() {
                seen.push(round * 10 + pos);
            }
        }
        assert_eq!(seen.len(), 7);
        assert!(seen.windows(2).all(|w| w[0] < w[1]));
    }
}
