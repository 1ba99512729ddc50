//! Binomial intervals, per-point aggregation and a log-log slope fit.

use serde::{Deserialize, Serialize};

use crate::decoders::StopReason;
use crate::error::{Error, Result};
use crate::harness::shot::ShotResult;
use crate::scalar::Scalar;

/// Two-sided 95% standard normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson<T: Scalar>(successes: u64, trials: u64, z: T) -> (T, T) {
    if trials == 0 {
        return (T::zero(), T::one());
    }
    let n = T::of(trials as f64);
    let phat = T::of(successes as f64) / n;
    let z2 = z * z;
    let two = T::of(2.0);
    let four = T::of(4.0);
    let denom = T::one() + z2 / n;
    let center = (phat + z2 / (two * n)) / denom;
    let half = z * (phat * (T::one() - phat) / n + z2 / (four * n * n)).sqrt() / denom;
    let low = (center - half).max(T::zero());
    let high = (center + half).min(T::one());
    // guard rounding so the point estimate always sits inside
    (low.min(phat), high.max(phat))
}

/// Aggregated shot outcomes; merging is associative and commutative.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub shots: u64,
    pub logical_errors: u64,
    pub rounds_sum: u64,
    pub max_rounds: usize,
    /// `rounds_histogram[k]` counts shots that used `k` rounds.
    pub rounds_histogram: Vec<u64>,
    pub stop_reasons: StopCounts,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopCounts {
    pub usable_run: u64,
    pub pair_count: u64,
    pub shor_repeat: u64,
    pub shor_cap: u64,
    pub weak_no_correction: u64,
}

impl StopCounts {
    fn bump(&mut self, r: StopReason) {
        match r {
            StopReason::UsableRun => self.usable_run += 1,
            StopReason::PairCount => self.pair_count += 1,
            StopReason::ShorRepeat => self.shor_repeat += 1,
            StopReason::ShorCap => self.shor_cap += 1,
            StopReason::WeakNoCorrection => self.weak_no_correction += 1,
        }
    }

    fn merge(&mut self, o: &StopCounts) {
        self.usable_run += o.usable_run;
        self.pair_count += o.pair_count;
        self.shor_repeat += o.shor_repeat;
        self.shor_cap += o.shor_cap;
        self.weak_no_correction += o.weak_no_correction;
    }
}

impl Tally {
    pub fn record(&mut self, shot: &ShotResult) {
        self.shots += 1;
        self.logical_errors += u64::from(shot.logical_error);
        self.rounds_sum += shot.rounds as u64;
        self.max_rounds = self.max_rounds.max(shot.rounds);
        if self.rounds_histogram.len() <= shot.rounds {
            self.rounds_histogram.resize(shot.rounds + 1, 0);
        }
        self.rounds_histogram[shot.rounds] += 1;
        self.stop_reasons.bump(shot.stopped_by);
    }

    pub fn merge(mut self, other: Tally) -> Tally {
        self.shots += other.shots;
        self.logical_errors += other.logical_errors;
        self.rounds_sum += other.rounds_sum;
        self.max_rounds = self.max_rounds.max(other.max_rounds);
        if self.rounds_histogram.len() < other.rounds_histogram.len() {
            self.rounds_histogram.resize(other.rounds_histogram.len(), 0);
        }
        for (a, b) in self.rounds_histogram.iter_mut().zip(&other.rounds_histogram) {
            *a += b;
        }
        self.stop_reasons.merge(&other.stop_reasons);
        self
    }

    pub fn avg_rounds(&self) -> f64 {
        if self.shots == 0 {
            0.0
        } else {
            self.rounds_sum as f64 / self.shots as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentStats {
    pub d: usize,
    pub decoder: String,
    pub p: f64,
    pub shots: u64,
    pub logical_errors: u64,
    pub p_l: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub avg_rounds: f64,
    pub max_rounds_seen: usize,
    pub rounds_histogram: Vec<u64>,
    pub stop_reasons: StopCounts,
}

impl ExperimentStats {
    pub const CSV_HEADER: [&'static str; 10] = [
        "d",
        "decoder",
        "p",
        "shots",
        "logical_errors",
        "p_l",
        "ci_low",
        "ci_high",
        "avg_rounds",
        "max_rounds_seen",
    ];

    pub fn from_tally(d: usize, decoder: &str, p: f64, tally: &Tally) -> Self {
        let (ci_low, ci_high) = wilson(tally.logical_errors, tally.shots, Z95);
        let p_l = if tally.shots == 0 {
            0.0
        } else {
            tally.logical_errors as f64 / tally.shots as f64
        };
        Self {
            d,
            decoder: decoder.to_string(),
            p,
            shots: tally.shots,
            logical_errors: tally.logical_errors,
            p_l,
            ci_low,
            ci_high,
            avg_rounds: tally.avg_rounds(),
            max_rounds_seen: tally.max_rounds,
            rounds_histogram: tally.rounds_histogram.clone(),
            stop_reasons: tally.stop_reasons.clone(),
        }
    }

    pub fn csv_record(&self) -> [String; 10] {
        [
            self.d.to_string(),
            self.decoder.clone(),
            format!("{:e}", self.p),
            self.shots.to_string(),
            self.logical_errors.to_string(),
            format!("{:e}", self.p_l),
            format!("{:e}", self.ci_low),
            format!("{:e}", self.ci_high),
            format!("{:.6}", self.avg_rounds),
            self.max_rounds_seen.to_string(),
        ]
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope<T: Scalar>(xs: &[T], ys: &[T]) -> Result<T> {
    if xs.len() != ys.len() {
        return Err(Error::SizeMismatch {
            expected: xs.len(),
            found: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::Domain("a slope needs at least two points".into()));
    }
    if xs.iter().chain(ys).any(|v| *v <= T::zero()) {
        return Err(Error::Domain("log-log fit needs positive values".into()));
    }
    let n = T::of_usize(xs.len());
    let lx: Vec<T> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<T> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().fold(T::zero(), |a, &b| a + b) / n;
    let my = ly.iter().fold(T::zero(), |a, &b| a + b) / n;
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for (&x, &y) in lx.iter().zip(&ly) {
        sxy = sxy + (x - mx) * (y - my);
        sxx = sxx + (x - mx) * (x - mx);
    }
    if sxx == T::zero() {
        return Err(Error::Domain("all x values coincide".into()));
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wilson_reference_values() {
        // 10 of 100: textbook Wilson interval (0.0552, 0.1744)
        let (lo, hi) = wilson(10, 100, Z95);
        assert!((lo - 0.05523).abs() < 1e-4, "{lo}");
        assert!((hi - 0.17437).abs() < 1e-4, "{hi}");
        let (lo, hi) = wilson(0, 1000, Z95);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.003827).abs() < 1e-5, "{hi}");
    }

    #[test]
    fn wilson_in_single_precision() {
        let (lo, hi) = wilson(10u64, 100u64, Z95 as f32);
        assert!((lo - 0.05523f32).abs() < 1e-3 && (hi - 0.17437f32).abs() < 1e-3);
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [1e-4, 2e-4, 3e-4];
        let ys: Vec<f64> = xs.iter().map(|x| 5.0 * x * x * x).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() - 3.0).abs() < 1e-9);
        assert!(loglog_slope(&[1.0], &[1.0]).is_err());
        assert!(loglog_slope(&[1.0, 2.0], &[0.0, 1.0]).is_err());
    }

    proptest! {
        #[test]
        fn wilson_brackets_the_estimate(k in 0u64..1000, extra in 0u64..1000) {
            let n = k + extra + 1;
            let (lo, hi) = wilson(k, n, Z95);
            let phat = k as f64 / n as f64;
            prop_assert!(lo <= phat && phat <= hi);
            prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        }

        #[test]
        fn tally_merge_is_order_independent(rounds in proptest::collection::vec((1usize..9, any::<bool>()), 0..40), split in 0usize..40) {
            let shots: Vec<ShotResult> = rounds
                .iter()
                .map(|&(r, e)| ShotResult { logical_error: e, rounds: r, stopped_by: StopReason::UsableRun })
                .collect();
            let split = split.min(shots.len());
            let mut a = Tally::default();
            let mut b = Tally::default();
            let mut all = Tally::default();
            for s in &shots[..split] { a.record(s); }
            for s in &shots[split..] { b.record(s); }
            for s in &shots { all.record(s); }
            let mut ab = a.clone().merge(b.clone());
            let mut ba = b.merge(a);
            // histograms may carry trailing zeros from the longer side
            for t in [&mut ab, &mut ba, &mut all] {
                while t.rounds_histogram.last() == Some(&0) { t.rounds_histogram.pop(); }
            }
            prop_assert_eq!(&ab, &all);
            prop_assert_eq!(&ba, &all);
        }
    }
}
