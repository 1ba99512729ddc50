//! Brute-force oracles for zero-run usability and exhaustive checks of the
//! closed-form round bounds.
//!
//! Fault model: within a history of `m` rounds each round carries at most one
//! effective fault. A Type I fault in round `i` makes round `i` differ from
//! both neighbours, a Type II fault only from the next round. Where two or
//! more faults touch the same difference bit the adversary picks the bit.

use serde::{Deserialize, Serialize};

use crate::decoders::{evaluate, worst_case_rounds, Action, DecoderKind, S1Branch};
use crate::diffvec::{decompose, find_usable, DifferenceVector, ZeroSubstring};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FaultEvent {
    TypeI(usize),
    TypeII(usize),
}

impl FaultEvent {
    pub fn round(self) -> usize {
        match self {
            FaultEvent::TypeI(i) | FaultEvent::TypeII(i) => i,
        }
    }

    /// 1-based difference positions this fault sets in an `m`-round history.
    pub fn contributions(self, m: usize) -> Vec<usize> {
        match self {
            FaultEvent::TypeI(i) => [i.checked_sub(1), Some(i)]
                .into_iter()
                .flatten()
                .filter(|&p| p >= 1 && p < m)
                .collect(),
            FaultEvent::TypeII(i) if i < m => vec![i],
            FaultEvent::TypeII(_) => vec![],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultCombination {
    pub faults: Vec<FaultEvent>,
    /// Positions touched by two or more faults, with the bit they resolved to.
    pub cancellation_choices: Vec<(usize, bool)>,
}

impl FaultCombination {
    /// Per-position contribution counts, index 0 is position 1.
    pub fn counts(&self, m: usize) -> Vec<usize> {
        let mut c = vec![0; m.saturating_sub(1)];
        for f in &self.faults {
            for p in f.contributions(m) {
                c[p - 1] += 1;
            }
        }
        c
    }
}

/// Limits on the exhaustive search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Regime {
    pub max_len: usize,
    pub max_t: usize,
}

impl Default for Regime {
    fn default() -> Self {
        Self { max_len: 12, max_t: 3 }
    }
}

impl Regime {
    fn check(&self, len: usize, t: usize) -> Result<()> {
        if len > self.max_len {
            return Err(Error::SearchBoundExceeded {
                what: "difference vector length",
                value: len,
                limit: self.max_len,
            });
        }
        if t > self.max_t {
            return Err(Error::SearchBoundExceeded {
                what: "fault budget",
                value: t,
                limit: self.max_t,
            });
        }
        Ok(())
    }
}

/// Every set of at most `t` faults (one per round) that can produce `delta`.
pub fn consistent_combinations(delta: &DifferenceVector, t: usize, regime: &Regime) -> Result<Vec<FaultCombination>> {
    regime.check(delta.len(), t)?;
    let m = delta.len() + 1;
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    let mut counts = vec![0usize; delta.len()];
    extend(delta.bits(), m, t, 1, &mut chosen, &mut counts, &mut out);
    Ok(out)
}

fn extend(
    delta: &[bool],
    m: usize,
    budget: usize,
    next_round: usize,
    chosen: &mut Vec<FaultEvent>,
    counts: &mut [usize],
    out: &mut Vec<FaultCombination>,
) {
    let consistent = counts.iter().zip(delta).all(|(&c, &b)| match c {
        0 => !b,
        1 => b,
        _ => true,
    });
    if consistent {
        out.push(FaultCombination {
            faults: chosen.clone(),
            cancellation_choices: counts
                .iter()
                .enumerate()
                .filter(|(_, &c)| c >= 2)
                .map(|(i, _)| (i + 1, delta[i]))
                .collect(),
        });
    }
    if chosen.len() == budget {
        return;
    }
    for round in next_round..=m {
        for f in [FaultEvent::TypeI(round), FaultEvent::TypeII(round)] {
            let touched = f.contributions(m);
            for &p in &touched {
                counts[p - 1] += 1;
            }
            chosen.push(f);
            extend(delta, m, budget, round + 1, chosen, counts, out);
            chosen.pop();
            for &p in &touched {
                counts[p - 1] -= 1;
            }
        }
    }
}

/// A run is usable when every consistent fault set leaves some position of
/// the run untouched.
pub fn oracle_usable(delta: &DifferenceVector, t: usize, run: &ZeroSubstring, regime: &Regime) -> Result<bool> {
    let m = delta.len() + 1;
    let combos = consistent_combinations(delta, t, regime)?;
    Ok(combos.iter().all(|c| {
        let counts = c.counts(m);
        (run.start..=run.end).any(|p| counts[p - 1] == 0)
    }))
}

/// Runs the oracle declares usable.
pub fn oracle_usable_runs(delta: &DifferenceVector, t: usize, regime: &Regime) -> Result<Vec<ZeroSubstring>> {
    let m = delta.len() + 1;
    let combos = consistent_combinations(delta, t, regime)?;
    let all_counts: Vec<Vec<usize>> = combos.iter().map(|c| c.counts(m)).collect();
    Ok(decompose(delta)
        .into_iter()
        .filter(|run| {
            all_counts
                .iter()
                .all(|counts| (run.start..=run.end).any(|p| counts[p - 1] == 0))
        })
        .collect())
}

/// A difference vector on which the two usability tests disagree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleMismatch {
    pub delta: String,
    pub t: usize,
    pub algorithm: Vec<(usize, usize)>,
    pub oracle: Vec<(usize, usize)>,
}

/// Compares `find_usable` with the oracle on every vector up to `max_len`
/// bits and every budget `1..=t_max`.
pub fn oracle_sweep(max_len: usize, t_max: usize, regime: &Regime) -> Result<(usize, Vec<OracleMismatch>)> {
    let mut checked = 0;
    let mut mismatches = Vec::new();
    for len in 0..=max_len {
        for v in 0..(1u64 << len) {
            let delta = DifferenceVector::from_u64(len, v);
            for t in 1..=t_max {
                let fast = find_usable(t, &delta);
                let slow = oracle_usable_runs(&delta, t, regime)?;
                checked += 1;
                if fast != slow {
                    let span = |rs: &[ZeroSubstring]| rs.iter().map(|r| (r.start, r.end)).collect();
                    mismatches.push(OracleMismatch {
                        delta: delta.to_string(),
                        t,
                        algorithm: span(&fast),
                        oracle: span(&slow),
                    });
                }
            }
        }
    }
    Ok((checked, mismatches))
}

pub const MAX_SEARCH_T: usize = 5;

fn not_stopped(kind: DecoderKind, t: usize, s1_zero: bool, delta: &DifferenceVector) -> bool {
    evaluate(kind, t, s1_zero, delta).0 == Action::Continue
}

/// Longest difference vector whose every prefix leaves the policy running.
/// `None` when the policy always stops after the first round.
pub fn max_unusable_length(kind: DecoderKind, t: usize, branch: S1Branch) -> Result<Option<usize>> {
    if t > MAX_SEARCH_T {
        return Err(Error::SearchBoundExceeded {
            what: "fault budget",
            value: t,
            limit: MAX_SEARCH_T,
        });
    }
    let s1_zero = branch == S1Branch::Zero;
    if kind == DecoderKind::Shor {
        // no repeats ever: the all-ones stream runs until the round cap
        let mut delta = DifferenceVector::new();
        if !not_stopped(kind, t, s1_zero, &delta) {
            return Ok(None);
        }
        while not_stopped(kind, t, s1_zero, &delta) {
            delta.push(true);
        }
        return Ok(Some(delta.len() - 1));
    }
    let mut delta = DifferenceVector::new();
    if !not_stopped(kind, t, s1_zero, &delta) {
        return Ok(None);
    }
    let mut best = 0;
    dfs(kind, t, s1_zero, &mut delta, &mut best);
    Ok(Some(best))
}

fn dfs(kind: DecoderKind, t: usize, s1_zero: bool, delta: &mut DifferenceVector, best: &mut usize) {
    *best = (*best).max(delta.len());
    for bit in [false, true] {
        let mut next = delta.clone();
        next.push(bit);
        if not_stopped(kind, t, s1_zero, &next) {
            dfs(kind, t, s1_zero, &mut next, best);
        }
    }
}

/// Worst-case rounds found by search: one round past the longest running
/// history, or a single round.
pub fn searched_rounds(kind: DecoderKind, t: usize, branch: S1Branch) -> Result<usize> {
    Ok(match max_unusable_length(kind, t, branch)? {
        Some(len) => len + 2,
        None => 1,
    })
}

/// Extremal vector for the strong policy: zero runs separated by single ones,
/// of maximal total length without a usable run.
pub fn extremal_delta(t: usize) -> DifferenceVector {
    let gammas: Vec<usize> = if t % 2 == 1 {
        let runs = t.div_ceil(2) + 1;
        (1..=runs)
            .map(|j| if j == 1 || j == runs { (t - 1) / 2 } else { t.div_ceil(2) })
            .collect()
    } else {
        let runs = t / 2 + 1;
        (1..=runs).map(|j| if j == 1 || j == runs { t / 2 } else { t / 2 + 1 }).collect()
    };
    let mut d = DifferenceVector::new();
    for (j, &g) in gammas.iter().enumerate() {
        if j > 0 {
            d.push(true);
        }
        for _ in 0..g {
            d.push(false);
        }
    }
    d
}

/// Closed-form length of [`extremal_delta`].
pub fn extremal_length(t: usize) -> usize {
    if t % 2 == 1 {
        (t.div_ceil(2) + 1).pow(2) - 3
    } else {
        (t / 2 + 1) * (t / 2 + 2) - 3
    }
}

pub const TABLE_STRONG: [usize; 5] = [3, 5, 8, 11, 15];
pub const TABLE_WEAK_NONZERO: [usize; 5] = [2, 4, 6, 9, 12];
pub const TABLE_WEAK_ZERO: [usize; 5] = [1, 4, 7, 10, 14];
pub const TABLE_SHOR: [usize; 5] = [4, 9, 16, 25, 36];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub kind: DecoderKind,
    pub branch: S1Branch,
    pub t: usize,
    pub formula: usize,
    pub searched: usize,
    pub table: Option<usize>,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub t_max: usize,
    pub rows: Vec<BoundsRow>,
    pub counterexamples: Vec<String>,
    pub ok: bool,
}

impl BoundsReport {
    /// Round counts of one kind/branch for `t = 1..=t_max`.
    pub fn series(&self, kind: DecoderKind, branch: S1Branch) -> Vec<usize> {
        self.rows
            .iter()
            .filter(|r| r.kind == kind && r.branch == branch)
            .map(|r| r.searched)
            .collect()
    }
}

/// Checks closed forms, exhaustive search and the tabulated values for
/// `t = 1..=t_max`.
pub fn verify_round_bounds(t_max: usize) -> Result<BoundsReport> {
    if t_max > MAX_SEARCH_T {
        return Err(Error::SearchBoundExceeded {
            what: "fault budget",
            value: t_max,
            limit: MAX_SEARCH_T,
        });
    }
    let series = [
        (DecoderKind::Strong, S1Branch::NotApplicable, &TABLE_STRONG),
        (DecoderKind::Weak, S1Branch::Nonzero, &TABLE_WEAK_NONZERO),
        (DecoderKind::Weak, S1Branch::Zero, &TABLE_WEAK_ZERO),
        (DecoderKind::Shor, S1Branch::NotApplicable, &TABLE_SHOR),
    ];
    let mut rows = Vec::new();
    let mut counterexamples = Vec::new();
    for (kind, branch, table) in series {
        for t in 1..=t_max {
            let formula = worst_case_rounds(kind, t, branch);
            let searched = searched_rounds(kind, t, branch)?;
            let tabled = table.get(t - 1).copied();
            let ok = formula == searched && tabled.is_none_or(|v| v == searched);
            if !ok {
                counterexamples.push(format!(
                    "{kind} {branch:?} t={t}: formula {formula}, search {searched}, table {tabled:?}"
                ));
            }
            rows.push(BoundsRow {
                kind,
                branch,
                t,
                formula,
                searched,
                table: tabled,
                ok,
            });
        }
    }
    for t in 1..=t_max {
        let delta = extremal_delta(t);
        let mut prefix = DifferenceVector::new();
        let mut running = not_stopped(DecoderKind::Strong, t, false, &prefix);
        for &b in delta.bits() {
            prefix.push(b);
            running &= not_stopped(DecoderKind::Strong, t, false, &prefix);
        }
        if !running || delta.len() != extremal_length(t) {
            counterexamples.push(format!("extremal vector {delta} decided early for t={t}"));
        }
        for bit in [false, true] {
            let mut next = delta.clone();
            next.push(bit);
            if not_stopped(DecoderKind::Strong, t, false, &next) {
                counterexamples.push(format!("extremal extension {next} still undecided for t={t}"));
            }
        }
    }
    let ok = counterexamples.is_empty();
    Ok(BoundsReport {
        t_max,
        rows,
        counterexamples,
        ok,
    })
}
