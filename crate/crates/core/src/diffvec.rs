//! Difference vectors over syndrome histories and the usable-zero-run test.
//!
//! Positions in a difference vector are 1-based: `delta(i)` compares rounds
//! `i` and `i + 1`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stabilizer::Syndrome;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SyndromeHistory {
    rounds: Vec<Syndrome>,
    delta: DifferenceVector,
}

impl SyndromeHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_rounds(rounds: impl IntoIterator<Item = Syndrome>) -> Result<Self> {
        let mut h = Self::new();
        for s in rounds {
            h.push(s)?;
        }
        Ok(h)
    }

    /// Appends a round and extends the difference vector by one bit.
    pub fn push(&mut self, s: Syndrome) -> Result<()> {
        if let Some(last) = self.rounds.last() {
            if last.len() != s.len() {
                return Err(Error::SizeMismatch {
                    expected: last.len(),
                    found: s.len(),
                });
            }
            self.delta.push(*last != s);
        }
        self.rounds.push(s);
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.rounds.len()
    }

    /// Syndrome of round `i` (1-based).
    pub fn round(&self, i: usize) -> &Syndrome {
        &self.rounds[i - 1]
    }

    pub fn rounds(&self) -> &[Syndrome] {
        &self.rounds
    }

    pub fn last(&self) -> Option<&Syndrome> {
        self.rounds.last()
    }

    pub fn delta(&self) -> &DifferenceVector {
        &self.delta
    }
}

pub fn diff_from_history(h: &SyndromeHistory) -> DifferenceVector {
    let mut d = DifferenceVector::new();
    for w in h.rounds().windows(2) {
        d.push(w[0] != w[1]);
    }
    d
}

/// Bit string marking which consecutive rounds disagree.
#[derive(Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DifferenceVector {
    bits: Vec<bool>,
}

impl DifferenceVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn zeros(len: usize) -> Self {
        Self { bits: vec![false; len] }
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Bit at 1-based position `i`.
    pub fn get(&self, i: usize) -> bool {
        self.bits[i - 1]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Drops the first bit.
    pub fn tail(&self) -> Self {
        Self {
            bits: self.bits.iter().skip(1).copied().collect(),
        }
    }

    /// Prepends a zero bit.
    pub fn with_leading_zero(&self) -> Self {
        let mut bits = Vec::with_capacity(self.bits.len() + 1);
        bits.push(false);
        bits.extend_from_slice(&self.bits);
        Self { bits }
    }

    /// The vector with lowest bit first, read from an integer.
    pub fn from_u64(len: usize, v: u64) -> Self {
        Self {
            bits: (0..len).map(|i| (v >> i) & 1 == 1).collect(),
        }
    }
}

impl fmt::Display for DifferenceVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for DifferenceVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "δ\"{self}\"")
    }
}

impl FromStr for DifferenceVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Domain(format!("difference vector {s:?} is not a 0/1 string"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::from_bits)
    }
}

/// A maximal run of zeros with its fault-count statistics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ZeroSubstring {
    /// Ordinal among the runs, from 1.
    pub j: usize,
    /// First and last position (1-based, inclusive).
    pub start: usize,
    pub end: usize,
    pub gamma: usize,
    /// Minimum faults explaining the ones strictly before position `start - 1`.
    pub alpha: usize,
    /// Minimum faults explaining the ones strictly after position `end + 1`.
    pub beta: usize,
}

impl ZeroSubstring {
    pub fn total(&self) -> usize {
        self.alpha + self.beta + self.gamma
    }

    pub fn contains(&self, pos: usize) -> bool {
        (self.start..=self.end).contains(&pos)
    }
}

/// Greedy pairing counts of a bit slice: `(pairs, leftover ones)`. A run of
/// `q` ones yields `q / 2` pairs and `q % 2` leftovers, whatever the pairing.
pub fn pair_counts(bits: &[bool]) -> (usize, usize) {
    let (mut pairs, mut singles) = (0, 0);
    let mut i = 0;
    while i < bits.len() {
        if bits[i] {
            if i + 1 < bits.len() && bits[i + 1] {
                pairs += 1;
                i += 2;
                continue;
            }
            singles += 1;
        }
        i += 1;
    }
    (pairs, singles)
}

/// Non-overlapping `11` blocks plus leftover ones.
pub fn min_faults(delta: &DifferenceVector) -> usize {
    let (p, s) = pair_counts(delta.bits());
    p + s
}

/// Non-overlapping `11` blocks only.
pub fn pairs_only(delta: &DifferenceVector) -> usize {
    pair_counts(delta.bits()).0
}

/// Faults needed for each prefix: `prefix[k]` covers positions `1..=k`.
fn prefix_fault_counts(bits: &[bool], ops: &mut u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(bits.len() + 1);
    out.push(0);
    let (mut done, mut run) = (0usize, 0usize);
    for &b in bits {
        *ops += 1;
        if b {
            run += 1;
        } else {
            done += run.div_ceil(2);
            run = 0;
        }
        out.push(done + run.div_ceil(2));
    }
    out
}

fn runs_with_counts(delta: &DifferenceVector, ops: &mut u64) -> Vec<ZeroSubstring> {
    let bits = delta.bits();
    let len = bits.len();
    let prefix = prefix_fault_counts(bits, ops);
    let reversed: Vec<bool> = bits.iter().rev().copied().collect();
    // suffix[k] covers the last k positions
    let suffix = prefix_fault_counts(&reversed, ops);

    let mut runs = Vec::new();
    let mut i = 0;
    while i < len {
        *ops += 1;
        if bits[i] {
            i += 1;
            continue;
        }
        let s = i;
        while i < len && !bits[i] {
            *ops += 1;
            i += 1;
        }
        let (start, end) = (s + 1, i);
        // prefix strictly before start-1 is positions 1..=start-2
        let alpha = prefix[start.saturating_sub(2)];
        // suffix strictly after end+1 is positions end+2..=len
        let beta = suffix[len.saturating_sub(end + 1)];
        runs.push(ZeroSubstring {
            j: runs.len() + 1,
            start,
            end,
            gamma: end - start + 1,
            alpha,
            beta,
        });
    }
    runs
}

/// Every maximal zero run with its `(alpha, beta, gamma)`.
pub fn decompose(delta: &DifferenceVector) -> Vec<ZeroSubstring> {
    runs_with_counts(delta, &mut 0)
}

/// Zero runs with `alpha + beta + gamma >= t_in`, left to right.
pub fn find_usable(t_in: usize, delta: &DifferenceVector) -> Vec<ZeroSubstring> {
    find_usable_counted(t_in, delta).0
}

/// `find_usable` together with a count of primitive steps taken.
pub fn find_usable_counted(t_in: usize, delta: &DifferenceVector) -> (Vec<ZeroSubstring>, u64) {
    let mut ops = 0;
    let runs = runs_with_counts(delta, &mut ops);
    let usable = runs
        .into_iter()
        .filter(|r| {
            ops += 1;
            r.total() >= t_in
        })
        .collect();
    (usable, ops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dv(s: &str) -> DifferenceVector {
        s.parse().unwrap()
    }

    fn brute_min_faults(bits: &[bool]) -> usize {
        // cover all ones with blocks of one or two adjacent ones, minimising blocks
        let n = bits.len();
        let mut best = vec![0usize; n + 1];
        for i in (0..n).rev() {
            best[i] = if !bits[i] {
                best[i + 1]
            } else {
                let single = 1 + best[i + 1];
                let pair = if i + 1 < n && bits[i + 1] { 1 + best[i + 2] } else { usize::MAX };
                single.min(pair)
            };
        }
        best[0]
    }

    #[test]
    fn history_to_delta() {
        let a = Syndrome::from_bit_str("01").unwrap();
        let b = Syndrome::from_bit_str("11").unwrap();
        let h = SyndromeHistory::from_rounds([a.clone(), a.clone(), a.clone()]).unwrap();
        assert_eq!(h.delta().to_string(), "00");
        let h = SyndromeHistory::from_rounds([b.clone(), a.clone(), a.clone()]).unwrap();
        assert_eq!(h.delta().to_string(), "10");
        assert_eq!(diff_from_history(&h), *h.delta());
        let h = SyndromeHistory::from_rounds([a]).unwrap();
        assert!(h.delta().is_empty());
        let mut h = SyndromeHistory::new();
        h.push(b).unwrap();
        assert!(h.push(Syndrome::zeros(3)).is_err());
    }

    #[test]
    fn decompose_examples() {
        let runs = decompose(&dv("1011000111101"));
        let r = runs.iter().find(|r| r.gamma == 3).unwrap();
        assert_eq!((r.alpha, r.beta, r.gamma), (2, 3, 3));
        assert_eq!((r.start, r.end), (5, 7));

        let runs = decompose(&dv("000"));
        assert_eq!(runs.len(), 1);
        assert_eq!((runs[0].alpha, runs[0].beta, runs[0].gamma), (0, 0, 3));

        assert!(decompose(&dv("11")).is_empty());
    }

    #[test]
    fn usable_examples() {
        assert!(find_usable(3, &dv("010010")).is_empty());
        let u = find_usable(3, &dv("0100010"));
        assert_eq!(u.len(), 1);
        assert_eq!((u[0].start, u[0].end, u[0].alpha, u[0].beta), (3, 5, 0, 0));
        assert_eq!(find_usable(1, &dv("0")).len(), 1);
    }

    #[test]
    fn min_fault_examples() {
        assert_eq!(min_faults(&dv("110")), 1);
        assert_eq!(min_faults(&dv("000")), 0);
        assert_eq!(min_faults(&dv("1011")), 2);
        assert_eq!(pairs_only(&dv("1011011")), 2);
        assert_eq!(min_faults(&dv("1011")), 2);
        assert_eq!(min_faults(&dv("11101")), 3);
    }

    proptest! {
        #[test]
        fn greedy_count_is_minimal(bits in proptest::collection::vec(any::<bool>(), 0..24)) {
            let d = DifferenceVector::from_bits(bits.clone());
            prop_assert_eq!(min_faults(&d), brute_min_faults(&bits));
        }

        #[test]
        fn runs_reassemble(bits in proptest::collection::vec(any::<bool>(), 0..24)) {
            let d = DifferenceVector::from_bits(bits.clone());
            let mut rebuilt = vec![true; bits.len()];
            for r in decompose(&d) {
                for p in r.start..=r.end {
                    rebuilt[p - 1] = false;
                }
                prop_assert!(r.start == 1 || bits[r.start - 2]);
                prop_assert!(r.end == bits.len() || bits[r.end]);
                prop_assert_eq!(r.alpha, brute_min_faults(&bits[..r.start.saturating_sub(2)]));
                prop_assert_eq!(r.beta, brute_min_faults(&bits[(r.end + 1).min(bits.len())..]));
            }
            prop_assert_eq!(rebuilt, bits);
        }

        #[test]
        fn usability_is_monotone(bits in proptest::collection::vec(any::<bool>(), 0..16), t in 1usize..6) {
            let d = DifferenceVector::from_bits(bits);
            let high = find_usable(t, &d);
            for lower in 1..t {
                let low = find_usable(lower, &d);
                prop_assert!(high.iter().all(|r| low.contains(r)));
            }
        }
    }
}
