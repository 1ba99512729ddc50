//! Gaussian elimination over GF(2).

use crate::bits::BitVector;

/// Incremental echelon basis used for rank and span-membership queries.
#[derive(Clone, Debug, Default)]
pub struct EchelonBasis {
    // (pivot column, row) pairs; every row has its pivot as lowest set bit
    // and no other row shares that pivot.
    rows: Vec<(usize, BitVector)>,
}

impl EchelonBasis {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` against the basis and returns the remainder.
    pub fn reduce(&self, v: &BitVector) -> BitVector {
        let mut v = v.clone();
        for (pivot, row) in &self.rows {
            if v.get(*pivot) {
                v.xor_assign(row);
            }
        }
        v
    }

    /// Inserts `v`; returns false when it was already in the span.
    pub fn insert(&mut self, v: &BitVector) -> bool {
        let r = self.reduce(v);
        let lead = r.iter_ones().next();
        match lead {
            None => false,
            Some(pivot) => {
                // keep rows fully reduced against the new pivot
                for (_, row) in self.rows.iter_mut() {
                    if row.get(pivot) {
                        row.xor_assign(&r);
                    }
                }
                self.rows.push((pivot, r));
                true
            }
        }
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        self.reduce(v).is_zero()
    }
}

pub fn rank(vectors: &[BitVector]) -> usize {
    let mut basis = EchelonBasis::new();
    for v in vectors {
        basis.insert(v);
    }
    basis.rank()
}

/// Solver for `H e = s` where the rows of `H` are given.
#[derive(Clone, Debug)]
pub struct LinearSolver {
    n: usize,
    m: usize,
    // transform rows: row i of the reduced matrix equals sum of original rows in transform[i]
    transform: Vec<BitVector>,
    pivots: Vec<Option<usize>>,
}

impl LinearSolver {
    pub fn new(rows: &[BitVector], n: usize) -> Self {
        let m = rows.len();
        let mut reduced: Vec<BitVector> = rows.to_vec();
        let mut transform: Vec<BitVector> = (0..m).map(|i| BitVector::from_indices(m, [i])).collect();
        let mut pivots = vec![None; m];
        let mut next = 0;
        for col in 0..n {
            if next == m {
                break;
            }
            let Some(found) = (next..m).find(|&i| reduced[i].get(col)) else {
                continue;
            };
            reduced.swap(next, found);
            transform.swap(next, found);
            for i in 0..m {
                if i != next && reduced[i].get(col) {
                    let (pr, pt) = (reduced[next].clone(), transform[next].clone());
                    reduced[i].xor_assign(&pr);
                    transform[i].xor_assign(&pt);
                }
            }
            pivots[next] = Some(col);
            next += 1;
        }
        Self {
            n,
            m,
            transform,
            pivots,
        }
    }

    /// Returns some `e` with `H e = s`, or `None` when the system is inconsistent.
    pub fn solve(&self, s: &BitVector) -> Option<BitVector> {
        debug_assert_eq!(s.len(), self.m);
        let mut e = BitVector::zeros(self.n);
        for (row, pivot) in self.transform.iter().zip(&self.pivots) {
            let bit = row.dot(s);
            match pivot {
                Some(col) => e.set(*col, bit),
                None if bit => return None,
                None => {}
            }
        }
        Some(e)
    }
}
