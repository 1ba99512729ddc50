//! Pauli algebra over `n` qubits (phase dropped) and the stabilizer-code
//! abstraction shared by every other module.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::gf2::{self, EchelonBasis};

/// Syndromes are plain bit vectors, one bit per generator.
pub type Syndrome = BitVector;

/// Single-qubit Pauli, encoded by its (x, z) bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SinglePauli {
    I,
    X,
    Y,
    Z,
}

impl SinglePauli {
    pub const NONTRIVIAL: [SinglePauli; 3] = [SinglePauli::X, SinglePauli::Y, SinglePauli::Z];
    pub const ALL: [SinglePauli; 4] = [SinglePauli::I, SinglePauli::X, SinglePauli::Y, SinglePauli::Z];

    #[inline]
    pub fn has_x(self) -> bool {
        matches!(self, SinglePauli::X | SinglePauli::Y)
    }

    #[inline]
    pub fn has_z(self) -> bool {
        matches!(self, SinglePauli::Z | SinglePauli::Y)
    }

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => SinglePauli::I,
            (true, false) => SinglePauli::X,
            (true, true) => SinglePauli::Y,
            (false, true) => SinglePauli::Z,
        }
    }

    #[inline]
    pub fn anticommutes(self, other: SinglePauli) -> bool {
        (self.has_x() && other.has_z()) ^ (self.has_z() && other.has_x())
    }

    pub fn as_char(self) -> char {
        match self {
            SinglePauli::I => 'I',
            SinglePauli::X => 'X',
            SinglePauli::Y => 'Y',
            SinglePauli::Z => 'Z',
        }
    }
}

/// An `n`-qubit Pauli operator as an (X, Z) bit-vector pair.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliOperator {
    x: BitVector,
    z: BitVector,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        Self {
            x: BitVector::zeros(n),
            z: BitVector::zeros(n),
        }
    }

    pub fn from_parts(x: BitVector, z: BitVector) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::SizeMismatch {
                expected: x.len(),
                found: z.len(),
            });
        }
        Ok(Self { x, z })
    }

    pub fn single(n: usize, qubit: usize, p: SinglePauli) -> Self {
        let mut op = Self::identity(n);
        op.set(qubit, p);
        op
    }

    /// X on every listed qubit.
    pub fn x_on(n: usize, qubits: impl IntoIterator<Item = usize>) -> Self {
        Self {
            x: BitVector::from_indices(n, qubits),
            z: BitVector::zeros(n),
        }
    }

    /// Z on every listed qubit.
    pub fn z_on(n: usize, qubits: impl IntoIterator<Item = usize>) -> Self {
        Self {
            x: BitVector::zeros(n),
            z: BitVector::from_indices(n, qubits),
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.x.len()
    }

    #[inline]
    pub fn x_bits(&self) -> &BitVector {
        &self.x
    }

    #[inline]
    pub fn z_bits(&self) -> &BitVector {
        &self.z
    }

    #[inline]
    pub fn get(&self, qubit: usize) -> SinglePauli {
        SinglePauli::from_bits(self.x.get(qubit), self.z.get(qubit))
    }

    pub fn set(&mut self, qubit: usize, p: SinglePauli) {
        self.x.set(qubit, p.has_x());
        self.z.set(qubit, p.has_z());
    }

    /// Multiplies a single-qubit Pauli into position `qubit` (phase dropped).
    #[inline]
    pub fn apply(&mut self, qubit: usize, p: SinglePauli) {
        if p.has_x() {
            self.x.flip(qubit);
        }
        if p.has_z() {
            self.z.flip(qubit);
        }
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    pub fn weight(&self) -> usize {
        self.x
            .words()
            .iter()
            .zip(self.z.words())
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    /// Support as qubit indices.
    pub fn support(&self) -> Vec<usize> {
        let mut s = self.x.clone();
        s.or_assign(&self.z);
        s.iter_ones().collect()
    }

    pub fn is_x_type(&self) -> bool {
        self.z.is_zero()
    }

    pub fn is_z_type(&self) -> bool {
        self.x.is_zero()
    }

    #[inline]
    pub fn mul_assign(&mut self, other: &PauliOperator) {
        self.x.xor_assign(&other.x);
        self.z.xor_assign(&other.z);
    }

    /// Symplectic form: true when the operators anticommute.
    #[inline]
    pub fn anticommutes_with(&self, other: &PauliOperator) -> bool {
        self.x.dot(&other.z) ^ self.z.dot(&other.x)
    }

    /// Concatenation `(x | z)` used for rank computations.
    fn symplectic_row(&self) -> BitVector {
        let n = self.n();
        let mut v = BitVector::zeros(2 * n);
        for i in self.x.iter_ones() {
            v.set(i, true);
        }
        for i in self.z.iter_ones() {
            v.set(n + i, true);
        }
        v
    }
}

fn check_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        Err(Error::SizeMismatch {
            expected: a,
            found: b,
        })
    } else {
        Ok(())
    }
}

/// True iff `a` and `b` commute.
pub fn commutes(a: &PauliOperator, b: &PauliOperator) -> Result<bool> {
    check_len(a.n(), b.n())?;
    Ok(!a.anticommutes_with(b))
}

/// Product of two Paulis with the phase dropped.
pub fn multiply(a: &PauliOperator, b: &PauliOperator) -> Result<PauliOperator> {
    check_len(a.n(), b.n())?;
    let mut out = a.clone();
    out.mul_assign(b);
    Ok(out)
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n() {
            write!(f, "{}", self.get(q).as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pauli({self})")
    }
}

impl FromStr for PauliOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let n = s.chars().count();
        let mut op = PauliOperator::identity(n);
        for (q, c) in s.chars().enumerate() {
            let p = match c {
                'I' | '_' => SinglePauli::I,
                'X' => SinglePauli::X,
                'Y' => SinglePauli::Y,
                'Z' => SinglePauli::Z,
                _ => return Err(Error::ParsePauli(s.to_string())),
            };
            op.set(q, p);
        }
        Ok(op)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogicalClass {
    Trivial,
    Logical,
}

/// A stabilizer code with ordered generators and logical representatives.
///
/// CSS codes keep their X-type generators first, then the Z-type ones; the
/// sectors are the contiguous index ranges `x_sector` and `z_sector`.
#[derive(Clone, Debug)]
pub struct StabilizerCode {
    n: usize,
    k: usize,
    generators: Vec<PauliOperator>,
    logical_x: Vec<PauliOperator>,
    logical_z: Vec<PauliOperator>,
    css: bool,
    x_sector: Vec<usize>,
    z_sector: Vec<usize>,
    distance: usize,
    // syndrome of X_q and Z_q for every qubit q
    x_columns: Vec<Syndrome>,
    z_columns: Vec<Syndrome>,
}

impl StabilizerCode {
    /// Validates and builds a code. `k` is inferred as `n - generators.len()`.
    pub fn new(
        generators: Vec<PauliOperator>,
        logical_x: Vec<PauliOperator>,
        logical_z: Vec<PauliOperator>,
        distance: usize,
    ) -> Result<Self> {
        let n = generators
            .first()
            .or(logical_x.first())
            .map(PauliOperator::n)
            .ok_or_else(|| Error::InvalidCode("no operators given".into()))?;
        let all = generators.iter().chain(&logical_x).chain(&logical_z);
        for op in all {
            check_len(n, op.n())?;
        }
        let r = generators.len();
        if r > n {
            return Err(Error::InvalidCode(format!("{r} generators on {n} qubits")));
        }
        let k = n - r;
        if logical_x.len() != k || logical_z.len() != k {
            return Err(Error::InvalidCode(format!(
                "expected {k} logical X and Z representatives, got {} and {}",
                logical_x.len(),
                logical_z.len()
            )));
        }
        for (i, a) in generators.iter().enumerate() {
            for (j, b) in generators.iter().enumerate().skip(i + 1) {
                if a.anticommutes_with(b) {
                    return Err(Error::InvalidCode(format!("generators {i} and {j} anticommute")));
                }
            }
        }
        let rows: Vec<BitVector> = generators.iter().map(PauliOperator::symplectic_row).collect();
        if gf2::rank(&rows) != r {
            return Err(Error::InvalidCode("generators are not independent".into()));
        }
        for (i, l) in logical_x.iter().chain(&logical_z).enumerate() {
            if generators.iter().any(|g| g.anticommutes_with(l)) {
                return Err(Error::InvalidCode(format!("logical representative {i} anticommutes with a generator")));
            }
        }
        for (i, lx) in logical_x.iter().enumerate() {
            for (j, lz) in logical_z.iter().enumerate() {
                if lx.anticommutes_with(lz) != (i == j) {
                    return Err(Error::InvalidCode(format!("logical pair ({i}, {j}) has the wrong commutation")));
                }
            }
            for (j, ly) in logical_x.iter().enumerate().skip(i + 1) {
                if lx.anticommutes_with(ly) {
                    return Err(Error::InvalidCode(format!("logical X {i} and {j} anticommute")));
                }
            }
        }
        for (i, lz) in logical_z.iter().enumerate() {
            for (j, ly) in logical_z.iter().enumerate().skip(i + 1) {
                if lz.anticommutes_with(ly) {
                    return Err(Error::InvalidCode(format!("logical Z {i} and {j} anticommute")));
                }
            }
        }

        let rx = generators.iter().take_while(|g| g.is_x_type() && !g.is_identity()).count();
        let css = generators[rx..].iter().all(|g| g.is_z_type() && !g.is_identity()) && r > 0;
        let (x_sector, z_sector) = if css {
            ((0..rx).collect(), (rx..r).collect())
        } else {
            (Vec::new(), Vec::new())
        };

        let column = |p: SinglePauli, q: usize| {
            let e = PauliOperator::single(n, q, p);
            BitVector::from_bools(&generators.iter().map(|g| g.anticommutes_with(&e)).collect::<Vec<_>>())
        };
        let x_columns = (0..n).map(|q| column(SinglePauli::X, q)).collect();
        let z_columns = (0..n).map(|q| column(SinglePauli::Z, q)).collect();

        Ok(Self {
            n,
            k,
            generators,
            logical_x,
            logical_z,
            css,
            x_sector,
            z_sector,
            distance,
            x_columns,
            z_columns,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of generators, `n - k`.
    pub fn r(&self) -> usize {
        self.generators.len()
    }

    pub fn distance(&self) -> usize {
        self.distance
    }

    /// Fault budget `t = (d - 1) / 2`.
    pub fn t(&self) -> usize {
        self.distance.saturating_sub(1) / 2
    }

    pub fn generators(&self) -> &[PauliOperator] {
        &self.generators
    }

    pub fn logical_x(&self) -> &[PauliOperator] {
        &self.logical_x
    }

    pub fn logical_z(&self) -> &[PauliOperator] {
        &self.logical_z
    }

    pub fn is_css(&self) -> bool {
        self.css
    }

    pub fn x_sector(&self) -> &[usize] {
        &self.x_sector
    }

    pub fn z_sector(&self) -> &[usize] {
        &self.z_sector
    }

    /// Syndrome contribution of a single-qubit Pauli on `qubit`.
    pub fn column(&self, qubit: usize, p: SinglePauli) -> Syndrome {
        let mut s = BitVector::zeros(self.r());
        self.xor_column(&mut s, qubit, p);
        s
    }

    #[inline]
    pub(crate) fn xor_column(&self, target: &mut Syndrome, qubit: usize, p: SinglePauli) {
        // X_q is detected by generators with Z on q, i.e. the x column
        if p.has_x() {
            target.xor_assign(&self.x_columns[qubit]);
        }
        if p.has_z() {
            target.xor_assign(&self.z_columns[qubit]);
        }
    }

    #[inline]
    pub(crate) fn xor_column_above(&self, target: &mut Syndrome, qubit: usize, p: SinglePauli, pos: usize) {
        if p.has_x() {
            target.xor_assign_above(&self.x_columns[qubit], pos);
        }
        if p.has_z() {
            target.xor_assign_above(&self.z_columns[qubit], pos);
        }
    }

    /// Generator supports of one CSS sector as bit vectors over the qubits.
    pub fn sector_rows(&self, sector: &[usize]) -> Vec<BitVector> {
        sector
            .iter()
            .map(|&i| {
                let g = &self.generators[i];
                let mut s = g.x_bits().clone();
                s.or_assign(g.z_bits());
                s
            })
            .collect()
    }
}

/// Syndrome of `e`: bit `i` is set iff `e` anticommutes with generator `i`.
pub fn syndrome_of(code: &StabilizerCode, e: &PauliOperator) -> Result<Syndrome> {
    check_len(code.n(), e.n())?;
    Ok(BitVector::from_bools(
        &code.generators().iter().map(|g| g.anticommutes_with(e)).collect::<Vec<_>>(),
    ))
}

/// Classifies a zero-syndrome residual as a stabilizer or a nontrivial logical.
pub fn logical_class(code: &StabilizerCode, residual: &PauliOperator) -> Result<LogicalClass> {
    if !syndrome_of(code, residual)?.is_zero() {
        return Err(Error::NonZeroSyndrome);
    }
    let logical = code
        .logical_x()
        .iter()
        .chain(code.logical_z())
        .any(|l| l.anticommutes_with(residual));
    Ok(if logical {
        LogicalClass::Logical
    } else {
        LogicalClass::Trivial
    })
}

/// True iff `e` lies in the group generated by the code's generators.
pub fn in_stabilizer_group(code: &StabilizerCode, e: &PauliOperator) -> bool {
    let mut basis = EchelonBasis::new();
    for g in code.generators() {
        basis.insert(&g.symplectic_row());
    }
    basis.contains(&e.symplectic_row())
}

/// Minimum weight over the stabilizer coset `e S`, by enumerating the group.
pub fn coset_min_weight(code: &StabilizerCode, e: &PauliOperator, max_generators: usize) -> Result<usize> {
    check_len(code.n(), e.n())?;
    let r = code.r();
    if r > max_generators {
        return Err(Error::SearchBoundExceeded {
            what: "generator count",
            value: r,
            limit: max_generators,
        });
    }
    let mut cur = e.clone();
    let mut best = cur.weight();
    // Gray-code walk over all 2^r group elements
    for i in 1u64..(1u64 << r) {
        let bit = i.trailing_zeros() as usize;
        cur.mul_assign(&code.generators()[bit]);
        best = best.min(cur.weight());
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    #[test]
    fn commutation_examples() {
        assert!(!commutes(&p("X"), &p("Z")).unwrap());
        assert!(commutes(&p("X"), &p("X")).unwrap());
        assert!(commutes(&p("XX"), &p("ZZ")).unwrap());
        assert!(matches!(commutes(&p("X"), &p("XX")), Err(Error::SizeMismatch { .. })));
    }

    #[test]
    fn multiplication_examples() {
        assert!(multiply(&p("X"), &p("X")).unwrap().is_identity());
        assert_eq!(multiply(&p("X"), &p("Z")).unwrap(), p("Y"));
        assert_eq!(multiply(&p("XI"), &p("IZ")).unwrap(), p("XZ"));
        assert!(multiply(&p("X"), &p("II")).is_err());
    }

    #[test]
    fn text_round_trip_and_weight() {
        let op = p("IXYZ");
        assert_eq!(op.to_string(), "IXYZ");
        assert_eq!(op.weight(), 3);
        assert_eq!(p("IIII").weight(), 0);
        assert!("IXQ".parse::<PauliOperator>().is_err());
    }

    fn repetition_code() -> StabilizerCode {
        StabilizerCode::new(vec![p("ZZI"), p("IZZ")], vec![p("XXX")], vec![p("ZII")], 1).unwrap()
    }

    #[test]
    fn code_validation_rejects_bad_inputs() {
        assert!(StabilizerCode::new(vec![p("XI"), p("ZI")], vec![], vec![], 1).is_err());
        assert!(StabilizerCode::new(vec![p("ZZ"), p("ZZ")], vec![], vec![], 1).is_err());
        assert!(StabilizerCode::new(vec![p("ZZ")], vec![p("XI")], vec![p("ZI")], 1).is_err());
    }

    #[test]
    fn syndromes_and_classes_on_repetition_code() {
        let code = repetition_code();
        assert!(!code.is_css() || code.x_sector().is_empty());
        assert_eq!(syndrome_of(&code, &p("III")).unwrap().to_bit_string(), "00");
        assert_eq!(syndrome_of(&code, &p("XII")).unwrap().to_bit_string(), "10");
        assert_eq!(syndrome_of(&code, &p("IXI")).unwrap().to_bit_string(), "11");
        assert_eq!(logical_class(&code, &p("ZZI")).unwrap(), LogicalClass::Trivial);
        assert_eq!(logical_class(&code, &p("XXX")).unwrap(), LogicalClass::Logical);
        assert_eq!(logical_class(&code, &p("XII")), Err(Error::NonZeroSyndrome));
        assert_eq!(code.column(1, SinglePauli::X).to_bit_string(), "11");
    }

    #[test]
    fn coset_weight_of_stabilizer_is_zero() {
        let code = repetition_code();
        assert_eq!(coset_min_weight(&code, &p("ZIZ"), 10).unwrap(), 0);
        assert_eq!(coset_min_weight(&code, &p("ZZX"), 10).unwrap(), 1);
    }
}
