//! Shor syndrome-extraction circuits under circuit-level depolarizing noise,
//! simulated as a Pauli frame.
//!
//! Each generator `M = P_1 ... P_w` is measured with a fresh `w`-qubit cat
//! state: cat preparation, `w` controlled-`P_j` gates (ancilla `j` controls
//! data qubit `q_j`), transversal Hadamards and `w` ancilla measurements whose
//! parity is the syndrome bit. Every one of the `4w` locations fails with
//! probability `p`:
//!
//! | location          | faults                           | effect                                        |
//! |-------------------|----------------------------------|-----------------------------------------------|
//! | cat qubit `j`     | X, Y, Z (p/3 each)               | Z part flips the bit; X part puts `P_j` on `q_j` |
//! | gate `j`          | 15 two-qubit Paulis (p/15 each)  | ancilla Z part flips the bit; data part lands on `q_j` |
//! | Hadamard `j`      | X, Y, Z (p/3 each)               | X part flips the bit                          |
//! | measurement `j`   | outcome flip (p)                 | flips the bit                                 |
//!
//! A data error created inside circuit `i` happens after the gate touching that
//! qubit, so it never changes bit `i`, only the bits measured later.

use std::ops::Range;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stabilizer::{PauliOperator, SinglePauli, StabilizerCode, Syndrome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocationKind {
    CatPrep,
    TwoQubitGate,
    OneQubitGate,
    Measurement,
}

impl LocationKind {
    pub const ALL: [LocationKind; 4] = [
        LocationKind::CatPrep,
        LocationKind::TwoQubitGate,
        LocationKind::OneQubitGate,
        LocationKind::Measurement,
    ];

    pub fn is_legal(self, fault: FaultValue) -> bool {
        match (self, fault) {
            (LocationKind::CatPrep | LocationKind::OneQubitGate, FaultValue::Pauli(p)) => p != SinglePauli::I,
            (LocationKind::TwoQubitGate, FaultValue::PauliPair(a, d)) => a != SinglePauli::I || d != SinglePauli::I,
            (LocationKind::Measurement, FaultValue::Flip) => true,
            _ => false,
        }
    }

    /// Every nontrivial fault at this kind of location, in sampling order.
    pub fn faults(self) -> Vec<FaultValue> {
        match self {
            LocationKind::CatPrep | LocationKind::OneQubitGate => {
                SinglePauli::NONTRIVIAL.into_iter().map(FaultValue::Pauli).collect()
            }
            LocationKind::TwoQubitGate => SinglePauli::ALL
                .into_iter()
                .flat_map(|a| SinglePauli::ALL.into_iter().map(move |d| FaultValue::PauliPair(a, d)))
                .skip(1)
                .collect(),
            LocationKind::Measurement => vec![FaultValue::Flip],
        }
    }
}

/// A fault at one location. `PauliPair` is `(ancilla, data)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FaultValue {
    Pauli(SinglePauli),
    PauliPair(SinglePauli, SinglePauli),
    Flip,
}

impl std::fmt::Display for FaultValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FaultValue::Pauli(p) => write!(f, "{}", p.as_char()),
            FaultValue::PauliPair(a, d) => write!(f, "{}{}", a.as_char(), d.as_char()),
            FaultValue::Flip => write!(f, "flip"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ShorCircuit {
    pub generator_index: usize,
    pub support: Vec<usize>,
    /// Generator Pauli on each support qubit, in support order.
    pub paulis: Vec<SinglePauli>,
}

impl ShorCircuit {
    pub fn w(&self) -> usize {
        self.support.len()
    }

    pub fn location_count(&self) -> usize {
        4 * self.w()
    }

    /// Kind and cat-qubit slot of location `idx` (kinds are laid out in blocks of `w`).
    pub fn location(&self, idx: usize) -> Result<(LocationKind, usize)> {
        let w = self.w();
        if idx >= 4 * w {
            return Err(Error::UnknownLocation(idx));
        }
        Ok((LocationKind::ALL[idx / w], idx % w))
    }
}

/// Stable location address: circuit index and location index inside it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LocationId {
    pub circuit: usize,
    pub location: usize,
}

#[derive(Clone, Copy, Debug)]
struct LocationInfo {
    circuit: u32,
    slot: u32,
    kind: LocationKind,
}

/// One Shor circuit per generator, in generator order, with a flattened
/// location index.
#[derive(Clone, Debug)]
pub struct RoundSchedule {
    circuits: Vec<ShorCircuit>,
    offsets: Vec<usize>,
    flat: Vec<LocationInfo>,
}

pub fn build_round_schedule(code: &StabilizerCode) -> RoundSchedule {
    let circuits: Vec<ShorCircuit> = code
        .generators()
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let support = g.support();
            let paulis = support.iter().map(|&q| g.get(q)).collect();
            ShorCircuit {
                generator_index: i,
                support,
                paulis,
            }
        })
        .collect();
    let mut offsets = Vec::with_capacity(circuits.len() + 1);
    let mut flat = Vec::new();
    offsets.push(0);
    for (ci, c) in circuits.iter().enumerate() {
        for idx in 0..c.location_count() {
            let (kind, slot) = c.location(idx).expect("index in range");
            flat.push(LocationInfo {
                circuit: ci as u32,
                slot: slot as u32,
                kind,
            });
        }
        offsets.push(flat.len());
    }
    RoundSchedule { circuits, offsets, flat }
}

impl RoundSchedule {
    pub fn circuits(&self) -> &[ShorCircuit] {
        &self.circuits
    }

    pub fn is_empty(&self) -> bool {
        self.circuits.is_empty()
    }

    /// Locations in one full round.
    pub fn location_count(&self) -> usize {
        self.flat.len()
    }

    /// Locations in the rounds measuring only `circuits`.
    pub fn span_len(&self, circuits: &Range<usize>) -> usize {
        self.offsets[circuits.end] - self.offsets[circuits.start]
    }

    pub fn flat_index(&self, id: LocationId) -> Result<usize> {
        let c = self.circuits.get(id.circuit).ok_or(Error::UnknownLocation(id.circuit))?;
        if id.location >= c.location_count() {
            return Err(Error::UnknownLocation(id.location));
        }
        Ok(self.offsets[id.circuit] + id.location)
    }

    pub fn location_id(&self, flat: usize) -> Result<LocationId> {
        let info = self.flat.get(flat).ok_or(Error::UnknownLocation(flat))?;
        let circuit = info.circuit as usize;
        Ok(LocationId {
            circuit,
            location: flat - self.offsets[circuit],
        })
    }

    pub fn kind(&self, flat: usize) -> Result<LocationKind> {
        self.flat.get(flat).map(|i| i.kind).ok_or(Error::UnknownLocation(flat))
    }

    /// All location ids of one round, in flattened order.
    pub fn location_ids(&self) -> impl Iterator<Item = LocationId> + '_ {
        (0..self.flat.len()).map(|f| self.location_id(f).expect("in range"))
    }
}

/// Circuit-level depolarizing noise with per-mechanism switches.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p: f64,
    pub cat_prep: bool,
    pub two_qubit: bool,
    pub one_qubit: bool,
    pub measurement: bool,
}

impl NoiseModel {
    pub fn depolarizing(p: f64) -> Self {
        Self {
            p,
            cat_prep: true,
            two_qubit: true,
            one_qubit: true,
            measurement: true,
        }
    }

    pub fn noiseless() -> Self {
        Self::depolarizing(0.0)
    }

    pub fn enabled(&self, kind: LocationKind) -> bool {
        match kind {
            LocationKind::CatPrep => self.cat_prep,
            LocationKind::TwoQubitGate => self.two_qubit,
            LocationKind::OneQubitGate => self.one_qubit,
            LocationKind::Measurement => self.measurement,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidConfig(format!("error rate {} outside [0, 1]", self.p)));
        }
        Ok(())
    }
}

/// Draws a uniformly random nontrivial fault for a failed location.
pub fn random_fault<R: Rng + ?Sized>(kind: LocationKind, rng: &mut R) -> FaultValue {
    match kind {
        LocationKind::CatPrep | LocationKind::OneQubitGate => {
            FaultValue::Pauli(SinglePauli::NONTRIVIAL[rng.gen_range(0..3)])
        }
        LocationKind::TwoQubitGate => {
            let v = rng.gen_range(1..16u8);
            FaultValue::PauliPair(SinglePauli::ALL[(v >> 2) as usize], SinglePauli::ALL[(v & 3) as usize])
        }
        LocationKind::Measurement => FaultValue::Flip,
    }
}

/// Supplies the faulty locations of each round.
///
/// Rounds are presented as a contiguous span of flattened locations starting
/// at `first`; `next_fault` yields strictly increasing offsets into the span.
pub trait FaultSource {
    fn begin_round(&mut self, first: usize, len: usize);
    fn next_fault(&mut self) -> Option<usize>;
    /// Fault at a location returned by `next_fault`; `None` discards it.
    fn fault_value(&mut self, kind: LocationKind) -> Option<FaultValue>;
}

/// No faults at all.
#[derive(Clone, Copy, Debug, Default)]
pub struct Noiseless;

impl FaultSource for Noiseless {
    fn begin_round(&mut self, _first: usize, _len: usize) {}

    fn next_fault(&mut self) -> Option<usize> {
        None
    }

    fn fault_value(&mut self, _kind: LocationKind) -> Option<FaultValue> {
        None
    }
}

/// iid failures with probability `p` per location, drawn by geometric skipping.
pub struct GeometricSampler<'r> {
    rng: &'r mut ChaCha8Rng,
    noise: NoiseModel,
    log_q: f64,
    gap: u64,
    pos: usize,
    len: usize,
}

impl<'r> GeometricSampler<'r> {
    pub fn new(noise: NoiseModel, rng: &'r mut ChaCha8Rng) -> Self {
        let log_q = (-noise.p).ln_1p();
        let mut s = Self {
            rng,
            noise,
            log_q,
            gap: 0,
            pos: 0,
            len: 0,
        };
        s.gap = s.draw_gap();
        s
    }

    fn draw_gap(&mut self) -> u64 {
        if self.noise.p <= 0.0 {
            return u64::MAX;
        }
        if self.noise.p >= 1.0 {
            return 0;
        }
        let u: f64 = 1.0 - self.rng.gen::<f64>();
        let g = (u.ln() / self.log_q).floor();
        if g >= u64::MAX as f64 {
            u64::MAX
        } else {
            g as u64
        }
    }
}

impl FaultSource for GeometricSampler<'_> {
    fn begin_round(&mut self, _first: usize, len: usize) {
        self.pos = 0;
        self.len = len;
    }

    fn next_fault(&mut self) -> Option<usize> {
        let remaining = (self.len - self.pos) as u64;
        if self.gap >= remaining {
            self.gap -= remaining;
            self.pos = self.len;
            return None;
        }
        let at = self.pos + self.gap as usize;
        self.pos = at + 1;
        self.gap = self.draw_gap();
        Some(at)
    }

    fn fault_value(&mut self, kind: LocationKind) -> Option<FaultValue> {
        self.noise.enabled(kind).then(|| random_fault(kind, self.rng))
    }
}

/// A fault pinned to a round (1-based, counted over every round the source
/// sees) and a flattened location.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PlacedFault {
    pub round: usize,
    pub flat: usize,
    pub value: FaultValue,
}

/// Deterministic faults at fixed places.
#[derive(Clone, Debug, Default)]
pub struct InjectedFaults {
    faults: Vec<PlacedFault>,
    round: usize,
    first: usize,
    pending: Vec<(usize, FaultValue)>,
    cursor: usize,
}

impl InjectedFaults {
    pub fn new(mut faults: Vec<PlacedFault>) -> Self {
        faults.sort_by_key(|f| (f.round, f.flat));
        Self {
            faults,
            ..Self::default()
        }
    }
}

impl FaultSource for InjectedFaults {
    fn begin_round(&mut self, first: usize, len: usize) {
        self.round += 1;
        self.first = first;
        self.cursor = 0;
        self.pending = self
            .faults
            .iter()
            .filter(|f| f.round == self.round && f.flat >= first && f.flat < first + len)
            .map(|f| (f.flat - first, f.value))
            .collect();
    }

    fn next_fault(&mut self) -> Option<usize> {
        self.pending.get(self.cursor).map(|&(pos, _)| pos)
    }

    fn fault_value(&mut self, _kind: LocationKind) -> Option<FaultValue> {
        let v = self.pending.get(self.cursor).map(|&(_, v)| v);
        self.cursor += 1;
        v
    }
}

/// Data error plus its syndrome, kept in sync.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameState {
    pub data: PauliOperator,
    pub syndrome: Syndrome,
}

impl FrameState {
    pub fn clean(code: &StabilizerCode) -> Self {
        Self {
            data: PauliOperator::identity(code.n()),
            syndrome: Syndrome::zeros(code.r()),
        }
    }

    pub fn with_error(code: &StabilizerCode, e: PauliOperator) -> Result<Self> {
        let syndrome = crate::stabilizer::syndrome_of(code, &e)?;
        Ok(Self { data: e, syndrome })
    }

    pub fn apply(&mut self, code: &StabilizerCode, qubit: usize, p: SinglePauli) {
        self.data.apply(qubit, p);
        code.xor_column(&mut self.syndrome, qubit, p);
    }

    pub fn apply_operator(&mut self, code: &StabilizerCode, op: &PauliOperator) {
        for q in op.support() {
            self.apply(code, q, op.get(q));
        }
    }
}

/// Runs rounds of syndrome extraction for one code.
#[derive(Clone, Debug)]
pub struct Extractor<'c> {
    code: &'c StabilizerCode,
    schedule: RoundSchedule,
}

impl<'c> Extractor<'c> {
    pub fn new(code: &'c StabilizerCode) -> Self {
        Self {
            code,
            schedule: build_round_schedule(code),
        }
    }

    pub fn code(&self) -> &'c StabilizerCode {
        self.code
    }

    pub fn schedule(&self) -> &RoundSchedule {
        &self.schedule
    }

    /// One full round; returns the `r` reported syndrome bits.
    pub fn sample_round<S: FaultSource + ?Sized>(&self, frame: &mut FrameState, source: &mut S) -> Syndrome {
        self.sample_circuits(frame, 0..self.schedule.circuits.len(), source)
    }

    /// Measures only the generators in `circuits` (one CSS sector, say) and
    /// returns their bits in order.
    pub fn sample_circuits<S: FaultSource + ?Sized>(
        &self,
        frame: &mut FrameState,
        circuits: Range<usize>,
        source: &mut S,
    ) -> Syndrome {
        let first = self.schedule.offsets[circuits.start];
        let len = self.schedule.span_len(&circuits);
        let mut reported = frame.syndrome.clone();
        source.begin_round(first, len);
        while let Some(pos) = source.next_fault() {
            let info = self.schedule.flat[first + pos];
            let Some(value) = source.fault_value(info.kind) else {
                continue;
            };
            let i = info.circuit as usize;
            let c = &self.schedule.circuits[i];
            let j = info.slot as usize;
            let (flip, data) = effect(info.kind, value, c.paulis[j]);
            if flip {
                reported.flip(i);
            }
            if data != SinglePauli::I {
                let q = c.support[j];
                self.code.xor_column_above(&mut reported, q, data, i);
                frame.apply(self.code, q, data);
            }
        }
        if circuits.start == 0 && circuits.end == self.schedule.circuits.len() {
            reported
        } else {
            reported.slice(circuits.start, circuits.end)
        }
    }

    /// One round with a single deterministic fault and no other noise.
    pub fn inject_fault(&self, frame: &mut FrameState, id: LocationId, value: FaultValue) -> Result<Syndrome> {
        let flat = self.schedule.flat_index(id)?;
        let kind = self.schedule.kind(flat)?;
        if !kind.is_legal(value) {
            return Err(Error::IllegalFault {
                location: format!("{kind:?} {id:?}"),
                fault: value.to_string(),
            });
        }
        let mut source = InjectedFaults::new(vec![PlacedFault { round: 1, flat, value }]);
        Ok(self.sample_round(frame, &mut source))
    }
}

/// (flips the reported bit, Pauli left on the paired data qubit)
#[inline]
fn effect(kind: LocationKind, value: FaultValue, generator_pauli: SinglePauli) -> (bool, SinglePauli) {
    match (kind, value) {
        (LocationKind::CatPrep, FaultValue::Pauli(p)) => {
            let data = if p.has_x() { generator_pauli } else { SinglePauli::I };
            (p.has_z(), data)
        }
        (LocationKind::TwoQubitGate, FaultValue::PauliPair(a, d)) => (a.has_z(), d),
        (LocationKind::OneQubitGate, FaultValue::Pauli(p)) => (p.has_x(), SinglePauli::I),
        (LocationKind::Measurement, FaultValue::Flip) => (true, SinglePauli::I),
        _ => (false, SinglePauli::I),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colorcode::build_hex_color_code;
    use crate::stabilizer::syndrome_of;

    /// Gate-by-gate Pauli-frame model of one round: explicit ancilla frames,
    /// controlled-Pauli conjugation and Hadamard swaps.
    fn reference_round(
        code: &StabilizerCode,
        schedule: &RoundSchedule,
        data: &mut PauliOperator,
        fault: Option<(usize, FaultValue)>,
    ) -> Syndrome {
        let mut out = Syndrome::zeros(code.r());
        for (i, c) in schedule.circuits().iter().enumerate() {
            let w = c.w();
            let at = |kind: LocationKind, j: usize| {
                fault.and_then(|(flat, v)| {
                    let id = schedule.location_id(flat).unwrap();
                    if id.circuit != i {
                        return None;
                    }
                    let (k, slot) = c.location(id.location).unwrap();
                    (k == kind && slot == j).then_some(v)
                })
            };
            let mut ax = vec![false; w];
            let mut az = vec![false; w];
            for j in 0..w {
                if let Some(FaultValue::Pauli(p)) = at(LocationKind::CatPrep, j) {
                    ax[j] ^= p.has_x();
                    az[j] ^= p.has_z();
                }
            }
            for j in 0..w {
                let q = c.support[j];
                let g = c.paulis[j];
                if ax[j] {
                    data.apply(q, g);
                }
                if data.get(q).anticommutes(g) {
                    az[j] ^= true;
                }
                if let Some(FaultValue::PauliPair(a, d)) = at(LocationKind::TwoQubitGate, j) {
                    ax[j] ^= a.has_x();
                    az[j] ^= a.has_z();
                    data.apply(q, d);
                }
            }
            for j in 0..w {
                std::mem::swap(&mut ax[j], &mut az[j]);
                if let Some(FaultValue::Pauli(p)) = at(LocationKind::OneQubitGate, j) {
                    ax[j] ^= p.has_x();
                    az[j] ^= p.has_z();
                }
            }
            let mut parity = ax.iter().filter(|&&b| b).count() % 2 == 1;
            for j in 0..w {
                if at(LocationKind::Measurement, j).is_some() {
                    parity ^= true;
                }
            }
            out.set(i, parity);
        }
        out
    }

    #[test]
    fn location_counts() {
        let code = build_hex_color_code(3).unwrap();
        let s = build_round_schedule(&code);
        assert_eq!(s.circuits().len(), 6);
        assert!(s.circuits().iter().all(|c| c.location_count() == 16));
        assert_eq!(s.location_count(), 96);
    }

    #[test]
    fn fault_catalogue_sizes() {
        assert_eq!(LocationKind::CatPrep.faults().len(), 3);
        assert_eq!(LocationKind::TwoQubitGate.faults().len(), 15);
        assert_eq!(LocationKind::OneQubitGate.faults().len(), 3);
        assert_eq!(LocationKind::Measurement.faults().len(), 1);
        for k in LocationKind::ALL {
            assert!(k.faults().into_iter().all(|f| k.is_legal(f)));
        }
        assert!(!LocationKind::Measurement.is_legal(FaultValue::Pauli(SinglePauli::X)));
        assert!(!LocationKind::TwoQubitGate.is_legal(FaultValue::PauliPair(SinglePauli::I, SinglePauli::I)));
    }

    #[test]
    fn matches_gate_level_reference_for_every_single_fault() {
        for d in [3, 5] {
            let code = build_hex_color_code(d).unwrap();
            let ex = Extractor::new(&code);
            let start = PauliOperator::single(code.n(), 2, SinglePauli::Y);
            for flat in 0..ex.schedule().location_count() {
                let kind = ex.schedule().kind(flat).unwrap();
                for v in kind.faults() {
                    let mut frame = FrameState::with_error(&code, start.clone()).unwrap();
                    let id = ex.schedule().location_id(flat).unwrap();
                    let got = ex.inject_fault(&mut frame, id, v).unwrap();
                    let mut data = start.clone();
                    let want = reference_round(&code, ex.schedule(), &mut data, Some((flat, v)));
                    assert_eq!(got, want, "d={d} flat={flat} fault={v}");
                    assert_eq!(frame.data, data);
                    assert_eq!(frame.syndrome, syndrome_of(&code, &data).unwrap());
                }
            }
        }
    }

    #[test]
    fn geometric_sampler_hits_every_location_at_p1() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut s = GeometricSampler::new(NoiseModel::depolarizing(1.0), &mut rng);
        s.begin_round(0, 5);
        let got: Vec<usize> = std::iter::from_fn(|| s.next_fault()).collect();
        assert_eq!(got, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn geometric_sampler_rate() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut s = GeometricSampler::new(NoiseModel::depolarizing(0.01), &mut rng);
        let mut hits = 0usize;
        for _ in 0..1000 {
            s.begin_round(0, 1000);
            while s.next_fault().is_some() {
                hits += 1;
            }
        }
        // mean 10_000, sd ~ 100
        assert!((9_500..10_500).contains(&hits), "{hits}");
    }

    #[test]
    fn illegal_injection_is_rejected() {
        let code = build_hex_color_code(3).unwrap();
        let ex = Extractor::new(&code);
        let mut frame = FrameState::clean(&code);
        let id = LocationId { circuit: 0, location: 15 };
        assert!(matches!(
            ex.inject_fault(&mut frame, id, FaultValue::Pauli(SinglePauli::X)),
            Err(Error::IllegalFault { .. })
        ));
        let bad = LocationId { circuit: 9, location: 0 };
        assert!(matches!(ex.inject_fault(&mut frame, bad, FaultValue::Flip), Err(Error::UnknownLocation(_))));
    }
}
