//! One error-correction cycle: policy-driven rounds, recovery, verdict.

use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::decoders::{Action, DecoderKind, Policy, PolicyDecision, Sector, StopReason, TwoStagePolicy};
use crate::error::{Error, Result};
use crate::extraction::{Extractor, FaultSource, FrameState};
use crate::recovery::{decode, final_verdict, SyndromeTable, Verdict};
use crate::stabilizer::{PauliOperator, StabilizerCode, Syndrome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotResult {
    pub logical_error: bool,
    /// Rounds measured; sector rounds when running two stages.
    pub rounds: usize,
    pub stopped_by: StopReason,
}

/// A shot with everything needed to audit it.
#[derive(Clone, Debug)]
pub struct ShotTrace {
    pub result: ShotResult,
    pub decisions: Vec<PolicyDecision>,
    pub syndromes: Vec<Syndrome>,
    /// Data error after each round.
    pub frames: Vec<PauliOperator>,
    pub recovery: PauliOperator,
    /// Data error after recovery, before ideal error correction.
    pub residual: PauliOperator,
}

#[derive(Clone, Debug)]
pub struct ShotRunner<'a> {
    extractor: Extractor<'a>,
    table: &'a SyndromeTable,
    kind: DecoderKind,
    t: usize,
    two_stage: bool,
}

impl<'a> ShotRunner<'a> {
    pub fn new(
        code: &'a StabilizerCode,
        table: &'a SyndromeTable,
        kind: DecoderKind,
        t: usize,
        two_stage: bool,
    ) -> Result<Self> {
        if two_stage {
            if !code.is_css() {
                return Err(Error::NotCss);
            }
            TwoStagePolicy::new(kind, t)?;
        }
        Ok(Self {
            extractor: Extractor::new(code),
            table,
            kind,
            t,
            two_stage,
        })
    }

    pub fn code(&self) -> &'a StabilizerCode {
        self.extractor.code()
    }

    pub fn extractor(&self) -> &Extractor<'a> {
        &self.extractor
    }

    pub fn kind(&self) -> DecoderKind {
        self.kind
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn two_stage(&self) -> bool {
        self.two_stage
    }

    /// Round cap of the single-stream policy, used to size fault horizons.
    pub fn round_cap(&self) -> usize {
        Policy::new(self.kind, self.t).cap()
    }

    pub fn run<S: FaultSource + ?Sized>(&self, source: &mut S, input: Option<&PauliOperator>) -> Result<ShotResult> {
        let mut frame = self.start_frame(input)?;
        let recovery = if self.two_stage {
            self.rounds_two_stage(&mut frame, source, None)?
        } else {
            self.rounds_single(&mut frame, source, None)?
        };
        self.finish(frame, recovery)
    }

    pub fn trace<S: FaultSource + ?Sized>(&self, source: &mut S, input: Option<&PauliOperator>) -> Result<ShotTrace> {
        let mut frame = self.start_frame(input)?;
        let mut log = TraceLog::default();
        let recovery = if self.two_stage {
            self.rounds_two_stage(&mut frame, source, Some(&mut log))?
        } else {
            self.rounds_single(&mut frame, source, Some(&mut log))?
        };
        let rec_op = recovery.op.clone();
        let mut residual = frame.data.clone();
        residual.mul_assign(&rec_op);
        let result = self.finish(frame, recovery)?;
        Ok(ShotTrace {
            result,
            decisions: log.decisions,
            syndromes: log.syndromes,
            frames: log.frames,
            recovery: rec_op,
            residual,
        })
    }

    fn start_frame(&self, input: Option<&PauliOperator>) -> Result<FrameState> {
        let code = self.code();
        match input {
            Some(e) => FrameState::with_error(code, e.clone()),
            None => Ok(FrameState::clean(code)),
        }
    }

    fn rounds_single<S: FaultSource + ?Sized>(
        &self,
        frame: &mut FrameState,
        source: &mut S,
        mut log: Option<&mut TraceLog>,
    ) -> Result<Recovery> {
        let mut policy = Policy::new(self.kind, self.t);
        loop {
            let s = self.extractor.sample_round(frame, source);
            if let Some(log) = log.as_deref_mut() {
                log.syndromes.push(s.clone());
                log.frames.push(frame.data.clone());
            }
            let d = policy.step(s)?;
            if let Some(log) = log.as_deref_mut() {
                log.decisions.push(d);
            }
            if d.is_stop() {
                let op = match d.action {
                    Action::StopCorrect { round } => decode(self.table, self.code(), policy.history().round(round))?,
                    _ => PauliOperator::identity(self.code().n()),
                };
                return Ok(Recovery {
                    op,
                    rounds: d.rounds_used,
                    reason: d.reason.expect("stop carries a reason"),
                });
            }
        }
    }

    fn rounds_two_stage<S: FaultSource + ?Sized>(
        &self,
        frame: &mut FrameState,
        source: &mut S,
        mut log: Option<&mut TraceLog>,
    ) -> Result<Recovery> {
        let code = self.code();
        let rx = code.x_sector().len();
        let mut policy = TwoStagePolicy::new(self.kind, self.t)?;
        let mut last = None;
        while let Some(sector) = policy.next_sector() {
            let circuits = match sector {
                Sector::X => 0..rx,
                Sector::Z => rx..code.r(),
            };
            let s = self.extractor.sample_circuits(frame, circuits, source);
            if let Some(log) = log.as_deref_mut() {
                log.syndromes.push(s.clone());
                log.frames.push(frame.data.clone());
            }
            let d = policy.step(s)?;
            if let Some(log) = log.as_deref_mut() {
                log.decisions.push(d);
            }
            last = Some(d);
        }
        // X-sector bits locate Z errors and vice versa
        let z_part = sector_correction(self.table, Sector::Z, policy.x_stage())?;
        let x_part = match policy.z_stage() {
            Some(z) => sector_correction(self.table, Sector::X, z)?,
            None => BitVector::zeros(code.n()),
        };
        let last = last.expect("at least one round");
        Ok(Recovery {
            op: PauliOperator::from_parts(x_part, z_part)?,
            rounds: policy.rounds_used(),
            reason: last.reason.expect("stop carries a reason"),
        })
    }

    fn finish(&self, mut frame: FrameState, recovery: Recovery) -> Result<ShotResult> {
        frame.data.mul_assign(&recovery.op);
        let verdict = final_verdict(self.code(), self.table, &frame.data)?;
        Ok(ShotResult {
            logical_error: verdict == Verdict::LogicalError,
            rounds: recovery.rounds,
            stopped_by: recovery.reason,
        })
    }
}

fn sector_correction(table: &SyndromeTable, errors: Sector, stage: &Policy) -> Result<BitVector> {
    let sector = table.sector(errors);
    match stage.chosen_syndrome() {
        Some(s) => sector.decode_key(s.as_u64()),
        None => Ok(BitVector::zeros(sector.n())),
    }
}

struct Recovery {
    op: PauliOperator,
    rounds: usize,
    reason: StopReason,
}

#[derive(Default)]
struct TraceLog {
    decisions: Vec<PolicyDecision>,
    syndromes: Vec<Syndrome>,
    frames: Vec<PauliOperator>,
}
