//! Stopping policies over a growing syndrome history: traditional Shor
//! repetition, the adaptive strong protocol and the adaptive weak protocol,
//! plus the two-stage variant for CSS codes.
//!
//! Every policy decision is a pure function of the first syndrome being zero
//! or not and the difference vector so far; see [`evaluate`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::diffvec::{find_usable, min_faults, pairs_only, DifferenceVector, SyndromeHistory};
use crate::error::{Error, Result};
use crate::stabilizer::Syndrome;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderKind {
    Shor,
    Strong,
    Weak,
}

impl DecoderKind {
    pub const ALL: [DecoderKind; 3] = [DecoderKind::Shor, DecoderKind::Strong, DecoderKind::Weak];

    pub fn name(self) -> &'static str {
        match self {
            DecoderKind::Shor => "shor",
            DecoderKind::Strong => "strong",
            DecoderKind::Weak => "weak",
        }
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shor" => Ok(DecoderKind::Shor),
            "strong" => Ok(DecoderKind::Strong),
            "weak" => Ok(DecoderKind::Weak),
            _ => Err(Error::InvalidConfig(format!("unknown decoder {s:?}"))),
        }
    }
}

/// Which branch of the weak protocol applies, keyed on the first syndrome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum S1Branch {
    Nonzero,
    Zero,
    NotApplicable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Continue,
    /// Correct with the syndrome of this round (1-based).
    StopCorrect { round: usize },
    StopNoCorrection,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    UsableRun,
    PairCount,
    ShorRepeat,
    ShorCap,
    WeakNoCorrection,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyDecision {
    pub action: Action,
    pub rounds_used: usize,
    pub reason: Option<StopReason>,
}

impl PolicyDecision {
    pub fn is_stop(&self) -> bool {
        self.action != Action::Continue
    }
}

/// Closed-form maximum number of rounds. A zero budget always stops after
/// one round.
pub fn worst_case_rounds(kind: DecoderKind, t: usize, branch: S1Branch) -> usize {
    if t == 0 {
        return 1;
    }
    let odd = t % 2 == 1;
    match kind {
        DecoderKind::Shor => (t + 1) * (t + 1),
        DecoderKind::Strong if odd => ((t + 3) / 2).pow(2) - 1,
        DecoderKind::Strong => ((t + 2) / 2) * ((t + 4) / 2) - 1,
        DecoderKind::Weak => match branch {
            S1Branch::Nonzero if t == 1 => 2,
            S1Branch::Nonzero if odd => t.div_ceil(2) * ((t + 3) / 2),
            S1Branch::Nonzero => ((t + 2) / 2).pow(2),
            S1Branch::Zero if t == 1 => 1,
            S1Branch::Zero if odd => ((t + 3) / 2).pow(2) - 2,
            S1Branch::Zero => ((t + 2) / 2) * ((t + 4) / 2) - 2,
            S1Branch::NotApplicable => worst_case_rounds(kind, t, S1Branch::Nonzero)
                .max(worst_case_rounds(kind, t, S1Branch::Zero)),
        },
    }
}

/// Decision after `delta.len() + 1` rounds with fault budget `t`.
pub fn evaluate(kind: DecoderKind, t: usize, s1_zero: bool, delta: &DifferenceVector) -> (Action, Option<StopReason>) {
    let m = delta.len() + 1;
    let latest = (Action::StopCorrect { round: m }, Some(StopReason::PairCount));
    let cont = (Action::Continue, None);
    match kind {
        DecoderKind::Shor => {
            let repeated = m > t && delta.bits()[m - 1 - t..].iter().all(|&b| !b);
            if repeated {
                (Action::StopCorrect { round: m }, Some(StopReason::ShorRepeat))
            } else if m >= (t + 1) * (t + 1) {
                (Action::StopCorrect { round: m }, Some(StopReason::ShorCap))
            } else {
                cont
            }
        }
        DecoderKind::Strong => {
            if let Some(run) = find_usable(t, delta).first() {
                (Action::StopCorrect { round: run.start }, Some(StopReason::UsableRun))
            } else if pairs_only(delta) == t {
                latest
            } else {
                cont
            }
        }
        DecoderKind::Weak if t == 0 || (t == 1 && s1_zero) => {
            if s1_zero {
                (Action::StopNoCorrection, Some(StopReason::WeakNoCorrection))
            } else {
                (Action::StopCorrect { round: 1 }, Some(StopReason::UsableRun))
            }
        }
        DecoderKind::Weak if t == 1 => match delta.bits().first() {
            None => cont,
            Some(false) => (Action::StopCorrect { round: 1 }, Some(StopReason::UsableRun)),
            Some(true) => (Action::StopNoCorrection, Some(StopReason::WeakNoCorrection)),
        },
        DecoderKind::Weak if !s1_zero => {
            let shifted = delta.tail();
            if let Some(run) = find_usable(t - 1, &shifted).first() {
                (Action::StopCorrect { round: run.start + 1 }, Some(StopReason::UsableRun))
            } else if pairs_only(&shifted) == t - 1 {
                latest
            } else {
                cont
            }
        }
        DecoderKind::Weak => {
            let padded = delta.with_leading_zero();
            if let Some(run) = find_usable(t, &padded).first() {
                if run.start == 1 {
                    (Action::StopNoCorrection, Some(StopReason::WeakNoCorrection))
                } else {
                    (Action::StopCorrect { round: run.start - 1 }, Some(StopReason::UsableRun))
                }
            } else if pairs_only(&padded) == t {
                latest
            } else {
                cont
            }
        }
    }
}

/// One stopping policy instance, fed one syndrome per round.
#[derive(Clone, Debug)]
pub struct Policy {
    kind: DecoderKind,
    t: usize,
    history: SyndromeHistory,
    cap: usize,
    decision: Option<PolicyDecision>,
}

impl Policy {
    /// `t` is the fault budget; zero is allowed and stops after one round.
    pub fn new(kind: DecoderKind, t: usize) -> Self {
        Self {
            kind,
            t,
            history: SyndromeHistory::new(),
            cap: worst_case_rounds(kind, t, S1Branch::NotApplicable),
            decision: None,
        }
    }

    pub fn kind(&self) -> DecoderKind {
        self.kind
    }

    pub fn budget(&self) -> usize {
        self.t
    }

    pub fn history(&self) -> &SyndromeHistory {
        &self.history
    }

    pub fn decision(&self) -> Option<PolicyDecision> {
        self.decision
    }

    /// Round cap in force; tightened once the first syndrome is known.
    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Syndrome chosen for correction, once stopped with a correction.
    pub fn chosen_syndrome(&self) -> Option<&Syndrome> {
        match self.decision?.action {
            Action::StopCorrect { round } => Some(self.history.round(round)),
            _ => None,
        }
    }

    pub fn step(&mut self, syndrome: Syndrome) -> Result<PolicyDecision> {
        if let Some(d) = self.decision {
            return Err(Error::PolicyStopped(d.rounds_used));
        }
        self.history.push(syndrome)?;
        let m = self.history.m();
        let s1_zero = self.history.round(1).is_zero();
        if m == 1 && self.kind == DecoderKind::Weak {
            let branch = if s1_zero { S1Branch::Zero } else { S1Branch::Nonzero };
            self.cap = worst_case_rounds(self.kind, self.t, branch);
        }
        let (action, reason) = evaluate(self.kind, self.t, s1_zero, self.history.delta());
        let decision = PolicyDecision {
            action,
            rounds_used: m,
            reason,
        };
        if decision.is_stop() {
            self.decision = Some(decision);
        } else if m >= self.cap {
            return Err(Error::CapReached {
                cap: self.cap,
                delta: self.history.delta().to_string(),
            });
        }
        Ok(decision)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    X,
    Z,
}

/// Two-stage policy for CSS codes: X-sector rounds first with budget `t`,
/// then Z-sector rounds with the budget reduced by the faults already
/// evidenced in the X-sector difference vector.
#[derive(Clone, Debug)]
pub struct TwoStagePolicy {
    t: usize,
    x: Policy,
    z: Option<Policy>,
    t_oc: Option<usize>,
}

impl TwoStagePolicy {
    pub fn new(kind: DecoderKind, t: usize) -> Result<Self> {
        if kind == DecoderKind::Shor {
            return Err(Error::InvalidConfig("the two-stage refinement needs the strong or weak decoder".into()));
        }
        Ok(Self {
            t,
            x: Policy::new(kind, t),
            z: None,
            t_oc: None,
        })
    }

    /// Sector to measure next, `None` once both stages are done.
    pub fn next_sector(&self) -> Option<Sector> {
        match &self.z {
            None => Some(Sector::X),
            Some(z) if z.decision().is_none() => Some(Sector::Z),
            Some(_) => None,
        }
    }

    pub fn t_oc(&self) -> Option<usize> {
        self.t_oc
    }

    pub fn x_stage(&self) -> &Policy {
        &self.x
    }

    pub fn z_stage(&self) -> Option<&Policy> {
        self.z.as_ref()
    }

    /// Sector rounds used so far.
    pub fn rounds_used(&self) -> usize {
        self.x.history().m() + self.z.as_ref().map_or(0, |z| z.history().m())
    }

    /// Feeds one sector syndrome; the returned decision belongs to the stage
    /// that consumed it.
    pub fn step(&mut self, syndrome: Syndrome) -> Result<PolicyDecision> {
        match self.next_sector() {
            Some(Sector::X) => {
                let d = self.x.step(syndrome)?;
                if d.is_stop() {
                    let t_oc = min_faults(self.x.history().delta());
                    self.t_oc = Some(t_oc);
                    self.z = Some(Policy::new(self.x.kind(), self.t.saturating_sub(t_oc)));
                }
                Ok(d)
            }
            Some(Sector::Z) => self.z.as_mut().expect("stage two exists").step(syndrome),
            None => Err(Error::PolicyStopped(self.rounds_used())),
        }
    }
}
