//! Deterministic fault injection: exhaustive single faults, sampled fault
//! pairs and the scripted `t = 1` scenarios.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decoders::{Action, DecoderKind};
use crate::error::{Error, Result};
use crate::extraction::{FaultValue, InjectedFaults, LocationId, PlacedFault};
use crate::harness::runner::shot_rng;
use crate::harness::shot::ShotRunner;
use crate::stabilizer::{coset_min_weight, PauliOperator, SinglePauli};

/// Generator count up to which residual weights are computed exactly.
pub const RESIDUAL_CHECK_GENERATORS: usize = 20;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultSweepReport {
    pub cases: u64,
    pub logical_errors: u64,
    /// Cases whose residual, up to stabilizers, outweighs the fault count.
    pub weight_violations: u64,
    /// Whether residual weights were checked at all.
    pub weights_checked: bool,
    pub first_failure: Option<String>,
}

impl FaultSweepReport {
    pub fn ok(&self) -> bool {
        self.logical_errors == 0 && self.weight_violations == 0
    }

    fn merge(mut self, other: FaultSweepReport) -> Self {
        self.cases += other.cases;
        self.logical_errors += other.logical_errors;
        self.weight_violations += other.weight_violations;
        self.weights_checked |= other.weights_checked;
        self.first_failure = self.first_failure.or(other.first_failure);
        self
    }
}

fn rounds_to_cover(runner: &ShotRunner<'_>) -> usize {
    // sector rounds in two-stage mode, at most two per full-round cap
    if runner.two_stage() {
        2 * runner.round_cap()
    } else {
        runner.round_cap()
    }
}

fn check_case(
    runner: &ShotRunner<'_>,
    faults: Vec<PlacedFault>,
    input: Option<&PauliOperator>,
    check_weight: bool,
) -> Result<FaultSweepReport> {
    let code = runner.code();
    let describe = |faults: &[PlacedFault]| {
        let parts: Vec<String> = faults
            .iter()
            .map(|f| format!("round {} location {} {}", f.round, f.flat, f.value))
            .collect();
        let input = input.map(|e| format!("input {e}; ")).unwrap_or_default();
        format!("{input}{}", parts.join(", "))
    };
    let n_faults = faults.len();
    let label = describe(&faults);
    let mut source = InjectedFaults::new(faults);
    let mut report = FaultSweepReport {
        cases: 1,
        weights_checked: check_weight,
        ..Default::default()
    };
    if check_weight {
        let trace = runner.trace(&mut source, input)?;
        report.logical_errors = u64::from(trace.result.logical_error);
        let w = coset_min_weight(code, &trace.residual, RESIDUAL_CHECK_GENERATORS)?;
        report.weight_violations = u64::from(w > n_faults);
    } else {
        report.logical_errors = u64::from(runner.run(&mut source, input)?.logical_error);
    }
    if !report.ok() {
        report.first_failure = Some(label);
    }
    Ok(report)
}

/// Every single fault in every round the policy can reach, plus every
/// weight-one input error without faults.
pub fn sweep_single_faults(runner: &ShotRunner<'_>) -> Result<FaultSweepReport> {
    let code = runner.code();
    let schedule = runner.extractor().schedule();
    let check_weight = code.r() <= RESIDUAL_CHECK_GENERATORS;
    let mut cases = Vec::new();
    for round in 1..=rounds_to_cover(runner) {
        for flat in 0..schedule.location_count() {
            for value in schedule.kind(flat)?.faults() {
                cases.push(PlacedFault { round, flat, value });
            }
        }
    }
    let faults = cases
        .into_par_iter()
        .map(|f| check_case(runner, vec![f], None, check_weight))
        .try_reduce(FaultSweepReport::default, |a, b| Ok(a.merge(b)))?;
    let mut inputs = FaultSweepReport::default();
    for q in 0..code.n() {
        for p in SinglePauli::NONTRIVIAL {
            let e = PauliOperator::single(code.n(), q, p);
            inputs = inputs.merge(check_case(runner, Vec::new(), Some(&e), check_weight)?);
        }
    }
    Ok(faults.merge(inputs))
}

/// One uniformly random fault: round, location and value each uniform.
fn random_placed<R: Rng>(runner: &ShotRunner<'_>, rng: &mut R) -> Result<PlacedFault> {
    let schedule = runner.extractor().schedule();
    let round = rng.gen_range(1..=rounds_to_cover(runner));
    let flat = rng.gen_range(0..schedule.location_count());
    let values = schedule.kind(flat)?.faults();
    let value = values[rng.gen_range(0..values.len())];
    Ok(PlacedFault { round, flat, value })
}

/// `pairs` ordered pairs of faults at distinct places, sampled uniformly.
pub fn sample_fault_pairs(runner: &ShotRunner<'_>, pairs: u64, seed: u64) -> Result<FaultSweepReport> {
    let check_weight = runner.code().r() <= 12;
    (0..pairs)
        .into_par_iter()
        .map(|i| {
            let mut rng = shot_rng(seed, i);
            let a = random_placed(runner, &mut rng)?;
            let b = loop {
                let b = random_placed(runner, &mut rng)?;
                if (b.round, b.flat) != (a.round, a.flat) {
                    break b;
                }
            };
            check_case(runner, vec![a, b], None, check_weight)
        })
        .try_reduce(FaultSweepReport::default, |a, b| Ok(a.merge(b)))
}

/// One scripted `t = 1` scenario and the round whose syndrome it should use.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioCheck {
    pub label: String,
    pub expected_round: usize,
    pub chosen_round: Option<usize>,
    pub delta: String,
}

impl ScenarioCheck {
    pub fn ok(&self) -> bool {
        self.chosen_round == Some(self.expected_round)
    }
}

/// Drives the strong `t = 1` policy through the seven single-fault scenarios
/// of three rounds: an input error, an ancilla measurement flip in round `i`
/// (syndrome differs from both neighbours) and a data error created in the
/// last circuit of round `i` (seen only from the next round).
pub fn single_fault_scenarios(runner: &ShotRunner<'_>) -> Result<Vec<ScenarioCheck>> {
    if runner.kind() != DecoderKind::Strong || runner.t() != 1 || runner.two_stage() {
        return Err(Error::InvalidConfig("scenarios are defined for the strong t = 1 decoder".into()));
    }
    let code = runner.code();
    let schedule = runner.extractor().schedule();
    let last = schedule.circuits().len() - 1;
    let w = schedule.circuits()[last].w();
    let measure = schedule.flat_index(LocationId {
        circuit: 0,
        location: 3 * schedule.circuits()[0].w(),
    })?;
    let gate = schedule.flat_index(LocationId {
        circuit: last,
        location: w,
    })?;
    // data error that anticommutes with the last generator
    let data = match schedule.circuits()[last].paulis[0] {
        SinglePauli::Z => SinglePauli::X,
        _ => SinglePauli::Z,
    };

    let mut rows: Vec<(String, usize, Vec<PlacedFault>, Option<PauliOperator>)> = vec![(
        "input error".into(),
        1,
        Vec::new(),
        Some(PauliOperator::single(code.n(), 0, SinglePauli::X)),
    )];
    for (i, expected) in [(1, 2), (2, 3), (3, 1)] {
        rows.push((
            format!("I({i})"),
            expected,
            vec![PlacedFault {
                round: i,
                flat: measure,
                value: FaultValue::Flip,
            }],
            None,
        ));
    }
    for (i, expected) in [(1, 2), (2, 1), (3, 1)] {
        rows.push((
            format!("II({i})"),
            expected,
            vec![PlacedFault {
                round: i,
                flat: gate,
                value: FaultValue::PauliPair(SinglePauli::I, data),
            }],
            None,
        ));
    }

    let mut out = Vec::new();
    for (label, expected_round, faults, input) in rows {
        let trace = runner.trace(&mut InjectedFaults::new(faults), input.as_ref())?;
        let chosen_round = match trace.decisions.last().map(|d| d.action) {
            Some(Action::StopCorrect { round }) => Some(round),
            _ => None,
        };
        let mut delta = String::new();
        for pair in trace.syndromes.windows(2) {
            delta.push(if pair[0] == pair[1] { '0' } else { '1' });
        }
        out.push(ScenarioCheck {
            label,
            expected_round,
            chosen_round,
            delta,
        });
    }
    Ok(out)
}
