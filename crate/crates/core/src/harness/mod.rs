//! End-to-end pipeline, differential classification against the oracle,
//! seeded campaigns with counterexample bundles, and counter scaling.

mod campaign;
mod generate;
mod scaling;

pub use campaign::{
    differential_run, plan_instances, replay_bundle, run_instances, run_one, AuditSummary,
    ClauseCount, CounterSummary, CounterexampleRecord, Instance, InstanceRecord, MethodSummary,
    ReplayResult, RunConfig, RunError, RunReport,
};
pub use generate::{generate_instance, GenerateError, InstanceSpec, GENERATOR};
pub use scaling::{scaling_report, ScalingConfig, ScalingError, ScalingReport, ScalingRow};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cnf::{Assignment, Formula};
use crate::extraction::{extract_assignment, ChoiceTrace, ExtractError, ExtractionFailure, Mode};
use crate::oracle::{brute_solve, OracleResult};
use crate::saturation::{saturate, SaturationStats};
use crate::structure::{build_ci3sat, Structure, Triad};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MethodStatus {
    UnsatEmpty,
    SatExtracted,
    ExtractionFailed,
}

impl fmt::Display for MethodStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MethodStatus::UnsatEmpty => "UNSAT_EMPTY",
            MethodStatus::SatExtracted => "SAT_EXTRACTED",
            MethodStatus::ExtractionFailed => "EXTRACTION_FAILED",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MethodResult {
    pub status: MethodStatus,
    pub assignment: Option<Assignment>,
    pub mode: Mode,
    /// Fewer than 4 variables: the model comes from the exhaustive oracle.
    pub delegated: bool,
    pub ci3sat_count: usize,
    pub saturated_count: usize,
    pub empty_row: Option<Triad>,
    pub stats: SaturationStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<ChoiceTrace>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<ExtractionFailure>,
    #[serde(skip)]
    pub saturated: Structure,
}

/// build → saturate → empty? UNSAT : extract.
pub fn solve_with_method(f: &Formula, mode: Mode) -> MethodResult {
    let ci3sat = build_ci3sat(f);
    let sat = saturate(&ci3sat);
    let mut result = MethodResult {
        status: MethodStatus::UnsatEmpty,
        assignment: None,
        mode,
        delegated: false,
        ci3sat_count: ci3sat.count_aclausole(),
        saturated_count: sat.structure.count_aclausole(),
        empty_row: sat.empty,
        stats: sat.stats,
        trace: None,
        failure: None,
        saturated: sat.structure,
    };
    if result.empty_row.is_some() {
        return result;
    }
    if f.num_vars() < 4 {
        result.delegated = true;
        // n <= 3 is always within the oracle guard.
        match brute_solve(f).expect("tiny formula") {
            OracleResult::Sat(a) => {
                result.status = MethodStatus::SatExtracted;
                result.assignment = Some(a);
            }
            OracleResult::Unsat => result.status = MethodStatus::ExtractionFailed,
        }
        return result;
    }
    match extract_assignment(&result.saturated, f, mode) {
        Ok(ex) => {
            result.status = MethodStatus::SatExtracted;
            result.assignment = Some(ex.assignment);
            result.trace = Some(ex.trace);
        }
        Err(ExtractError::Failed(fail)) => {
            result.status = MethodStatus::ExtractionFailed;
            result.trace = Some(fail.trace.clone());
            result.failure = Some(*fail);
        }
        Err(e) => unreachable!("pipeline guarantees extraction preconditions: {e}"),
    }
    result
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    AgreeSat,
    AgreeUnsat,
    SoundnessViolation,
    CompletenessCounterexample,
    ExtractionCounterexample,
    Unverified,
}

impl Outcome {
    pub const ALL: [Outcome; 6] = [
        Outcome::AgreeSat,
        Outcome::AgreeUnsat,
        Outcome::SoundnessViolation,
        Outcome::CompletenessCounterexample,
        Outcome::ExtractionCounterexample,
        Outcome::Unverified,
    ];

    pub fn is_agree(self) -> bool {
        matches!(self, Outcome::AgreeSat | Outcome::AgreeUnsat)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::AgreeSat => "AGREE_SAT",
            Outcome::AgreeUnsat => "AGREE_UNSAT",
            Outcome::SoundnessViolation => "SOUNDNESS_VIOLATION",
            Outcome::CompletenessCounterexample => "COMPLETENESS_COUNTEREXAMPLE",
            Outcome::ExtractionCounterexample => "EXTRACTION_COUNTEREXAMPLE",
            Outcome::Unverified => "UNVERIFIED",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Pure classification table. `oracle == None` means the oracle was skipped.
///
/// An extracted model against an UNSAT oracle cannot happen with a correct
/// oracle (the model is verified), so it is reported as a soundness alarm.
pub fn classify(status: MethodStatus, oracle: Option<&OracleResult>) -> Outcome {
    let Some(oracle) = oracle else {
        return Outcome::Unverified;
    };
    match (status, oracle.is_sat()) {
        (MethodStatus::SatExtracted, true) => Outcome::AgreeSat,
        (MethodStatus::UnsatEmpty, false) => Outcome::AgreeUnsat,
        (MethodStatus::UnsatEmpty, true) => Outcome::SoundnessViolation,
        (MethodStatus::SatExtracted, false) => Outcome::SoundnessViolation,
        (MethodStatus::ExtractionFailed, false) => Outcome::CompletenessCounterexample,
        (MethodStatus::ExtractionFailed, true) => Outcome::ExtractionCounterexample,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture;

    #[test]
    fn pipeline_on_example() {
        let r = solve_with_method(&fixture::example_formula(), Mode::Faithful);
        assert_eq!(r.status, MethodStatus::SatExtracted);
        assert_eq!(r.ci3sat_count, 20);
        assert_eq!(r.saturated_count, 7);
        let model = r.assignment.unwrap().to_string();
        assert!(fixture::EXAMPLE_MODELS.contains(&model.as_str()));
    }

    #[test]
    fn pipeline_on_full_universe() {
        let f = generate_instance(InstanceSpec { seed: 1, n: 4, m: 32 }).unwrap();
        let r = solve_with_method(&f, Mode::Faithful);
        assert_eq!(r.status, MethodStatus::UnsatEmpty);
        assert!(r.assignment.is_none());
    }

    #[test]
    fn pipeline_on_empty_formula() {
        let r = solve_with_method(&Formula::empty(5), Mode::Faithful);
        assert_eq!(r.status, MethodStatus::SatExtracted);
        assert_eq!(r.assignment, Some(Assignment::all(5, true)));
    }

    #[test]
    fn tiny_formulas_are_delegated() {
        let r = solve_with_method(&Formula::empty(3), Mode::Faithful);
        assert!(r.delegated);
        assert_eq!(r.status, MethodStatus::SatExtracted);
        let r = solve_with_method(&fixture::full_triad_formula(3), Mode::Faithful);
        assert_eq!(r.status, MethodStatus::UnsatEmpty);
    }

    #[test]
    fn classification_table() {
        let sat = OracleResult::Sat(Assignment::all(4, true));
        let unsat = OracleResult::Unsat;
        use MethodStatus::*;
        assert_eq!(classify(SatExtracted, Some(&sat)), Outcome::AgreeSat);
        assert_eq!(classify(UnsatEmpty, Some(&unsat)), Outcome::AgreeUnsat);
        assert_eq!(classify(UnsatEmpty, Some(&sat)), Outcome::SoundnessViolation);
        assert_eq!(classify(SatExtracted, Some(&unsat)), Outcome::SoundnessViolation);
        assert_eq!(classify(ExtractionFailed, Some(&unsat)), Outcome::CompletenessCounterexample);
        assert_eq!(classify(ExtractionFailed, Some(&sat)), Outcome::ExtractionCounterexample);
        for s in [SatExtracted, UnsatEmpty, ExtractionFailed] {
            assert_eq!(classify(s, None), Outcome::Unverified);
        }
    }
}
