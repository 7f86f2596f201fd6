//! Reading a model off a saturated, non-empty structure.
//!
//! The procedure renames polarities so that chosen literals are always
//! positive ([`FlipVector`]), imposes the first AClausola, reduces, and then
//! picks a polarity for each remaining variable from the rows pairing it with
//! two already-decided variables. The final model is all-TRUE under the
//! recorded renaming. Every step that can contradict the completeness claim
//! reports an [`ExtractionFailure`] instead of panicking.
//!
//! [`Mode::Robust`] additionally imposes each choice and reduces, retrying
//! the opposite polarity on a wipeout. It is a labelled deviation used by
//! the harness to tell "the procedure fails" apart from "no consistent
//! completion exists".

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{Assignment, Formula, Literal, VarId};
use crate::structure::{AClausolaId, PolarityViolation, Structure, Triad};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Faithful,
    Robust,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Faithful => "faithful",
            Mode::Robust => "robust",
        })
    }
}

/// Per-variable polarity renaming. Applying it twice is the identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FlipVector(Vec<bool>);

impl FlipVector {
    pub fn new(n: usize) -> Self {
        FlipVector(vec![false; n])
    }

    pub fn is_flipped(&self, v: VarId) -> bool {
        self.0[v.pos()]
    }

    pub fn toggle(&mut self, v: VarId) {
        self.0[v.pos()] ^= true;
    }

    pub fn flipped_vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(|(p, _)| VarId::new(p as u32 + 1).expect("1-based"))
    }

    /// Flips every recorded variable in `s`.
    pub fn apply(&self, s: &Structure) -> Structure {
        let mut out = s.clone();
        for v in self.flipped_vars() {
            out.flip_variable_in_place(v);
        }
        out
    }

    /// All TRUE in the renamed space, mapped back.
    pub fn assignment(&self) -> Assignment {
        Assignment::new(self.0.iter().map(|&f| !f).collect())
    }
}

/// Toggles the polarity of `v` in every row containing it and records the
/// flip.
pub fn flip_variable(s: &Structure, v: VarId, fv: &FlipVector) -> (Structure, FlipVector) {
    let mut out = s.clone();
    out.flip_variable_in_place(v);
    let mut fv = fv.clone();
    fv.toggle(v);
    (out, fv)
}

/// How a polarity was picked for an undecided variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ChoiceRule {
    /// Exactly one polarity co-occurs with the positive decided pair.
    Row { triad: Triad },
    /// Every scanned row allowed both polarities.
    DefaultPositive,
    /// Robust mode only: propagation had already left a single polarity.
    Forced,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChoiceRecord {
    pub var: VarId,
    #[serde(flatten)]
    pub rule: ChoiceRule,
    /// Truth value given to the variable.
    pub value: bool,
    pub mode: Mode,
    /// Robust mode: the suggested polarity wiped out and the opposite was kept.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub retried: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChoiceTrace {
    /// First AClausola of the saturated structure, imposed to start.
    pub seed: Option<AClausolaId>,
    /// Variables left with a single polarity after the seed imposition.
    pub decided_after_seed: Vec<VarId>,
    /// One record per variable that still had both polarities.
    pub choices: Vec<ChoiceRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FailureKind {
    /// Imposing the seed AClausola and reducing emptied the structure.
    ImpositionWipeout,
    /// After the seed reduction, some variable shows different polarity sets
    /// in different rows.
    Theorem7Violation,
    /// A row pairing two positive decided variables with the current one has
    /// no AClausola extending that pair.
    UnsupportedPair,
    /// Robust mode: both polarities of a variable wipe out.
    DeadEnd,
    /// The assembled assignment does not satisfy the formula.
    VerificationFailed,
}

impl FailureKind {
    /// The claim a failure of this kind is evidence against.
    pub fn violated_claim(self) -> &'static str {
        match self {
            FailureKind::ImpositionWipeout => {
                "every AClausola of a saturated structure survives imposition of its literals plus reduction"
            }
            FailureKind::Theorem7Violation => {
                "after reduction, a variable has the same polarities in every row containing it"
            }
            FailureKind::UnsupportedPair => {
                "consistent choices keep every pair of chosen positive literals supported"
            }
            FailureKind::DeadEnd => "a saturated non-empty structure admits a consistent completion",
            FailureKind::VerificationFailed => {
                "the constructed all-TRUE assignment (under renaming) satisfies the formula"
            }
        }
    }
}

impl fmt::Display for FailureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionFailure {
    pub kind: FailureKind,
    pub detail: String,
    pub trace: ChoiceTrace,
    pub flips: FlipVector,
    /// Working structure (seed imposed, renamed) at the point of failure.
    pub snapshot: Structure,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<PolarityViolation>,
    /// The assembled assignment, for `VerificationFailed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignment: Option<Assignment>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractError {
    #[error("structure has an empty row at {0}; nothing to extract")]
    EmptyStructure(Triad),
    #[error("extraction needs at least 3 variables, got {0}")]
    TooFewVariables(usize),
    #[error("structure has {structure} variables but the formula has {formula}")]
    VariableMismatch { structure: usize, formula: usize },
    #[error("extraction failed: {} ({})", .0.kind, .0.detail)]
    Failed(Box<ExtractionFailure>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extraction {
    pub assignment: Assignment,
    pub trace: ChoiceTrace,
    pub flips: FlipVector,
    /// The input structure with every recorded flip applied.
    pub renamed: Structure,
    /// Final working structure (seed imposed and reduced, renamed).
    pub working: Structure,
}

/// The row-scan rule for one undecided variable `k`.
///
/// Scans decided pairs `(x, y)`, `x < y < k`, in ascending lexicographic
/// order and looks at which polarities of `k` occur with positive `x` and
/// `y`. Returns the polarity (true = positive) and the rule that fixed it.
pub fn consistent_choice(
    s_new: &Structure,
    k: VarId,
    decided: &[VarId],
) -> Result<(bool, ChoiceRule), Triad> {
    let mut below: Vec<VarId> = decided.iter().copied().filter(|&v| v < k).collect();
    below.sort();
    below.dedup();
    for (i, &x) in below.iter().enumerate() {
        for &y in &below[i + 1..] {
            let triad = Triad::new(x, y, k).expect("x < y < k");
            let row = s_new.row(triad).expect("variables in range");
            match (row >> 0b111 & 1 == 1, row >> 0b110 & 1 == 1) {
                (true, false) => return Ok((true, ChoiceRule::Row { triad })),
                (false, true) => return Ok((false, ChoiceRule::Row { triad })),
                (false, false) => return Err(triad),
                (true, true) => {}
            }
        }
    }
    Ok((true, ChoiceRule::DefaultPositive))
}

struct Run {
    renamed: Structure,
    working: Structure,
    flips: FlipVector,
    trace: ChoiceTrace,
}

impl Run {
    fn flip(&mut self, v: VarId) {
        self.renamed.flip_variable_in_place(v);
        self.working.flip_variable_in_place(v);
        self.flips.toggle(v);
    }

    fn fail(self, kind: FailureKind, detail: String) -> ExtractError {
        self.fail_with(kind, detail, Vec::new(), None)
    }

    fn fail_with(
        self,
        kind: FailureKind,
        detail: String,
        violations: Vec<PolarityViolation>,
        assignment: Option<Assignment>,
    ) -> ExtractError {
        ExtractError::Failed(Box::new(ExtractionFailure {
            kind,
            detail,
            trace: self.trace,
            flips: self.flips,
            snapshot: self.working,
            violations,
            assignment,
        }))
    }
}

/// Builds a model of `f` from its saturated structure `s`.
///
/// `s` must be a saturation fixpoint; that is not re-checked here.
pub fn extract_assignment(s: &Structure, f: &Formula, mode: Mode) -> Result<Extraction, ExtractError> {
    let n = s.num_vars();
    if n < 3 {
        return Err(ExtractError::TooFewVariables(n));
    }
    if f.num_vars() != n {
        return Err(ExtractError::VariableMismatch {
            structure: n,
            formula: f.num_vars(),
        });
    }
    if let Some(t) = s.first_empty_triad() {
        return Err(ExtractError::EmptyStructure(t));
    }

    let mut run = Run {
        renamed: s.clone(),
        working: s.clone(),
        flips: FlipVector::new(n),
        trace: ChoiceTrace::default(),
    };

    let seed = s.aclausole().next().expect("non-empty structure has an AClausola");
    run.trace.seed = Some(seed);
    for lit in seed.literals() {
        if !lit.positive {
            run.flip(lit.var);
        }
    }
    for v in seed.triad.vars() {
        run.working.impose_in_place(Literal::pos(v), None);
    }
    if let (Some(t), _) = run.working.reduce_in_place(None) {
        return Err(run.fail(
            FailureKind::ImpositionWipeout,
            format!("imposing {seed} and reducing empties row {t}"),
        ));
    }
    let violations = run.working.check_theorem7().expect("no empty row after reduce");
    if !violations.is_empty() {
        let detail = format!("{} polarity mismatches after seed reduction", violations.len());
        return Err(run.fail_with(FailureKind::Theorem7Violation, detail, violations, None));
    }

    let mut decided = Vec::new();
    let mut undecided = Vec::new();
    for p in 0..n {
        let v = VarId::new(p as u32 + 1).expect("1-based");
        match run.working.polarity_union(v).single() {
            Some(positive) => {
                if !positive {
                    run.flip(v);
                }
                decided.push(v);
            }
            None => undecided.push(v),
        }
    }
    run.trace.decided_after_seed = decided.clone();

    for k in undecided {
        let (mut positive, rule) = match run.working.polarity_union(k).single() {
            Some(p) if mode == Mode::Robust => (p, ChoiceRule::Forced),
            _ => match consistent_choice(&run.working, k, &decided) {
                Ok(choice) => choice,
                Err(triad) => {
                    let detail = format!("no AClausola in row {triad} extends the positive decided pair for variable {k}");
                    return Err(run.fail(FailureKind::UnsupportedPair, detail));
                }
            },
        };
        let mut retried = false;
        if mode == Mode::Robust {
            let attempt = |pol: bool| {
                let mut trial = run.working.clone();
                trial.impose_in_place(Literal::new(k, pol), None);
                trial.reduce_in_place(None).0.is_none().then_some(trial)
            };
            let next = match attempt(positive) {
                Some(t) => t,
                None => match attempt(!positive) {
                    Some(t) => {
                        positive = !positive;
                        retried = true;
                        t
                    }
                    None => {
                        let detail = format!("both polarities of variable {k} empty the structure");
                        return Err(run.fail(FailureKind::DeadEnd, detail));
                    }
                },
            };
            run.working = next;
        }
        if !positive {
            run.flip(k);
        }
        let at = decided.partition_point(|&v| v < k);
        decided.insert(at, k);
        run.trace.choices.push(ChoiceRecord {
            var: k,
            rule,
            value: !run.flips.is_flipped(k),
            mode,
            retried,
        });
    }

    let assignment = run.flips.assignment();
    if !f.evaluate(&assignment).expect("lengths match") {
        let detail = format!("assignment {assignment} does not satisfy the formula");
        return Err(run.fail_with(FailureKind::VerificationFailed, detail, Vec::new(), Some(assignment)));
    }
    Ok(Extraction {
        assignment,
        trace: run.trace,
        flips: run.flips,
        renamed: run.renamed,
        working: run.working,
    })
}
