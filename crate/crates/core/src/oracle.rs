//! Exhaustive ground truth for small formulas, plus the per-assignment
//! pattern sets (GCS) and the audits built on them.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{Assignment, Formula};
use crate::structure::{triads, AClausolaId, Structure, Triad, ENUMERATION_GUARD};

/// Default variable limit for [`brute_solve`].
pub const SOLVE_GUARD: usize = 26;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{n} variables exceeds the oracle guard of {guard}")]
    GuardExceeded { n: usize, guard: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "result", content = "model", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OracleResult {
    Sat(Assignment),
    Unsat,
}

impl OracleResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, OracleResult::Sat(_))
    }

    pub fn model(&self) -> Option<&Assignment> {
        match self {
            OracleResult::Sat(a) => Some(a),
            OracleResult::Unsat => None,
        }
    }
}

/// Clauses as bit tests over an assignment code (variable 1 most significant).
struct Compiled {
    n: usize,
    /// `(care, falsifying)`: the clause is false iff `code & care == falsifying`.
    clauses: Vec<(u64, u64)>,
}

impl Compiled {
    fn new(f: &Formula) -> Self {
        let n = f.num_vars();
        let clauses = f
            .clauses()
            .map(|c| {
                c.literals().iter().fold((0u64, 0u64), |(care, fals), l| {
                    let bit = 1u64 << (n - 1 - l.var.pos());
                    (care | bit, if l.positive { fals } else { fals | bit })
                })
            })
            .collect();
        Compiled { n, clauses }
    }

    fn satisfied(&self, code: u64) -> bool {
        self.clauses.iter().all(|&(care, fals)| code & care != fals)
    }

    fn models(&self) -> impl Iterator<Item = u64> + '_ {
        (0..1u64 << self.n).filter(move |&c| self.satisfied(c))
    }
}

fn guard(n: usize, limit: usize) -> Result<(), OracleError> {
    if n > limit {
        return Err(OracleError::GuardExceeded { n, guard: limit });
    }
    Ok(())
}

/// First model in ascending order (FALSE < TRUE, variable 1 most significant).
pub fn brute_solve(f: &Formula) -> Result<OracleResult, OracleError> {
    brute_solve_with_guard(f, SOLVE_GUARD)
}

pub fn brute_solve_with_guard(f: &Formula, limit: usize) -> Result<OracleResult, OracleError> {
    guard(f.num_vars(), limit)?;
    let c = Compiled::new(f);
    let first = c.models().next();
    Ok(match first {
        Some(code) => OracleResult::Sat(Assignment::from_code(c.n, code)),
        None => OracleResult::Unsat,
    })
}

/// Every model, ascending.
pub fn enumerate_solutions(f: &Formula) -> Result<Vec<Assignment>, OracleError> {
    enumerate_solutions_with_guard(f, ENUMERATION_GUARD)
}

pub fn enumerate_solutions_with_guard(f: &Formula, limit: usize) -> Result<Vec<Assignment>, OracleError> {
    guard(f.num_vars(), limit)?;
    let c = Compiled::new(f);
    Ok(c.models().map(|code| Assignment::from_code(c.n, code)).collect())
}

/// Second, independent decision procedure used to confirm disagreements:
/// chronological backtracking from the highest variable down, TRUE first,
/// pruning on clauses whose literals are all assigned false.
pub fn backtrack_solve(f: &Formula) -> Result<OracleResult, OracleError> {
    guard(f.num_vars(), SOLVE_GUARD)?;
    let n = f.num_vars();
    // Clauses indexed by their lowest variable: decided last when going down.
    let mut by_lowest: Vec<Vec<[(usize, bool); 3]>> = vec![Vec::new(); n];
    for c in f.clauses() {
        let l = c.literals();
        by_lowest[l[0].var.pos()].push(l.map(|x| (x.var.pos(), x.positive)));
    }
    let mut values = vec![None; n];
    fn go(p: usize, values: &mut Vec<Option<bool>>, by_lowest: &[Vec<[(usize, bool); 3]>]) -> bool {
        for value in [true, false] {
            values[p] = Some(value);
            let ok = by_lowest[p]
                .iter()
                .all(|c| c.iter().any(|&(v, pos)| values[v] == Some(pos)));
            if ok && (p == 0 || go(p - 1, values, by_lowest)) {
                return true;
            }
        }
        values[p] = None;
        false
    }
    if n == 0 || go(n - 1, &mut values, &by_lowest) {
        let a = Assignment::new(values.into_iter().map(|v| v.unwrap_or(false)).collect());
        Ok(OracleResult::Sat(a))
    } else {
        Ok(OracleResult::Unsat)
    }
}

/// An assignment's values on one triad.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TriadPattern {
    pub triad: Triad,
    pub pattern: [bool; 3],
}

impl TriadPattern {
    pub fn bits(&self) -> u8 {
        self.pattern.iter().fold(0, |acc, &v| (acc << 1) | u8::from(v))
    }

    pub fn aclausola(&self) -> AClausolaId {
        AClausolaId::new(self.triad, self.bits())
    }
}

/// The C(n,3) AClausole made true by `a`, one per triad, in row order.
pub fn gcs_of_assignment(a: &Assignment) -> Vec<AClausolaId> {
    triads(a.len())
        .map(|t| AClausolaId::new(t, a.pattern_on(t)))
        .collect()
}

pub fn gcs_contained(a: &Assignment, s: &Structure) -> bool {
    gcs_of_assignment(a).into_iter().all(|x| s.contains(x))
}

/// Distinct triad patterns over all given solutions.
pub fn true_value_triads(solutions: &[Assignment], n: usize) -> BTreeSet<TriadPattern> {
    solutions
        .iter()
        .flat_map(|a| {
            triads(n).map(move |t| {
                let [i, j, k] = t.vars();
                TriadPattern {
                    triad: t,
                    pattern: [a.value(i), a.value(j), a.value(k)],
                }
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coincidence {
    /// AClausola count of the saturated structure (0 when it has an empty row).
    pub lhs: usize,
    /// Distinct true-value triads over all models.
    pub rhs: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coverage {
    /// Present AClausole that no model's GCS contains.
    pub missing: Vec<AClausolaId>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MaximalityViolation {
    /// A model's GCS is not contained in the structure.
    ModelExcluded { model: Assignment, absent: AClausolaId },
    /// Removing this AClausola would lose no model.
    Removable { aclausola: AClausolaId },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Maximality {
    pub violations: Vec<MaximalityViolation>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub coincidence: Coincidence,
    pub coverage: Coverage,
    pub maximality: Maximality,
}

impl AuditReport {
    pub fn all_pass(&self) -> bool {
        self.coincidence.pass && self.coverage.pass && self.maximality.pass
    }
}

/// Checks the saturated structure against the exact model set of `f`:
/// pattern count versus distinct true-value triads, every AClausola covered
/// by some model, and every model's GCS present with nothing removable.
pub fn audit_corollaries(f: &Formula, saturated: &Structure) -> Result<AuditReport, OracleError> {
    let models = enumerate_solutions(f)?;
    let n = f.num_vars();
    let realized: BTreeSet<AClausolaId> = true_value_triads(&models, n)
        .iter()
        .map(TriadPattern::aclausola)
        .collect();

    let emptied = saturated.is_empty();
    let lhs = if emptied { 0 } else { saturated.count_aclausole() };
    let coincidence = Coincidence {
        lhs,
        rhs: realized.len(),
        pass: lhs == realized.len(),
    };

    let present: Vec<AClausolaId> = if emptied {
        Vec::new()
    } else {
        saturated.aclausole().collect()
    };
    let missing: Vec<AClausolaId> = present
        .iter()
        .copied()
        .filter(|a| !realized.contains(a))
        .collect();
    let coverage = Coverage {
        pass: missing.is_empty(),
        missing: missing.clone(),
    };

    let mut violations = Vec::new();
    for m in &models {
        if let Some(absent) = gcs_of_assignment(m).into_iter().find(|x| !saturated.contains(*x)) {
            violations.push(MaximalityViolation::ModelExcluded {
                model: m.clone(),
                absent,
            });
        }
    }
    violations.extend(
        missing
            .into_iter()
            .map(|aclausola| MaximalityViolation::Removable { aclausola }),
    );
    let maximality = Maximality {
        pass: violations.is_empty(),
        violations,
    };

    Ok(AuditReport {
        coincidence,
        coverage,
        maximality,
    })
}
