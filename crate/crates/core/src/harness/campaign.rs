use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::generate::{generate_instance, GenerateError, InstanceSpec, GENERATOR};
use super::{classify, solve_with_method, MethodResult, MethodStatus, Outcome};
use crate::cnf::{parse_dimacs, write_dimacs, Assignment, Formula, ParseError};
use crate::extraction::{ExtractionFailure, FailureKind, Mode};
use crate::oracle::{audit_corollaries, backtrack_solve, brute_solve_with_guard, AuditReport, OracleResult};
use crate::saturation::SaturationStats;
use crate::structure::{universe_size, Triad, ENUMERATION_GUARD};
use crate::TOOL_VERSION;

/// How many clauses each generated instance gets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClauseCount {
    /// `m = round(d · n)` with `d` uniform in `[min, max]`.
    Density { min: f64, max: f64 },
    /// `m` uniform in `[min, max]`, clamped to the clause universe.
    Range { min: usize, max: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub count: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub clauses: ClauseCount,
    pub mode: Mode,
    /// Instances with more variables are reported UNVERIFIED.
    pub verify_max_n: usize,
    /// Labels of explicitly supplied formulas, when not generating.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pinned: Vec<String>,
    /// Bundle directory; kept out of the serialized report so reports from
    /// different directories compare equal.
    #[serde(skip)]
    pub outdir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            count: 100,
            n_min: 4,
            n_max: 6,
            clauses: ClauseCount::Density { min: 4.0, max: 4.0 },
            mode: Mode::Faithful,
            verify_max_n: ENUMERATION_GUARD,
            pinned: Vec::new(),
            outdir: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid run configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("{path}: malformed record: {source}")]
    Record { path: PathBuf, source: serde_json::Error },
    #[error("instances {0:?} need a bundle but no output directory was given")]
    Unpersisted(Vec<String>),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub id: String,
    pub spec: Option<InstanceSpec>,
    pub formula: Formula,
}

#[derive(Debug, Clone)]
pub struct InstanceRecord {
    pub id: String,
    pub spec: Option<InstanceSpec>,
    pub formula: Formula,
    pub method: MethodResult,
    pub oracle: Option<OracleResult>,
    /// Second oracle, run only for outcomes that would be persisted.
    pub confirmation: Option<OracleResult>,
    pub oracle_disagreement: bool,
    pub outcome: Outcome,
    pub audit: Option<AuditReport>,
    pub verify_max_n: usize,
}

impl InstanceRecord {
    pub fn corollary_failure(&self) -> bool {
        self.audit.as_ref().is_some_and(|a| !a.all_pass())
    }

    pub fn needs_bundle(&self) -> bool {
        !self.outcome.is_agree() || self.corollary_failure()
    }

    pub fn within_bounds(&self) -> bool {
        self.method.stats.within_bounds(self.formula.num_vars())
    }

    fn reasons(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.outcome.is_agree() {
            out.push(self.outcome.as_str().to_string());
        }
        if self.oracle_disagreement {
            out.push("ORACLE_DISAGREEMENT".to_string());
        }
        if self.corollary_failure() {
            out.push("COROLLARY_COUNTEREXAMPLE".to_string());
        }
        out
    }

    pub fn counterexample(&self) -> CounterexampleRecord {
        let failure = self.method.failure.as_ref();
        CounterexampleRecord {
            instance_id: self.id.clone(),
            spec: self.spec,
            generator: GENERATOR.to_string(),
            tool_version: TOOL_VERSION.to_string(),
            mode: self.method.mode,
            verify_max_n: self.verify_max_n,
            n: self.formula.num_vars(),
            m: self.formula.len(),
            outcome: self.outcome,
            reasons: self.reasons(),
            method: MethodSummary {
                status: self.method.status,
                assignment: self.method.assignment.clone(),
                delegated: self.method.delegated,
                ci3sat_count: self.method.ci3sat_count,
                saturated_count: self.method.saturated_count,
                empty_row: self.method.empty_row,
                stats: self.method.stats,
                failure_kind: failure.map(|f| f.kind),
                failure_detail: failure.map(|f| f.detail.clone()),
                violated_claim: failure.map(|f| f.kind.violated_claim().to_string()),
            },
            oracle: self.oracle.clone(),
            confirmation: self.confirmation.clone(),
            audit: self.audit.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MethodSummary {
    pub status: MethodStatus,
    pub assignment: Option<Assignment>,
    pub delegated: bool,
    pub ci3sat_count: usize,
    pub saturated_count: usize,
    pub empty_row: Option<Triad>,
    pub stats: SaturationStats,
    pub failure_kind: Option<FailureKind>,
    pub failure_detail: Option<String>,
    pub violated_claim: Option<String>,
}

/// Contents of `outcome.json` in a bundle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CounterexampleRecord {
    pub instance_id: String,
    pub spec: Option<InstanceSpec>,
    pub generator: String,
    pub tool_version: String,
    pub mode: Mode,
    pub verify_max_n: usize,
    pub n: usize,
    pub m: usize,
    pub outcome: Outcome,
    pub reasons: Vec<String>,
    pub method: MethodSummary,
    pub oracle: Option<OracleResult>,
    pub confirmation: Option<OracleResult>,
    pub audit: Option<AuditReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
struct TraceFile<'a> {
    trace: Option<&'a crate::extraction::ChoiceTrace>,
    failure: Option<&'a ExtractionFailure>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditSummary {
    /// Agreeing instances on which the corollary audit ran.
    pub audited: u64,
    pub coincidence_pass: u64,
    pub coverage_pass: u64,
    pub maximality_pass: u64,
    pub fail_ids: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterSummary {
    pub total_passes: u64,
    pub max_passes: u64,
    pub total_tests_run: u64,
    pub total_reduce_calls: u64,
    pub total_impose_calls: u64,
    pub total_deletions: u64,
    pub max_deletions: u64,
    /// Instances whose counters exceeded the 8·C(n,3) bounds.
    pub bound_violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub tool_version: String,
    pub generator: String,
    pub instances: u64,
    pub tallies: BTreeMap<Outcome, u64>,
    pub extraction_failures: BTreeMap<FailureKind, u64>,
    pub audit: AuditSummary,
    pub counters: CounterSummary,
    /// Instance ids written as bundles, in instance order.
    pub counterexamples: Vec<String>,
    pub oracle_disagreements: Vec<String>,
}

impl RunReport {
    pub fn tally(&self, o: Outcome) -> u64 {
        self.tallies.get(&o).copied().unwrap_or(0)
    }

    pub fn all_agree(&self) -> bool {
        self.instances == self.tally(Outcome::AgreeSat) + self.tally(Outcome::AgreeUnsat)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

fn validate(config: &RunConfig) -> Result<(), RunError> {
    if config.n_min < 4 || config.n_max < config.n_min {
        return Err(RunError::Config(format!(
            "variable range {}..={} must satisfy 4 <= min <= max",
            config.n_min, config.n_max
        )));
    }
    match config.clauses {
        ClauseCount::Density { min, max } if !(min >= 0.0 && max >= min && max.is_finite()) => Err(
            RunError::Config(format!("density range {min}..={max} is invalid")),
        ),
        ClauseCount::Range { min, max } if max < min => {
            Err(RunError::Config(format!("clause range {min}..={max} is empty")))
        }
        _ => Ok(()),
    }
}

/// The instance list a config describes: specs drawn in order from one
/// ChaCha stream seeded by `config.seed`.
pub fn plan_instances(config: &RunConfig) -> Result<Vec<Instance>, RunError> {
    validate(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut specs = Vec::with_capacity(config.count);
    for _ in 0..config.count {
        let n = rng.gen_range(config.n_min..=config.n_max);
        let universe = universe_size(n);
        let m = match config.clauses {
            ClauseCount::Density { min, max } => {
                let d = if max > min { rng.gen_range(min..=max) } else { min };
                ((d * n as f64).round() as usize).min(universe)
            }
            ClauseCount::Range { min, max } => {
                let hi = max.min(universe);
                rng.gen_range(min.min(hi)..=hi)
            }
        };
        specs.push(InstanceSpec { seed: rng.gen(), n, m });
    }
    specs
        .into_iter()
        .enumerate()
        .map(|(i, spec)| {
            Ok(Instance {
                id: format!("{i:06}"),
                spec: Some(spec),
                formula: generate_instance(spec)?,
            })
        })
        .collect()
}

/// Runs the method and the oracle on one instance and classifies it.
pub fn run_one(inst: &Instance, mode: Mode, verify_max_n: usize) -> InstanceRecord {
    let f = &inst.formula;
    let method = solve_with_method(f, mode);
    let n = f.num_vars();
    let oracle = (n <= verify_max_n).then(|| brute_solve_with_guard(f, verify_max_n).expect("within guard"));
    let mut outcome = classify(method.status, oracle.as_ref());
    if outcome == Outcome::AgreeSat {
        let model = method.assignment.as_ref().expect("extracted model");
        if !f.evaluate(model).unwrap_or(false) {
            outcome = Outcome::SoundnessViolation;
        }
    }

    let mut confirmation = None;
    let mut oracle_disagreement = false;
    if !outcome.is_agree() && outcome != Outcome::Unverified {
        let second = backtrack_solve(f).expect("within guard");
        let second_ok = match &second {
            OracleResult::Sat(a) => f.evaluate(a).unwrap_or(false),
            OracleResult::Unsat => true,
        };
        let first_sat = oracle.as_ref().is_some_and(OracleResult::is_sat);
        if !second_ok || second.is_sat() != first_sat {
            oracle_disagreement = true;
            outcome = Outcome::Unverified;
        }
        confirmation = Some(second);
    }

    let audit = (outcome != Outcome::Unverified && n <= ENUMERATION_GUARD)
        .then(|| audit_corollaries(f, &method.saturated).expect("within guard"));

    InstanceRecord {
        id: inst.id.clone(),
        spec: inst.spec,
        formula: f.clone(),
        method,
        oracle,
        confirmation,
        oracle_disagreement,
        outcome,
        audit,
        verify_max_n,
    }
}

fn bundle_files(rec: &InstanceRecord) -> [(&'static str, String); 4] {
    let outcome = serde_json::to_string_pretty(&rec.counterexample()).expect("record serializes") + "\n";
    let trace = TraceFile {
        trace: rec.method.trace.as_ref(),
        failure: rec.method.failure.as_ref(),
    };
    let trace = serde_json::to_string_pretty(&trace).expect("trace serializes") + "\n";
    [
        ("formula.cnf", write_dimacs(&rec.formula)),
        ("structure.dump", rec.method.saturated.dump()),
        ("trace.json", trace),
        ("outcome.json", outcome),
    ]
}

fn write_bundle(dir: &Path, rec: &InstanceRecord) -> Result<(), RunError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    for (name, contents) in bundle_files(rec) {
        let path = dir.join(name);
        fs::write(&path, contents).map_err(io_err(&path))?;
    }
    Ok(())
}

pub fn differential_run(config: &RunConfig) -> Result<RunReport, RunError> {
    let instances = plan_instances(config)?;
    run_instances(config, &instances)
}

/// Runs `instances` in parallel, merges in instance order, persists bundles
/// and aggregates the report.
pub fn run_instances(config: &RunConfig, instances: &[Instance]) -> Result<RunReport, RunError> {
    let records: Vec<InstanceRecord> = instances
        .par_iter()
        .map(|inst| run_one(inst, config.mode, config.verify_max_n))
        .collect();

    let needing: Vec<&InstanceRecord> = records.iter().filter(|r| r.needs_bundle()).collect();
    match &config.outdir {
        Some(dir) => {
            for rec in &needing {
                write_bundle(&dir.join(&rec.id), rec)?;
            }
        }
        None if !needing.is_empty() => {
            return Err(RunError::Unpersisted(needing.iter().map(|r| r.id.clone()).collect()));
        }
        None => {}
    }

    let mut tallies: BTreeMap<Outcome, u64> = Outcome::ALL.iter().map(|&o| (o, 0)).collect();
    let mut extraction_failures = BTreeMap::new();
    let mut audit = AuditSummary::default();
    let mut counters = CounterSummary::default();
    let mut oracle_disagreements = Vec::new();
    for rec in &records {
        *tallies.entry(rec.outcome).or_default() += 1;
        if let Some(f) = &rec.method.failure {
            *extraction_failures.entry(f.kind).or_default() += 1;
        }
        if rec.oracle_disagreement {
            oracle_disagreements.push(rec.id.clone());
        }
        if let (true, Some(a)) = (rec.outcome.is_agree(), &rec.audit) {
            audit.audited += 1;
            audit.coincidence_pass += u64::from(a.coincidence.pass);
            audit.coverage_pass += u64::from(a.coverage.pass);
            audit.maximality_pass += u64::from(a.maximality.pass);
            if !a.all_pass() {
                audit.fail_ids.push(rec.id.clone());
            }
        }
        let s = rec.method.stats;
        counters.total_passes += s.passes;
        counters.max_passes = counters.max_passes.max(s.passes);
        counters.total_tests_run += s.tests_run;
        counters.total_reduce_calls += s.reduce_calls;
        counters.total_impose_calls += s.impose_calls;
        counters.total_deletions += s.aclausole_deleted;
        counters.max_deletions = counters.max_deletions.max(s.aclausole_deleted);
        if !rec.within_bounds() {
            counters.bound_violations.push(rec.id.clone());
        }
    }

    Ok(RunReport {
        config: config.clone(),
        tool_version: TOOL_VERSION.to_string(),
        generator: GENERATOR.to_string(),
        instances: records.len() as u64,
        tallies,
        extraction_failures,
        audit,
        counters,
        counterexamples: needing.iter().map(|r| r.id.clone()).collect(),
        oracle_disagreements,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayResult {
    pub instance_id: String,
    pub recorded: Outcome,
    pub replayed: Outcome,
    /// Every bundle file regenerated byte-for-byte.
    pub identical: bool,
}

#[derive(Deserialize)]
struct RecordHead {
    instance_id: String,
    spec: Option<InstanceSpec>,
    mode: Mode,
    verify_max_n: usize,
    outcome: Outcome,
}

/// Re-runs a bundle directory and compares every regenerated file.
pub fn replay_bundle(dir: &Path) -> Result<ReplayResult, RunError> {
    let record_path = dir.join("outcome.json");
    let text = fs::read_to_string(&record_path).map_err(io_err(&record_path))?;
    let head: RecordHead = serde_json::from_str(&text).map_err(|source| RunError::Record {
        path: record_path.clone(),
        source,
    })?;
    let cnf_path = dir.join("formula.cnf");
    let cnf = fs::read_to_string(&cnf_path).map_err(io_err(&cnf_path))?;
    let formula = parse_dimacs(&cnf)
        .map_err(|source| RunError::Parse {
            path: cnf_path.clone(),
            source,
        })?
        .formula;

    let mut identical = true;
    if let Some(spec) = head.spec {
        identical &= generate_instance(spec)? == formula;
    }
    let inst = Instance {
        id: head.instance_id.clone(),
        spec: head.spec,
        formula,
    };
    let rec = run_one(&inst, head.mode, head.verify_max_n);
    for (name, contents) in bundle_files(&rec) {
        let path = dir.join(name);
        let on_disk = fs::read_to_string(&path).map_err(io_err(&path))?;
        identical &= on_disk == contents;
    }
    Ok(ReplayResult {
        instance_id: head.instance_id,
        recorded: head.outcome,
        replayed: rec.outcome,
        identical,
    })
}
