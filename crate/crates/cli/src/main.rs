//! `triadsat` command-line front end.
//!
//! Exit codes: 10 SAT, 20 UNSAT, 30 method failure or counterexample,
//! 1 usage or I/O error, 0 for report-only commands that found nothing.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use triadsat::extraction::Mode;
use triadsat::harness::{
    differential_run, replay_bundle, run_instances, scaling_report, ClauseCount, Instance,
    RunConfig, RunReport, ScalingConfig,
};
use triadsat::oracle::{
    audit_corollaries, brute_solve, enumerate_solutions, AuditReport, OracleResult,
};
use triadsat::saturation::saturate;
use triadsat::structure::build_ci3sat;
use triadsat::{fixture, parse_dimacs, solve_with_method, Formula, MethodStatus};

const EXIT_SAT: u8 = 10;
const EXIT_UNSAT: u8 = 20;
const EXIT_FAILURE: u8 = 30;
const EXIT_ERROR: u8 = 1;

#[derive(Parser)]
#[command(name = "triadsat", version, about = "Triad-structure 3SAT method with a differential verification harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the method on a DIMACS file.
    Solve {
        path: PathBuf,
        /// Impose each choice and backtrack once on a wipeout.
        #[arg(long)]
        robust: bool,
        /// Write the method result as JSON to this path.
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
        /// Print the extraction trace to stderr.
        #[arg(long)]
        trace: bool,
    },
    /// Exhaustive reference solver.
    Oracle {
        path: PathBuf,
        /// List every model instead of the first.
        #[arg(long)]
        enumerate: bool,
    },
    /// Seeded differential campaign against the oracle.
    Fuzz(FuzzArgs),
    /// Run the built-in 4-variable worked example.
    Example,
    /// Saturate a file and check the model/AClausola correspondences.
    Audit {
        path: PathBuf,
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
    },
    /// Re-run a counterexample bundle and compare every file.
    Replay { dir: PathBuf },
    /// Tabulate saturation counters against n as CSV.
    Scaling {
        /// Variable counts, e.g. `4..16`.
        #[arg(long, default_value = "4..12", value_parser = parse_usize_range)]
        vars: (usize, usize),
        #[arg(long, default_value_t = 4.0)]
        density: f64,
        #[arg(long, default_value_t = 5)]
        repetitions: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
    },
}

#[derive(Args)]
struct FuzzArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    count: usize,
    /// Variable range, e.g. `4..10`.
    #[arg(long, default_value = "4..10", value_parser = parse_usize_range)]
    vars: (usize, usize),
    /// Clauses per variable, e.g. `3.5..5.5`.
    #[arg(long, default_value = "4.0", value_parser = parse_f64_range, conflicts_with = "clauses")]
    density: (f64, f64),
    /// Absolute clause-count range instead of a density, e.g. `0..300`.
    #[arg(long, value_parser = parse_usize_range)]
    clauses: Option<(usize, usize)>,
    #[arg(long)]
    robust: bool,
    /// Bundle directory for counterexamples.
    #[arg(long, default_value = "fuzz-out")]
    outdir: PathBuf,
    /// Oracle-verify instances with at most this many variables.
    #[arg(long, default_value_t = 20)]
    verify_max_n: usize,
    /// Write the run report as JSON to this path.
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
    /// Run only the built-in worked example.
    #[arg(long, conflicts_with = "formula")]
    example: bool,
    /// Run only these DIMACS files.
    #[arg(long, value_name = "PATH")]
    formula: Vec<PathBuf>,
}

fn split_range(s: &str) -> (&str, &str) {
    for sep in ["..=", "..", ":", "-"] {
        if let Some((a, b)) = s.split_once(sep) {
            if !a.is_empty() {
                return (a, b);
            }
        }
    }
    (s, s)
}

fn parse_usize_range(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = split_range(s.trim());
    let lo = a.trim().parse::<usize>().map_err(|e| format!("{a:?}: {e}"))?;
    let hi = b.trim().parse::<usize>().map_err(|e| format!("{b:?}: {e}"))?;
    if hi < lo {
        return Err(format!("empty range {lo}..{hi}"));
    }
    Ok((lo, hi))
}

fn parse_f64_range(s: &str) -> Result<(f64, f64), String> {
    let s = s.trim();
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a, b.trim_start_matches('=')),
        None => (s, s),
    };
    let lo = a.trim().parse::<f64>().map_err(|e| format!("{a:?}: {e}"))?;
    let hi = b.trim().parse::<f64>().map_err(|e| format!("{b:?}: {e}"))?;
    if !(lo >= 0.0 && hi >= lo && hi.is_finite()) {
        return Err(format!("invalid range {lo}..{hi}"));
    }
    Ok((lo, hi))
}

/// A failure that maps to exit code 1.
struct Fatal(String);

impl<E: std::fmt::Display> From<E> for Fatal {
    fn from(e: E) -> Self {
        Fatal(e.to_string())
    }
}

fn read_formula(path: &Path) -> Result<Formula, Fatal> {
    let text = fs::read_to_string(path).map_err(|e| Fatal(format!("{}: {e}", path.display())))?;
    let parsed = parse_dimacs(&text).map_err(|e| Fatal(format!("{}: {e}", path.display())))?;
    if parsed.duplicates_dropped > 0 {
        eprintln!("c {} duplicate clauses dropped", parsed.duplicates_dropped);
    }
    Ok(parsed.formula)
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), Fatal> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, text).map_err(|e| Fatal(format!("{}: {e}", path.display())))
}

fn mode(robust: bool) -> Mode {
    if robust {
        Mode::Robust
    } else {
        Mode::Faithful
    }
}

fn cmd_solve(path: &Path, robust: bool, json: Option<&Path>, trace: bool) -> Result<u8, Fatal> {
    let f = read_formula(path)?;
    let r = solve_with_method(&f, mode(robust));
    if let Some(p) = json {
        write_json(p, &r)?;
    }
    if trace {
        if let Some(t) = &r.trace {
            eprintln!("{}", serde_json::to_string_pretty(t)?);
        }
    }
    eprintln!(
        "c aclausole: {} -> {}, passes {}, deletions {}",
        r.ci3sat_count, r.saturated_count, r.stats.passes, r.stats.aclausole_deleted
    );
    Ok(match r.status {
        MethodStatus::SatExtracted => {
            let a = r.assignment.as_ref().expect("extracted model");
            println!("s SATISFIABLE");
            println!("{}", a.to_dimacs_model());
            EXIT_SAT
        }
        MethodStatus::UnsatEmpty => {
            if let Some(t) = r.empty_row {
                eprintln!("c empty row {t}");
            }
            println!("UNSAT");
            EXIT_UNSAT
        }
        MethodStatus::ExtractionFailed => {
            let fail = r.failure.as_ref().expect("failure record");
            eprintln!("c extraction failed: {:?}: {}", fail.kind, fail.detail);
            println!("UNKNOWN");
            EXIT_FAILURE
        }
    })
}

fn cmd_oracle(path: &Path, enumerate: bool) -> Result<u8, Fatal> {
    let f = read_formula(path)?;
    if enumerate {
        let models = enumerate_solutions(&f)?;
        for m in &models {
            println!("{m}");
        }
        println!("c {} models", models.len());
        return Ok(if models.is_empty() { EXIT_UNSAT } else { EXIT_SAT });
    }
    Ok(match brute_solve(&f)? {
        OracleResult::Sat(a) => {
            println!("s SATISFIABLE");
            println!("{}", a.to_dimacs_model());
            println!("c {a}");
            EXIT_SAT
        }
        OracleResult::Unsat => {
            println!("UNSAT");
            EXIT_UNSAT
        }
    })
}

fn print_report(report: &RunReport) {
    println!("instances: {}", report.instances);
    for (outcome, count) in &report.tallies {
        println!("{outcome}: {count}");
    }
    for (kind, count) in &report.extraction_failures {
        println!("extraction failure {kind:?}: {count}");
    }
    let a = &report.audit;
    println!(
        "audit: {} audited, coincidence {} coverage {} maximality {}",
        a.audited, a.coincidence_pass, a.coverage_pass, a.maximality_pass
    );
    let c = &report.counters;
    println!(
        "counters: max passes {}, max deletions {}, bound violations {}",
        c.max_passes,
        c.max_deletions,
        c.bound_violations.len()
    );
    println!("bundles: {}", report.counterexamples.len());
}

fn cmd_fuzz(args: &FuzzArgs) -> Result<u8, Fatal> {
    let clauses = match args.clauses {
        Some((min, max)) => ClauseCount::Range { min, max },
        None => ClauseCount::Density {
            min: args.density.0,
            max: args.density.1,
        },
    };
    let mut config = RunConfig {
        seed: args.seed,
        count: args.count,
        n_min: args.vars.0,
        n_max: args.vars.1,
        clauses,
        mode: mode(args.robust),
        verify_max_n: args.verify_max_n,
        pinned: Vec::new(),
        outdir: Some(args.outdir.clone()),
    };
    let report = if args.example || !args.formula.is_empty() {
        let instances: Vec<Instance> = if args.example {
            vec![Instance {
                id: "example".into(),
                spec: None,
                formula: fixture::example_formula(),
            }]
        } else {
            args.formula
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    Ok(Instance {
                        id: format!("pinned-{i:03}"),
                        spec: None,
                        formula: read_formula(p)?,
                    })
                })
                .collect::<Result<_, Fatal>>()?
        };
        config.count = instances.len();
        config.pinned = if args.example {
            vec!["example".into()]
        } else {
            args.formula.iter().map(|p| p.display().to_string()).collect()
        };
        run_instances(&config, &instances)?
    } else {
        differential_run(&config)?
    };
    if let Some(p) = &args.json {
        write_json(p, &report)?;
    }
    print_report(&report);
    Ok(if report.counterexamples.is_empty() {
        0
    } else {
        println!("bundles written to {}", args.outdir.display());
        EXIT_FAILURE
    })
}

fn cmd_example() -> Result<u8, Fatal> {
    let f = fixture::example_formula();
    let r = solve_with_method(&f, Mode::Faithful);
    println!("clauses: {}", f.len());
    println!("aclausole: {} -> {}", r.ci3sat_count, r.saturated_count);
    print!("{}", r.saturated.dump());
    println!("max3sat clauses: {}", r.saturated.largest_equivalent_3sat().len());
    match &r.assignment {
        Some(a) => println!("model: {a}"),
        None => println!("model: none ({})", r.status),
    }
    let audit = audit_corollaries(&f, &r.saturated)?;
    println!(
        "triads: {} == aclausole: {}",
        audit.coincidence.rhs, audit.coincidence.lhs
    );
    Ok(if r.status == MethodStatus::SatExtracted && audit.all_pass() {
        0
    } else {
        EXIT_FAILURE
    })
}

fn print_audit(a: &AuditReport) {
    let verdict = |p: bool| if p { "pass" } else { "FAIL" };
    println!(
        "coincidence: {} == {} {}",
        a.coincidence.lhs,
        a.coincidence.rhs,
        verdict(a.coincidence.pass)
    );
    println!("coverage: {} missing {}", a.coverage.missing.len(), verdict(a.coverage.pass));
    for m in &a.coverage.missing {
        println!("  missing {m}");
    }
    println!(
        "maximality: {} violations {}",
        a.maximality.violations.len(),
        verdict(a.maximality.pass)
    );
    for v in &a.maximality.violations {
        println!("  {}", serde_json::to_string(v).unwrap_or_default());
    }
}

fn cmd_audit(path: &Path, json: Option<&Path>) -> Result<u8, Fatal> {
    let f = read_formula(path)?;
    let sat = saturate(&build_ci3sat(&f));
    let audit = audit_corollaries(&f, &sat.structure)?;
    if let Some(p) = json {
        write_json(p, &audit)?;
    }
    print_audit(&audit);
    Ok(if audit.all_pass() { 0 } else { EXIT_FAILURE })
}

fn cmd_replay(dir: &Path) -> Result<u8, Fatal> {
    let r = replay_bundle(dir)?;
    println!("{}: recorded {} replayed {}", r.instance_id, r.recorded, r.replayed);
    println!("files identical: {}", r.identical);
    Ok(if r.identical && r.recorded == r.replayed {
        0
    } else {
        EXIT_FAILURE
    })
}

fn cmd_scaling(
    vars: (usize, usize),
    density: f64,
    repetitions: usize,
    seed: u64,
    json: Option<&Path>,
) -> Result<u8, Fatal> {
    let config = ScalingConfig {
        n_values: (vars.0..=vars.1).collect(),
        density,
        repetitions,
        seed,
    };
    let report = scaling_report(&config)?;
    if let Some(p) = json {
        write_json(p, &report)?;
    }
    print!("{}", report.to_csv());
    let fmt = |e: Option<f64>| e.map_or("n/a".to_string(), |x| format!("{x:.2}"));
    eprintln!(
        "c log-log slope: impose_calls {}, tests_run {}, deletions {}",
        fmt(report.exponent_impose_calls),
        fmt(report.exponent_tests_run),
        fmt(report.exponent_deletions)
    );
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, Fatal> {
    match cli.command {
        Command::Solve {
            path,
            robust,
            json,
            trace,
        } => cmd_solve(&path, robust, json.as_deref(), trace),
        Command::Oracle { path, enumerate } => cmd_oracle(&path, enumerate),
        Command::Fuzz(args) => cmd_fuzz(&args),
        Command::Example => cmd_example(),
        Command::Audit { path, json } => cmd_audit(&path, json.as_deref()),
        Command::Replay { dir } => cmd_replay(&dir),
        Command::Scaling {
            vars,
            density,
            repetitions,
            seed,
            json,
        } => cmd_scaling(vars, density, repetitions, seed, json.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Fatal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use triadsat::Outcome;

    #[test]
    fn ranges() {
        assert_eq!(parse_usize_range("4..10"), Ok((4, 10)));
        assert_eq!(parse_usize_range("4..=10"), Ok((4, 10)));
        assert_eq!(parse_usize_range("4-10"), Ok((4, 10)));
        assert_eq!(parse_usize_range("6"), Ok((6, 6)));
        assert!(parse_usize_range("10..4").is_err());
        assert_eq!(parse_f64_range("3.5..5.5"), Ok((3.5, 5.5)));
        assert_eq!(parse_f64_range("4"), Ok((4.0, 4.0)));
        assert!(parse_f64_range("-1..2").is_err());
    }

    #[test]
    fn outcome_names_are_stable() {
        assert_eq!(Outcome::AgreeSat.to_string(), "AGREE_SAT");
    }
}
