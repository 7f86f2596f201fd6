use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::generate::{generate_instance, GenerateError, InstanceSpec};
use crate::saturation::{saturate, SaturationStats};
use crate::structure::{build_ci3sat, universe_size};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig {
    pub n_values: Vec<usize>,
    /// Clauses per variable; `m = round(density · n)`.
    pub density: f64,
    pub repetitions: usize,
    pub seed: u64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        ScalingConfig {
            n_values: (4..=10).collect(),
            density: 4.0,
            repetitions: 5,
            seed: 0,
        }
    }
}

#[derive(Debug, Error)]
pub enum ScalingError {
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error("counter bound exceeded at n={n} (instance seed {seed}): {stats:?}")]
    BoundViolated {
        n: usize,
        seed: u64,
        stats: SaturationStats,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: usize,
    pub m: usize,
    pub instances: usize,
    pub universe: usize,
    pub mean_impose_calls: f64,
    pub max_impose_calls: u64,
    pub mean_reduce_calls: f64,
    pub max_reduce_calls: u64,
    pub mean_deletions: f64,
    pub max_deletions: u64,
    pub mean_passes: f64,
    pub max_passes: u64,
    pub mean_tests_run: f64,
    pub max_tests_run: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub config: ScalingConfig,
    pub rows: Vec<ScalingRow>,
    /// Least-squares slope of ln(mean counter) against ln(n), over rows with
    /// a nonzero mean. `None` with fewer than two such rows.
    pub exponent_impose_calls: Option<f64>,
    pub exponent_tests_run: Option<f64>,
    pub exponent_deletions: Option<f64>,
}

impl ScalingReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "n,m,instances,universe,mean_impose_calls,max_impose_calls,mean_reduce_calls,\
             max_reduce_calls,mean_deletions,max_deletions,mean_passes,max_passes,\
             mean_tests_run,max_tests_run\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{:.3},{},{:.3},{},{:.3},{},{:.3},{},{:.3},{}",
                r.n,
                r.m,
                r.instances,
                r.universe,
                r.mean_impose_calls,
                r.max_impose_calls,
                r.mean_reduce_calls,
                r.max_reduce_calls,
                r.mean_deletions,
                r.max_deletions,
                r.mean_passes,
                r.max_passes,
                r.mean_tests_run,
                r.max_tests_run
            );
        }
        out
    }
}

fn loglog_slope(points: impl Iterator<Item = (usize, f64)>) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .filter(|&(_, y)| y > 0.0)
        .map(|(x, y)| ((x as f64).ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn mean(xs: &[u64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<u64>() as f64 / xs.len() as f64
    }
}

/// Saturates `repetitions` random instances per `n` and tabulates the
/// counters. Fails if any instance breaks the deletion or pass bound.
pub fn scaling_report(config: &ScalingConfig) -> Result<ScalingReport, ScalingError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut rows = Vec::with_capacity(config.n_values.len());
    for &n in &config.n_values {
        let universe = universe_size(n);
        let m = ((config.density * n as f64).round().max(0.0) as usize).min(universe);
        let specs: Vec<InstanceSpec> = (0..config.repetitions)
            .map(|_| InstanceSpec { seed: rng.gen(), n, m })
            .collect();
        let stats: Vec<(u64, SaturationStats)> = specs
            .par_iter()
            .map(|&spec| {
                let f = generate_instance(spec)?;
                Ok((spec.seed, saturate(&build_ci3sat(&f)).stats))
            })
            .collect::<Result<_, GenerateError>>()?;
        if let Some(&(seed, stats)) = stats.iter().find(|(_, s)| !s.within_bounds(n)) {
            return Err(ScalingError::BoundViolated { n, seed, stats });
        }
        let col = |get: fn(&SaturationStats) -> u64| -> Vec<u64> { stats.iter().map(|(_, s)| get(s)).collect() };
        let impose = col(|s| s.impose_calls);
        let reduce = col(|s| s.reduce_calls);
        let deleted = col(|s| s.aclausole_deleted);
        let passes = col(|s| s.passes);
        let tests = col(|s| s.tests_run);
        let max = |xs: &[u64]| xs.iter().copied().max().unwrap_or(0);
        rows.push(ScalingRow {
            n,
            m,
            instances: stats.len(),
            universe,
            mean_impose_calls: mean(&impose),
            max_impose_calls: max(&impose),
            mean_reduce_calls: mean(&reduce),
            max_reduce_calls: max(&reduce),
            mean_deletions: mean(&deleted),
            max_deletions: max(&deleted),
            mean_passes: mean(&passes),
            max_passes: max(&passes),
            mean_tests_run: mean(&tests),
            max_tests_run: max(&tests),
        });
    }
    Ok(ScalingReport {
        exponent_impose_calls: loglog_slope(rows.iter().map(|r| (r.n, r.mean_impose_calls))),
        exponent_tests_run: loglog_slope(rows.iter().map(|r| (r.n, r.mean_tests_run))),
        exponent_deletions: loglog_slope(rows.iter().map(|r| (r.n, r.mean_deletions))),
        config: config.clone(),
        rows,
    })
}
