use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{Clause3, Formula};
use crate::structure::{triads, universe_size, Triad};

/// Name and version of the instance generator, recorded in every report.
/// Changing the sampling scheme must bump this.
pub const GENERATOR: &str = "chacha8-sample-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub seed: u64,
    pub n: usize,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerateError {
    #[error("generated instances need at least 4 variables, got {0}")]
    TooFewVariables(usize),
    #[error("{m} clauses requested but only {universe} exist over {n} variables")]
    Infeasible { n: usize, m: usize, universe: usize },
}

/// `m` distinct sorted 3-clauses drawn uniformly without replacement from the
/// 8·C(n,3) universe.
pub fn generate_instance(spec: InstanceSpec) -> Result<Formula, GenerateError> {
    let InstanceSpec { seed, n, m } = spec;
    if n < 4 {
        return Err(GenerateError::TooFewVariables(n));
    }
    let universe = universe_size(n);
    if m > universe {
        return Err(GenerateError::Infeasible { n, m, universe });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, universe, m).into_vec();
    picked.sort_unstable();
    let all: Vec<Triad> = triads(n).collect();
    let clauses = picked
        .into_iter()
        .map(|i| Clause3::from_triad_bits(all[i / 8], (i % 8) as u8));
    Ok(Formula::new(n, clauses).expect("clauses drawn from the universe"))
}
