use rayon::prelude::*;

use super::{run_loaded, HarnessError, LoadedScenario, RunOutput};

#[derive(Debug, Clone, PartialEq)]
pub struct BatchResult {
    pub seed: u64,
    pub output: RunOutput,
}

/// Runs every seed in parallel; results come back sorted by seed.
pub fn run_batch(loaded: &LoadedScenario, seeds: &[u64]) -> Result<Vec<BatchResult>, HarnessError> {
    let mut out = seeds
        .par_iter()
        .map(|&seed| run_loaded(loaded, seed).map(|output| BatchResult { seed, output }))
        .collect::<Result<Vec<_>, _>>()?;
    out.sort_by_key(|r| r.seed);
    Ok(out)
}
