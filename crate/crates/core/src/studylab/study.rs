//! Truth-known simulation studies: generate, calibrate, score.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::truth::{generate_dataset, MissingPattern, SyntheticTruth};
use crate::analysis::{study_metrics, StudyMetrics};
use crate::basis::Catalog;
use crate::error::{CoreError, Result};
use crate::mcmc::{run_chain, ChainConfig};
use crate::model::{OutputTransform, ParameterState, PriorSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub metrics: StudyMetrics,
    pub n_requested: usize,
    pub n_completed: usize,
    /// (dataset index, error message) for every failed replicate.
    pub failures: Vec<(usize, String)>,
    pub mean_iteration_secs: f64,
}

/// Counter-derived per-dataset seed: datasets are mutually independent
/// and the whole study is reproducible from the master seed.
pub fn derived_seed(master: u64, counter: u64, stream: u64) -> u64 {
    // splitmix64 over (master, counter, stream).
    let mut z = master
        .wrapping_add(counter.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(stream.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[allow(clippy::too_many_arguments)]
pub fn run_study(
    n_datasets: usize,
    truth: &SyntheticTruth,
    catalog: &Catalog,
    prior: &PriorSpec,
    transforms: &[OutputTransform],
    exp_design: &[Vec<f64>],
    sim_design: &[Vec<f64>],
    missing: &MissingPattern,
    config: &ChainConfig,
    master_seed: u64,
) -> Result<StudyReport> {
    if n_datasets == 0 {
        return Err(CoreError::invalid("n_datasets must be at least 1"));
    }
    let outcomes: Vec<(usize, Result<(Vec<ParameterState>, f64)>)> = (0..n_datasets)
        .into_par_iter()
        .map(|d| {
            let run = (|| {
                let data_seed = derived_seed(master_seed, d as u64, 1);
                let chain_seed = derived_seed(master_seed, d as u64, 2);
                let generated = generate_dataset(
                    truth, catalog, transforms, exp_design, sim_design, missing, data_seed,
                )?;
                let chain = run_chain(
                    catalog.clone(),
                    prior.clone(),
                    transforms.to_vec(),
                    generated.dataset,
                    &ChainConfig {
                        seed: chain_seed,
                        ..config.clone()
                    },
                    None,
                )?;
                Ok((chain.samples, chain.mean_iteration_secs))
            })();
            (d, run)
        })
        .collect();

    let mut completed = Vec::new();
    let mut failures = Vec::new();
    let mut secs = 0.0;
    for (d, outcome) in outcomes {
        match outcome {
            Ok((samples, iter_secs)) => {
                completed.push(samples);
                secs += iter_secs;
            }
            Err(e) => failures.push((d, e.to_string())),
        }
    }
    if completed.is_empty() {
        return Err(CoreError::invalid("every study replicate failed"));
    }
    let metrics = study_metrics(catalog, &completed, &truth.theta)?;
    Ok(StudyReport {
        metrics,
        n_requested: n_datasets,
        n_completed: completed.len(),
        failures,
        mean_iteration_secs: secs / completed.len() as f64,
    })
}
