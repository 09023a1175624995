//! Fixed-scan Gibbs / Metropolis-within-Gibbs driver.

use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::checkpoint::Checkpoint;
use super::config::ChainConfig;
use super::engine::Engine;
use super::metropolis::adapt_proposal_sd;
use crate::basis::Catalog;
use crate::error::{CoreError, Result};
use crate::model::{init_state, Dataset, OutputTransform, ParameterState, PriorSpec};

/// Wall-clock accumulators per block family, in seconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BlockTimings {
    pub coefficients: f64,
    pub covariances: f64,
    pub imputation: f64,
    pub theta: f64,
}

/// A completed chain: recorded post-burn-in states plus diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Chain {
    pub samples: Vec<ParameterState>,
    /// Theta indices of the continuous parameters, aligning the
    /// acceptance counters and proposal scales below.
    pub continuous_params: Vec<usize>,
    /// Post-burn-in acceptance counts per continuous parameter.
    pub accepts: Vec<u64>,
    pub attempts: Vec<u64>,
    pub categorical_accepts: u64,
    pub categorical_attempts: u64,
    /// Final (post-adaptation) proposal scales on the logit scale.
    pub proposal_sds: Vec<f64>,
    pub mean_iteration_secs: f64,
    pub timings: BlockTimings,
}

impl Chain {
    /// Post-burn-in acceptance rate per continuous parameter.
    pub fn acceptance_rates(&self) -> Vec<f64> {
        self.accepts
            .iter()
            .zip(&self.attempts)
            .map(|(&a, &n)| if n == 0 { f64::NAN } else { a as f64 / n as f64 })
            .collect()
    }
}

fn at<T>(r: Result<T>, iteration: usize, block: &str) -> Result<T> {
    r.map_err(|e| match e {
        CoreError::NumericalFailure { context, message } => CoreError::NumericalFailure {
            context: format!("iteration {iteration}, block {block} ({context})"),
            message,
        },
        other => other,
    })
}

/// Run one chain to completion. Fully deterministic given the seed in
/// `config`. When `checkpoint_path` is given, a checkpoint is written
/// every `config.checkpoint_interval` iterations.
pub fn run_chain(
    catalog: Catalog,
    prior: PriorSpec,
    transforms: Vec<OutputTransform>,
    data: Dataset,
    config: &ChainConfig,
    checkpoint_path: Option<&Path>,
) -> Result<Chain> {
    config.validate()?;
    let n_inputs = catalog.n_inputs();
    let param_vars: Vec<_> = catalog.vars[n_inputs..].iter().collect();
    prior.validate(&param_vars, data.n_outputs())?;

    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let state = init_state(&catalog, &prior, &data, &transforms, &mut rng)?;
    let mut engine = Engine::new(catalog, prior, transforms, data, state)?;
    run_chain_with(&mut engine, &mut rng, config, checkpoint_path, 1)
}

/// Driver loop over an already-assembled engine; `first_iteration` allows
/// resuming from a checkpoint.
pub fn run_chain_with(
    engine: &mut Engine,
    rng: &mut ChaCha20Rng,
    config: &ChainConfig,
    checkpoint_path: Option<&Path>,
    first_iteration: usize,
) -> Result<Chain> {
    let flags = &config.updates;
    let continuous: Vec<usize> = engine
        .prior
        .theta
        .iter()
        .enumerate()
        .filter(|(_, p)| !p.is_discrete())
        .map(|(q, _)| q)
        .collect();
    let mut proposal_sds = vec![config.initial_proposal_sd; continuous.len()];
    let mut accepts = vec![0u64; continuous.len()];
    let mut attempts = vec![0u64; continuous.len()];
    let mut categorical_accepts = 0u64;
    let mut categorical_attempts = 0u64;
    let mut samples = Vec::with_capacity(config.sample_count());
    let mut timings = BlockTimings::default();
    let run_start = Instant::now();

    let n_emulator = engine.catalog.emulator.len();
    let n_discrepancy = engine.catalog.discrepancy.len();

    for i in first_iteration..=config.iterations {
        let t0 = Instant::now();
        if flags.b {
            for j in 0..n_emulator {
                at(engine.update_b(rng, j), i, "B")?;
            }
        }
        if flags.c {
            for k in 0..n_discrepancy {
                at(engine.update_c(rng, k), i, "C")?;
            }
        }
        let t1 = Instant::now();
        timings.coefficients += (t1 - t0).as_secs_f64();
        if flags.lambda {
            for j in 0..n_emulator {
                at(engine.update_lambda(rng, j), i, "Lambda")?;
            }
        }
        if flags.omega {
            for k in 0..n_discrepancy {
                at(engine.update_omega(rng, k), i, "Omega")?;
            }
        }
        if flags.sigma {
            at(engine.update_sigma(rng), i, "Sigma")?;
        }
        if flags.upsilon {
            at(engine.update_upsilon(rng), i, "Upsilon")?;
        }
        let t2 = Instant::now();
        timings.covariances += (t2 - t1).as_secs_f64();
        if flags.imputation {
            at(engine.impute_missing(rng), i, "imputation")?;
        }
        let t3 = Instant::now();
        timings.imputation += (t3 - t2).as_secs_f64();
        if flags.theta_continuous {
            for (slot, &q) in continuous.iter().enumerate() {
                let accepted = at(
                    engine.mh_continuous_theta(rng, q, proposal_sds[slot]),
                    i,
                    "theta",
                )?;
                if i <= config.burn_in && config.adapt_during_burnin {
                    proposal_sds[slot] = adapt_proposal_sd(
                        proposal_sds[slot],
                        i,
                        accepted,
                        config.target_acceptance,
                    );
                }
                if i > config.burn_in {
                    attempts[slot] += 1;
                    if accepted {
                        accepts[slot] += 1;
                    }
                }
            }
        }
        if flags.theta_categorical {
            if let Some(accepted) = at(engine.mh_categorical_block(rng), i, "categorical block")? {
                if i > config.burn_in {
                    categorical_attempts += 1;
                    if accepted {
                        categorical_accepts += 1;
                    }
                }
            }
        }
        timings.theta += t3.elapsed().as_secs_f64();

        if i > config.burn_in && (i - config.burn_in) % config.thin == 0 {
            samples.push(engine.state.clone());
        }
        if let Some(path) = checkpoint_path {
            if i % config.checkpoint_interval == 0 {
                Checkpoint {
                    version: Checkpoint::VERSION,
                    config: config.clone(),
                    state: engine.state.clone(),
                    rng: rng.clone(),
                    iteration: i,
                }
                .save(path)?;
            }
        }
    }

    let iterations_run = config.iterations + 1 - first_iteration;
    Ok(Chain {
        samples,
        continuous_params: continuous,
        accepts,
        attempts,
        categorical_accepts,
        categorical_attempts,
        proposal_sds,
        mean_iteration_secs: run_start.elapsed().as_secs_f64() / iterations_run.max(1) as f64,
        timings,
    })
}
