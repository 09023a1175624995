//! Variance-based total-effect sensitivity indices over the parameter
//! prior, via Jansen's two-matrix estimator.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::common::mean_var;
use crate::basis::Catalog;
use crate::error::{CoreError, Result};
use crate::model::{scale_to_unit, ParameterState, ThetaPrior};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityOptions {
    pub n_mc: usize,
    pub seed: u64,
    /// Average the indices over posterior coefficient draws instead of
    /// using the posterior-mean coefficients.
    pub use_full_posterior: bool,
    /// Number of evenly spaced posterior draws when averaging.
    pub posterior_draws: usize,
}

impl Default for SensitivityOptions {
    fn default() -> Self {
        SensitivityOptions {
            n_mc: 10_000,
            seed: 0,
            use_full_posterior: false,
            posterior_draws: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityResult {
    /// Native-unit x locations the emulator was conditioned on.
    pub locations: Vec<Vec<f64>>,
    pub parameter_names: Vec<String>,
    /// indices[location][output][parameter].
    pub indices: Vec<Vec<Vec<f64>>>,
    /// Set when any estimate came out below zero (Monte-Carlo noise);
    /// estimates are reported unclamped.
    pub negative_flagged: bool,
}

/// Jansen total-effect estimator for a vector-valued function of the
/// parameters: T_j = E[(f(A) - f(A with column j from B))^2] / (2 Var f).
/// Returns indices[output][parameter].
pub fn jansen_total_effects<F>(
    f: F,
    priors: &[ThetaPrior],
    n_outputs: usize,
    n_mc: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    if n_mc < 2 {
        return Err(CoreError::invalid("n_mc must be at least 2"));
    }
    let q = priors.len();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let draw_matrix = |rng: &mut ChaCha20Rng| -> Result<Vec<Vec<f64>>> {
        (0..n_mc)
            .map(|_| priors.iter().map(|p| p.sample_unit(rng)).collect())
            .collect()
    };
    let a = draw_matrix(&mut rng)?;
    let b = draw_matrix(&mut rng)?;

    let f_a: Vec<Vec<f64>> = a.iter().map(|row| f(row)).collect::<Result<_>>()?;
    let f_b: Vec<Vec<f64>> = b.iter().map(|row| f(row)).collect::<Result<_>>()?;
    // Total variance from the pooled base evaluations.
    let mut variances = vec![0.0; n_outputs];
    for k in 0..n_outputs {
        let pooled: Vec<f64> = f_a.iter().chain(&f_b).map(|v| v[k]).collect();
        let (_, var) = mean_var(&pooled);
        variances[k] = var;
    }

    let mut indices = vec![vec![0.0; q]; n_outputs];
    for j in 0..q {
        let mut acc = vec![0.0; n_outputs];
        for i in 0..n_mc {
            let mut row = a[i].clone();
            row[j] = b[i][j];
            let f_sub = f(&row)?;
            for k in 0..n_outputs {
                acc[k] += (f_a[i][k] - f_sub[k]).powi(2);
            }
        }
        for k in 0..n_outputs {
            indices[k][j] = if variances[k] > 0.0 {
                acc[k] / (2.0 * n_mc as f64 * variances[k])
            } else {
                0.0
            };
        }
    }
    Ok(indices)
}

/// Posterior-mean stack of the emulator coefficient blocks.
fn mean_b(samples: &[ParameterState]) -> Vec<DMatrix<f64>> {
    let n = samples.len() as f64;
    let mut out: Vec<DMatrix<f64>> = samples[0].b.iter().map(|m| m.clone() / n).collect();
    for s in &samples[1..] {
        for (acc, bj) in out.iter_mut().zip(&s.b) {
            *acc += bj / n;
        }
    }
    out
}

fn emulator_eval(
    catalog: &Catalog,
    b_blocks: &[DMatrix<f64>],
    point_unit: &[f64],
    n_outputs: usize,
) -> Result<Vec<f64>> {
    let row = catalog.emulator_row(point_unit)?;
    let mut out = vec![0.0; n_outputs];
    let mut at = 0;
    for bj in b_blocks {
        for l in 0..bj.nrows() {
            let r = row[at + l];
            for (k, o) in out.iter_mut().enumerate() {
                *o += r * bj[(l, k)];
            }
        }
        at += bj.nrows();
    }
    Ok(out)
}

/// Total-effect indices of the fitted emulator under the parameter
/// prior, at each requested x location (native units).
pub fn total_sensitivity(
    catalog: &Catalog,
    samples: &[ParameterState],
    priors: &[ThetaPrior],
    locations: &[Vec<f64>],
    opts: &SensitivityOptions,
) -> Result<SensitivityResult> {
    if samples.is_empty() {
        return Err(CoreError::invalid("no posterior samples"));
    }
    if opts.n_mc < 1000 {
        return Err(CoreError::invalid(format!(
            "n_mc {} too small; need at least 1000",
            opts.n_mc
        )));
    }
    let n_inputs = catalog.n_inputs();
    let n_outputs = samples[0].sigma.nrows();
    let coeff_sets: Vec<Vec<DMatrix<f64>>> = if opts.use_full_posterior {
        let n = opts.posterior_draws.min(samples.len()).max(1);
        (0..n)
            .map(|i| samples[i * samples.len() / n].b.clone())
            .collect()
    } else {
        vec![mean_b(samples)]
    };

    let mut indices = Vec::with_capacity(locations.len());
    let mut negative_flagged = false;
    for x in locations {
        let x_unit: Vec<f64> = x
            .iter()
            .zip(&catalog.vars[..n_inputs])
            .map(|(&v, s)| scale_to_unit(v, s))
            .collect::<Result<_>>()?;
        let mut acc = vec![vec![0.0; priors.len()]; n_outputs];
        for b_blocks in &coeff_sets {
            let f = |t: &[f64]| {
                let mut p = x_unit.clone();
                p.extend_from_slice(t);
                emulator_eval(catalog, b_blocks, &p, n_outputs)
            };
            let t = jansen_total_effects(f, priors, n_outputs, opts.n_mc, opts.seed)?;
            for (a_row, t_row) in acc.iter_mut().zip(&t) {
                for (a, &v) in a_row.iter_mut().zip(t_row) {
                    *a += v / coeff_sets.len() as f64;
                }
            }
        }
        if acc.iter().flatten().any(|&v| v < 0.0) {
            negative_flagged = true;
        }
        indices.push(acc);
    }
    Ok(SensitivityResult {
        locations: locations.to_vec(),
        parameter_names: catalog.vars[n_inputs..]
            .iter()
            .map(|v| v.name.clone())
            .collect(),
        indices,
        negative_flagged,
    })
}
