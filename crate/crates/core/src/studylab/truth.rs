//! Synthetic truths drawn from the model prior, and dataset generation.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::basis::Catalog;
use crate::error::{CoreError, Result};
use crate::linalg::sample_mvn;
use crate::model::{
    scale_point, scale_to_unit, Dataset, OutputTransform, ThetaPrior, ThetaValue,
};

/// A fully known data-generating configuration with the same shapes as a
/// fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTruth {
    /// Emulator coefficients per component.
    pub b: Vec<DMatrix<f64>>,
    /// Discrepancy coefficients per component.
    pub c: Vec<DMatrix<f64>>,
    pub theta: Vec<ThetaValue>,
    /// Observation-error covariance.
    pub sigma: DMatrix<f64>,
    /// Simulator-jitter covariance.
    pub upsilon: DMatrix<f64>,
}

/// Covariances controlling the signal strength of a drawn truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthConfig {
    /// Row covariance of every emulator coefficient block.
    pub lambda: DMatrix<f64>,
    /// Row covariance of every discrepancy coefficient block.
    pub omega: DMatrix<f64>,
    pub sigma: DMatrix<f64>,
    pub upsilon: DMatrix<f64>,
    /// Fix theta instead of drawing it from the prior.
    pub theta: Option<Vec<ThetaValue>>,
}

/// Evaluate a stack of coefficient blocks against a design row.
pub fn eval_blocks(row: &DVector<f64>, blocks: &[DMatrix<f64>], n_outputs: usize) -> DVector<f64> {
    let mut out = DVector::zeros(n_outputs);
    let mut at = 0;
    for blk in blocks {
        out += blk.transpose() * row.rows(at, blk.nrows());
        at += blk.nrows();
    }
    out
}

impl SyntheticTruth {
    pub fn n_outputs(&self) -> usize {
        self.sigma.nrows()
    }

    /// Emulator mean at a unit-scaled (x, t) point, model scale.
    pub fn eta_at(&self, catalog: &Catalog, point_unit: &[f64]) -> Result<DVector<f64>> {
        Ok(eval_blocks(
            &catalog.emulator_row(point_unit)?,
            &self.b,
            self.n_outputs(),
        ))
    }

    /// Discrepancy mean at a unit-scaled x point, model scale.
    pub fn delta_at(&self, catalog: &Catalog, x_unit: &[f64]) -> Result<DVector<f64>> {
        Ok(eval_blocks(
            &catalog.discrepancy_row(x_unit)?,
            &self.c,
            self.n_outputs(),
        ))
    }
}

/// Draw a truth from the model prior: coefficient rows iid normal with
/// the supplied covariances, theta from its prior unless fixed.
pub fn draw_truth(
    catalog: &Catalog,
    theta_priors: &[ThetaPrior],
    cfg: &TruthConfig,
    seed: u64,
) -> Result<SyntheticTruth> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let c = cfg.sigma.nrows();
    let zero = DVector::zeros(c);
    let draw_blocks = |rng: &mut ChaCha20Rng,
                       shapes: &[usize],
                       cov: &DMatrix<f64>|
     -> Result<Vec<DMatrix<f64>>> {
        shapes
            .iter()
            .map(|&l| {
                let mut blk = DMatrix::zeros(l, c);
                for i in 0..l {
                    let row = if cov.amax() == 0.0 {
                        zero.clone()
                    } else {
                        sample_mvn(rng, &zero, cov, "truth draw")?
                    };
                    blk.row_mut(i).copy_from(&row.transpose());
                }
                Ok(blk)
            })
            .collect()
    };
    let b_shapes: Vec<usize> = catalog.emulator.iter().map(|x| x.basis_terms.len()).collect();
    let c_shapes: Vec<usize> = catalog
        .discrepancy
        .iter()
        .map(|x| x.basis_terms.len())
        .collect();
    let b = draw_blocks(&mut rng, &b_shapes, &cfg.lambda)?;
    let c_blocks = draw_blocks(&mut rng, &c_shapes, &cfg.omega)?;
    let theta = match &cfg.theta {
        Some(t) => t.clone(),
        None => theta_priors
            .iter()
            .map(|p| {
                let v = p.sample_unit(&mut rng)?;
                Ok(if p.is_discrete() {
                    ThetaValue::Categorical(v.round() as usize)
                } else {
                    ThetaValue::Continuous(v)
                })
            })
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(SyntheticTruth {
        b,
        c: c_blocks,
        theta,
        sigma: cfg.sigma.clone(),
        upsilon: cfg.upsilon.clone(),
    })
}

/// Which experimental cells to mask as missing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MissingPattern {
    None,
    /// Output `output` is observed only where input `input` equals
    /// `observed_value` (within floating-point equality).
    ConditionalOnInput {
        output: usize,
        input: usize,
        observed_value: f64,
    },
    /// Mask a deterministic pseudorandom fraction of cells of one output.
    RandomFraction { output: usize, fraction: f64 },
}

/// A generated dataset with the true values of every masked cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedData {
    pub dataset: Dataset,
    /// (row, output, true native value) for every masked cell.
    pub masked_truth: Vec<(usize, usize, f64)>,
}

/// Generate experimental and simulator data from a truth. Designs are in
/// native units; experimental rows carry x only, simulator rows carry
/// (x, t). Model-scale noise is added, then inverse transforms map the
/// values to native units.
pub fn generate_dataset(
    truth: &SyntheticTruth,
    catalog: &Catalog,
    transforms: &[OutputTransform],
    exp_design: &[Vec<f64>],
    sim_design: &[Vec<f64>],
    missing: &MissingPattern,
    seed: u64,
) -> Result<GeneratedData> {
    if exp_design.is_empty() || sim_design.is_empty() {
        return Err(CoreError::invalid("designs must be nonempty"));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let c = truth.n_outputs();
    let n_inputs = catalog.n_inputs();
    let input_vars = &catalog.vars[..n_inputs];
    let theta_coords: Vec<f64> = truth.theta.iter().map(ThetaValue::coord).collect();
    let zero = DVector::zeros(c);

    let mut exp_y: Vec<Vec<Option<f64>>> = Vec::with_capacity(exp_design.len());
    for x in exp_design {
        let x_unit: Vec<f64> = x
            .iter()
            .zip(input_vars)
            .map(|(&v, s)| scale_to_unit(v, s))
            .collect::<Result<_>>()?;
        let mut point = x_unit.clone();
        point.extend_from_slice(&theta_coords);
        let mean = truth.eta_at(catalog, &point)? + truth.delta_at(catalog, &x_unit)?;
        let eps = if truth.sigma.amax() == 0.0 {
            zero.clone()
        } else {
            sample_mvn(&mut rng, &zero, &truth.sigma, "experimental noise")?
        };
        let z = mean + eps;
        exp_y.push(
            z.iter()
                .zip(transforms)
                .map(|(&v, t)| Some(t.invert(v)))
                .collect(),
        );
    }
    let mut sim_y: Vec<Vec<f64>> = Vec::with_capacity(sim_design.len());
    for w in sim_design {
        let w_unit = scale_point(w, &catalog.vars)?;
        let mean = truth.eta_at(catalog, &w_unit)?;
        let xi = if truth.upsilon.amax() == 0.0 {
            zero.clone()
        } else {
            sample_mvn(&mut rng, &zero, &truth.upsilon, "simulator jitter")?
        };
        let z = mean + xi;
        sim_y.push(z.iter().zip(transforms).map(|(&v, t)| t.invert(v)).collect());
    }

    // Apply the missing-data mask, remembering the truth behind it.
    let mut masked_truth = Vec::new();
    match *missing {
        MissingPattern::None => {}
        MissingPattern::ConditionalOnInput {
            output,
            input,
            observed_value,
        } => {
            for (i, x) in exp_design.iter().enumerate() {
                if x[input] != observed_value {
                    if let Some(v) = exp_y[i][output].take() {
                        masked_truth.push((i, output, v));
                    }
                }
            }
        }
        MissingPattern::RandomFraction { output, fraction } => {
            for (i, row) in exp_y.iter_mut().enumerate() {
                if rng.gen::<f64>() < fraction {
                    if let Some(v) = row[output].take() {
                        masked_truth.push((i, output, v));
                    }
                }
            }
        }
    }

    Ok(GeneratedData {
        dataset: Dataset {
            exp_x: exp_design.to_vec(),
            exp_y,
            sim_w: sim_design.to_vec(),
            sim_y,
        },
        masked_truth,
    })
}
