//! Mutable sampler state: calibration parameters, coefficient matrices,
//! covariance matrices, and imputed missing cells.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::basis::Catalog;
use crate::error::{CoreError, Result};
use crate::linalg::inverse_wishart_mean;
use crate::model::dataset::Dataset;
use crate::model::prior::PriorSpec;
use crate::model::transform::OutputTransform;

/// One calibration parameter value on the sampler's internal scale:
/// continuous parameters live in [0,1], categorical ones are 1-based levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ThetaValue {
    Continuous(f64),
    Categorical(usize),
}

impl ThetaValue {
    /// Numeric coordinate as used when evaluating basis functions.
    pub fn coord(&self) -> f64 {
        match self {
            ThetaValue::Continuous(u) => *u,
            ThetaValue::Categorical(level) => *level as f64,
        }
    }
}

/// Full parameter state of the Gibbs chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterState {
    /// Calibration parameters, one per parameter variable in catalog order.
    pub theta: Vec<ThetaValue>,
    /// Emulator coefficients, one L_j x C matrix per emulator component.
    pub b: Vec<DMatrix<f64>>,
    /// Discrepancy coefficients, one L_k x C matrix per discrepancy component.
    pub c: Vec<DMatrix<f64>>,
    /// Per-emulator-component C x C coefficient covariances.
    pub lambda: Vec<DMatrix<f64>>,
    /// Per-discrepancy-component C x C coefficient covariances.
    pub omega: Vec<DMatrix<f64>>,
    /// Experimental error covariance (C x C).
    pub sigma: DMatrix<f64>,
    /// Simulator error covariance (C x C).
    pub upsilon: DMatrix<f64>,
    /// Imputed transformed values for missing experimental cells, aligned
    /// with `Dataset::missing_cells` order.
    pub imputed: Vec<f64>,
}

/// Deterministic-given-RNG initial state: theta drawn from its prior,
/// coefficients zero, covariances at their prior means, and missing cells
/// at the per-output mean of the observed transformed data.
pub fn init_state<R: Rng>(
    catalog: &Catalog,
    prior: &PriorSpec,
    data: &Dataset,
    transforms: &[OutputTransform],
    rng: &mut R,
) -> Result<ParameterState> {
    let c = data.n_outputs();
    let theta = prior
        .theta
        .iter()
        .map(|p| {
            let v = p.sample_unit(rng)?;
            Ok(if p.is_discrete() {
                ThetaValue::Categorical(v.round() as usize)
            } else {
                ThetaValue::Continuous(v)
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let b = catalog
        .emulator
        .iter()
        .map(|comp| DMatrix::zeros(comp.basis_terms.len(), c))
        .collect();
    let c_coef = catalog
        .discrepancy
        .iter()
        .map(|comp| DMatrix::zeros(comp.basis_terms.len(), c))
        .collect();

    let lambda_mean = inverse_wishart_mean(&prior.lambda.scale, prior.lambda.dof)?;
    let omega_mean = inverse_wishart_mean(&prior.omega.scale, prior.omega.dof)?;
    let sigma = inverse_wishart_mean(&prior.sigma.scale, prior.sigma.dof)?;
    let upsilon = inverse_wishart_mean(&prior.upsilon.scale, prior.upsilon.dof)?;

    // Per-output mean of observed transformed experimental values.
    let mut sums = vec![0.0; c];
    let mut counts = vec![0usize; c];
    for row in &data.exp_y {
        for (k, cell) in row.iter().enumerate() {
            if let Some(v) = cell {
                sums[k] += transforms[k].apply(*v)?;
                counts[k] += 1;
            }
        }
    }
    let means: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .enumerate()
        .map(|(k, (&s, &n))| {
            if n == 0 {
                Err(CoreError::invalid(format!(
                    "output {k} has no observed experimental values"
                )))
            } else {
                Ok(s / n as f64)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let imputed = data
        .missing_cells()
        .iter()
        .map(|&(_, k)| means[k])
        .collect();

    Ok(ParameterState {
        theta,
        b,
        c: c_coef,
        lambda: vec![lambda_mean; catalog.emulator.len()],
        omega: vec![omega_mean; catalog.discrepancy.len()],
        sigma,
        upsilon,
        imputed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{CatalogPolicy, VarRole, VariableSpec};
    use crate::model::prior::{ThetaPrior, WishartPrior};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn small_setup() -> (Catalog, PriorSpec, Dataset) {
        let vars = vec![
            VariableSpec::continuous("x1", 0.0, 1.0, VarRole::Input),
            VariableSpec::continuous("t1", 0.0, 1.0, VarRole::Parameter),
            VariableSpec::categorical("t2", &["a", "b"], VarRole::Parameter),
        ];
        let policy = CatalogPolicy {
            grid_size: 60,
            l_main: 4,
            l_two_way: 4,
            l_three_way: 2,
            ..CatalogPolicy::default()
        };
        let catalog = Catalog::build(vars, policy).unwrap();
        let prior = PriorSpec {
            theta: vec![
                ThetaPrior::Uniform { lo: 0.0, hi: 1.0 },
                ThetaPrior::Discrete {
                    weights: vec![0.5, 0.5],
                },
            ],
            lambda: WishartPrior::identity(2, 4.0),
            omega: WishartPrior::identity(2, 4.0),
            sigma: WishartPrior::from_mean(DMatrix::identity(2, 2) * 0.003, 20.0),
            upsilon: WishartPrior::from_mean(DMatrix::identity(2, 2) * 0.009, 20.0),
        };
        let data = Dataset {
            exp_x: vec![vec![0.1], vec![0.5], vec![0.9]],
            exp_y: vec![
                vec![Some(1.0), Some(2.0)],
                vec![Some(3.0), None],
                vec![None, Some(4.0)],
            ],
            sim_w: vec![vec![0.2, 0.3, 1.0]],
            sim_y: vec![vec![1.5, 2.5]],
        };
        (catalog, prior, data)
    }

    #[test]
    fn init_state_shapes_and_means() {
        let (catalog, prior, data) = small_setup();
        let transforms = [OutputTransform::Identity, OutputTransform::Identity];
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let s = init_state(&catalog, &prior, &data, &transforms, &mut rng).unwrap();
        assert_eq!(s.theta.len(), 2);
        assert!(matches!(s.theta[0], ThetaValue::Continuous(u) if (0.0..=1.0).contains(&u)));
        assert!(matches!(s.theta[1], ThetaValue::Categorical(l) if l == 1 || l == 2));
        assert_eq!(s.b.len(), catalog.emulator.len());
        assert_eq!(s.c.len(), catalog.discrepancy.len());
        for (bj, comp) in s.b.iter().zip(&catalog.emulator) {
            assert_eq!(bj.nrows(), comp.basis_terms.len());
            assert_eq!(bj.ncols(), 2);
            assert_eq!(bj.iter().filter(|&&v| v != 0.0).count(), 0);
        }
        assert_abs_diff_eq!(s.sigma[(0, 0)], 0.003, epsilon = 1e-12);
        assert_abs_diff_eq!(s.upsilon[(1, 1)], 0.009, epsilon = 1e-12);
        // Missing cells in row-major order: (1,1) then (2,0).
        assert_abs_diff_eq!(s.imputed[0], 3.0, epsilon = 1e-12); // mean of {2, 4}
        assert_abs_diff_eq!(s.imputed[1], 2.0, epsilon = 1e-12); // mean of {1, 3}
    }

    #[test]
    fn all_missing_output_rejected() {
        let (catalog, prior, mut data) = small_setup();
        for row in &mut data.exp_y {
            row[0] = None;
        }
        let transforms = [OutputTransform::Identity, OutputTransform::Identity];
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        assert!(init_state(&catalog, &prior, &data, &transforms, &mut rng).is_err());
    }
}
