//! Prior specification: per-parameter theta priors and inverse-Wishart
//! hyperparameters for all covariance matrices.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Beta as BetaDist, Distribution};
use serde::{Deserialize, Serialize};

use crate::basis::{VarKind, VariableSpec};
use crate::error::{CoreError, Result};
use crate::linalg::check_spd;

/// Prior for one calibration parameter. Continuous priors are
/// parameterized on the native scale via (a, b, lo, hi); on the unit
/// scale they reduce to Beta(a, b) and Uniform(0,1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThetaPrior {
    Beta { a: f64, b: f64, lo: f64, hi: f64 },
    Uniform { lo: f64, hi: f64 },
    /// Weights over the 1-based categorical levels; must sum to 1.
    Discrete { weights: Vec<f64> },
}

/// Inverse-Wishart hyperparameters: a C x C positive-definite scale
/// matrix and degrees of freedom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WishartPrior {
    pub scale: DMatrix<f64>,
    pub dof: f64,
}

impl WishartPrior {
    pub fn identity(c: usize, dof: f64) -> Self {
        WishartPrior {
            scale: DMatrix::identity(c, c),
            dof,
        }
    }

    /// Scale chosen so the prior mean is `mean` at the given dof.
    pub fn from_mean(mean: DMatrix<f64>, dof: f64) -> Self {
        let c = mean.nrows() as f64;
        WishartPrior {
            scale: mean * (dof - c - 1.0),
            dof,
        }
    }

    pub fn validate(&self, c: usize, name: &str) -> Result<()> {
        if self.scale.nrows() != c || self.scale.ncols() != c {
            return Err(CoreError::config(format!(
                "{name} scale matrix must be {c} x {c}"
            )));
        }
        if self.dof <= (c - 1) as f64 {
            return Err(CoreError::config(format!(
                "{name} degrees of freedom {} must exceed C - 1 = {}",
                self.dof,
                c - 1
            )));
        }
        check_spd(&self.scale, name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    /// One entry per parameter variable, in catalog order.
    pub theta: Vec<ThetaPrior>,
    pub lambda: WishartPrior,
    pub omega: WishartPrior,
    pub sigma: WishartPrior,
    pub upsilon: WishartPrior,
}

impl PriorSpec {
    pub fn validate(&self, param_vars: &[&VariableSpec], c: usize) -> Result<()> {
        if self.theta.len() != param_vars.len() {
            return Err(CoreError::config(format!(
                "{} theta priors for {} parameters",
                self.theta.len(),
                param_vars.len()
            )));
        }
        for (prior, var) in self.theta.iter().zip(param_vars) {
            match (prior, &var.kind) {
                (ThetaPrior::Beta { a, b, lo, hi }, VarKind::Continuous { .. }) => {
                    if *a <= 0.0 || *b <= 0.0 {
                        return Err(CoreError::config(format!(
                            "Beta shape parameters for {} must be positive",
                            var.name
                        )));
                    }
                    if lo >= hi {
                        return Err(CoreError::config(format!(
                            "Beta support for {} is degenerate",
                            var.name
                        )));
                    }
                }
                (ThetaPrior::Uniform { lo, hi }, VarKind::Continuous { .. }) => {
                    if lo >= hi {
                        return Err(CoreError::config(format!(
                            "uniform support for {} is degenerate",
                            var.name
                        )));
                    }
                }
                (ThetaPrior::Discrete { weights }, VarKind::Categorical { levels }) => {
                    if weights.len() != levels.len() {
                        return Err(CoreError::config(format!(
                            "{} weights for {} levels of {}",
                            weights.len(),
                            levels.len(),
                            var.name
                        )));
                    }
                    if weights.iter().any(|&w| w < 0.0) {
                        return Err(CoreError::config(format!(
                            "negative prior weight for {}",
                            var.name
                        )));
                    }
                    let sum: f64 = weights.iter().sum();
                    if (sum - 1.0).abs() > 1e-9 {
                        return Err(CoreError::config(format!(
                            "prior weights for {} sum to {sum}, expected 1",
                            var.name
                        )));
                    }
                }
                _ => {
                    return Err(CoreError::config(format!(
                        "prior kind does not match variable kind for {}",
                        var.name
                    )));
                }
            }
        }
        self.lambda.validate(c, "lambda prior")?;
        self.omega.validate(c, "omega prior")?;
        self.sigma.validate(c, "sigma prior")?;
        self.upsilon.validate(c, "upsilon prior")
    }
}

impl ThetaPrior {
    /// Draw on the unit scale (continuous) or a 1-based level (categorical).
    pub fn sample_unit<R: Rng>(&self, rng: &mut R) -> Result<f64> {
        match self {
            ThetaPrior::Beta { a, b, .. } => {
                let d = BetaDist::new(*a, *b)
                    .map_err(|e| CoreError::config(format!("invalid Beta prior: {e}")))?;
                Ok(d.sample(rng))
            }
            ThetaPrior::Uniform { .. } => Ok(rng.gen::<f64>()),
            ThetaPrior::Discrete { weights } => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for (i, w) in weights.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        return Ok((i + 1) as f64);
                    }
                }
                Ok(weights.len() as f64)
            }
        }
    }

    /// Log prior density of a continuous parameter on the unit scale.
    /// The native-scale Jacobian is a constant and cancels in MH ratios.
    pub fn log_density_unit(&self, u: f64) -> f64 {
        match self {
            ThetaPrior::Beta { a, b, .. } => {
                if u <= 0.0 || u >= 1.0 {
                    return f64::NEG_INFINITY;
                }
                (a - 1.0) * u.ln() + (b - 1.0) * (1.0 - u).ln() - ln_beta(*a, *b)
            }
            ThetaPrior::Uniform { .. } => {
                if (0.0..=1.0).contains(&u) {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            ThetaPrior::Discrete { weights } => {
                let level = u.round() as usize;
                if level >= 1 && level <= weights.len() {
                    weights[level - 1].ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, ThetaPrior::Discrete { .. })
    }

    /// Native-unit bounds of a continuous prior.
    pub fn native_range(&self) -> Option<(f64, f64)> {
        match self {
            ThetaPrior::Beta { lo, hi, .. } | ThetaPrior::Uniform { lo, hi } => Some((*lo, *hi)),
            ThetaPrior::Discrete { .. } => None,
        }
    }
}

/// ln Gamma via the Lanczos approximation (g = 7, n = 9).
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // Reflection formula.
        std::f64::consts::PI.ln() - (std::f64::consts::PI * x).sin().ln() - ln_gamma(1.0 - x)
    } else {
        let x = x - 1.0;
        let mut a = COEF[0];
        let t = x + 7.5;
        for (i, &c) in COEF.iter().enumerate().skip(1) {
            a += c / (x + i as f64);
        }
        0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
    }
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn ln_gamma_known_values() {
        assert_abs_diff_eq!(ln_gamma(1.0), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ln_gamma(5.0), 24.0f64.ln(), epsilon = 1e-10);
        assert_abs_diff_eq!(ln_gamma(0.5), std::f64::consts::PI.sqrt().ln(), epsilon = 1e-10);
    }

    #[test]
    fn beta_density_integrates_to_one() {
        let p = ThetaPrior::Beta {
            a: 2.5,
            b: 2.5,
            lo: 0.8,
            hi: 1.0,
        };
        let n = 20_000;
        let mut acc = 0.0;
        for i in 0..n {
            let u = (i as f64 + 0.5) / n as f64;
            acc += p.log_density_unit(u).exp();
        }
        assert_abs_diff_eq!(acc / n as f64, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn discrete_sampling_frequencies() {
        let p = ThetaPrior::Discrete {
            weights: vec![0.2, 0.5, 0.3],
        };
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let mut counts = [0usize; 3];
        for _ in 0..30_000 {
            let level = p.sample_unit(&mut rng).unwrap() as usize;
            counts[level - 1] += 1;
        }
        assert_abs_diff_eq!(counts[1] as f64 / 30_000.0, 0.5, epsilon = 0.02);
    }

    #[test]
    fn wishart_prior_validation() {
        let good = WishartPrior::identity(2, 4.0);
        assert!(good.validate(2, "test").is_ok());
        let bad = WishartPrior::identity(2, 0.5);
        assert!(bad.validate(2, "test").is_err());
    }

    #[test]
    fn from_mean_round_trip() {
        let mean = DMatrix::from_row_slice(2, 2, &[0.003, 0.0, 0.0, 0.009]);
        let p = WishartPrior::from_mean(mean.clone(), 20.0);
        let back = crate::linalg::inverse_wishart_mean(&p.scale, p.dof).unwrap();
        assert_abs_diff_eq!(back, mean, epsilon = 1e-12);
    }
}
