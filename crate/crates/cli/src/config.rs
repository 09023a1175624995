//! JSON run configuration: variables, outputs, priors, catalog policy,
//! chain settings, and optional prediction/study sections.

use std::path::Path;

use bsscal_core::basis::{Catalog, CatalogPolicy, VarRole, VariableSpec};
use bsscal_core::mcmc::ChainConfig;
use bsscal_core::model::{OutputTransform, PriorSpec, ThetaPrior, ThetaValue, WishartPrior};
use bsscal_core::studylab::MissingPattern;
use bsscal_core::{CoreError, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputSpec {
    pub name: String,
    #[serde(default)]
    pub transform: OutputTransform,
}

/// Inverse-Wishart hyperparameters given as a prior mean matrix (nested
/// row-major arrays) plus degrees of freedom.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WishartConfig {
    pub mean: Vec<Vec<f64>>,
    pub dof: f64,
}

impl WishartConfig {
    fn to_prior(&self, what: &str, c: usize) -> Result<WishartPrior> {
        if self.mean.len() != c || self.mean.iter().any(|r| r.len() != c) {
            return Err(CoreError::config(format!(
                "{what} prior mean must be a {c}x{c} matrix (one row per output)"
            )));
        }
        let m = DMatrix::from_fn(c, c, |i, j| self.mean[i][j]);
        let prior = WishartPrior::from_mean(m, self.dof);
        prior.validate(c, what)?;
        Ok(prior)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PriorConfig {
    /// One prior per parameter variable, in variable order.
    pub theta: Vec<ThetaPrior>,
    pub lambda: WishartConfig,
    pub omega: WishartConfig,
    pub sigma: WishartConfig,
    pub upsilon: WishartConfig,
}

fn default_missing() -> MissingPattern {
    MissingPattern::None
}

/// Settings for the truth-known `study` command. Coefficient-block truths
/// are drawn from the prior with these covariances; continuous theta
/// truths are on the unit scale.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyConfig {
    pub n_datasets: usize,
    pub n_experimental: usize,
    pub n_simulator: usize,
    pub truth_lambda: Vec<Vec<f64>>,
    pub truth_omega: Vec<Vec<f64>>,
    pub truth_sigma: Vec<Vec<f64>>,
    pub truth_upsilon: Vec<Vec<f64>>,
    #[serde(default)]
    pub truth_theta: Option<Vec<ThetaValue>>,
    #[serde(default = "default_missing")]
    pub missing: MissingPattern,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    /// Inputs first, then calibration parameters.
    pub variables: Vec<VariableSpec>,
    pub outputs: Vec<OutputSpec>,
    pub priors: PriorConfig,
    #[serde(default)]
    pub catalog: CatalogPolicy,
    #[serde(default)]
    pub chain: ChainConfig,
    /// Native-unit input points for the fitted-prediction table written
    /// by `calibrate`; defaults to the experimental design.
    #[serde(default)]
    pub prediction_points: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub study: Option<StudyConfig>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CoreError::Io(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CoreError::config(format!("config {}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.outputs.is_empty() {
            return Err(CoreError::config("at least one output is required"));
        }
        let n_params = self
            .variables
            .iter()
            .filter(|v| v.role == VarRole::Parameter)
            .count();
        if self.priors.theta.len() != n_params {
            return Err(CoreError::config(format!(
                "{} theta priors for {} parameter variables",
                self.priors.theta.len(),
                n_params
            )));
        }
        self.chain.validate()?;
        Ok(())
    }

    /// Assemble the core model objects this configuration describes.
    pub fn build(&self) -> Result<(Catalog, PriorSpec, Vec<OutputTransform>)> {
        let catalog = Catalog::build(self.variables.clone(), self.catalog.clone())?;
        let c = self.outputs.len();
        let prior = PriorSpec {
            theta: self.priors.theta.clone(),
            lambda: self.priors.lambda.to_prior("lambda", c)?,
            omega: self.priors.omega.to_prior("omega", c)?,
            sigma: self.priors.sigma.to_prior("sigma", c)?,
            upsilon: self.priors.upsilon.to_prior("upsilon", c)?,
        };
        let n_inputs = catalog.n_inputs();
        let param_vars: Vec<&VariableSpec> = catalog.vars[n_inputs..].iter().collect();
        prior.validate(&param_vars, c)?;
        let transforms = self.outputs.iter().map(|o| o.transform).collect();
        Ok((catalog, prior, transforms))
    }

    pub fn output_names(&self) -> Vec<String> {
        self.outputs.iter().map(|o| o.name.clone()).collect()
    }
}
