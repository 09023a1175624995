use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Which blocks the Gibbs scan updates. All on by default; freezing
/// blocks is useful for validation runs against analytic posteriors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct UpdateFlags {
    pub b: bool,
    pub c: bool,
    pub lambda: bool,
    pub omega: bool,
    pub sigma: bool,
    pub upsilon: bool,
    pub imputation: bool,
    pub theta_continuous: bool,
    pub theta_categorical: bool,
}

impl Default for UpdateFlags {
    fn default() -> Self {
        UpdateFlags {
            b: true,
            c: true,
            lambda: true,
            omega: true,
            sigma: true,
            upsilon: true,
            imputation: true,
            theta_continuous: true,
            theta_categorical: true,
        }
    }
}

/// Chain driver configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChainConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// Target acceptance rate for continuous-parameter proposals.
    pub target_acceptance: f64,
    /// Adapt proposal scales during burn-in (frozen afterwards).
    pub adapt_during_burnin: bool,
    /// Initial proposal standard deviation on the logit scale.
    pub initial_proposal_sd: f64,
    /// Iterations between checkpoint writes when a path is supplied.
    pub checkpoint_interval: usize,
    pub updates: UpdateFlags,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            iterations: 20_000,
            burn_in: 10_000,
            thin: 1,
            seed: 0,
            target_acceptance: 0.30,
            adapt_during_burnin: true,
            initial_proposal_sd: 1.0,
            checkpoint_interval: 1000,
            updates: UpdateFlags::default(),
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.iterations {
            return Err(CoreError::config(format!(
                "burn_in {} must be less than iterations {}",
                self.burn_in, self.iterations
            )));
        }
        if self.thin == 0 {
            return Err(CoreError::config("thin must be at least 1"));
        }
        if !(self.target_acceptance > 0.0 && self.target_acceptance < 1.0) {
            return Err(CoreError::config(format!(
                "target_acceptance {} must lie in (0,1)",
                self.target_acceptance
            )));
        }
        if !(self.initial_proposal_sd > 0.0) {
            return Err(CoreError::config("initial_proposal_sd must be positive"));
        }
        Ok(())
    }

    /// Number of recorded samples.
    pub fn sample_count(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_sized() {
        let c = ChainConfig::default();
        c.validate().unwrap();
        assert_eq!(c.iterations, 20_000);
        assert_eq!(c.burn_in, 10_000);
        assert_eq!(c.sample_count(), 10_000);
        assert_eq!(c.target_acceptance, 0.30);
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut c = ChainConfig::default();
        c.burn_in = c.iterations;
        assert!(c.validate().is_err());
        let mut c = ChainConfig::default();
        c.thin = 0;
        assert!(c.validate().is_err());
        let mut c = ChainConfig::default();
        c.target_acceptance = 1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn json_round_trip() {
        let c = ChainConfig {
            seed: 42,
            ..ChainConfig::default()
        };
        let s = serde_json::to_string(&c).unwrap();
        let back: ChainConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
    }
}
