//! Metropolis-Hastings steps for the calibration parameters.
//!
//! Continuous parameters move one at a time under a logit-normal random
//! walk; all categorical parameters move together with the discrepancy
//! coefficients in a single block proposal built from the sequential full
//! conditionals of each C_k.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::engine::Engine;
use crate::basis::VarKind;
use crate::error::{CoreError, Result};
use crate::linalg::{
    cholesky_with_jitter, mvn_logpdf_precision, sample_mvn_from_precision, LN_2PI,
};
use crate::model::ThetaValue;

/// Keep logits finite at the (measure-zero) boundary.
const BOUNDARY_NUDGE: f64 = 1e-12;

impl Engine {
    /// One logit-normal random-walk update of continuous parameter q
    /// (index into the theta vector). Only the N experimental residuals
    /// are recomputed; the simulator block is untouched.
    pub fn mh_continuous_theta<R: Rng>(
        &mut self,
        rng: &mut R,
        q: usize,
        proposal_sd: f64,
    ) -> Result<bool> {
        let ThetaValue::Continuous(u) = self.state.theta[q] else {
            return Err(CoreError::invalid(format!(
                "parameter {q} is not continuous"
            )));
        };
        let u = u.clamp(BOUNDARY_NUDGE, 1.0 - BOUNDARY_NUDGE);
        let z = (u / (1.0 - u)).ln();
        let z_star = z + proposal_sd * rng.sample::<f64, _>(StandardNormal);
        let u_star = (1.0 / (1.0 + (-z_star).exp())).clamp(BOUNDARY_NUDGE, 1.0 - BOUNDARY_NUDGE);

        let prior = &self.prior.theta[q];
        let lp_cur = prior.log_density_unit(u);
        let lp_prop = prior.log_density_unit(u_star);
        if lp_cur == f64::NEG_INFINITY {
            return Err(CoreError::invalid(
                "current theta has zero prior density; state is corrupt",
            ));
        }
        if lp_prop == f64::NEG_INFINITY {
            return Ok(false);
        }

        let mut theta_prop = self.state.theta.clone();
        theta_prop[q] = ThetaValue::Continuous(u_star);
        let phi_prop = self.phi_at(&theta_prop)?;
        let r_prop = self.residuals_for(&phi_prop, None);
        let l1_prop = self.experimental_loglik_of(&r_prop)?;
        let l1_cur = self.experimental_loglik()?;

        // Hastings correction of the logit-normal proposal reduces to the
        // ratio of logit Jacobians.
        let log_ratio = l1_prop - l1_cur + lp_prop - lp_cur + u_star.ln()
            + (1.0 - u_star).ln()
            - u.ln()
            - (1.0 - u).ln();
        let accept = log_ratio >= 0.0 || rng.gen::<f64>().ln() < log_ratio;
        if accept {
            self.commit_theta(theta_prop, phi_prop, r_prop);
        }
        Ok(accept)
    }

    /// Log prior density of a full set of discrepancy coefficient blocks:
    /// rows of C_k are iid N(0, Omega_k).
    pub fn c_prior_log_density(&self, blocks: &[DMatrix<f64>]) -> Result<f64> {
        let c = self.n_outputs() as f64;
        let mut total = 0.0;
        for (ck, omega) in blocks.iter().zip(&self.state.omega) {
            let l = ck.nrows() as f64;
            let chol = cholesky_with_jitter(omega, "C prior density")?;
            let log_det: f64 = chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>() * 2.0;
            let quad = (chol.solve(&ck.transpose()) * ck).trace();
            total += -0.5 * (l * c * LN_2PI + l * log_det + quad);
        }
        Ok(total)
    }

    /// Sequential construction shared by the forward proposal and the
    /// reverse-density evaluation: walk the discrepancy components in
    /// order under the given design, replacing block k before moving on.
    /// When `draws` is None the target blocks' density is evaluated
    /// instead of sampling.
    pub(crate) fn sequential_c_pass<R: Rng>(
        &self,
        rng: &mut R,
        phi: &DMatrix<f64>,
        start_blocks: &[DMatrix<f64>],
        target_blocks: Option<&[DMatrix<f64>]>,
        sigma_inv: &DMatrix<f64>,
    ) -> Result<(Vec<DMatrix<f64>>, f64)> {
        let b = self.stacked_b();
        let mut blocks = start_blocks.to_vec();
        // Full residual under the current mixed blocks, maintained
        // incrementally as each block is replaced.
        let mut resid = self.experimental_outputs() - phi * b;
        for (k, ck) in blocks.iter().enumerate() {
            let range = self.catalog.discrepancy_range(k);
            resid -= self.discrepancy_design_matrix().columns_range(range) * ck;
        }
        let mut log_q = 0.0;
        let c_out = self.n_outputs();
        for k in 0..blocks.len() {
            let range = self.catalog.discrepancy_range(k);
            let l = range.len();
            let psi_k = self.discrepancy_design_matrix().columns_range(range.clone());
            let r_wo = &resid + psi_k * &blocks[k];
            let (precision, rhs) = self.c_conditional_for(k, &r_wo, sigma_inv)?;
            let new = match target_blocks {
                None => {
                    let (mean, draw) =
                        sample_mvn_from_precision(rng, &precision, &rhs, "categorical block")?;
                    log_q += mvn_logpdf_precision(&draw, &mean, &precision, "categorical block")?;
                    DMatrix::from_column_slice(l, c_out, draw.as_slice())
                }
                Some(targets) => {
                    let mean = cholesky_with_jitter(&precision, "categorical block")?.solve(&rhs);
                    let tv = DVector::from_column_slice(targets[k].as_slice());
                    log_q += mvn_logpdf_precision(&tv, &mean, &precision, "categorical block")?;
                    targets[k].clone()
                }
            };
            let psi_k = self.discrepancy_design_matrix().columns_range(range);
            resid += psi_k * (&blocks[k] - &new);
            blocks[k] = new;
        }
        Ok((blocks, log_q))
    }

    /// Single MH update of all categorical parameters plus the full set
    /// of discrepancy coefficients. Returns None when no categorical
    /// parameter exists.
    pub fn mh_categorical_block<R: Rng>(&mut self, rng: &mut R) -> Result<Option<bool>> {
        let n_inputs = self.catalog.n_inputs();
        let cat: Vec<(usize, usize)> = self
            .state
            .theta
            .iter()
            .enumerate()
            .filter_map(|(q, t)| match t {
                ThetaValue::Categorical(_) => {
                    match &self.catalog.vars[n_inputs + q].kind {
                        VarKind::Categorical { levels } => Some((q, levels.len())),
                        _ => None,
                    }
                }
                _ => None,
            })
            .collect();
        if cat.is_empty() {
            return Ok(None);
        }

        // Each category proposed equally likely; the uniform proposal
        // density cancels from the Hastings ratio.
        let mut theta_prop = self.state.theta.clone();
        for &(q, g) in &cat {
            theta_prop[q] = ThetaValue::Categorical(rng.gen_range(1..=g));
        }
        let phi_prop = self.phi_at(&theta_prop)?;
        let sigma_inv = cholesky_with_jitter(&self.state.sigma, "categorical block: sigma")?
            .inverse();

        // Forward: draw C* sequentially under the proposed theta.
        let current_c = self.state.c.clone();
        let (c_prop, log_q_fwd) =
            self.sequential_c_pass(rng, &phi_prop, &current_c, None, &sigma_inv)?;
        // Reverse: the mirrored pass starts from C* under the current
        // theta and walks back to the current blocks.
        let phi_cur = self.experimental_design().clone();
        let (_, log_q_rev) =
            self.sequential_c_pass(rng, &phi_cur, &c_prop, Some(&current_c), &sigma_inv)?;

        let r_prop = self.residuals_for(&phi_prop, Some(&c_prop));
        let l1_prop = self.experimental_loglik_of(&r_prop)?;
        let l1_cur = self.experimental_loglik()?;
        let lp_c_prop = self.c_prior_log_density(&c_prop)?;
        let lp_c_cur = self.c_prior_log_density(&current_c)?;
        let lp_t_prop: f64 = cat
            .iter()
            .map(|&(q, _)| self.prior.theta[q].log_density_unit(theta_prop[q].coord()))
            .sum();
        let lp_t_cur: f64 = cat
            .iter()
            .map(|&(q, _)| self.prior.theta[q].log_density_unit(self.state.theta[q].coord()))
            .sum();

        let log_ratio = l1_prop - l1_cur + lp_c_prop - lp_c_cur + lp_t_prop - lp_t_cur
            + log_q_rev
            - log_q_fwd;
        let accept = log_ratio >= 0.0 || rng.gen::<f64>().ln() < log_ratio;
        if accept {
            self.state.c = c_prop;
            self.commit_theta(theta_prop, phi_prop, r_prop);
        }
        Ok(Some(accept))
    }
}

/// Stochastic-approximation step for the proposal scale: log sigma moves
/// by i^{-0.6} (accept - target), applied during burn-in only.
pub fn adapt_proposal_sd(sd: f64, iteration: usize, accepted: bool, target: f64) -> f64 {
    let gamma = (iteration.max(1) as f64).powf(-0.6);
    let step = if accepted { 1.0 - target } else { -target };
    (sd.ln() + gamma * step).exp()
}
