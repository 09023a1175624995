//! Sampler working state: transformed data, design matrices, residuals,
//! and the conjugate full-conditional updates.
//!
//! Residual matrices are maintained incrementally so each block update
//! costs O(L(N+M)) plus an O(L^3) factorization, never a full refit.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::basis::Catalog;
use crate::error::{CoreError, Result};
use crate::linalg::{
    cholesky_with_jitter, sample_inverse_wishart, sample_mvn, sample_mvn_from_precision, LN_2PI,
};
use crate::model::{
    validate_dataset, Dataset, OutputTransform, ParameterState, PriorSpec, ThetaValue,
};

/// Everything the Gibbs scan needs, preassembled. The catalog, priors,
/// and data are immutable; `state`, the residuals, and the experimental
/// emulator design (which depends on theta) evolve together.
pub struct Engine {
    pub catalog: Catalog,
    pub prior: PriorSpec,
    pub transforms: Vec<OutputTransform>,
    pub data: Dataset,
    /// N x P experimental inputs on the unit scale.
    exp_x_unit: Vec<Vec<f64>>,
    /// N x C transformed experimental outputs, missing cells holding the
    /// current imputations.
    y_exp: DMatrix<f64>,
    /// M x C transformed simulator outputs.
    y_sim: DMatrix<f64>,
    /// N x L_delta discrepancy design (fixed).
    psi: DMatrix<f64>,
    /// M x L_eta emulator design at the simulator points (fixed).
    phi_star: DMatrix<f64>,
    /// N x L_eta emulator design at the experimental points under the
    /// current theta.
    phi: DMatrix<f64>,
    /// y_exp - phi B - psi C.
    r_exp: DMatrix<f64>,
    /// y_sim - phi_star B.
    r_sim: DMatrix<f64>,
    /// Per-component Gram matrices of the fixed designs.
    gram_star: Vec<DMatrix<f64>>,
    gram_psi: Vec<DMatrix<f64>>,
    /// Missing experimental cells in canonical (row, output) order.
    missing: Vec<(usize, usize)>,
    pub state: ParameterState,
    exp_lik_evals: u64,
    sim_lik_evals: u64,
}

impl Engine {
    pub fn new(
        catalog: Catalog,
        prior: PriorSpec,
        transforms: Vec<OutputTransform>,
        data: Dataset,
        state: ParameterState,
    ) -> Result<Self> {
        let issues = validate_dataset(&data, &catalog.vars);
        if !issues.is_empty() {
            return Err(CoreError::Validation(issues));
        }
        let c = data.n_outputs();
        if transforms.len() != c {
            return Err(CoreError::config(format!(
                "{} transforms for {c} outputs",
                transforms.len()
            )));
        }
        let input_vars: Vec<_> = catalog.vars[..catalog.n_inputs()].to_vec();
        let exp_x_unit: Vec<Vec<f64>> = data
            .exp_x
            .iter()
            .map(|row| crate::model::scale_point(row, &input_vars))
            .collect::<Result<_>>()?;
        let sim_unit: Vec<Vec<f64>> = data
            .sim_w
            .iter()
            .map(|row| crate::model::scale_point(row, &catalog.vars))
            .collect::<Result<_>>()?;

        let n = data.n_experimental();
        let m = data.n_simulator();
        let missing = data.missing_cells();
        if state.imputed.len() != missing.len() {
            return Err(CoreError::config(format!(
                "{} imputations for {} missing cells",
                state.imputed.len(),
                missing.len()
            )));
        }
        let mut y_exp = DMatrix::zeros(n, c);
        for (i, row) in data.exp_y.iter().enumerate() {
            for (k, cell) in row.iter().enumerate() {
                if let Some(v) = cell {
                    y_exp[(i, k)] = transforms[k].apply(*v)?;
                }
            }
        }
        for (idx, &(i, k)) in missing.iter().enumerate() {
            y_exp[(i, k)] = state.imputed[idx];
        }
        let mut y_sim = DMatrix::zeros(m, c);
        for (i, row) in data.sim_y.iter().enumerate() {
            for (k, &v) in row.iter().enumerate() {
                y_sim[(i, k)] = transforms[k].apply(v)?;
            }
        }

        let psi = catalog.discrepancy_design(&exp_x_unit)?;
        let phi_star = catalog.emulator_design(&sim_unit)?;
        let gram_star = (0..catalog.emulator.len())
            .map(|j| {
                let block = phi_star.columns_range(catalog.emulator_range(j));
                block.transpose() * block
            })
            .collect();
        let gram_psi = (0..catalog.discrepancy.len())
            .map(|k| {
                let block = psi.columns_range(catalog.discrepancy_range(k));
                block.transpose() * block
            })
            .collect();

        let mut engine = Engine {
            exp_x_unit,
            y_exp,
            y_sim,
            psi,
            phi_star,
            phi: DMatrix::zeros(n, catalog.emulator_cols()),
            r_exp: DMatrix::zeros(n, c),
            r_sim: DMatrix::zeros(m, c),
            gram_star,
            gram_psi,
            missing,
            catalog,
            prior,
            transforms,
            data,
            state,
            exp_lik_evals: 0,
            sim_lik_evals: 0,
        };
        engine.phi = engine.phi_at(&engine.state.theta.clone())?;
        engine.recompute_residuals();
        Ok(engine)
    }

    pub fn n_experimental(&self) -> usize {
        self.y_exp.nrows()
    }

    pub fn n_simulator(&self) -> usize {
        self.y_sim.nrows()
    }

    pub fn n_outputs(&self) -> usize {
        self.y_exp.ncols()
    }

    pub fn missing_cells(&self) -> &[(usize, usize)] {
        &self.missing
    }

    pub fn experimental_design(&self) -> &DMatrix<f64> {
        &self.phi
    }

    pub fn simulator_design(&self) -> &DMatrix<f64> {
        &self.phi_star
    }

    pub fn discrepancy_design_matrix(&self) -> &DMatrix<f64> {
        &self.psi
    }

    pub fn experimental_outputs(&self) -> &DMatrix<f64> {
        &self.y_exp
    }

    pub fn simulator_outputs(&self) -> &DMatrix<f64> {
        &self.y_sim
    }

    pub fn experimental_residuals(&self) -> &DMatrix<f64> {
        &self.r_exp
    }

    pub fn simulator_residuals(&self) -> &DMatrix<f64> {
        &self.r_sim
    }

    /// How many times the experimental-block likelihood has been evaluated.
    pub fn experimental_likelihood_evals(&self) -> u64 {
        self.exp_lik_evals
    }

    /// How many times the simulator-block likelihood has been evaluated.
    /// Theta updates must never bump this counter.
    pub fn simulator_likelihood_evals(&self) -> u64 {
        self.sim_lik_evals
    }

    /// Stack per-component coefficient blocks into one tall matrix.
    fn stacked(blocks: &[DMatrix<f64>], cols: usize) -> DMatrix<f64> {
        let rows: usize = blocks.iter().map(DMatrix::nrows).sum();
        let mut out = DMatrix::zeros(rows, cols);
        let mut at = 0;
        for b in blocks {
            out.rows_mut(at, b.nrows()).copy_from(b);
            at += b.nrows();
        }
        out
    }

    pub fn stacked_b(&self) -> DMatrix<f64> {
        Self::stacked(&self.state.b, self.n_outputs())
    }

    pub fn stacked_c(&self) -> DMatrix<f64> {
        Self::stacked(&self.state.c, self.n_outputs())
    }

    /// Numeric theta coordinates in variable order (P inputs skipped).
    pub fn theta_coords(theta: &[ThetaValue]) -> Vec<f64> {
        theta.iter().map(ThetaValue::coord).collect()
    }

    /// Emulator design at the experimental inputs for an arbitrary theta.
    pub fn phi_at(&self, theta: &[ThetaValue]) -> Result<DMatrix<f64>> {
        let coords = Self::theta_coords(theta);
        let points: Vec<Vec<f64>> = self
            .exp_x_unit
            .iter()
            .map(|x| {
                let mut p = x.clone();
                p.extend_from_slice(&coords);
                p
            })
            .collect();
        self.catalog.emulator_design(&points)
    }

    /// Rebuild both residual matrices from scratch.
    pub fn recompute_residuals(&mut self) {
        let b = self.stacked_b();
        let c = self.stacked_c();
        self.r_exp = &self.y_exp - &self.phi * &b - &self.psi * &c;
        self.r_sim = &self.y_sim - &self.phi_star * &b;
    }

    /// Log likelihood of the experimental block given a residual matrix.
    fn gaussian_block_loglik(r: &DMatrix<f64>, cov: &DMatrix<f64>) -> Result<f64> {
        let n = r.nrows() as f64;
        let c = r.ncols() as f64;
        let chol = cholesky_with_jitter(cov, "block likelihood")?;
        let log_det: f64 = chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>() * 2.0;
        let quad = (chol.solve(&r.transpose()) * r).trace();
        Ok(-0.5 * (n * c * LN_2PI + n * log_det + quad))
    }

    /// Experimental log likelihood at the current state.
    pub fn experimental_loglik(&mut self) -> Result<f64> {
        self.exp_lik_evals += 1;
        Self::gaussian_block_loglik(&self.r_exp, &self.state.sigma.clone())
    }

    /// Experimental log likelihood for a candidate residual matrix.
    pub fn experimental_loglik_of(&mut self, r: &DMatrix<f64>) -> Result<f64> {
        self.exp_lik_evals += 1;
        Self::gaussian_block_loglik(r, &self.state.sigma.clone())
    }

    /// Simulator log likelihood at the current state.
    pub fn simulator_loglik(&mut self) -> Result<f64> {
        self.sim_lik_evals += 1;
        Self::gaussian_block_loglik(&self.r_sim, &self.state.upsilon.clone())
    }

    fn inv_spd(m: &DMatrix<f64>, context: &str) -> Result<DMatrix<f64>> {
        Ok(cholesky_with_jitter(m, context)?.inverse())
    }

    // ----- inverse-Wishart conditionals -------------------------------

    /// Posterior (scale, dof) of Lambda_j.
    pub fn lambda_conditional(&self, j: usize) -> (DMatrix<f64>, f64) {
        let bj = &self.state.b[j];
        let scale = bj.transpose() * bj + &self.prior.lambda.scale;
        (scale, bj.nrows() as f64 + self.prior.lambda.dof)
    }

    /// Posterior (scale, dof) of Omega_k.
    pub fn omega_conditional(&self, k: usize) -> (DMatrix<f64>, f64) {
        let ck = &self.state.c[k];
        let scale = ck.transpose() * ck + &self.prior.omega.scale;
        (scale, ck.nrows() as f64 + self.prior.omega.dof)
    }

    /// Posterior (scale, dof) of Sigma.
    pub fn sigma_conditional(&self) -> (DMatrix<f64>, f64) {
        let scale = self.r_exp.transpose() * &self.r_exp + &self.prior.sigma.scale;
        (scale, self.n_experimental() as f64 + self.prior.sigma.dof)
    }

    /// Posterior (scale, dof) of Upsilon.
    pub fn upsilon_conditional(&self) -> (DMatrix<f64>, f64) {
        let scale = self.r_sim.transpose() * &self.r_sim + &self.prior.upsilon.scale;
        (scale, self.n_simulator() as f64 + self.prior.upsilon.dof)
    }

    pub fn update_lambda<R: Rng>(&mut self, rng: &mut R, j: usize) -> Result<()> {
        let (scale, dof) = self.lambda_conditional(j);
        self.state.lambda[j] = sample_inverse_wishart(rng, &scale, dof, "lambda update")?;
        Ok(())
    }

    pub fn update_omega<R: Rng>(&mut self, rng: &mut R, k: usize) -> Result<()> {
        let (scale, dof) = self.omega_conditional(k);
        self.state.omega[k] = sample_inverse_wishart(rng, &scale, dof, "omega update")?;
        Ok(())
    }

    pub fn update_sigma<R: Rng>(&mut self, rng: &mut R) -> Result<()> {
        let (scale, dof) = self.sigma_conditional();
        self.state.sigma = sample_inverse_wishart(rng, &scale, dof, "sigma update")?;
        Ok(())
    }

    pub fn update_upsilon<R: Rng>(&mut self, rng: &mut R) -> Result<()> {
        let (scale, dof) = self.upsilon_conditional();
        self.state.upsilon = sample_inverse_wishart(rng, &scale, dof, "upsilon update")?;
        Ok(())
    }

    // ----- Gaussian coefficient conditionals --------------------------

    /// Precision and linear term of vec(B_j) | rest, with vec stacking
    /// columns (so index c*L + l addresses B_j[l, c]).
    pub fn b_conditional(&self, j: usize) -> Result<(DMatrix<f64>, DVector<f64>)> {
        let range = self.catalog.emulator_range(j);
        let l = range.len();
        let phi_j = self.phi.columns_range(range.clone());
        let phi_star_j = self.phi_star.columns_range(range);
        let bj = &self.state.b[j];
        // Residual targets excluding component j.
        let r_exp_wo = &self.r_exp + phi_j * bj;
        let r_sim_wo = &self.r_sim + phi_star_j * bj;

        let sigma_inv = Self::inv_spd(&self.state.sigma, "B update: sigma")?;
        let upsilon_inv = Self::inv_spd(&self.state.upsilon, "B update: upsilon")?;
        let lambda_inv = Self::inv_spd(&self.state.lambda[j], "B update: lambda")?;

        let gram_exp = phi_j.transpose() * phi_j;
        let precision = sigma_inv.kronecker(&gram_exp)
            + upsilon_inv.kronecker(&self.gram_star[j])
            + lambda_inv.kronecker(&DMatrix::identity(l, l));
        let rhs_mat =
            phi_j.transpose() * r_exp_wo * sigma_inv + phi_star_j.transpose() * r_sim_wo * upsilon_inv;
        let rhs = DVector::from_column_slice(rhs_mat.as_slice());
        Ok((precision, rhs))
    }

    /// Precision and linear term of vec(C_k) | rest for a given
    /// experimental residual target (y - phi B - psi_{-k} C_{-k}).
    pub fn c_conditional_for(
        &self,
        k: usize,
        r_exp_wo: &DMatrix<f64>,
        sigma_inv: &DMatrix<f64>,
    ) -> Result<(DMatrix<f64>, DVector<f64>)> {
        let range = self.catalog.discrepancy_range(k);
        let l = range.len();
        let psi_k = self.psi.columns_range(range);
        let omega_inv = Self::inv_spd(&self.state.omega[k], "C update: omega")?;
        let precision = sigma_inv.kronecker(&self.gram_psi[k])
            + omega_inv.kronecker(&DMatrix::identity(l, l));
        let rhs_mat = psi_k.transpose() * r_exp_wo * sigma_inv;
        let rhs = DVector::from_column_slice(rhs_mat.as_slice());
        Ok((precision, rhs))
    }

    /// Precision and linear term of vec(C_k) | rest at the current state.
    pub fn c_conditional(&self, k: usize) -> Result<(DMatrix<f64>, DVector<f64>)> {
        let range = self.catalog.discrepancy_range(k);
        let psi_k = self.psi.columns_range(range);
        let r_exp_wo = &self.r_exp + psi_k * &self.state.c[k];
        let sigma_inv = Self::inv_spd(&self.state.sigma, "C update: sigma")?;
        self.c_conditional_for(k, &r_exp_wo, &sigma_inv)
    }

    fn unvec(draw: &DVector<f64>, l: usize, c: usize) -> DMatrix<f64> {
        DMatrix::from_column_slice(l, c, draw.as_slice())
    }

    pub fn update_b<R: Rng>(&mut self, rng: &mut R, j: usize) -> Result<()> {
        let (precision, rhs) = self.b_conditional(j)?;
        let (_, draw) = sample_mvn_from_precision(rng, &precision, &rhs, "B update")?;
        let range = self.catalog.emulator_range(j);
        let l = range.len();
        let new = Self::unvec(&draw, l, self.n_outputs());
        let delta = &self.state.b[j] - &new;
        // Incremental residual maintenance: r += phi_j (B_old - B_new).
        self.r_exp += self.phi.columns_range(range.clone()) * &delta;
        self.r_sim += self.phi_star.columns_range(range) * &delta;
        self.state.b[j] = new;
        Ok(())
    }

    pub fn update_c<R: Rng>(&mut self, rng: &mut R, k: usize) -> Result<()> {
        let (precision, rhs) = self.c_conditional(k)?;
        let (_, draw) = sample_mvn_from_precision(rng, &precision, &rhs, "C update")?;
        let range = self.catalog.discrepancy_range(k);
        let l = range.len();
        let new = Self::unvec(&draw, l, self.n_outputs());
        let delta = &self.state.c[k] - &new;
        self.r_exp += self.psi.columns_range(range) * &delta;
        self.state.c[k] = new;
        Ok(())
    }

    // ----- missing-data imputation ------------------------------------

    /// Conditional (mean, covariance) of the missing transformed outputs
    /// in one experimental row given its observed residuals.
    pub fn imputation_conditional(
        &self,
        row: usize,
    ) -> Result<Option<(DVector<f64>, DMatrix<f64>)>> {
        let miss: Vec<usize> = self
            .missing
            .iter()
            .filter(|&&(n, _)| n == row)
            .map(|&(_, k)| k)
            .collect();
        if miss.is_empty() {
            return Ok(None);
        }
        let c = self.n_outputs();
        let obs: Vec<usize> = (0..c).filter(|k| !miss.contains(k)).collect();
        let sigma = &self.state.sigma;
        let s_mm = DMatrix::from_fn(miss.len(), miss.len(), |a, b| sigma[(miss[a], miss[b])]);
        let s_mo = DMatrix::from_fn(miss.len(), obs.len(), |a, b| sigma[(miss[a], obs[b])]);
        let s_oo = DMatrix::from_fn(obs.len(), obs.len(), |a, b| sigma[(obs[a], obs[b])]);
        let eps_obs = DVector::from_fn(obs.len(), |a, _| self.r_exp[(row, obs[a])]);
        // Model mean = observed value minus residual (holds for every cell).
        let model_mean = DVector::from_fn(miss.len(), |a, _| {
            self.y_exp[(row, miss[a])] - self.r_exp[(row, miss[a])]
        });
        if obs.is_empty() {
            return Ok(Some((model_mean, s_mm)));
        }
        let chol = cholesky_with_jitter(&s_oo, "imputation: observed block")?;
        let gain = s_mo * chol.inverse();
        let mean = model_mean + &gain * eps_obs;
        let cov = s_mm - gain * s_mo_transpose(&self.state.sigma, &miss, &obs);
        Ok(Some((mean, cov)))
    }

    /// Redraw every missing cell from its conditional given the observed
    /// residuals in the same row.
    pub fn impute_missing<R: Rng>(&mut self, rng: &mut R) -> Result<()> {
        let rows: Vec<usize> = {
            let mut r: Vec<usize> = self.missing.iter().map(|&(n, _)| n).collect();
            r.dedup();
            r
        };
        for row in rows {
            let Some((mean, cov)) = self.imputation_conditional(row)? else {
                continue;
            };
            let draw = sample_mvn(rng, &mean, &cov, "imputation draw")?;
            let miss: Vec<usize> = self
                .missing
                .iter()
                .filter(|&&(n, _)| n == row)
                .map(|&(_, k)| k)
                .collect();
            for (a, &k) in miss.iter().enumerate() {
                let model_mean = self.y_exp[(row, k)] - self.r_exp[(row, k)];
                self.y_exp[(row, k)] = draw[a];
                self.r_exp[(row, k)] = draw[a] - model_mean;
            }
        }
        // Refresh the canonical imputation vector.
        for (idx, &(n, k)) in self.missing.iter().enumerate() {
            self.state.imputed[idx] = self.y_exp[(n, k)];
        }
        Ok(())
    }

    // ----- theta bookkeeping ------------------------------------------

    /// Commit a new theta with its experimental design and residuals.
    pub(crate) fn commit_theta(
        &mut self,
        theta: Vec<ThetaValue>,
        phi: DMatrix<f64>,
        r_exp: DMatrix<f64>,
    ) {
        self.state.theta = theta;
        self.phi = phi;
        self.r_exp = r_exp;
    }

    /// Candidate experimental residuals under a new theta (and optionally
    /// new discrepancy coefficients).
    pub fn residuals_for(
        &self,
        phi: &DMatrix<f64>,
        c_blocks: Option<&[DMatrix<f64>]>,
    ) -> DMatrix<f64> {
        let b = self.stacked_b();
        let c = match c_blocks {
            Some(blocks) => Self::stacked(blocks, self.n_outputs()),
            None => self.stacked_c(),
        };
        &self.y_exp - phi * b - &self.psi * c
    }
}

fn s_mo_transpose(sigma: &DMatrix<f64>, miss: &[usize], obs: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(obs.len(), miss.len(), |a, b| sigma[(obs[a], miss[b])])
}
