//! Every Gibbs full conditional checked against an independent dense
//! joint-Gaussian (or closed-form) oracle on a small instance.

mod common;

use approx::assert_abs_diff_eq;
use bsscal_core::basis::{Catalog, CatalogPolicy, VarRole, VariableSpec};
use bsscal_core::linalg::sample_inverse_wishart;
use bsscal_core::mcmc::Engine;
use bsscal_core::model::{Dataset, OutputTransform, ParameterState, PriorSpec, ThetaPrior, ThetaValue, WishartPrior};
use common::*;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

const TOL: f64 = 1e-8;

#[test]
fn b_conditionals_match_dense_joint() {
    let engine = small_instance(3);
    let (q, mu) = joint_coefficient_posterior(&engine);
    let beta = current_beta(&engine);
    for j in 0..engine.catalog.emulator.len() {
        let (prec, rhs) = engine.b_conditional(j).unwrap();
        let prec_inv = prec.clone().try_inverse().unwrap();
        let mean = &prec_inv * rhs;
        let (oracle_mean, oracle_cov) =
            conditional_from_joint(&q, &mu, &b_block_indices(&engine, j), &beta);
        assert!(
            max_abs_diff_vec(&mean, &oracle_mean) < TOL,
            "B_{j} mean off by {}",
            max_abs_diff_vec(&mean, &oracle_mean)
        );
        assert!(
            max_abs_diff(&prec_inv, &oracle_cov) < TOL,
            "B_{j} covariance off by {}",
            max_abs_diff(&prec_inv, &oracle_cov)
        );
    }
}

#[test]
fn c_conditionals_match_dense_joint() {
    let engine = small_instance(4);
    let (q, mu) = joint_coefficient_posterior(&engine);
    let beta = current_beta(&engine);
    for k in 0..engine.catalog.discrepancy.len() {
        let (prec, rhs) = engine.c_conditional(k).unwrap();
        let prec_inv = prec.clone().try_inverse().unwrap();
        let mean = &prec_inv * rhs;
        let (oracle_mean, oracle_cov) =
            conditional_from_joint(&q, &mu, &c_block_indices(&engine, k), &beta);
        assert!(max_abs_diff_vec(&mean, &oracle_mean) < TOL, "C_{k} mean");
        assert!(max_abs_diff(&prec_inv, &oracle_cov) < TOL, "C_{k} covariance");
    }
}

#[test]
fn wishart_statistics_match_direct_residuals() {
    let engine = small_instance(5);
    // Residuals computed from first principles, bypassing the engine's
    // incremental bookkeeping.
    let b = engine.stacked_b();
    let c = engine.stacked_c();
    let r_exp = engine.experimental_outputs()
        - engine.experimental_design() * &b
        - engine.discrepancy_design_matrix() * &c;
    let r_sim = engine.simulator_outputs() - engine.simulator_design() * &b;
    let (s_scale, s_dof) = engine.sigma_conditional();
    assert!(max_abs_diff(&s_scale, &(r_exp.transpose() * &r_exp + &engine.prior.sigma.scale)) < TOL);
    assert_abs_diff_eq!(s_dof, 5.0 + engine.prior.sigma.dof, epsilon = 1e-12);
    let (u_scale, u_dof) = engine.upsilon_conditional();
    assert!(max_abs_diff(&u_scale, &(r_sim.transpose() * &r_sim + &engine.prior.upsilon.scale)) < TOL);
    assert_abs_diff_eq!(u_dof, 5.0 + engine.prior.upsilon.dof, epsilon = 1e-12);
    for j in 0..engine.catalog.emulator.len() {
        let (scale, dof) = engine.lambda_conditional(j);
        let bj = &engine.state.b[j];
        assert!(max_abs_diff(&scale, &(bj.transpose() * bj + &engine.prior.lambda.scale)) < TOL);
        assert_abs_diff_eq!(dof, bj.nrows() as f64 + engine.prior.lambda.dof, epsilon = 1e-12);
    }
}

#[test]
fn imputation_matches_dense_partition() {
    let engine = small_instance(6);
    // Row 1 has output 1 missing. Oracle: build the bivariate residual
    // conditional directly from Sigma and first-principles residuals.
    let b = engine.stacked_b();
    let c = engine.stacked_c();
    let mean_mat = engine.experimental_design() * &b + engine.discrepancy_design_matrix() * &c;
    let row = 1;
    let sigma = &engine.state.sigma;
    // miss = {1}, obs = {0}.
    let eps_obs = engine.experimental_outputs()[(row, 0)] - mean_mat[(row, 0)];
    let oracle_mean = mean_mat[(row, 1)] + sigma[(1, 0)] / sigma[(0, 0)] * eps_obs;
    let oracle_var = sigma[(1, 1)] - sigma[(1, 0)] * sigma[(0, 1)] / sigma[(0, 0)];
    let (mean, cov) = engine.imputation_conditional(row).unwrap().unwrap();
    assert_abs_diff_eq!(mean[0], oracle_mean, epsilon = TOL);
    assert_abs_diff_eq!(cov[(0, 0)], oracle_var, epsilon = TOL);
}

#[test]
fn univariate_inverse_wishart_matches_scaled_inverse_chi_squared() {
    // For C=1, IW(s, nu) is the scaled inverse chi-squared with mean
    // s/(nu-2) and variance 2 s^2 / ((nu-2)^2 (nu-4)).
    let s = 2.5;
    let nu = 9.0;
    let scale = DMatrix::from_element(1, 1, s);
    let mut rng = ChaCha20Rng::seed_from_u64(12);
    let n = 100_000;
    let draws: Vec<f64> = (0..n)
        .map(|_| sample_inverse_wishart(&mut rng, &scale, nu, "test").unwrap()[(0, 0)])
        .collect();
    let mean = draws.iter().sum::<f64>() / n as f64;
    let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n as f64;
    let expect_mean = s / (nu - 2.0);
    let expect_var = 2.0 * s * s / ((nu - 2.0).powi(2) * (nu - 4.0));
    // Monte-Carlo standard errors.
    let se_mean = (var / n as f64).sqrt();
    assert!(
        (mean - expect_mean).abs() < 4.0 * se_mean,
        "mean {mean} vs {expect_mean}"
    );
    assert!(
        (var - expect_var).abs() < 0.05 * expect_var,
        "variance {var} vs {expect_var}"
    );
}

#[test]
fn simulator_only_regression_reduces_to_normal_equations() {
    // N=0: the B conditional must collapse to ridge regression on the
    // simulator block alone. With a diffuse prior it matches ordinary
    // least squares.
    let vars = vec![
        VariableSpec::continuous("x1", 0.0, 1.0, VarRole::Input),
        VariableSpec::continuous("t1", 0.0, 1.0, VarRole::Parameter),
    ];
    let policy = CatalogPolicy {
        grid_size: 60,
        l_main: 2,
        l_two_way: 0,
        three_way: false,
        ..CatalogPolicy::default()
    };
    let catalog = Catalog::build(vars, policy).unwrap();
    let diffuse = 1e8;
    let prior = PriorSpec {
        theta: vec![ThetaPrior::Uniform { lo: 0.0, hi: 1.0 }],
        lambda: WishartPrior::from_mean(DMatrix::identity(1, 1) * diffuse, 4.0),
        omega: WishartPrior::from_mean(DMatrix::identity(1, 1), 4.0),
        sigma: WishartPrior::from_mean(DMatrix::identity(1, 1) * 0.01, 10.0),
        upsilon: WishartPrior::from_mean(DMatrix::identity(1, 1) * 0.01, 10.0),
    };
    let sim_w: Vec<Vec<f64>> = (0..20)
        .map(|i| vec![(i as f64 + 0.5) / 20.0, ((i * 7) % 20) as f64 / 19.0])
        .collect();
    let sim_y: Vec<Vec<f64>> = sim_w.iter().map(|w| vec![w[0] - 0.3 * w[1]]).collect();
    let data = Dataset {
        exp_x: vec![],
        exp_y: vec![],
        sim_w,
        sim_y,
    };
    let state = ParameterState {
        theta: vec![ThetaValue::Continuous(0.5)],
        b: catalog
            .emulator
            .iter()
            .map(|c| DMatrix::zeros(c.basis_terms.len(), 1))
            .collect(),
        c: catalog
            .discrepancy
            .iter()
            .map(|c| DMatrix::zeros(c.basis_terms.len(), 1))
            .collect(),
        lambda: vec![DMatrix::from_element(1, 1, diffuse); catalog.emulator.len()],
        omega: vec![DMatrix::identity(1, 1); catalog.discrepancy.len()],
        sigma: DMatrix::from_element(1, 1, 0.01),
        upsilon: DMatrix::from_element(1, 1, 0.01),
        imputed: vec![],
    };
    let engine = Engine::new(
        catalog,
        prior,
        vec![OutputTransform::Identity],
        data,
        state,
    )
    .unwrap();
    // Whole-emulator least squares, component by component: since all
    // other blocks are zero, each conditional targets the raw outputs.
    for j in 0..engine.catalog.emulator.len() {
        let (prec, rhs) = engine.b_conditional(j).unwrap();
        let mean = prec.try_inverse().unwrap() * rhs;
        let range = engine.catalog.emulator_range(j);
        let xj = engine.simulator_design().columns_range(range).into_owned();
        let ls = (xj.transpose() * &xj).try_inverse().unwrap()
            * xj.transpose()
            * engine.simulator_outputs();
        let ls_vec = DVector::from_column_slice(ls.as_slice());
        assert!(
            max_abs_diff_vec(&mean, &ls_vec) < 1e-5,
            "component {j}: {mean} vs {ls_vec}"
        );
    }
}

#[test]
fn tiny_prior_covariance_forces_coefficients_to_zero() {
    let mut engine = small_instance(8);
    let c = engine.n_outputs();
    for l in engine.state.lambda.iter_mut() {
        *l = DMatrix::identity(c, c) * 1e-12;
    }
    for o in engine.state.omega.iter_mut() {
        *o = DMatrix::identity(c, c) * 1e-12;
    }
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    for j in 0..engine.catalog.emulator.len() {
        engine.update_b(&mut rng, j).unwrap();
        assert!(engine.state.b[j].abs().max() < 1e-4, "B_{j} not shrunk");
    }
    for k in 0..engine.catalog.discrepancy.len() {
        engine.update_c(&mut rng, k).unwrap();
        assert!(engine.state.c[k].abs().max() < 1e-4, "C_{k} not shrunk");
    }
}
