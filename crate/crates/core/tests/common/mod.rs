//! Shared fixtures and independent oracles for integration tests.
//!
//! The oracles deliberately take a different computational route than the
//! library: they assemble the dense joint Gaussian over *all* coefficient
//! blocks at once and derive each conditional by partitioning, instead of
//! using per-block normal-equation formulas.

#![allow(dead_code)]

use bsscal_core::basis::{Catalog, CatalogPolicy, VarRole, VariableSpec};
use bsscal_core::mcmc::Engine;
use bsscal_core::model::{
    init_state, Dataset, OutputTransform, PriorSpec, ThetaPrior, WishartPrior,
};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Small instance: N=5, M=5, C=2, one input, one continuous parameter,
/// catalog restricted to {constant, main effects with L=2}.
pub fn small_instance(seed: u64) -> Engine {
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
    let prior = PriorSpec {
        theta: vec![ThetaPrior::Uniform { lo: 0.0, hi: 1.0 }],
        lambda: WishartPrior::from_mean(DMatrix::identity(2, 2) * 0.8, 6.0),
        omega: WishartPrior::from_mean(DMatrix::identity(2, 2) * 0.5, 6.0),
        sigma: WishartPrior::from_mean(
            DMatrix::from_row_slice(2, 2, &[0.05, 0.01, 0.01, 0.04]),
            20.0,
        ),
        upsilon: WishartPrior::from_mean(DMatrix::identity(2, 2) * 0.01, 20.0),
    };
    let exp_x: Vec<Vec<f64>> = (0..5).map(|i| vec![(i as f64 + 0.5) / 5.0]).collect();
    let exp_y: Vec<Vec<Option<f64>>> = (0..5)
        .map(|i| {
            let x = (i as f64 + 0.5) / 5.0;
            vec![
                Some((3.0 * x).sin()),
                if i == 1 { None } else { Some(0.4 * x + 0.2) },
            ]
        })
        .collect();
    let sim_w: Vec<Vec<f64>> = (0..5)
        .map(|i| vec![(i as f64 + 0.3) / 5.0, ((i * 3) % 5) as f64 / 4.0])
        .collect();
    let sim_y: Vec<Vec<f64>> = sim_w
        .iter()
        .map(|w| vec![(3.0 * w[0]).sin() + 0.2 * w[1], 0.4 * w[0] - 0.1 * w[1]])
        .collect();
    let data = Dataset {
        exp_x,
        exp_y,
        sim_w,
        sim_y,
    };
    let transforms = vec![OutputTransform::Identity; 2];
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut state = init_state(&catalog, &prior, &data, &transforms, &mut rng).unwrap();
    // Perturb the state so conditionals are exercised away from zero.
    use rand::Rng;
    for blk in state.b.iter_mut().chain(state.c.iter_mut()) {
        for v in blk.iter_mut() {
            *v = rng.gen::<f64>() - 0.5;
        }
    }
    Engine::new(catalog, prior, transforms, data, state).unwrap()
}

/// Dense joint posterior over beta = [vec(B_full); vec(C_full)] (columns
/// stacked, components interleaved inside each output column), holding
/// theta and all covariance matrices at their current values. Returns
/// (precision Q, mean mu).
pub fn joint_coefficient_posterior(engine: &Engine) -> (DMatrix<f64>, DVector<f64>) {
    let phi = engine.experimental_design().clone();
    let phi_star = engine.simulator_design().clone();
    let psi = engine.discrepancy_design_matrix().clone();
    let y = engine.experimental_outputs();
    let y_star = engine.simulator_outputs();
    let c = engine.n_outputs();
    let n = engine.n_experimental();
    let m = engine.n_simulator();
    let l_eta = phi.ncols();
    let l_delta = psi.ncols();
    let dim = (l_eta + l_delta) * c;

    // X maps beta to [vec(Y mean); vec(Y* mean)].
    let mut x = DMatrix::zeros((n + m) * c, dim);
    for cc in 0..c {
        x.view_mut((cc * n, cc * l_eta), (n, l_eta)).copy_from(&phi);
        x.view_mut((cc * n, c * l_eta + cc * l_delta), (n, l_delta))
            .copy_from(&psi);
        x.view_mut((c * n + cc * m, cc * l_eta), (m, l_eta))
            .copy_from(&phi_star);
    }
    // Noise precision: blockdiag(Sigma^-1 kron I_N, Upsilon^-1 kron I_M).
    let sigma_inv = engine.state.sigma.clone().try_inverse().unwrap();
    let upsilon_inv = engine.state.upsilon.clone().try_inverse().unwrap();
    let mut noise_prec = DMatrix::zeros((n + m) * c, (n + m) * c);
    for a in 0..c {
        for b in 0..c {
            for i in 0..n {
                noise_prec[(a * n + i, b * n + i)] = sigma_inv[(a, b)];
            }
            for i in 0..m {
                noise_prec[(c * n + a * m + i, c * n + b * m + i)] = upsilon_inv[(a, b)];
            }
        }
    }
    // Prior precision of beta.
    let mut prior_prec = DMatrix::zeros(dim, dim);
    let lambda_invs: Vec<DMatrix<f64>> = engine
        .state
        .lambda
        .iter()
        .map(|l| l.clone().try_inverse().unwrap())
        .collect();
    let omega_invs: Vec<DMatrix<f64>> = engine
        .state
        .omega
        .iter()
        .map(|o| o.clone().try_inverse().unwrap())
        .collect();
    for a in 0..c {
        for b in 0..c {
            for (j, linv) in lambda_invs.iter().enumerate() {
                let r = engine.catalog.emulator_range(j);
                for l in r.clone() {
                    prior_prec[(a * l_eta + l, b * l_eta + l)] = linv[(a, b)];
                }
            }
            for (k, oinv) in omega_invs.iter().enumerate() {
                let r = engine.catalog.discrepancy_range(k);
                for l in r.clone() {
                    prior_prec[(c * l_eta + a * l_delta + l, c * l_eta + b * l_delta + l)] =
                        oinv[(a, b)];
                }
            }
        }
    }
    let q = x.transpose() * &noise_prec * &x + prior_prec;
    let mut z = DVector::zeros((n + m) * c);
    for cc in 0..c {
        for i in 0..n {
            z[cc * n + i] = y[(i, cc)];
        }
        for i in 0..m {
            z[c * n + cc * m + i] = y_star[(i, cc)];
        }
    }
    let rhs = x.transpose() * noise_prec * z;
    let mu = q.clone().try_inverse().unwrap() * rhs;
    (q, mu)
}

/// Indices of vec(B_j) within the joint beta vector, ordered to match the
/// engine's per-block vec (column c, then basis l).
pub fn b_block_indices(engine: &Engine, j: usize) -> Vec<usize> {
    let l_eta = engine.catalog.emulator_cols();
    let range = engine.catalog.emulator_range(j);
    let c = engine.n_outputs();
    let mut idx = Vec::new();
    for cc in 0..c {
        for l in range.clone() {
            idx.push(cc * l_eta + l);
        }
    }
    idx
}

pub fn c_block_indices(engine: &Engine, k: usize) -> Vec<usize> {
    let l_eta = engine.catalog.emulator_cols();
    let l_delta = engine.catalog.discrepancy_cols();
    let range = engine.catalog.discrepancy_range(k);
    let c = engine.n_outputs();
    let offset = c * l_eta;
    let mut idx = Vec::new();
    for cc in 0..c {
        for l in range.clone() {
            idx.push(offset + cc * l_delta + l);
        }
    }
    idx
}

/// Conditional (mean, covariance) of x_s | x_r from a joint Gaussian with
/// precision Q and mean mu, with the rest fixed at `rest`.
pub fn conditional_from_joint(
    q: &DMatrix<f64>,
    mu: &DVector<f64>,
    sel: &[usize],
    rest_values: &DVector<f64>,
) -> (DVector<f64>, DMatrix<f64>) {
    let dim = q.nrows();
    let rest: Vec<usize> = (0..dim).filter(|i| !sel.contains(i)).collect();
    let q_ss = DMatrix::from_fn(sel.len(), sel.len(), |a, b| q[(sel[a], sel[b])]);
    let q_sr = DMatrix::from_fn(sel.len(), rest.len(), |a, b| q[(sel[a], rest[b])]);
    let mu_s = DVector::from_fn(sel.len(), |a, _| mu[sel[a]]);
    let mu_r = DVector::from_fn(rest.len(), |a, _| mu[rest[a]]);
    let x_r = DVector::from_fn(rest.len(), |a, _| rest_values[rest[a]]);
    let q_ss_inv = q_ss.clone().try_inverse().unwrap();
    let mean = mu_s - &q_ss_inv * q_sr * (x_r - mu_r);
    (mean, q_ss_inv)
}

/// Current joint beta vector of the engine, in the oracle's layout.
pub fn current_beta(engine: &Engine) -> DVector<f64> {
    let c = engine.n_outputs();
    let l_eta = engine.catalog.emulator_cols();
    let l_delta = engine.catalog.discrepancy_cols();
    let b = engine.stacked_b();
    let cc_mat = engine.stacked_c();
    let mut beta = DVector::zeros((l_eta + l_delta) * c);
    for col in 0..c {
        for l in 0..l_eta {
            beta[col * l_eta + l] = b[(l, col)];
        }
        for l in 0..l_delta {
            beta[c * l_eta + col * l_delta + l] = cc_mat[(l, col)];
        }
    }
    beta
}

/// Max absolute entry difference between two matrices.
pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

pub fn max_abs_diff_vec(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).abs().max()
}
