//! Small dense linear-algebra helpers shared by the sampler: SPD checks,
//! Cholesky with a single bounded jitter retry, and Wishart / multivariate
//! normal sampling.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{CoreError, Result};

pub const LN_2PI: f64 = 1.8378770664093453;

/// Force exact symmetry: (A + A^T) / 2.
pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Check symmetric positive definiteness after symmetrization: smallest
/// eigenvalue must exceed 1e-12 times the largest.
pub fn check_spd(a: &DMatrix<f64>, context: &str) -> Result<()> {
    let sym = symmetrize(a);
    let eigs = sym.symmetric_eigenvalues();
    let max = eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(max > 0.0) || min <= 1e-12 * max {
        return Err(CoreError::numerical(
            context,
            format!("matrix not SPD (eigenvalue range [{min}, {max}])"),
        ));
    }
    Ok(())
}

/// Cholesky factorization; on failure add 1e-10 * trace/dim to the
/// diagonal once, then fail if still singular.
pub fn cholesky_with_jitter(a: &DMatrix<f64>, context: &str) -> Result<Cholesky<f64, Dyn>> {
    let sym = symmetrize(a);
    if let Some(c) = Cholesky::new(sym.clone()) {
        return Ok(c);
    }
    let dim = sym.nrows();
    let jitter = 1e-10 * sym.trace() / dim as f64;
    let bumped = &sym + DMatrix::identity(dim, dim) * jitter;
    Cholesky::new(bumped).ok_or_else(|| {
        CoreError::numerical(
            context,
            format!("Cholesky failed even after diagonal jitter {jitter:.3e}"),
        )
    })
}

/// Draw from Wishart(scale, dof) via the Bartlett decomposition.
pub fn sample_wishart<R: Rng>(rng: &mut R, scale: &DMatrix<f64>, dof: f64, context: &str) -> Result<DMatrix<f64>> {
    let d = scale.nrows();
    if dof <= (d - 1) as f64 {
        return Err(CoreError::numerical(
            context,
            format!("Wishart degrees of freedom {dof} too small for dimension {d}"),
        ));
    }
    let chol = cholesky_with_jitter(scale, context)?;
    let mut a = DMatrix::zeros(d, d);
    for i in 0..d {
        let chi = ChiSquared::new(dof - i as f64).map_err(|e| {
            CoreError::numerical(context, format!("chi-squared setup failed: {e}"))
        })?;
        a[(i, i)] = chi.sample(rng).sqrt();
        for j in 0..i {
            a[(i, j)] = rng.sample::<f64, _>(StandardNormal);
        }
    }
    let la = chol.l() * a;
    Ok(&la * la.transpose())
}

/// Draw from inverse-Wishart(scale, dof): the inverse of a Wishart draw
/// with inverted scale.
pub fn sample_inverse_wishart<R: Rng>(
    rng: &mut R,
    scale: &DMatrix<f64>,
    dof: f64,
    context: &str,
) -> Result<DMatrix<f64>> {
    let chol = cholesky_with_jitter(scale, context)?;
    let scale_inv = chol.inverse();
    let w = sample_wishart(rng, &symmetrize(&scale_inv), dof, context)?;
    let w_chol = cholesky_with_jitter(&w, context)?;
    Ok(symmetrize(&w_chol.inverse()))
}

/// Mean of inverse-Wishart(scale, dof); defined for dof > dim + 1.
pub fn inverse_wishart_mean(scale: &DMatrix<f64>, dof: f64) -> Result<DMatrix<f64>> {
    let d = scale.nrows() as f64;
    if dof <= d + 1.0 {
        return Err(CoreError::config(format!(
            "inverse-Wishart mean undefined: dof {dof} <= dim + 1"
        )));
    }
    Ok(scale / (dof - d - 1.0))
}

/// Gaussian with natural parameters: precision Q and linear term b, so
/// the mean is Q^{-1} b. Returns (mean, draw).
pub fn sample_mvn_from_precision<R: Rng>(
    rng: &mut R,
    precision: &DMatrix<f64>,
    rhs: &DVector<f64>,
    context: &str,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let chol = cholesky_with_jitter(precision, context)?;
    let mean = chol.solve(rhs);
    let z = DVector::from_fn(rhs.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
    // Q = L L^T, so L^{-T} z has covariance Q^{-1}.
    let shift = chol
        .l()
        .transpose()
        .solve_upper_triangular(&z)
        .ok_or_else(|| CoreError::numerical(context, "triangular solve failed"))?;
    let draw = &mean + shift;
    Ok((mean, draw))
}

/// Log density of N(x; mean, Q^{-1}) given the precision Q.
pub fn mvn_logpdf_precision(
    x: &DVector<f64>,
    mean: &DVector<f64>,
    precision: &DMatrix<f64>,
    context: &str,
) -> Result<f64> {
    let chol = cholesky_with_jitter(precision, context)?;
    let d = x.len() as f64;
    let log_det_q: f64 = chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>() * 2.0;
    let r = x - mean;
    let quad = r.dot(&(precision * &r));
    Ok(0.5 * (log_det_q - d * LN_2PI - quad))
}

/// Log density of N(x; mean, cov).
pub fn mvn_logpdf(
    x: &DVector<f64>,
    mean: &DVector<f64>,
    cov: &DMatrix<f64>,
    context: &str,
) -> Result<f64> {
    let chol = cholesky_with_jitter(cov, context)?;
    let d = x.len() as f64;
    let log_det: f64 = chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>() * 2.0;
    let r = x - mean;
    let quad = r.dot(&chol.solve(&r));
    Ok(-0.5 * (log_det + d * LN_2PI + quad))
}

/// Draw from N(mean, cov).
pub fn sample_mvn<R: Rng>(
    rng: &mut R,
    mean: &DVector<f64>,
    cov: &DMatrix<f64>,
    context: &str,
) -> Result<DVector<f64>> {
    let chol = cholesky_with_jitter(cov, context)?;
    let z = DVector::from_fn(mean.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
    Ok(mean + chol.l() * z)
}
