//! One-time Karhunen-Loeve eigen-system for the continuous main-effect
//! covariance.
//!
//! The first two basis functions are the Bernoulli polynomials B1 and B2.
//! The remainder come from a single dense-grid eigen-decomposition of the
//! smooth kernel K13(s,t) = -B4(|s-t|)/24, shared by every continuous
//! variable, performed once per run before any sampling.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::kernels::{b1, b2, b4};
use crate::error::{CoreError, Result};

/// How eigenfunctions are scaled into basis functions for l >= 3.
///
/// `Sqrt` multiplies the eigenfunction by the square root of its
/// eigenvalue, so iid unit-variance coefficients reproduce the kernel.
/// `Linear` multiplies by the eigenvalue itself and is kept as a switch
/// for comparison runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenScaling {
    #[default]
    Sqrt,
    Linear,
}

/// Dense-grid eigen-system of the smooth part of the main-effect covariance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KlBasis {
    /// Midpoints of `grid_size` equal cells of [0,1]; uniform quadrature
    /// weight 1/grid_size.
    grid: Vec<f64>,
    /// Operator eigenvalue approximations, nonincreasing, clamped at 0.
    eigenvalues: Vec<f64>,
    /// Column l holds eigenfunction l on the grid, normalized so the
    /// discrete mean square over the grid is 1.
    eigenfunctions: DMatrix<f64>,
    scaling: EigenScaling,
}

impl KlBasis {
    pub const DEFAULT_GRID_SIZE: usize = 300;

    pub fn build(grid_size: usize, scaling: EigenScaling) -> Result<Self> {
        if grid_size < 50 {
            return Err(CoreError::invalid(format!(
                "KL grid size {grid_size} too small; need at least 50"
            )));
        }
        let m = grid_size;
        let grid: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) / m as f64).collect();
        let kernel = DMatrix::from_fn(m, m, |i, j| -b4((grid[i] - grid[j]).abs()) / 24.0);

        let eig = kernel.symmetric_eigen();

        // Sort nonincreasing, clamp numerical noise, and fix the sign of
        // each eigenvector so the entry of largest magnitude is positive.
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[b]
                .partial_cmp(&eig.eigenvalues[a])
                .unwrap()
        });
        let mut eigenvalues = Vec::with_capacity(m);
        let mut eigenfunctions = DMatrix::zeros(m, m);
        let scale = (m as f64).sqrt();
        for (out, &src) in order.iter().enumerate() {
            // Matrix eigenvalues -> operator eigenvalues via the uniform
            // quadrature weight; eigenvectors -> unit function norm.
            eigenvalues.push((eig.eigenvalues[src] / m as f64).max(0.0));
            let col = eig.eigenvectors.column(src);
            let pivot = col.iter().cloned().fold(0.0f64, |acc, v| {
                if v.abs() > acc.abs() {
                    v
                } else {
                    acc
                }
            });
            let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
            eigenfunctions
                .column_mut(out)
                .copy_from(&(col * (sign * scale)));
        }

        Ok(KlBasis {
            grid,
            eigenvalues,
            eigenfunctions,
            scaling,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn grid_size(&self) -> usize {
        self.grid.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn scaling(&self) -> EigenScaling {
        self.scaling
    }

    /// Eigenfunction `idx` (zero-based) evaluated on the grid.
    pub fn eigenfunction(&self, idx: usize) -> DVector<f64> {
        self.eigenfunctions.column(idx).into_owned()
    }

    /// Largest valid basis index for `eval_main`: B1, B2, then one basis
    /// function per eigenpair.
    pub fn max_basis_index(&self) -> usize {
        2 + self.eigenvalues.len()
    }

    /// Continuous main-effect basis function l (1-based) at u in [0,1].
    ///
    /// l = 1, 2 are B1 and B2; for l >= 3 the (l-2)-th eigenfunction is
    /// linearly interpolated between grid points and scaled per
    /// `EigenScaling`. Points outside [0,1] are clamped to the boundary.
    pub fn eval_main(&self, l: usize, u: f64) -> Result<f64> {
        match l {
            0 => Err(CoreError::invalid("basis index is 1-based")),
            1 => Ok(b1(u.clamp(0.0, 1.0))),
            2 => Ok(b2(u.clamp(0.0, 1.0))),
            _ => {
                let idx = l - 3;
                let lam = *self.eigenvalues.get(idx).ok_or_else(|| {
                    CoreError::invalid(format!(
                        "basis index {l} exceeds available eigenpairs ({})",
                        self.max_basis_index()
                    ))
                })?;
                let w = match self.scaling {
                    EigenScaling::Sqrt => lam.sqrt(),
                    EigenScaling::Linear => lam,
                };
                Ok(w * self.interpolate(idx, u))
            }
        }
    }

    /// Ranking weight of basis index l: squared L2 norms 1/12 and 1/180
    /// for B1 and B2, eigenvalues for the rest.
    pub fn basis_weight(&self, l: usize) -> f64 {
        match l {
            1 => 1.0 / 12.0,
            2 => 1.0 / 180.0,
            _ => self.eigenvalues.get(l - 3).copied().unwrap_or(0.0),
        }
    }

    fn interpolate(&self, idx: usize, u: f64) -> f64 {
        let m = self.grid.len();
        let col = self.eigenfunctions.column(idx);
        // Position in cell units; clamping covers both the outer half
        // cells and any out-of-range input.
        let pos = (u.clamp(0.0, 1.0) * m as f64 - 0.5).clamp(0.0, (m - 1) as f64);
        let i0 = (pos.floor() as usize).min(m - 2);
        let frac = pos - i0 as f64;
        col[i0] * (1.0 - frac) + col[i0 + 1] * frac
    }

    /// K1(u,v) reconstructed from the leading `terms` basis functions.
    pub fn reconstruct_k1(&self, terms: usize, u: f64, v: f64) -> Result<f64> {
        let mut acc = 0.0;
        for l in 1..=terms {
            acc += self.eval_main(l, u)? * self.eval_main(l, v)?;
        }
        Ok(acc)
    }
}
