//! Latin hypercube designs with balanced categorical assignment.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::basis::{VarKind, VariableSpec};
use crate::error::{CoreError, Result};
use crate::model::unscale_from_unit;

/// n-point design over the given dimensions, in native units
/// (categorical coordinates are 1-based levels). Continuous dimensions
/// are stratified into n equal bins with one uniform point per bin and
/// an independent permutation per dimension; categorical dimensions get
/// a balanced level assignment, shuffled.
pub fn lhs(n: usize, dims: &[VariableSpec], seed: u64) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(CoreError::invalid("design size must be at least 1"));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(dims.len());
    for dim in dims {
        match &dim.kind {
            VarKind::Continuous { .. } => {
                let mut col: Vec<f64> = (0..n)
                    .map(|i| (i as f64 + rng.gen::<f64>()) / n as f64)
                    .collect();
                col.shuffle(&mut rng);
                columns.push(col.iter().map(|&u| unscale_from_unit(u, dim)).collect());
            }
            VarKind::Categorical { levels } => {
                let g = levels.len();
                let mut col: Vec<f64> = (0..n).map(|i| ((i % g) + 1) as f64).collect();
                col.shuffle(&mut rng);
                columns.push(col);
            }
        }
    }
    Ok((0..n)
        .map(|i| columns.iter().map(|c| c[i]).collect())
        .collect())
}
