//! Posterior main-effect curves of the discrepancy function.

use serde::{Deserialize, Serialize};

use super::common::quantile;
use crate::basis::{Catalog, ComponentKind};
use crate::error::{CoreError, Result};
use crate::model::{unscale_from_unit, ParameterState};

/// One per (input variable, output): a 1-D grid of the discrepancy main
/// effect on the transformed (model) scale, other inputs integrated out
/// (exactly, since every component is mean-zero in each argument).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectCurve {
    pub input: String,
    pub output: usize,
    /// Native-unit grid locations.
    pub grid: Vec<f64>,
    pub mean: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// True when the band excludes zero anywhere on the grid.
    pub significant: bool,
}

pub fn discrepancy_effects(
    catalog: &Catalog,
    samples: &[ParameterState],
    grid_size: usize,
    interval: f64,
) -> Result<Vec<EffectCurve>> {
    if samples.is_empty() {
        return Err(CoreError::invalid("no posterior samples"));
    }
    let c = samples[0].sigma.nrows();
    let alpha = (1.0 - interval) / 2.0;
    let mut curves = Vec::new();
    for (k, comp) in catalog.discrepancy.iter().enumerate() {
        if comp.kind != ComponentKind::Main {
            continue;
        }
        let v = comp.variables[0];
        let var = &catalog.vars[v];
        let grid_unit: Vec<f64> = if var.is_categorical() {
            (1..=var.level_count()).map(|g| g as f64).collect()
        } else {
            (0..grid_size)
                .map(|i| (i as f64 + 0.5) / grid_size as f64)
                .collect()
        };
        // Basis values for this main effect on the grid.
        let mut basis = vec![vec![0.0; comp.basis_terms.len()]; grid_unit.len()];
        for (gi, &u) in grid_unit.iter().enumerate() {
            for (ti, tuple) in comp.basis_terms.iter().enumerate() {
                basis[gi][ti] = crate::basis::eval_term(comp, tuple, &point_at(v, u), &catalog.vars, &catalog.kl)?;
            }
        }
        for output in 0..c {
            let mut mean = Vec::with_capacity(grid_unit.len());
            let mut lower = Vec::with_capacity(grid_unit.len());
            let mut upper = Vec::with_capacity(grid_unit.len());
            let mut significant = false;
            for row in &basis {
                let mut vals: Vec<f64> = samples
                    .iter()
                    .map(|s| {
                        let ck = &s.c[k];
                        row.iter()
                            .enumerate()
                            .map(|(l, b)| b * ck[(l, output)])
                            .sum::<f64>()
                    })
                    .collect();
                mean.push(vals.iter().sum::<f64>() / vals.len() as f64);
                vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let lo = quantile(&vals, alpha);
                let hi = quantile(&vals, 1.0 - alpha);
                if lo > 0.0 || hi < 0.0 {
                    significant = true;
                }
                lower.push(lo);
                upper.push(hi);
            }
            curves.push(EffectCurve {
                input: var.name.clone(),
                output,
                grid: grid_unit
                    .iter()
                    .map(|&u| unscale_from_unit(u, var))
                    .collect(),
                mean,
                lower,
                upper,
                significant,
            });
        }
    }
    Ok(curves)
}

/// A full-dimension point that is only valid at coordinate v; the main
/// effect touches no other coordinate.
fn point_at(v: usize, u: f64) -> Vec<f64> {
    let mut p = vec![0.5; v + 1];
    p[v] = u;
    p
}
