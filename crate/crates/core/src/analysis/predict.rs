//! Posterior prediction at arbitrary input points.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::common::quantile;
use crate::basis::Catalog;
use crate::error::{CoreError, Result};
use crate::model::{scale_to_unit, OutputTransform, ParameterState, ThetaValue};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictOptions {
    /// Add the discrepancy term (zeta = eta + delta) instead of the
    /// emulator alone.
    pub with_discrepancy: bool,
    /// Posterior realizations returned per point (evenly spaced through
    /// the retained samples).
    pub realizations: usize,
    /// Credible-interval mass, e.g. 0.95.
    pub interval: f64,
}

impl Default for PredictOptions {
    fn default() -> Self {
        PredictOptions {
            with_discrepancy: true,
            realizations: 50,
            interval: 0.95,
        }
    }
}

/// Posterior prediction at one point, on original output units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointPrediction {
    pub mean: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// realizations x outputs.
    pub realizations: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionResult {
    pub points: Vec<PointPrediction>,
}

/// A query point: native-unit inputs x, and optionally a fixed parameter
/// vector t (native units; categorical as 1-based levels). When t is
/// omitted each posterior sample's own theta is used.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryPoint {
    pub x: Vec<f64>,
    pub t: Option<Vec<f64>>,
}

/// Evaluate the basis expansion of one posterior sample at a unit-scaled
/// point, on the transformed scale.
pub fn sample_mean_at(
    catalog: &Catalog,
    state: &ParameterState,
    point_unit: &[f64],
    with_discrepancy: bool,
) -> Result<DVector<f64>> {
    let phi_row = catalog.emulator_row(point_unit)?;
    let mut out = DVector::zeros(state.sigma.nrows());
    let mut at = 0;
    for bj in &state.b {
        let rows = bj.nrows();
        out += bj.transpose() * phi_row.rows(at, rows);
        at += rows;
    }
    if with_discrepancy {
        let psi_row = catalog.discrepancy_row(point_unit)?;
        let mut at = 0;
        for ck in &state.c {
            let rows = ck.nrows();
            out += ck.transpose() * psi_row.rows(at, rows);
            at += rows;
        }
    }
    Ok(out)
}

pub fn predict(
    catalog: &Catalog,
    transforms: &[OutputTransform],
    samples: &[ParameterState],
    points: &[QueryPoint],
    opts: &PredictOptions,
) -> Result<PredictionResult> {
    if samples.is_empty() {
        return Err(CoreError::invalid("no posterior samples to predict from"));
    }
    if !(opts.interval > 0.0 && opts.interval < 1.0) {
        return Err(CoreError::config(format!(
            "interval mass {} must lie in (0,1)",
            opts.interval
        )));
    }
    let n_inputs = catalog.n_inputs();
    let n_params = catalog.n_parameters();
    let c = transforms.len();
    let n_real = opts.realizations.min(samples.len());
    // Evenly spaced sample indices used for the returned realizations.
    let real_idx: Vec<usize> = (0..n_real)
        .map(|i| i * samples.len() / n_real.max(1))
        .collect();

    let mut out = Vec::with_capacity(points.len());
    for query in points {
        if query.x.len() != n_inputs {
            return Err(CoreError::invalid(format!(
                "query has {} inputs, expected {n_inputs}",
                query.x.len()
            )));
        }
        let x_unit: Vec<f64> = query
            .x
            .iter()
            .zip(&catalog.vars[..n_inputs])
            .map(|(&v, s)| scale_to_unit(v, s))
            .collect::<Result<_>>()?;
        let t_unit: Option<Vec<f64>> = match &query.t {
            Some(t) => {
                if t.len() != n_params {
                    return Err(CoreError::invalid(format!(
                        "query has {} parameters, expected {n_params}",
                        t.len()
                    )));
                }
                Some(
                    t.iter()
                        .zip(&catalog.vars[n_inputs..])
                        .map(|(&v, s)| scale_to_unit(v, s))
                        .collect::<Result<_>>()?,
                )
            }
            None => None,
        };

        // One inverse-transformed evaluation per retained sample.
        let mut draws: Vec<Vec<f64>> = Vec::with_capacity(samples.len());
        for state in samples {
            let mut point = x_unit.clone();
            match &t_unit {
                Some(t) => point.extend_from_slice(t),
                None => point.extend(state.theta.iter().map(ThetaValue::coord)),
            }
            let z = sample_mean_at(catalog, state, &point, opts.with_discrepancy)?;
            let y: Vec<f64> = z
                .iter()
                .zip(transforms)
                .map(|(&v, tr)| tr.invert(v))
                .collect();
            draws.push(y);
        }

        let mut mean = vec![0.0; c];
        let mut lower = vec![0.0; c];
        let mut upper = vec![0.0; c];
        let alpha = (1.0 - opts.interval) / 2.0;
        for k in 0..c {
            let mut col: Vec<f64> = draws.iter().map(|d| d[k]).collect();
            mean[k] = col.iter().sum::<f64>() / col.len() as f64;
            col.sort_by(|a, b| a.partial_cmp(b).unwrap());
            lower[k] = quantile(&col, alpha);
            upper[k] = quantile(&col, 1.0 - alpha);
        }
        let realizations = real_idx.iter().map(|&i| draws[i].clone()).collect();
        out.push(PointPrediction {
            mean,
            lower,
            upper,
            realizations,
        });
    }
    Ok(PredictionResult { points: out })
}
