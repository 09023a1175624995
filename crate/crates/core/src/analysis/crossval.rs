//! Leave-one-group-out cross-validation keyed on an input variable.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::common::r_squared;
use super::predict::{predict, PredictOptions, QueryPoint};
use crate::basis::Catalog;
use crate::error::{CoreError, Result};
use crate::mcmc::{run_chain, ChainConfig};
use crate::model::{Dataset, OutputTransform, PriorSpec};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CvR2 {
    pub in_sample_emulator: f64,
    pub in_sample_full: f64,
    pub out_sample_emulator: f64,
    pub out_sample_full: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvFoldResult {
    pub fold_value: f64,
    pub held_out_rows: Vec<usize>,
    /// Populated when the fold's calibration failed; the fold is then
    /// excluded from the pooled R-squared.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub folds: Vec<CvFoldResult>,
    pub r2: CvR2,
}

struct FoldOutcome {
    result: CvFoldResult,
    /// (truth, emulator-only prediction, full prediction) pooled pairs.
    out_pairs: Vec<(f64, f64, f64)>,
    in_pairs: Vec<(f64, f64, f64)>,
}

pub fn cross_validate(
    catalog: &Catalog,
    prior: &PriorSpec,
    transforms: &[OutputTransform],
    data: &Dataset,
    config: &ChainConfig,
    fold_key: &str,
) -> Result<CvReport> {
    let n_inputs = catalog.n_inputs();
    let col = catalog.vars[..n_inputs]
        .iter()
        .position(|v| v.name == fold_key)
        .ok_or_else(|| CoreError::invalid(format!("fold key {fold_key} is not an input")))?;
    let mut values: Vec<f64> = data.exp_x.iter().map(|row| row[col]).collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values.dedup();
    if values.len() < 2 {
        return Err(CoreError::invalid(format!(
            "fold key {fold_key} has fewer than 2 distinct values"
        )));
    }

    let outcomes: Vec<FoldOutcome> = values
        .par_iter()
        .enumerate()
        .map(|(fold_idx, &value)| run_fold(catalog, prior, transforms, data, config, col, fold_idx, value))
        .collect();

    let mut folds = Vec::with_capacity(outcomes.len());
    let mut out_pairs = Vec::new();
    let mut in_pairs = Vec::new();
    for o in outcomes {
        folds.push(o.result);
        out_pairs.extend(o.out_pairs);
        in_pairs.extend(o.in_pairs);
    }
    if out_pairs.is_empty() {
        return Err(CoreError::invalid("every cross-validation fold failed"));
    }
    let r2 = CvR2 {
        in_sample_emulator: pooled_r2(&in_pairs, |p| p.1),
        in_sample_full: pooled_r2(&in_pairs, |p| p.2),
        out_sample_emulator: pooled_r2(&out_pairs, |p| p.1),
        out_sample_full: pooled_r2(&out_pairs, |p| p.2),
    };
    Ok(CvReport { folds, r2 })
}

fn pooled_r2(pairs: &[(f64, f64, f64)], pick: impl Fn(&(f64, f64, f64)) -> f64) -> f64 {
    let truth: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let pred: Vec<f64> = pairs.iter().map(&pick).collect();
    r_squared(&truth, &pred)
}

#[allow(clippy::too_many_arguments)]
fn run_fold(
    catalog: &Catalog,
    prior: &PriorSpec,
    transforms: &[OutputTransform],
    data: &Dataset,
    config: &ChainConfig,
    col: usize,
    fold_idx: usize,
    value: f64,
) -> FoldOutcome {
    let held_out: Vec<usize> = data
        .exp_x
        .iter()
        .enumerate()
        .filter(|(_, row)| row[col] == value)
        .map(|(i, _)| i)
        .collect();
    let keep: Vec<usize> = (0..data.exp_x.len())
        .filter(|i| !held_out.contains(i))
        .collect();
    let train = Dataset {
        exp_x: keep.iter().map(|&i| data.exp_x[i].clone()).collect(),
        exp_y: keep.iter().map(|&i| data.exp_y[i].clone()).collect(),
        sim_w: data.sim_w.clone(),
        sim_y: data.sim_y.clone(),
    };
    let fold_config = ChainConfig {
        seed: config.seed.wrapping_add(fold_idx as u64),
        ..config.clone()
    };
    let attempt = (|| -> Result<(Vec<(f64, f64, f64)>, Vec<(f64, f64, f64)>)> {
        let chain = run_chain(
            catalog.clone(),
            prior.clone(),
            transforms.to_vec(),
            train.clone(),
            &fold_config,
            None,
        )?;
        let collect = |rows: &[usize]| -> Result<Vec<(f64, f64, f64)>> {
            let points: Vec<QueryPoint> = rows
                .iter()
                .map(|&i| QueryPoint {
                    x: data.exp_x[i].clone(),
                    t: None,
                })
                .collect();
            let full = predict(
                catalog,
                transforms,
                &chain.samples,
                &points,
                &PredictOptions {
                    with_discrepancy: true,
                    realizations: 0,
                    interval: 0.95,
                },
            )?;
            let emu = predict(
                catalog,
                transforms,
                &chain.samples,
                &points,
                &PredictOptions {
                    with_discrepancy: false,
                    realizations: 0,
                    interval: 0.95,
                },
            )?;
            let mut pairs = Vec::new();
            for (pi, &i) in rows.iter().enumerate() {
                for (k, cell) in data.exp_y[i].iter().enumerate() {
                    if let Some(truth) = cell {
                        pairs.push((*truth, emu.points[pi].mean[k], full.points[pi].mean[k]));
                    }
                }
            }
            Ok(pairs)
        };
        Ok((collect(&held_out)?, collect(&keep)?))
    })();
    match attempt {
        Ok((out_pairs, in_pairs)) => FoldOutcome {
            result: CvFoldResult {
                fold_value: value,
                held_out_rows: held_out,
                error: None,
            },
            out_pairs,
            in_pairs,
        },
        Err(e) => FoldOutcome {
            result: CvFoldResult {
                fold_value: value,
                held_out_rows: held_out,
                error: Some(e.to_string()),
            },
            out_pairs: Vec::new(),
            in_pairs: Vec::new(),
        },
    }
}
