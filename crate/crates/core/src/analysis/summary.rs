//! Posterior summaries of the calibration parameters and truth-known
//! study metrics.

use serde::{Deserialize, Serialize};

use super::common::{mean_var, pearson, quantile};
use crate::basis::{Catalog, VarKind};
use crate::error::{CoreError, Result};
use crate::model::{unscale_from_unit, ParameterState, ThetaValue};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ThetaMarginal {
    Continuous {
        mean: f64,
        sd: f64,
        q025: f64,
        q25: f64,
        median: f64,
        q75: f64,
        q975: f64,
    },
    Categorical {
        /// Posterior frequency per 1-based level.
        frequencies: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaSummary {
    pub name: String,
    pub marginal: ThetaMarginal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaReport {
    pub params: Vec<ThetaSummary>,
    /// Pairwise posterior correlations among the continuous parameters,
    /// in `continuous_names` order.
    pub continuous_names: Vec<String>,
    pub correlations: Vec<Vec<f64>>,
}

/// Marginal posterior summaries on native units.
pub fn summarize_theta(catalog: &Catalog, samples: &[ParameterState]) -> Result<ThetaReport> {
    if samples.is_empty() {
        return Err(CoreError::invalid("no posterior samples"));
    }
    let n_inputs = catalog.n_inputs();
    let param_vars = &catalog.vars[n_inputs..];
    let mut params = Vec::with_capacity(param_vars.len());
    let mut continuous_names = Vec::new();
    let mut continuous_draws: Vec<Vec<f64>> = Vec::new();

    for (q, var) in param_vars.iter().enumerate() {
        match &var.kind {
            VarKind::Continuous { .. } => {
                let native: Vec<f64> = samples
                    .iter()
                    .map(|s| unscale_from_unit(s.theta[q].coord(), var))
                    .collect();
                let (mean, var_) = mean_var(&native);
                let mut sorted = native.clone();
                sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
                params.push(ThetaSummary {
                    name: var.name.clone(),
                    marginal: ThetaMarginal::Continuous {
                        mean,
                        sd: var_.sqrt(),
                        q025: quantile(&sorted, 0.025),
                        q25: quantile(&sorted, 0.25),
                        median: quantile(&sorted, 0.5),
                        q75: quantile(&sorted, 0.75),
                        q975: quantile(&sorted, 0.975),
                    },
                });
                continuous_names.push(var.name.clone());
                continuous_draws.push(native);
            }
            VarKind::Categorical { levels } => {
                let mut counts = vec![0usize; levels.len()];
                for s in samples {
                    if let ThetaValue::Categorical(l) = s.theta[q] {
                        counts[l - 1] += 1;
                    }
                }
                let frequencies = counts
                    .iter()
                    .map(|&c| c as f64 / samples.len() as f64)
                    .collect();
                params.push(ThetaSummary {
                    name: var.name.clone(),
                    marginal: ThetaMarginal::Categorical { frequencies },
                });
            }
        }
    }

    let d = continuous_draws.len();
    let mut correlations = vec![vec![0.0; d]; d];
    for i in 0..d {
        correlations[i][i] = 1.0;
        for j in (i + 1)..d {
            let r = pearson(&continuous_draws[i], &continuous_draws[j]);
            correlations[i][j] = r;
            correlations[j][i] = r;
        }
    }
    Ok(ThetaReport {
        params,
        continuous_names,
        correlations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub parameter: String,
    pub estimate: f64,
    pub std_error: f64,
}

/// Truth-known study metrics: root posterior mean squared error averaged
/// across datasets for continuous parameters, and the average posterior
/// probability of the true category for categorical ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyMetrics {
    pub arpmse: Vec<MetricRow>,
    pub app: Vec<MetricRow>,
}

pub fn study_metrics(
    catalog: &Catalog,
    per_dataset_samples: &[Vec<ParameterState>],
    truth: &[ThetaValue],
) -> Result<StudyMetrics> {
    if per_dataset_samples.is_empty() || per_dataset_samples.iter().any(Vec::is_empty) {
        return Err(CoreError::invalid("empty dataset sample lists"));
    }
    let n_inputs = catalog.n_inputs();
    let param_vars = &catalog.vars[n_inputs..];
    if truth.len() != param_vars.len() {
        return Err(CoreError::invalid(format!(
            "{} truth values for {} parameters",
            truth.len(),
            param_vars.len()
        )));
    }
    let n_data = per_dataset_samples.len() as f64;
    let mut arpmse = Vec::new();
    let mut app = Vec::new();
    for (q, var) in param_vars.iter().enumerate() {
        match &var.kind {
            VarKind::Continuous { .. } => {
                let truth_native = unscale_from_unit(truth[q].coord(), var);
                let per_dataset: Vec<f64> = per_dataset_samples
                    .iter()
                    .map(|samples| {
                        let msq = samples
                            .iter()
                            .map(|s| {
                                (unscale_from_unit(s.theta[q].coord(), var) - truth_native)
                                    .powi(2)
                            })
                            .sum::<f64>()
                            / samples.len() as f64;
                        msq.sqrt()
                    })
                    .collect();
                let (mean, var_) = mean_var(&per_dataset);
                arpmse.push(MetricRow {
                    parameter: var.name.clone(),
                    estimate: mean,
                    std_error: (var_ / n_data).sqrt(),
                });
            }
            VarKind::Categorical { .. } => {
                let ThetaValue::Categorical(true_level) = truth[q] else {
                    return Err(CoreError::invalid(format!(
                        "truth for categorical parameter {} is not a level",
                        var.name
                    )));
                };
                let per_dataset: Vec<f64> = per_dataset_samples
                    .iter()
                    .map(|samples| {
                        samples
                            .iter()
                            .filter(|s| {
                                matches!(s.theta[q], ThetaValue::Categorical(l) if l == true_level)
                            })
                            .count() as f64
                            / samples.len() as f64
                    })
                    .collect();
                let (mean, var_) = mean_var(&per_dataset);
                app.push(MetricRow {
                    parameter: var.name.clone(),
                    estimate: mean,
                    std_error: (var_ / n_data).sqrt(),
                });
            }
        }
    }
    Ok(StudyMetrics { arpmse, app })
}
