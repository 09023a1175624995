//! Posterior analysis: prediction, discrepancy curves, sensitivity
//! indices, cross-validation, and summaries.

pub mod common;
pub mod crossval;
pub mod discrepancy;
pub mod predict;
pub mod sensitivity;
pub mod summary;

pub use common::{mean_var, pearson, quantile, r_squared, r_squared_corr};
pub use crossval::{cross_validate, CvFoldResult, CvR2, CvReport};
pub use discrepancy::{discrepancy_effects, EffectCurve};
pub use predict::{predict, PointPrediction, PredictOptions, PredictionResult, QueryPoint};
pub use sensitivity::{
    jansen_total_effects, total_sensitivity, SensitivityOptions, SensitivityResult,
};
pub use summary::{
    study_metrics, summarize_theta, MetricRow, StudyMetrics, ThetaMarginal, ThetaReport,
    ThetaSummary,
};
