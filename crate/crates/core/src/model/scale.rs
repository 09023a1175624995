use crate::basis::{VarKind, VariableSpec};
use crate::error::{CoreError, Result};

/// Slack allowed when checking a native value against its range.
const RANGE_SLACK: f64 = 1e-9;

/// Map a native-unit value to [0,1]; categorical levels pass through
/// unchanged (coded as their 1-based level).
pub fn scale_to_unit(value: f64, spec: &VariableSpec) -> Result<f64> {
    match &spec.kind {
        VarKind::Continuous { lo, hi } => {
            let span = hi - lo;
            if value < lo - RANGE_SLACK * span.abs().max(1.0)
                || value > hi + RANGE_SLACK * span.abs().max(1.0)
            {
                return Err(CoreError::invalid(format!(
                    "{} = {value} outside [{lo}, {hi}]",
                    spec.name
                )));
            }
            Ok(((value - lo) / span).clamp(0.0, 1.0))
        }
        VarKind::Categorical { levels } => {
            let level = value.round();
            if (value - level).abs() > 1e-9 || level < 1.0 || level > levels.len() as f64 {
                return Err(CoreError::invalid(format!(
                    "{} = {value} is not a level in 1..={}",
                    spec.name,
                    levels.len()
                )));
            }
            Ok(level)
        }
    }
}

/// Inverse of `scale_to_unit`.
pub fn unscale_from_unit(unit: f64, spec: &VariableSpec) -> f64 {
    match &spec.kind {
        VarKind::Continuous { lo, hi } => lo + unit * (hi - lo),
        VarKind::Categorical { .. } => unit,
    }
}

/// Scale a full native point (combined x,t ordering) to unit coordinates.
pub fn scale_point(point: &[f64], vars: &[VariableSpec]) -> Result<Vec<f64>> {
    if point.len() != vars.len() {
        return Err(CoreError::invalid(format!(
            "point has {} coordinates, expected {}",
            point.len(),
            vars.len()
        )));
    }
    point
        .iter()
        .zip(vars)
        .map(|(&v, s)| scale_to_unit(v, s))
        .collect()
}
