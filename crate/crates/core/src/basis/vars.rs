use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Whether a variable is a controllable input (x) or a model parameter
/// to calibrate (t).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarRole {
    Input,
    Parameter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    /// Native range [lo, hi], mapped to [0,1] before analysis.
    Continuous { lo: f64, hi: f64 },
    /// Unordered levels, at least two, identified by label.
    Categorical { levels: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    pub kind: VarKind,
    pub role: VarRole,
}

impl VariableSpec {
    pub fn continuous(name: &str, lo: f64, hi: f64, role: VarRole) -> Self {
        VariableSpec {
            name: name.to_owned(),
            kind: VarKind::Continuous { lo, hi },
            role,
        }
    }

    pub fn categorical(name: &str, levels: &[&str], role: VarRole) -> Self {
        VariableSpec {
            name: name.to_owned(),
            kind: VarKind::Categorical {
                levels: levels.iter().map(|s| s.to_string()).collect(),
            },
            role,
        }
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self.kind, VarKind::Continuous { .. })
    }

    pub fn is_categorical(&self) -> bool {
        matches!(self.kind, VarKind::Categorical { .. })
    }

    /// Number of levels of a categorical variable, 0 for continuous.
    pub fn level_count(&self) -> usize {
        match &self.kind {
            VarKind::Categorical { levels } => levels.len(),
            VarKind::Continuous { .. } => 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            VarKind::Continuous { lo, hi } => {
                if !lo.is_finite() || !hi.is_finite() {
                    return Err(CoreError::invalid(format!(
                        "variable {}: non-finite range [{lo}, {hi}]",
                        self.name
                    )));
                }
                if lo >= hi {
                    return Err(CoreError::invalid(format!(
                        "variable {}: degenerate range [{lo}, {hi}]; lo must be < hi",
                        self.name
                    )));
                }
            }
            VarKind::Categorical { levels } => {
                if levels.len() < 2 {
                    return Err(CoreError::invalid(format!(
                        "categorical variable {} needs at least 2 levels",
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Check an ordered variable list: inputs first, then parameters, every
/// spec individually valid.
pub fn validate_variables(vars: &[VariableSpec]) -> Result<()> {
    if vars.is_empty() {
        return Err(CoreError::invalid("at least one variable is required"));
    }
    for v in vars {
        v.validate()?;
    }
    let mut seen_param = false;
    for v in vars {
        match v.role {
            VarRole::Parameter => seen_param = true,
            VarRole::Input if seen_param => {
                return Err(CoreError::invalid(
                    "variables must list all inputs before parameters",
                ));
            }
            VarRole::Input => {}
        }
    }
    Ok(())
}

/// Indices of input variables within the combined (x, t) ordering.
pub fn input_indices(vars: &[VariableSpec]) -> Vec<usize> {
    vars.iter()
        .enumerate()
        .filter(|(_, v)| v.role == VarRole::Input)
        .map(|(i, _)| i)
        .collect()
}

/// Indices of parameter variables within the combined (x, t) ordering.
pub fn parameter_indices(vars: &[VariableSpec]) -> Vec<usize> {
    vars.iter()
        .enumerate()
        .filter(|(_, v)| v.role == VarRole::Parameter)
        .map(|(i, _)| i)
        .collect()
}
