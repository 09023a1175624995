//! Experimental and simulator data tables in native units.

use serde::{Deserialize, Serialize};

use crate::basis::{VarRole, VariableSpec};
use crate::error::ValidationIssue;
use crate::model::scale::scale_to_unit;

/// Experimental rows (inputs, outputs with missing mask) plus simulator
/// rows (inputs, parameters, outputs). All values in native units;
/// categorical coordinates coded as 1-based levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    /// N x P experimental input locations.
    pub exp_x: Vec<Vec<f64>>,
    /// N x C experimental outputs; `None` marks a missing cell.
    pub exp_y: Vec<Vec<Option<f64>>>,
    /// M x (P+Q) simulator design points in combined (x, t) order.
    pub sim_w: Vec<Vec<f64>>,
    /// M x C simulator outputs; always fully observed.
    pub sim_y: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn n_experimental(&self) -> usize {
        self.exp_x.len()
    }

    pub fn n_simulator(&self) -> usize {
        self.sim_w.len()
    }

    pub fn n_outputs(&self) -> usize {
        self.exp_y.first().map_or_else(
            || self.sim_y.first().map_or(0, Vec::len),
            Vec::len,
        )
    }

    /// Missing experimental cells in canonical order: by row, then by
    /// output index. Imputed values in `ParameterState` align with this.
    pub fn missing_cells(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (n, row) in self.exp_y.iter().enumerate() {
            for (c, cell) in row.iter().enumerate() {
                if cell.is_none() {
                    out.push((n, c));
                }
            }
        }
        out
    }
}

/// Structural and range validation; an empty report means valid.
pub fn validate_dataset(data: &Dataset, vars: &[VariableSpec]) -> Vec<ValidationIssue> {
    let mut issues = Vec::new();
    let inputs: Vec<&VariableSpec> = vars.iter().filter(|v| v.role == VarRole::Input).collect();
    let p = inputs.len();
    let r = vars.len();
    let c = data.n_outputs();

    if data.exp_x.len() != data.exp_y.len() {
        issues.push(ValidationIssue::new(
            None,
            None,
            format!(
                "experimental inputs ({}) and outputs ({}) row counts differ",
                data.exp_x.len(),
                data.exp_y.len()
            ),
        ));
        return issues;
    }
    if data.sim_w.len() != data.sim_y.len() {
        issues.push(ValidationIssue::new(
            None,
            None,
            format!(
                "simulator inputs ({}) and outputs ({}) row counts differ",
                data.sim_w.len(),
                data.sim_y.len()
            ),
        ));
        return issues;
    }

    for (n, row) in data.exp_x.iter().enumerate() {
        if row.len() != p {
            issues.push(ValidationIssue::new(
                Some(n),
                None,
                format!("experimental row has {} inputs, expected {p}", row.len()),
            ));
            continue;
        }
        for (i, (&v, spec)) in row.iter().zip(&inputs).enumerate() {
            if let Err(e) = scale_to_unit(v, spec) {
                issues.push(ValidationIssue::new(Some(n), Some(&inputs[i].name), e.to_string()));
            }
        }
    }
    for (n, row) in data.exp_y.iter().enumerate() {
        if row.len() != c {
            issues.push(ValidationIssue::new(
                Some(n),
                None,
                format!("experimental row has {} outputs, expected {c}", row.len()),
            ));
            continue;
        }
        if row.iter().all(Option::is_none) {
            issues.push(ValidationIssue::new(
                Some(n),
                None,
                "experimental row has no observed outputs",
            ));
        }
        for (i, cell) in row.iter().enumerate() {
            if let Some(v) = cell {
                if !v.is_finite() {
                    issues.push(ValidationIssue::new(
                        Some(n),
                        None,
                        format!("output {i} is not finite"),
                    ));
                }
            }
        }
    }

    for (m, row) in data.sim_w.iter().enumerate() {
        if row.len() != r {
            issues.push(ValidationIssue::new(
                Some(m),
                None,
                format!("simulator row has {} coordinates, expected {r}", row.len()),
            ));
            continue;
        }
        for (&v, spec) in row.iter().zip(vars) {
            if let Err(e) = scale_to_unit(v, spec) {
                issues.push(ValidationIssue::new(Some(m), Some(&spec.name), e.to_string()));
            }
        }
    }
    for (m, row) in data.sim_y.iter().enumerate() {
        if row.len() != c {
            issues.push(ValidationIssue::new(
                Some(m),
                None,
                format!("simulator row has {} outputs, expected {c}", row.len()),
            ));
            continue;
        }
        for (i, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                issues.push(ValidationIssue::new(
                    Some(m),
                    None,
                    format!("simulator outputs must be complete; output {i} is missing or not finite"),
                ));
            }
        }
    }

    issues
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::VarRole;

    fn table_vars() -> Vec<VariableSpec> {
        vec![
            VariableSpec::continuous("x1", 5.5, 16.1, VarRole::Input),
            VariableSpec::continuous("x2", -90.0, 90.0, VarRole::Input),
            VariableSpec::continuous("t1", 0.8, 1.0, VarRole::Parameter),
        ]
    }

    fn well_formed() -> Dataset {
        let mut exp_x = Vec::new();
        let mut exp_y = Vec::new();
        for i in 0..20 {
            exp_x.push(vec![5.5 + 0.5 * i as f64, -90.0 + 9.0 * i as f64]);
            exp_y.push(vec![Some(1.0 + i as f64 * 0.1), Some(0.05)]);
        }
        Dataset {
            exp_x,
            exp_y,
            sim_w: vec![vec![12.6, 0.0, 0.85]],
            sim_y: vec![vec![3.8, 0.27]],
        }
    }

    #[test]
    fn well_formed_passes() {
        assert!(validate_dataset(&well_formed(), &table_vars()).is_empty());
    }

    #[test]
    fn out_of_range_input_named() {
        let mut d = well_formed();
        d.exp_x[3][0] = 99.0;
        let issues = validate_dataset(&d, &table_vars());
        assert_eq!(issues.len(), 1);
        assert_eq!(issues[0].row, Some(3));
        assert_eq!(issues[0].column.as_deref(), Some("x1"));
    }

    #[test]
    fn incomplete_simulator_row_flagged() {
        let mut d = well_formed();
        d.sim_y[0][1] = f64::NAN;
        let issues = validate_dataset(&d, &table_vars());
        assert!(issues
            .iter()
            .any(|i| i.message.contains("simulator outputs must be complete")));
    }

    #[test]
    fn fully_missing_row_flagged() {
        let mut d = well_formed();
        d.exp_y[0] = vec![None, None];
        let issues = validate_dataset(&d, &table_vars());
        assert!(issues.iter().any(|i| i.message.contains("no observed outputs")));
    }

    #[test]
    fn missing_cells_order() {
        let mut d = well_formed();
        d.exp_y[2][1] = None;
        d.exp_y[5][0] = None;
        assert_eq!(d.missing_cells(), vec![(2, 1), (5, 0)]);
    }
}
