//! CSV ingestion and emission.
//!
//! Experimental tables carry one column per input variable followed by
//! one column per output, matched by name; empty output cells mark
//! missing observations. Simulator tables carry input, parameter, and
//! output columns, all complete. Categorical values appear as level
//! labels. All emitted numbers use shortest-round-trip formatting, so
//! files re-parse to identical doubles.

use std::path::Path;

use bsscal_core::basis::{VarKind, VariableSpec};
use bsscal_core::{CoreError, Result, ValidationIssue};

pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub fn read_table(path: &Path) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CoreError::Io(format!("cannot open {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CoreError::Io(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CoreError::Io(format!("{}: {e}", path.display())))?;
        rows.push(record.iter().map(str::to_owned).collect());
    }
    Ok(Table { headers, rows })
}

impl Table {
    pub fn column(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| {
                CoreError::Validation(vec![ValidationIssue::new(
                    None,
                    Some(name),
                    "required column is missing",
                )])
            })
    }
}

/// Parse one coordinate value: a float for continuous variables, a level
/// label for categorical ones (returned as the 1-based level number).
pub fn parse_coord(
    spec: &VariableSpec,
    raw: &str,
    row: usize,
    issues: &mut Vec<ValidationIssue>,
) -> f64 {
    match &spec.kind {
        VarKind::Continuous { .. } => match raw.parse::<f64>() {
            Ok(v) => v,
            Err(_) => {
                issues.push(ValidationIssue::new(
                    Some(row),
                    Some(&spec.name),
                    format!("cannot parse {raw:?} as a number"),
                ));
                f64::NAN
            }
        },
        VarKind::Categorical { levels } => match levels.iter().position(|l| l == raw) {
            Some(i) => (i + 1) as f64,
            None => {
                issues.push(ValidationIssue::new(
                    Some(row),
                    Some(&spec.name),
                    format!("unknown level {raw:?}; expected one of {levels:?}"),
                ));
                f64::NAN
            }
        },
    }
}

/// Experimental table: inputs plus outputs, empty output cells = missing.
pub fn read_experimental(
    path: &Path,
    inputs: &[VariableSpec],
    output_names: &[String],
) -> Result<(Vec<Vec<f64>>, Vec<Vec<Option<f64>>>)> {
    let table = read_table(path)?;
    let in_cols: Vec<usize> = inputs
        .iter()
        .map(|v| table.column(&v.name))
        .collect::<Result<_>>()?;
    let out_cols: Vec<usize> = output_names
        .iter()
        .map(|n| table.column(n))
        .collect::<Result<_>>()?;
    let mut issues = Vec::new();
    let mut exp_x = Vec::with_capacity(table.rows.len());
    let mut exp_y = Vec::with_capacity(table.rows.len());
    for (r, row) in table.rows.iter().enumerate() {
        exp_x.push(
            in_cols
                .iter()
                .zip(inputs)
                .map(|(&c, spec)| parse_coord(spec, &row[c], r, &mut issues))
                .collect(),
        );
        exp_y.push(
            out_cols
                .iter()
                .zip(output_names)
                .map(|(&c, name)| {
                    let raw = &row[c];
                    if raw.is_empty() {
                        None
                    } else {
                        match raw.parse::<f64>() {
                            Ok(v) => Some(v),
                            Err(_) => {
                                issues.push(ValidationIssue::new(
                                    Some(r),
                                    Some(name),
                                    format!("cannot parse {raw:?} as a number"),
                                ));
                                None
                            }
                        }
                    }
                })
                .collect(),
        );
    }
    if issues.is_empty() {
        Ok((exp_x, exp_y))
    } else {
        Err(CoreError::Validation(issues))
    }
}

/// Simulator table: inputs, parameters, and complete outputs.
pub fn read_simulator(
    path: &Path,
    vars: &[VariableSpec],
    output_names: &[String],
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let table = read_table(path)?;
    let var_cols: Vec<usize> = vars
        .iter()
        .map(|v| table.column(&v.name))
        .collect::<Result<_>>()?;
    let out_cols: Vec<usize> = output_names
        .iter()
        .map(|n| table.column(n))
        .collect::<Result<_>>()?;
    let mut issues = Vec::new();
    let mut sim_w = Vec::with_capacity(table.rows.len());
    let mut sim_y = Vec::with_capacity(table.rows.len());
    for (r, row) in table.rows.iter().enumerate() {
        sim_w.push(
            var_cols
                .iter()
                .zip(vars)
                .map(|(&c, spec)| parse_coord(spec, &row[c], r, &mut issues))
                .collect(),
        );
        sim_y.push(
            out_cols
                .iter()
                .zip(output_names)
                .map(|(&c, name)| {
                    let raw = &row[c];
                    match raw.parse::<f64>() {
                        Ok(v) => v,
                        Err(_) => {
                            issues.push(ValidationIssue::new(
                                Some(r),
                                Some(name),
                                if raw.is_empty() {
                                    "simulator outputs must be complete; cell is empty".to_owned()
                                } else {
                                    format!("cannot parse {raw:?} as a number")
                                },
                            ));
                            f64::NAN
                        }
                    }
                })
                .collect(),
        );
    }
    if issues.is_empty() {
        Ok((sim_w, sim_y))
    } else {
        Err(CoreError::Validation(issues))
    }
}

/// Read native-unit points over the given dimensions (matched by column
/// name), e.g. prediction or sensitivity locations.
pub fn read_points(path: &Path, dims: &[VariableSpec]) -> Result<Vec<Vec<f64>>> {
    let table = read_table(path)?;
    let cols: Vec<usize> = dims
        .iter()
        .map(|v| table.column(&v.name))
        .collect::<Result<_>>()?;
    let mut issues = Vec::new();
    let points = table
        .rows
        .iter()
        .enumerate()
        .map(|(r, row)| {
            cols.iter()
                .zip(dims)
                .map(|(&c, spec)| parse_coord(spec, &row[c], r, &mut issues))
                .collect()
        })
        .collect();
    if issues.is_empty() {
        Ok(points)
    } else {
        Err(CoreError::Validation(issues))
    }
}

/// Shortest lossless decimal rendering of a double.
pub fn fmt(v: f64) -> String {
    format!("{v}")
}

pub fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path)
        .map_err(|e| CoreError::Io(format!("cannot create {}: {e}", path.display())))
}

pub fn write_record<W: std::io::Write>(
    writer: &mut csv::Writer<W>,
    fields: &[String],
) -> Result<()> {
    writer
        .write_record(fields)
        .map_err(|e| CoreError::Io(format!("CSV write failed: {e}")))
}

pub fn finish<W: std::io::Write>(mut writer: csv::Writer<W>) -> Result<()> {
    writer
        .flush()
        .map_err(|e| CoreError::Io(format!("CSV flush failed: {e}")))
}
