//! Subcommand implementations and shared plumbing.

pub mod basis;
pub mod calibrate;
pub mod cv;
pub mod predict;
pub mod sa;
pub mod study;

use std::path::Path;

use bsscal_core::basis::{Catalog, VarKind, VariableSpec};
use bsscal_core::model::{validate_dataset, Dataset, ParameterState};
use bsscal_core::{CoreError, Result};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::io;

pub fn ensure_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path)
        .map_err(|e| CoreError::Io(format!("cannot create {}: {e}", path.display())))
}

/// Render a coordinate for output: categorical values as their level
/// label, continuous ones as lossless decimals.
pub fn coord_label(var: &VariableSpec, value: f64) -> String {
    match &var.kind {
        VarKind::Categorical { levels } => levels[value as usize - 1].clone(),
        VarKind::Continuous { .. } => io::fmt(value),
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CoreError::Io(format!("cannot serialize {}: {e}", path.display())))?;
    std::fs::write(path, text)
        .map_err(|e| CoreError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Posterior samples bundled with the configuration that produced them,
/// so downstream commands can rebuild the catalog and transforms.
#[derive(Serialize, Deserialize)]
pub struct SamplesFile {
    pub config: RunConfig,
    pub samples: Vec<ParameterState>,
}

impl SamplesFile {
    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CoreError::Io(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CoreError::Io(format!("samples file {}: {e}", path.display())))
    }
}

/// Read and validate the experimental and simulator tables.
pub fn load_dataset(
    cfg: &RunConfig,
    catalog: &Catalog,
    experimental: &Path,
    simulator: &Path,
) -> Result<Dataset> {
    let n_inputs = catalog.n_inputs();
    let names = cfg.output_names();
    let (exp_x, exp_y) = io::read_experimental(experimental, &catalog.vars[..n_inputs], &names)?;
    let (sim_w, sim_y) = io::read_simulator(simulator, &catalog.vars, &names)?;
    let data = Dataset {
        exp_x,
        exp_y,
        sim_w,
        sim_y,
    };
    let issues = validate_dataset(&data, &catalog.vars);
    if issues.is_empty() {
        Ok(data)
    } else {
        Err(CoreError::Validation(issues))
    }
}
