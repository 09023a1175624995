//! `study`: truth-known simulation study from the config's study section.

use std::path::PathBuf;

use bsscal_core::model::ThetaValue;
use bsscal_core::studylab::{derived_seed, draw_truth, lhs, run_study, TruthConfig};
use bsscal_core::{CoreError, Result};
use nalgebra::DMatrix;

use super::{coord_label, ensure_dir, write_json};
use crate::config::RunConfig;
use crate::io;

#[derive(clap::Args)]
pub struct Args {
    /// Run configuration (JSON) with a `study` section.
    #[arg(long)]
    pub config: PathBuf,
    /// Directory the study report is written into.
    #[arg(long)]
    pub out: PathBuf,
    /// Master seed; overrides the seed in the config.
    #[arg(long)]
    pub seed: Option<u64>,
}

fn matrix_from(rows: &[Vec<f64>], c: usize, what: &str) -> Result<DMatrix<f64>> {
    if rows.len() != c || rows.iter().any(|r| r.len() != c) {
        return Err(CoreError::config(format!(
            "{what} must be a {c}x{c} matrix (one row per output)"
        )));
    }
    Ok(DMatrix::from_fn(c, c, |i, j| rows[i][j]))
}

pub fn run(args: &Args) -> Result<()> {
    let cfg = RunConfig::load(&args.config)?;
    let sc = cfg
        .study
        .as_ref()
        .ok_or_else(|| CoreError::config("config has no study section"))?;
    let (catalog, prior, transforms) = cfg.build()?;
    ensure_dir(&args.out)?;

    let master = args.seed.unwrap_or(cfg.chain.seed);
    let n_inputs = catalog.n_inputs();
    let exp_design = lhs(
        sc.n_experimental,
        &catalog.vars[..n_inputs],
        derived_seed(master, 0, 10),
    )?;
    let sim_design = lhs(sc.n_simulator, &catalog.vars, derived_seed(master, 0, 11))?;

    let c = cfg.outputs.len();
    let truth_cfg = TruthConfig {
        lambda: matrix_from(&sc.truth_lambda, c, "truth_lambda")?,
        omega: matrix_from(&sc.truth_omega, c, "truth_omega")?,
        sigma: matrix_from(&sc.truth_sigma, c, "truth_sigma")?,
        upsilon: matrix_from(&sc.truth_upsilon, c, "truth_upsilon")?,
        theta: sc.truth_theta.clone(),
    };
    let truth = draw_truth(&catalog, &prior.theta, &truth_cfg, derived_seed(master, 0, 12))?;

    let report = run_study(
        sc.n_datasets,
        &truth,
        &catalog,
        &prior,
        &transforms,
        &exp_design,
        &sim_design,
        &sc.missing,
        &cfg.chain,
        master,
    )?;

    let mut w = io::csv_writer(&args.out.join("report.csv"))?;
    io::write_record(
        &mut w,
        &["metric", "parameter", "estimate", "std_error"].map(str::to_owned),
    )?;
    for (metric, rows) in [("arpmse", &report.metrics.arpmse), ("app", &report.metrics.app)] {
        for row in rows {
            io::write_record(
                &mut w,
                &[
                    metric.to_owned(),
                    row.parameter.clone(),
                    io::fmt(row.estimate),
                    io::fmt(row.std_error),
                ],
            )?;
        }
    }
    io::finish(w)?;

    // Truth parameters reported on native units / level labels.
    let param_vars = &catalog.vars[n_inputs..];
    let truth_theta: Vec<String> = truth
        .theta
        .iter()
        .zip(param_vars)
        .map(|(t, var)| match t {
            ThetaValue::Continuous(u) => {
                io::fmt(bsscal_core::model::unscale_from_unit(*u, var))
            }
            ThetaValue::Categorical(l) => coord_label(var, *l as f64),
        })
        .collect();
    let manifest = serde_json::json!({
        "command": "study",
        "seed": master,
        "n_requested": report.n_requested,
        "n_completed": report.n_completed,
        "failures": report.failures,
        "mean_iteration_secs": report.mean_iteration_secs,
        "truth_theta": truth_theta,
        "config": cfg,
    });
    write_json(&args.out.join("manifest.json"), &manifest)
}
