//! `cv`: leave-one-group-out cross-validation keyed on an input variable.

use std::path::PathBuf;

use bsscal_core::analysis::cross_validate;
use bsscal_core::mcmc::ChainConfig;
use bsscal_core::Result;

use super::{ensure_dir, load_dataset, write_json};
use crate::config::RunConfig;
use crate::io;

#[derive(clap::Args)]
pub struct Args {
    /// Run configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub experimental: PathBuf,
    #[arg(long)]
    pub simulator: PathBuf,
    /// Input variable whose distinct values define the folds.
    #[arg(long)]
    pub fold_by: String,
    /// Directory the fold and R-squared tables are written into.
    #[arg(long)]
    pub out: PathBuf,
    /// Master seed; overrides the seed in the config.
    #[arg(long)]
    pub seed: Option<u64>,
}

pub fn run(args: &Args) -> Result<()> {
    let cfg = RunConfig::load(&args.config)?;
    let (catalog, prior, transforms) = cfg.build()?;
    let data = load_dataset(&cfg, &catalog, &args.experimental, &args.simulator)?;
    ensure_dir(&args.out)?;

    let chain = ChainConfig {
        seed: args.seed.unwrap_or(cfg.chain.seed),
        ..cfg.chain.clone()
    };
    let report = cross_validate(&catalog, &prior, &transforms, &data, &chain, &args.fold_by)?;

    let mut w = io::csv_writer(&args.out.join("folds.csv"))?;
    io::write_record(
        &mut w,
        &["fold_value", "n_held_out", "status"].map(str::to_owned),
    )?;
    for fold in &report.folds {
        io::write_record(
            &mut w,
            &[
                io::fmt(fold.fold_value),
                fold.held_out_rows.len().to_string(),
                fold.error.clone().unwrap_or_else(|| "ok".to_owned()),
            ],
        )?;
    }
    io::finish(w)?;

    let mut w = io::csv_writer(&args.out.join("r2.csv"))?;
    io::write_record(&mut w, &["metric", "value"].map(str::to_owned))?;
    for (metric, value) in [
        ("in_sample_emulator", report.r2.in_sample_emulator),
        ("in_sample_full", report.r2.in_sample_full),
        ("out_sample_emulator", report.r2.out_sample_emulator),
        ("out_sample_full", report.r2.out_sample_full),
    ] {
        io::write_record(&mut w, &[metric.to_owned(), io::fmt(value)])?;
    }
    io::finish(w)?;

    let manifest = serde_json::json!({
        "command": "cv",
        "fold_by": args.fold_by,
        "seed": chain.seed,
        "n_folds": report.folds.len(),
        "config": cfg,
    });
    write_json(&args.out.join("manifest.json"), &manifest)
}
