//! `calibrate`: run the sampler and write posterior tables.

use std::path::PathBuf;

use bsscal_core::analysis::{
    discrepancy_effects, predict, summarize_theta, PredictOptions, QueryPoint, ThetaMarginal,
};
use bsscal_core::basis::VarKind;
use bsscal_core::mcmc::{run_chain, Chain, ChainConfig};
use bsscal_core::model::{unscale_from_unit, ParameterState, ThetaValue};
use bsscal_core::studylab::derived_seed;
use bsscal_core::{CoreError, Result};
use rayon::prelude::*;

use super::{coord_label, ensure_dir, load_dataset, write_json, SamplesFile};
use crate::config::RunConfig;
use crate::io;

#[derive(clap::Args)]
pub struct Args {
    /// Run configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Experimental CSV: input columns plus one column per output; empty
    /// output cells mark missing observations.
    #[arg(long)]
    pub experimental: PathBuf,
    /// Simulator CSV: input and parameter columns plus outputs, complete.
    #[arg(long)]
    pub simulator: PathBuf,
    /// Directory the output tables are written into.
    #[arg(long)]
    pub out: PathBuf,
    /// Number of independent chains.
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
    /// Master seed; overrides the seed in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory for per-chain checkpoint files.
    #[arg(long)]
    pub checkpoint_dir: Option<PathBuf>,
}

pub fn run(args: &Args) -> Result<()> {
    if args.chains == 0 {
        return Err(CoreError::invalid("--chains must be at least 1"));
    }
    let cfg = RunConfig::load(&args.config)?;
    let (catalog, prior, transforms) = cfg.build()?;
    let data = load_dataset(&cfg, &catalog, &args.experimental, &args.simulator)?;
    ensure_dir(&args.out)?;
    if let Some(dir) = &args.checkpoint_dir {
        ensure_dir(dir)?;
    }

    let master = args.seed.unwrap_or(cfg.chain.seed);
    let seeds: Vec<u64> = if args.chains == 1 {
        vec![master]
    } else {
        (0..args.chains)
            .map(|i| derived_seed(master, i as u64, 0))
            .collect()
    };

    let chains: Vec<Chain> = seeds
        .par_iter()
        .enumerate()
        .map(|(i, &seed)| {
            let ckpt = args
                .checkpoint_dir
                .as_ref()
                .map(|d| d.join(format!("chain_{i}.ckpt")));
            run_chain(
                catalog.clone(),
                prior.clone(),
                transforms.clone(),
                data.clone(),
                &ChainConfig {
                    seed,
                    ..cfg.chain.clone()
                },
                ckpt.as_deref(),
            )
        })
        .collect::<Result<_>>()?;

    let n_inputs = catalog.n_inputs();
    let param_vars = &catalog.vars[n_inputs..];
    let output_names = cfg.output_names();

    // Parameter draws, native units, one row per recorded iteration.
    let mut w = io::csv_writer(&args.out.join("theta_samples.csv"))?;
    let mut header = vec!["iteration".to_owned(), "chain".to_owned()];
    header.extend(param_vars.iter().map(|v| v.name.clone()));
    io::write_record(&mut w, &header)?;
    for (ci, chain) in chains.iter().enumerate() {
        for (si, s) in chain.samples.iter().enumerate() {
            let iteration = cfg.chain.burn_in + (si + 1) * cfg.chain.thin;
            let mut rec = vec![iteration.to_string(), ci.to_string()];
            for (q, var) in param_vars.iter().enumerate() {
                rec.push(match s.theta[q] {
                    ThetaValue::Continuous(u) => io::fmt(unscale_from_unit(u, var)),
                    ThetaValue::Categorical(l) => coord_label(var, l as f64),
                });
            }
            io::write_record(&mut w, &rec)?;
        }
    }
    io::finish(w)?;

    // Covariance traces for convergence checks.
    let mut w = io::csv_writer(&args.out.join("variance_traces.csv"))?;
    io::write_record(
        &mut w,
        &["iteration", "chain", "matrix", "row", "col", "value"].map(str::to_owned),
    )?;
    for (ci, chain) in chains.iter().enumerate() {
        for (si, s) in chain.samples.iter().enumerate() {
            let iteration = cfg.chain.burn_in + (si + 1) * cfg.chain.thin;
            for (name, m) in [("sigma", &s.sigma), ("upsilon", &s.upsilon)] {
                for r in 0..m.nrows() {
                    for c in r..m.ncols() {
                        io::write_record(
                            &mut w,
                            &[
                                iteration.to_string(),
                                ci.to_string(),
                                name.to_owned(),
                                r.to_string(),
                                c.to_string(),
                                io::fmt(m[(r, c)]),
                            ],
                        )?;
                    }
                }
            }
        }
    }
    io::finish(w)?;

    let pooled: Vec<ParameterState> = chains
        .iter()
        .flat_map(|c| c.samples.iter().cloned())
        .collect();

    // Marginal posterior summary.
    let report = summarize_theta(&catalog, &pooled)?;
    let mut w = io::csv_writer(&args.out.join("summary.csv"))?;
    io::write_record(&mut w, &["parameter", "statistic", "value"].map(str::to_owned))?;
    for (summary, var) in report.params.iter().zip(param_vars) {
        match &summary.marginal {
            ThetaMarginal::Continuous {
                mean,
                sd,
                q025,
                q25,
                median,
                q75,
                q975,
            } => {
                for (stat, v) in [
                    ("mean", mean),
                    ("sd", sd),
                    ("q025", q025),
                    ("q25", q25),
                    ("median", median),
                    ("q75", q75),
                    ("q975", q975),
                ] {
                    io::write_record(
                        &mut w,
                        &[summary.name.clone(), stat.to_owned(), io::fmt(*v)],
                    )?;
                }
            }
            ThetaMarginal::Categorical { frequencies } => {
                let VarKind::Categorical { levels } = &var.kind else {
                    unreachable!("categorical marginal for a continuous variable");
                };
                for (label, &f) in levels.iter().zip(frequencies) {
                    io::write_record(
                        &mut w,
                        &[summary.name.clone(), format!("p_{label}"), io::fmt(f)],
                    )?;
                }
            }
        }
    }
    io::finish(w)?;

    // Fitted predictions at the configured grid (default: the
    // experimental design), discrepancy included.
    let pred_x = cfg
        .prediction_points
        .clone()
        .unwrap_or_else(|| data.exp_x.clone());
    let points: Vec<QueryPoint> = pred_x
        .iter()
        .map(|x| QueryPoint {
            x: x.clone(),
            t: None,
        })
        .collect();
    let pred = predict(
        &catalog,
        &transforms,
        &pooled,
        &points,
        &PredictOptions {
            with_discrepancy: true,
            realizations: 0,
            interval: 0.95,
        },
    )?;
    let mut w = io::csv_writer(&args.out.join("predictions.csv"))?;
    let mut header: Vec<String> = catalog.vars[..n_inputs]
        .iter()
        .map(|v| v.name.clone())
        .collect();
    for name in &output_names {
        header.push(format!("{name}_mean"));
        header.push(format!("{name}_lower"));
        header.push(format!("{name}_upper"));
    }
    io::write_record(&mut w, &header)?;
    for (x, p) in pred_x.iter().zip(&pred.points) {
        let mut rec: Vec<String> = x
            .iter()
            .zip(&catalog.vars[..n_inputs])
            .map(|(&v, spec)| coord_label(spec, v))
            .collect();
        for k in 0..output_names.len() {
            rec.push(io::fmt(p.mean[k]));
            rec.push(io::fmt(p.lower[k]));
            rec.push(io::fmt(p.upper[k]));
        }
        io::write_record(&mut w, &rec)?;
    }
    io::finish(w)?;

    // Discrepancy main-effect curves on the model scale.
    let curves = discrepancy_effects(&catalog, &pooled, 50, 0.95)?;
    let mut w = io::csv_writer(&args.out.join("discrepancy_effects.csv"))?;
    io::write_record(
        &mut w,
        &["input", "output", "location", "mean", "lower", "upper", "significant"].map(str::to_owned),
    )?;
    for curve in &curves {
        for (gi, &g) in curve.grid.iter().enumerate() {
            io::write_record(
                &mut w,
                &[
                    curve.input.clone(),
                    output_names[curve.output].clone(),
                    io::fmt(g),
                    io::fmt(curve.mean[gi]),
                    io::fmt(curve.lower[gi]),
                    io::fmt(curve.upper[gi]),
                    curve.significant.to_string(),
                ],
            )?;
        }
    }
    io::finish(w)?;

    SamplesFile {
        config: cfg.clone(),
        samples: pooled,
    }
    .save(&args.out.join("samples.json"))?;

    let manifest = serde_json::json!({
        "command": "calibrate",
        "seed": master,
        "chains": args.chains,
        "chain_seeds": seeds,
        "iterations": cfg.chain.iterations,
        "burn_in": cfg.chain.burn_in,
        "thin": cfg.chain.thin,
        "samples_per_chain": cfg.chain.sample_count(),
        "n_experimental": data.n_experimental(),
        "n_simulator": data.n_simulator(),
        "n_missing": data.missing_cells().len(),
        "acceptance_rates": chains.iter().map(Chain::acceptance_rates).collect::<Vec<_>>(),
        "categorical_acceptance": chains
            .iter()
            .map(|c| {
                if c.categorical_attempts == 0 {
                    f64::NAN
                } else {
                    c.categorical_accepts as f64 / c.categorical_attempts as f64
                }
            })
            .collect::<Vec<_>>(),
        "mean_iteration_secs": chains.iter().map(|c| c.mean_iteration_secs).collect::<Vec<_>>(),
        "config": cfg,
    });
    write_json(&args.out.join("manifest.json"), &manifest)
}
