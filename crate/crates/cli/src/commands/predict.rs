//! `predict`: posterior prediction at new points from a samples file.

use std::path::PathBuf;

use bsscal_core::analysis::{predict, PredictOptions, QueryPoint};
use bsscal_core::{CoreError, Result};

use super::{coord_label, SamplesFile};
use crate::io;

#[derive(clap::Args)]
pub struct Args {
    /// samples.json written by `calibrate`.
    #[arg(long)]
    pub samples: PathBuf,
    /// CSV of query points: one column per input variable. When every
    /// parameter column is also present, predictions are made at those
    /// fixed parameter values instead of the posterior draws.
    #[arg(long)]
    pub points: PathBuf,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
    /// Predict with the emulator alone, discrepancy excluded.
    #[arg(long)]
    pub emulator_only: bool,
    /// Credible-interval mass.
    #[arg(long, default_value_t = 0.95)]
    pub interval: f64,
}

pub fn run(args: &Args) -> Result<()> {
    let sf = SamplesFile::load(&args.samples)?;
    let (catalog, _prior, transforms) = sf.config.build()?;
    let n_inputs = catalog.n_inputs();
    let inputs = &catalog.vars[..n_inputs];
    let params = &catalog.vars[n_inputs..];
    let output_names = sf.config.output_names();

    let table = io::read_table(&args.points)?;
    let in_cols: Vec<usize> = inputs
        .iter()
        .map(|v| table.column(&v.name))
        .collect::<Result<_>>()?;
    let present = params
        .iter()
        .filter(|v| table.headers.iter().any(|h| *h == v.name))
        .count();
    let param_cols: Option<Vec<usize>> = if present == 0 || params.is_empty() {
        None
    } else if present == params.len() {
        Some(
            params
                .iter()
                .map(|v| table.column(&v.name))
                .collect::<Result<_>>()?,
        )
    } else {
        return Err(CoreError::invalid(
            "points file names some parameter columns but not all; \
             supply every parameter or none",
        ));
    };

    let mut issues = Vec::new();
    let points: Vec<QueryPoint> = table
        .rows
        .iter()
        .enumerate()
        .map(|(r, row)| QueryPoint {
            x: in_cols
                .iter()
                .zip(inputs)
                .map(|(&c, spec)| io::parse_coord(spec, &row[c], r, &mut issues))
                .collect(),
            t: param_cols.as_ref().map(|cols| {
                cols.iter()
                    .zip(params)
                    .map(|(&c, spec)| io::parse_coord(spec, &row[c], r, &mut issues))
                    .collect()
            }),
        })
        .collect();
    if !issues.is_empty() {
        return Err(CoreError::Validation(issues));
    }

    let pred = predict(
        &catalog,
        &transforms,
        &sf.samples,
        &points,
        &PredictOptions {
            with_discrepancy: !args.emulator_only,
            realizations: 0,
            interval: args.interval,
        },
    )?;

    let mut w = io::csv_writer(&args.out)?;
    let mut header: Vec<String> = inputs.iter().map(|v| v.name.clone()).collect();
    for name in &output_names {
        header.push(format!("{name}_mean"));
        header.push(format!("{name}_lower"));
        header.push(format!("{name}_upper"));
    }
    io::write_record(&mut w, &header)?;
    for (q, p) in points.iter().zip(&pred.points) {
        let mut rec: Vec<String> = q
            .x
            .iter()
            .zip(inputs)
            .map(|(&v, spec)| coord_label(spec, v))
            .collect();
        for k in 0..output_names.len() {
            rec.push(io::fmt(p.mean[k]));
            rec.push(io::fmt(p.lower[k]));
            rec.push(io::fmt(p.upper[k]));
        }
        io::write_record(&mut w, &rec)?;
    }
    io::finish(w)
}
