//! `sa`: total-effect sensitivity indices of the fitted emulator.

use std::path::PathBuf;

use bsscal_core::analysis::{total_sensitivity, SensitivityOptions};
use bsscal_core::Result;

use super::{coord_label, SamplesFile};
use crate::io;

#[derive(clap::Args)]
pub struct Args {
    /// samples.json written by `calibrate`.
    #[arg(long)]
    pub samples: PathBuf,
    /// CSV of input locations to condition on: one column per input.
    #[arg(long)]
    pub locations: PathBuf,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
    /// Monte-Carlo sample size per index.
    #[arg(long, default_value_t = 10_000)]
    pub n_mc: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Average indices over posterior coefficient draws instead of using
    /// the posterior-mean coefficients.
    #[arg(long)]
    pub full_posterior: bool,
}

pub fn run(args: &Args) -> Result<()> {
    let sf = SamplesFile::load(&args.samples)?;
    let (catalog, prior, _transforms) = sf.config.build()?;
    let n_inputs = catalog.n_inputs();
    let inputs = &catalog.vars[..n_inputs];
    let output_names = sf.config.output_names();

    let locations = io::read_points(&args.locations, inputs)?;
    let result = total_sensitivity(
        &catalog,
        &sf.samples,
        &prior.theta,
        &locations,
        &SensitivityOptions {
            n_mc: args.n_mc,
            seed: args.seed,
            use_full_posterior: args.full_posterior,
            posterior_draws: 20,
        },
    )?;
    if result.negative_flagged {
        eprintln!(
            "warning: some total-effect estimates are negative (Monte-Carlo noise); \
             reported unclamped"
        );
    }

    let mut w = io::csv_writer(&args.out)?;
    let mut header = vec!["location".to_owned()];
    header.extend(inputs.iter().map(|v| v.name.clone()));
    header.extend(["output", "parameter", "total_effect"].map(str::to_owned));
    io::write_record(&mut w, &header)?;
    for (li, x) in locations.iter().enumerate() {
        for (k, name) in output_names.iter().enumerate() {
            for (p, pname) in result.parameter_names.iter().enumerate() {
                let mut rec = vec![li.to_string()];
                rec.extend(
                    x.iter()
                        .zip(inputs)
                        .map(|(&v, spec)| coord_label(spec, v)),
                );
                rec.push(name.clone());
                rec.push(pname.clone());
                rec.push(io::fmt(result.indices[li][k][p]));
                io::write_record(&mut w, &rec)?;
            }
        }
    }
    io::finish(w)
}
