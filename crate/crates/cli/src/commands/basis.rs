//! `basis`: dump the Karhunen-Loeve eigenvalues and basis functions.

use std::path::PathBuf;

use bsscal_core::basis::{EigenScaling, KlBasis};
use bsscal_core::{CoreError, Result};

use super::ensure_dir;
use crate::io;

#[derive(Clone, Copy, clap::ValueEnum)]
pub enum ScalingArg {
    Sqrt,
    Linear,
}

impl From<ScalingArg> for EigenScaling {
    fn from(s: ScalingArg) -> Self {
        match s {
            ScalingArg::Sqrt => EigenScaling::Sqrt,
            ScalingArg::Linear => EigenScaling::Linear,
        }
    }
}

#[derive(clap::Args)]
pub struct Args {
    /// Quadrature grid size for the eigen-decomposition.
    #[arg(long, default_value_t = 300)]
    pub grid: usize,
    /// Number of basis functions to emit.
    #[arg(long, default_value_t = 25)]
    pub terms: usize,
    /// How eigenfunctions are scaled into basis functions.
    #[arg(long, value_enum, default_value_t = ScalingArg::Sqrt)]
    pub scaling: ScalingArg,
    /// Directory the tables are written into.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &Args) -> Result<()> {
    let kl = KlBasis::build(args.grid, args.scaling.into())?;
    if args.terms == 0 || args.terms > kl.max_basis_index() {
        return Err(CoreError::invalid(format!(
            "terms {} out of range 1..={}",
            args.terms,
            kl.max_basis_index()
        )));
    }
    ensure_dir(&args.out)?;

    // Basis weights and, for the eigenfunction-derived terms, the raw
    // operator eigenvalues.
    let mut w = io::csv_writer(&args.out.join("eigenvalues.csv"))?;
    io::write_record(&mut w, &["index", "weight", "eigenvalue"].map(str::to_owned))?;
    for l in 1..=args.terms {
        let eigenvalue = if l >= 3 {
            io::fmt(kl.eigenvalues()[l - 3])
        } else {
            String::new()
        };
        io::write_record(
            &mut w,
            &[l.to_string(), io::fmt(kl.basis_weight(l)), eigenvalue],
        )?;
    }
    io::finish(w)?;

    let mut w = io::csv_writer(&args.out.join("eigenfunctions.csv"))?;
    let mut header = vec!["u".to_owned()];
    header.extend((1..=args.terms).map(|l| format!("phi_{l}")));
    io::write_record(&mut w, &header)?;
    for &u in kl.grid() {
        let mut rec = vec![io::fmt(u)];
        for l in 1..=args.terms {
            rec.push(io::fmt(kl.eval_main(l, u)?));
        }
        io::write_record(&mut w, &rec)?;
    }
    io::finish(w)
}
