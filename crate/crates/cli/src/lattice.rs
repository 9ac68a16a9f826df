use std::path::PathBuf;

use clap::{Args, Subcommand};
use gkp_core::lattices::shortest_vectors;
use gkp_core::{catalog_lattice, CatalogEntry, GkpError, Lattice, Which};
use serde::Serialize;

use crate::error::CliError;

#[derive(Subcommand)]
pub enum LatticeCommand {
    /// Dimension, determinant and shortest dual vectors of a lattice.
    Info(InfoArgs),
}

#[derive(Args)]
pub struct InfoArgs {
    /// Catalog name: square[D], hexagonal[D], tesseract, d4, d6, e8, leech.
    #[arg(required_unless_present = "file", conflicts_with = "file")]
    name: Option<String>,
    /// JSON file {"modes": N, "generator": [[...], ...]}.
    #[arg(long)]
    file: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Serialize)]
struct Info<'a> {
    name: &'a str,
    #[serde(rename = "N")]
    modes: usize,
    det: u64,
    dual_min_norm_sq: f64,
    kissing: usize,
    enumerable: bool,
}

/// Catalog lookup with unknown names reported as usage errors.
pub fn lookup(name: &str) -> Result<CatalogEntry, CliError> {
    catalog_lattice(name).map_err(|e| match e {
        GkpError::UnknownLattice(_) => CliError::usage(e.to_string()),
        other => CliError::Compute(other),
    })
}

fn from_file(path: &PathBuf) -> Result<CatalogEntry, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let lat = Lattice::from_json(&text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let sv = shortest_vectors(&lat, Which::Dual)?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("custom").to_string();
    Ok(CatalogEntry {
        name,
        modes: lat.modes(),
        det: lat.det_abs() * lat.det_abs(),
        dual_min_norm_sq: sv.min_norm_sq,
        kissing: sv.kissing,
        enumerable: true,
        lattice: Some(lat),
    })
}

pub fn run(cmd: LatticeCommand) -> Result<(), CliError> {
    let LatticeCommand::Info(args) = cmd;
    let e = match (&args.name, &args.file) {
        (_, Some(p)) => from_file(p)?,
        (Some(n), None) => lookup(n)?,
        (None, None) => return Err(CliError::usage("need a lattice name or --file")),
    };
    let info = Info {
        name: &e.name,
        modes: e.modes,
        det: e.det,
        dual_min_norm_sq: e.dual_min_norm_sq,
        kissing: e.kissing,
        enumerable: e.enumerable,
    };
    if args.json {
        println!("{}", serde_json::to_string(&info).expect("plain struct serializes"));
    } else {
        println!("name: {}", info.name);
        println!("N: {}", info.modes);
        println!("det: {}", info.det);
        println!("dual_min_norm_sq: {}", info.dual_min_norm_sq);
        println!("kissing: {}", info.kissing);
        println!("enumerable: {}", info.enumerable);
    }
    Ok(())
}
