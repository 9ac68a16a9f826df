use std::path::PathBuf;

use clap::{Args, ValueEnum};
use gkp_core::decoders::{voronoi_logical_error, DisplacementChannel};
use gkp_core::fidelity::{
    finite_energy_exact_infidelity, infinite_energy_bound_entry, leading_order_entry, leading_order_infidelity, near_optimal_from_qec,
    perturbative_infidelity, FiniteExactOptions,
};
use gkp_core::qec::{analytic_qec_matrix, default_l_jump, split_correctable, AnalyticOptions};
use gkp_core::{CatalogEntry, ChannelSpec, GkpCode, GkpError};
use rayon::prelude::*;

use crate::error::CliError;
use crate::grid::{parse_grid, ChannelArgs};
use crate::lattice::lookup;
use crate::output::{fmt_f64, fmt_opt, Table};

pub const HEADER: [&str; 9] = ["channel", "strength", "lattice", "d_L", "nbar", "method", "infidelity", "diag_tail", "diag_trD"];
const BOUND_TOL: f64 = 1e-14;

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Method {
    ExactSqrt,
    Perturbative,
    Leading,
    FiniteExact,
    InfBound,
    Ad,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ExactSqrt => "exact_sqrt",
            Method::Perturbative => "perturbative",
            Method::Leading => "leading",
            Method::FiniteExact => "finite_exact",
            Method::InfBound => "inf_bound",
            Method::Ad => "ad",
        }
    }

    /// Whether the method works on the code itself rather than the stored lattice data.
    fn needs_code(self, infinite: bool) -> bool {
        match self {
            Method::InfBound | Method::Ad => false,
            Method::Leading => !infinite,
            _ => true,
        }
    }

    fn needs_finite_energy(self) -> bool {
        matches!(self, Method::ExactSqrt | Method::Perturbative | Method::FiniteExact)
    }
}

#[derive(Args)]
pub struct PerfArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    /// Comma-separated lattice names.
    #[arg(long, default_value = "square")]
    lattice: String,
    /// Logical dimension for the square and hexagonal families (default 2).
    #[arg(long)]
    dl: Option<u64>,
    /// Mean photon number grid, or `inf`.
    #[arg(long)]
    nbar: String,
    /// Defaults to every method defined on the whole grid.
    #[arg(long, value_enum, value_delimiter = ',')]
    methods: Vec<Method>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed of the Monte Carlo nearest-point decoder behind `ad`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200_000)]
    samples: usize,
}

/// Catalog entry for `name`, with `dl` (else `default_dl`) selecting the
/// member of the square and hexagonal families.
pub fn resolve_lattice(name: &str, dl: Option<u64>, default_dl: u64) -> Result<CatalogEntry, CliError> {
    let lower = name.trim().to_ascii_lowercase();
    if matches!(lower.as_str(), "square" | "hexagonal" | "hex") {
        let d = dl.unwrap_or(default_dl);
        if d == 0 {
            return Err(CliError::usage("--dl must be positive"));
        }
        return lookup(&format!("{lower}{d}"));
    }
    let e = lookup(&lower)?;
    if let Some(d) = dl {
        if entry_dl(&e) != d {
            return Err(CliError::usage(format!("lattice {} has d_L = {}, not {d}", e.name, entry_dl(&e))));
        }
    }
    Ok(e)
}

fn entry_dl(e: &CatalogEntry) -> u64 {
    (e.det as f64).sqrt().round() as u64
}

struct Point<'a> {
    ch: ChannelSpec,
    entry: &'a CatalogEntry,
    nbar: f64,
}

struct Value {
    infidelity: f64,
    tail: Option<f64>,
    trace_d: Option<f64>,
}

impl Value {
    fn plain(infidelity: f64) -> Self {
        Self { infidelity, tail: None, trace_d: None }
    }
}

fn evaluate(p: &Point, methods: &[Method], samples: usize, seed: u64) -> Result<Vec<Value>, CliError> {
    let need_code = methods.iter().any(|&m| m.needs_code(p.nbar.is_infinite()));
    let code = match (&p.entry.lattice, need_code) {
        (Some(lat), true) => Some(GkpCode::new(lat.clone(), p.nbar)?),
        _ => None,
    };
    let need_m = methods.iter().any(|m| matches!(m, Method::ExactSqrt | Method::Perturbative));
    let qec = match (&code, need_m) {
        (Some(c), true) => {
            let m = analytic_qec_matrix(c, &p.ch, &AnalyticOptions::new(default_l_jump(&p.ch, c.n_delta())))?;
            let split = split_correctable(&m, c, &p.ch);
            Some((m, split))
        }
        _ => None,
    };
    let lattice_code = || code.as_ref().ok_or_else(|| GkpError::NotEnumerable(p.entry.name.clone()));
    methods
        .iter()
        .map(|&method| {
            let v = match method {
                Method::ExactSqrt => {
                    let (m, split) = qec.as_ref().expect("built above");
                    let r = near_optimal_from_qec(m)?;
                    Value { infidelity: r.infidelity, tail: Some(m.meta.tail_bound), trace_d: Some(split.trace_d) }
                }
                Method::Perturbative => {
                    let (m, split) = qec.as_ref().expect("built above");
                    let r = perturbative_infidelity(split)?;
                    Value { infidelity: r.infidelity, tail: Some(m.meta.tail_bound), trace_d: r.diagnostics.trace_d }
                }
                Method::Leading if p.nbar.is_infinite() => Value::plain(leading_order_entry(p.entry, &p.ch).infidelity),
                Method::Leading => Value::plain(leading_order_infidelity(lattice_code()?, &p.ch)?.infidelity),
                Method::FiniteExact => {
                    let r = finite_energy_exact_infidelity(lattice_code()?, &p.ch, &FiniteExactOptions::default())?;
                    Value { infidelity: r.infidelity, tail: r.diagnostics.truncation_bound, trace_d: None }
                }
                Method::InfBound => {
                    let r = infinite_energy_bound_entry(p.entry, &p.ch, BOUND_TOL)?;
                    Value { infidelity: r.infidelity, tail: r.diagnostics.truncation_bound, trace_d: None }
                }
                Method::Ad => {
                    let lat = p.entry.lattice()?;
                    let dch = DisplacementChannel::new(p.ch.equivalent_loss())?;
                    let e = voronoi_logical_error(lat, &dch, samples, seed)?;
                    Value { infidelity: e.p_err, tail: Some(e.stderr), trace_d: None }
                }
            };
            Ok(v)
        })
        .collect()
}

fn validate(methods: &[Method], entries: &[CatalogEntry], nbars: &[f64]) -> Result<(), CliError> {
    let infinite = nbars.iter().any(|n| n.is_infinite());
    for &m in methods {
        if infinite && m.needs_finite_energy() {
            return Err(CliError::usage(format!("method {} needs a finite --nbar", m.as_str())));
        }
        for e in entries {
            if !e.enumerable && (m.needs_code(infinite) || m == Method::Ad) {
                return Err(CliError::usage(format!("lattice {} only supports inf_bound and leading at nbar = inf", e.name)));
            }
            if let (true, Some(lat)) = (m.needs_code(infinite), &e.lattice) {
                if let Err(err) = GkpCode::new(lat.clone(), f64::INFINITY) {
                    return Err(CliError::usage(format!("method {} is unavailable for {}: {err}", m.as_str(), e.name)));
                }
            }
            let single_mode_only = m == Method::FiniteExact || (m == Method::Leading && !infinite);
            if single_mode_only && e.modes != 1 {
                return Err(CliError::usage(format!("method {} is single-mode only; {} has N = {}", m.as_str(), e.name, e.modes)));
            }
        }
    }
    if nbars.iter().any(|&n| !(n > 0.0)) {
        return Err(CliError::usage("--nbar values must be positive"));
    }
    Ok(())
}

fn default_methods(nbars: &[f64]) -> Vec<Method> {
    if nbars.iter().any(|n| n.is_infinite()) {
        vec![Method::Leading, Method::InfBound, Method::Ad]
    } else {
        vec![Method::ExactSqrt, Method::Perturbative, Method::Leading, Method::FiniteExact, Method::InfBound, Method::Ad]
    }
}

pub fn run(args: PerfArgs) -> Result<(), CliError> {
    let channels = args.channel.channels()?;
    let nbars = parse_grid(&args.nbar, true)?;
    let entries: Vec<CatalogEntry> =
        args.lattice.split(',').map(|n| resolve_lattice(n, args.dl, 2)).collect::<Result<_, _>>()?;
    let mut methods = args.methods.clone();
    if methods.is_empty() {
        methods = default_methods(&nbars);
    }
    validate(&methods, &entries, &nbars)?;

    let mut points = Vec::new();
    for ch in &channels {
        for entry in &entries {
            for &nbar in &nbars {
                points.push(Point { ch: *ch, entry, nbar });
            }
        }
    }
    let values: Vec<Vec<Value>> =
        points.par_iter().map(|p| evaluate(p, &methods, args.samples, args.seed)).collect::<Result<_, _>>()?;

    let mut table = Table::new(&HEADER);
    for (p, vals) in points.iter().zip(&values) {
        for (m, v) in methods.iter().zip(vals) {
            table.row(&[
                p.ch.kind.as_str().to_string(),
                fmt_f64(p.ch.strength),
                p.entry.name.clone(),
                entry_dl(p.entry).to_string(),
                fmt_f64(p.nbar),
                m.as_str().to_string(),
                fmt_f64(v.infidelity),
                fmt_opt(v.tail),
                fmt_opt(v.trace_d),
            ]);
        }
    }
    table.emit(args.out.as_deref())
}
