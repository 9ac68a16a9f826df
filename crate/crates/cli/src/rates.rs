use std::path::PathBuf;

use clap::{Args, ValueEnum};
use gkp_core::rates::{
    ad_baseline, ad_default_d_max, capacity, hashing_hex_rate, multimode_rate, scaled_family_rate, selfdual_asymptotic_rate,
    selfdual_finite_rate, snapped_k, RatePoint, DEFAULT_EPS_CEILING, DEFAULT_LAMBDA_MAX,
};
use gkp_core::{ChannelSpec, GkpError, Lattice};
use rayon::prelude::*;

use crate::error::CliError;
use crate::grid::{parse_grid, ChannelArgs};
use crate::output::{fmt_f64, Table};
use crate::perf::resolve_lattice;

pub const HEADER: [&str; 6] = ["channel", "strength", "method", "N", "rate_bits_per_mode", "lambda_star"];
/// Largest hexagonal dimension tried by `hashing_hex`.
const HEX_D_MAX: u64 = 4096;

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Method {
    Capacity,
    MultimodeFloor,
    SelfdualConstructive,
    HashingHex,
    Ad,
    ScaledFamily,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Capacity => "capacity",
            Method::MultimodeFloor => "multimode_floor",
            Method::SelfdualConstructive => "selfdual_constructive",
            Method::HashingHex => "hashing_hex",
            Method::Ad => "ad",
            Method::ScaledFamily => "scaled_family",
        }
    }
}

#[derive(Args)]
pub struct RatesArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "capacity,multimode_floor,selfdual_constructive,hashing_hex,ad"
    )]
    methods: Vec<Method>,
    /// Mode count for `selfdual_constructive`; omitted means the many-mode limit.
    #[arg(long)]
    modes: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_EPS_CEILING)]
    eps_ceiling: f64,
    /// Base lattice of `scaled_family`.
    #[arg(long, default_value = "hexagonal")]
    lattice: String,
    /// Logical dimension of the unscaled square or hexagonal base (default 1).
    #[arg(long)]
    dl: Option<u64>,
    /// Mean photon number for `scaled_family` (`inf` for the lattice bound).
    #[arg(long, default_value = "inf")]
    nbar: String,
    #[arg(long, default_value_t = DEFAULT_LAMBDA_MAX)]
    lambda_max: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Row {
    modes: Option<usize>,
    rate: f64,
    lambda_star: Option<u64>,
}

/// No code meets the ceiling: the trivial rate 0 is still achievable.
fn feasible(r: Result<RatePoint, GkpError>, modes: Option<usize>, lambda_of: impl Fn(&RatePoint) -> Option<u64>) -> Result<Row, CliError> {
    match r {
        Ok(p) => Ok(Row { modes, rate: p.rate_bits_per_mode, lambda_star: lambda_of(&p) }),
        Err(GkpError::NoFeasibleLambda) => Ok(Row { modes, rate: 0.0, lambda_star: None }),
        Err(e) => Err(e.into()),
    }
}

struct Config<'a> {
    modes: Option<usize>,
    eps_ceiling: f64,
    base: Option<&'a Lattice>,
    nbar: Option<f64>,
    lambda_max: u64,
}

fn evaluate(ch: &ChannelSpec, m: Method, cfg: &Config) -> Result<Row, CliError> {
    match m {
        Method::Capacity => Ok(Row { modes: None, rate: capacity(ch), lambda_star: None }),
        Method::MultimodeFloor => {
            let k = snapped_k(ch).floor() as u64;
            Ok(Row { modes: None, rate: multimode_rate(ch), lambda_star: (k >= 1).then_some(k) })
        }
        Method::SelfdualConstructive => match cfg.modes {
            Some(n) => feasible(selfdual_finite_rate(ch, n, cfg.eps_ceiling), Some(n), |p| p.lambda),
            None => match selfdual_asymptotic_rate(ch) {
                Ok((p, _)) => Ok(Row { modes: None, rate: p.rate_bits_per_mode, lambda_star: p.lambda }),
                Err(GkpError::InvalidArgument(_)) => Ok(Row { modes: None, rate: 0.0, lambda_star: None }),
                Err(e) => Err(e.into()),
            },
        },
        Method::HashingHex => feasible(hashing_hex_rate(ch, cfg.eps_ceiling, HEX_D_MAX), Some(1), |p| p.d_l),
        Method::Ad => {
            let p = ad_baseline(ch, ad_default_d_max(ch));
            Ok(Row { modes: Some(1), rate: p.rate_bits_per_mode, lambda_star: p.d_l })
        }
        Method::ScaledFamily => {
            let base = cfg.base.expect("validated");
            let r = scaled_family_rate(base, ch, cfg.nbar, cfg.eps_ceiling, cfg.lambda_max);
            feasible(r, Some(base.modes()), |p| p.lambda)
        }
    }
}

pub fn run(args: RatesArgs) -> Result<(), CliError> {
    let channels = args.channel.channels()?;
    if !(args.eps_ceiling > 0.0 && args.eps_ceiling < 1.0) {
        return Err(CliError::usage(format!("--eps-ceiling must lie in (0,1), got {}", args.eps_ceiling)));
    }
    if args.modes == Some(0) {
        return Err(CliError::usage("--modes must be positive"));
    }
    let family = args.methods.contains(&Method::ScaledFamily);
    let entry = if family { Some(resolve_lattice(&args.lattice, args.dl, 1)?) } else { None };
    let base = match &entry {
        Some(e) => Some(e.lattice.as_ref().ok_or_else(|| CliError::usage(format!("lattice {} cannot be scaled", e.name)))?),
        None => None,
    };
    let nbar = match parse_grid(&args.nbar, true)?.as_slice() {
        [n] if n.is_infinite() => None,
        [n] if *n > 0.0 => Some(*n),
        _ => return Err(CliError::usage("--nbar takes a single positive value or inf")),
    };
    let cfg = Config { modes: args.modes, eps_ceiling: args.eps_ceiling, base, nbar, lambda_max: args.lambda_max };

    let jobs: Vec<(ChannelSpec, Method)> =
        channels.iter().flat_map(|ch| args.methods.iter().map(move |&m| (*ch, m))).collect();
    let rows: Vec<Row> = jobs.par_iter().map(|(ch, m)| evaluate(ch, *m, &cfg)).collect::<Result<_, _>>()?;

    let mut table = Table::new(&HEADER);
    for ((ch, m), r) in jobs.iter().zip(&rows) {
        table.row(&[
            ch.kind.as_str().to_string(),
            fmt_f64(ch.strength),
            m.as_str().to_string(),
            r.modes.map_or_else(|| "inf".to_string(), |n| n.to_string()),
            fmt_f64(r.rate),
            r.lambda_star.map(|l| l.to_string()).unwrap_or_default(),
        ]);
    }
    table.emit(args.out.as_deref())
}
