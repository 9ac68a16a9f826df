use std::collections::BTreeMap;
use std::f64::consts::PI;

use clap::{Args, ValueEnum};
use gkp_core::fidelity::{
    finite_energy_exact_infidelity, infinite_energy_bound, near_optimal_from_qec, perturbative_infidelity,
    transpose_channel_for_code, FiniteExactOptions,
};
use gkp_core::fock::default_cutoff;
use gkp_core::lattices::{shortest_vectors, square};
use gkp_core::qec::{
    analytic_qec_matrix, analytic_qec_matrix_with, oracle_qec_matrix, split_correctable, AnalyticOptions, OracleOptions,
    ThermalParams,
};
use gkp_core::special::{bessel_weighted_sum, hardy_hille_closed, hardy_hille_series};
use gkp_core::{catalog_lattice, ChannelSpec, GkpCode, Result, Which};

use crate::error::CliError;

const DEFAULT_TOLS: [(&str, f64); 7] = [
    ("table", 1e-9),
    ("qec", 1e-8),
    ("tc", 1e-6),
    ("closed_form", 1e-2),
    ("bessel", 5e-3),
    ("hardy_hille", 1e-6),
    ("inf_bound", 1e-2),
];

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    /// Scale the thermal ratio of the analytic QEC matrix by 1.01.
    Thermal,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Tolerance override `key=value`; keys: table, qec, tc, closed_form, bessel, hardy_hille, inf_bound.
    #[arg(long, value_parser = parse_tol)]
    tol: Vec<(String, f64)>,
    #[arg(long, value_enum, hide = true)]
    inject_fault: Option<Fault>,
}

fn parse_tol(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got '{s}'"))?;
    if !DEFAULT_TOLS.iter().any(|(name, _)| *name == k) {
        return Err(format!("unknown tolerance key '{k}'"));
    }
    match v.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok((k.to_string(), x)),
        _ => Err(format!("tolerance must be a positive number, got '{v}'")),
    }
}

struct Outcome {
    ok: bool,
    detail: String,
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn table(tol: f64) -> Result<Outcome> {
    let expect = [
        ("square", 1.0, 4, 1),
        ("hexagonal", 2.0 / 3f64.sqrt(), 6, 1),
        ("tesseract", 0.5f64.sqrt(), 8, 4),
        ("d4", 2f64.sqrt(), 24, 1),
        ("e8", 2.0, 240, 1),
    ];
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for (name, min, kissing, det) in expect {
        let e = catalog_lattice(name)?;
        let sv = shortest_vectors(e.lattice()?, Which::Dual)?;
        worst = worst.max(rel(sv.min_norm_sq, min));
        ok &= sv.kissing == kissing && e.det == det;
    }
    Ok(Outcome { ok: ok && worst < tol, detail: format!("max rel norm error {worst:.1e}") })
}

fn qec(ch: ChannelSpec, tol: f64, fault: Option<Fault>) -> Result<Outcome> {
    let n = 5.0;
    let code = GkpCode::new(square(2), n)?;
    let opts = AnalyticOptions::new(25);
    let a = match fault {
        Some(Fault::Thermal) => {
            let mut tp = ThermalParams::new(&ch, code.n_delta());
            tp.t *= 1.01;
            analytic_qec_matrix_with(&code, &tp, &opts)?
        }
        None => analytic_qec_matrix(&code, &ch, &opts)?,
    };
    let o = oracle_qec_matrix(&code, &ch, &OracleOptions::new(default_cutoff(n), 25))?;
    let err = (&a.data - &o.data).iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(Outcome { ok: err < tol, detail: format!("max abs entry error {err:.2e}") })
}

fn transpose_channel(tol: f64) -> Result<Outcome> {
    let ch = ChannelSpec::loss(0.1)?;
    let code = GkpCode::new(square(2), 5.0)?;
    let (cutoff, l_jump) = (160, 25);
    let tc = transpose_channel_for_code(&code, &ch, cutoff, l_jump)?.infidelity;
    let mut o = OracleOptions::new(cutoff, l_jump);
    o.orthonormalize = true;
    let nf = near_optimal_from_qec(&oracle_qec_matrix(&code, &ch, &o)?)?.infidelity;
    let diff = (tc - nf).abs();
    Ok(Outcome { ok: diff < tol, detail: format!("{tc:.9e} vs {nf:.9e}") })
}

fn closed_form(tol: f64) -> Result<Outcome> {
    let ch = ChannelSpec::loss(0.1)?;
    let code = GkpCode::new(square(2), 8.0)?;
    let m = analytic_qec_matrix(&code, &ch, &AnalyticOptions::new(40))?;
    let pert = perturbative_infidelity(&split_correctable(&m, &code, &ch))?.infidelity;
    let fe = finite_energy_exact_infidelity(&code, &ch, &FiniteExactOptions::default())?.infidelity;
    let r = rel(fe, pert);
    Ok(Outcome { ok: r < tol, detail: format!("{fe:.6e} vs {pert:.6e}, rel {r:.1e}") })
}

fn bessel(tol: f64) -> Result<Outcome> {
    let s = bessel_weighted_sum(1e4, 1.0);
    Ok(Outcome { ok: (s - 0.5).abs() < tol, detail: format!("sum {s:.6} (limit 1/2)") })
}

fn hardy_hille(tol: f64) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for (alpha, x, y, t) in [(0, 0.3, 1.2, 0.5), (2, 1.5, 0.7, 0.8), (3, 2.0, 2.5, 0.3)] {
        worst = worst.max(rel(hardy_hille_series(alpha, x, y, t), hardy_hille_closed(alpha, x, y, t)));
    }
    Ok(Outcome { ok: worst < tol, detail: format!("max rel error {worst:.1e}") })
}

fn inf_bound(tol: f64) -> Result<Outcome> {
    // at K = 9 the square code's bound is dominated by its 4 shortest dual vectors
    let b = infinite_energy_bound(&square(2), &ChannelSpec::loss(0.1)?, 1e-20)?.infidelity;
    let lead = (-4.5 * PI).exp();
    let r = rel(b, lead);
    Ok(Outcome { ok: r < tol, detail: format!("{b:.6e} vs leading shell {lead:.6e}") })
}

pub fn run(args: VerifyArgs) -> std::result::Result<(), CliError> {
    let mut tols: BTreeMap<&str, f64> = DEFAULT_TOLS.into_iter().collect();
    for (k, v) in &args.tol {
        if let Some(slot) = tols.get_mut(k.as_str()) {
            *slot = *v;
        }
    }
    let fault = args.inject_fault;
    type Check<'a> = (&'a str, Box<dyn Fn() -> Result<Outcome> + 'a>);
    let checks: Vec<Check> = vec![
        ("table", Box::new(|| table(tols["table"]))),
        ("qec_loss", Box::new(|| qec(ChannelSpec::loss(0.1)?, tols["qec"], fault))),
        ("qec_amp", Box::new(|| qec(ChannelSpec::amp(1.1)?, tols["qec"], fault))),
        ("tc", Box::new(|| transpose_channel(tols["tc"]))),
        ("closed_form", Box::new(|| closed_form(tols["closed_form"]))),
        ("bessel", Box::new(|| bessel(tols["bessel"]))),
        ("hardy_hille", Box::new(|| hardy_hille(tols["hardy_hille"]))),
        ("inf_bound", Box::new(|| inf_bound(tols["inf_bound"]))),
    ];
    let mut failed = 0;
    for (name, check) in &checks {
        let (ok, detail) = match check() {
            Ok(o) => (o.ok, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!ok);
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
    println!("{} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        return Err(CliError::VerifyFailed(failed));
    }
    Ok(())
}
