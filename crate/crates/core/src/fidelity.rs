//! Near-optimal (transpose-channel) fidelity of GKP codes: from a QEC matrix,
//! perturbatively, from closed-form lattice sums, and from lattice bounds.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::enumerate::Enumerator;
use crate::error::{GkpError, Result};
use crate::fock::{ChannelSpec, ChannelKind};
use crate::lattices::{shortest_vectors, theta_sum, CatalogEntry, Lattice, ShortestVectorReport, Which};
use crate::linalg::{partial_trace_logical, psd_sqrt, CMatrix};
use crate::qec::{
    apply_kraus_modes, coset_points, loewdin, oracle_from_states, split_trace_average, CorrectableSplit, DualCoset,
    GkpCode, QecMatrix, ThermalParams,
};
use crate::special::bessel_i_scaled_all;

/// Relative threshold below which negative eigenvalues of M are clipped.
pub const PSD_CLIP: f64 = 1e-8;
/// Relative spectral floor of the pseudo-inverse square root in the recovery.
pub const TC_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FidelityMethod {
    ExactSqrt,
    Perturbative,
    LeadingOrder,
    FiniteExact,
    InfBound,
    SelfdualBound,
    TcNumeric,
}

impl FidelityMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::ExactSqrt => "exact_sqrt",
            Self::Perturbative => "perturbative",
            Self::LeadingOrder => "leading_order",
            Self::FiniteExact => "finite_exact",
            Self::InfBound => "inf_bound",
            Self::SelfdualBound => "selfdual_bound",
            Self::TcNumeric => "tc_numeric",
        }
    }
}

/// Regime of the scaled self-dual bound (lambda / K below, at or above 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundRegime {
    Vanishing,
    Critical,
    Diverging,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Diagnostics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_jump: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_eigenvalue: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dropped_weight: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lattice_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub codeword_overlap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recovery_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regime: Option<BoundRegime>,
    pub vacuous: bool,
    pub single_mode_equality: bool,
    pub leading_shell_only: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FidelityReport {
    pub method: FidelityMethod,
    pub infidelity: f64,
    pub diagnostics: Diagnostics,
}

impl FidelityReport {
    fn new(method: FidelityMethod, infidelity: f64, diagnostics: Diagnostics) -> Self {
        Self { method, infidelity, diagnostics }
    }

    pub fn fidelity(&self) -> f64 {
        1.0 - self.infidelity
    }
}

/// F = (1/d^2) ||Tr_L sqrt(M)||_F^2 of the transpose-channel recovery.
pub fn near_optimal_fidelity(m: &CMatrix, d_l: usize) -> Result<FidelityReport> {
    let (root, min_eig) = psd_sqrt(m, PSD_CLIP)?;
    let tr = partial_trace_logical(&root, d_l);
    let f = tr.iter().map(|z| z.norm_sqr()).sum::<f64>() / (d_l * d_l) as f64;
    let diag = Diagnostics { min_eigenvalue: Some(min_eig), ..Default::default() };
    Ok(FidelityReport::new(FidelityMethod::ExactSqrt, (1.0 - f).max(0.0), diag))
}

pub fn near_optimal_from_qec(m: &QecMatrix) -> Result<FidelityReport> {
    let mut r = near_optimal_fidelity(&m.data, m.d_l)?;
    r.diagnostics.l_jump = Some(m.l_jump);
    r.diagnostics.cutoff = m.meta.cutoff;
    Ok(r)
}

/// eps = (1/d) sum |Delta M_{[mu l],[nu k]}|^2 / (sqrt(D_l) + sqrt(D_k))^2.
pub fn perturbative_infidelity(split: &CorrectableSplit) -> Result<FidelityReport> {
    let jumps = split.d.len();
    if split.d.iter().all(|&v| v <= 0.0) {
        return Err(GkpError::DegenerateWeights);
    }
    let roots: Vec<f64> = split.d.iter().map(|v| v.max(0.0).sqrt()).collect();
    let mut eps = 0.0;
    let mut dropped = 0.0;
    let n = split.delta_m.nrows();
    for i in 0..n {
        for j in 0..n {
            let (l, k) = (i % jumps, j % jumps);
            let w = split.delta_m[(i, j)].norm_sqr();
            if split.d[l] < 1e-300 && split.d[k] < 1e-300 {
                dropped += w;
                continue;
            }
            let s = roots[l] + roots[k];
            eps += w / (s * s);
        }
    }
    let diag = Diagnostics { trace_d: Some(split.trace_d), dropped_weight: Some(dropped), ..Default::default() };
    Ok(FidelityReport::new(FidelityMethod::Perturbative, eps / split.d_l as f64, diag))
}

/// Bessel kernel of the closed form after summing the jump indices:
/// e^{-z} [ I_0(z)/4 + 2 sum_{j>=1} s^j/(1+s^j)^2 cos(j theta) I_j(z) ], s = sqrt(t).
fn pair_kernel(z: f64, theta: f64, s: f64) -> f64 {
    if z == 0.0 {
        return 0.25;
    }
    let by_weight = if s < 1.0 { 42.0 / -s.ln() } else { f64::INFINITY };
    let by_bessel = (85.0 * z).sqrt() + 10.0;
    let nmax = by_weight.min(by_bessel).ceil() as usize + 5;
    let bi = bessel_i_scaled_all(nmax, z);
    let mut acc = 0.25 * bi[0];
    let mut sj = 1.0;
    for (j, b) in bi.iter().enumerate().skip(1) {
        sj *= s;
        let w = sj / ((1.0 + sj) * (1.0 + sj));
        acc += 2.0 * w * (j as f64 * theta).cos() * b;
    }
    acc
}

#[derive(Debug, Clone, Copy)]
pub struct FiniteExactOptions {
    /// Pairs whose weight bound falls below this are dropped.
    pub tail_tol: f64,
    /// Keep only dual vectors of minimal length.
    pub leading_only: bool,
}

impl Default for FiniteExactOptions {
    fn default() -> Self {
        Self { tail_tol: 1e-16, leading_only: false }
    }
}

/// Closed-form perturbative infidelity of a single-mode code, summed over
/// all jump indices: a double lattice sum over each dual coset with a Bessel
/// kernel.
pub fn finite_energy_exact_infidelity(code: &GkpCode, ch: &ChannelSpec, opts: &FiniteExactOptions) -> Result<FidelityReport> {
    if code.modes() != 1 {
        return Err(GkpError::InvalidArgument("closed form is single-mode only".into()));
    }
    if !code.is_finite_energy() {
        return Err(GkpError::InvalidArgument("closed form needs a finite-energy code".into()));
    }
    let n = code.n_delta();
    let tp = ThermalParams::new(ch, n);
    let s2 = tp.arg_scale * tp.arg_scale;
    let a = tp.gauss + PI * s2 * (1.0 + tp.t) / (2.0 * (1.0 - tp.t));
    let zc = 2.0 * PI * tp.t.sqrt() * s2 / (1.0 - tp.t);
    let pre = tp.pref / (1.0 - tp.t);
    let decay = a - 0.5 * zc;
    let sqrt_t = tp.t.sqrt();

    let shortest = shortest_vectors(code.lattice(), Which::Dual)?;
    let radius_sq = if opts.leading_only {
        shortest.min_norm_sq * (1.0 + 1e-9)
    } else {
        (opts.tail_tol.recip().ln() / decay).max(shortest.min_norm_sq * 1.5)
    };

    let d = code.d_l() as usize;
    let dc = DualCoset::new(code);
    let en = Enumerator::new(&dc.basis)?;
    let mut total = Complex64::new(0.0, 0.0);
    let mut points = 0usize;
    for mu in 0..d {
        for nu in 0..d {
            let mu_d = code.logical_digits(mu);
            let nu_d = code.logical_digits(nu);
            let pts: Vec<(Complex64, f64, f64)> = coset_points(&dc, &en, &mu_d, &nu_d, radius_sq)?
                .into_iter()
                .filter(|(_, _, q)| *q > 1e-12)
                .map(|(ph, l, q)| (ph, q.sqrt(), l[1].atan2(l[0])))
                .collect();
            points += pts.len();
            for (pa, ra, ta) in &pts {
                for (pb, rb, tb) in &pts {
                    let ln_env = -a * (ra * ra + rb * rb) + zc * ra * rb;
                    if ln_env < opts.tail_tol.ln() - 2.0 {
                        continue;
                    }
                    let k = pair_kernel(zc * ra * rb, ta - tb, sqrt_t);
                    total += pa * pb.conj() * (pre * ln_env.exp() * k);
                }
            }
        }
    }
    let eps = total.re / d as f64;
    let bound = if opts.leading_only { 0.0 } else { 0.5 * pre * (-decay * radius_sq).exp() * points.max(1) as f64 };
    let diag = Diagnostics {
        truncation_bound: Some(bound),
        lattice_points: Some(points),
        leading_shell_only: opts.leading_only,
        ..Default::default()
    };
    let method = if opts.leading_only { FidelityMethod::LeadingOrder } else { FidelityMethod::FiniteExact };
    Ok(FidelityReport::new(method, eps, diag))
}

/// Leading-order infidelity: the closed form restricted to the shortest dual
/// shell. For an infinite-energy code this is (1/4) sum over the shell of
/// e^{-pi K |x|^2}.
pub fn leading_order_infidelity(code: &GkpCode, ch: &ChannelSpec) -> Result<FidelityReport> {
    if code.is_finite_energy() {
        return finite_energy_exact_infidelity(code, ch, &FiniteExactOptions { leading_only: true, ..Default::default() });
    }
    let shell = shortest_vectors(code.lattice(), Which::Dual)?;
    Ok(leading_shell_report(shell.kissing, shell.min_norm_sq, ch))
}

/// Infinite-energy leading-order infidelity from a catalog entry's stored shell.
pub fn leading_order_entry(entry: &CatalogEntry, ch: &ChannelSpec) -> FidelityReport {
    leading_shell_report(entry.kissing, entry.dual_min_norm_sq, ch)
}

fn leading_shell_report(kissing: usize, min_norm_sq: f64, ch: &ChannelSpec) -> FidelityReport {
    let v = 0.25 * kissing as f64 * (-PI * ch.k_ratio() * min_norm_sq).exp();
    let diag = Diagnostics { leading_shell_only: true, vacuous: v > 1.0, ..Default::default() };
    FidelityReport::new(FidelityMethod::LeadingOrder, v, diag)
}

/// Bessel argument convention of the shortest-shell formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ShellArgument {
    /// z = 2 pi (n+1) sqrt(t) x, the value produced by the lattice sum.
    Full,
    /// z = pi (n+1) sqrt(t) x.
    Half,
}

/// Shortest-shell approximation written in terms of kissing number and
/// minimal dual norm only:
/// (m/2) e^{-2 pi (n+1/2) x} (8 sum_{j>=0} t^j/(t^j+1)^2 I_{2j}(z) - I_0(z) - 1).
pub fn leading_order_from_shell(
    shell: &ShortestVectorReport,
    ch: &ChannelSpec,
    n_delta: f64,
    arg: ShellArgument,
) -> Result<FidelityReport> {
    if !(n_delta > 0.0) || !n_delta.is_finite() {
        return Err(GkpError::InvalidArgument("mean photon number must be positive and finite".into()));
    }
    let t = ThermalParams::new(ch, n_delta).t;
    let x = shell.min_norm_sq;
    let z = PI * (n_delta + 1.0) * t.sqrt() * x * if arg == ShellArgument::Full { 2.0 } else { 1.0 };
    let jmax = ((42.0 / -t.ln()).min((85.0 * z).sqrt() / 2.0 + 10.0)).ceil() as usize + 5;
    let bi = bessel_i_scaled_all(2 * jmax, z);
    let mut series = 0.0;
    let mut tj = 1.0;
    for j in 0..=jmax {
        let term = tj / ((tj + 1.0) * (tj + 1.0)) * bi[2 * j];
        series += term;
        if j > 5 && term.abs() < 1e-18 * series.abs() {
            break;
        }
        tj *= t;
    }
    if !series.is_finite() {
        return Err(GkpError::SeriesNonConvergent("shell series is not finite".into()));
    }
    let ln_pre = -2.0 * PI * (n_delta + 0.5) * x;
    let v = 0.5 * shell.kissing as f64 * ((ln_pre + z).exp() * (8.0 * series - bi[0]) - ln_pre.exp());
    let diag = Diagnostics { leading_shell_only: true, ..Default::default() };
    Ok(FidelityReport::new(FidelityMethod::LeadingOrder, v, diag))
}

/// (1/4) sum_{x in dual \ 0} e^{-pi K |x|^2}; an equality for single-mode codes.
pub fn infinite_energy_bound(lat: &Lattice, ch: &ChannelSpec, tol: f64) -> Result<FidelityReport> {
    let th = theta_sum(lat, Which::Dual, PI * ch.k_ratio(), tol)?;
    let v = 0.25 * th.value;
    let diag = Diagnostics {
        truncation_bound: Some(0.25 * th.truncation_bound),
        lattice_points: Some(th.points),
        vacuous: v > 1.0,
        single_mode_equality: lat.modes() == 1,
        ..Default::default()
    };
    Ok(FidelityReport::new(FidelityMethod::InfBound, v, diag))
}

/// Same bound for a catalog entry; entries without a generator fall back to
/// their stored shortest shell.
pub fn infinite_energy_bound_entry(entry: &CatalogEntry, ch: &ChannelSpec, tol: f64) -> Result<FidelityReport> {
    if let Some(lat) = &entry.lattice {
        return infinite_energy_bound(lat, ch, tol);
    }
    let v = 0.25 * entry.kissing as f64 * (-PI * ch.k_ratio() * entry.dual_min_norm_sq).exp();
    let diag = Diagnostics {
        leading_shell_only: true,
        vacuous: v > 1.0,
        single_mode_equality: entry.modes == 1,
        ..Default::default()
    };
    Ok(FidelityReport::new(FidelityMethod::InfBound, v, diag))
}

/// (1/4)(lambda / K)^N for a scaled self-dual lattice.
pub fn selfdual_scaled_bound(lambda: u64, modes: usize, ch: &ChannelSpec) -> FidelityReport {
    let ratio = lambda as f64 / ch.k_ratio();
    let v = 0.25 * ratio.powi(modes as i32);
    let regime = if (ratio - 1.0).abs() < 1e-12 {
        BoundRegime::Critical
    } else if ratio < 1.0 {
        BoundRegime::Vanishing
    } else {
        BoundRegime::Diverging
    };
    let diag = Diagnostics { regime: Some(regime), vacuous: v > 1.0, ..Default::default() };
    FidelityReport::new(FidelityMethod::SelfdualBound, v, diag)
}

/// Numerical transpose-channel recovery R_i = P N_i^dagger N(P)^{-1/2} built in
/// truncated Fock space, composed with the channel on the code.
///
/// `states` are tensor vectors with per-mode dimension `dim`; they are
/// Loewdin-orthonormalized first.
pub fn transpose_channel_fidelity(
    states: &[Vec<Complex64>],
    modes: usize,
    dim: usize,
    ch: &ChannelSpec,
    l_jump: usize,
) -> Result<FidelityReport> {
    let d = states.len();
    let overlap = max_overlap(states);
    let code = loewdin(states)?;
    let lj = l_jump + 1;
    let jumps = lj.pow(modes as u32);
    let out_dim = match ch.kind {
        ChannelKind::Loss => dim,
        ChannelKind::Amp => dim + l_jump,
    };
    let big = out_dim.pow(modes as u32);
    // columns w_{j nu} = N_j |nu>, ordered nu * jumps + j
    let mut w = CMatrix::zeros(big, d * jumps);
    for (nu, s) in code.iter().enumerate() {
        for f in 0..jumps {
            let mut ls = vec![0; modes];
            let mut x = f;
            for j in (0..modes).rev() {
                ls[j] = x % lj;
                x /= lj;
            }
            let (v, dout) = apply_kraus_modes(ch, &ls, s, dim);
            let v = embed_modes(&v, dout, out_dim, modes);
            for (r, val) in v.iter().enumerate() {
                w[(r, nu * jumps + f)] = *val;
            }
        }
    }
    // N(P) = W W^dagger; its pseudo-inverse square root is taken through the
    // SVD of W, which keeps the small eigenvalues accurate
    let svd = w.clone().svd(true, true);
    let u = svd.u.as_ref().ok_or(GkpError::RankDeficientCodespace)?;
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k].powi(2) > TC_FLOOR * smax * smax)
        .collect();
    let uk = CMatrix::from_fn(big, keep.len(), |r, c| u[(r, keep[c])]);
    let inv_sqrt = CMatrix::from_fn(keep.len(), keep.len(), |i, j| {
        if i == j { Complex64::new(1.0 / svd.singular_values[keep[i]], 0.0) } else { Complex64::new(0.0, 0.0) }
    });
    // A W expressed in the kept left singular basis
    let aw = &inv_sqrt * uk.adjoint() * &w;
    // K_{ij, mu nu} = <w_{i mu}| A |w_{j nu}>
    let g = w.adjoint() * &uk * &aw;
    let mut f = 0.0;
    for i in 0..jumps {
        for j in 0..jumps {
            let tr: Complex64 = (0..d).map(|mu| g[(mu * jumps + i, mu * jumps + j)]).sum();
            f += tr.norm_sqr();
        }
    }
    f /= (d * d) as f64;
    // sum_i R_i^dagger R_i restricted to the kept range against the identity there
    let sum_rr = &aw * aw.adjoint();
    let proj = CMatrix::identity(keep.len(), keep.len());
    let defect = (&sum_rr - &proj).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let diag = Diagnostics {
        cutoff: Some(dim - 1),
        l_jump: Some(l_jump),
        codeword_overlap: Some(overlap),
        recovery_defect: Some(defect),
        ..Default::default()
    };
    Ok(FidelityReport::new(FidelityMethod::TcNumeric, (1.0 - f).clamp(0.0, 1.0), diag))
}

fn max_overlap(states: &[Vec<Complex64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..states.len() {
        for j in (i + 1)..states.len() {
            let v: Complex64 = states[i].iter().zip(&states[j]).map(|(a, b)| a.conj() * b).sum();
            worst = worst.max(v.norm());
        }
    }
    worst
}

fn embed_modes(v: &[Complex64], from: usize, to: usize, modes: usize) -> Vec<Complex64> {
    if from == to {
        return v.to_vec();
    }
    let mut out = vec![Complex64::new(0.0, 0.0); to.pow(modes as u32)];
    for (idx, val) in v.iter().enumerate() {
        let (mut x, mut target, mut stride) = (idx, 0, 1);
        for _ in 0..modes {
            target += (x % from) * stride;
            x /= from;
            stride *= to;
        }
        out[target] = *val;
    }
    out
}

/// Transpose-channel infidelity of a code given by its finite-energy codewords.
pub fn transpose_channel_for_code(code: &GkpCode, ch: &ChannelSpec, cutoff: usize, l_jump: usize) -> Result<FidelityReport> {
    let (states, _) = crate::qec::code_states(code, cutoff, false)?;
    transpose_channel_fidelity(&states, code.modes(), cutoff + 1, ch, l_jump)
}

/// ||M - I_L (x) Tr_L(M)/d_L||_F^2 for arbitrary code vectors; equal for loss
/// and amplification at matched K once all jumps are included.
pub fn kl_deviation_norm_sq(states: &[Vec<Complex64>], modes: usize, dim: usize, ch: &ChannelSpec, l_jump: usize) -> Result<f64> {
    let m = oracle_from_states(states, modes, ch, dim, l_jump, 0.0)?;
    let dm = split_trace_average(&m.data, m.d_l);
    Ok(dm.iter().map(|z| z.norm_sqr()).sum())
}
