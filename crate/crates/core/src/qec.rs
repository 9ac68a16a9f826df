//! QEC matrices M_{[mu l],[nu k]} = <mu|N_l^dagger N_k|nu> of GKP codes, both
//! from lattice sums and from a brute-force Fock-space construction.
//!
//! Index layout: flat = mu * J + l, with mu and l row-major over modes
//! (mode 0 most significant) and J = (L_jump + 1)^N.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::enumerate::Enumerator;
use crate::error::{GkpError, Result};
use crate::fock::{
    apply_kraus, delta_from_nbar, displacement_matrix, envelope_mean_photon, lattice_codewords_fock, tensor_states,
    ChannelKind, ChannelSpec, CodewordOptions, FockState,
};
use crate::lattices::{canonical_dims, symplectic_factor, Lattice};
use crate::linalg::{kron, partial_trace_logical, pinv_sqrt, CMatrix};

pub const DEFAULT_TAIL_TOL: f64 = 1e-16;
const POINT_BUDGET: usize = 2_000_000;

/// A lattice code with a Gaussian envelope e^{-Delta^2 n}.
#[derive(Debug, Clone)]
pub struct GkpCode {
    lattice: Lattice,
    delta: f64,
    dims: Vec<u64>,
    s: DMatrix<f64>,
}

impl GkpCode {
    /// `nbar` is the envelope photon number n_Delta; infinity gives the ideal code.
    pub fn new(lattice: Lattice, nbar: f64) -> Result<Self> {
        if !(nbar > 0.0) {
            return Err(GkpError::InvalidArgument(format!("mean photon number must be positive, got {nbar}")));
        }
        let delta = if nbar.is_infinite() { 0.0 } else { delta_from_nbar(nbar) };
        Self::from_delta(lattice, delta)
    }

    pub fn from_delta(lattice: Lattice, delta: f64) -> Result<Self> {
        if !(delta >= 0.0) {
            return Err(GkpError::InvalidArgument("envelope must be nonnegative".into()));
        }
        let dims = canonical_dims(&lattice)?;
        let s = symplectic_factor(&lattice)?;
        Ok(Self { lattice, delta, dims, s })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn dims(&self) -> &[u64] {
        &self.dims
    }
    pub fn symplectic_factor(&self) -> &DMatrix<f64> {
        &self.s
    }
    pub fn modes(&self) -> usize {
        self.dims.len()
    }
    pub fn d_l(&self) -> u64 {
        self.dims.iter().product()
    }
    pub fn is_finite_energy(&self) -> bool {
        self.delta > 0.0
    }
    /// n_Delta = 1/(e^{2 Delta^2} - 1).
    pub fn n_delta(&self) -> f64 {
        if self.delta > 0.0 {
            envelope_mean_photon(self.delta)
        } else {
            f64::INFINITY
        }
    }

    /// Logical multi-index of a flat logical index.
    pub fn logical_digits(&self, mut flat: usize) -> Vec<u64> {
        let mut out = vec![0; self.dims.len()];
        for j in (0..self.dims.len()).rev() {
            out[j] = flat as u64 % self.dims[j];
            flat /= self.dims[j] as usize;
        }
        out
    }

    fn require_finite(&self) -> Result<()> {
        if self.is_finite_energy() {
            Ok(())
        } else {
            Err(GkpError::InvalidArgument("this path needs a finite-energy code".into()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Codeword norms from the exact lattice-sum normalization.
    Exact,
    /// Unit prefactor (overlap corrections dropped).
    Unit,
}

#[derive(Debug, Clone, Serialize)]
pub struct QecMeta {
    pub lattice_points: usize,
    pub tail_bound: f64,
    pub max_codeword_tail: f64,
    pub cutoff: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct QecMatrix {
    pub data: CMatrix,
    pub d_l: usize,
    pub modes: usize,
    pub l_jump: usize,
    pub meta: QecMeta,
}

impl QecMatrix {
    /// Number of Kraus multi-indices J = (L_jump + 1)^N.
    pub fn jumps(&self) -> usize {
        (self.l_jump + 1).pow(self.modes as u32)
    }

    pub fn index(&self, mu: usize, l: usize) -> usize {
        mu * self.jumps() + l
    }

    /// Per-mode jump indices of a flat jump index.
    pub fn jump_digits(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.modes];
        for j in (0..self.modes).rev() {
            out[j] = flat % (self.l_jump + 1);
            flat /= self.l_jump + 1;
        }
        out
    }

    /// JSON {dims, index_map, real, imag} with index_map[i] = [mu, l].
    pub fn to_json(&self) -> serde_json::Value {
        let n = self.data.nrows();
        let j = self.jumps();
        let map: Vec<[usize; 2]> = (0..n).map(|i| [i / j, i % j]).collect();
        let real: Vec<Vec<f64>> = (0..n).map(|r| (0..n).map(|c| self.data[(r, c)].re).collect()).collect();
        let imag: Vec<Vec<f64>> = (0..n).map(|r| (0..n).map(|c| self.data[(r, c)].im).collect()).collect();
        serde_json::json!({
            "dims": { "d_l": self.d_l, "modes": self.modes, "l_jump": self.l_jump, "size": n },
            "index_map": map,
            "real": real,
            "imag": imag,
        })
    }
}

/// Channel-dependent constants of the lattice-sum formula.
#[derive(Debug, Clone, Copy)]
pub struct ThermalParams {
    /// Ratio of the geometric jump distribution.
    pub t: f64,
    /// Per-mode prefactor 1/(gamma n + 1) or 1/(g m + 1).
    pub pref: f64,
    /// Coefficient a in e^{-a |L|^2}.
    pub gauss: f64,
    /// Scale of the displacement argument relative to sqrt(2 pi) C L.
    pub arg_scale: f64,
    /// Loss displaces by conj(l) and amplification by -l, with l = sqrt(pi)(L_q + i L_p).
    pub reflected: bool,
}

impl ThermalParams {
    pub fn new(ch: &ChannelSpec, n_delta: f64) -> Self {
        match ch.kind {
            ChannelKind::Loss => {
                let (g, n) = (ch.strength, n_delta);
                let x = g * n + 1.0;
                Self {
                    t: g * n / x,
                    pref: 1.0 / x,
                    gauss: 0.5 * PI * (1.0 - g) / (g + 1.0 / n),
                    arg_scale: ((n + 1.0) / x).sqrt(),
                    reflected: false,
                }
            }
            ChannelKind::Amp => {
                let g = ch.strength - 1.0;
                let m = n_delta + 1.0;
                let x = g * m + 1.0;
                Self {
                    t: g * m / x,
                    pref: 1.0 / x,
                    gauss: 0.5 * PI * (1.0 + g) / (g + 1.0 / m),
                    arg_scale: ((m - 1.0) / x).sqrt(),
                    reflected: true,
                }
            }
        }
    }

    /// Thermal diagonal D_l for per-mode jump counts.
    pub fn diag(&self, ls: &[usize]) -> f64 {
        ls.iter().map(|&l| self.pref * self.t.powi(l as i32)).product()
    }
}

/// Basis rows and coset offset for dual points
/// L = S M_sq^{-1} (d_j n1_j + delta_j, n2_j)_j.
pub(crate) struct DualCoset {
    pub(crate) basis: DMatrix<f64>,
    s: DMatrix<f64>,
    dims: Vec<u64>,
}

impl DualCoset {
    pub(crate) fn new(code: &GkpCode) -> Self {
        let n = code.modes();
        let s = code.symplectic_factor().clone();
        let mut basis = DMatrix::zeros(2 * n, 2 * n);
        for (j, &d) in code.dims().iter().enumerate() {
            let rd = (d as f64).sqrt();
            for k in 0..2 * n {
                basis[(2 * j, k)] = s[(k, 2 * j)] * rd;
                basis[(2 * j + 1, k)] = s[(k, 2 * j + 1)] / rd;
            }
        }
        Self { basis, s, dims: code.dims().to_vec() }
    }

    fn offset(&self, shift: &[i64]) -> Vec<f64> {
        let n2 = self.s.nrows();
        let mut out = vec![0.0; n2];
        for (j, (&d, &sh)) in self.dims.iter().zip(shift).enumerate() {
            let c = sh as f64 / (d as f64).sqrt();
            for k in 0..n2 {
                out[k] += c * self.s[(k, 2 * j)];
            }
        }
        out
    }

    /// Phase prod_j exp(i pi n2_j (n1_j + (mu_j + nu_j)/d_j)).
    fn phase(&self, coeffs: &[i64], mu: &[u64], nu: &[u64]) -> Complex64 {
        let mut arg = 0.0;
        for (j, &d) in self.dims.iter().enumerate() {
            let n1 = coeffs[2 * j] as f64;
            let n2 = coeffs[2 * j + 1];
            // reduce n2 * n1 mod 2 exactly before forming the angle
            let parity = ((coeffs[2 * j] * n2).rem_euclid(2)) as f64;
            let _ = n1;
            arg += PI * (parity + (n2 as f64) * (mu[j] + nu[j]) as f64 / d as f64);
        }
        Complex64::from_polar(1.0, arg)
    }
}

/// Points of one coset with their phases, inside radius_sq.
pub(crate) fn coset_points(
    dc: &DualCoset,
    en: &Enumerator,
    mu: &[u64],
    nu: &[u64],
    radius_sq: f64,
) -> Result<Vec<(Complex64, Vec<f64>, f64)>> {
    let shift: Vec<i64> = mu.iter().zip(nu).map(|(&a, &b)| a as i64 - b as i64).collect();
    let pts = en.ball(&dc.offset(&shift), radius_sq)?;
    if pts.len() > POINT_BUDGET {
        return Err(GkpError::LatticeSumBudgetExceeded(pts.len()));
    }
    Ok(pts.into_iter().map(|p| (dc.phase(&p.coeffs, mu, nu), p.vector, p.norm_sq)).collect())
}

/// Exact norms S_mu = sum_L phase e^{-pi (n + 1/2) |L|^2} over the zero coset.
pub fn codeword_norms(code: &GkpCode) -> Result<Vec<f64>> {
    code.require_finite()?;
    let dc = DualCoset::new(code);
    let en = Enumerator::new(&dc.basis)?;
    let a = PI * (code.n_delta() + 0.5);
    let r2 = (1e-18f64).recip().ln() / a;
    (0..code.d_l() as usize)
        .map(|f| {
            let mu = code.logical_digits(f);
            let pts = coset_points(&dc, &en, &mu, &mu, r2)?;
            let s: Complex64 = pts.iter().map(|(ph, _, q)| ph * (-a * q).exp()).sum();
            Ok(s.re)
        })
        .collect()
}

/// Normalized overlap <mu_Delta| D(alpha) |nu_Delta> as a sum over the
/// (mu - nu) dual coset. Also returns the largest single term.
pub fn displaced_overlap(code: &GkpCode, mu: usize, nu: usize, alpha: &[Complex64]) -> Result<(Complex64, f64)> {
    code.require_finite()?;
    if alpha.len() != code.modes() {
        return Err(GkpError::InvalidArgument("one displacement per mode".into()));
    }
    let dc = DualCoset::new(code);
    let en = Enumerator::new(&dc.basis)?;
    let mu_d = code.logical_digits(mu);
    let nu_d = code.logical_digits(nu);
    let th = (0.5 * code.delta() * code.delta()).tanh();
    // displacement in dual-lattice units: alpha = sqrt(pi) (u_q + i u_p)
    let u: Vec<f64> = alpha.iter().flat_map(|a| [a.re / PI.sqrt(), a.im / PI.sqrt()]).collect();
    let reach = ((1e17f64).ln() * 4.0 * th / PI).sqrt();
    let center: f64 = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    let r2 = (center + reach).powi(2);
    let pts = coset_points(&dc, &en, &mu_d, &nu_d, r2)?;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut bound: f64 = 0.0;
    for (ph, l, _) in &pts {
        let mut dsq = 0.0;
        let mut ssq = 0.0;
        for j in 0..code.modes() {
            let (lq, lp) = (l[2 * j], l[2 * j + 1]);
            dsq += (lq - u[2 * j]).powi(2) + (lp - u[2 * j + 1]).powi(2);
            ssq += (lq + u[2 * j]).powi(2) + (lp + u[2 * j + 1]).powi(2);
        }
        let w = (-PI * (dsq / (4.0 * th) + th * ssq / 4.0)).exp();
        acc += ph * w;
        bound = bound.max(w);
    }
    let norms = codeword_norms(code)?;
    let scale = 1.0 / (norms[mu] * norms[nu]).sqrt();
    Ok((acc * scale, bound * scale))
}

#[derive(Debug, Clone, Copy)]
pub struct AnalyticOptions {
    pub l_jump: usize,
    pub tail_tol: f64,
    pub normalization: Normalization,
}

impl AnalyticOptions {
    pub fn new(l_jump: usize) -> Self {
        Self { l_jump, tail_tol: DEFAULT_TAIL_TOL, normalization: Normalization::Exact }
    }
}

/// Default jump cutoff: enough terms for the thermal weights t^l to drop
/// below 1e-14.
pub fn default_l_jump(ch: &ChannelSpec, n_delta: f64) -> usize {
    let t = ThermalParams::new(ch, n_delta).t;
    let by_decay = ((1e-14f64).ln() / t.ln()).ceil();
    (by_decay as usize).max(15).min(400)
}

/// QEC matrix from the lattice-sum expression.
pub fn analytic_qec_matrix(code: &GkpCode, ch: &ChannelSpec, opts: &AnalyticOptions) -> Result<QecMatrix> {
    code.require_finite()?;
    analytic_qec_matrix_with(code, &ThermalParams::new(ch, code.n_delta()), opts)
}

/// Same as `analytic_qec_matrix` with explicit channel constants.
pub fn analytic_qec_matrix_with(code: &GkpCode, tp: &ThermalParams, opts: &AnalyticOptions) -> Result<QecMatrix> {
    code.require_finite()?;
    let n_modes = code.modes();
    let lj = opts.l_jump + 1;
    let jumps = lj.pow(n_modes as u32);
    let d_l = code.d_l() as usize;
    let dc = DualCoset::new(code);
    let en = Enumerator::new(&dc.basis)?;
    let r2 = opts.tail_tol.recip().ln() / tp.gauss;

    let norms = match opts.normalization {
        Normalization::Exact => codeword_norms(code)?,
        Normalization::Unit => vec![1.0; d_l],
    };

    // sqrt(t)^{|l|} * pref^{N/2} per jump multi-index, split evenly between rows and columns
    let row_weight: Vec<f64> = (0..jumps)
        .map(|f| {
            let mut w = 1.0;
            let mut x = f;
            for _ in 0..n_modes {
                let l = x % lj;
                x /= lj;
                w *= tp.t.powf(0.5 * l as f64) * tp.pref.sqrt();
            }
            w
        })
        .collect();

    let mut data = CMatrix::zeros(d_l * jumps, d_l * jumps);
    let mut total_points = 0usize;
    for mu in 0..d_l {
        let mu_d = code.logical_digits(mu);
        for nu in 0..d_l {
            let nu_d = code.logical_digits(nu);
            let pts = coset_points(&dc, &en, &mu_d, &nu_d, r2)?;
            total_points += pts.len();
            let c = 1.0 / (norms[mu] * norms[nu]).sqrt();
            let mut block = CMatrix::zeros(jumps, jumps);
            for (ph, l, q) in &pts {
                let w = (-tp.gauss * q).exp();
                let mut disp: Option<CMatrix> = None;
                for j in 0..n_modes {
                    let cl = Complex64::new(l[2 * j], l[2 * j + 1]) * (PI).sqrt();
                    let g = if tp.reflected { -cl } else { cl.conj() } * tp.arg_scale;
                    let dm = displacement_matrix(g, lj, lj);
                    disp = Some(match disp {
                        None => dm,
                        Some(prev) => kron(&prev, &dm),
                    });
                }
                let disp = disp.unwrap();
                block += disp * (ph * w);
            }
            for r in 0..jumps {
                for k in 0..jumps {
                    data[(mu * jumps + r, nu * jumps + k)] = block[(r, k)] * (c * row_weight[r] * row_weight[k]);
                }
            }
        }
    }
    let data = crate::linalg::hermitize(&data);
    Ok(QecMatrix {
        data,
        d_l,
        modes: n_modes,
        l_jump: opts.l_jump,
        meta: QecMeta { lattice_points: total_points, tail_bound: opts.tail_tol, max_codeword_tail: 0.0, cutoff: None },
    })
}

#[derive(Debug, Clone, Copy)]
pub struct OracleOptions {
    pub cutoff: usize,
    pub l_jump: usize,
    pub orthonormalize: bool,
    /// Accept codewords with truncation tails above the default 1e-8.
    pub lenient: bool,
}

impl OracleOptions {
    pub fn new(cutoff: usize, l_jump: usize) -> Self {
        Self { cutoff, l_jump, orthonormalize: false, lenient: false }
    }
}

/// Per-mode single-mode lattices of a block-diagonal generator.
fn mode_lattices(lat: &Lattice) -> Result<Vec<Lattice>> {
    let g = lat.generator();
    let n = lat.modes();
    for i in 0..2 * n {
        for j in 0..2 * n {
            if i / 2 != j / 2 && g[(i, j)].abs() > 1e-12 {
                return Err(GkpError::InvalidArgument("oracle needs a product of single-mode lattices".into()));
            }
        }
    }
    (0..n)
        .map(|j| Lattice::new(g.view((2 * j, 2 * j), (2, 2)).into_owned()))
        .collect()
}

/// Finite-energy codewords as dense Fock vectors (tensor products for
/// multimode product lattices). Returns vectors and the per-mode dimension.
pub fn code_states(code: &GkpCode, cutoff: usize, lenient: bool) -> Result<(Vec<Vec<Complex64>>, f64)> {
    code.require_finite()?;
    let opts = if lenient { CodewordOptions::lenient(cutoff) } else { CodewordOptions::new(cutoff) };
    let per_mode: Vec<Vec<FockState>> = mode_lattices(code.lattice())?
        .iter()
        .map(|l| lattice_codewords_fock(l, code.delta(), &opts))
        .collect::<Result<_>>()?;
    let tail = per_mode.iter().flatten().map(|s| s.tail_mass).fold(0.0, f64::max);
    let states = (0..code.d_l() as usize)
        .map(|f| {
            let digits = code.logical_digits(f);
            let parts: Vec<&FockState> = digits.iter().enumerate().map(|(j, &m)| &per_mode[j][m as usize]).collect();
            tensor_states(&parts)
        })
        .collect();
    Ok((states, tail))
}

/// Loewdin orthonormalization C (C^dagger C)^{-1/2}.
pub fn loewdin(states: &[Vec<Complex64>]) -> Result<Vec<Vec<Complex64>>> {
    let d = states.len();
    let g = CMatrix::from_fn(d, d, |i, j| states[i].iter().zip(&states[j]).map(|(a, b)| a.conj() * b).sum());
    let (inv, rank) = pinv_sqrt(&g, 1e-12);
    if rank < d {
        return Err(GkpError::RankDeficientCodespace);
    }
    Ok((0..d)
        .map(|j| {
            let mut v = vec![Complex64::new(0.0, 0.0); states[0].len()];
            for i in 0..d {
                let c = inv[(i, j)];
                for (o, s) in v.iter_mut().zip(&states[i]) {
                    *o += s * c;
                }
            }
            v
        })
        .collect())
}

/// Kraus operator N_{l_1} x ... x N_{l_N} on a tensor vector with per-mode
/// dimension `dim_in`; returns the vector and the output per-mode dimension.
pub fn apply_kraus_modes(ch: &ChannelSpec, ls: &[usize], v: &[Complex64], dim_in: usize) -> (Vec<Complex64>, usize) {
    let n = ls.len();
    let lmax = *ls.iter().max().unwrap_or(&0);
    let dim_out = match ch.kind {
        ChannelKind::Loss => dim_in,
        ChannelKind::Amp => dim_in + lmax,
    };
    let mut cur = v.to_vec();
    let mut dims = vec![dim_in; n];
    for j in 0..n {
        let before: usize = dims[..j].iter().product();
        let after: usize = dims[j + 1..].iter().product();
        let mut next = vec![Complex64::new(0.0, 0.0); before * dim_out * after];
        let mut fiber = vec![Complex64::new(0.0, 0.0); dims[j]];
        for b in 0..before {
            for a in 0..after {
                for m in 0..dims[j] {
                    fiber[m] = cur[(b * dims[j] + m) * after + a];
                }
                let out = apply_kraus(ch, ls[j], &fiber);
                for (m, val) in out.iter().enumerate().take(dim_out) {
                    next[(b * dim_out + m) * after + a] = *val;
                }
            }
        }
        cur = next;
        dims[j] = dim_out;
    }
    (cur, dim_out)
}

/// Brute-force QEC matrix from truncated Fock-space codewords.
pub fn oracle_qec_matrix(code: &GkpCode, ch: &ChannelSpec, opts: &OracleOptions) -> Result<QecMatrix> {
    let (mut states, tail) = code_states(code, opts.cutoff, opts.lenient)?;
    if opts.orthonormalize {
        states = loewdin(&states)?;
    }
    oracle_from_states(&states, code.modes(), ch, opts.cutoff + 1, opts.l_jump, tail)
}

/// QEC matrix for arbitrary code vectors (tensor layout with per-mode dimension `dim`).
pub fn oracle_from_states(
    states: &[Vec<Complex64>],
    modes: usize,
    ch: &ChannelSpec,
    dim: usize,
    l_jump: usize,
    tail: f64,
) -> Result<QecMatrix> {
    let lj = l_jump + 1;
    let jumps = lj.pow(modes as u32);
    let d_l = states.len();
    let mut vecs: Vec<Vec<Complex64>> = Vec::with_capacity(d_l * jumps);
    let mut max_len = 0;
    for s in states {
        for f in 0..jumps {
            let mut ls = vec![0; modes];
            let mut x = f;
            for j in (0..modes).rev() {
                ls[j] = x % lj;
                x /= lj;
            }
            let (v, dout) = apply_kraus_modes(ch, &ls, s, dim);
            max_len = max_len.max(dout);
            vecs.push(embed(&v, dout, max_len_for(ch, dim, l_jump), modes));
        }
    }
    let n = vecs.len();
    let mut data = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v: Complex64 = vecs[i].iter().zip(&vecs[j]).map(|(a, b)| a.conj() * b).sum();
            data[(i, j)] = v;
            data[(j, i)] = v.conj();
        }
    }
    Ok(QecMatrix {
        data,
        d_l,
        modes,
        l_jump,
        meta: QecMeta { lattice_points: 0, tail_bound: tail, max_codeword_tail: tail, cutoff: Some(dim - 1) },
    })
}

fn max_len_for(ch: &ChannelSpec, dim: usize, l_jump: usize) -> usize {
    match ch.kind {
        ChannelKind::Loss => dim,
        ChannelKind::Amp => dim + l_jump,
    }
}

/// Re-embed a tensor vector with per-mode dimension `from` into `to >= from`.
fn embed(v: &[Complex64], from: usize, to: usize, modes: usize) -> Vec<Complex64> {
    if from == to {
        return v.to_vec();
    }
    let mut out = vec![Complex64::new(0.0, 0.0); to.pow(modes as u32)];
    for (idx, val) in v.iter().enumerate() {
        let mut x = idx;
        let mut target = 0;
        let mut stride = 1;
        for _ in 0..modes {
            target += (x % from) * stride;
            x /= from;
            stride *= to;
        }
        out[target] = *val;
    }
    out
}

/// Correctable part I_L (x) D and residual Delta M.
#[derive(Debug, Clone)]
pub struct CorrectableSplit {
    pub d: Vec<f64>,
    pub delta_m: CMatrix,
    pub trace_d: f64,
    pub d_l: usize,
}

/// Split with the analytic thermal diagonal D (zero lattice point term).
pub fn split_correctable(m: &QecMatrix, code: &GkpCode, ch: &ChannelSpec) -> CorrectableSplit {
    let tp = ThermalParams::new(ch, code.n_delta());
    let jumps = m.jumps();
    let d: Vec<f64> = (0..jumps).map(|f| tp.diag(&m.jump_digits(f))).collect();
    let mut delta_m = m.data.clone();
    for mu in 0..m.d_l {
        for (l, &dl) in d.iter().enumerate() {
            let i = mu * jumps + l;
            delta_m[(i, i)] -= Complex64::new(dl, 0.0);
        }
    }
    let trace_d = d.iter().sum();
    CorrectableSplit { d, delta_m, trace_d, d_l: m.d_l }
}

/// Delta M = M - I_L (x) Tr_L(M) / d_L (a code-agnostic split).
pub fn split_trace_average(m: &CMatrix, d_l: usize) -> CMatrix {
    let avg = partial_trace_logical(m, d_l) / Complex64::new(d_l as f64, 0.0);
    let jumps = m.nrows() / d_l;
    let mut out = m.clone();
    for mu in 0..d_l {
        let mut v = out.view_mut((mu * jumps, mu * jumps), (jumps, jumps));
        v -= &avg;
    }
    out
}

/// Reorder kron(M_1, M_2, ...) of single-mode QEC matrices (layout
/// mu_1 l_1 mu_2 l_2 ...) into the multimode layout (mu_1 mu_2 ... l_1 l_2 ...).
pub fn product_qec_layout(factors: &[&QecMatrix]) -> CMatrix {
    let mut big = factors[0].data.clone();
    for f in &factors[1..] {
        big = kron(&big, &f.data);
    }
    let dims: Vec<(usize, usize)> = factors.iter().map(|f| (f.d_l, f.jumps())).collect();
    let n = big.nrows();
    let perm: Vec<usize> = (0..n)
        .map(|target| {
            // target = mu_flat * J + l_flat
            let j_total: usize = dims.iter().map(|d| d.1).product();
            let (mut mu_flat, mut l_flat) = (target / j_total, target % j_total);
            let mut mus = vec![0; dims.len()];
            let mut ls = vec![0; dims.len()];
            for k in (0..dims.len()).rev() {
                mus[k] = mu_flat % dims[k].0;
                mu_flat /= dims[k].0;
                ls[k] = l_flat % dims[k].1;
                l_flat /= dims[k].1;
            }
            let mut src = 0;
            for k in 0..dims.len() {
                src = src * (dims[k].0 * dims[k].1) + mus[k] * dims[k].1 + ls[k];
            }
            src
        })
        .collect();
    CMatrix::from_fn(n, n, |i, j| big[(perm[i], perm[j])])
}
