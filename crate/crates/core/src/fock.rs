//! Truncated Fock-space objects: channels, Kraus operators, displacement
//! matrix elements and finite-energy GKP codewords.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GkpError, Result};
use crate::lattices::{canonical_dims, symplectic_factor, Lattice};
use crate::special::{hermite_functions, laguerre, ln_binomial, ln_factorial};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Loss,
    Amp,
}

impl ChannelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ChannelKind::Loss => "loss",
            ChannelKind::Amp => "amp",
        }
    }
}

/// Pure loss with loss rate gamma, or pure amplification with gain G.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub kind: ChannelKind,
    pub strength: f64,
}

impl ChannelSpec {
    pub fn loss(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(GkpError::InvalidChannel(format!("loss rate must lie in (0,1), got {gamma}")));
        }
        Ok(Self { kind: ChannelKind::Loss, strength: gamma })
    }

    pub fn amp(gain: f64) -> Result<Self> {
        if !(gain > 1.0) || !gain.is_finite() {
            return Err(GkpError::InvalidChannel(format!("gain must exceed 1, got {gain}")));
        }
        Ok(Self { kind: ChannelKind::Amp, strength: gain })
    }

    pub fn new(kind: ChannelKind, strength: f64) -> Result<Self> {
        match kind {
            ChannelKind::Loss => Self::loss(strength),
            ChannelKind::Amp => Self::amp(strength),
        }
    }

    /// Transmissivity eta = 1 - gamma, or the gain G.
    pub fn tau(&self) -> f64 {
        match self.kind {
            ChannelKind::Loss => 1.0 - self.strength,
            ChannelKind::Amp => self.strength,
        }
    }

    /// K = |tau / (1 - tau)|.
    pub fn k_ratio(&self) -> f64 {
        match self.kind {
            ChannelKind::Loss => (1.0 - self.strength) / self.strength,
            ChannelKind::Amp => self.strength / (self.strength - 1.0),
        }
    }

    /// Loss rate with the same K.
    pub fn equivalent_loss(&self) -> f64 {
        1.0 / (1.0 + self.k_ratio())
    }
}

/// <l|D(alpha)|k> via the Laguerre closed form with factorial ratios in log space.
pub fn displacement_element(l: usize, k: usize, alpha: Complex64) -> Complex64 {
    if l < k {
        return displacement_element(k, l, -alpha).conj();
    }
    let x = alpha.norm_sqr();
    let dl = l - k;
    let lag = laguerre(k, dl as f64, x);
    if lag == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let mut ln_mag = -0.5 * x + 0.5 * (ln_factorial(k) - ln_factorial(l)) + lag.abs().ln();
    let phase = if dl == 0 {
        Complex64::new(1.0, 0.0)
    } else {
        if x == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        ln_mag += dl as f64 * alpha.norm().ln();
        Complex64::from_polar(1.0, dl as f64 * alpha.arg())
    };
    phase * ln_mag.exp() * lag.signum()
}

/// Block <l|D(alpha)|k>, l < rows, k < cols. Each diagonal l - k = p is
/// filled by the normalized Laguerre recurrence in k, carried with a running
/// log scale so that tiny diagonals underflow cleanly to zero.
pub fn displacement_matrix(alpha: Complex64, rows: usize, cols: usize) -> DMatrix<Complex64> {
    let mut d = DMatrix::from_element(rows, cols, Complex64::new(0.0, 0.0));
    if rows == 0 || cols == 0 {
        return d;
    }
    let x = alpha.norm_sqr();
    let r = alpha.norm();
    let unit = if r > 0.0 { alpha / r } else { Complex64::new(1.0, 0.0) };
    // lower triangle (l >= k) uses alpha; upper uses -conj(alpha) after transposition
    for (lower, len_a, len_b) in [(true, rows, cols), (false, cols, rows)] {
        let start = if lower { 0 } else { 1 };
        for p in start..len_a {
            let len = (len_a - p).min(len_b);
            if len == 0 {
                continue;
            }
            if r == 0.0 {
                if p == 0 {
                    for k in 0..len {
                        d[(k, k)] = Complex64::new(1.0, 0.0);
                    }
                }
                continue;
            }
            let phase = if lower { unit.powi(p as i32) } else { (-unit.conj()).powi(p as i32) };
            let pf = p as f64;
            let mut ln_scale = -0.5 * ln_factorial(p) + pf * r.ln() - 0.5 * x;
            let mut prev = 0.0f64;
            let mut cur = 1.0f64;
            for k in 0..len {
                if k > 0 {
                    let kf = (k - 1) as f64;
                    let next = ((2.0 * kf + 1.0 + pf - x) * cur - (kf * (kf + pf)).sqrt() * prev)
                        / ((kf + 1.0) * (kf + pf + 1.0)).sqrt();
                    prev = cur;
                    cur = next;
                    let m = cur.abs().max(prev.abs());
                    if m > 1e150 || (m < 1e-150 && m > 0.0) {
                        prev /= m;
                        cur /= m;
                        ln_scale += m.ln();
                    }
                }
                let v = phase * (cur * ln_scale.exp());
                if lower {
                    d[(k + p, k)] = v;
                } else {
                    d[(k, k + p)] = v;
                }
            }
        }
    }
    d
}

/// ln of the squared Kraus amplitude for |m> -> |m -/+ l>.
fn kraus_ln_weight(ch: &ChannelSpec, l: usize, m: usize) -> Option<f64> {
    match ch.kind {
        ChannelKind::Loss => {
            if m < l {
                return None;
            }
            let eta = 1.0 - ch.strength;
            Some(ln_binomial(m, l) + l as f64 * ch.strength.ln() + (m - l) as f64 * eta.ln())
        }
        ChannelKind::Amp => {
            let g = ch.strength;
            Some(ln_binomial(m + l, l) + l as f64 * ((g - 1.0) / g).ln() - (m + 1) as f64 * g.ln())
        }
    }
}

/// Kraus operator N_l as a (cutoff+1)^2 matrix (amplification output beyond
/// the cutoff is dropped).
pub fn kraus_matrix(ch: &ChannelSpec, l: usize, cutoff: usize) -> Result<DMatrix<f64>> {
    if cutoff < l {
        return Err(GkpError::CutoffTooSmall(format!("cutoff {cutoff} below jump index {l}")));
    }
    let dim = cutoff + 1;
    let mut k = DMatrix::zeros(dim, dim);
    for m in 0..dim {
        if let Some(w) = kraus_ln_weight(ch, l, m) {
            let out = match ch.kind {
                ChannelKind::Loss => m - l,
                ChannelKind::Amp => m + l,
            };
            if out < dim {
                k[(out, m)] = (0.5 * w).exp();
            }
        }
    }
    Ok(k)
}

/// N_l applied to a state vector. Amplification extends the vector by l.
pub fn apply_kraus(ch: &ChannelSpec, l: usize, v: &[Complex64]) -> Vec<Complex64> {
    match ch.kind {
        ChannelKind::Loss => {
            let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
            for m in l..v.len() {
                let w = kraus_ln_weight(ch, l, m).unwrap();
                out[m - l] = v[m] * (0.5 * w).exp();
            }
            out
        }
        ChannelKind::Amp => {
            let mut out = vec![Complex64::new(0.0, 0.0); v.len() + l];
            for m in 0..v.len() {
                let w = kraus_ln_weight(ch, l, m).unwrap();
                out[m + l] = v[m] * (0.5 * w).exp();
            }
            out
        }
    }
}

pub fn envelope_mean_photon(delta: f64) -> f64 {
    1.0 / (2.0 * delta * delta).exp_m1()
}

/// Inverse of `envelope_mean_photon`.
pub fn delta_from_nbar(nbar: f64) -> f64 {
    ((1.0 + 1.0 / nbar).ln() / 2.0).sqrt()
}

pub fn default_cutoff(nbar: f64) -> usize {
    (28.0 * (nbar + 0.5)).ceil() as usize + 20
}

/// A normalized truncated Fock vector.
#[derive(Debug, Clone)]
pub struct FockState {
    pub amplitudes: Vec<Complex64>,
    pub cutoff: usize,
    /// Relative weight found beyond the cutoff before truncation.
    pub tail_mass: f64,
    /// Relative weight of the outermost comb peaks.
    pub edge_weight: f64,
}

impl FockState {
    pub fn mean_photon(&self) -> f64 {
        self.amplitudes.iter().enumerate().map(|(m, a)| m as f64 * a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &FockState) -> Complex64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CodewordOptions {
    pub cutoff: usize,
    pub peak_window: Option<usize>,
    pub max_tail: f64,
    pub max_edge: f64,
}

impl CodewordOptions {
    pub fn new(cutoff: usize) -> Self {
        Self { cutoff, peak_window: None, max_tail: 1e-8, max_edge: 1e-12 }
    }

    /// Accept any truncation; diagnostics are still recorded.
    pub fn lenient(cutoff: usize) -> Self {
        Self { cutoff, peak_window: None, max_tail: f64::INFINITY, max_edge: f64::INFINITY }
    }
}

/// Single-mode comb: a Gaussian unitary R(theta) * shear(s) * squeeze(a)
/// applied to the square-family position comb, then the envelope.
#[derive(Debug, Clone, Copy)]
struct Comb {
    squeeze: f64,
    shear: f64,
    theta: f64,
}

/// Decompose a 2x2 symplectic S = R(theta) [[a, 0], [c, 1/a]], a > 0.
fn iwasawa(s: &DMatrix<f64>) -> Comb {
    let (s01, s11) = (s[(0, 1)], s[(1, 1)]);
    let nrm = (s01 * s01 + s11 * s11).sqrt();
    let (mut cos, mut sin) = (s11 / nrm, -s01 / nrm);
    let mut a = cos * s[(0, 0)] + sin * s[(1, 0)];
    if a < 0.0 {
        cos = -cos;
        sin = -sin;
        a = -a;
    }
    let c = -sin * s[(0, 0)] + cos * s[(1, 0)];
    Comb { squeeze: a, shear: c / a, theta: sin.atan2(cos) }
}

fn comb_codeword(comb: Comb, d: u64, mu: u64, delta: f64, opts: &CodewordOptions) -> Result<FockState> {
    if mu >= d {
        return Err(GkpError::InvalidArgument(format!("logical index {mu} out of range for d = {d}")));
    }
    if !(delta > 0.0) {
        return Err(GkpError::InvalidArgument("finite-energy codewords need delta > 0".into()));
    }
    let cutoff = opts.cutoff;
    let margin = (cutoff / 4).max(24);
    let full = cutoff + margin;
    let spacing = (2.0 * PI * d as f64).sqrt() * comb.squeeze;
    let window = opts
        .peak_window
        .unwrap_or_else(|| (9.0 / (delta * spacing)).ceil() as usize + 2) as i64;
    let unit = (2.0 * PI / d as f64).sqrt() * comb.squeeze;

    let mut amps = vec![Complex64::new(0.0, 0.0); full + 1];
    let mut edge = vec![Complex64::new(0.0, 0.0); full + 1];
    for n in -window..=window {
        let x = unit * (d as i64 * n + mu as i64) as f64;
        let psi = hermite_functions(x, full);
        let chirp = Complex64::from_polar(1.0, 0.5 * comb.shear * x * x);
        let target = if n.abs() == window { &mut edge } else { &mut amps };
        for (a, p) in target.iter_mut().zip(psi) {
            *a += chirp * p;
        }
    }
    let envelope: Vec<Complex64> = (0..=full)
        .map(|m| Complex64::from_polar((-delta * delta * m as f64).exp(), comb.theta * m as f64))
        .collect();
    let edge_norm: f64 = edge.iter().zip(&envelope).map(|(a, e)| (a * e).norm_sqr()).sum();
    for ((a, e), f) in amps.iter_mut().zip(&edge).zip(&envelope) {
        *a = (*a + e) * f;
    }
    let total: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    let tail: f64 = amps[cutoff + 1..].iter().map(|a| a.norm_sqr()).sum::<f64>() / total;
    let edge_weight = edge_norm / total;
    if tail > opts.max_tail {
        return Err(GkpError::CutoffTooSmall(format!("tail mass {tail:.3e} beyond cutoff {cutoff}")));
    }
    if edge_weight > opts.max_edge {
        return Err(GkpError::WindowTooSmall(edge_weight));
    }
    amps.truncate(cutoff + 1);
    let kept: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in amps.iter_mut() {
        *a /= kept;
    }
    Ok(FockState { amplitudes: amps, cutoff, tail_mass: tail, edge_weight })
}

/// Square-family codeword |mu> ~ e^{-Delta^2 n} sum_n |sqrt(2 pi / d)(d n + mu)>_q.
pub fn gkp_codeword_fock(d: u64, mu: u64, delta: f64, cutoff: usize, peak_window: Option<usize>) -> Result<FockState> {
    let opts = CodewordOptions { peak_window, ..CodewordOptions::new(cutoff) };
    comb_codeword(Comb { squeeze: 1.0, shear: 0.0, theta: 0.0 }, d, mu, delta, &opts)
}

pub fn gkp_codeword_fock_with(d: u64, mu: u64, delta: f64, opts: &CodewordOptions) -> Result<FockState> {
    comb_codeword(Comb { squeeze: 1.0, shear: 0.0, theta: 0.0 }, d, mu, delta, opts)
}

/// Codewords of a single-mode lattice in canonical basis (Gram = d omega):
/// the square-family comb transported by the symplectic factor S.
pub fn lattice_codewords_fock(lat: &Lattice, delta: f64, opts: &CodewordOptions) -> Result<Vec<FockState>> {
    if lat.modes() != 1 {
        return Err(GkpError::InvalidArgument("codeword builder handles single-mode lattices".into()));
    }
    let d = canonical_dims(lat)?[0];
    let comb = iwasawa(&symplectic_factor(lat)?);
    (0..d).map(|mu| comb_codeword(comb, d, mu, delta, opts)).collect()
}

/// Tensor product of single-mode states (first factor most significant).
pub fn tensor_states(parts: &[&FockState]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(1.0, 0.0)];
    for p in parts {
        let mut next = Vec::with_capacity(out.len() * p.amplitudes.len());
        for a in &out {
            for b in &p.amplitudes {
                next.push(a * b);
            }
        }
        out = next;
    }
    out
}
