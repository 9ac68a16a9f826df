//! Symplectic lattices: generators, duality, enumeration, scaling, theta sums
//! and the named catalog.
//!
//! Generators are stored row-wise: lattice points are `M^T a` for integer `a`.
//! Quadratures are ordered (q_1, p_1, q_2, p_2, ...), so the symplectic form is
//! `Omega = I_N (x) [[0, 1], [-1, 0]]`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::enumerate::{Enumerator, LatticePoint};
use crate::error::{GkpError, Result};

pub const INTEGRALITY_TOL: f64 = 1e-9;
pub const TIE_TOL: f64 = 1e-9;

/// Symplectic form for `modes` modes.
pub fn omega(modes: usize) -> DMatrix<f64> {
    let mut o = DMatrix::zeros(2 * modes, 2 * modes);
    for j in 0..modes {
        o[(2 * j, 2 * j + 1)] = 1.0;
        o[(2 * j + 1, 2 * j)] = -1.0;
    }
    o
}

/// `M Omega M^T`, rounded to integers.
pub fn symplectic_gram(m: &DMatrix<f64>) -> Result<DMatrix<i64>> {
    let n = m.nrows();
    if n == 0 || n % 2 != 0 || m.ncols() != n {
        return Err(GkpError::InvalidGenerator(format!("expected a square matrix of even size, got {}x{}", m.nrows(), m.ncols())));
    }
    let a = m * omega(n / 2) * m.transpose();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let v = a[(i, j)];
            let r = v.round();
            if (v - r).abs() > INTEGRALITY_TOL {
                return Err(GkpError::NotSymplecticallyIntegral { row: i, col: j, deviation: (v - r).abs() });
            }
            out[(i, j)] = r as i64;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Primal,
    Dual,
}

/// A symplectically integral lattice.
#[derive(Debug, Clone)]
pub struct Lattice {
    generator: DMatrix<f64>,
    modes: usize,
    gram: DMatrix<i64>,
    det_abs: u64,
    name: Option<String>,
}

impl Lattice {
    pub fn new(generator: DMatrix<f64>) -> Result<Self> {
        let gram = symplectic_gram(&generator)?;
        let det = generator.determinant().abs();
        if det < 1e-12 {
            return Err(GkpError::SingularGenerator);
        }
        let r = det.round();
        if (det - r).abs() > 1e-6 || r < 1.0 {
            return Err(GkpError::NonIntegerDeterminant(det));
        }
        let modes = generator.nrows() / 2;
        Ok(Self { generator, modes, gram, det_abs: r as u64, name: None })
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn generator(&self) -> &DMatrix<f64> {
        &self.generator
    }
    pub fn modes(&self) -> usize {
        self.modes
    }
    pub fn gram(&self) -> &DMatrix<i64> {
        &self.gram
    }
    pub fn det_abs(&self) -> u64 {
        self.det_abs
    }
    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// Row basis of the requested lattice.
    pub fn basis(&self, which: Which) -> DMatrix<f64> {
        match which {
            Which::Primal => self.generator.clone(),
            Which::Dual => dual_generator(self),
        }
    }

    /// True when `x` lies in the lattice (within 1e-9 in integer coordinates).
    pub fn contains(&self, x: &[f64]) -> bool {
        let inv_t = match self.generator.transpose().try_inverse() {
            Some(m) => m,
            None => return false,
        };
        let v = nalgebra::DVector::from_column_slice(x);
        (inv_t * v).iter().all(|c| (c - c.round()).abs() < INTEGRALITY_TOL)
    }

    /// Load from `{"modes": N, "generator": [[...], ...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct File {
            modes: usize,
            generator: Vec<Vec<f64>>,
        }
        let f: File = serde_json::from_str(text).map_err(|e| GkpError::InvalidGenerator(e.to_string()))?;
        let n = 2 * f.modes;
        if f.modes == 0 || f.generator.len() != n || f.generator.iter().any(|r| r.len() != n) {
            return Err(GkpError::InvalidGenerator(format!("generator must be {n}x{n} for {} modes", f.modes)));
        }
        let flat: Vec<f64> = f.generator.into_iter().flatten().collect();
        Lattice::new(DMatrix::from_row_slice(n, n, &flat))
    }
}

pub fn logical_dimension(lat: &Lattice) -> u64 {
    lat.det_abs()
}

/// `M_perp = -M^{-T} Omega`, so that `M_perp Omega M^T = I`.
pub fn dual_generator(lat: &Lattice) -> DMatrix<f64> {
    let m = lat.generator();
    let inv_t = m.transpose().try_inverse().expect("generator invertible by construction");
    -(inv_t * omega(lat.modes()))
}

#[derive(Debug, Clone, Serialize)]
pub struct ShortestVectorReport {
    pub min_norm_sq: f64,
    pub kissing: usize,
    pub vectors: Vec<Vec<f64>>,
}

pub fn shortest_vectors_of_basis(basis: &DMatrix<f64>) -> Result<ShortestVectorReport> {
    let e = Enumerator::new(basis)?;
    let n = basis.nrows();
    let diag_min = (0..n)
        .map(|i| basis.row(i).norm_squared())
        .fold(f64::INFINITY, f64::min);
    let pts = e.ball(&vec![0.0; n], diag_min * (1.0 + 1e-6))?;
    let nonzero: Vec<LatticePoint> = pts.into_iter().filter(|p| p.coeffs.iter().any(|&c| c != 0)).collect();
    let min = nonzero.iter().map(|p| p.norm_sq).fold(f64::INFINITY, f64::min);
    let vectors: Vec<Vec<f64>> = nonzero
        .into_iter()
        .filter(|p| p.norm_sq <= min * (1.0 + TIE_TOL))
        .map(|p| p.vector)
        .collect();
    Ok(ShortestVectorReport { min_norm_sq: min, kissing: vectors.len(), vectors })
}

pub fn shortest_vectors(lat: &Lattice, which: Which) -> Result<ShortestVectorReport> {
    shortest_vectors_of_basis(&lat.basis(which))
}

#[derive(Debug, Clone, Serialize)]
pub struct ThetaSum {
    pub value: f64,
    /// Upper bound on the omitted tail.
    pub truncation_bound: f64,
    pub radius_sq: f64,
    pub points: usize,
}

fn ln_ball_volume(n: usize) -> f64 {
    let nf = n as f64;
    0.5 * nf * PI.ln() - ln_gamma_half_int(n + 2)
}

// ln Gamma(k/2) for integer k >= 1
fn ln_gamma_half_int(k: usize) -> f64 {
    if k % 2 == 0 {
        crate::special::ln_factorial(k / 2 - 1)
    } else {
        // Gamma(m + 1/2) = (2m)! sqrt(pi) / (4^m m!)
        let m = (k - 1) / 2;
        crate::special::ln_factorial(2 * m) + 0.5 * PI.ln() - (m as f64) * 4f64.ln() - crate::special::ln_factorial(m)
    }
}

/// Upper bound on sum_{|x|^2 > r2} e^{-c|x|^2} from the counting estimate
/// #{|x| <= r} <= V_n (r + rho)^n / covol, rho = half the sum of basis lengths.
fn theta_tail_bound(basis: &DMatrix<f64>, c: f64, r2: f64) -> f64 {
    let n = basis.nrows();
    let covol = basis.determinant().abs();
    let rho: f64 = 0.5 * (0..n).map(|i| basis.row(i).norm()).sum::<f64>();
    let lnv = ln_ball_volume(n) - covol.ln();
    let r0 = r2.sqrt();
    let h = 0.25 / c.sqrt().max(1e-3);
    let mut tail = 0.0;
    for k in 0..100_000 {
        let inner = r0 + k as f64 * h;
        let outer = inner + h;
        let count = (lnv + n as f64 * (outer + rho).ln()).exp();
        let term = count * (-c * inner * inner).exp();
        tail += term;
        if k > 10 && term < 1e-30 * tail.max(1e-300) {
            break;
        }
    }
    tail
}

pub fn theta_sum_of_basis(basis: &DMatrix<f64>, c: f64, tol: f64) -> Result<ThetaSum> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(GkpError::NonConvergent(c));
    }
    if !(tol > 0.0) {
        return Err(GkpError::InvalidArgument("tol must be positive".into()));
    }
    let e = Enumerator::new(basis)?;
    let n = basis.nrows();
    let mut r2 = (tol.recip().ln().max(1.0)) / c;
    loop {
        let bound = theta_tail_bound(basis, c, r2);
        if bound < tol {
            break;
        }
        r2 *= 1.25;
        if r2 * c > 1e4 {
            return Err(GkpError::NonConvergent(c));
        }
    }
    let pts = e.ball(&vec![0.0; n], r2)?;
    let mut terms: Vec<f64> = pts
        .iter()
        .filter(|p| p.coeffs.iter().any(|&v| v != 0))
        .map(|p| (-c * p.norm_sq).exp())
        .collect();
    terms.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let value = terms.iter().sum();
    Ok(ThetaSum { value, truncation_bound: theta_tail_bound(basis, c, r2), radius_sq: r2, points: terms.len() })
}

/// sum over nonzero lattice vectors of e^{-c |x|^2}.
pub fn theta_sum(lat: &Lattice, which: Which, c: f64, tol: f64) -> Result<ThetaSum> {
    theta_sum_of_basis(&lat.basis(which), c, tol)
}

/// Generator scaled by sqrt(lambda).
pub fn scale_lattice(lat: &Lattice, lambda: u64) -> Lattice {
    assert!(lambda >= 1, "scale factor must be a positive integer");
    let m = lat.generator() * (lambda as f64).sqrt();
    let mut out = Lattice::new(m).expect("scaling preserves integrality");
    out.name = lat.name.as_ref().map(|n| if lambda == 1 { n.clone() } else { format!("{n}x{lambda}") });
    out
}

/// Per-mode dimensions d_i if the Gram matrix is diag(d) (x) omega.
pub fn canonical_dims(lat: &Lattice) -> Result<Vec<u64>> {
    let g = lat.gram();
    let n = lat.modes();
    let mut dims = Vec::with_capacity(n);
    for i in 0..2 * n {
        for j in 0..2 * n {
            let same_block = i / 2 == j / 2;
            let v = g[(i, j)];
            if !same_block && v != 0 {
                return Err(GkpError::NotCanonicalBasis);
            }
        }
    }
    for j in 0..n {
        let d = g[(2 * j, 2 * j + 1)];
        if d <= 0 || g[(2 * j + 1, 2 * j)] != -d {
            return Err(GkpError::NotCanonicalBasis);
        }
        dims.push(d as u64);
    }
    Ok(dims)
}

/// S with M = M_sq S^T, M_sq = diag(sqrt d_i) (x) I_2.
pub fn symplectic_factor(lat: &Lattice) -> Result<DMatrix<f64>> {
    let dims = canonical_dims(lat)?;
    let n = lat.modes();
    let mut msq_inv = DMatrix::zeros(2 * n, 2 * n);
    for (j, &d) in dims.iter().enumerate() {
        let s = 1.0 / (d as f64).sqrt();
        msq_inv[(2 * j, 2 * j)] = s;
        msq_inv[(2 * j + 1, 2 * j + 1)] = s;
    }
    Ok((msq_inv * lat.generator()).transpose())
}

/// Table entry for a named lattice. Lattices too large to enumerate carry
/// only their stored constants.
#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub name: String,
    pub modes: usize,
    /// det(M M^T) = d_0^2
    pub det: u64,
    pub dual_min_norm_sq: f64,
    pub kissing: usize,
    pub enumerable: bool,
    #[serde(skip)]
    pub lattice: Option<Lattice>,
}

impl CatalogEntry {
    pub fn lattice(&self) -> Result<&Lattice> {
        self.lattice.as_ref().ok_or_else(|| GkpError::NotEnumerable(self.name.clone()))
    }
}

pub fn square(d: u64) -> Lattice {
    let s = (d as f64).sqrt();
    Lattice::new(DMatrix::from_row_slice(2, 2, &[s, 0.0, 0.0, s])).unwrap().named(if d == 1 { "square".to_string() } else { format!("square{d}") })
}

pub fn hexagonal(d: u64) -> Lattice {
    let s = (2.0 * d as f64 / 3f64.sqrt()).sqrt();
    let m = DMatrix::from_row_slice(2, 2, &[s, 0.0, -0.5 * s, 0.5 * 3f64.sqrt() * s]);
    Lattice::new(m).unwrap().named(if d == 1 { "hexagonal".to_string() } else { format!("hexagonal{d}") })
}

/// Orthogonal R with R^T Omega R = K / sqrt(2), where
/// K = [[0,1,1,0],[-1,0,0,1],[-1,0,0,-1],[0,-1,1,0]] satisfies K^2 = -2 I.
fn quaternionic_frame() -> DMatrix<f64> {
    #[rustfmt::skip]
    let k = DMatrix::from_row_slice(4, 4, &[
        0.0, 1.0, 1.0, 0.0,
        -1.0, 0.0, 0.0, 1.0,
        -1.0, 0.0, 0.0, -1.0,
        0.0, -1.0, 1.0, 0.0,
    ]);
    let j = k / 2f64.sqrt();
    let f1 = nalgebra::DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
    let f2 = -(&j * &f1);
    let mut v = nalgebra::DVector::from_vec(vec![0.0, 0.0, 1.0, 0.0]);
    v -= &f1 * f1.dot(&v) + &f2 * f2.dot(&v);
    let f3 = v.normalize();
    let f4 = -(&j * &f3);
    let mut rt = DMatrix::zeros(4, 4);
    for (c, f) in [f1, f2, f3, f4].iter().enumerate() {
        rt.set_column(c, f);
    }
    rt.transpose()
}

pub fn tesseract() -> Lattice {
    let rt = quaternionic_frame().transpose();
    Lattice::new(rt * 2f64.powf(0.25)).unwrap().named("tesseract")
}

pub fn d4() -> Lattice {
    #[rustfmt::skip]
    let b = DMatrix::from_row_slice(4, 4, &[
        1.0, 1.0, 0.0, 0.0,
        1.0, -1.0, 0.0, 0.0,
        0.0, 1.0, -1.0, 0.0,
        0.0, 0.0, 1.0, -1.0,
    ]);
    let rt = quaternionic_frame().transpose();
    Lattice::new(b * rt * 2f64.powf(-0.25)).unwrap().named("d4")
}

pub fn e8() -> Lattice {
    let mut m = DMatrix::zeros(8, 8);
    m[(0, 0)] = 2.0;
    for i in 1..7 {
        m[(i, i - 1)] = -1.0;
        m[(i, i)] = 1.0;
    }
    for j in 0..8 {
        m[(7, j)] = 0.5;
    }
    Lattice::new(m).unwrap().named("e8")
}

fn entry_from(lat: Lattice) -> Result<CatalogEntry> {
    let sv = shortest_vectors(&lat, Which::Dual)?;
    Ok(CatalogEntry {
        name: lat.name().unwrap_or("custom").to_string(),
        modes: lat.modes(),
        det: lat.det_abs() * lat.det_abs(),
        dual_min_norm_sq: sv.min_norm_sq,
        kissing: sv.kissing,
        enumerable: true,
        lattice: Some(lat),
    })
}

/// Names: square, squareD, hexagonal, hexagonalD, tesseract, d4, d6, e8, leech.
pub fn catalog_lattice(name: &str) -> Result<CatalogEntry> {
    let lower = name.to_ascii_lowercase();
    let stored = |name: &str, modes, det, min, kissing| CatalogEntry {
        name: name.to_string(),
        modes,
        det,
        dual_min_norm_sq: min,
        kissing,
        enumerable: false,
        lattice: None,
    };
    let parse_d = |prefix: &str| -> Option<u64> {
        let rest = lower.strip_prefix(prefix)?;
        if rest.is_empty() {
            Some(1)
        } else {
            rest.trim_start_matches(['(', '-', '_']).trim_end_matches(')').parse().ok().filter(|&d| d >= 1)
        }
    };
    match lower.as_str() {
        "tesseract" => entry_from(tesseract()),
        "d4" => entry_from(d4()),
        "e8" => entry_from(e8()),
        "d6" => Ok(stored("d6", 3, 4, 1.0, 12)),
        "leech" => Ok(stored("leech", 12, 1, 4.0, 196_560)),
        _ => {
            if let Some(d) = parse_d("square") {
                entry_from(square(d))
            } else if let Some(d) = parse_d("hexagonal").or_else(|| parse_d("hex")) {
                entry_from(hexagonal(d))
            } else {
                Err(GkpError::UnknownLattice(name.to_string()))
            }
        }
    }
}

/// Direct product of lattices (block-diagonal generator).
pub fn product(parts: &[&Lattice]) -> Lattice {
    let n: usize = parts.iter().map(|l| l.generator().nrows()).sum();
    let mut m = DMatrix::zeros(n, n);
    let mut off = 0;
    for l in parts {
        let k = l.generator().nrows();
        m.view_mut((off, off), (k, k)).copy_from(l.generator());
        off += k;
    }
    let name = parts.iter().map(|l| l.name().unwrap_or("custom")).collect::<Vec<_>>().join("*");
    Lattice::new(m).unwrap().named(name)
}
