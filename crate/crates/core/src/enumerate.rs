//! Fincke-Pohst enumeration of lattice points (and lattice cosets) inside a ball.

use nalgebra::{DMatrix, DVector};

use crate::error::{GkpError, Result};

pub const DEFAULT_NODE_BUDGET: usize = 50_000_000;

/// A lattice point found by enumeration.
#[derive(Debug, Clone)]
pub struct LatticePoint {
    pub coeffs: Vec<i64>,
    pub vector: Vec<f64>,
    pub norm_sq: f64,
}

/// Euclidean lattice given by basis rows, prepared for sphere enumeration.
#[derive(Debug, Clone)]
pub struct Enumerator {
    basis: DMatrix<f64>,
    basis_inv_t: DMatrix<f64>,
    qdiag: Vec<f64>,
    qoff: DMatrix<f64>,
    pub node_budget: usize,
}

impl Enumerator {
    /// `basis` rows are the basis vectors.
    pub fn new(basis: &DMatrix<f64>) -> Result<Self> {
        let n = basis.nrows();
        if basis.ncols() != n {
            return Err(GkpError::InvalidGenerator("basis must be square".into()));
        }
        let gram = basis * basis.transpose();
        let chol = gram.cholesky().ok_or(GkpError::SingularGenerator)?;
        let l = chol.l();
        let mut qdiag = vec![0.0; n];
        let mut qoff = DMatrix::zeros(n, n);
        for i in 0..n {
            qdiag[i] = l[(i, i)] * l[(i, i)];
            for j in (i + 1)..n {
                qoff[(i, j)] = l[(j, i)] / l[(i, i)];
            }
        }
        let basis_inv_t = basis.transpose().try_inverse().ok_or(GkpError::SingularGenerator)?;
        Ok(Self { basis: basis.clone(), basis_inv_t, qdiag, qoff, node_budget: DEFAULT_NODE_BUDGET })
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Coordinates w with sum_i w_i b_i = x.
    pub fn coordinates(&self, x: &[f64]) -> Vec<f64> {
        let v = DVector::from_column_slice(x);
        (&self.basis_inv_t * v).iter().copied().collect()
    }

    pub fn point(&self, coeffs: &[i64]) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; n];
        for (i, &c) in coeffs.iter().enumerate() {
            if c != 0 {
                for k in 0..n {
                    out[k] += c as f64 * self.basis[(i, k)];
                }
            }
        }
        out
    }

    /// All points sum_i z_i b_i + offset with squared norm <= radius_sq.
    pub fn ball(&self, offset: &[f64], radius_sq: f64) -> Result<Vec<LatticePoint>> {
        let mut out = Vec::new();
        self.visit(offset, radius_sq, |z, q| {
            out.push((z.to_vec(), q));
            radius_sq
        })?;
        Ok(out
            .into_iter()
            .map(|(coeffs, _)| {
                let mut vector = self.point(&coeffs);
                for (v, o) in vector.iter_mut().zip(offset) {
                    *v += o;
                }
                let norm_sq = vector.iter().map(|v| v * v).sum();
                LatticePoint { coeffs, vector, norm_sq }
            })
            .collect())
    }

    /// Closest lattice point to `target` (exact, Babai start then enumeration).
    pub fn closest(&self, target: &[f64]) -> Result<LatticePoint> {
        let w = self.coordinates(target);
        let babai: Vec<i64> = w.iter().map(|v| v.round() as i64).collect();
        let bp = self.point(&babai);
        let mut best_q: f64 = bp.iter().zip(target).map(|(a, b)| (a - b) * (a - b)).sum();
        let mut best = babai;
        let neg: Vec<f64> = target.iter().map(|v| -v).collect();
        self.visit(&neg, best_q * (1.0 + 1e-12) + 1e-300, |z, q| {
            if q < best_q {
                best_q = q;
                best = z.to_vec();
            }
            best_q * (1.0 + 1e-12) + 1e-300
        })?;
        let vector = self.point(&best);
        Ok(LatticePoint { coeffs: best, vector, norm_sq: best_q })
    }

    /// Depth-first enumeration. `found` receives coefficients and the squared
    /// norm and returns the (possibly shrunk) radius for the rest of the search.
    fn visit<F>(&self, offset: &[f64], radius_sq: f64, mut found: F) -> Result<()>
    where
        F: FnMut(&[i64], f64) -> f64,
    {
        let n = self.dim();
        let w = self.coordinates(offset);
        let mut z = vec![0i64; n];
        let mut centers = vec![0.0; n];
        let mut partial = vec![0.0; n + 1];
        let mut upper = vec![0i64; n];
        let mut radius = radius_sq;
        let mut nodes = 0usize;

        let set_level = |i: usize, z: &mut [i64], centers: &mut [f64], upper: &mut [i64], partial: &[f64], radius: f64| -> bool {
            let mut s = w[i];
            for j in (i + 1)..n {
                s += self.qoff[(i, j)] * (z[j] as f64 + w[j]);
            }
            centers[i] = -s;
            let rem = radius - partial[i + 1];
            if rem < 0.0 {
                return false;
            }
            let half = (rem / self.qdiag[i]).sqrt();
            let lo = (centers[i] - half).ceil();
            let hi = (centers[i] + half).floor();
            if lo > hi {
                return false;
            }
            z[i] = lo as i64;
            upper[i] = hi as i64;
            true
        };

        let mut level = n - 1;
        if !set_level(level, &mut z, &mut centers, &mut upper, &partial, radius) {
            return Ok(());
        }
        loop {
            nodes += 1;
            if nodes > self.node_budget {
                return Err(GkpError::EnumerationBudgetExceeded { dim: n, radius_sq });
            }
            if z[level] > upper[level] {
                level += 1;
                if level == n {
                    return Ok(());
                }
                z[level] += 1;
                continue;
            }
            let diff = z[level] as f64 - centers[level];
            let q = partial[level + 1] + self.qdiag[level] * diff * diff;
            if q > radius {
                z[level] += 1;
                continue;
            }
            if level == 0 {
                radius = found(&z, q);
                z[0] += 1;
                continue;
            }
            partial[level] = q;
            level -= 1;
            if !set_level(level, &mut z, &mut centers, &mut upper, &partial, radius) {
                level += 1;
                z[level] += 1;
            }
        }
    }
}
