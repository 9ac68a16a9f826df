//! Dense Hermitian helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{GkpError, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Largest |m - m^dagger| entry.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues and eigenvectors (columns) of the Hermitian part of `m`.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(hermitize(m));
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

fn spectral_apply(vals: &[f64], vecs: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let mut scaled = vecs.clone();
    for (j, &v) in vals.iter().enumerate() {
        let s = Complex64::new(f(v), 0.0);
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= s;
        }
    }
    &scaled * vecs.adjoint()
}

/// Square root of a PSD matrix. Eigenvalues in (-clip_rel * lambda_max, 0) are
/// clipped to zero; anything more negative is an error.
pub fn psd_sqrt(m: &CMatrix, clip_rel: f64) -> Result<(CMatrix, f64)> {
    let (vals, vecs) = hermitian_eigen(m);
    let max = vals.iter().cloned().fold(0.0f64, f64::max);
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -clip_rel * max.max(f64::MIN_POSITIVE) {
        return Err(GkpError::NotPositiveSemidefinite(min));
    }
    Ok((spectral_apply(&vals, &vecs, |v| v.max(0.0).sqrt()), min))
}

/// Pseudo-inverse square root: eigenvalues below floor_rel * lambda_max are dropped.
pub fn pinv_sqrt(m: &CMatrix, floor_rel: f64) -> (CMatrix, usize) {
    let (vals, vecs) = hermitian_eigen(m);
    let max = vals.iter().cloned().fold(0.0f64, f64::max);
    let floor = floor_rel * max;
    let rank = vals.iter().filter(|&&v| v > floor).count();
    (spectral_apply(&vals, &vecs, |v| if v > floor { 1.0 / v.sqrt() } else { 0.0 }), rank)
}

/// Projector onto the eigenspace kept by `pinv_sqrt` with the same floor.
pub fn range_projector(m: &CMatrix, floor_rel: f64) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(m);
    let max = vals.iter().cloned().fold(0.0f64, f64::max);
    spectral_apply(&vals, &vecs, |v| if v > floor_rel * max { 1.0 } else { 0.0 })
}

/// Partial trace over the logical factor of a matrix indexed as mu * inner + l.
pub fn partial_trace_logical(m: &CMatrix, d: usize) -> CMatrix {
    let inner = m.nrows() / d;
    let mut out = CMatrix::zeros(inner, inner);
    for mu in 0..d {
        out += m.view((mu * inner, mu * inner), (inner, inner));
    }
    out
}

pub fn frobenius_sq(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Kronecker product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn sqrt_squares_back() {
        let a = CMatrix::from_fn(4, 4, |i, j| Complex64::new((i + 2 * j) as f64 * 0.1, (i as f64 - j as f64) * 0.05));
        let m = &a * a.adjoint();
        let (s, _) = psd_sqrt(&m, 1e-8).unwrap();
        assert!((&s * &s - &m).norm() < 1e-10);
    }

    #[test]
    fn negative_matrix_rejected() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0), c(-0.5)]));
        assert!(matches!(psd_sqrt(&m, 1e-8), Err(GkpError::NotPositiveSemidefinite(_))));
    }

    #[test]
    fn partial_trace_of_kron() {
        let a = CMatrix::from_fn(2, 2, |i, j| c((i * 2 + j) as f64 + 1.0));
        let b = CMatrix::from_fn(3, 3, |i, j| Complex64::new(i as f64, j as f64));
        let tr = partial_trace_logical(&kron(&a, &b), 2);
        assert!((tr - b * c(5.0)).norm() < 1e-12);
    }

    #[test]
    fn pinv_sqrt_on_rank_deficient() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c(4.0), c(0.0), c(1.0)]));
        let (p, rank) = pinv_sqrt(&m, 1e-12);
        assert_eq!(rank, 2);
        assert!((p[(0, 0)].re - 0.5).abs() < 1e-12);
        assert!(p[(1, 1)].norm() < 1e-12);
    }
}
