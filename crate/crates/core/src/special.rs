//! Special functions: factorials, Laguerre polynomials, scaled modified Bessel
//! functions and harmonic-oscillator eigenfunctions.

use std::f64::consts::PI;
use std::sync::OnceLock;

const LN_FACT_TABLE: usize = 8192;

fn ln_fact_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LN_FACT_TABLE);
        let mut acc = 0.0;
        t.push(0.0);
        for k in 1..LN_FACT_TABLE {
            acc += (k as f64).ln();
            t.push(acc);
        }
        t
    })
}

/// ln(n!)
pub fn ln_factorial(n: usize) -> f64 {
    if n < LN_FACT_TABLE {
        return ln_fact_table()[n];
    }
    // Stirling series, far beyond any table entry we care about
    let x = n as f64 + 1.0;
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x.powi(3))
}

/// ln C(n, k)
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Generalized Laguerre polynomial L_n^alpha(x) by upward three-term recurrence.
pub fn laguerre(n: usize, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// e^{-x} I_k(x) for k = 0..=nmax (Miller backward recurrence, normalized with
/// I_0 + 2 sum_k I_k = e^x).
pub fn bessel_i_scaled_all(nmax: usize, x: f64) -> Vec<f64> {
    assert!(x >= 0.0, "bessel_i_scaled_all: x must be nonnegative");
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let start = nmax + 40 + (12.0 * x.sqrt()).ceil() as usize;
    let mut next = 0.0; // i_{k+1}
    let mut cur = 1e-280; // i_k
    let mut sum = 0.0;
    for k in (1..=start).rev() {
        if k <= nmax {
            out[k] = cur;
        }
        sum += 2.0 * cur;
        let prev = next + (2.0 * k as f64 / x) * cur;
        next = cur;
        cur = prev;
        if cur.abs() > 1e250 {
            let s = 1e-250;
            cur *= s;
            next *= s;
            sum *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    out[0] = cur;
    sum += cur;
    for v in out.iter_mut() {
        *v /= sum;
    }
    out
}

/// e^{-x} I_n(x).
pub fn bessel_i_scaled(n: usize, x: f64) -> f64 {
    bessel_i_scaled_all(n, x)[n]
}

/// e^{-x} sum_{n>=0} (1 - 1/x)^{c n} I_n(x); tends to 1/2 as x grows.
pub fn bessel_weighted_sum(x: f64, c: f64) -> f64 {
    let r = (1.0 - 1.0 / x).powf(c);
    let nmax = (x + 40.0 * x.sqrt() + 50.0) as usize;
    let all = bessel_i_scaled_all(nmax.min(4_000_000), x);
    let mut acc = 0.0;
    let mut w = 1.0;
    for v in all {
        acc += w * v;
        w *= r;
    }
    acc
}

/// Left side of the Hardy-Hille formula,
/// sum_n n!/Gamma(1+alpha+n) L_n^alpha(x) L_n^alpha(y) t^n, for integer alpha and 0 <= t < 1.
pub fn hardy_hille_series(alpha: usize, x: f64, y: f64, t: f64) -> f64 {
    let a = alpha as f64;
    let mut acc = 0.0;
    let (mut lx0, mut lx1) = (1.0, 1.0 + a - x);
    let (mut ly0, mut ly1) = (1.0, 1.0 + a - y);
    for n in 0..100_000usize {
        let (lx, ly) = if n == 0 { (lx0, ly0) } else { (lx1, ly1) };
        let ln_w = ln_factorial(n) - ln_factorial(n + alpha) + n as f64 * t.ln();
        let term = ln_w.exp() * lx * ly;
        acc += term;
        if n > 20 && term.abs() < 1e-18 * acc.abs() && ln_w < -40.0 {
            break;
        }
        if n >= 1 {
            let nf = n as f64;
            let nx = ((2.0 * nf + 1.0 + a - x) * lx1 - (nf + a) * lx0) / (nf + 1.0);
            let ny = ((2.0 * nf + 1.0 + a - y) * ly1 - (nf + a) * ly0) / (nf + 1.0);
            lx0 = lx1;
            lx1 = nx;
            ly0 = ly1;
            ly1 = ny;
        }
    }
    acc
}

/// Right side of the Hardy-Hille formula,
/// (xyt)^{-alpha/2} / (1-t) e^{-(x+y)t/(1-t)} I_alpha(2 sqrt(xyt)/(1-t)).
pub fn hardy_hille_closed(alpha: usize, x: f64, y: f64, t: f64) -> f64 {
    let z = 2.0 * (x * y * t).sqrt() / (1.0 - t);
    let ln = -(alpha as f64 / 2.0) * (x * y * t).ln() - (1.0 - t).ln() - (x + y) * t / (1.0 - t) + z;
    ln.exp() * bessel_i_scaled(alpha, z)
}

/// Harmonic-oscillator eigenfunctions psi_m(x), m = 0..=mmax, in the convention
/// q = (a + a^dagger)/sqrt(2). A running log-scale keeps the recurrence finite
/// far out in the tails.
pub fn hermite_functions(x: f64, mmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; mmax + 1];
    let mut log_scale = -0.5 * x * x - 0.25 * PI.ln();
    let mut prev = 0.0;
    let mut cur = 1.0;
    out[0] = log_scale.exp();
    for m in 0..mmax {
        let mf = m as f64;
        let next = (2.0 / (mf + 1.0)).sqrt() * x * cur - (mf / (mf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > 1e150 {
            prev *= 1e-150;
            cur *= 1e-150;
            log_scale += 150.0 * std::f64::consts::LN_10;
        }
        out[m + 1] = cur * log_scale.exp();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laguerre_series(n: usize, a: f64, x: f64) -> f64 {
        // sum_k (-1)^k C(n+a, n-k) x^k / k!, with generalized binomial
        let mut s = 0.0;
        for k in 0..=n {
            let mut binom = 1.0;
            for j in 0..(n - k) {
                binom *= (n as f64 + a - j as f64) / (j as f64 + 1.0);
            }
            let mut term = binom;
            for j in 1..=k {
                term *= x / j as f64;
            }
            s += if k % 2 == 0 { term } else { -term };
        }
        s
    }

    #[test]
    fn laguerre_base_cases() {
        assert_eq!(laguerre(0, 3.3, 7.0), 1.0);
        assert!((laguerre(1, 2.0, 0.5) - 2.5).abs() < 1e-15);
    }

    #[test]
    fn laguerre_matches_series() {
        for &(n, a, x) in &[(5, 2.0, 1.3), (7, 0.0, 4.2), (10, 3.5, 0.2), (3, -0.5, 2.0)] {
            let r = laguerre(n, a, x);
            let s = laguerre_series(n, a, x);
            assert!((r - s).abs() < 1e-11 * s.abs().max(1.0), "{n} {a} {x}: {r} vs {s}");
        }
    }

    fn bessel_series(n: usize, x: f64) -> f64 {
        // sum_k (x/2)^{2k+n} / (k! (k+n)!), scaled by e^{-x}; fine for moderate x
        let mut s = 0.0;
        for k in 0..400 {
            let lt = (2 * k + n) as f64 * (x / 2.0).ln() - ln_factorial(k) - ln_factorial(k + n) - x;
            s += lt.exp();
        }
        s
    }

    #[test]
    fn bessel_trivial_values() {
        assert_eq!(bessel_i_scaled(0, 0.0), 1.0);
        assert_eq!(bessel_i_scaled(1, 0.0), 0.0);
    }

    #[test]
    fn bessel_matches_series() {
        for &x in &[0.01, 0.5, 2.0, 10.0, 35.0, 80.0] {
            let all = bessel_i_scaled_all(12, x);
            for n in 0..=12 {
                let s = bessel_series(n, x);
                assert!((all[n] - s).abs() <= 1e-11 * s.max(1e-300) + 1e-300, "n={n} x={x}: {} vs {s}", all[n]);
            }
        }
    }

    #[test]
    fn bessel_large_argument() {
        let v = bessel_i_scaled(0, 100.0);
        let asym = 1.0 / (2.0 * PI * 100.0).sqrt();
        assert!((v / asym - 1.0).abs() < 2e-3);
        let s = bessel_series(0, 100.0);
        assert!((v - s).abs() < 1e-11 * s);
    }

    #[test]
    fn hermite_orthonormal() {
        // Gauss-type quadrature on a fine grid
        let m = 30;
        let h = 0.01;
        let mut gram = vec![vec![0.0; m + 1]; m + 1];
        let mut x = -15.0;
        while x <= 15.0 {
            let psi = hermite_functions(x, m);
            for i in 0..=m {
                for j in 0..=m {
                    gram[i][j] += psi[i] * psi[j] * h;
                }
            }
            x += h;
        }
        for i in 0..=m {
            for j in 0..=m {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((gram[i][j] - target).abs() < 1e-8, "{i} {j} {}", gram[i][j]);
            }
        }
    }

    #[test]
    fn hermite_far_tail_is_finite() {
        let psi = hermite_functions(30.0, 600);
        assert!(psi.iter().all(|v| v.is_finite()));
        // psi_m(30) peaks near m = 450
        assert!(psi[450].abs() > 1e-4 || psi[449].abs() > 1e-4);
    }

    #[test]
    fn bessel_weighted_sum_tends_to_half() {
        let v = bessel_weighted_sum(1e4, 1.0);
        assert!((v - 0.5).abs() < 5e-3, "{v}");
        let exact_unweighted = 0.5 * (1.0 + bessel_i_scaled(0, 50.0));
        assert!((bessel_weighted_sum(50.0, 0.0) - exact_unweighted).abs() < 1e-13);
    }

    #[test]
    fn hardy_hille_identity() {
        for &(a, x, y, t) in &[(2usize, 1.5, 0.7, 0.8), (0, 3.0, 2.0, 0.5), (5, 0.3, 4.0, 0.9)] {
            let lhs = hardy_hille_series(a, x, y, t);
            let rhs = hardy_hille_closed(a, x, y, t);
            assert!(((lhs - rhs) / rhs).abs() < 1e-6, "{a} {lhs} {rhs}");
        }
    }
}
