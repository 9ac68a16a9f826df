//! Channel capacities and achievable rates of GKP code families.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{GkpError, Result};
use crate::fidelity::{finite_energy_exact_infidelity, infinite_energy_bound, FiniteExactOptions};
use crate::fock::ChannelSpec;
use crate::lattices::{scale_lattice, Lattice};
use crate::qec::GkpCode;

/// Default upper end of the scale-factor scan.
pub const DEFAULT_LAMBDA_MAX: u64 = 4096;
/// Default infidelity ceiling for rate optimization.
pub const DEFAULT_EPS_CEILING: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RateMethod {
    Capacity,
    Werner,
    Hashing,
    MultimodeFloor,
    AdBaseline,
    ScaledFamily,
    SelfdualConstructive,
    SelfdualIdeal,
}

impl RateMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Capacity => "capacity",
            Self::Werner => "werner",
            Self::Hashing => "hashing",
            Self::MultimodeFloor => "multimode_floor",
            Self::AdBaseline => "ad_baseline",
            Self::ScaledFamily => "scaled_family",
            Self::SelfdualConstructive => "selfdual_constructive",
            Self::SelfdualIdeal => "selfdual_ideal",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RatePoint {
    pub channel: ChannelSpec,
    pub method: RateMethod,
    pub rate_bits_per_mode: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_l: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
    /// The raw rate is negative (kept unclamped).
    pub negative: bool,
}

impl RatePoint {
    fn new(channel: ChannelSpec, method: RateMethod, rate: f64) -> Self {
        Self {
            channel,
            method,
            rate_bits_per_mode: rate,
            d_l: None,
            modes: None,
            lambda: None,
            fidelity: None,
            negative: rate < 0.0,
        }
    }
}

/// K rounded to the nearest integer when it is one up to floating-point noise,
/// so that e.g. gamma = 0.1 lands exactly on K = 9.
pub fn snapped_k(ch: &ChannelSpec) -> f64 {
    let k = ch.k_ratio();
    let r = k.round();
    if (k - r).abs() <= 1e-9 * k.max(1.0) {
        r
    } else {
        k
    }
}

/// max(log2 K, 0).
pub fn capacity(ch: &ChannelSpec) -> f64 {
    snapped_k(ch).log2().max(0.0)
}

fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// Coherent information of the Werner state with fidelity F, per mode.
pub fn werner_rate(f: f64, d_l: u64, modes: usize) -> f64 {
    if d_l < 2 {
        return 0.0;
    }
    werner_rate_log2(f, (d_l as f64).log2(), modes)
}

/// `werner_rate` with the dimension given as log2(d_L), for dimensions beyond u64.
pub fn werner_rate_log2(f: f64, log2_d: f64, modes: usize) -> f64 {
    if log2_d <= 0.0 {
        return 0.0;
    }
    // log2(d^2 - 1) without forming d^2
    let log2_d2m1 = 2.0 * log2_d + (-(-2.0 * log2_d).exp2()).ln_1p() / std::f64::consts::LN_2;
    let rest = 1.0 - f;
    let i = log2_d + xlog2x(f) + xlog2x(rest) - rest * log2_d2m1;
    i / modes as f64
}

/// (1 - H_d(p)) log2 d for the depolarizing vector (F, (1-F)/(d^2-1), ...).
pub fn hashing_rate(f: f64, d_l: u64) -> f64 {
    if d_l < 2 {
        return 0.0;
    }
    let d = d_l as f64;
    let q = (1.0 - f) / (d * d - 1.0);
    let h2 = -xlog2x(f) - (d * d - 1.0) * xlog2x(q);
    (1.0 - h2 / d.log2()) * d.log2()
}

/// max(log2 floor(K), 0).
pub fn multimode_rate(ch: &ChannelSpec) -> f64 {
    let k = snapped_k(ch).floor();
    if k < 1.0 {
        0.0
    } else {
        k.log2()
    }
}

/// Constructive (integer scale) and ideal rates of scaled self-dual lattices
/// in the many-mode limit.
pub fn selfdual_asymptotic_rate(ch: &ChannelSpec) -> Result<(RatePoint, RatePoint)> {
    let k = snapped_k(ch);
    if k <= 1.0 {
        return Err(GkpError::InvalidArgument(format!("K = {k} does not exceed 1")));
    }
    let lam = k.floor() as u64;
    let mut cons = RatePoint::new(*ch, RateMethod::SelfdualConstructive, (lam as f64).log2());
    cons.lambda = Some(lam);
    let ideal = RatePoint::new(*ch, RateMethod::SelfdualIdeal, k.log2());
    Ok((cons, ideal))
}

/// Best Werner rate of N-mode scaled self-dual codes under the averaged bound
/// (1/4)(lambda/K)^N, over integer lambda with bound <= eps_ceiling.
pub fn selfdual_finite_rate(ch: &ChannelSpec, modes: usize, eps_ceiling: f64) -> Result<RatePoint> {
    if modes == 0 {
        return Err(GkpError::InvalidArgument("need at least one mode".into()));
    }
    let mut best: Option<RatePoint> = None;
    let mut lambda = 1u64;
    loop {
        let eps = crate::fidelity::selfdual_scaled_bound(lambda, modes, ch).infidelity;
        if eps > eps_ceiling {
            break;
        }
        let log2_d = modes as f64 * (lambda as f64).log2();
        let rate = werner_rate_log2(1.0 - eps, log2_d, modes);
        if best.as_ref().map_or(true, |b| rate > b.rate_bits_per_mode) {
            let mut p = RatePoint::new(*ch, RateMethod::SelfdualConstructive, rate);
            p.d_l = lambda.checked_pow(modes as u32);
            p.modes = Some(modes);
            p.lambda = Some(lambda);
            p.fidelity = Some(1.0 - eps);
            best = Some(p);
        }
        lambda += 1;
    }
    best.ok_or(GkpError::NoFeasibleLambda)
}

fn code_infidelity(lat: &Lattice, ch: &ChannelSpec, nbar: Option<f64>) -> Result<f64> {
    match nbar {
        Some(n) if lat.modes() == 1 => {
            let code = GkpCode::new(lat.clone(), n)?;
            Ok(finite_energy_exact_infidelity(&code, ch, &FiniteExactOptions::default())?.infidelity)
        }
        _ => Ok(infinite_energy_bound(lat, ch, 1e-14)?.infidelity),
    }
}

/// Best Werner rate over scaled copies sqrt(lambda) * base, lambda = 1..lambda_max,
/// among those whose infidelity does not exceed `eps_ceiling`.
///
/// `nbar = None` uses the infinite-energy lattice bound; a finite value uses
/// the closed-form finite-energy infidelity for single-mode lattices and the
/// lattice bound otherwise. The infinite-energy bound grows strictly with
/// lambda, so the scan stops at the first infeasible lambda in that case;
/// the finite-energy scan continues until the infidelity exceeds 1.
pub fn scaled_family_rate(
    base: &Lattice,
    ch: &ChannelSpec,
    nbar: Option<f64>,
    eps_ceiling: f64,
    lambda_max: u64,
) -> Result<RatePoint> {
    if !(eps_ceiling > 0.0 && eps_ceiling < 1.0) {
        return Err(GkpError::InvalidArgument(format!("infidelity ceiling must lie in (0,1), got {eps_ceiling}")));
    }
    let modes = base.modes();
    let d0 = base.det_abs();
    let monotone = nbar.is_none() || modes > 1;
    let mut best: Option<RatePoint> = None;
    for lambda in 1..=lambda_max.max(1) {
        let lat = scale_lattice(base, lambda);
        let eps = code_infidelity(&lat, ch, nbar)?;
        if eps > eps_ceiling {
            if monotone || eps > 1.0 {
                break;
            }
            continue;
        }
        let d_l = d0 * lambda.pow(modes as u32);
        let f = 1.0 - eps;
        let rate = werner_rate(f, d_l, modes);
        if best.as_ref().map_or(true, |b| rate > b.rate_bits_per_mode) {
            let mut p = RatePoint::new(*ch, RateMethod::ScaledFamily, rate);
            p.d_l = Some(d_l);
            p.modes = Some(modes);
            p.lambda = Some(lambda);
            p.fidelity = Some(f);
            best = Some(p);
        }
    }
    best.ok_or(GkpError::NoFeasibleLambda)
}

/// Best hashing rate of single-mode hexagonal codes of dimension d under the
/// infinite-energy bound, restricted to infidelity <= eps_ceiling.
pub fn hashing_hex_rate(ch: &ChannelSpec, eps_ceiling: f64, d_max: u64) -> Result<RatePoint> {
    let mut best: Option<RatePoint> = None;
    for d in 2..=d_max.max(2) {
        let eps = infinite_energy_bound(&crate::lattices::hexagonal(d), ch, 1e-14)?.infidelity;
        if eps > eps_ceiling {
            break;
        }
        let rate = hashing_rate(1.0 - eps, d);
        if best.as_ref().map_or(true, |b| rate > b.rate_bits_per_mode) {
            let mut p = RatePoint::new(*ch, RateMethod::Hashing, rate);
            p.d_l = Some(d);
            p.modes = Some(1);
            p.fidelity = Some(1.0 - eps);
            best = Some(p);
        }
    }
    best.ok_or(GkpError::NoFeasibleLambda)
}

/// Amplification-decoder infidelity of the infinite-energy square code of
/// dimension d: e^{-(pi / (4 d)) K}.
pub fn ad_infidelity(d_l: u64, ch: &ChannelSpec) -> f64 {
    (-(PI / (4.0 * d_l as f64)) * ch.k_ratio()).exp()
}

/// Exponent c of the infidelity e^{-c K}: amplification decoder and the
/// near-optimal leading shell of the square code of dimension d.
pub fn square_exponents(d_l: u64) -> (f64, f64) {
    (PI / (4.0 * d_l as f64), PI / d_l as f64)
}

/// Best Werner rate of the amplification decoder over square codes of
/// dimension 2..=d_max.
pub fn ad_baseline(ch: &ChannelSpec, d_max: u64) -> RatePoint {
    let mut best = RatePoint::new(*ch, RateMethod::AdBaseline, f64::NEG_INFINITY);
    for d in 2..=d_max.max(2) {
        let f = 1.0 - ad_infidelity(d, ch);
        let rate = werner_rate(f, d, 1);
        if rate > best.rate_bits_per_mode {
            best = RatePoint::new(*ch, RateMethod::AdBaseline, rate);
            best.d_l = Some(d);
            best.modes = Some(1);
            best.fidelity = Some(f);
        }
    }
    best
}

/// Dimension range large enough to contain the optimum of `ad_baseline`.
pub fn ad_default_d_max(ch: &ChannelSpec) -> u64 {
    (4.0 * ch.k_ratio()).ceil().max(8.0) as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattices::{hexagonal, square};

    fn loss(g: f64) -> ChannelSpec {
        ChannelSpec::loss(g).unwrap()
    }

    #[test]
    fn capacity_examples() {
        assert_eq!(capacity(&loss(0.5)), 0.0);
        assert!((capacity(&loss(0.1)) - 9f64.log2()).abs() < 1e-12);
        assert!((capacity(&ChannelSpec::amp(1.1).unwrap()) - 11f64.log2()).abs() < 1e-12);
        assert_eq!(capacity(&loss(0.7)), 0.0);
    }

    #[test]
    fn werner_examples() {
        assert!((werner_rate(1.0, 8, 3) - 1.0).abs() < 1e-15);
        assert!((werner_rate(0.25, 2, 1) + 1.0).abs() < 1e-12);
        let e: f64 = 1e-6;
        let r = werner_rate(1.0 - e, 512, 1);
        let expect = 9.0 + (1.0 - e) * (1.0 - e).log2() + e * (e / 262143.0).log2();
        assert!((r - expect).abs() < 1e-12);
        assert!((r - (9.0 - 3.94e-5)).abs() < 1e-7, "{r}");
        assert_eq!(werner_rate(0.9, 1, 1), 0.0);
    }

    #[test]
    fn hashing_examples() {
        assert!((hashing_rate(1.0, 5) - 5f64.log2()).abs() < 1e-12);
        assert!((hashing_rate(0.25, 2) + 1.0).abs() < 1e-12);
        assert!(hashing_rate(0.99, 2) > 0.0);
    }

    #[test]
    fn floor_rate_examples() {
        assert!((multimode_rate(&loss(0.1)) - 9f64.log2()).abs() < 1e-12);
        assert!((multimode_rate(&loss(0.12)) - 7f64.log2()).abs() < 1e-12);
        assert!((multimode_rate(&ChannelSpec::amp(2.0).unwrap()) - 1.0).abs() < 1e-12);
        assert_eq!(multimode_rate(&loss(0.6)), 0.0);
    }

    #[test]
    fn selfdual_examples() {
        let (c, i) = selfdual_asymptotic_rate(&loss(0.1)).unwrap();
        assert!((c.rate_bits_per_mode - 9f64.log2()).abs() < 1e-12);
        assert!((i.rate_bits_per_mode - 9f64.log2()).abs() < 1e-12);
        let (c, i) = selfdual_asymptotic_rate(&loss(0.15)).unwrap();
        assert!((c.rate_bits_per_mode - 5f64.log2()).abs() < 1e-12);
        assert!((i.rate_bits_per_mode - (17.0f64 / 3.0).log2()).abs() < 1e-12);
        let (c, i) = selfdual_asymptotic_rate(&ChannelSpec::amp(1.25).unwrap()).unwrap();
        assert!((c.rate_bits_per_mode - i.rate_bits_per_mode).abs() < 1e-12);
        assert!(selfdual_asymptotic_rate(&loss(0.5)).is_err());
    }

    #[test]
    fn finite_mode_selfdual_rate_approaches_floor() {
        let ch = loss(0.1);
        let few = selfdual_finite_rate(&ch, 4, 1e-2).unwrap();
        let many = selfdual_finite_rate(&ch, 40, 1e-2).unwrap();
        assert!(few.rate_bits_per_mode < many.rate_bits_per_mode);
        assert!(many.rate_bits_per_mode <= multimode_rate(&ch) + 1e-9);
        assert_eq!(many.lambda, Some(8));
        assert!(selfdual_finite_rate(&ch, 0, 1e-2).is_err());
    }

    #[test]
    fn scaled_square_family_at_infinite_energy() {
        let ch = loss(0.3);
        let p = scaled_family_rate(&square(1), &ch, None, 1e-2, 64).unwrap();
        assert!(p.rate_bits_per_mode <= capacity(&ch) + 1e-9);
        let lam = p.lambda.unwrap();
        let eps = infinite_energy_bound(&square(lam), &ch, 1e-14).unwrap().infidelity;
        assert!(eps <= 1e-2);
        let next = infinite_energy_bound(&square(lam + 1), &ch, 1e-14).unwrap().infidelity;
        assert!(next > 1e-2 || werner_rate(1.0 - next, lam + 1, 1) <= p.rate_bits_per_mode);
    }

    #[test]
    fn trivial_scan_on_selfdual_base() {
        let p = scaled_family_rate(&square(1), &loss(0.1), None, 1e-2, 1).unwrap();
        assert_eq!(p.rate_bits_per_mode, 0.0);
        assert_eq!(p.d_l, Some(1));
    }

    #[test]
    fn infeasible_scan_is_reported() {
        let r = scaled_family_rate(&square(1), &loss(0.45), None, 1e-6, 16);
        assert!(matches!(r, Err(GkpError::NoFeasibleLambda)));
    }

    #[test]
    fn finite_energy_scan_uses_closed_form() {
        let ch = loss(0.1);
        let p = scaled_family_rate(&square(1), &ch, Some(8.0), 1e-2, 12).unwrap();
        assert!(p.rate_bits_per_mode > 0.0 && p.rate_bits_per_mode <= capacity(&ch));
    }

    #[test]
    fn tighter_ceiling_never_raises_the_rate() {
        let ch = loss(0.1);
        let loose = scaled_family_rate(&hexagonal(1), &ch, None, 1e-2, 64).unwrap().rate_bits_per_mode;
        let tight = scaled_family_rate(&hexagonal(1), &ch, None, 1e-4, 64).unwrap().rate_bits_per_mode;
        assert!(tight <= loose);
    }

    #[test]
    fn ad_examples() {
        let ch = loss(0.1);
        assert!((ad_infidelity(2, &ch) - (-9.0 * PI / 8.0).exp()).abs() < 1e-15);
        assert!((ad_infidelity(2, &ch) - 0.0292).abs() < 1e-4);
        let (ad, near) = square_exponents(3);
        assert!((near / ad - 4.0).abs() < 1e-15);
        let p = ad_baseline(&ch, ad_default_d_max(&ch));
        assert!(p.rate_bits_per_mode < capacity(&ch));
    }

    #[test]
    fn hashing_is_below_selfdual_rate() {
        for g in [0.02, 0.05, 0.1] {
            let ch = loss(g);
            let h = hashing_hex_rate(&ch, 1e-2, 4096).unwrap().rate_bits_per_mode;
            let (c, _) = selfdual_asymptotic_rate(&ch).unwrap();
            assert!(h < c.rate_bits_per_mode, "{g}: {h}");
        }
    }
}
