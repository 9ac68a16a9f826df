//! Baseline decoders: the amplification-decoder reduction of loss to a
//! Gaussian displacement channel, and a Monte Carlo nearest-dual-point decoder.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::enumerate::Enumerator;
use crate::error::{GkpError, Result};
use crate::fock::{ChannelKind, ChannelSpec};
use crate::lattices::{Lattice, Which};

/// Samples per Monte Carlo batch; each batch has its own ChaCha stream.
pub const BATCH: usize = 16_384;
/// Smallest accepted sample count.
pub const MIN_SAMPLES: usize = 10_000;

/// Isotropic Gaussian displacement channel with density
/// e^{-|alpha|^2 / sigma^2} / (pi sigma^2) over the complex amplitude alpha,
/// i.e. variance sigma^2 / 2 on Re(alpha) and on Im(alpha).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DisplacementChannel {
    pub sigma_sq: f64,
}

impl DisplacementChannel {
    pub fn new(sigma_sq: f64) -> Result<Self> {
        if !(sigma_sq > 0.0) || !sigma_sq.is_finite() {
            return Err(GkpError::InvalidArgument(format!("displacement variance must be positive, got {sigma_sq}")));
        }
        Ok(Self { sigma_sq })
    }

    /// Standard deviation of each coordinate in lattice units, where a lattice
    /// vector x displaces by alpha = sqrt(pi) (x_q + i x_p).
    pub fn lattice_sigma(&self) -> f64 {
        (self.sigma_sq / (2.0 * std::f64::consts::PI)).sqrt()
    }
}

/// Loss followed by ideal amplification with eta G = 1 leaves a displacement
/// channel with sigma^2 = 1 - eta = gamma.
pub fn ad_effective_channel(ch: &ChannelSpec) -> Result<DisplacementChannel> {
    match ch.kind {
        ChannelKind::Loss => DisplacementChannel::new(ch.strength),
        ChannelKind::Amp => Err(GkpError::WrongChannelKind("the amplification decoder takes a loss channel".into())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub p_err: f64,
    pub stderr: f64,
    pub samples: usize,
    pub errors: u64,
}

/// Nearest-dual-point decoder for a displacement channel.
pub struct VoronoiDecoder {
    dual: Enumerator,
    primal_inv_t: DMatrix<f64>,
}

impl VoronoiDecoder {
    pub fn new(lat: &Lattice) -> Result<Self> {
        let dual = Enumerator::new(&lat.basis(Which::Dual))?;
        let primal_inv_t = lat.generator().transpose().try_inverse().ok_or(GkpError::SingularGenerator)?;
        Ok(Self { dual, primal_inv_t })
    }

    /// True when the dual point closest to `u` is a nontrivial logical.
    pub fn is_logical_error(&self, u: &[f64]) -> Result<bool> {
        let p = self.dual.closest(u)?;
        let c = &self.primal_inv_t * DVector::from_column_slice(&p.vector);
        Ok(c.iter().any(|v| (v - v.round()).abs() > 1e-6))
    }
}

/// Logical error probability of nearest-dual-point decoding under the
/// displacement channel, with its binomial standard error. Deterministic for a
/// given seed: batch b draws from stream b of ChaCha8 seeded with `seed`.
pub fn voronoi_logical_error(lat: &Lattice, dch: &DisplacementChannel, samples: usize, seed: u64) -> Result<McEstimate> {
    if samples < MIN_SAMPLES {
        return Err(GkpError::InvalidArgument(format!("need at least {MIN_SAMPLES} samples, got {samples}")));
    }
    let dec = VoronoiDecoder::new(lat)?;
    let dim = 2 * lat.modes();
    let normal = Normal::new(0.0, dch.lattice_sigma()).map_err(|e| GkpError::InvalidArgument(e.to_string()))?;
    let batches = samples.div_ceil(BATCH);
    let counts: Vec<u64> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let n = BATCH.min(samples - b * BATCH);
            let mut u = vec![0.0; dim];
            let mut errs = 0u64;
            for _ in 0..n {
                for v in u.iter_mut() {
                    *v = normal.sample(&mut rng);
                }
                if dec.is_logical_error(&u)? {
                    errs += 1;
                }
            }
            Ok(errs)
        })
        .collect::<Result<_>>()?;
    let errors: u64 = counts.iter().sum();
    let p = errors as f64 / samples as f64;
    Ok(McEstimate { p_err: p, stderr: (p * (1.0 - p) / samples as f64).sqrt(), samples, errors })
}
