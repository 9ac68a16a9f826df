//! Shared fixtures for the benchmarks in benches/.

use gkp_core::lattices::{hexagonal, square};
use gkp_core::{ChannelSpec, GkpCode};

/// Square and hexagonal codes with d_L = 2 at the given energy.
pub fn codes(nbar: f64) -> Vec<(&'static str, GkpCode)> {
    vec![
        ("square2", GkpCode::new(square(2), nbar).expect("valid code")),
        ("hexagonal2", GkpCode::new(hexagonal(2), nbar).expect("valid code")),
    ]
}

pub fn loss(gamma: f64) -> ChannelSpec {
    ChannelSpec::loss(gamma).expect("valid loss rate")
}
