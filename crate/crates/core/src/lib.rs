//! Numerics for Gottesman-Kitaev-Preskill lattice codes under pure loss and
//! pure amplification: QEC matrices, near-optimal (transpose-channel)
//! fidelities, lattice bounds and achievable rates.

pub mod decoders;
pub mod enumerate;
pub mod error;
pub mod fidelity;
pub mod fock;
pub mod lattices;
pub mod linalg;
pub mod qec;
pub mod rates;
pub mod special;

pub use error::{GkpError, Result};
pub use fock::{ChannelKind, ChannelSpec, FockState};
pub use lattices::{catalog_lattice, CatalogEntry, Lattice, ShortestVectorReport, Which};
pub use linalg::{CMatrix, CVector};
pub use qec::{CorrectableSplit, GkpCode, QecMatrix};
