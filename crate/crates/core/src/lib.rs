//! Exact-diagonalization laboratory for driven spin chains: adiabatic
//! transport, the quasi-adiabatic generator, superadiabatic dressing and
//! linear response.

pub mod dynamics;
pub mod error;
pub mod filter;
pub mod fit;
pub mod jet;
pub mod kubo;
pub mod linalg;
pub mod models;
pub mod operators;
pub mod quasiadiabatic;
pub mod spectral;
pub mod superadiabatic;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
