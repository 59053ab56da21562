//! Exact and high-precision machinery for Diophantine approximation of
//! vector subspaces of R^n: heights and Plücker coordinates of rational
//! subspaces, canonical angles between subspaces, enumeration of rational
//! subspaces by height, explicit badly-approximable and prescribed-exponent
//! constructions, and an exact calculator for the known approximation
//! exponent bounds.

pub mod angles;
pub mod bigfloat;
pub mod bounds;
pub mod constructions;
pub mod enumeration;
pub mod exact;
pub mod grassmann;

pub use bigfloat::BigFloat;

/// Library version embedded in machine-readable outputs.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
