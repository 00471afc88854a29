//! Local densities, singular series, weighted prime counts and circle-method
//! exponential sums for the binomial family `x^ℓ + u`.
//!
//! The crate is organized bottom-up:
//!
//! - [`arith`]: sieves, deterministic 64-bit primality, von Mangoldt tables and
//!   the usual multiplicative functions.
//! - [`local`]: root counts `ϱ_ℓ(p, u)`, the multiplicative coefficients
//!   `λ(q, u)` and `A(q, u)`, Gauss-type sums and irreducibility.
//! - [`series`]: truncated Dirichlet sums and Euler products for the singular
//!   series, plus their diagnostics.
//! - [`counts`]: the weighted counts `Σ Λ(m)Λ(m^ℓ+u)` and `Σ Λ(m^ℓ+u)`.
//! - [`variance`]: mean-square statistics averaged over the shift `u`.
//! - [`expsum`]: exponential sums, major/minor arcs and the exact circle
//!   identity on a dyadic block.
//! - [`oracle`]: slow brute-force references used to check everything above.
//! - [`verify`]: packaged oracle-agreement suites.

pub mod arith;
pub mod counts;
mod error;
pub mod expsum;
pub mod local;
mod numeric;
pub mod oracle;
mod par;
pub mod series;
pub mod variance;
pub mod verify;

pub use error::{Error, Result};
pub use local::PolynomialSpec;
pub use numeric::NeumaierSum;
