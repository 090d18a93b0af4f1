//! Workbench for minimum exponents of elliptic-curve groups over prime fields.
//!
//! The library computes exact group structures (m1, m2) and exponents of all
//! curves y² = x³ + ax + b over F_p, predicts the minimum attainable exponent
//! per prime through a Waterhouse/Rück attainability oracle, counts integers
//! and shifted primes with a divisor in an interval (y, z], and runs finite
//! empirical checks of the classical threshold bounds (q^{3/4+ε}, q^{1/2+ε})
//! together with the constructive small-exponent search driven by primes p
//! with p² dividing a group order near q.
//!
//! Everything is deterministic: surveys produce byte-identical reports for
//! any worker count, and the per-prime cache resumes interrupted runs.

pub mod attain;
pub mod cli;
pub mod curves;
pub mod divisors;
pub mod error;
pub mod primes;
pub mod report;
pub mod survey;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
