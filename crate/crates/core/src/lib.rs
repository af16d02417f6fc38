//! Numerics for ruling out elliptic curves over Q whose mod-p image lies in
//! the normaliser of a non-split Cartan subgroup: finite-field arithmetic,
//! cube character sums, their partial sums, explicit height and unit bounds,
//! q-expansions of the relevant modular units, and a reduction sieve over
//! the remaining candidate j-invariants.

pub mod bounds;
pub mod cache;
pub mod char_sums;
pub mod error;
pub mod fft;
pub mod field;
pub mod partial_sums;
pub mod primes;
pub mod runner;
pub mod sieve;
pub mod units;

pub use error::{Error, Result};
