//! Desk-scale computational additive combinatorics.
//!
//! Everything here works on explicit finite abelian groups small enough to
//! enumerate: `F_p^n`, `Z/NZ` and finite products of those. The crate provides
//! Gowers uniformity norms with a naive/fast oracle pair, Fourier analysis
//! (Walsh-Hadamard and DFT), Freiman homomorphism checking and dense models,
//! sumset/covering machinery for approximate groups, Bohr sets and generalised
//! arithmetic progressions, quadratic forms over `F_2` and odd `F_p` with
//! Gauss sums and rank recovery, the two U^3 lifting constructions, and exact
//! Heisenberg group arithmetic with bracket phases.
//!
//! All operations are pure and deterministic; ties are broken by smallest
//! canonical index throughout.

pub mod f2;
pub mod fourier;
pub mod fp;
pub mod freiman;
pub mod gowers;
pub mod group;
pub mod io;
pub mod lift;
pub mod nil;
pub mod progression;
pub mod quadratic;
pub mod sumset;

pub use group::{DenseFn, GroupElem, GroupSet, GroupSpec, Params, PartialMap};

use num::complex::Complex64;

/// Default numerical tolerance for floating-point assertions.
pub const TOL: f64 = 1e-9;

/// Errors shared by every module in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("group mismatch: {0} vs {1}")]
    GroupMismatch(String, String),
    #[error("cardinality {cardinality} exceeds cap {cap}")]
    CardinalityCap { cardinality: u64, cap: u64 },
    #[error("group cardinality overflows a machine word")]
    CardinalityOverflow,
    #[error("index {index} out of range for group of order {order}")]
    IndexOutOfRange { index: u64, order: u64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("size guard: {0}")]
    SizeGuard(String),
    #[error("separation violated: {0}")]
    SeparationViolated(String),
    #[error("verification failure: {0}")]
    VerificationFailure(String),
    #[error("search failure: {0}")]
    SearchFailure(String),
    #[error("map is not a Freiman homomorphism; witness quadruple {0:?}")]
    NotFreiman([u64; 4]),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Extracts the real part of a quantity that is real by construction,
/// asserting the imaginary residue is below tolerance and clamping tiny
/// negative real noise to zero.
pub fn real_nonneg(z: Complex64, context: &str) -> Result<f64> {
    if z.im.abs() >= TOL {
        return Err(Error::VerificationFailure(format!(
            "{context}: imaginary residue {} exceeds tolerance",
            z.im
        )));
    }
    if z.re < -TOL {
        return Err(Error::VerificationFailure(format!(
            "{context}: negative real part {}",
            z.re
        )));
    }
    Ok(z.re.max(0.0))
}
