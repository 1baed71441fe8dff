//! Radial 3D Zakharov system laboratory.
//!
//! The crate implements a sine-spectral discretization of radial functions on
//! R^3, the first-order Zakharov flow with an exact-substep Strang splitting,
//! the cubic NLS ground state and its scaling family, conserved and
//! variational functionals, global/localized virial monitors, Littlewood-Paley
//! analysis with the frequency-region calculus used by the normal form, and
//! trajectory-level diagnostics (Besov norms, scattering and grow-up
//! indicators).
//!
//! Everything is organized around two types: [`RadialField`], a radial complex
//! function sampled on the interior nodes of a truncated domain, and
//! [`State`], a pair `(u, N)` of such fields together with the ion sound speed
//! `alpha` and the current time.

pub mod bilinear;
pub mod cutoff;
pub mod diagnostics;
pub mod evolution;
pub mod field;
pub mod functionals;
pub mod grid;
pub mod ground_state;
pub mod lp;
pub mod regions;
pub mod residual;
pub mod variational;
pub mod virial;

pub use field::{RadialField, Representation};
pub use grid::{make_grid, RadialGrid};

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid needs at least 8 interior nodes, got {0}")]
    GridTooSmall(usize),
    #[error("truncation radius must be positive, got {0}")]
    BadRadius(f64),
    #[error("expected a {expected:?} field, got {got:?}")]
    Representation {
        expected: Representation,
        got: Representation,
    },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("invalid parameter `{name}`: {msg}")]
    InvalidParameter { name: &'static str, msg: String },
    #[error("solver failed: {0}")]
    SolveFailure(String),
    #[error("trajectory has too few samples for this diagnostic")]
    TooFewSamples,
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("cache file rejected: {0}")]
    BadCache(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, msg: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        msg: msg.into(),
    }
}
