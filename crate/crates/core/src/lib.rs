//! Slow quenches through exceptional points of PT-symmetric non-Hermitian
//! two-level Landau-Zener models.
//!
//! The crate integrates the non-unitary Schrodinger equation, evaluates the
//! adiabatic-impulse (freeze-out) predictions for the defect density and
//! builds the exact linear-sweep solution from parabolic cylinder functions.

pub mod ai;
pub mod dynamics;
pub mod error;
pub mod exact;
pub mod model;
pub mod spectral;
pub mod specfun;
pub mod sweep;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
