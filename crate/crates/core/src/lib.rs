//! Pseudo-spectral simulation of the two-dimensional Dirac equation with a
//! Hartree-type (Bessel-screened) self-interaction on a periodic box,
//!
//! ```text
//! i d_t psi = D_m psi + sign * ((b - Delta)^{-1} rho(psi)) gamma0 psi,
//! ```
//!
//! together with Littlewood–Paley/Besov tooling and numerical checks of the
//! conservation laws, growth envelopes and functional inequalities that govern
//! the model.

pub mod diagnostics;
pub mod dirac;
pub mod error;
pub mod evolution;
pub mod exec;
pub mod hartree;
pub mod initial;
pub mod littlewood_paley;
pub mod model;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Execution;
pub use model::Model;
pub use num_complex::Complex64;
pub use spectral::{ComplexField, DensityForm, Exponent, ScalarField, SpectralGrid, SpinorField};
