//! Electromagnetic Casimir interaction of a compact object inside or outside
//! a perfectly conducting spherical shell.
//!
//! Units: ħ = c = 1 throughout, lengths in whatever unit the caller chooses.
//! Energies are returned in units of ħc/length.

pub mod analysis;
pub mod dataset;
pub mod dipole;
pub mod error;
pub mod pfa;
pub mod quadrature;
pub mod scattering;
pub mod specfun;
pub mod wigner;

pub use error::{CasimirError, ErrorCategory, Result};
pub use quadrature::QuadratureSpec;
pub use scattering::{Configuration, EnergyResult, Geometry, SpectralBlock, TruncationSpec};
pub use specfun::Polarization;
