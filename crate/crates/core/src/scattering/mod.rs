//! Exact Casimir energy of a perfectly conducting sphere and a second
//! conductor (enclosing shell, outer sphere, or plane) from the round-trip
//! scattering determinant.

mod linalg;
pub mod solver;
pub mod tmatrix;
pub mod translation;

use nalgebra::DMatrix;

use crate::error::{CasimirError, Result};

pub use solver::{
    assemble_n_block, casimir_energy, casimir_energy_extrapolated, casimir_force, casimir_force_extrapolated, logdet_levels, logdet_ratio,
    force_with_error, separation_force, ForceResult,
};
pub use tmatrix::{inverse_amplitude_cavity, tmatrix_conducting_sphere};
pub use translation::translation_blocks;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Configuration {
    /// Sphere inside a spherical shell.
    Interior,
    /// Two spheres outside one another.
    Exterior,
    /// Sphere in front of an infinite plane.
    Plane,
}

/// Sphere of radius `r` and a second conductor described by a signed radius:
/// `r_signed < 0` is an enclosing shell of radius `|r_signed|`, `r_signed > 0`
/// an outer sphere, and `r_signed = +∞` a plane. `a` is the distance between
/// the centers (for the plane, from the sphere center to the plane).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub r: f64,
    pub r_signed: f64,
    pub a: f64,
}

impl Geometry {
    pub fn new(r: f64, r_signed: f64, a: f64) -> Result<Self> {
        let g = Self { r, r_signed, a };
        g.validate()?;
        Ok(g)
    }

    pub fn interior(r: f64, shell_radius: f64, a: f64) -> Result<Self> {
        Self::new(r, -shell_radius.abs(), a)
    }

    pub fn exterior(r: f64, other_radius: f64, a: f64) -> Result<Self> {
        Self::new(r, other_radius, a)
    }

    /// Sphere at surface separation `d` from a plane.
    pub fn plane(r: f64, d: f64) -> Result<Self> {
        Self::new(r, f64::INFINITY, r + d)
    }

    /// Geometry with the given surface separation and the same radii.
    pub fn with_separation(&self, d: f64) -> Result<Self> {
        let a = match self.configuration() {
            Configuration::Interior => -self.r_signed - self.r - d,
            Configuration::Exterior => self.r + self.r_signed + d,
            Configuration::Plane => self.r + d,
        };
        Self::new(self.r, self.r_signed, a)
    }

    pub fn with_displacement(&self, a: f64) -> Result<Self> {
        Self::new(self.r, self.r_signed, a)
    }

    pub fn configuration(&self) -> Configuration {
        if self.r_signed == f64::INFINITY {
            Configuration::Plane
        } else if self.r_signed < 0.0 {
            Configuration::Interior
        } else {
            Configuration::Exterior
        }
    }

    /// Surface-to-surface distance.
    pub fn separation(&self) -> f64 {
        match self.configuration() {
            Configuration::Interior => -self.r_signed - self.r - self.a,
            Configuration::Exterior => self.a - self.r - self.r_signed,
            Configuration::Plane => self.a - self.r,
        }
    }

    /// `r / R_signed`, which is 0 for the plane.
    pub fn radius_ratio(&self) -> f64 {
        self.r / self.r_signed
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0) || !self.r.is_finite() {
            return Err(CasimirError::InvalidInput(format!("sphere radius must be positive, got {}", self.r)));
        }
        if self.r_signed.is_nan() || self.r_signed == 0.0 || self.r_signed == f64::NEG_INFINITY {
            return Err(CasimirError::InvalidInput(format!("invalid signed radius {}", self.r_signed)));
        }
        if !(self.a >= 0.0) || !self.a.is_finite() {
            return Err(CasimirError::InvalidInput(format!("center distance must be >= 0, got {}", self.a)));
        }
        if !(self.separation() > 0.0) {
            return Err(CasimirError::Domain(format!(
                "surfaces overlap: separation {} for r={}, R={}, a={}",
                self.separation(),
                self.r,
                self.r_signed,
                self.a
            )));
        }
        Ok(())
    }
}

/// Partial-wave cutoff, applied as `l, l' ≤ l_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncationSpec {
    pub l_max: u32,
}

impl TruncationSpec {
    pub fn new(l_max: u32) -> Result<Self> {
        if l_max < 1 {
            return Err(CasimirError::InvalidInput("l_max must be at least 1".into()));
        }
        Ok(Self { l_max })
    }

    /// Cutoff of the secondary evaluation used for the truncation error estimate.
    pub fn coarse(&self) -> u32 {
        self.l_max.saturating_sub(10).max(self.l_max / 2).max(1)
    }
}

/// The round-trip operator for one azimuthal index at one frequency.
///
/// `matrix` is the diagonally rescaled operator `D^{-1} N D`, which has the
/// same determinant and spectrum as `N` but entries of order `e^{-κd}`.
/// Rows and columns are ordered `2(l - max(1,|m|)) + c` with `c = 0` for the
/// magnetic and `c = 1` for the electric channel, so the leading square
/// blocks are the operators at lower cutoffs.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBlock {
    pub m: i32,
    pub kappa: f64,
    pub matrix: DMatrix<f64>,
}

impl SpectralBlock {
    /// `ln det(1 - N)` of this block alone.
    pub fn ln_det_one_minus(&self) -> Result<f64> {
        linalg::ln_det_one_minus(self.matrix.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyResult {
    /// In units of ħc/length.
    pub energy: f64,
    /// Quadrature plus truncation error estimate.
    pub error_estimate: f64,
    pub l_max_used: u32,
    pub extrapolated: bool,
}
