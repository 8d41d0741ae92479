//! Proximity force approximation for two spherical surfaces.
//!
//! With the signed radius convention (`R < 0` for an enclosing shell,
//! `R = ∞` for a plane) the leading force is
//! `F = -(π³/360) rR/(r+R) / d³` and the surface-integral construction gives
//! two first-order correction coefficients, depending on whether the
//! expansion parameter is `d/r` or `d/R`.

use std::f64::consts::PI;

use crate::analysis::{fit_force_expansion, FitResult, FitWindow, SeriesSample};
use crate::error::{CasimirError, Result};
use crate::quadrature::QuadratureSpec;
use crate::scattering::{casimir_force_extrapolated, force_with_error, Geometry, TruncationSpec};

/// `rR/(r+R)`, finite in the plane limit.
fn effective_radius(r: f64, r_signed: f64) -> Result<f64> {
    if r_signed.is_infinite() && r_signed > 0.0 {
        return Ok(r);
    }
    let sum = r + r_signed;
    if sum.abs() <= 1e-12 * r.abs().max(r_signed.abs()) {
        return Err(CasimirError::DegenerateGeometry(format!(
            "r + R = 0 (concentric surfaces, r={r}, R={r_signed})"
        )));
    }
    Ok(r * r_signed / sum)
}

/// Leading PFA force (ħc = 1); negative means attractive.
pub fn pfa_leading_force(r: f64, r_signed: f64, d: f64) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(CasimirError::Domain(format!("separation must be positive, got {d}")));
    }
    if !(r > 0.0) || r_signed.is_nan() || r_signed == 0.0 {
        return Err(CasimirError::InvalidInput(format!("invalid radii r={r}, R={r_signed}")));
    }
    Ok(-PI.powi(3) / 360.0 * effective_radius(r, r_signed)? / d.powi(3))
}

fn check_ratio(x: f64) -> Result<()> {
    if !(x > -1.0) || !x.is_finite() {
        return Err(CasimirError::Domain(format!("radius ratio r/R = {x} must exceed -1")));
    }
    Ok(())
}

/// First PFA correction in powers of `d/r`: `-(x + x/(1+x) + 3)`, `x = r/R`.
pub fn theta1_pfa_r(x: f64) -> Result<f64> {
    check_ratio(x)?;
    Ok(-(x + x / (1.0 + x) + 3.0))
}

/// First PFA correction in powers of `d/R`: `-(3x + x/(1+x) + 1)`.
pub fn theta1_pfa_big_r(x: f64) -> Result<f64> {
    check_ratio(x)?;
    Ok(-(3.0 * x + x / (1.0 + x) + 1.0))
}

/// `F_PFA · (1 + θ₁ d/(2r) - θ₂ d²/(2r)²)`.
pub fn pfa_corrected_force(r: f64, r_signed: f64, d: f64, theta1: f64, theta2: f64) -> Result<f64> {
    let u = d / (2.0 * r);
    Ok(pfa_leading_force(r, r_signed, d)? * (1.0 + theta1 * u - theta2 * u * u))
}

/// Sphere of radius `r` at separation `d` from a second surface of
/// curvature ratio `x = r/R`: a shell for `x < 0`, the plane for `x = 0`
/// and an outer sphere for `x > 0`.
pub fn geometry_for_ratio(x: f64, r: f64, d: f64) -> Result<Geometry> {
    check_ratio(x)?;
    if x == 0.0 {
        Geometry::plane(r, d)
    } else if x < 0.0 {
        let shell = r / -x;
        Geometry::interior(r, shell, shell - r - d)
    } else {
        let other = r / x;
        Geometry::exterior(r, other, r + other + d)
    }
}

/// How each force sample is converged in the multipole cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceSampling {
    pub trunc: TruncationSpec,
    /// Spacing of the six cutoffs used for `l → ∞` extrapolation; 0 uses
    /// the force at `trunc.l_max` directly.
    pub l_step: u32,
    pub quad: QuadratureSpec,
}

/// `-∂E/∂d` at each separation, as samples with abscissa `d`.
pub fn separation_force_samples(x: f64, r: f64, separations: &[f64], sampling: &ForceSampling) -> Result<Vec<SeriesSample>> {
    separations
        .iter()
        .map(|&d| {
            let geom = geometry_for_ratio(x, r, d)?;
            let f = if sampling.l_step == 0 {
                force_with_error(&geom, &sampling.trunc, &sampling.quad)?
            } else {
                casimir_force_extrapolated(&geom, &sampling.trunc, sampling.l_step, &sampling.quad)?.0
            };
            Ok(SeriesSample { abscissa: d, value: f.separation_force, sigma: f.error_estimate })
        })
        .collect()
}

/// θ₁ and θ₂ at curvature ratio `x` from exact forces at the given
/// separations; also returns the force samples.
pub fn extract_theta1(
    x: f64,
    r: f64,
    separations: &[f64],
    sampling: &ForceSampling,
    window: &FitWindow,
) -> Result<(FitResult, Vec<SeriesSample>)> {
    let samples = separation_force_samples(x, r, separations, sampling)?;
    let r_signed = if x == 0.0 { f64::INFINITY } else { r / x };
    let fit = fit_force_expansion(&samples, r, r_signed, window)?;
    Ok((fit, samples))
}
