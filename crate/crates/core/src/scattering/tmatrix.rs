//! Diagonal scattering data of the two conductors.
//!
//! Regular waves are `i_l(κρ) = √(π/2κρ) I_{l+1/2}(κρ)` and outgoing waves are
//! `k_l(κρ) = √(2/πκρ) K_{l+1/2}(κρ)`. In this basis a perfectly conducting
//! sphere of radius r scatters a regular wave into `T^P_l · k_l` with
//! `T^P_l = -(π/2) / ζ^P_l(κr)`, and the shell of radius R returns an outgoing
//! wave from its interior as the regular wave `ρ^P_l · i_l` with
//! `ρ^P_l = -(2/π) ζ^P_l(κR)`. Both are written as (sign, ln|value|) so that
//! the huge and tiny factors can be combined before exponentiation.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2};

use crate::error::{CasimirError, Result};
use crate::specfun::{BesselTable, Polarization};

fn check(l: i32, x: f64) -> Result<()> {
    if l < 1 {
        return Err(CasimirError::Domain(format!("multipole order l={l} must be >= 1")));
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(CasimirError::Domain(format!("argument must be positive, got {x}")));
    }
    Ok(())
}

/// `(sign, ln|T^P_l|)` from a table evaluated at `κr`.
#[inline]
pub fn ln_tmatrix(table: &BesselTable, p: Polarization, l: i32) -> Result<(f64, f64)> {
    let (s, ln_zeta) = table.zeta(p, l)?;
    Ok((-s, FRAC_PI_2.ln() - ln_zeta))
}

/// `(sign, ln|ρ^P_l|)` from a table evaluated at `κ|R|`.
#[inline]
pub fn ln_cavity(table: &BesselTable, p: Polarization, l: i32) -> Result<(f64, f64)> {
    let (s, ln_zeta) = table.zeta(p, l)?;
    Ok((-s, FRAC_2_PI.ln() + ln_zeta))
}

/// T-matrix element of a perfectly conducting sphere at imaginary frequency,
/// `kr = κ·r`. For small `kr`, `T^E_1 → 2(kr)³/3` and `T^M_1 → -(kr)³/3`,
/// i.e. static polarizabilities `r³` and `-r³/2`.
pub fn tmatrix_conducting_sphere(l: i32, p: Polarization, kr: f64) -> Result<f64> {
    check(l, kr)?;
    let t = BesselTable::new(kr, l)?;
    let (s, ln) = ln_tmatrix(&t, p, l)?;
    Ok(s * ln.exp())
}

/// Reflection amplitude of the shell seen from inside, `kr = κ|R|`.
///
/// This decays like `e^{-2κ|R|}`; the unscaled value underflows near
/// `κ|R| ≈ 350`, where a singularity error is returned. Use [`ln_cavity`]
/// for the logarithmic form.
pub fn inverse_amplitude_cavity(l: i32, p: Polarization, kr: f64) -> Result<f64> {
    check(l, kr)?;
    let t = BesselTable::new(kr, l)?;
    let (s, ln) = ln_cavity(&t, p, l)?;
    let v = s * ln.exp();
    if v == 0.0 || !v.is_finite() {
        return Err(CasimirError::Singularity(format!(
            "cavity amplitude out of range at l={l}, kR={kr} (ln|ρ| = {ln})"
        )));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn low_frequency_polarizabilities() {
        let x = 1e-3;
        let te = tmatrix_conducting_sphere(1, Polarization::E, x).unwrap();
        let tm = tmatrix_conducting_sphere(1, Polarization::M, x).unwrap();
        assert_relative_eq!(te / (2.0 * x.powi(3) / 3.0), 1.0, max_relative = 1e-5);
        assert_relative_eq!(tm / (2.0 * x.powi(3) / 3.0), -0.5, max_relative = 1e-5);
    }

    #[test]
    fn cavity_decays_exponentially() {
        let t1 = BesselTable::new(200.0, 5).unwrap();
        let t2 = BesselTable::new(400.0, 5).unwrap();
        let (_, a) = ln_cavity(&t1, Polarization::M, 3).unwrap();
        let (_, b) = ln_cavity(&t2, Polarization::M, 3).unwrap();
        assert_relative_eq!(b - a, -400.0, max_relative = 1e-3);
        assert!(inverse_amplitude_cavity(3, Polarization::E, 500.0).is_err());
        assert!(inverse_amplitude_cavity(3, Polarization::E, 10.0).unwrap() > 0.0);
        assert!(inverse_amplitude_cavity(3, Polarization::M, 10.0).unwrap() < 0.0);
    }

    #[test]
    fn product_of_shell_and_sphere_amplitudes_is_a_zeta_ratio() {
        let (r, big_r, kappa) = (0.3, 1.0, 2.0);
        for p in Polarization::BOTH {
            let rho = inverse_amplitude_cavity(4, p, kappa * big_r).unwrap();
            let t = tmatrix_conducting_sphere(4, p, kappa * r).unwrap();
            let (zr, zs) = match p {
                Polarization::M => (crate::specfun::zeta_m(4, kappa * big_r), crate::specfun::zeta_m(4, kappa * r)),
                Polarization::E => (crate::specfun::zeta_e(4, kappa * big_r), crate::specfun::zeta_e(4, kappa * r)),
            };
            assert_relative_eq!(rho * t, zr.unwrap() / zs.unwrap(), max_relative = 1e-13);
        }
    }
}
