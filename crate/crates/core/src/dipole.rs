//! Long-wavelength limit: a small anisotropic polarizable particle inside a
//! perfectly conducting spherical cavity, or outside a conducting sphere.
//!
//! The energy is linear in the polarizability tensors,
//!
//! ```text
//! E = 1/(3π R⁴) Σ_P { [f^P(y) - f^P(0)] Tr α^P + g^P(y) (3 α^P_zz - Tr α^P) },
//! ```
//!
//! with `y = a/R` and the lab `z` axis along the displacement. The `f^P(0)`
//! term is dropped outside the sphere, where the reference is `y → ∞`.

use std::f64::consts::PI;

use nalgebra::Matrix3;

use crate::error::{CasimirError, Result};
use crate::quadrature::{integrate_half_line, QuadratureSpec};
use crate::scattering::TruncationSpec;
use crate::specfun::{BesselTable, Polarization};

/// Which side of the conducting sphere the particle is on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Inside a cavity of radius `R`; `0 ≤ a < R`.
    Interior,
    /// Outside a sphere of radius `R`; `a > R`.
    Exterior,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleGeometry {
    pub big_r: f64,
    /// Distance of the particle from the sphere center.
    pub a: f64,
    pub side: Side,
}

impl DipoleGeometry {
    pub fn new(big_r: f64, a: f64, side: Side) -> Result<Self> {
        let g = Self { big_r, a, side };
        g.validate()?;
        Ok(g)
    }

    pub fn interior(big_r: f64, a: f64) -> Result<Self> {
        Self::new(big_r, a, Side::Interior)
    }

    pub fn exterior(big_r: f64, a: f64) -> Result<Self> {
        Self::new(big_r, a, Side::Exterior)
    }

    pub fn y(&self) -> f64 {
        self.a / self.big_r
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.big_r > 0.0) || !self.big_r.is_finite() {
            return Err(CasimirError::InvalidInput(format!("sphere radius must be positive, got {}", self.big_r)));
        }
        if !(self.a >= 0.0) || !self.a.is_finite() {
            return Err(CasimirError::InvalidInput(format!("displacement must be >= 0, got {}", self.a)));
        }
        check_y(self.y(), self.side)
    }
}

fn check_y(y: f64, side: Side) -> Result<()> {
    let ok = match side {
        Side::Interior => (0.0..1.0).contains(&y),
        Side::Exterior => y > 1.0 && y.is_finite(),
    };
    if ok {
        Ok(())
    } else {
        Err(CasimirError::Domain(format!("y = a/R = {y} is outside the {side:?} domain")))
    }
}

/// `f^E, f^M, g^E, g^M` at one `y`, with a combined error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleCoefficients {
    pub y: f64,
    pub f_e: f64,
    pub f_m: f64,
    pub g_e: f64,
    pub g_m: f64,
    /// Quadrature error plus the integrated partial-wave tail.
    pub error: f64,
}

impl DipoleCoefficients {
    pub fn f(&self, p: Polarization) -> f64 {
        match p {
            Polarization::E => self.f_e,
            Polarization::M => self.f_m,
        }
    }

    pub fn g(&self, p: Polarization) -> f64 {
        match p {
            Polarization::E => self.g_e,
            Polarization::M => self.g_m,
        }
    }

    pub fn gf_ratio(&self, p: Polarization) -> f64 {
        self.g(p) / self.f(p)
    }
}

/// Most `y` values evaluated on one shared set of quadrature nodes.
const MAX_JOINT: usize = 4;
const JOINT_WIDTH: usize = 4 * MAX_JOINT + 1;
const TAIL: usize = JOINT_WIDTH - 1;

/// Per-`l` radial factors with the common `e^{2 ln I_λ(xy)}` (or `K`) folded in.
struct RadialTerms {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

#[inline]
fn radial_terms(t: &BesselTable, side: Side, l: i32, z: f64, ln_zeta_offset: f64) -> Option<RadialTerms> {
    let lf = l as f64;
    // λ = l - 1/2, η = l + 1/2, μ = l + 3/2; ratios are taken relative to λ.
    let (ln_lam, r_eta, r_mu) = match side {
        Side::Interior => (t.ln_i(l - 1), t.i_ratio(l - 1), t.i_ratio(l - 1) * t.i_ratio(l)),
        Side::Exterior => (t.ln_k(l - 1), t.k_ratio(l - 1), t.k_ratio(l - 1) * t.k_ratio(l)),
    };
    let w = (2.0 * ln_lam + ln_zeta_offset).exp();
    if w == 0.0 {
        return None;
    }
    let two_l1 = 2.0 * lf + 1.0;
    // (I_λ - I_μ)² = ((2l+1)/z)² I_η², and likewise for K.
    let b = two_l1 / (2.0 * z) * r_eta * r_eta * w;
    Some(RadialTerms {
        a: ((lf + 1.0) + lf * r_mu * r_mu) / (2.0 * z) * w,
        b,
        c: (0.5 * (lf * lf - 1.0) + 0.5 * lf * (lf + 2.0) * r_mu * r_mu - 3.0 * lf * (lf + 1.0) * r_mu)
            / (2.0 * z * two_l1)
            * w,
        d: 0.5 * b,
    })
}

/// Integrand of the four coefficients at each `y` in `ys`, summed over `l`.
/// The last component is a bound on the omitted partial-wave tail.
fn joint_integrand(x: f64, ys: &[f64], side: Side, l_max: i32) -> Result<[f64; JOINT_WIDTH]> {
    let mut out = [0.0; JOINT_WIDTH];
    let gap = ys.iter().map(|y| (1.0 - y).abs()).fold(f64::INFINITY, f64::min);
    if 2.0 * x * gap - 4.0 * x.ln().max(0.0) > 760.0 {
        return Ok(out);
    }
    let x3 = x * x * x;

    let mut l_top = l_max.min(64 + x.ceil() as i32);
    let mut zeta_table = BesselTable::new(x, l_top)?;
    let mut z_tables = ys
        .iter()
        .map(|&y| BesselTable::new(x * y, l_top + 1))
        .collect::<Result<Vec<_>>>()?;

    let mut prev_mag = f64::INFINITY;
    let mut last_mag = 0.0;
    let mut ratio = 1.0;
    let mut l = 1;
    loop {
        if l > l_top {
            if l_top >= l_max {
                break;
            }
            l_top = l_max.min(2 * l_top);
            zeta_table = BesselTable::new(x, l_top)?;
            for (t, &y) in z_tables.iter_mut().zip(ys) {
                *t = BesselTable::new(x * y, l_top + 1)?;
            }
        }
        let (mut ln_ze, ln_zm) = (zeta_table.ln_abs_zeta_e(l)?, zeta_table.ln_zeta_m(l));
        let mut ln_zm = ln_zm;
        if side == Side::Exterior {
            ln_ze = -ln_ze;
            ln_zm = -ln_zm;
        }
        let mut mag = 0.0f64;
        for (k, (t, &y)) in z_tables.iter().zip(ys).enumerate() {
            let z = x * y;
            // Factor e^{ln|ζ^M|} into the radial weight and carry ζ^E / ζ^M separately.
            let Some(rt) = radial_terms(t, side, l, z, ln_zm) else {
                continue;
            };
            let ze_over_zm = -(ln_ze - ln_zm).exp();
            let base = 4 * k;
            let terms = [
                ze_over_zm * rt.a - rt.b,
                rt.a - ze_over_zm * rt.b,
                ze_over_zm * rt.c + rt.d,
                rt.c + ze_over_zm * rt.d,
            ];
            for (j, v) in terms.iter().enumerate() {
                out[base + j] += x3 * v;
                mag = mag.max((x3 * v).abs());
            }
        }
        let sum_mag = out[..TAIL].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        ratio = if prev_mag > 0.0 && prev_mag.is_finite() { mag / prev_mag } else { 1.0 };
        last_mag = mag;
        if l >= 3 && mag < prev_mag && mag <= 1e-17 * sum_mag {
            return Ok(out);
        }
        if sum_mag == 0.0 && mag == 0.0 && l > 3 {
            return Ok(out);
        }
        prev_mag = mag;
        l += 1;
    }
    out[TAIL] = if ratio < 1.0 {
        last_mag * ratio / (1.0 - ratio)
    } else {
        last_mag * l_max as f64
    };
    Ok(out)
}

fn joint_coefficients(ys: &[f64], side: Side, quad: &QuadratureSpec, trunc: &TruncationSpec) -> Result<Vec<DipoleCoefficients>> {
    assert!(!ys.is_empty() && ys.len() <= MAX_JOINT);
    quad.validate()?;
    for &y in ys {
        check_y(y, side)?;
    }
    if side == Side::Interior && ys.iter().all(|&y| y == 0.0) {
        let f_e = f_at_center(Polarization::E, quad)?;
        let f_m = f_at_center(Polarization::M, quad)?;
        return Ok(ys
            .iter()
            .map(|&y| DipoleCoefficients { y, f_e, f_m, g_e: 0.0, g_m: 0.0, error: quad.abs_tol })
            .collect());
    }
    if ys.iter().any(|&y| y == 0.0) {
        return Err(CasimirError::Domain("y = 0 cannot be mixed with other points".into()));
    }
    let gap = ys.iter().map(|y| (1.0 - y).abs()).fold(f64::INFINITY, f64::min);
    let l_max = trunc.l_max as i32;
    let res = integrate_half_line(|x| joint_integrand(x, ys, side, l_max), 1.0 / (2.0 * gap), quad)?;

    let coeffs = &res.value;
    let scale = coeffs[..TAIL].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tail = res.value[TAIL].abs();
    if tail > quad.abs_tol.max(quad.rel_tol * scale) {
        return Err(CasimirError::NonConvergence(format!(
            "partial-wave tail {tail:.3e} exceeds tolerance at l_max={}",
            trunc.l_max
        )));
    }
    let err = res.error[..TAIL].iter().fold(0.0f64, |m, v| m.max(v.abs())) + tail;
    Ok(ys
        .iter()
        .enumerate()
        .map(|(k, &y)| DipoleCoefficients {
            y,
            f_e: coeffs[4 * k],
            f_m: coeffs[4 * k + 1],
            g_e: coeffs[4 * k + 2],
            g_m: coeffs[4 * k + 3],
            error: err,
        })
        .collect())
}

/// Default cutoff of the partial-wave sum.
pub const DEFAULT_DIPOLE_LMAX: u32 = 60;

/// Cutoff large enough for the `|y|^{±2l}` decay of the partial-wave sum at
/// `y`; never below the default.
pub fn dipole_truncation(y: f64) -> TruncationSpec {
    let gap = (1.0 - y).abs().max(1e-6);
    TruncationSpec { l_max: DEFAULT_DIPOLE_LMAX.max((30.0 / gap).ceil().min(1e6) as u32) }
}

/// All four coefficients at one `y`.
pub fn dipole_coefficients(y: f64, side: Side, quad: &QuadratureSpec, trunc: &TruncationSpec) -> Result<DipoleCoefficients> {
    Ok(joint_coefficients(&[y], side, quad, trunc)?[0])
}

pub fn f_coeff(p: Polarization, y: f64, side: Side, quad: &QuadratureSpec, trunc: &TruncationSpec) -> Result<f64> {
    Ok(dipole_coefficients(y, side, quad, trunc)?.f(p))
}

pub fn g_coeff(p: Polarization, y: f64, side: Side, quad: &QuadratureSpec, trunc: &TruncationSpec) -> Result<f64> {
    Ok(dipole_coefficients(y, side, quad, trunc)?.g(p))
}

/// `f^P(0) = (2/π) ∫ x³ ζ^P_1(x) dx`, the self-energy at the cavity center.
pub fn f_at_center(p: Polarization, quad: &QuadratureSpec) -> Result<f64> {
    quad.validate()?;
    let res = integrate_half_line(
        |x| {
            if x > 400.0 {
                return Ok([0.0]);
            }
            let t = BesselTable::new(x, 1)?;
            let (s, ln) = t.zeta(p, 1)?;
            Ok([2.0 / PI * x * x * x * s * ln.exp()])
        },
        0.5,
        quad,
    )?;
    Ok(res.value[0])
}

/// Static electric and magnetic polarizability tensors in the body frame.
/// Both must be diagonal there, i.e. share principal axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizabilityPair {
    pub electric: Matrix3<f64>,
    pub magnetic: Matrix3<f64>,
}

impl PolarizabilityPair {
    pub fn new(electric: Matrix3<f64>, magnetic: Matrix3<f64>) -> Result<Self> {
        for (name, m) in [("electric", &electric), ("magnetic", &magnetic)] {
            if m.iter().any(|v| !v.is_finite()) {
                return Err(CasimirError::InvalidInput(format!("{name} polarizability has non-finite entries")));
            }
            let scale = m.diagonal().amax().max(f64::MIN_POSITIVE);
            let off = (0..3)
                .flat_map(|i| (0..3).filter(move |&j| j != i).map(move |j| (i, j)))
                .fold(0.0f64, |acc, (i, j)| acc.max(m[(i, j)].abs()));
            if off > 1e-12 * scale {
                return Err(CasimirError::InvalidInput(format!(
                    "{name} polarizability must be diagonal in the body frame shared with the other tensor"
                )));
            }
        }
        Ok(Self { electric, magnetic })
    }

    pub fn diagonal(electric: [f64; 3], magnetic: [f64; 3]) -> Result<Self> {
        Self::new(
            Matrix3::from_diagonal(&electric.into()),
            Matrix3::from_diagonal(&magnetic.into()),
        )
    }

    pub fn isotropic(electric: f64, magnetic: f64) -> Result<Self> {
        Self::diagonal([electric; 3], [magnetic; 3])
    }

    /// Perfectly conducting sphere of radius `r`: `α^E = r³`, `α^M = -r³/2`.
    pub fn conducting_sphere(r: f64) -> Result<Self> {
        let r3 = r * r * r;
        Self::isotropic(r3, -0.5 * r3)
    }

    pub fn tensor(&self, p: Polarization) -> &Matrix3<f64> {
        match p {
            Polarization::E => &self.electric,
            Polarization::M => &self.magnetic,
        }
    }

    pub fn anisotropy(&self, p: Polarization) -> AnisotropyParams {
        AnisotropyParams::from_tensor(self.tensor(p))
    }
}

/// `β = α_xx - α_yy` and `γ = α_zz - (α_xx + α_yy)/2` of a body-frame tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnisotropyParams {
    pub beta: f64,
    pub gamma: f64,
}

impl AnisotropyParams {
    pub fn from_tensor(t: &Matrix3<f64>) -> Self {
        Self {
            beta: t[(0, 0)] - t[(1, 1)],
            gamma: t[(2, 2)] - 0.5 * (t[(0, 0)] + t[(1, 1)]),
        }
    }

    /// `3 α_zz - Tr α` in the lab frame for a body at this orientation.
    pub fn orientation_factor(&self, o: &BodyOrientation) -> f64 {
        let s2 = o.theta.sin().powi(2);
        1.5 * self.beta * s2 * (2.0 * o.phi).cos() + self.gamma * (3.0 * o.theta.cos().powi(2) - 1.0)
    }
}

/// Euler angles of the body frame: rotation by `φ` about the body `z` axis
/// followed by `θ` about the lab `y` axis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BodyOrientation {
    pub theta: f64,
    pub phi: f64,
}

impl BodyOrientation {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(CasimirError::InvalidInput(format!("orientation angles must be finite, got ({theta}, {phi})")));
        }
        Ok(Self { theta, phi })
    }

    pub fn rotation(&self) -> Matrix3<f64> {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        let ry = Matrix3::new(ct, 0.0, st, 0.0, 1.0, 0.0, -st, 0.0, ct);
        let rz = Matrix3::new(cp, -sp, 0.0, sp, cp, 0.0, 0.0, 0.0, 1.0);
        ry * rz
    }
}

/// Lab-frame tensor `R α₀ Rᵀ`.
pub fn rotate_polarizability(alpha0: &Matrix3<f64>, orientation: &BodyOrientation) -> Matrix3<f64> {
    let r = orientation.rotation();
    r * alpha0 * r.transpose()
}

fn prefactor(geom: &DipoleGeometry) -> f64 {
    1.0 / (3.0 * PI * geom.big_r.powi(4))
}

fn energy_from(
    geom: &DipoleGeometry,
    c: &DipoleCoefficients,
    f0: Option<(f64, f64)>,
    pol: &PolarizabilityPair,
    orientation: &BodyOrientation,
) -> f64 {
    let mut e = 0.0;
    for p in Polarization::BOTH {
        let lab = rotate_polarizability(pol.tensor(p), orientation);
        let tr = lab.trace();
        let f_ref = match (f0, p) {
            (Some((fe, _)), Polarization::E) => fe,
            (Some((_, fm)), Polarization::M) => fm,
            (None, _) => 0.0,
        };
        e += (c.f(p) - f_ref) * tr + c.g(p) * (3.0 * lab[(2, 2)] - tr);
    }
    prefactor(geom) * e
}

fn center_reference(geom: &DipoleGeometry, quad: &QuadratureSpec) -> Result<Option<(f64, f64)>> {
    match geom.side {
        Side::Interior => Ok(Some((f_at_center(Polarization::E, quad)?, f_at_center(Polarization::M, quad)?))),
        Side::Exterior => Ok(None),
    }
}

/// Energy in units of ħc / length, relative to the particle at the cavity
/// center (interior) or at infinity (exterior).
pub fn dipole_energy(
    geom: &DipoleGeometry,
    pol: &PolarizabilityPair,
    orientation: &BodyOrientation,
    quad: &QuadratureSpec,
    trunc: &TruncationSpec,
) -> Result<f64> {
    geom.validate()?;
    let c = dipole_coefficients(geom.y(), geom.side, quad, trunc)?;
    let f0 = center_reference(geom, quad)?;
    Ok(energy_from(geom, &c, f0, pol, orientation))
}

/// `-∂E/∂a`, positive when pushing the particle away from the center.
///
/// Central differences in `y` with one Richardson step; the four displaced
/// points share quadrature nodes so their errors largely cancel.
pub fn dipole_force(
    geom: &DipoleGeometry,
    pol: &PolarizabilityPair,
    orientation: &BodyOrientation,
    quad: &QuadratureSpec,
    trunc: &TruncationSpec,
) -> Result<f64> {
    geom.validate()?;
    let y = geom.y();
    let h = match geom.side {
        Side::Interior if y == 0.0 => return Ok(0.0),
        Side::Interior => 1e-4 * y.min(1.0 - y),
        Side::Exterior => 1e-4 * (y - 1.0).min(y),
    };
    let ys = [y - 2.0 * h, y - h, y + h, y + 2.0 * h];
    let cs = joint_coefficients(&ys, geom.side, quad, trunc)?;
    let e: Vec<f64> = cs.iter().map(|c| energy_from(geom, c, None, pol, orientation)).collect();
    let d1 = (e[2] - e[1]) / (2.0 * h);
    let d2 = (e[3] - e[0]) / (4.0 * h);
    let de_dy = (4.0 * d1 - d2) / 3.0;
    Ok(-de_dy / geom.big_r)
}

/// Generalized torques `(-∂E/∂θ, -∂E/∂φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleTorque {
    pub theta: f64,
    pub phi: f64,
}

pub fn dipole_torque(
    geom: &DipoleGeometry,
    pol: &PolarizabilityPair,
    orientation: &BodyOrientation,
    quad: &QuadratureSpec,
    trunc: &TruncationSpec,
) -> Result<DipoleTorque> {
    geom.validate()?;
    let c = dipole_coefficients(geom.y(), geom.side, quad, trunc)?;
    Ok(torque_from(geom, &c, pol, orientation))
}

fn torque_from(geom: &DipoleGeometry, c: &DipoleCoefficients, pol: &PolarizabilityPair, o: &BodyOrientation) -> DipoleTorque {
    let (mut t_theta, mut t_phi) = (0.0, 0.0);
    let s2t = (2.0 * o.theta).sin();
    let st2 = o.theta.sin().powi(2);
    for p in Polarization::BOTH {
        let AnisotropyParams { beta, gamma } = pol.anisotropy(p);
        let g = c.g(p);
        t_theta -= g * s2t * (1.5 * beta * (2.0 * o.phi).cos() - 3.0 * gamma);
        t_phi += g * 3.0 * beta * st2 * (2.0 * o.phi).sin();
    }
    let k = prefactor(geom);
    DipoleTorque { theta: k * t_theta, phi: k * t_phi }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrientationClass {
    /// Body `z` axis along the displacement.
    Parallel,
    /// Body `z` axis perpendicular to the displacement, free to spin about it.
    Perpendicular,
    /// Perpendicular, with the azimuth also fixed by `β ≠ 0`.
    PhiLocked,
    /// No orientation dependence.
    Isotropic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientationPreference {
    pub class: OrientationClass,
    /// Minimizing orientation; `phi` is meaningless unless `PhiLocked`.
    pub orientation: BodyOrientation,
}

/// Minimum of the orientation-dependent energy at the given geometry.
pub fn preferred_orientation(
    geom: &DipoleGeometry,
    pol: &PolarizabilityPair,
    quad: &QuadratureSpec,
    trunc: &TruncationSpec,
) -> Result<OrientationPreference> {
    geom.validate()?;
    let c = dipole_coefficients(geom.y(), geom.side, quad, trunc)?;
    Ok(classify_orientation(&c, pol))
}

/// With `B = Σ g·3β/2` and `Γ = Σ g·γ` the orientation energy is
/// `B sin²θ cos2φ + Γ(3cos²θ - 1)`. Minimizing over φ leaves `-|B| s + Γ(2 - 3s)`
/// in `s = sin²θ`, which is linear, so the minimum sits at `θ = 0` or `π/2`.
pub fn classify_orientation(c: &DipoleCoefficients, pol: &PolarizabilityPair) -> OrientationPreference {
    let (mut b, mut gam, mut scale) = (0.0, 0.0, 0.0f64);
    for p in Polarization::BOTH {
        let AnisotropyParams { beta, gamma } = pol.anisotropy(p);
        let g = c.g(p);
        b += g * 1.5 * beta;
        gam += g * gamma;
        scale = scale.max(g.abs() * pol.tensor(p).diagonal().amax());
    }
    let tiny = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let b_zero = b.abs() <= tiny;
    if b_zero && gam.abs() <= tiny {
        return OrientationPreference { class: OrientationClass::Isotropic, orientation: BodyOrientation::default() };
    }
    let slope = -b.abs() - 3.0 * gam;
    if slope > tiny {
        return OrientationPreference { class: OrientationClass::Parallel, orientation: BodyOrientation::default() };
    }
    if b_zero {
        return OrientationPreference {
            class: OrientationClass::Perpendicular,
            orientation: BodyOrientation { theta: PI / 2.0, phi: 0.0 },
        };
    }
    // cos2φ = -sign(B).
    let phi = if b > 0.0 { PI / 2.0 } else { 0.0 };
    OrientationPreference { class: OrientationClass::PhiLocked, orientation: BodyOrientation { theta: PI / 2.0, phi } }
}
