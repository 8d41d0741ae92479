//! Round-trip operator, log-determinants and the frequency integral.
//!
//! For the interior configuration `N = ρ W T V`, with `ρ` the shell
//! reflection, `T` the sphere T-matrix, `V = [[A, B], [B, A]]` and
//! `W = [[A, -B], [-B, A]]` regular translations by `κa`. The exterior case has
//! the same form with `ρ` replaced by the T-matrix of the second sphere and
//! outgoing translations. The plane is treated by images:
//! `N_{jl} = T_j U_{jl}(2κa) s_l` with `s^M_l = (-1)^{l+m}`, `s^E_l = -(-1)^{l+m}`.
//!
//! Before any exponentiation the operator is rescaled as `D^{-1} N D` with
//! `D = |ρ|^{1/2}` (or `|T|^{1/2}`), so every entry is a single exponential of
//! a sum of logarithms times an order-one mantissa.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::linalg::ln_det_one_minus;
use super::tmatrix::{ln_cavity, ln_tmatrix};
use super::translation::{RadialRatios, TranslationBlock, WaveKind};
use super::{Configuration, EnergyResult, Geometry, SpectralBlock, TruncationSpec};
use crate::error::{CasimirError, Result};
use crate::quadrature::{integrate_half_line, QuadratureSpec};
use crate::specfun::{BesselTable, Polarization};
use crate::wigner::GauntTable;

/// Beyond this value of `2κd` every round trip is below `e^{-100}`.
const KAPPA_CUTOFF: f64 = 100.0;
const MAX_EXPONENT: f64 = 700.0;

/// Per-channel diagonal data: `sign` and `½ ln|·|`, indexed `[channel][l]`.
struct Diagonal {
    sign: [Vec<f64>; 2],
    half_ln: [Vec<f64>; 2],
    /// `e^{half_ln}`, valid where `|half_ln| < SAFE_EXPONENT`.
    half: [Vec<f64>; 2],
}

const CHANNELS: [Polarization; 2] = [Polarization::M, Polarization::E];

impl Diagonal {
    fn new(x: f64, l_max: u32, f: fn(&BesselTable, Polarization, i32) -> Result<(f64, f64)>) -> Result<Self> {
        let table = BesselTable::new(x, l_max as i32)?;
        let n = l_max as usize + 1;
        let mut sign = [vec![0.0; n], vec![0.0; n]];
        let mut half_ln = [vec![f64::NEG_INFINITY; n], vec![f64::NEG_INFINITY; n]];
        for (c, p) in CHANNELS.iter().enumerate() {
            for l in 1..=l_max as usize {
                let (s, ln) = f(&table, *p, l as i32)?;
                sign[c][l] = s;
                half_ln[c][l] = 0.5 * ln;
            }
        }
        let half = [half_ln[0].iter().map(|v| v.exp()).collect(), half_ln[1].iter().map(|v| v.exp()).collect()];
        Ok(Self { sign, half_ln, half })
    }
}

/// Everything shared by the azimuthal blocks at one frequency.
struct FrequencyContext {
    config: Configuration,
    l_max: u32,
    gaunt: std::sync::Arc<GauntTable>,
    radial: Option<RadialRatios>,
    /// Shell reflection (interior) or second-sphere T-matrix (exterior).
    outer: Option<Diagonal>,
    sphere: Diagonal,
}

impl FrequencyContext {
    fn new(geom: &Geometry, kappa: f64, l_max: u32) -> Result<Self> {
        geom.validate()?;
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(CasimirError::Domain(format!("frequency must be positive, got {kappa}")));
        }
        if l_max < 1 {
            return Err(CasimirError::InvalidInput("l_max must be at least 1".into()));
        }
        let config = geom.configuration();
        let gaunt = GauntTable::shared(l_max + 1);
        let n_top = 2 * l_max + 2;
        let radial = match config {
            Configuration::Interior if geom.a == 0.0 => None,
            Configuration::Interior => Some(RadialRatios::new(WaveKind::Regular, kappa * geom.a, n_top)?),
            Configuration::Exterior => Some(RadialRatios::new(WaveKind::Outgoing, kappa * geom.a, n_top)?),
            Configuration::Plane => Some(RadialRatios::new(WaveKind::Outgoing, 2.0 * kappa * geom.a, n_top)?),
        };
        let outer = match config {
            Configuration::Interior => Some(Diagonal::new(kappa * geom.r_signed.abs(), l_max, ln_cavity)?),
            Configuration::Exterior => Some(Diagonal::new(kappa * geom.r_signed, l_max, ln_tmatrix)?),
            Configuration::Plane => None,
        };
        let sphere = Diagonal::new(kappa * geom.r, l_max, ln_tmatrix)?;
        Ok(Self {
            config,
            l_max,
            gaunt,
            radial,
            outer,
            sphere,
        })
    }

    fn translation(&self, m: u32) -> TranslationBlock {
        match &self.radial {
            Some(r) => TranslationBlock::new(&self.gaunt, r, m, self.l_max),
            None => TranslationBlock::identity(m, self.l_max),
        }
    }

    /// Rescaled round-trip operator for azimuthal index `m ≥ 0`.
    fn block(&self, m: u32) -> Result<DMatrix<f64>> {
        let tb = self.translation(m);
        match self.config {
            Configuration::Interior | Configuration::Exterior => {
                let outer = self.outer.as_ref().expect("two-body configuration");
                let (w, v) = two_body_factors(&tb, outer, &self.sphere)?;
                Ok(w * v)
            }
            Configuration::Plane => plane_operator(&tb, &self.sphere),
        }
    }

    /// `ln det(1 - N_m)` minus its value at zero displacement, for every
    /// cutoff in `levels` (each ≤ l_max).
    fn block_logdets(&self, m: u32, levels: &[u32]) -> Result<Vec<f64>> {
        let l_min = m.max(1);
        let mut out = vec![0.0; levels.len()];
        if levels.iter().all(|&lk| lk < l_min) {
            return Ok(out);
        }
        let tb = self.translation(m);
        let factors = match self.config {
            Configuration::Interior | Configuration::Exterior => {
                Some(two_body_factors(&tb, self.outer.as_ref().expect("two-body"), &self.sphere)?)
            }
            Configuration::Plane => None,
        };
        let plane = match self.config {
            Configuration::Plane => Some(plane_operator(&tb, &self.sphere)?),
            _ => None,
        };
        for (slot, &lk) in out.iter_mut().zip(levels) {
            if lk < l_min {
                continue;
            }
            let k = 2 * (lk - l_min + 1) as usize;
            let n = match (&factors, &plane) {
                (Some((w, v)), _) => w.view((0, 0), (k, k)) * v.view((0, 0), (k, k)),
                (None, Some(p)) => p.view((0, 0), (k, k)).into_owned(),
                _ => unreachable!(),
            };
            let mut ld = ln_det_one_minus(n)?;
            if self.config == Configuration::Interior {
                ld -= self.concentric_logdet(l_min, lk);
            }
            *slot = ld;
        }
        Ok(out)
    }

    /// `ln det(1 - ρT)` of the concentric configuration.
    fn concentric_logdet(&self, l_min: u32, l_top: u32) -> f64 {
        let outer = self.outer.as_ref().expect("interior");
        let mut acc = 0.0;
        for l in l_min as usize..=l_top as usize {
            for c in 0..2 {
                let x = outer.sign[c][l]
                    * self.sphere.sign[c][l]
                    * (2.0 * (outer.half_ln[c][l] + self.sphere.half_ln[c][l])).exp();
                acc += (-x).ln_1p();
            }
        }
        acc
    }
}

#[inline]
fn scaled(e: f64) -> Result<f64> {
    if e > MAX_EXPONENT {
        return Err(CasimirError::Overflow(format!(
            "round-trip entry exponent {e:.1} exceeds the representable range"
        )));
    }
    Ok(e.exp())
}

/// Below this magnitude three exponentials can be multiplied without
/// leaving the double range.
const SAFE_EXPONENT: f64 = 230.0;

/// `e^{a + b + c}` given the separate factors `e^a, e^b, e^c`.
#[inline]
fn exp_sum3(a: f64, b: f64, c: f64, ea: f64, eb: f64, ec: f64) -> Result<f64> {
    if a.abs() < SAFE_EXPONENT && b.abs() < SAFE_EXPONENT && c.abs() < SAFE_EXPONENT {
        Ok(ea * eb * ec)
    } else {
        scaled(a + b + c)
    }
}

/// `S_X W̃ S_Y` and `Ṽ` with `Ñ = (S_X W̃ S_Y) Ṽ`.
fn two_body_factors(tb: &TranslationBlock, x: &Diagonal, y: &Diagonal) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = tb.len();
    let l_min = tb.l_min as usize;
    let mut w = DMatrix::zeros(2 * n, 2 * n);
    let mut v = DMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        let lj = l_min + j;
        for i in 0..n {
            let li = l_min + i;
            let (a_ij, b_ij, s_ij) = (tb.a_hat[(i, j)], tb.b_hat[(i, j)], tb.ln_scale[(i, j)]);
            let es = tb.scale[(i, j)];
            for c1 in 0..2 {
                for c2 in 0..2 {
                    let same = c1 == c2;
                    let ew = exp_sum3(x.half_ln[c1][li], y.half_ln[c2][lj], s_ij, x.half[c1][li], y.half[c2][lj], es)?;
                    let mw = if same { a_ij } else { -b_ij };
                    w[(2 * i + c1, 2 * j + c2)] = x.sign[c1][li] * ew * mw * y.sign[c2][lj];
                    let ev = exp_sum3(y.half_ln[c1][li], x.half_ln[c2][lj], s_ij, y.half[c1][li], x.half[c2][lj], es)?;
                    let mv = if same { a_ij } else { b_ij };
                    v[(2 * i + c1, 2 * j + c2)] = ev * mv;
                }
            }
        }
    }
    Ok((w, v))
}

/// Rescaled image-method operator `|T|^{-1/2} T U s |T|^{1/2}` for the plane.
fn plane_operator(tb: &TranslationBlock, t: &Diagonal) -> Result<DMatrix<f64>> {
    let n = tb.len();
    let l_min = tb.l_min as usize;
    let m = tb.m as usize;
    let parity = |l: usize| if (l + m) % 2 == 0 { 1.0 } else { -1.0 };
    // outgoing waves carry f_l = (-1)^l k_l, so T^f_l = (-1)^l T_l
    let t_sign = |c: usize, l: usize| t.sign[c][l] * if l % 2 == 0 { 1.0 } else { -1.0 };
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        let lj = l_min + j;
        for i in 0..n {
            let li = l_min + i;
            let (a_ij, b_ij, s_ij) = (tb.a_hat[(i, j)], tb.b_hat[(i, j)], tb.ln_scale[(i, j)]);
            let es = tb.scale[(i, j)];
            for c1 in 0..2 {
                for c2 in 0..2 {
                    let e = exp_sum3(t.half_ln[c1][li], t.half_ln[c2][lj], s_ij, t.half[c1][li], t.half[c2][lj], es)?;
                    let mant = if c1 == c2 { a_ij } else { b_ij };
                    let image = if c2 == 0 { parity(lj) } else { -parity(lj) };
                    out[(2 * i + c1, 2 * j + c2)] = t_sign(c1, li) * e * mant * image;
                }
            }
        }
    }
    Ok(out)
}

/// The rescaled round-trip operator `D^{-1} N_m D` for one azimuthal index.
pub fn assemble_n_block(geom: &Geometry, m: i32, kappa: f64, trunc: &TruncationSpec) -> Result<SpectralBlock> {
    let l_max = trunc.l_max;
    if m.unsigned_abs() > l_max {
        return Err(CasimirError::InvalidInput(format!("|m|={} exceeds l_max={l_max}", m.unsigned_abs())));
    }
    let ctx = FrequencyContext::new(geom, kappa, l_max)?;
    let mut matrix = ctx.block(m.unsigned_abs())?;
    if m < 0 {
        // m -> -m flips the sign of the polarization-mixing entries, a
        // similarity transform by diag(1, -1) over the channels
        for j in 0..matrix.ncols() {
            for i in 0..matrix.nrows() {
                if i % 2 != j % 2 {
                    matrix[(i, j)] = -matrix[(i, j)];
                }
            }
        }
    }
    Ok(SpectralBlock { m, kappa, matrix })
}

/// `Σ_m [ln det(1 - N_m(a)) - ln det(1 - N_m(0))]` at each cutoff in `levels`.
/// The subtraction applies to the interior configuration only; exterior and
/// plane results are relative to infinite separation.
pub fn logdet_levels(geom: &Geometry, kappa: f64, levels: &[u32]) -> Result<Vec<f64>> {
    let l_max = *levels.iter().max().ok_or_else(|| CasimirError::InvalidInput("no cutoffs given".into()))?;
    if geom.configuration() == Configuration::Interior && geom.a == 0.0 {
        geom.validate()?;
        return Ok(vec![0.0; levels.len()]);
    }
    if 2.0 * kappa * geom.separation() > KAPPA_CUTOFF {
        geom.validate()?;
        return Ok(vec![0.0; levels.len()]);
    }
    let ctx = FrequencyContext::new(geom, kappa, l_max)?;
    let per_m: Vec<Vec<f64>> = (0..=l_max)
        .into_par_iter()
        .map(|m| ctx.block_logdets(m, levels))
        .collect::<Result<_>>()?;
    let mut total = vec![0.0; levels.len()];
    for (m, v) in per_m.iter().enumerate() {
        let weight = if m == 0 { 1.0 } else { 2.0 };
        for (t, x) in total.iter_mut().zip(v) {
            *t += weight * x;
        }
    }
    Ok(total)
}

pub fn logdet_ratio(geom: &Geometry, kappa: f64, trunc: &TruncationSpec) -> Result<f64> {
    Ok(logdet_levels(geom, kappa, &[trunc.l_max])?[0])
}

fn kappa_scale(geom: &Geometry) -> f64 {
    1.0 / geom.separation()
}

/// `(1/2π) ∫ dκ Σ_m ln det` at the given cutoffs.
fn integrate_levels<const N: usize>(geom: &Geometry, levels: [u32; N], quad: &QuadratureSpec) -> Result<([f64; N], [f64; N])> {
    if geom.configuration() == Configuration::Interior && geom.a == 0.0 {
        geom.validate()?;
        return Ok(([0.0; N], [0.0; N]));
    }
    let r = integrate_half_line(
        |kappa| {
            let v = logdet_levels(geom, kappa, &levels)?;
            let mut out = [0.0; N];
            for (o, x) in out.iter_mut().zip(v) {
                *o = x / (2.0 * PI);
            }
            Ok(out)
        },
        kappa_scale(geom),
        quad,
    )?;
    Ok((r.value, r.error))
}

/// Casimir energy in units of ħc/length. The error estimate adds the
/// quadrature error and the change from a coarser cutoff.
pub fn casimir_energy(geom: &Geometry, trunc: &TruncationSpec, quad: &QuadratureSpec) -> Result<EnergyResult> {
    TruncationSpec::new(trunc.l_max)?;
    let levels = [trunc.l_max, trunc.coarse()];
    let (v, e) = integrate_levels(geom, levels, quad)?;
    Ok(EnergyResult {
        energy: v[0],
        error_estimate: e[0] + if trunc.l_max > 1 { (v[0] - v[1]).abs() } else { v[0].abs() },
        l_max_used: trunc.l_max,
        extrapolated: false,
    })
}

/// Energies at `l_max, l_max-step, …` (six cutoffs) from one quadrature,
/// extrapolated to `l → ∞`.
pub fn casimir_energy_extrapolated(
    geom: &Geometry,
    trunc: &TruncationSpec,
    step: u32,
    quad: &QuadratureSpec,
) -> Result<(EnergyResult, Vec<(u32, f64)>)> {
    let levels = extrapolation_levels(trunc, step)?;
    let (v, e) = integrate_levels(geom, levels, quad)?;
    let (series, e_inf, sigma) = extrapolate_series(levels, v, e)?;
    Ok((
        EnergyResult {
            energy: e_inf,
            error_estimate: sigma + e[EXTRAP_LEVELS - 1],
            l_max_used: trunc.l_max,
            extrapolated: true,
        },
        series,
    ))
}

const EXTRAP_LEVELS: usize = 6;

fn extrapolation_levels(trunc: &TruncationSpec, step: u32) -> Result<[u32; EXTRAP_LEVELS]> {
    let n = EXTRAP_LEVELS as u32;
    let step = step.max(1);
    if trunc.l_max <= step * (n - 1) {
        return Err(CasimirError::InvalidInput(format!(
            "l_max={} too small for {n} cutoffs spaced by {step}",
            trunc.l_max
        )));
    }
    let mut levels = [0u32; EXTRAP_LEVELS];
    for (k, l) in levels.iter_mut().enumerate() {
        *l = trunc.l_max - step * (n - 1 - k as u32);
    }
    Ok(levels)
}

fn extrapolate_series(
    levels: [u32; EXTRAP_LEVELS],
    v: [f64; EXTRAP_LEVELS],
    e: [f64; EXTRAP_LEVELS],
) -> Result<(Vec<(u32, f64)>, f64, f64)> {
    let series: Vec<(u32, f64)> = levels.iter().copied().zip(v.iter().copied()).collect();
    let samples: Vec<crate::analysis::SeriesSample> = series
        .iter()
        .map(|&(l, x)| crate::analysis::SeriesSample::new(l as f64, x, e[0].max(f64::EPSILON * x.abs())))
        .collect();
    let (x_inf, sigma) = crate::analysis::extrapolate_multipole(&samples)?;
    Ok((series, x_inf, sigma))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceResult {
    /// `-∂E/∂a`, positive when the energy decreases with the center distance.
    pub force: f64,
    pub error_estimate: f64,
    /// `-∂E/∂d` with d the surface separation; negative for attraction.
    pub separation_force: f64,
}

/// `-dE/da` by Richardson-extrapolated central differences with step
/// `h = min(1e-3·d, 1e-3·a)`, evaluated inside a single frequency integral.
pub fn force_with_error(geom: &Geometry, trunc: &TruncationSpec, quad: &QuadratureSpec) -> Result<ForceResult> {
    TruncationSpec::new(trunc.l_max)?;
    geom.validate()?;
    let sep_sign = match geom.configuration() {
        Configuration::Interior => -1.0,
        _ => 1.0,
    };
    if geom.configuration() == Configuration::Interior && geom.a == 0.0 {
        return Ok(ForceResult {
            force: 0.0,
            error_estimate: 0.0,
            separation_force: 0.0,
        });
    }
    let levels = [trunc.l_max, trunc.coarse()];
    let (v, e) = force_levels(geom, levels, quad)?;
    let force = v[0];
    let err = e[0] + if trunc.l_max > 1 { (v[0] - v[1]).abs() } else { force.abs() };
    Ok(ForceResult {
        force,
        error_estimate: err,
        separation_force: sep_sign * force,
    })
}

/// `-dE/da` at each cutoff in `levels`, with quadrature errors.
fn force_levels<const N: usize>(geom: &Geometry, levels: [u32; N], quad: &QuadratureSpec) -> Result<([f64; N], [f64; N])> {
    let d = geom.separation();
    let h = (1e-3 * d).min(1e-3 * geom.a);
    let shifted = |k: f64| geom.with_displacement(geom.a + k * h);
    let g = [shifted(1.0)?, shifted(-1.0)?, shifted(2.0)?, shifted(-2.0)?];
    let r = integrate_half_line(
        |kappa| {
            let mut ld = [[0.0; N]; 4];
            for (slot, gk) in ld.iter_mut().zip(g.iter()) {
                let v = logdet_levels(gk, kappa, &levels)?;
                slot.copy_from_slice(&v);
            }
            let mut out = [0.0; N];
            for (lvl, o) in out.iter_mut().enumerate() {
                let d1 = (ld[0][lvl] - ld[1][lvl]) / (2.0 * h);
                let d2 = (ld[2][lvl] - ld[3][lvl]) / (4.0 * h);
                *o = -(4.0 * d1 - d2) / 3.0 / (2.0 * PI);
            }
            Ok(out)
        },
        kappa_scale(geom),
        quad,
    )?;
    Ok((r.value, r.error))
}

/// Forces at `l_max, l_max-step, …` (six cutoffs) from one quadrature,
/// extrapolated to `l → ∞`.
pub fn casimir_force_extrapolated(
    geom: &Geometry,
    trunc: &TruncationSpec,
    step: u32,
    quad: &QuadratureSpec,
) -> Result<(ForceResult, Vec<(u32, f64)>)> {
    geom.validate()?;
    let levels = extrapolation_levels(trunc, step)?;
    let sep_sign = match geom.configuration() {
        Configuration::Interior => -1.0,
        _ => 1.0,
    };
    if geom.configuration() == Configuration::Interior && geom.a == 0.0 {
        let zero = ForceResult { force: 0.0, error_estimate: 0.0, separation_force: 0.0 };
        return Ok((zero, levels.iter().map(|&l| (l, 0.0)).collect()));
    }
    let (v, e) = force_levels(geom, levels, quad)?;
    let (series, f_inf, sigma) = extrapolate_series(levels, v, e)?;
    Ok((
        ForceResult { force: f_inf, error_estimate: sigma + e[EXTRAP_LEVELS - 1], separation_force: sep_sign * f_inf },
        series,
    ))
}

/// `-dE/da`; see [`force_with_error`].
pub fn casimir_force(geom: &Geometry, trunc: &TruncationSpec, quad: &QuadratureSpec) -> Result<f64> {
    Ok(force_with_error(geom, trunc, quad)?.force)
}

/// `-dE/dd` with d the surface separation (negative for attraction).
pub fn separation_force(geom: &Geometry, trunc: &TruncationSpec, quad: &QuadratureSpec) -> Result<f64> {
    Ok(force_with_error(geom, trunc, quad)?.separation_force)
}
