//! Least-squares fits and partial-wave extrapolation.
//!
//! All three curve fits are linear in their parameters and are solved through
//! an SVD of the weighted design matrix. When every sample carries a positive
//! sigma the fit is inverse-variance weighted and the covariance is
//! `(JᵀWJ)⁻¹`; otherwise it is unweighted and the covariance is scaled by the
//! residual variance.

use nalgebra::{DMatrix, DVector};

use crate::error::{CasimirError, Result};
use crate::pfa::pfa_leading_force;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSample {
    pub abscissa: f64,
    pub value: f64,
    /// One-sigma uncertainty; zero means unknown.
    pub sigma: f64,
}

impl SeriesSample {
    pub fn new(abscissa: f64, value: f64, sigma: f64) -> Self {
        Self { abscissa, value, sigma }
    }

    pub fn exact(abscissa: f64, value: f64) -> Self {
        Self::new(abscissa, value, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    /// `F/F_PFA = 1 + θ₁ u - θ₂ u²`, `u = d/(2r)`.
    ForceExpansion,
    /// `θ₁(x) = -(k₁ x + k₂ x/(1+x) + k₃)`.
    Theta1Curve,
    /// `g/f = c₁ (1-x) + c₂ (1-x)²`.
    GfRatio,
}

impl FitModel {
    pub fn name(self) -> &'static str {
        match self {
            FitModel::ForceExpansion => "force_expansion",
            FitModel::Theta1Curve => "theta1_curve",
            FitModel::GfRatio => "gf_ratio",
        }
    }

    pub fn parameter_names(self) -> &'static [&'static str] {
        match self {
            FitModel::ForceExpansion => &["theta1", "theta2"],
            FitModel::Theta1Curve => &["k1", "k2", "k3"],
            FitModel::GfRatio => &["c1", "c2"],
        }
    }

    fn basis(self, x: f64) -> Vec<f64> {
        match self {
            FitModel::ForceExpansion => vec![x, -x * x],
            FitModel::Theta1Curve => vec![-x, -x / (1.0 + x), -1.0],
            FitModel::GfRatio => vec![1.0 - x, (1.0 - x) * (1.0 - x)],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: FitModel,
    pub coefficients: Vec<f64>,
    /// Statistical one-sigma uncertainties from the fit covariance.
    pub uncertainties: Vec<f64>,
    /// Spread of the coefficients under refits on sub-windows (zero if not
    /// computed).
    pub systematic: Vec<f64>,
    /// Weighted residual 2-norm.
    pub residual_norm: f64,
    /// Largest absolute unweighted residual.
    pub max_residual: f64,
    pub samples: usize,
}

impl FitResult {
    /// Model prediction at `x` (for the force expansion, of `F/F_PFA - 1` at `u = x`).
    pub fn evaluate(&self, x: f64) -> f64 {
        self.model
            .basis(x)
            .iter()
            .zip(&self.coefficients)
            .map(|(b, c)| b * c)
            .sum()
    }

    pub fn coefficient(&self, name: &str) -> Option<(f64, f64)> {
        let idx = self.model.parameter_names().iter().position(|n| *n == name)?;
        Some((self.coefficients[idx], self.uncertainties[idx]))
    }

    /// Statistical and systematic uncertainty added in quadrature.
    pub fn total_uncertainty(&self, idx: usize) -> f64 {
        self.uncertainties[idx].hypot(self.systematic.get(idx).copied().unwrap_or(0.0))
    }
}

struct LinearFit {
    coef: Vec<f64>,
    sigma: Vec<f64>,
    residual_norm: f64,
    max_residual: f64,
}

const MAX_CONDITION: f64 = 1e12;

/// Weighted linear least squares `y ≈ X β`.
fn linear_lsq(rows: &[Vec<f64>], y: &[f64], sigma: &[f64]) -> Result<LinearFit> {
    let n = rows.len();
    let p = rows.first().map_or(0, |r| r.len());
    if n < p || p == 0 {
        return Err(CasimirError::IllConditioned(format!(
            "{n} samples cannot determine {p} parameters"
        )));
    }
    let weighted = sigma.iter().all(|s| *s > 0.0);
    let w: Vec<f64> = if weighted { sigma.iter().map(|s| 1.0 / s).collect() } else { vec![1.0; n] };
    let x = DMatrix::from_fn(n, p, |i, j| rows[i][j] * w[i]);
    let b = DVector::from_fn(n, |i, _| y[i] * w[i]);
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 0.0) || smax / smin > MAX_CONDITION {
        return Err(CasimirError::IllConditioned(format!(
            "design matrix is near-singular (singular values {smin:.3e}..{smax:.3e}); widen the sample window"
        )));
    }
    let coef = svd
        .solve(&b, 0.0)
        .map_err(|e| CasimirError::IllConditioned(e.to_string()))?;
    let resid = &b - &x * &coef;
    let rss = resid.norm_squared();
    let v_t = svd.v_t.as_ref().expect("requested V");
    // covariance = V Σ⁻² Vᵀ
    let mut cov = DMatrix::zeros(p, p);
    for k in 0..p {
        let s2 = svd.singular_values[k] * svd.singular_values[k];
        for i in 0..p {
            for j in 0..p {
                cov[(i, j)] += v_t[(k, i)] * v_t[(k, j)] / s2;
            }
        }
    }
    if !weighted {
        let dof = n.saturating_sub(p);
        let s2 = if dof > 0 { rss / dof as f64 } else { 0.0 };
        cov *= s2;
    }
    let max_residual = (0..n)
        .map(|i| (resid[i] / w[i]).abs())
        .fold(0.0, f64::max);
    Ok(LinearFit {
        coef: coef.iter().copied().collect(),
        sigma: (0..p).map(|i| cov[(i, i)].max(0.0).sqrt()).collect(),
        residual_norm: rss.sqrt(),
        max_residual,
    })
}

fn check_samples(samples: &[SeriesSample], min: usize) -> Result<()> {
    if samples.len() < min {
        return Err(CasimirError::InvalidInput(format!(
            "need at least {min} samples, got {}",
            samples.len()
        )));
    }
    for s in samples {
        if !s.abscissa.is_finite() || !s.value.is_finite() || !(s.sigma >= 0.0) {
            return Err(CasimirError::InvalidInput(format!("invalid sample {s:?}")));
        }
    }
    if samples.windows(2).any(|w| !(w[1].abscissa > w[0].abscissa)) {
        return Err(CasimirError::InvalidInput("sample abscissas must be strictly increasing".into()));
    }
    Ok(())
}

fn fit_model(model: FitModel, xs: &[f64], ys: &[f64], sigma: &[f64], n_samples: usize) -> Result<FitResult> {
    let rows: Vec<Vec<f64>> = xs.iter().map(|&x| model.basis(x)).collect();
    let f = linear_lsq(&rows, ys, sigma)?;
    Ok(FitResult {
        model,
        coefficients: f.coef,
        uncertainties: f.sigma,
        systematic: vec![0.0; model.parameter_names().len()],
        residual_norm: f.residual_norm,
        max_residual: f.max_residual,
        samples: n_samples,
    })
}

/// Range of `d/r` used by [`fit_force_expansion`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitWindow {
    pub min: f64,
    pub max: f64,
}

impl Default for FitWindow {
    fn default() -> Self {
        Self { min: 0.05, max: 0.2 }
    }
}

impl FitWindow {
    pub fn contains(&self, d_over_r: f64) -> bool {
        d_over_r >= self.min * (1.0 - 1e-12) && d_over_r <= self.max * (1.0 + 1e-12)
    }
}

/// Fit `F(d)` samples (abscissa = d, value = force in ħc units) to
/// `F_PFA(d)·(1 + θ₁ d/(2r) - θ₂ d²/(2r)²)`, returning `[θ₁, θ₂]`.
///
/// When at least five samples fall in the window the fit is repeated without
/// the smallest and without the largest separation, and the larger coefficient
/// change is reported as the systematic uncertainty.
pub fn fit_force_expansion(samples: &[SeriesSample], r: f64, r_signed: f64, window: &FitWindow) -> Result<FitResult> {
    check_samples(samples, 2)?;
    let inside: Vec<SeriesSample> = samples
        .iter()
        .copied()
        .filter(|s| window.contains(s.abscissa / r))
        .collect();
    if inside.len() < 3 {
        return Err(CasimirError::IllConditioned(format!(
            "only {} samples inside the d/r window [{}, {}]; at least 3 are needed",
            inside.len(),
            window.min,
            window.max
        )));
    }
    let prepare = |set: &[SeriesSample]| -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let mut u = Vec::new();
        let mut y = Vec::new();
        let mut s = Vec::new();
        for smp in set {
            let lead = pfa_leading_force(r, r_signed, smp.abscissa)?;
            u.push(smp.abscissa / (2.0 * r));
            y.push(smp.value / lead - 1.0);
            s.push(smp.sigma / lead.abs());
        }
        Ok((u, y, s))
    };
    let (u, y, s) = prepare(&inside)?;
    let mut fit = fit_model(FitModel::ForceExpansion, &u, &y, &s, inside.len())?;
    if inside.len() >= 5 {
        let mut spread = vec![0.0f64; 2];
        for sub in [&inside[1..], &inside[..inside.len() - 1]] {
            let (u, y, s) = prepare(sub)?;
            let f = fit_model(FitModel::ForceExpansion, &u, &y, &s, sub.len())?;
            for k in 0..2 {
                spread[k] = spread[k].max((f.coefficients[k] - fit.coefficients[k]).abs());
            }
        }
        fit.systematic = spread;
    }
    Ok(fit)
}

/// Fit θ₁(x) samples to `-(k₁ x + k₂ x/(1+x) + k₃)`; returns `[k₁, k₂, k₃]`.
pub fn fit_theta1_curve(samples: &[SeriesSample]) -> Result<FitResult> {
    check_samples(samples, 3)?;
    if samples.iter().any(|s| s.abscissa <= -1.0) {
        return Err(CasimirError::Domain("theta1 curve is singular at r/R = -1".into()));
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.abscissa).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.value).collect();
    let sg: Vec<f64> = samples.iter().map(|s| s.sigma).collect();
    fit_model(FitModel::Theta1Curve, &xs, &ys, &sg, samples.len())
}

/// Fit `g/f` ratio samples to `c₁(1-x) + c₂(1-x)²`; returns `[c₁, c₂]`.
pub fn fit_gf_ratio(samples: &[SeriesSample]) -> Result<FitResult> {
    check_samples(samples, 2)?;
    let xs: Vec<f64> = samples.iter().map(|s| s.abscissa).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.value).collect();
    let sg: Vec<f64> = samples.iter().map(|s| s.sigma).collect();
    fit_model(FitModel::GfRatio, &xs, &ys, &sg, samples.len())
}

/// For fixed decay rate `b`, the best `(E∞, A)` and weighted residual sum.
fn exp_profile(samples: &[SeriesSample], w: &[f64], b: f64, l0: f64) -> Option<(f64, f64, f64)> {
    let (mut s11, mut s12, mut s22, mut t1, mut t2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (s, wi) in samples.iter().zip(w) {
        let e = (-b * (s.abscissa - l0)).exp();
        let w2 = wi * wi;
        s11 += w2;
        s12 += w2 * e;
        s22 += w2 * e * e;
        t1 += w2 * s.value;
        t2 += w2 * e * s.value;
    }
    let det = s11 * s22 - s12 * s12;
    if !(det.abs() > 1e-14 * s11 * s22) {
        return None;
    }
    let c = (t1 * s22 - t2 * s12) / det;
    let a = (s11 * t2 - s12 * t1) / det;
    let rss: f64 = samples
        .iter()
        .zip(w)
        .map(|(s, wi)| {
            let r = (s.value - c - a * (-b * (s.abscissa - l0)).exp()) * wi;
            r * r
        })
        .sum();
    Some((c, a, rss))
}

/// Least-squares fit of `E∞ + A e^{-b(l - l_last)}`; returns `(E∞, var E∞)`,
/// or `None` when the optimum sits at the edge of the rate range or the
/// covariance is singular.
fn fit_exponential(samples: &[SeriesSample]) -> Option<(f64, f64)> {
    let n = samples.len();
    let weighted = samples.iter().all(|s| s.sigma > 0.0);
    let w: Vec<f64> = if weighted { samples.iter().map(|s| 1.0 / s.sigma).collect() } else { vec![1.0; n] };
    let l0 = samples[n - 1].abscissa;
    let span = l0 - samples[0].abscissa;
    let (b_lo, b_hi) = ((1e-3 / span).ln(), (50.0 / span).ln());

    // coarse scan in ln b, then golden-section refinement
    let profile = |lnb: f64| exp_profile(samples, &w, lnb.exp(), l0).map_or(f64::INFINITY, |p| p.2);
    let grid = 200;
    let mut best = (b_lo, f64::INFINITY);
    for k in 0..=grid {
        let t = b_lo + (b_hi - b_lo) * k as f64 / grid as f64;
        let v = profile(t);
        if v < best.1 {
            best = (t, v);
        }
    }
    let step = (b_hi - b_lo) / grid as f64;
    let (mut lo, mut hi) = (best.0 - step, best.0 + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (profile(x1), profile(x2));
    for _ in 0..200 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = profile(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = profile(x2);
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    let lnb = 0.5 * (lo + hi);
    if lnb < b_lo + step || lnb > b_hi - step {
        return None;
    }
    let (c, a, rss) = exp_profile(samples, &w, lnb.exp(), l0)?;
    let b = lnb.exp();
    // Gauss–Newton covariance in (E∞, A, b)
    let j = DMatrix::from_fn(n, 3, |i, k| {
        let dl = samples[i].abscissa - l0;
        let e = (-b * dl).exp();
        w[i] * match k {
            0 => 1.0,
            1 => e,
            _ => -a * dl * e,
        }
    });
    let inv = (j.transpose() * &j).try_inverse()?;
    let dof = n.saturating_sub(3).max(1) as f64;
    let var = if weighted { inv[(0, 0)] } else { inv[(0, 0)] * rss / dof };
    (var.is_finite() && var >= 0.0).then_some((c, var))
}

/// Extrapolate `E(L)` to `L → ∞` with `E(L) = E∞ + A e^{-bL}`.
///
/// The decay rate is found by a one-dimensional search over the profiled
/// residual, the linear parameters by least squares. If the fit does not
/// settle (rate at the edge of the search range, or a singular covariance),
/// the last three points are extrapolated geometrically instead. Returns
/// `(E∞, one-sigma uncertainty)`.
pub fn extrapolate_multipole(samples: &[SeriesSample]) -> Result<(f64, f64)> {
    let e = extrapolate_series(samples)?;
    Ok((e.value, e.total_uncertainty()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtrapolationMethod {
    Constant,
    Exponential,
    Geometric,
}

/// Limit of a truncated series with its uncertainty split into the part
/// propagated from the sample sigmas and a model-sensitivity part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrapolation {
    pub value: f64,
    /// Propagated from the sample sigmas; scales linearly with them.
    pub statistical: f64,
    /// Shift under dropping the lowest cutoff, or the last increment for the
    /// geometric fallback.
    pub systematic: f64,
    pub method: ExtrapolationMethod,
}

impl Extrapolation {
    pub fn total_uncertainty(&self) -> f64 {
        self.statistical.hypot(self.systematic)
    }
}

/// See [`extrapolate_multipole`].
pub fn extrapolate_series(samples: &[SeriesSample]) -> Result<Extrapolation> {
    check_samples(samples, 4)?;
    let n = samples.len();
    let last = samples[n - 1].value;
    let scale = samples.iter().map(|s| s.value.abs()).fold(0.0, f64::max);
    let spread = samples.iter().map(|s| (s.value - last).abs()).fold(0.0, f64::max);
    if spread <= 1e-14 * scale || spread == 0.0 {
        return Ok(Extrapolation { value: last, statistical: 0.0, systematic: 0.0, method: ExtrapolationMethod::Constant });
    }
    if let Some((c, var)) = fit_exponential(samples) {
        // sensitivity to the lowest cutoff, which is furthest from the asymptotic regime
        let mut systematic = if n >= 5 {
            fit_exponential(&samples[1..]).map_or(0.0, |(c1, _)| (c - c1).abs())
        } else {
            0.0
        };
        // and disagreement with the geometric tail of the last three points
        if let Ok((g, _)) = geometric_tail(samples) {
            systematic = systematic.max((c - g).abs());
        }
        return Ok(Extrapolation { value: c, statistical: var.sqrt(), systematic, method: ExtrapolationMethod::Exponential });
    }
    let (value, systematic) = geometric_tail(samples)?;
    Ok(Extrapolation { value, statistical: samples[n - 1].sigma, systematic, method: ExtrapolationMethod::Geometric })
}

/// Aitken extrapolation of the last three points.
fn geometric_tail(samples: &[SeriesSample]) -> Result<(f64, f64)> {
    let n = samples.len();
    let (e1, e2, e3) = (samples[n - 3].value, samples[n - 2].value, samples[n - 1].value);
    let d1 = e2 - e1;
    let d2 = e3 - e2;
    if d2 == 0.0 {
        return Ok((e3, d1.abs()));
    }
    let q = d2 / d1;
    if !(q > 0.0 && q < 1.0) {
        return Err(CasimirError::IllConditioned(format!(
            "partial-wave series is not converging geometrically (last increments {d1:.3e}, {d2:.3e})"
        )));
    }
    let e_inf = e3 + d2 * q / (1.0 - q);
    Ok((e_inf, (e_inf - e3).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_series_is_extrapolated_exactly() {
        let s: Vec<_> = (2..=6)
            .map(|k| {
                let l = 10.0 * k as f64;
                SeriesSample::exact(l, 1.0 + 0.5 * (-0.2 * l).exp())
            })
            .collect();
        let (e, sig) = extrapolate_multipole(&s).unwrap();
        assert!((e - 1.0).abs() < 1e-6, "{e}");
        assert!(sig < 1e-6);
    }

    #[test]
    fn constant_series() {
        let s: Vec<_> = (1..=5).map(|k| SeriesSample::exact(k as f64, -3.25)).collect();
        assert_eq!(extrapolate_multipole(&s).unwrap(), (-3.25, 0.0));
    }

    #[test]
    fn too_few_or_unsorted_samples() {
        let s: Vec<_> = (1..=3).map(|k| SeriesSample::exact(k as f64, k as f64)).collect();
        assert!(extrapolate_multipole(&s).is_err());
        let bad = vec![SeriesSample::exact(2.0, 1.0), SeriesSample::exact(1.0, 1.0)];
        assert!(fit_gf_ratio(&bad).is_err());
    }

    #[test]
    fn gf_ratio_recovers_coefficients() {
        let s: Vec<_> = (0..9)
            .map(|k| {
                let x = 0.1 + 0.1 * k as f64;
                SeriesSample::exact(x, 0.3 * (1.0 - x) - 0.1 * (1.0 - x).powi(2))
            })
            .collect();
        let f = fit_gf_ratio(&s).unwrap();
        assert_relative_eq!(f.coefficients[0], 0.3, max_relative = 1e-12);
        assert_relative_eq!(f.coefficients[1], -0.1, max_relative = 1e-12);
        assert_eq!(f.evaluate(1.0), 0.0);
    }

    #[test]
    fn narrow_window_rejected() {
        let s: Vec<_> = (1..=3).map(|k| SeriesSample::exact(0.3 + 0.1 * k as f64, -1.0)).collect();
        assert!(matches!(
            fit_force_expansion(&s, 1.0, f64::INFINITY, &FitWindow::default()),
            Err(CasimirError::IllConditioned(_))
        ));
    }
}
