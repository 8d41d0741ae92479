//! Globally adaptive Gauss–Kronrod (7/15) integration on `(0, ∞)`.
//!
//! The half line is mapped onto `(0, 1)` by `x = s·t/(1-t)`. Integrands are
//! vector valued so that related integrals (for example all four dipole
//! coefficients, or the same κ-integrand at two truncation orders) share one
//! set of nodes. Interval bisection order depends only on the integrand
//! values, which keeps results bit-reproducible.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{CasimirError, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Controls for the frequency (or dimensionless wavenumber) integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Upper bound on the number of subintervals; each costs 15 evaluations.
    pub max_intervals: usize,
    /// Overrides the automatically chosen mapping scale `s`.
    pub scale: Option<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_intervals: 400,
            scale: None,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tolerance(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    /// Same controls with tolerances tightened by `factor` and the interval
    /// budget enlarged accordingly.
    pub fn refined(&self, factor: f64) -> Self {
        Self {
            abs_tol: self.abs_tol / factor,
            rel_tol: self.rel_tol / factor,
            max_intervals: self.max_intervals * 2,
            scale: self.scale,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol >= 0.0) || !(self.rel_tol >= 0.0) || (self.abs_tol == 0.0 && self.rel_tol == 0.0) {
            return Err(CasimirError::InvalidInput("quadrature tolerance must be positive".into()));
        }
        if self.max_intervals == 0 {
            return Err(CasimirError::InvalidInput("quadrature needs at least one interval".into()));
        }
        if let Some(s) = self.scale {
            if !(s > 0.0) || !s.is_finite() {
                return Err(CasimirError::InvalidInput(format!("bad mapping scale {s}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<const N: usize> {
    pub value: [f64; N],
    pub error: [f64; N],
    pub evaluations: usize,
    pub intervals: usize,
}

struct Segment<const N: usize> {
    lo: f64,
    hi: f64,
    value: [f64; N],
    error: [f64; N],
    key: f64,
}

impl<const N: usize> PartialEq for Segment<N> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<const N: usize> Eq for Segment<N> {}
impl<const N: usize> PartialOrd for Segment<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Segment<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key
            .total_cmp(&other.key)
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}

fn gk15<const N: usize, F>(f: &mut F, lo: f64, hi: f64) -> Result<([f64; N], [f64; N])>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut kron = [0.0; N];
    let mut gauss = [0.0; N];
    let fc = f(center)?;
    for c in 0..N {
        kron[c] = WGK[7] * fc[c];
        gauss[c] = WG[3] * fc[c];
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        for c in 0..N {
            let s = f1[c] + f2[c];
            kron[c] += WGK[j] * s;
            if j % 2 == 1 {
                gauss[c] += WG[j / 2] * s;
            }
        }
    }
    let mut err = [0.0; N];
    for c in 0..N {
        kron[c] *= half;
        gauss[c] *= half;
        err[c] = (kron[c] - gauss[c]).abs();
    }
    Ok((kron, err))
}

/// Adaptive integral of `f` over the finite interval `[lo, hi]`.
pub fn integrate_interval<const N: usize, F>(mut f: F, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<QuadResult<N>>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    spec.validate()?;
    let mut heap = BinaryHeap::new();
    let (v, e) = gk15(&mut f, lo, hi)?;
    heap.push(Segment { lo, hi, value: v, error: e, key: max_abs(&e) });
    let mut evaluations = 15;

    loop {
        let mut total = [0.0; N];
        let mut total_err = [0.0; N];
        for seg in heap.iter() {
            for c in 0..N {
                total[c] += seg.value[c];
                total_err[c] += seg.error[c];
            }
        }
        let done = (0..N).all(|c| total_err[c] <= spec.abs_tol.max(spec.rel_tol * total[c].abs()));
        if done {
            return Ok(QuadResult {
                value: sum_in_order(&heap),
                error: total_err,
                evaluations,
                intervals: heap.len(),
            });
        }
        if heap.len() >= spec.max_intervals {
            return Err(CasimirError::NonConvergence(format!(
                "adaptive quadrature reached {} intervals with error {:.3e} (value {:.6e})",
                heap.len(),
                max_abs(&total_err),
                total[0]
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if !(mid > worst.lo && mid < worst.hi) {
            return Err(CasimirError::NonConvergence(
                "adaptive quadrature cannot bisect further".into(),
            ));
        }
        for (a, b) in [(worst.lo, mid), (mid, worst.hi)] {
            let (v, e) = gk15(&mut f, a, b)?;
            evaluations += 15;
            heap.push(Segment { lo: a, hi: b, value: v, error: e, key: max_abs(&e) });
        }
    }
}

/// Adaptive integral of `f` over `(0, ∞)` using the map `x = s·t/(1-t)`.
///
/// `default_scale` is used unless the spec overrides it; an integrand that
/// decays like `e^{-x/s}` is well resolved with that choice.
pub fn integrate_half_line<const N: usize, F>(mut f: F, default_scale: f64, spec: &QuadratureSpec) -> Result<QuadResult<N>>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    let s = spec.scale.unwrap_or(default_scale);
    if !(s > 0.0) || !s.is_finite() {
        return Err(CasimirError::InvalidInput(format!("bad mapping scale {s}")));
    }
    integrate_interval(
        |t: f64| {
            let one_minus = 1.0 - t;
            let x = s * t / one_minus;
            let jac = s / (one_minus * one_minus);
            let mut v = f(x)?;
            for c in v.iter_mut() {
                *c *= jac;
            }
            Ok(v)
        },
        0.0,
        1.0,
        spec,
    )
}

fn max_abs<const N: usize>(v: &[f64; N]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Sum segment values ordered by position so the reduction is independent of
/// heap layout.
fn sum_in_order<const N: usize>(heap: &BinaryHeap<Segment<N>>) -> [f64; N] {
    let mut segs: Vec<&Segment<N>> = heap.iter().collect();
    segs.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut out = [0.0; N];
    let mut comp = [0.0; N];
    for s in segs {
        for c in 0..N {
            // Kahan summation
            let y = s.value[c] - comp[c];
            let t = out[c] + y;
            comp[c] = (t - out[c]) - y;
            out[c] = t;
        }
    }
    out
}
