//! Vector spherical wave translations along the z-axis.
//!
//! The scalar addition theorem for a displacement `z` (in units of 1/κ) reads
//! `ψ_{lm}(x + z ẑ) = Σ_{l'} α^m_{l'l}(z) ψ_{l'm}(x)` with
//!
//! ```text
//! α^m_{l'l}(z) = (-1)^m √((2l+1)(2l'+1)) Σ_L (2L+1) ρ_L(z) (l l' L; 0 0 0)(l l' L; m -m 0)
//! ```
//!
//! where `ρ_L = i_L` for regular-to-regular translations and
//! `ρ_L = (-1)^L k_L` for outgoing-to-regular ones. The vector coefficients in
//! the basis `(M, iN)`, where they are real, are
//!
//! ```text
//! A_{l'l} = [l(l+1) α_{l'l} - z(l+1) c⁻_{lm} α_{l',l-1} + z l c⁺_{lm} α_{l',l+1}] / (l'(l'+1))
//! B_{l'l} = m z α_{l'l} / (l'(l'+1))
//! ```
//!
//! with the translation `[[A, B], [B, A]]`; the reverse direction flips the
//! sign of `B` (and for outgoing waves also multiplies by `(-1)^{l+l'}`).
//!
//! All coefficients are produced relative to a per-entry scale `e^{σ(l',l)}`,
//! `σ = ln ρ_{|l-l'|}` (regular) or `ln ρ_{l+l'}` (outgoing), which is the
//! largest radial factor in the sum. This keeps every mantissa of order one
//! for arguments from 1e-8 to beyond 1e3.

use nalgebra::DMatrix;

use crate::error::{CasimirError, Result};
use crate::specfun::BesselTable;
use crate::wigner::GauntTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveKind {
    Regular,
    Outgoing,
}

/// Radial functions `ρ_n(z)` for `n ≤ n_top` and their pairwise ratios.
#[derive(Debug, Clone)]
pub struct RadialRatios {
    kind: WaveKind,
    z: f64,
    dim: usize,
    ln_rad: Vec<f64>,
    rad_exp: Vec<f64>,
    ratio: Vec<f64>,
}

impl RadialRatios {
    pub fn new(kind: WaveKind, z: f64, n_top: u32) -> Result<Self> {
        if !(z > 0.0) || !z.is_finite() {
            return Err(CasimirError::Domain(format!("translation argument must be positive, got {z}")));
        }
        let table = BesselTable::new(z, n_top as i32)?;
        let dim = n_top as usize + 1;
        let ln_rad: Vec<f64> = match kind {
            WaveKind::Regular => {
                let c = 0.5 * (std::f64::consts::FRAC_PI_2 / z).ln();
                (0..dim).map(|n| c + table.ln_i(n as i32)).collect()
            }
            WaveKind::Outgoing => {
                let c = 0.5 * (std::f64::consts::FRAC_2_PI / z).ln();
                (0..dim).map(|n| c + table.ln_k(n as i32)).collect()
            }
        };
        let mut ratio = vec![0.0; dim * dim];
        for n0 in 0..dim {
            for n in 0..dim {
                ratio[n0 * dim + n] = (ln_rad[n] - ln_rad[n0]).exp();
            }
        }
        let rad_exp = ln_rad.iter().map(|v| v.exp()).collect();
        Ok(Self {
            kind,
            z,
            dim,
            ln_rad,
            rad_exp,
            ratio,
        })
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn kind(&self) -> WaveKind {
        self.kind
    }

    /// `ln |ρ_n(z)|`
    pub fn ln_radial(&self, n: u32) -> f64 {
        self.ln_rad[n as usize]
    }

    #[inline]
    fn anchor(&self, s: u32, t: u32) -> u32 {
        match self.kind {
            WaveKind::Regular => s.abs_diff(t),
            WaveKind::Outgoing => s + t,
        }
    }

    /// Scale `σ(s, t)` of translation entries between orders s and t.
    #[inline]
    pub fn ln_scale(&self, s: u32, t: u32) -> f64 {
        self.ln_rad[self.anchor(s, t) as usize]
    }

    /// `α^m_{st}(z) · e^{-ln ρ_{n0}}`.
    #[inline]
    fn alpha_rel(&self, gaunt: &GauntTable, m: u32, s: u32, t: u32, n0: u32) -> f64 {
        let terms = gaunt.terms(m, s, t);
        if terms.is_empty() {
            return 0.0;
        }
        let row = &self.ratio[n0 as usize * self.dim..(n0 as usize + 1) * self.dim];
        let lmin = s.abs_diff(t) as usize;
        let mut acc = 0.0;
        for (k, c) in terms.iter().enumerate() {
            acc += c * row[lmin + 2 * k];
        }
        if self.kind == WaveKind::Outgoing && (s + t) % 2 == 1 {
            -acc
        } else {
            acc
        }
    }
}

/// Translation coefficients for one azimuthal index, rows `l'` and columns
/// `l` both running over `max(1,m)..=l_max`. Entry values are
/// `a_hat · e^{ln_scale}` and `b_hat · e^{ln_scale}`.
#[derive(Debug, Clone)]
pub struct TranslationBlock {
    pub m: u32,
    pub l_min: u32,
    pub l_max: u32,
    pub a_hat: DMatrix<f64>,
    pub b_hat: DMatrix<f64>,
    pub ln_scale: DMatrix<f64>,
    /// `e^{ln_scale}` where representable (see the solver's safe range).
    pub scale: DMatrix<f64>,
}

impl TranslationBlock {
    pub fn identity(m: u32, l_max: u32) -> Self {
        let l_min = m.max(1);
        let n = (l_max + 1).saturating_sub(l_min) as usize;
        Self {
            m,
            l_min,
            l_max,
            a_hat: DMatrix::identity(n, n),
            b_hat: DMatrix::zeros(n, n),
            ln_scale: DMatrix::zeros(n, n),
            scale: DMatrix::from_element(n, n, 1.0),
        }
    }

    /// Requires `gaunt.n_max() ≥ l_max + 1` and radial ratios up to `2 l_max + 1`.
    pub fn new(gaunt: &GauntTable, radial: &RadialRatios, m: u32, l_max: u32) -> Self {
        debug_assert!(gaunt.n_max() > l_max);
        let l_min = m.max(1);
        let n = (l_max + 1).saturating_sub(l_min) as usize;
        let z = radial.z();
        let mf = m as f64;
        let mut a_hat = DMatrix::zeros(n, n);
        let mut b_hat = DMatrix::zeros(n, n);
        let mut ln_scale = DMatrix::zeros(n, n);
        let mut scale = DMatrix::zeros(n, n);
        for (j, l) in (l_min..=l_max).enumerate() {
            let lf = l as f64;
            let c_minus = if l > m {
                ((lf * lf - mf * mf) / ((2.0 * lf - 1.0) * (2.0 * lf + 1.0))).sqrt()
            } else {
                0.0
            };
            let c_plus = (((lf + 1.0) * (lf + 1.0) - mf * mf) / ((2.0 * lf + 1.0) * (2.0 * lf + 3.0))).sqrt();
            for (i, lp) in (l_min..=l_max).enumerate() {
                let n0 = radial.anchor(lp, l);
                let norm = 1.0 / (lp as f64 * (lp as f64 + 1.0));
                let a0 = radial.alpha_rel(gaunt, m, lp, l, n0);
                let am = if c_minus > 0.0 {
                    radial.alpha_rel(gaunt, m, lp, l - 1, n0)
                } else {
                    0.0
                };
                let ap = radial.alpha_rel(gaunt, m, lp, l + 1, n0);
                a_hat[(i, j)] = (lf * (lf + 1.0) * a0 - z * (lf + 1.0) * c_minus * am + z * lf * c_plus * ap) * norm;
                b_hat[(i, j)] = mf * z * a0 * norm;
                ln_scale[(i, j)] = radial.ln_radial(n0);
                scale[(i, j)] = radial.rad_exp[n0 as usize];
            }
        }
        Self {
            m,
            l_min,
            l_max,
            a_hat,
            b_hat,
            ln_scale,
            scale,
        }
    }

    pub fn len(&self) -> usize {
        self.a_hat.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Unscaled regular translation matrices `(V, W)` for displacement `κa`,
/// in the interleaved layout `2(l - max(1,m)) + c` with `c = 0` for M and
/// `c = 1` for E. `V = [[A, B], [B, A]]`, `W = [[A, -B], [-B, A]]`, and both
/// are the identity at `κa = 0`. Entries grow like `e^{κa}`, so this form is
/// meant for moderate arguments; the solver works with the scaled blocks.
pub fn translation_blocks(m: i32, l_max: u32, kappa_a: f64) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if l_max < 1 {
        return Err(CasimirError::InvalidInput("l_max must be at least 1".into()));
    }
    let mu = m.unsigned_abs();
    if mu > l_max {
        return Err(CasimirError::InvalidInput(format!("|m|={mu} exceeds l_max={l_max}")));
    }
    if !(kappa_a >= 0.0) || !kappa_a.is_finite() {
        return Err(CasimirError::Domain(format!("translation argument must be >= 0, got {kappa_a}")));
    }
    let block = if kappa_a == 0.0 {
        TranslationBlock::identity(mu, l_max)
    } else {
        let gaunt = GauntTable::shared(l_max + 1);
        let radial = RadialRatios::new(WaveKind::Regular, kappa_a, 2 * l_max + 2)?;
        TranslationBlock::new(&gaunt, &radial, mu, l_max)
    };
    // B is odd in m, A is even
    let b_sign = if m < 0 { -1.0 } else { 1.0 };
    let n = block.len();
    let mut v = DMatrix::zeros(2 * n, 2 * n);
    let mut w = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let s = block.ln_scale[(i, j)].exp();
            let a = block.a_hat[(i, j)] * s;
            let b = b_sign * block.b_hat[(i, j)] * s;
            for c in 0..2 {
                v[(2 * i + c, 2 * j + c)] = a;
                w[(2 * i + c, 2 * j + c)] = a;
                v[(2 * i + c, 2 * j + 1 - c)] = b;
                w[(2 * i + c, 2 * j + 1 - c)] = -b;
            }
        }
    }
    Ok((v, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spherical_i(n: u32, z: f64) -> f64 {
        let t = BesselTable::new(z, n as i32).unwrap();
        (0.5 * (std::f64::consts::FRAC_PI_2 / z).ln() + t.ln_i(n as i32)).exp()
    }

    #[test]
    fn zero_displacement_is_identity() {
        let (v, w) = translation_blocks(2, 6, 0.0).unwrap();
        assert_eq!(v, DMatrix::identity(10, 10));
        assert_eq!(w, DMatrix::identity(10, 10));
    }

    #[test]
    fn small_displacement_approaches_identity() {
        let (v, _) = translation_blocks(1, 5, 1e-7).unwrap();
        let diff = (v - DMatrix::identity(10, 10)).abs().max();
        assert!(diff < 1e-6, "{diff}");
    }

    #[test]
    fn m_zero_has_no_polarization_mixing() {
        let (v, w) = translation_blocks(0, 6, 1.3).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(v[(2 * i, 2 * j + 1)], 0.0);
                assert_eq!(w[(2 * i + 1, 2 * j)], 0.0);
            }
        }
    }

    #[test]
    fn w_is_v_with_flipped_mixing_entries() {
        let (v, w) = translation_blocks(2, 5, 0.8).unwrap();
        for i in 0..v.nrows() {
            for j in 0..v.ncols() {
                let same_channel = i % 2 == j % 2;
                let expect = if same_channel { v[(i, j)] } else { -v[(i, j)] };
                assert_eq!(w[(i, j)], expect);
            }
        }
    }

    #[test]
    fn dipole_row_identities() {
        // Σ_m A_{1l} A_{l1} and Σ_m B_{1l} B_{l1} reduce to squares of i_{l±1}
        let z = 0.9;
        for l in [1u32, 2, 3, 5] {
            let (mut s, mut c) = (0.0, 0.0);
            for m in -1i32..=1 {
                let (v, _) = translation_blocks(m, 6, z).unwrap();
                let lmin = m.unsigned_abs().max(1);
                let (i1, il) = (2 * (1 - lmin) as usize, 2 * (l - lmin) as usize);
                s += v[(i1, il)] * v[(il, i1)];
                c += v[(i1, il + 1)] * v[(il + 1, i1)];
            }
            let i = |n: u32| if n == 0 { (z.sinh()) / z } else { spherical_i(n, z) };
            let a_expect = 1.5 * ((l + 1) as f64 * i(l - 1).powi(2) + l as f64 * i(l + 1).powi(2));
            let b_expect = -1.5 * (2 * l + 1) as f64 * i(l).powi(2);
            assert_relative_eq!(s, a_expect, max_relative = 1e-12);
            assert_relative_eq!(-c, b_expect, max_relative = 1e-12);
        }
    }
}
