//! Modified Bessel functions of half-integer order and the cavity response
//! functions built from them.
//!
//! Everything is evaluated in logarithmic form. `K` is generated by upward
//! recurrence from the closed forms of `K_{1/2}` and `K_{3/2}`; `I` comes from
//! ratios `I_{ν+1}/I_ν` obtained by a continued fraction at the top order and
//! downward recurrence, with each order normalized through the Wronskian
//! `I_ν K_{ν+1} + I_{ν+1} K_ν = 1/x`. Every step is a sum of positive terms, so
//! the relative error stays at a few ulps times the number of orders.

use std::f64::consts::PI;

use crate::error::{CasimirError, Result};

/// Electromagnetic wave channel: electric (TM) or magnetic (TE) multipoles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    E,
    M,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::M, Polarization::E];

    pub fn other(self) -> Self {
        match self {
            Polarization::E => Polarization::M,
            Polarization::M => Polarization::E,
        }
    }
}

/// Half-integer Bessel order ν, stored as the odd integer 2ν.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HalfIntOrder {
    twice_order: i32,
}

impl HalfIntOrder {
    pub fn new(twice_order: i32) -> Result<Self> {
        if twice_order % 2 == 0 || twice_order < -1 {
            return Err(CasimirError::Domain(format!(
                "order {}/2 is not a half-integer >= -1/2",
                twice_order
            )));
        }
        Ok(Self { twice_order })
    }

    /// ν = l + 1/2.
    pub fn l_plus_half(l: i32) -> Result<Self> {
        Self::new(2 * l + 1)
    }

    pub fn twice_order(self) -> i32 {
        self.twice_order
    }

    pub fn value(self) -> f64 {
        0.5 * self.twice_order as f64
    }

    /// The integer l with ν = l + 1/2.
    pub fn l(self) -> i32 {
        (self.twice_order - 1) / 2
    }
}

/// A real number stored as `mantissa · exp(log_scale)`.
///
/// `log_scale` is `+x` for `I`-type and `-x` for `K`-type values; when the
/// mantissa would leave the representable range the whole logarithm moves
/// into `log_scale` and the mantissa becomes ±1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledBesselValue {
    pub mantissa: f64,
    pub log_scale: f64,
}

impl ScaledBesselValue {
    pub(crate) fn from_ln(sign: f64, ln_abs: f64, nominal_scale: f64) -> Self {
        if (ln_abs - nominal_scale).abs() <= 600.0 {
            Self {
                mantissa: sign * (ln_abs - nominal_scale).exp(),
                log_scale: nominal_scale,
            }
        } else {
            Self {
                mantissa: sign,
                log_scale: ln_abs,
            }
        }
    }

    /// Unscaled value; may overflow to infinity or underflow to zero.
    pub fn value(&self) -> f64 {
        self.mantissa * self.log_scale.exp()
    }

    pub fn ln_abs(&self) -> f64 {
        self.mantissa.abs().ln() + self.log_scale
    }

    pub fn signum(&self) -> f64 {
        self.mantissa.signum()
    }
}

/// `I_{l+1/2}(x)` and `K_{l+1/2}(x)` for every `l` in `-1..=l_top` at one argument.
#[derive(Debug, Clone)]
pub struct BesselTable {
    x: f64,
    l_top: i32,
    ln_i: Vec<f64>,
    ln_k: Vec<f64>,
    /// `I_{l+3/2} / I_{l+1/2}`
    ratio_i: Vec<f64>,
    /// `K_{l+3/2} / K_{l+1/2}`
    ratio_k: Vec<f64>,
}

const CF_EPS: f64 = 1e-17;

/// `I_{ν+1}(x) / I_ν(x)` by modified Lentz evaluation of the continued fraction.
fn bessel_i_ratio_cf(nu: f64, x: f64) -> Result<f64> {
    let tiny = 1e-300;
    let mut f = tiny;
    let mut c = f;
    let mut d = 0.0;
    let max_iter = 1000 + 20 * (x as usize + nu as usize);
    for k in 1..=max_iter {
        let b = 2.0 * (nu + k as f64) / x;
        d = b + d;
        if d == 0.0 {
            d = tiny;
        }
        c = b + 1.0 / c;
        if c == 0.0 {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < CF_EPS {
            return Ok(f);
        }
    }
    Err(CasimirError::NonConvergence(format!(
        "Bessel ratio continued fraction at nu={nu}, x={x}"
    )))
}

fn check_argument(x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(CasimirError::Domain(format!(
            "Bessel argument must be positive and finite, got {x}"
        )));
    }
    Ok(())
}

impl BesselTable {
    pub fn new(x: f64, l_top: i32) -> Result<Self> {
        check_argument(x)?;
        let l_top = l_top.max(0);
        let n = (l_top + 2) as usize;

        let mut ratio_k = vec![0.0; n];
        let mut ln_k = vec![0.0; n];
        ratio_k[0] = 1.0;
        ln_k[0] = 0.5 * (PI / (2.0 * x)).ln() - x;
        for j in 1..n {
            let l = j as f64 - 1.0;
            ratio_k[j] = 1.0 / ratio_k[j - 1] + (2.0 * l + 1.0) / x;
            ln_k[j] = ln_k[j - 1] + ratio_k[j - 1].ln();
        }

        let mut ratio_i = vec![0.0; n];
        ratio_i[n - 1] = bessel_i_ratio_cf(l_top as f64 + 0.5, x)?;
        for j in (1..n).rev() {
            let l = j as f64 - 1.0;
            ratio_i[j - 1] = 1.0 / ((2.0 * l + 1.0) / x + ratio_i[j]);
        }

        let ln_x = x.ln();
        let ln_i = (0..n)
            .map(|j| -ln_x - ln_k[j] - (ratio_k[j] + ratio_i[j]).ln())
            .collect();

        Ok(Self {
            x,
            l_top,
            ln_i,
            ln_k,
            ratio_i,
            ratio_k,
        })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn l_top(&self) -> i32 {
        self.l_top
    }

    #[inline]
    fn idx(&self, l: i32) -> usize {
        debug_assert!(l >= -1 && l <= self.l_top, "order l={l} outside table");
        (l + 1) as usize
    }

    /// `ln I_{l+1/2}(x)`
    #[inline]
    pub fn ln_i(&self, l: i32) -> f64 {
        self.ln_i[self.idx(l)]
    }

    /// `ln K_{l+1/2}(x)`
    #[inline]
    pub fn ln_k(&self, l: i32) -> f64 {
        self.ln_k[self.idx(l)]
    }

    #[inline]
    pub fn i_ratio(&self, l: i32) -> f64 {
        self.ratio_i[self.idx(l)]
    }

    #[inline]
    pub fn k_ratio(&self, l: i32) -> f64 {
        self.ratio_k[self.idx(l)]
    }

    /// `I'_ν = I_ν (I_{ν+1}/I_ν + ν/x)`; returns (sign, ln|I'|).
    pub fn i_prime(&self, l: i32) -> (f64, f64) {
        let nu = l as f64 + 0.5;
        let factor = self.i_ratio(l) + nu / self.x;
        (factor.signum(), self.ln_i(l) + factor.abs().ln())
    }

    /// `K'_ν = -K_ν (K_{ν+1}/K_ν - ν/x)`; returns (sign, ln|K'|).
    pub fn k_prime(&self, l: i32) -> (f64, f64) {
        let nu = l as f64 + 0.5;
        let factor = self.k_ratio(l) - nu / self.x;
        (-factor.signum(), self.ln_k(l) + factor.abs().ln())
    }

    /// `ln ζ^M_l = ln (K_η / I_η)`, η = l + 1/2.
    #[inline]
    pub fn ln_zeta_m(&self, l: i32) -> f64 {
        self.ln_k(l) - self.ln_i(l)
    }

    /// `ln |ζ^E_l|`; ζ^E is negative for every l ≥ 1, x > 0.
    ///
    /// Uses `K + 2xK' = -2K (l + x K_{l-1/2}/K_{l+1/2})` and
    /// `I + 2xI' = 2I (l + 1 + x I_{l+3/2}/I_{l+1/2})`, neither of which cancels.
    pub fn ln_abs_zeta_e(&self, l: i32) -> Result<f64> {
        let num = l as f64 + self.x / self.k_ratio(l - 1);
        let den = l as f64 + 1.0 + self.x * self.i_ratio(l);
        if !(den > f64::EPSILON * (l as f64 + 1.0)) || !den.is_finite() {
            return Err(CasimirError::Singularity(format!(
                "zeta_E denominator I + 2xI' vanishes at l={l}, x={}",
                self.x
            )));
        }
        Ok(self.ln_zeta_m(l) + num.ln() - den.ln())
    }

    /// `(sign, ln |ζ^P_l|)`.
    pub fn zeta(&self, p: Polarization, l: i32) -> Result<(f64, f64)> {
        match p {
            Polarization::M => Ok((1.0, self.ln_zeta_m(l))),
            Polarization::E => Ok((-1.0, self.ln_abs_zeta_e(l)?)),
        }
    }
}

fn table_for(order: HalfIntOrder, x: f64) -> Result<BesselTable> {
    BesselTable::new(x, order.l().max(1))
}

/// `I_ν(x)` for half-integer ν ≥ -1/2.
pub fn bessel_i(order: HalfIntOrder, x: f64) -> Result<ScaledBesselValue> {
    let t = table_for(order, x)?;
    Ok(ScaledBesselValue::from_ln(1.0, t.ln_i(order.l()), x))
}

/// `K_ν(x)` for half-integer ν ≥ -1/2.
pub fn bessel_k(order: HalfIntOrder, x: f64) -> Result<ScaledBesselValue> {
    let t = table_for(order, x)?;
    Ok(ScaledBesselValue::from_ln(1.0, t.ln_k(order.l()), -x))
}

pub fn bessel_i_prime(order: HalfIntOrder, x: f64) -> Result<ScaledBesselValue> {
    let t = table_for(order, x)?;
    let (s, ln) = t.i_prime(order.l());
    Ok(ScaledBesselValue::from_ln(s, ln, x))
}

pub fn bessel_k_prime(order: HalfIntOrder, x: f64) -> Result<ScaledBesselValue> {
    let t = table_for(order, x)?;
    let (s, ln) = t.k_prime(order.l());
    Ok(ScaledBesselValue::from_ln(s, ln, -x))
}

fn check_multipole(l: i32) -> Result<()> {
    if l < 1 {
        return Err(CasimirError::Domain(format!("multipole order l={l} must be >= 1")));
    }
    Ok(())
}

/// `ζ^M_l(x) = K_{l+1/2}(x) / I_{l+1/2}(x)`.
pub fn zeta_m(l: i32, x: f64) -> Result<f64> {
    check_multipole(l)?;
    let t = BesselTable::new(x, l)?;
    Ok(t.ln_zeta_m(l).exp())
}

/// `ζ^E_l(x) = (K_η + 2xK'_η) / (I_η + 2xI'_η)`, η = l + 1/2.
pub fn zeta_e(l: i32, x: f64) -> Result<f64> {
    check_multipole(l)?;
    let t = BesselTable::new(x, l)?;
    Ok(-t.ln_abs_zeta_e(l)?.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ord(l: i32) -> HalfIntOrder {
        HalfIntOrder::l_plus_half(l).unwrap()
    }

    #[test]
    fn rejects_bad_orders_and_arguments() {
        assert!(HalfIntOrder::new(2).is_err());
        assert!(HalfIntOrder::new(-3).is_err());
        assert!(bessel_i(ord(0), 0.0).is_err());
        assert!(bessel_k(ord(0), -1.0).is_err());
        assert!(bessel_k(ord(0), f64::NAN).is_err());
        assert!(zeta_m(0, 1.0).is_err());
        assert!(zeta_e(1, 0.0).is_err());
    }

    #[test]
    fn half_order_closed_forms() {
        for &x in &[1e-3, 0.1, 1.0, 7.5, 40.0] {
            let pref = (2.0 / (PI * x)).sqrt();
            assert_relative_eq!(bessel_i(ord(0), x).unwrap().value(), pref * x.sinh(), max_relative = 1e-13);
            assert_relative_eq!(bessel_i(ord(-1), x).unwrap().value(), pref * x.cosh(), max_relative = 1e-13);
            let kpref = (PI / (2.0 * x)).sqrt() * (-x).exp();
            assert_relative_eq!(bessel_k(ord(0), x).unwrap().value(), kpref, max_relative = 1e-14);
            assert_relative_eq!(bessel_k(ord(1), x).unwrap().value(), kpref * (1.0 + 1.0 / x), max_relative = 1e-14);
        }
        let k = bessel_k(ord(0), 10.0).unwrap();
        assert_relative_eq!(k.value(), (PI / 20.0).sqrt() * (-10.0f64).exp(), max_relative = 1e-14);
    }

    #[test]
    fn small_argument_series() {
        let x = 1e-4;
        let v = bessel_i(ord(0), x).unwrap().value();
        let series = (2.0 * x / PI).sqrt() * (1.0 + x * x / 6.0);
        assert_relative_eq!(v, series, max_relative = 1e-12);
    }

    #[test]
    fn derivative_recurrences() {
        let x = 1.0;
        let ip = bessel_i_prime(ord(0), x).unwrap().value();
        let expect = 0.5 * (bessel_i(ord(-1), x).unwrap().value() + bessel_i(ord(1), x).unwrap().value());
        assert_relative_eq!(ip, expect, max_relative = 1e-14);
        let kp = bessel_k_prime(ord(0), x).unwrap().value();
        let expect = -0.5 * (bessel_k(ord(-1), x).unwrap().value() + bessel_k(ord(1), x).unwrap().value());
        assert_relative_eq!(kp, expect, max_relative = 1e-14);
    }

    #[test]
    fn scaled_representation_at_large_argument() {
        let v = bessel_i(ord(3), 700.0).unwrap();
        assert_eq!(v.log_scale, 700.0);
        assert!(v.mantissa.is_finite() && v.mantissa > 0.0);
        let k = bessel_k(ord(3), 700.0).unwrap();
        assert_eq!(k.log_scale, -700.0);
        // far outside the f64 range the logarithm moves into log_scale
        let tiny = bessel_i(ord(400), 1e-3).unwrap();
        assert_eq!(tiny.mantissa, 1.0);
        assert!(tiny.log_scale < -3000.0);
    }

    #[test]
    fn zeta_e_is_negative_and_zeta_m_positive() {
        for l in [1, 2, 10, 60] {
            for &x in &[1e-3, 0.3, 5.0, 90.0] {
                assert!(zeta_m(l, x).unwrap() > 0.0);
                assert!(zeta_e(l, x).unwrap() < 0.0);
            }
        }
    }
}
