//! Reference values computed independently at 40 digits with mpmath and
//! sympy (see `oracles/gen_oracles.py`) and frozen here.

use approx::assert_relative_eq;
use casimir_core::dipole::{dipole_coefficients, f_at_center, Side};
use casimir_core::scattering::tmatrix_conducting_sphere;
use casimir_core::specfun::{zeta_e, zeta_m, BesselTable};
use casimir_core::wigner::wigner_3j_m_sequence;
use casimir_core::{Polarization, QuadratureSpec, TruncationSpec};

/// (ν, x, ln I_ν(x), ln K_ν(x))
const LN_BESSEL: [(f64, f64, f64, f64); 12] = [
    (0.5, 1.0, -0.064351991073531798753, -0.77420864735527256764),
    (1.5, 1.0, -1.2257913526447274324, -0.08106146679532725822),
    (0.5, 1e-6, -7.1335466316266978404, 7.133545631626864507),
    (10.5, 0.01, -71.924330651408771773, 68.879807756019663215),
    (60.5, 1.0, -232.61290071378609496, 227.81697354685754923),
    (200.5, 50.0, -217.41996342159420132, 211.39583557863472524),
    (0.5, 700.0, 695.80552129927362492, -703.0497488148769749),
    (200.5, 700.0, 667.26314677881461224, -674.546798846269795),
    (30.5, 100.0, 92.141108550256298948, -97.483894447750766332),
    (100.5, 3.0, -325.27428973909826852, 319.97053945190713912),
    (3.5, 3.0, -0.55526925137893156058, -1.6705917673154882093),
    (-0.5, 2.0, 0.75263780443316434387, -2.1207822376352452223),
];

#[test]
fn log_bessel_values() {
    for &(nu, x, ln_i, ln_k) in &LN_BESSEL {
        let l = (nu - 0.5).round() as i32;
        let t = BesselTable::new(x, l.max(1)).unwrap();
        // absolute error in the logarithm is relative error in the value
        let tol = 1e-13 * ln_i.abs().max(1.0);
        assert!((t.ln_i(l) - ln_i).abs() < tol, "ln I_{nu}({x}) = {} vs {ln_i}", t.ln_i(l));
        let tol = 1e-13 * ln_k.abs().max(1.0);
        assert!((t.ln_k(l) - ln_k).abs() < tol, "ln K_{nu}({x}) = {} vs {ln_k}", t.ln_k(l));
    }
}

#[test]
fn zeta_values() {
    let cases: [(i32, f64, f64, f64); 4] = [
        (1, 1.0, 3.1415926535897932385, -2.1473359529548125231),
        (5, 2.5, 366.34537936182246697, -319.4765847918809301),
        (10, 7.0, 2.7154192478113740528, -2.570499136231937908),
        (40, 0.5, 1.9519064231258965184e144, -1.9043097053876300055e144),
    ];
    for (l, x, zm, ze) in cases {
        assert_relative_eq!(zeta_m(l, x).unwrap(), zm, max_relative = 1e-12);
        assert_relative_eq!(zeta_e(l, x).unwrap(), ze, max_relative = 1e-12);
    }
}

#[test]
fn dipole_tmatrix_of_unit_sphere() {
    assert_relative_eq!(
        tmatrix_conducting_sphere(1, Polarization::E, 1.0).unwrap(),
        0.73150934982177503787,
        max_relative = 1e-12
    );
    assert_relative_eq!(tmatrix_conducting_sphere(1, Polarization::M, 1.0).unwrap(), -0.5, max_relative = 1e-12);
}

#[test]
fn three_j_values() {
    // (L j2 j3; 0 m -m)
    let cases: [(u32, u32, u32, i32, f64); 5] = [
        (60, 60, 40, 30, -0.011051660053714349),
        (61, 59, 100, 5, 0.009010284676334624),
        (45, 50, 7, 20, 0.026934699431196786),
        (30, 30, 60, 30, 2.924726368628541e-19),
        (12, 7, 9, 3, 0.06050281976333085),
    ];
    for (j2, j3, l, m, want) in cases {
        let seq = wigner_3j_m_sequence(j2, j3, m);
        let got = seq[(l - j2.abs_diff(j3)) as usize];
        assert_relative_eq!(got, want, max_relative = 1e-10);
    }
}

#[test]
fn dipole_coefficients_at_half_radius() {
    let q = QuadratureSpec::with_tolerance(1e-11);
    let c = dipole_coefficients(0.5, Side::Interior, &q, &TruncationSpec { l_max: 80 }).unwrap();
    assert_relative_eq!(c.f_e, -12.4782411136512, max_relative = 1e-9);
    assert_relative_eq!(c.f_m, 15.690357326256, max_relative = 1e-9);
    assert_relative_eq!(c.g_e, 0.0982522211977007, max_relative = 1e-8);
    assert_relative_eq!(c.g_m, 0.11317489295746, max_relative = 1e-8);
    assert_relative_eq!(f_at_center(Polarization::E, &q).unwrap(), -3.18018494913723, max_relative = 1e-10);
    assert_relative_eq!(f_at_center(Polarization::M, &q).unwrap(), 4.68461917337486, max_relative = 1e-10);
}
