//! Python bindings: `import casimir`.
//!
//! Results come back as plain dicts. Errors map onto Python exceptions by
//! category: bad input and domain violations raise `ValueError`, numerical
//! failures `ArithmeticError`, ill-conditioned fits `RuntimeError`.

use casimir_core::analysis::{fit_theta1_curve as core_fit_theta1_curve, SeriesSample};
use casimir_core::dipole::{self, BodyOrientation, DipoleGeometry, PolarizabilityPair, Side};
use casimir_core::{pfa, scattering, CasimirError, ErrorCategory, QuadratureSpec, TruncationSpec};
use pyo3::exceptions::{PyArithmeticError, PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: CasimirError) -> PyErr {
    let msg = e.to_string();
    match e.category() {
        ErrorCategory::Input | ErrorCategory::Domain => PyValueError::new_err(msg),
        ErrorCategory::Numerical => PyArithmeticError::new_err(msg),
        ErrorCategory::Fit => PyRuntimeError::new_err(msg),
        ErrorCategory::Io => PyOSError::new_err(msg),
    }
}

fn quad(tol: f64) -> PyResult<QuadratureSpec> {
    let q = QuadratureSpec::with_tolerance(tol);
    q.validate().map_err(to_py)?;
    Ok(q)
}

fn trunc(l_max: u32) -> PyResult<TruncationSpec> {
    TruncationSpec::new(l_max).map_err(to_py)
}

/// Sphere of radius `r` and a second surface of signed radius `R`
/// (negative: enclosing shell, positive: outer sphere, `inf`: plane), with
/// center distance `a`.
#[pyclass(frozen, skip_from_py_object, name = "Geometry")]
#[derive(Clone, Copy)]
struct PyGeometry {
    inner: scattering::Geometry,
}

#[pymethods]
impl PyGeometry {
    #[new]
    #[pyo3(signature = (r, R, a))]
    #[allow(non_snake_case)]
    fn new(r: f64, R: f64, a: f64) -> PyResult<Self> {
        Ok(Self { inner: scattering::Geometry::new(r, R, a).map_err(to_py)? })
    }

    #[staticmethod]
    fn interior(r: f64, shell_radius: f64, a: f64) -> PyResult<Self> {
        Ok(Self { inner: scattering::Geometry::interior(r, shell_radius, a).map_err(to_py)? })
    }

    #[staticmethod]
    fn exterior(r: f64, other_radius: f64, a: f64) -> PyResult<Self> {
        Ok(Self { inner: scattering::Geometry::exterior(r, other_radius, a).map_err(to_py)? })
    }

    #[staticmethod]
    fn plane(r: f64, d: f64) -> PyResult<Self> {
        Ok(Self { inner: scattering::Geometry::plane(r, d).map_err(to_py)? })
    }

    /// Geometry with curvature ratio `x = r/R` at surface separation `d`.
    #[staticmethod]
    fn for_ratio(x: f64, r: f64, d: f64) -> PyResult<Self> {
        Ok(Self { inner: pfa::geometry_for_ratio(x, r, d).map_err(to_py)? })
    }

    #[getter]
    fn r(&self) -> f64 {
        self.inner.r
    }

    #[getter(R)]
    fn big_r(&self) -> f64 {
        self.inner.r_signed
    }

    #[getter]
    fn a(&self) -> f64 {
        self.inner.a
    }

    fn separation(&self) -> f64 {
        self.inner.separation()
    }

    fn configuration(&self) -> &'static str {
        match self.inner.configuration() {
            casimir_core::Configuration::Interior => "interior",
            casimir_core::Configuration::Exterior => "exterior",
            casimir_core::Configuration::Plane => "plane",
        }
    }

    fn __repr__(&self) -> String {
        format!("Geometry(r={}, R={}, a={})", self.inner.r, self.inner.r_signed, self.inner.a)
    }
}

/// Exact energy in units of ħc/length.
#[pyfunction]
#[pyo3(signature = (geometry, l_max=30, tol=1e-8, extrapolate=false, l_step=5))]
fn casimir_energy<'py>(
    py: Python<'py>,
    geometry: &PyGeometry,
    l_max: u32,
    tol: f64,
    extrapolate: bool,
    l_step: u32,
) -> PyResult<Bound<'py, PyDict>> {
    let (t, q) = (trunc(l_max)?, quad(tol)?);
    let g = geometry.inner;
    let (res, series) = py
        .detach(|| {
            if extrapolate {
                scattering::casimir_energy_extrapolated(&g, &t, l_step, &q)
            } else {
                scattering::casimir_energy(&g, &t, &q).map(|e| (e, Vec::new()))
            }
        })
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("energy", res.energy)?;
    d.set_item("error_estimate", res.error_estimate)?;
    d.set_item("l_max", res.l_max_used)?;
    d.set_item("extrapolated", res.extrapolated)?;
    d.set_item("series", series)?;
    Ok(d)
}

/// Exact force: `force = -dE/da` and `separation_force = -dE/dd`.
#[pyfunction]
#[pyo3(signature = (geometry, l_max=30, tol=1e-8, extrapolate=false, l_step=5))]
fn casimir_force<'py>(
    py: Python<'py>,
    geometry: &PyGeometry,
    l_max: u32,
    tol: f64,
    extrapolate: bool,
    l_step: u32,
) -> PyResult<Bound<'py, PyDict>> {
    let (t, q) = (trunc(l_max)?, quad(tol)?);
    let g = geometry.inner;
    let (res, series) = py
        .detach(|| {
            if extrapolate {
                scattering::casimir_force_extrapolated(&g, &t, l_step, &q)
            } else {
                scattering::force_with_error(&g, &t, &q).map(|f| (f, Vec::new()))
            }
        })
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("force", res.force)?;
    d.set_item("separation_force", res.separation_force)?;
    d.set_item("error_estimate", res.error_estimate)?;
    d.set_item("series", series)?;
    Ok(d)
}

fn side(name: &str) -> PyResult<Side> {
    match name {
        "interior" => Ok(Side::Interior),
        "exterior" => Ok(Side::Exterior),
        other => Err(PyValueError::new_err(format!("side must be 'interior' or 'exterior', got '{other}'"))),
    }
}

/// `f^E, f^M, g^E, g^M` at `y = a/R`; `l_max=None` picks a cutoff from `y`.
#[pyfunction]
#[pyo3(signature = (y, side="interior", l_max=None, tol=1e-8))]
fn dipole_coefficients<'py>(
    py: Python<'py>,
    y: f64,
    side: &str,
    l_max: Option<u32>,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let s = self::side(side)?;
    let t = match l_max {
        Some(l) => trunc(l)?,
        None => dipole::dipole_truncation(y),
    };
    let q = quad(tol)?;
    let c = py.detach(|| dipole::dipole_coefficients(y, s, &q, &t)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("y", c.y)?;
    d.set_item("f_E", c.f_e)?;
    d.set_item("f_M", c.f_m)?;
    d.set_item("g_E", c.g_e)?;
    d.set_item("g_M", c.g_m)?;
    d.set_item("error", c.error)?;
    Ok(d)
}

/// Long-wavelength energy, force (`-dE/da`) and torque of a small body with
/// diagonal body-frame polarizabilities, displaced by `a` from the center of
/// a sphere of radius `R`.
#[pyfunction]
#[pyo3(signature = (R, a, electric, magnetic, theta=0.0, phi=0.0, side="interior", l_max=None, tol=1e-8))]
#[allow(non_snake_case, clippy::too_many_arguments)]
fn dipole_interaction<'py>(
    py: Python<'py>,
    R: f64,
    a: f64,
    electric: [f64; 3],
    magnetic: [f64; 3],
    theta: f64,
    phi: f64,
    side: &str,
    l_max: Option<u32>,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let geom = DipoleGeometry::new(R, a, self::side(side)?).map_err(to_py)?;
    let pol = PolarizabilityPair::diagonal(electric, magnetic).map_err(to_py)?;
    let o = BodyOrientation::new(theta, phi).map_err(to_py)?;
    let t = match l_max {
        Some(l) => trunc(l)?,
        None => dipole::dipole_truncation(geom.y()),
    };
    let q = quad(tol)?;
    let (e, f, tq, pref) = py
        .detach(|| -> casimir_core::Result<_> {
            Ok((
                dipole::dipole_energy(&geom, &pol, &o, &q, &t)?,
                dipole::dipole_force(&geom, &pol, &o, &q, &t)?,
                dipole::dipole_torque(&geom, &pol, &o, &q, &t)?,
                dipole::preferred_orientation(&geom, &pol, &q, &t)?,
            ))
        })
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("energy", e)?;
    d.set_item("force", f)?;
    d.set_item("torque_theta", tq.theta)?;
    d.set_item("torque_phi", tq.phi)?;
    d.set_item("preferred_class", format!("{:?}", pref.class))?;
    d.set_item("preferred_theta", pref.orientation.theta)?;
    d.set_item("preferred_phi", pref.orientation.phi)?;
    Ok(d)
}

/// Leading PFA force `-(π³/360) rR/(r+R) / d³` (ħc = 1).
#[pyfunction]
#[allow(non_snake_case)]
fn pfa_leading_force(r: f64, R: f64, d: f64) -> PyResult<f64> {
    pfa::pfa_leading_force(r, R, d).map_err(to_py)
}

/// Surface-integral θ₁ for expansion in `d/r`, at `x = r/R`.
#[pyfunction]
fn theta1_pfa_r(x: f64) -> PyResult<f64> {
    pfa::theta1_pfa_r(x).map_err(to_py)
}

/// Surface-integral θ₁ for expansion in `d/R`, at `x = r/R`.
#[pyfunction]
fn theta1_pfa_big_r(x: f64) -> PyResult<f64> {
    pfa::theta1_pfa_big_r(x).map_err(to_py)
}

/// Fit `θ₁(x) = -(k₁x + k₂x/(1+x) + k₃)`; returns `(k, uncertainties)`.
#[pyfunction]
#[pyo3(signature = (x, theta1, sigma=None))]
fn fit_theta1_curve(x: Vec<f64>, theta1: Vec<f64>, sigma: Option<Vec<f64>>) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let sigma = sigma.unwrap_or_else(|| vec![0.0; x.len()]);
    if x.len() != theta1.len() || x.len() != sigma.len() {
        return Err(PyValueError::new_err("x, theta1 and sigma must have equal lengths"));
    }
    let samples: Vec<SeriesSample> = x
        .iter()
        .zip(&theta1)
        .zip(&sigma)
        .map(|((&x, &t), &s)| SeriesSample::new(x, t, s))
        .collect();
    let f = core_fit_theta1_curve(&samples).map_err(to_py)?;
    let unc = (0..f.coefficients.len()).map(|k| f.total_uncertainty(k)).collect();
    Ok((f.coefficients, unc))
}

#[pymodule]
fn casimir(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGeometry>()?;
    m.add_function(wrap_pyfunction!(casimir_energy, m)?)?;
    m.add_function(wrap_pyfunction!(casimir_force, m)?)?;
    m.add_function(wrap_pyfunction!(dipole_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(dipole_interaction, m)?)?;
    m.add_function(wrap_pyfunction!(pfa_leading_force, m)?)?;
    m.add_function(wrap_pyfunction!(theta1_pfa_r, m)?)?;
    m.add_function(wrap_pyfunction!(theta1_pfa_big_r, m)?)?;
    m.add_function(wrap_pyfunction!(fit_theta1_curve, m)?)?;
    Ok(())
}
