use std::time::Instant;

use casimir_core::analysis::{fit_force_expansion, fit_gf_ratio, fit_theta1_curve, FitResult, FitWindow, SeriesSample};
use casimir_core::dataset::Dataset;
use casimir_core::dipole::{dipole_coefficients, dipole_truncation, Side};
use casimir_core::pfa::{extract_theta1, pfa_leading_force, theta1_pfa_big_r, theta1_pfa_r, ForceSampling};
use casimir_core::scattering::{
    casimir_energy, casimir_energy_extrapolated, casimir_force_extrapolated, force_with_error, ForceResult,
};
use casimir_core::{CasimirError, Configuration, Geometry, Polarization, QuadratureSpec, Result, TruncationSpec};
use serde_json::{json, Value};

use crate::args::{
    Command, DipoleScanArgs, EnergyArgs, FitArgs, ForceArgs, GeometryArgs, ModelArg, NumericsArgs, PfaArgs,
    Theta1Args, Unit,
};
use crate::grid::parse_window;
use crate::output::{emit_dataset, number, units_header, ConfigEcho, Record};

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::DipoleScan(a) => dipole_scan(&a),
        Command::Energy(a) => energy(&a),
        Command::Force(a) => force(&a),
        Command::Theta1(a) => theta1(&a),
        Command::Pfa(a) => pfa(&a),
        Command::Fit(a) => fit(&a),
    }
}

fn invalid(msg: impl Into<String>) -> CasimirError {
    CasimirError::InvalidInput(msg.into())
}

fn quadrature(n: &NumericsArgs) -> Result<QuadratureSpec> {
    if !(n.tol > 0.0 && n.tol < 1.0) {
        return Err(invalid(format!("--tol must lie in (0, 1), got {}", n.tol)));
    }
    let mut q = QuadratureSpec::with_tolerance(n.tol);
    if let Some(nodes) = n.nodes {
        if nodes < 15 {
            return Err(invalid(format!("--nodes must be at least 15 (one 15-point panel), got {nodes}")));
        }
        q.max_intervals = nodes.div_ceil(15);
    }
    q.validate()?;
    Ok(q)
}

/// `None` means automatic.
fn fixed_lmax(n: &NumericsArgs) -> Result<Option<u32>> {
    match n.lmax.as_deref() {
        None | Some("auto") => Ok(None),
        Some(s) => {
            let l: u32 = s.parse().map_err(|_| invalid(format!("--lmax must be a positive integer or `auto`, got `{s}`")))?;
            TruncationSpec::new(l)?;
            Ok(Some(l))
        }
    }
}

/// Cutoff that resolves features of size `d` on the smaller sphere.
fn auto_lmax(geom: &Geometry) -> u32 {
    let rho = match geom.configuration() {
        Configuration::Exterior => geom.r.min(geom.r_signed),
        _ => geom.r,
    };
    ((10.0 * rho / geom.separation()).ceil() as u32 + 10).clamp(20, 120)
}

fn truncation(n: &NumericsArgs, geom: &Geometry) -> Result<TruncationSpec> {
    TruncationSpec::new(fixed_lmax(n)?.unwrap_or_else(|| auto_lmax(geom)))
}

fn echo_numerics(echo: &mut ConfigEcho, n: &NumericsArgs) {
    echo.push("lmax", n.lmax.as_deref().unwrap_or("auto"));
    echo.push("tol", n.tol);
    echo.push("nodes", n.nodes.map_or("default".to_string(), |v| v.to_string()));
}

fn configuration_name(c: Configuration) -> &'static str {
    match c {
        Configuration::Interior => "interior",
        Configuration::Exterior => "exterior",
        Configuration::Plane => "plane",
    }
}

fn geometry(g: &GeometryArgs) -> Result<Geometry> {
    let a = match (g.a, g.d) {
        (Some(a), None) => a,
        (None, Some(d)) => {
            if !(d > 0.0) {
                return Err(CasimirError::Domain(format!("--d must be positive, got {d}")));
            }
            if g.big_r == f64::INFINITY {
                g.r + d
            } else if g.big_r < 0.0 {
                -g.big_r - g.r - d
            } else {
                g.r + g.big_r + d
            }
        }
        _ => return Err(invalid("give the position with either --a or --d")),
    };
    Geometry::new(g.r, g.big_r, a)
}

fn echo_geometry(echo: &mut ConfigEcho, g: &GeometryArgs) {
    echo.push("r", g.r).push("R", g.big_r);
    if let Some(a) = g.a {
        echo.push("a", a);
    }
    if let Some(d) = g.d {
        echo.push("d", d);
    }
}

/// Length of the chosen unit in the caller's length scale.
fn unit_length(unit: Unit, r: f64, big_r: f64, d: Option<f64>) -> Result<f64> {
    match unit {
        Unit::SmallR => Ok(r),
        Unit::BigR if big_r.is_finite() => Ok(big_r.abs()),
        Unit::BigR => Err(invalid("--units R needs a finite --R; use --units r or d")),
        Unit::D => d.ok_or_else(|| invalid("--units d needs a single separation; use --units r for scans")),
    }
}

/// Separate energies and forces for one geometry.
struct Evaluated {
    energy_like: f64,
    error: f64,
    separation_force: Option<f64>,
    l_max: u32,
    series: Vec<(u32, f64)>,
}

fn evaluate_force(geom: &Geometry, trunc: &TruncationSpec, extrapolate: bool, step: u32, quad: &QuadratureSpec) -> Result<Evaluated> {
    let (f, series): (ForceResult, _) = if extrapolate {
        casimir_force_extrapolated(geom, trunc, step, quad)?
    } else {
        (force_with_error(geom, trunc, quad)?, Vec::new())
    };
    Ok(Evaluated {
        energy_like: f.force,
        error: f.error_estimate,
        separation_force: Some(f.separation_force),
        l_max: trunc.l_max,
        series,
    })
}

fn series_value(series: &[(u32, f64)], scale: f64) -> Value {
    Value::Array(series.iter().map(|&(l, v)| json!({ "l_max": l, "value": number(v * scale) })).collect())
}

fn energy(args: &EnergyArgs) -> Result<()> {
    let start = Instant::now();
    let geom = geometry(&args.geometry)?;
    let quad = quadrature(&args.numerics)?;
    let trunc = truncation(&args.numerics, &geom)?;
    let unit = args.output.units.unwrap_or(Unit::SmallR);
    let len = unit_length(unit, geom.r, geom.r_signed, Some(geom.separation()))?;

    let res = if args.extrapolate {
        let (e, series) = casimir_energy_extrapolated(&geom, &trunc, args.lstep, &quad)?;
        Evaluated { energy_like: e.energy, error: e.error_estimate, separation_force: None, l_max: e.l_max_used, series }
    } else {
        let e = casimir_energy(&geom, &trunc, &quad)?;
        Evaluated { energy_like: e.energy, error: e.error_estimate, separation_force: None, l_max: e.l_max_used, series: Vec::new() }
    };

    let mut echo = ConfigEcho::default();
    echo_geometry(&mut echo, &args.geometry);
    echo_numerics(&mut echo, &args.numerics);
    echo.push("extrapolate", args.extrapolate).push("lstep", args.lstep);

    let mut rec = Record::new("energy", &units_header(unit.label()));
    rec.set("config", echo.to_value());
    rec.set("configuration", configuration_name(geom.configuration()));
    rec.num("a", geom.a / len);
    rec.num("d", geom.separation() / len);
    rec.num("energy", res.energy_like * len);
    rec.num("error_estimate", res.error * len);
    rec.set("l_max", res.l_max);
    rec.set("extrapolated", args.extrapolate);
    if args.extrapolate {
        rec.set("series", series_value(&res.series, len));
    }
    if args.timings {
        rec.num("elapsed_s", start.elapsed().as_secs_f64());
    }
    rec.emit(args.output.out.as_deref())
}

fn pfa_reference(geom: &Geometry) -> Option<f64> {
    pfa_leading_force(geom.r, geom.r_signed, geom.separation()).ok()
}

fn force(args: &ForceArgs) -> Result<()> {
    let quad = quadrature(&args.numerics)?;
    let g = &args.geometry;
    let unit = args.output.units.unwrap_or(Unit::SmallR);
    let mut echo = ConfigEcho::default();
    echo_geometry(&mut echo, g);
    echo_numerics(&mut echo, &args.numerics);
    echo.push("extrapolate", args.extrapolate).push("lstep", args.lstep);

    let Some(grid) = &args.grid else {
        let geom = geometry(g)?;
        let trunc = truncation(&args.numerics, &geom)?;
        let len = unit_length(unit, geom.r, geom.r_signed, Some(geom.separation()))?;
        let res = evaluate_force(&geom, &trunc, args.extrapolate, args.lstep, &quad)?;
        let sep = res.separation_force.unwrap_or(0.0);
        let mut rec = Record::new("force", &units_header(unit.label()));
        rec.set("config", echo.to_value());
        rec.set("configuration", configuration_name(geom.configuration()));
        rec.num("a", geom.a / len);
        rec.num("d", geom.separation() / len);
        rec.num("force", res.energy_like * len * len);
        rec.num("separation_force", sep * len * len);
        rec.num("error_estimate", res.error * len * len);
        if let Some(lead) = pfa_reference(&geom) {
            rec.num("pfa_force", lead * len * len);
            rec.num("pfa_ratio", sep / lead);
        }
        rec.set("l_max", res.l_max);
        rec.set("extrapolated", args.extrapolate);
        if args.extrapolate {
            rec.set("series", series_value(&res.series, len * len));
        }
        return rec.emit(args.output.out.as_deref());
    };

    if g.a.is_some() || g.d.is_some() {
        return Err(invalid("--grid lists the separations d; drop --a/--d"));
    }
    let len = unit_length(unit, g.r, g.big_r, None)?;
    echo.push("grid", grid.spec());
    let mut ds = Dataset::new(["d", "force", "separation_force", "error", "pfa_force", "pfa_ratio", "l_max"])
        .with_meta("units", units_header(unit.label()))
        .with_meta("command", "force");
    echo.apply(&mut ds);
    ds.set_meta("geometry.r", g.r / len);
    ds.set_meta("geometry.R", g.big_r / len);
    for &d in &grid.values {
        let geom = geometry(&GeometryArgs { d: Some(d), ..g.clone() })?;
        let trunc = truncation(&args.numerics, &geom)?;
        let res = evaluate_force(&geom, &trunc, args.extrapolate, args.lstep, &quad)?;
        let sep = res.separation_force.unwrap_or(0.0);
        let lead = pfa_reference(&geom).unwrap_or(f64::NAN);
        let f2 = len * len;
        ds.push_row(vec![d / len, res.energy_like * f2, sep * f2, res.error * f2, lead * f2, sep / lead, res.l_max as f64])?;
    }
    emit_dataset(args.output.out.as_deref(), &ds)
}

fn dipole_scan(args: &DipoleScanArgs) -> Result<()> {
    if let Some(u) = args.output.units {
        if u != Unit::BigR {
            return Err(invalid("dipole-scan has only the length R; --units must be R"));
        }
    }
    if !(args.big_r > 0.0) || !args.big_r.is_finite() {
        return Err(invalid(format!("--R must be positive and finite, got {}", args.big_r)));
    }
    let quad = quadrature(&args.numerics)?;
    let fixed = fixed_lmax(&args.numerics)?;
    let mut echo = ConfigEcho::default();
    echo.push("R", args.big_r).push("grid", args.grid.spec());
    echo_numerics(&mut echo, &args.numerics);
    let mut ds = Dataset::new(["x", "f_E", "f_M", "g_E", "g_M", "gf_ratio_E", "gf_ratio_M", "err"])
        .with_meta("units", units_header("R"))
        .with_meta("command", "dipole-scan");
    echo.apply(&mut ds);
    for &x in &args.grid.values {
        let side = if x < 1.0 {
            Side::Interior
        } else if x > 1.0 {
            Side::Exterior
        } else {
            return Err(CasimirError::Domain("x = a/R = 1 puts the particle on the sphere; leave it out of the grid".into()));
        };
        if x < 0.0 {
            return Err(CasimirError::Domain(format!("x = a/R must be non-negative, got {x}")));
        }
        let trunc = fixed.map_or_else(|| dipole_truncation(x), |l| TruncationSpec { l_max: l });
        let c = dipole_coefficients(x, side, &quad, &trunc)?;
        let ratio = |p| if c.f(p) == 0.0 { 0.0 } else { c.gf_ratio(p) };
        ds.push_row(vec![x, c.f_e, c.f_m, c.g_e, c.g_m, ratio(Polarization::E), ratio(Polarization::M), c.error])?;
    }
    emit_dataset(args.output.out.as_deref(), &ds)
}

fn theta1(args: &Theta1Args) -> Result<()> {
    let (wmin, wmax) = parse_window(&args.window).map_err(invalid)?;
    let window = FitWindow { min: wmin, max: wmax };
    let quad = quadrature(&args.numerics)?;
    if !(args.r > 0.0) || !args.r.is_finite() {
        return Err(invalid(format!("--r must be positive, got {}", args.r)));
    }
    let separations: Vec<f64> = args.grid.values.iter().map(|u| u * args.r).collect();
    let mut echo = ConfigEcho::default();
    echo.push("r", args.r)
        .push("x", args.x.iter().map(f64::to_string).collect::<Vec<_>>().join(","))
        .push("grid", args.grid.spec())
        .push("window", &args.window)
        .push("lstep", args.lstep);
    echo_numerics(&mut echo, &args.numerics);

    let mut ds = Dataset::new(["x", "theta1", "theta1_err", "theta2", "theta2_err", "theta1_pfa", "samples"])
        .with_meta("units", "dimensionless")
        .with_meta("command", "theta1");
    echo.apply(&mut ds);
    let mut raw = Dataset::new(["x", "d", "separation_force", "error"]).with_meta("units", units_header("r"));
    echo.apply(&mut raw);

    let mut curve = Vec::new();
    for &x in &args.x {
        // the smallest separation in the window sets the automatic cutoff
        let d_min = separations
            .iter()
            .copied()
            .filter(|d| window.contains(d / args.r))
            .fold(f64::INFINITY, f64::min);
        if !d_min.is_finite() {
            return Err(invalid(format!("no grid point lies inside the window {}", args.window)));
        }
        let probe = casimir_core::pfa::geometry_for_ratio(x, args.r, d_min)?;
        let trunc = truncation(&args.numerics, &probe)?;
        let sampling = ForceSampling { trunc, l_step: args.lstep, quad };
        let inside: Vec<f64> = separations.iter().copied().filter(|d| window.contains(d / args.r)).collect();
        let (fit, samples) = extract_theta1(x, args.r, &inside, &sampling, &window)?;
        for s in &samples {
            raw.push_row(vec![x, s.abscissa / args.r, s.value * args.r * args.r, s.sigma * args.r * args.r])?;
        }
        let (t1, t1e) = (fit.coefficients[0], fit.total_uncertainty(0));
        ds.push_row(vec![x, t1, t1e, fit.coefficients[1], fit.total_uncertainty(1), theta1_pfa_r(x)?, fit.samples as f64])?;
        curve.push(SeriesSample::new(x, t1, t1e));
    }
    if curve.len() >= 3 {
        match fit_theta1_curve(&curve) {
            Ok(f) => put_fit_meta(&mut ds, &f),
            Err(e) => ds.set_meta("fit.status", e.to_string()),
        }
    }
    if let Some(path) = &args.samples_out {
        emit_dataset(Some(path), &raw)?;
    }
    emit_dataset(args.output.out.as_deref(), &ds)
}

fn put_fit_meta(ds: &mut Dataset, f: &FitResult) {
    ds.set_meta("fit.model", f.model.name());
    for (k, name) in f.model.parameter_names().iter().enumerate() {
        ds.set_meta(format!("fit.{name}"), f.coefficients[k]);
        ds.set_meta(format!("fit.{name}_err"), f.total_uncertainty(k));
    }
    ds.set_meta("fit.residual_norm", f.residual_norm);
}

fn pfa(args: &PfaArgs) -> Result<()> {
    let g = &args.geometry;
    let geom = geometry(g)?;
    let d = geom.separation();
    let unit = args.output.units.unwrap_or(Unit::SmallR);
    let len = unit_length(unit, geom.r, geom.r_signed, Some(d))?;
    let lead = pfa_leading_force(geom.r, geom.r_signed, d)?;
    let x = geom.radius_ratio();
    let mut echo = ConfigEcho::default();
    echo_geometry(&mut echo, g);

    let mut rec = Record::new("pfa", &units_header(unit.label()));
    rec.set("config", echo.to_value());
    rec.set("configuration", configuration_name(geom.configuration()));
    rec.num("x", x);
    rec.num("d", d / len);
    rec.num("pfa_force", lead * len * len);
    rec.num("theta1_pfa_r", theta1_pfa_r(x)?);
    rec.num("theta1_pfa_R", theta1_pfa_big_r(x)?);
    rec.emit(args.output.out.as_deref())
}

fn fit(args: &FitArgs) -> Result<()> {
    let file = std::fs::File::open(&args.input).map_err(|e| CasimirError::Io(format!("{}: {e}", args.input.display())))?;
    let ds = Dataset::read_from(std::io::BufReader::new(file))?;
    let (xdef, ydef, sdef) = match args.model {
        ModelArg::Force => ("d", "separation_force", "error"),
        ModelArg::Theta1 => ("x", "theta1", "theta1_err"),
        ModelArg::Gf => ("x", "gf_ratio_E", "err"),
    };
    let xcol = args.xcol.as_deref().unwrap_or(xdef);
    let ycol = args.ycol.as_deref().unwrap_or(ydef);
    // the natural sigma column is used only for the models it belongs to
    let sigma = match (&args.sigma, args.model) {
        (Some(s), _) => Some(s.as_str()),
        (None, ModelArg::Gf) => None,
        (None, _) => ds.column_index(sdef).map(|_| sdef),
    };
    let samples = ds.samples(xcol, ycol, sigma)?;

    let meta_f64 = |key: &str| ds.meta(key).and_then(|v| v.parse::<f64>().ok());
    let result = match args.model {
        ModelArg::Force => {
            let r = args.r.or_else(|| meta_f64("geometry.r")).ok_or_else(|| invalid("force fit needs --r"))?;
            let big_r = args.big_r.or_else(|| meta_f64("geometry.R")).ok_or_else(|| invalid("force fit needs --R"))?;
            let (min, max) = parse_window(&args.window).map_err(invalid)?;
            fit_force_expansion(&samples, r, big_r, &FitWindow { min, max })?
        }
        ModelArg::Theta1 => fit_theta1_curve(&samples)?,
        ModelArg::Gf => fit_gf_ratio(&samples)?,
    };

    let mut echo = ConfigEcho::default();
    echo.push("input", args.input.display())
        .push("model", result.model.name())
        .push("xcol", xcol)
        .push("ycol", ycol)
        .push("sigma", sigma.unwrap_or("none"));
    let units = ds.meta("units").unwrap_or("unspecified").to_string();
    let mut rec = Record::new("fit", &units);
    rec.set("config", echo.to_value());
    rec.set("model", result.model.name());
    for (k, name) in result.model.parameter_names().iter().enumerate() {
        rec.num(name, result.coefficients[k]);
        rec.num(&format!("{name}_stat"), result.uncertainties[k]);
        rec.num(&format!("{name}_sys"), result.systematic.get(k).copied().unwrap_or(0.0));
    }
    rec.num("residual_norm", result.residual_norm);
    rec.num("max_residual", result.max_residual);
    rec.set("samples", result.samples);
    rec.emit(args.output.out.as_deref())
}
