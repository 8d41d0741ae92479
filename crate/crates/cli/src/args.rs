use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::grid::Grid;

#[derive(Debug, Parser)]
#[command(
    name = "casimir",
    version,
    about = "Casimir energies, forces and torques for a sphere inside or outside a conducting sphere",
    args_override_self = true
)]
pub struct Cli {
    /// Flat `key = value` file of flag defaults; flags on the command line win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the long-wavelength coefficients f^P, g^P over a/R.
    DipoleScan(DipoleScanArgs),
    /// Exact Casimir energy of one configuration.
    Energy(EnergyArgs),
    /// Exact Casimir force, at one separation or over a grid of separations.
    Force(ForceArgs),
    /// First PFA correction θ₁ (and θ₂) from exact forces.
    Theta1(Theta1Args),
    /// Leading PFA force and the surface-integral correction estimates.
    Pfa(PfaArgs),
    /// Fit a model to columns of a dataset written by another command.
    Fit(FitArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Unit {
    /// Second-surface radius |R|
    #[value(name = "R")]
    BigR,
    /// Sphere radius r
    #[value(name = "r")]
    SmallR,
    /// Surface separation d
    #[value(name = "d")]
    D,
}

impl Unit {
    pub fn label(self) -> &'static str {
        match self {
            Unit::BigR => "R",
            Unit::SmallR => "r",
            Unit::D => "d",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Write the result here instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Length unit of the reported values (ħc = 1 always).
    #[arg(long, value_enum)]
    pub units: Option<Unit>,
}

#[derive(Debug, Clone, Args)]
pub struct NumericsArgs {
    /// Partial-wave cutoff, or `auto`.
    #[arg(long, value_name = "N|auto")]
    pub lmax: Option<String>,
    /// Relative tolerance of the frequency quadrature.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Budget of integrand evaluations per quadrature.
    #[arg(long)]
    pub nodes: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct GeometryArgs {
    /// Sphere radius.
    #[arg(long = "r", default_value_t = 1.0)]
    pub r: f64,
    /// Signed radius of the second surface: negative for an enclosing
    /// shell, positive for an outer sphere, `inf` for a plane.
    #[arg(long = "R", allow_negative_numbers = true)]
    pub big_r: f64,
    /// Distance between the centers (to the plane for `--R inf`).
    #[arg(long, conflicts_with = "d")]
    pub a: Option<f64>,
    /// Surface-to-surface separation.
    #[arg(long)]
    pub d: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct DipoleScanArgs {
    /// Radius of the conducting sphere.
    #[arg(long = "R", default_value_t = 1.0)]
    pub big_r: f64,
    /// Values of x = a/R; points below 1 are inside, above 1 outside.
    #[arg(long, default_value = "0.1:0.9:0.1")]
    pub grid: Grid,
    #[command(flatten)]
    pub numerics: NumericsArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EnergyArgs {
    #[command(flatten)]
    pub geometry: GeometryArgs,
    /// Extrapolate to l → ∞ from six cutoffs spaced by `--lstep`.
    #[arg(long)]
    pub extrapolate: bool,
    #[arg(long, default_value_t = 5)]
    pub lstep: u32,
    /// Add the wall-clock time to the record (which then differs between runs).
    #[arg(long)]
    pub timings: bool,
    #[command(flatten)]
    pub numerics: NumericsArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ForceArgs {
    #[command(flatten)]
    pub geometry: GeometryArgs,
    /// Separations to scan; replaces `--a`/`--d` and writes a CSV table.
    #[arg(long)]
    pub grid: Option<Grid>,
    #[arg(long)]
    pub extrapolate: bool,
    #[arg(long, default_value_t = 5)]
    pub lstep: u32,
    #[command(flatten)]
    pub numerics: NumericsArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct Theta1Args {
    /// Sphere radius.
    #[arg(long = "r", default_value_t = 1.0)]
    pub r: f64,
    /// Curvature ratios x = r/R, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    pub x: Vec<f64>,
    /// Values of d/r at which the force is computed.
    #[arg(long, default_value = "0.05:0.2:0.0375")]
    pub grid: Grid,
    /// Fit window `min:max` in d/r.
    #[arg(long, default_value = "0.05:0.2")]
    pub window: String,
    /// Cutoff spacing for the l → ∞ extrapolation of each force; 0 disables it.
    #[arg(long, default_value_t = 5)]
    pub lstep: u32,
    /// Also write every force sample (x, d, force, error) to this CSV.
    #[arg(long, value_name = "PATH")]
    pub samples_out: Option<PathBuf>,
    #[command(flatten)]
    pub numerics: NumericsArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PfaArgs {
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    /// θ₁, θ₂ from force-vs-separation data (needs --r and --R)
    Force,
    /// k₁, k₂, k₃ from θ₁(x) data
    Theta1,
    /// c₁, c₂ from g/f ratio data
    Gf,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Dataset written by `force`, `theta1` or `dipole-scan`.
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub model: ModelArg,
    /// Abscissa column; defaults to the natural one for the model.
    #[arg(long)]
    pub xcol: Option<String>,
    /// Value column; defaults to the natural one for the model.
    #[arg(long)]
    pub ycol: Option<String>,
    /// Uncertainty column; unweighted fit when absent.
    #[arg(long)]
    pub sigma: Option<String>,
    #[arg(long = "r")]
    pub r: Option<f64>,
    #[arg(long = "R", allow_negative_numbers = true)]
    pub big_r: Option<f64>,
    /// Fit window `min:max` in d/r for the force model.
    #[arg(long, default_value = "0.05:0.2")]
    pub window: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Command-line arguments with a config file's entries spliced in before the
/// user's own flags, so that later (explicit) occurrences override them.
pub fn merged_args(raw: Vec<String>) -> Result<Vec<String>, String> {
    let mut path = None;
    let mut rest = Vec::with_capacity(raw.len());
    let mut it = raw.into_iter();
    if let Some(bin) = it.next() {
        rest.push(bin);
    }
    let mut user = Vec::new();
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(it.next().ok_or("--config needs a path")?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            user.push(a);
        }
    }
    let Some(path) = path else {
        rest.extend(user);
        return Ok(rest);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let from_file = parse_config(&text).map_err(|e| format!("{path}: {e}"))?;
    // the subcommand name must come first; file entries go right after it
    let mut user = user.into_iter();
    if let Some(cmd) = user.next() {
        rest.push(cmd);
    }
    rest.extend(from_file);
    rest.extend(user);
    Ok(rest)
}

/// `key = value` lines (`#` comments, blank lines ignored) as `--key value`.
/// A bare `key` or `key = true` becomes a switch.
pub fn parse_config(text: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = match line.split_once('=') {
            Some((k, v)) => (k.trim(), Some(v.trim())),
            None => (line, None),
        };
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(format!("line {}: malformed key `{key}`", n + 1));
        }
        let flag = format!("--{}", key.trim_start_matches('-'));
        match value {
            None | Some("true") => out.push(flag),
            Some("false") => {}
            Some(v) => {
                out.push(flag);
                out.push(v.to_string());
            }
        }
    }
    Ok(out)
}
