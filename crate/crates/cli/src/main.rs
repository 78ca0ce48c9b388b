//! `matdiff`: sample products of random matrices, compute their analytic
//! supports and densities, and compare the two.

mod io;
mod manifest;
mod plot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use matdiff::{
    boundary_complex_finite_m, boundary_complex_inf, boundary_complex_m2, boundary_hermitian_inf,
    containment_with, critical_tau_complex_inf, critical_tau_hermitian_m2, density_complex_inf, density_finite_m,
    density_hermitian_inf, real_density_hermitian_m2, real_support_hermitian_m2, sample_cloud, BoundaryCurve,
    Complex64, DensityGrid, DensityValue, EnsembleKind, GridSpec, PolarPoint, ProductConfig, RandomSeed, Topology,
    DEFAULT_BALANCE_THRESHOLD, DEFAULT_HOLE_DEFLATION, DEFAULT_INFLATION,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

use manifest::RunManifest;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable inputs or inputs that do not match their schema.
    Usage(String),
    /// A solver or sampler failed.
    Numerical(String),
}

impl CliError {
    pub fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Usage(format!("{}: {e}", path.display()))
    }

    pub fn schema(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Usage(format!("{}: schema mismatch: {e}", path.display()))
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<matdiff::Error> for CliError {
    fn from(e: matdiff::Error) -> Self {
        use matdiff::Error::*;
        match e {
            InvalidDimension(_) | InvalidInput(_) | Phase { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "matdiff", version, about = "Spectra of products of Gaussian random matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample eigenvalues of Y = Π (1 + √(τ/M) X_i) to CSV.
    Sample(SampleArgs),
    /// Write the analytic support boundary as polar CSV.
    Boundary(BoundaryArgs),
    /// Evaluate the analytic density on a grid.
    Density(DensityArgs),
    /// Compare an eigenvalue CSV with a boundary CSV.
    Compare(CompareArgs),
    /// Draw eigenvalues and boundaries as SVG.
    Plot(PlotArgs),
    /// Print the critical time of a transition as JSON.
    Critical(CriticalArgs),
    /// Rerun a command from its manifest.
    Replay(ReplayArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Ensemble {
    Gue,
    Ginibre,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Model {
    /// Two complex factors.
    ComplexM2,
    /// M complex factors; needs --m.
    ComplexFinite,
    /// Infinitely many complex factors.
    ComplexInf,
    /// Infinitely many hermitian factors.
    HermInf,
    /// Two hermitian factors below the critical time; real support.
    HermM2Real,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum CriticalModel {
    /// Two hermitian factors: eigenvalues leave the real axis.
    HermM2,
    /// Infinite complex product: a hole opens.
    ComplexInf,
}

#[derive(Args, Serialize, Deserialize)]
struct SampleArgs {
    #[arg(long, value_enum)]
    ensemble: Ensemble,
    /// Matrix size N.
    #[arg(long)]
    n: usize,
    /// Number of factors M.
    #[arg(long)]
    m: usize,
    #[arg(long)]
    tau: f64,
    #[arg(long, default_value_t = 1)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Multiply eigenvalues by e^{-τ/2}.
    #[arg(long)]
    rescale: bool,
    #[arg(long, default_value_t = DEFAULT_BALANCE_THRESHOLD)]
    balance_threshold: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize, Deserialize)]
struct BoundaryArgs {
    #[arg(long, value_enum)]
    model: Model,
    /// Number of factors for complex-finite.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    tau: f64,
    /// Angular resolution.
    #[arg(long, default_value_t = 512)]
    points: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize, Deserialize)]
struct DensityArgs {
    #[arg(long, value_enum)]
    model: Model,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    tau: f64,
    /// Cell counts NX NY.
    #[arg(long, num_args = 2, value_names = ["NX", "NY"], default_values_t = [100, 100])]
    grid: Vec<usize>,
    /// Window X0 X1 Y0 Y1.
    #[arg(long, num_args = 4, value_names = ["X0", "X1", "Y0", "Y1"], allow_negative_numbers = true, required = true)]
    window: Vec<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize, Deserialize)]
struct CompareArgs {
    /// Eigenvalue CSV (`re,im,sample_index`).
    #[arg(long)]
    eig: PathBuf,
    /// Boundary CSV (`curve_id,r,phi`).
    #[arg(long)]
    boundary: PathBuf,
    /// Distance around the curves that still counts as inside.
    #[arg(long, default_value_t = DEFAULT_INFLATION)]
    inflate: f64,
    /// Radial factor applied to the rim of a hole before counting points in it.
    #[arg(long, default_value_t = DEFAULT_HOLE_DEFLATION)]
    hole_deflation: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize, Deserialize)]
struct PlotArgs {
    #[arg(long)]
    eig: Option<PathBuf>,
    /// One or more boundary CSVs, each drawn in its own colour.
    #[arg(long, num_args = 1..)]
    boundary: Vec<PathBuf>,
    /// Multiply eigenvalues by e^{-τ/2} before drawing.
    #[arg(long, allow_negative_numbers = true)]
    rescale_exp: Option<f64>,
    /// Side of the square plot area in pixels.
    #[arg(long, default_value_t = 640.0)]
    size: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize, Deserialize)]
struct CriticalArgs {
    #[arg(long, value_enum)]
    model: CriticalModel,
    /// Also write the JSON to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    manifest: PathBuf,
    /// Write to this path instead of the recorded output.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprintln!("error: {m}"),
                CliError::Numerical(m) => eprintln!("numerical failure: {m}"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Sample(a) => sample(&a),
        Command::Boundary(a) => boundary(&a),
        Command::Density(a) => density(&a),
        Command::Compare(a) => compare(&a),
        Command::Plot(a) => plot(&a),
        Command::Critical(a) => critical(&a),
        Command::Replay(a) => replay(&a),
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn sample(a: &SampleArgs) -> Result<(), CliError> {
    let kind = match a.ensemble {
        Ensemble::Gue => EnsembleKind::Gue,
        Ensemble::Ginibre => EnsembleKind::Ginibre,
    };
    let config = ProductConfig::new(kind, a.n, a.m, a.tau)
        .samples(a.samples)
        .seed(RandomSeed::new(a.seed, 0))
        .rescale(a.rescale)
        .balance_threshold(a.balance_threshold);
    config.validate()?;
    let cloud = sample_cloud(&config)?;
    io::write_eigenvalues(&a.out, &cloud.eigenvalues, a.n)?;
    let summary = json!({ "rows": cloud.eigenvalues.len() });
    RunManifest::new("sample", a, Some(a.seed), vec![a.out.clone()], summary).write(&a.out)?;
    Ok(())
}

fn check_tau(tau: f64) -> Result<(), CliError> {
    if tau.is_finite() && tau > 0.0 {
        Ok(())
    } else {
        Err(usage(format!("--tau must be positive, got {tau}")))
    }
}

fn finite_m(model: Model, m: Option<usize>) -> Result<usize, CliError> {
    match (model, m) {
        (Model::ComplexFinite, Some(m)) if m >= 2 => Ok(m),
        (Model::ComplexFinite, Some(m)) => Err(usage(format!("--m must be at least 2, got {m}"))),
        (Model::ComplexFinite, None) => Err(usage("--model complex-finite needs --m")),
        (_, Some(_)) => Err(usage("--m only applies to --model complex-finite")),
        (_, None) => Ok(2),
    }
}

fn boundary_curve(model: Model, m: Option<usize>, tau: f64, points: usize) -> Result<BoundaryCurve, CliError> {
    check_tau(tau)?;
    let m = finite_m(model, m)?;
    Ok(match model {
        Model::ComplexM2 => boundary_complex_m2(tau, points)?,
        Model::ComplexFinite => boundary_complex_finite_m(tau, m, points)?,
        Model::ComplexInf => boundary_complex_inf(tau, points)?,
        Model::HermInf => boundary_hermitian_inf(tau, points)?,
        Model::HermM2Real => {
            let (lo, hi) = real_support_hermitian_m2(tau)?;
            let n = points.max(2);
            let pts = (0..n)
                .map(|k| PolarPoint::new(lo + (hi - lo) * k as f64 / (n - 1) as f64, 0.0))
                .chain((1..n - 1).rev().map(|k| PolarPoint::new(lo + (hi - lo) * k as f64 / (n - 1) as f64, 0.0)))
                .collect();
            BoundaryCurve {
                curves: vec![BoundaryCurve::closed(pts)],
                topology: Topology::RealSegment,
            }
        }
    })
}

fn boundary(a: &BoundaryArgs) -> Result<(), CliError> {
    if a.points < 8 {
        return Err(usage("--points must be at least 8"));
    }
    let curve = boundary_curve(a.model, a.m, a.tau, a.points)?;
    io::write_boundary(&a.out, &curve)?;
    let summary = json!({
        "topology": curve.topology.name(),
        "curves": curve.curves.len(),
        "max_radius": curve.max_radius(),
    });
    RunManifest::new("boundary", a, None, vec![a.out.clone()], summary).write(&a.out)?;
    Ok(())
}

fn density(a: &DensityArgs) -> Result<(), CliError> {
    check_tau(a.tau)?;
    let m = finite_m(a.model, a.m)?;
    let (nx, ny) = (a.grid[0], a.grid[1]);
    let [x0, x1, y0, y1] = [a.window[0], a.window[1], a.window[2], a.window[3]];
    let spec = GridSpec::new((x0, x1), (y0, y1), nx, ny);
    spec.validate()?;

    if a.model == Model::HermM2Real {
        // a line density: NX points on [X0, X1] at y = 0
        let dx = (x1 - x0) / nx as f64;
        let xs: Vec<f64> = (0..nx).map(|i| x0 + (i as f64 + 0.5) * dx).collect();
        let rho = real_density_hermitian_m2(&xs, a.tau)?;
        let rows: Vec<(f64, f64, f64)> = xs.iter().zip(&rho).map(|(&x, &r)| (x, 0.0, r)).collect();
        io::write_density(&a.out, &rows)?;
        let summary = json!({
            "normalization": rho.iter().sum::<f64>() * dx,
            "unreliable_cells": 0,
            "max_abs_imag": 0.0,
            "min_reliable_value": rho.iter().copied().fold(f64::INFINITY, f64::min),
        });
        RunManifest::new("density", a, None, vec![a.out.clone()], summary).write(&a.out)?;
        return Ok(());
    }

    let centres: Vec<Complex64> = (0..ny)
        .flat_map(|iy| (0..nx).map(move |ix| (ix, iy)))
        .map(|(ix, iy)| spec.centre(ix, iy))
        .collect();
    // the density at the origin is not defined by the log-polar solvers
    let (zero, off): (Vec<usize>, Vec<usize>) = (0..centres.len()).partition(|&k| centres[k].norm() == 0.0);
    let off_pts: Vec<Complex64> = off.iter().map(|&k| centres[k]).collect();
    let off_values = match a.model {
        Model::ComplexM2 | Model::ComplexFinite => density_finite_m(&off_pts, a.tau, m)?,
        Model::ComplexInf => density_complex_inf(&off_pts, a.tau)?,
        Model::HermInf => density_hermitian_inf(&off_pts, a.tau)?,
        Model::HermM2Real => unreachable!(),
    };
    let mut values = vec![DensityValue::ZERO; centres.len()];
    for (k, v) in off.iter().zip(off_values) {
        values[*k] = v;
    }
    for &k in &zero {
        values[k].reliable = false;
    }
    let grid = DensityGrid {
        spec,
        values: values.iter().map(|v| v.value).collect(),
        imag: values.iter().map(|v| v.imag).collect(),
        reliable: values.iter().map(|v| v.reliable).collect(),
        outside: 0,
    };
    let rows: Vec<(f64, f64, f64)> = centres.iter().zip(&grid.values).map(|(z, &v)| (z.re, z.im, v)).collect();
    io::write_density(&a.out, &rows)?;
    let min_reliable = grid
        .values
        .iter()
        .zip(&grid.reliable)
        .filter(|(_, &r)| r)
        .map(|(&v, _)| v)
        .fold(f64::INFINITY, f64::min);
    let summary = json!({
        "normalization": grid.mass(),
        "unreliable_cells": grid.reliable.iter().filter(|&&r| !r).count(),
        "max_abs_imag": grid.imag.iter().fold(0.0f64, |a, b| a.max(b.abs())),
        "min_reliable_value": min_reliable,
    });
    RunManifest::new("density", a, None, vec![a.out.clone()], summary).write(&a.out)?;
    Ok(())
}

fn compare(a: &CompareArgs) -> Result<(), CliError> {
    let points = io::read_eigenvalues(&a.eig)?;
    let curve = io::read_boundary(&a.boundary)?;
    let report = containment_with(&points, &curve, a.inflate, a.hole_deflation)?;
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    std::fs::write(&a.out, text).map_err(|e| CliError::io(&a.out, e))?;
    let summary = json!({ "contained_fraction": report.contained_fraction, "topology": report.topology.name() });
    RunManifest::new("compare", a, None, vec![a.out.clone()], summary).write(&a.out)?;
    Ok(())
}

fn plot(a: &PlotArgs) -> Result<(), CliError> {
    if a.eig.is_none() && a.boundary.is_empty() {
        return Err(usage("nothing to plot: pass --eig and/or --boundary"));
    }
    if !(a.size.is_finite() && a.size >= 50.0) {
        return Err(usage("--size must be at least 50"));
    }
    let mut points = match &a.eig {
        Some(p) => io::read_eigenvalues(p)?,
        None => Vec::new(),
    };
    if let Some(tau) = a.rescale_exp {
        let f = (-tau / 2.0).exp();
        points.iter_mut().for_each(|z| *z *= f);
    }
    let curves = a
        .boundary
        .iter()
        .map(|p| io::read_boundary(p).map(|c| c.polygons()))
        .collect::<Result<Vec<_>, _>>()?;
    if points.is_empty() && curves.is_empty() {
        return Err(usage("inputs are empty"));
    }
    let svg = plot::render(&points, &curves, a.size);
    std::fs::write(&a.out, svg).map_err(|e| CliError::io(&a.out, e))?;
    let summary = json!({ "points": points.len(), "boundaries": curves.len() });
    RunManifest::new("plot", a, None, vec![a.out.clone()], summary).write(&a.out)?;
    Ok(())
}

fn critical(a: &CriticalArgs) -> Result<(), CliError> {
    let tau = match a.model {
        CriticalModel::HermM2 => critical_tau_hermitian_m2()?,
        CriticalModel::ComplexInf => critical_tau_complex_inf()?,
    };
    let text = format!("{}\n", json!({ "tau_crit": tau }));
    print!("{text}");
    if let Some(out) = &a.out {
        std::fs::write(out, &text).map_err(|e| CliError::io(out, e))?;
        RunManifest::new("critical", a, None, vec![out.clone()], json!({})).write(out)?;
    }
    Ok(())
}

fn replay(a: &ReplayArgs) -> Result<(), CliError> {
    let m = RunManifest::read(&a.manifest)?;
    if m.version != env!("CARGO_PKG_VERSION") {
        eprintln!("warning: manifest written by version {}, running {}", m.version, env!("CARGO_PKG_VERSION"));
    }
    let args = m.to_args(a.out.as_deref()).map_err(|e| CliError::schema(&a.manifest, e))?;
    let cli = Cli::try_parse_from(&args).map_err(|e| CliError::schema(&a.manifest, e.render()))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(CliError::schema(&a.manifest, "a manifest cannot replay another manifest"));
    }
    run(cli.command)
}
