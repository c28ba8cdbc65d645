//! `topoquant`: spectra, Euler densities and their integrals from the shell.
//!
//! Exit codes: 0 success, 1 numerical or check failure, 2 usage or parse error.

mod table;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use topoquant::expr::{parse, Bindings};
use topoquant::geometry::{DensityConvention, GeometryError, MechanicalSystem};
use topoquant::integrate::{
    density_field, integrate_density_2d, integrate_reduced, study_epsilon, study_resolution, study_tolerance,
    turning_point, GridSpec, IntegrationError,
};
use topoquant::spectrum::{spectrum_table, topological_number, OscillatorParams, SpectrumError};
use topoquant::verify;

use table::{Cell, Format, Table};

/// Largest residual `spectrum` accepts before exiting with status 1.
const SPECTRUM_RESIDUAL_LIMIT: f64 = 1e-8;

#[derive(Parser, Debug)]
#[command(name = "topoquant", version, about = "Topological spectrum of classical systems via the Jacobi metric")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate E = hbar*omega*(n + 1/2) and the topological residual per level.
    Spectrum(SpectrumArgs),
    /// Sample phi, K and the Euler density on a grid of cell centres.
    Density(FieldArgs),
    /// Integrate the Euler density (2D grid or the reduced 1D oscillator integral).
    Integrate(IntegrateArgs),
    /// Run the built-in oracle checks.
    Verify,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct SpectrumArgs {
    #[arg(long)]
    n_max: u32,
    /// Transverse constant b (length units, no default).
    #[arg(long)]
    b: f64,
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
    /// Angular frequency; defaults to 1 unless --k is given.
    #[arg(long, conflicts_with = "k")]
    omega: Option<f64>,
    /// Spring constant; omega = sqrt(k/m).
    #[arg(long)]
    k: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    m: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct FieldArgs {
    /// Potential V(q1, q2), e.g. "0.5*k*q1^2 + 0.5*k*q2^2".
    #[arg(long)]
    potential: String,
    /// Parameter binding `name=value`; repeatable.
    #[arg(long = "param", value_parser = parse_binding)]
    params: Vec<(String, f64)>,
    #[arg(long)]
    energy: f64,
    #[arg(long, default_value_t = 1.0)]
    mass: f64,
    /// Box `lo1,hi1,lo2,hi2`.
    #[arg(long = "box", value_parser = parse_box, allow_hyphen_values = true, default_value = "-2,2,-2,2")]
    bounds: [f64; 4],
    /// Cells per axis (a power of two, at least 16).
    #[arg(long, default_value_t = 64)]
    grid: usize,
    /// Relative margin of the allowed region: E - V >= epsilon * max(|E|, 1).
    #[arg(long, default_value_t = topoquant::geometry::DEFAULT_EPSILON)]
    epsilon: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct IntegrateArgs {
    #[arg(long, required_unless_present = "reduced")]
    potential: Option<String>,
    #[arg(long = "param", value_parser = parse_binding)]
    params: Vec<(String, f64)>,
    #[arg(long)]
    energy: f64,
    #[arg(long, default_value_t = 1.0)]
    mass: f64,
    #[arg(long = "box", value_parser = parse_box, allow_hyphen_values = true, default_value = "-2,2,-2,2")]
    bounds: [f64; 4],
    #[arg(long, default_value_t = 256)]
    grid: usize,
    #[arg(long, default_value_t = topoquant::geometry::DEFAULT_EPSILON)]
    epsilon: f64,
    /// Levels of each convergence study (at least 3).
    #[arg(long, default_value_t = 3)]
    levels: usize,
    /// Integrate the reduced oscillator density over [-|q0|, |q0|] instead.
    #[arg(long, requires_all = ["k", "b", "q0"], conflicts_with = "potential")]
    reduced: bool,
    #[arg(long, requires = "reduced")]
    k: Option<f64>,
    #[arg(long, requires = "reduced")]
    b: Option<f64>,
    #[arg(long, requires = "reduced")]
    q0: Option<f64>,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[command(flatten)]
    output: OutputArgs,
}

fn parse_binding(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let name = name.trim();
    if name.is_empty() {
        return Err(format!("empty parameter name in `{s}`"));
    }
    let value: f64 = value.trim().parse().map_err(|_| format!("`{value}` is not a number"))?;
    if !value.is_finite() {
        return Err(format!("parameter `{name}` must be finite"));
    }
    Ok((name.to_string(), value))
}

fn parse_box(s: &str) -> Result<[f64; 4], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("`{p}` is not a number")))
        .collect::<Result<_, _>>()?;
    <[f64; 4]>::try_from(parts).map_err(|_| "expected lo1,hi1,lo2,hi2".to_string())
}

/// Failure with the exit status it maps to.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Numeric(_) => 1,
            Failure::Usage(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Numeric(m) => m,
        }
    }
}

impl From<GeometryError> for Failure {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::OutsideAllowedRegion { .. } | GeometryError::Eval(_) => Failure::Numeric(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<IntegrationError> for Failure {
    fn from(e: IntegrationError) -> Self {
        match e {
            IntegrationError::InvalidArgument(_) => Failure::Usage(e.to_string()),
            IntegrationError::Geometry(g) => g.into(),
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

impl From<SpectrumError> for Failure {
    fn from(e: SpectrumError) -> Self {
        match e {
            SpectrumError::InvalidParameter { .. } | SpectrumError::NegativeLevel(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

/// Rendered output plus the exit status it should be reported with.
struct Report {
    body: String,
    status: Result<(), Failure>,
}

impl Report {
    fn ok(body: String) -> Self {
        Report { body, status: Ok(()) }
    }
}

fn emit(output: &OutputArgs, body: &str) -> Result<(), Failure> {
    match &output.out {
        Some(path) => fs::write(path, body).map_err(|e| Failure::Numeric(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn spectrum(args: &SpectrumArgs) -> Result<Report, Failure> {
    let params = match args.k {
        Some(k) => OscillatorParams::new(args.m, k, args.b, args.hbar)?,
        None => OscillatorParams::from_omega(args.m, args.omega.unwrap_or(1.0), args.b, args.hbar)?,
    };
    let rows = spectrum_table(&params, i64::from(args.n_max))?;
    let mut table = Table::new(&["n", "E", "a", "C", "q0", "residual"]);
    let mut worst: Option<(i64, f64)> = None;
    for r in &rows {
        table.push(vec![
            Cell::Int(r.n),
            Cell::Num(r.energy),
            Cell::Num(r.turning_point),
            Cell::Num(r.c),
            Cell::opt(r.q0),
            Cell::opt(r.residual),
        ]);
        if let Some(res) = r.residual {
            if worst.is_none_or(|(_, w)| res > w) {
                worst = Some((r.n, res));
            }
        }
    }
    let meta = json!({
        "command": "spectrum",
        "n_max": args.n_max,
        "b": params.transverse(),
        "hbar": params.hbar(),
        "omega": params.omega(),
        "k": params.spring(),
        "m": params.mass(),
    });
    let status = match worst {
        Some((n, res)) if res.is_nan() || res > SPECTRUM_RESIDUAL_LIMIT => {
            Err(Failure::Numeric(format!("residual {res:e} at n = {n} exceeds {SPECTRUM_RESIDUAL_LIMIT:e}")))
        }
        _ => Ok(()),
    };
    Ok(Report { body: table.render(args.output.format, meta), status })
}

struct Field {
    system: MechanicalSystem,
    grid: GridSpec,
    meta: Value,
}

#[allow(clippy::too_many_arguments)]
fn build_field(
    command: &str,
    potential: &str,
    params: &[(String, f64)],
    energy: f64,
    mass: f64,
    bounds: [f64; 4],
    cells: usize,
    epsilon: f64,
) -> Result<Field, Failure> {
    let expr = parse(potential).map_err(|e| Failure::Usage(format!("cannot parse potential: {e}")))?;
    let bindings: Bindings = params.iter().cloned().collect();
    let system = MechanicalSystem::isotropic(2, mass, expr, bindings, energy)?;
    let grid = GridSpec::new([bounds[0], bounds[2]], [bounds[1], bounds[3]], cells, epsilon)?;
    let param_meta: serde_json::Map<String, Value> = params.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
    let meta = json!({
        "command": command,
        "potential": potential,
        "params": param_meta,
        "energy": energy,
        "mass": mass,
        "box": bounds,
        "grid": cells,
        "epsilon": epsilon,
    });
    Ok(Field { system, grid, meta })
}

fn density(args: &FieldArgs) -> Result<Report, Failure> {
    let field = build_field(
        "density",
        &args.potential,
        &args.params,
        args.energy,
        args.mass,
        args.bounds,
        args.grid,
        args.epsilon,
    )?;
    let surface = field.system.surface()?;
    let cells = density_field(&surface, &field.grid)?;
    if !cells.iter().any(|c| c.inside) {
        return Err(Failure::Numeric("the box lies entirely outside the allowed region".into()));
    }
    let mut table = Table::new(&["q1", "q2", "phi", "K", "rho", "inside_mask"]);
    for c in &cells {
        table.push(vec![
            Cell::Num(c.point[0]),
            Cell::Num(c.point[1]),
            Cell::opt(c.phi),
            Cell::opt(c.curvature),
            Cell::opt(c.density),
            Cell::Bool(c.inside),
        ]);
    }
    Ok(Report::ok(table.render(args.output.format, field.meta)))
}

fn integrate(args: &IntegrateArgs) -> Result<Report, Failure> {
    if args.levels < 3 {
        return Err(Failure::Usage("--levels must be at least 3".into()));
    }
    if args.reduced {
        return integrate_reduced_mode(args);
    }
    let Some(potential) = args.potential.as_deref() else {
        return Err(Failure::Usage("--potential is required without --reduced".into()));
    };
    let shift = args.levels - 1;
    if args.grid >> shift < 16 || (args.grid >> shift) << shift != args.grid {
        return Err(Failure::Usage(format!(
            "--grid {} is too coarse for {} resolution levels (coarsest level needs at least 16 cells)",
            args.grid, args.levels
        )));
    }
    let mut field = build_field(
        "integrate",
        potential,
        &args.params,
        args.energy,
        args.mass,
        args.bounds,
        args.grid,
        args.epsilon,
    )?;
    field.meta["levels"] = json!(args.levels);
    let result = integrate_density_2d(&field.system, &field.grid)?;
    let surface = field.system.surface()?;
    let by_cells = study_resolution(
        &surface,
        &field.grid.with_cells(args.grid >> shift),
        args.levels,
        DensityConvention::Laplacian,
    )?;
    let by_epsilon = study_epsilon(&surface, &field.grid, args.levels, DensityConvention::Laplacian)?;

    let mut table = Table::new(&["kind", "cells", "epsilon", "value", "error"]);
    table.push(vec![
        Cell::Text("result".into()),
        Cell::Int(args.grid as i64),
        Cell::Num(args.epsilon),
        Cell::Num(result.value),
        Cell::Num(result.error),
    ]);
    for &(n, v) in &by_cells.rows {
        table.push(vec![
            Cell::Text(by_cells.refinement.label().into()),
            Cell::Int(n as i64),
            Cell::Num(args.epsilon),
            Cell::Num(v),
            Cell::Undefined,
        ]);
    }
    for &(eps, v) in &by_epsilon.rows {
        table.push(vec![
            Cell::Text(by_epsilon.refinement.label().into()),
            Cell::Int(args.grid as i64),
            Cell::Num(eps),
            Cell::Num(v),
            Cell::Undefined,
        ]);
    }
    Ok(Report::ok(table.render(args.output.format, field.meta)))
}

fn integrate_reduced_mode(args: &IntegrateArgs) -> Result<Report, Failure> {
    let (Some(k), Some(b), Some(q0)) = (args.k, args.b, args.q0) else {
        return Err(Failure::Usage("--reduced needs --k, --b and --q0".into()));
    };
    let result = integrate_reduced(k, args.energy, b, q0, args.tol)?;
    let study = study_tolerance(k, args.energy, b, q0, args.tol, args.levels)?;
    let closed = topological_number(b, k, args.energy, q0).map_err(Failure::from)?;
    let meta = json!({
        "command": "integrate",
        "reduced": true,
        "k": k,
        "energy": args.energy,
        "b": b,
        "q0": q0,
        "turning_point": turning_point(k, args.energy),
        "tol": args.tol,
        "levels": args.levels,
    });
    let mut table = Table::new(&["kind", "tolerance", "value", "error", "evaluations", "closed_form"]);
    table.push(vec![
        Cell::Text("result".into()),
        Cell::Num(args.tol),
        Cell::Num(result.value),
        Cell::Num(result.error),
        Cell::Int(result.evaluations as i64),
        Cell::Num(closed),
    ]);
    for &(tol, v) in &study.rows {
        table.push(vec![
            Cell::Text(study.refinement.label().into()),
            Cell::Num(tol),
            Cell::Num(v),
            Cell::Undefined,
            Cell::Undefined,
            Cell::Num(closed),
        ]);
    }
    Ok(Report::ok(table.render(args.output.format, meta)))
}

fn run_verify() -> Result<(), Failure> {
    let outcomes = verify::run_all();
    for o in &outcomes {
        println!("{o}");
    }
    match outcomes.iter().find(|o| !o.passed) {
        Some(first) => Err(Failure::Numeric(format!("check failed: {}", first.name))),
        None => Ok(()),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let (report, output) = match &cli.command {
        Command::Spectrum(a) => (spectrum(a)?, &a.output),
        Command::Density(a) => (density(a)?, &a.output),
        Command::Integrate(a) => (integrate(a)?, &a.output),
        Command::Verify => return run_verify(),
    };
    emit(output, &report.body)?;
    report.status
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version go to stdout with status 0; usage errors exit 2
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
