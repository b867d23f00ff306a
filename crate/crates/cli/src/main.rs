//! Command-line verifier and collocation solver for the hyperkähler
//! Monge-Ampère systems: `verify`, `scan`, `jacobi`, `transform`, `solve`.
//!
//! Exit codes: 0 = pass, 1 = verified fail (a report was produced and the
//! check did not meet its tolerance, or the solver did not converge),
//! 2 = usage, parse or domain error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hkma_core::coords::{darboux_to_calabi, full_to_reduced, reduced_to_full};
use hkma_core::forms::{calibrate_on_flat, hyperkahler_algebra_defect};
use hkma_core::potentials::{potential_by_name, CoordSystem, Potential, POTENTIAL_NAMES};
use hkma_core::report::{
    forms_report_to_json, residual_report_to_json, BoundsConfig, CalabiRecord, FullRecord,
    JacobiReport, IterationEntry, PointRecord, PointsFile, ReducedRecord, Report,
    SolveConfigFile, SolveReport, StartSpec,
};
use hkma_core::residuals::{
    aggregate_full, aggregate_reduced, full_residuals_at, reduced_residuals, FullResiduals,
};
use hkma_core::sample::{
    default_calabi_grid, default_full_grid, default_reduced_grid, sample_reduced_with_fiber,
    ReducedBox,
};
use hkma_core::solver::{
    sample_collocation, solve, BasisExpansion, CollocationBox, SolveConfig,
};

#[derive(Parser)]
#[command(
    name = "hkma",
    about = "Verifier and collocation solver for hyperkähler Monge-Ampère systems",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SystemArg {
    Reduced,
    Full,
    Forms,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Direction {
    FullToReduced,
    ReducedToFull,
    DarbouxToCalabi,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a residual system for a built-in potential over a point set
    /// (a points file or the embedded default grid) and write a report.
    Verify {
        #[arg(long)]
        potential: String,
        #[arg(long, value_enum)]
        system: SystemArg,
        /// JSON points file; when absent the embedded default grid is used
        #[arg(long)]
        points: Option<PathBuf>,
        /// Pass tolerance; defaults to 1e-10 (flat) or 1e-8 (calabi)
        #[arg(long)]
        tol: Option<f64>,
        /// Default-grid size (ignored with --points)
        #[arg(long)]
        n: Option<usize>,
        /// Report path; stdout when absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample n seeded points in a box, run verify semantics and report the
    /// per-equation maxima.
    Scan {
        #[arg(long)]
        potential: String,
        #[arg(long, value_enum)]
        system: SystemArg,
        /// JSON box over the reduced axes, e.g. '{"v":[-1,1],"rho":[0,0.5]}'
        #[arg(long, value_name = "JSON")]
        bounds: Option<String>,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the random-cubic Jacobi-identity suite for the reduced bracket.
    Jacobi {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Map a points file between coordinate systems.
    Transform {
        #[arg(long)]
        points: PathBuf,
        #[arg(long, value_enum)]
        direction: Direction,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the least-squares collocation solver from a JSON config.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Error carrying the exit-2 diagnostic.
struct CliError(String);

impl<E: std::fmt::Display> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn write_out(out: Option<&PathBuf>, value: &impl serde::Serialize) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn load_potential(name: &str) -> CliResult<Potential> {
    potential_by_name(name).ok_or_else(|| {
        CliError(format!(
            "unknown potential '{name}' (known: {})",
            POTENTIAL_NAMES.join(", ")
        ))
    })
}

fn default_tol(name: &str) -> f64 {
    if name.starts_with("calabi") {
        1e-8
    } else {
        1e-10
    }
}

fn check_system(potential: &Potential, system: SystemArg) -> CliResult<()> {
    let ok = match system {
        SystemArg::Reduced => potential.coords() == CoordSystem::Reduced,
        SystemArg::Full | SystemArg::Forms => {
            potential.coords() == CoordSystem::Full || potential.coords() == CoordSystem::Calabi
        }
    };
    if ok {
        Ok(())
    } else {
        Err(CliError(format!(
            "potential '{}' does not support this system (reduced potentials take \
             --system reduced; full/calabi potentials take --system full or forms)",
            potential.name()
        )))
    }
}

/// Default grids are embedded so verify runs with no input file; calabi
/// grids default to 50 points, the rest to 1000.
fn default_grid_size(name: &str) -> usize {
    if name.starts_with("calabi") {
        50
    } else {
        1000
    }
}

fn default_points(coords: CoordSystem, n: usize) -> Vec<PointRecord> {
    match coords {
        CoordSystem::Reduced => default_reduced_grid(n)
            .iter()
            .map(|p| PointRecord::Reduced(ReducedRecord::from_point(p)))
            .collect(),
        CoordSystem::Full => default_full_grid(n)
            .iter()
            .map(|p| PointRecord::Full(FullRecord::from_point(p)))
            .collect(),
        CoordSystem::Calabi => default_calabi_grid(n)
            .iter()
            .map(|p| PointRecord::Calabi(CalabiRecord::from_point(p)))
            .collect(),
    }
}

fn load_points(path: &PathBuf, coords: CoordSystem) -> CliResult<Vec<PointRecord>> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError(format!("cannot read {}: {e}", path.display())))?;
    let file: PointsFile =
        serde_json::from_str(&text).map_err(|e| CliError(format!("malformed points file: {e}")))?;
    file.validate()?;
    let expected = match coords {
        CoordSystem::Reduced => "reduced",
        CoordSystem::Full => "full",
        CoordSystem::Calabi => "calabi",
    };
    if file.coords != expected {
        return Err(CliError(format!(
            "points file has coords '{}' but the potential needs '{expected}'",
            file.coords
        )));
    }
    Ok(file.points)
}

/// The 8 real slots of a full- or calabi-chart record.
fn slots8(p: &PointRecord) -> [f64; 8] {
    match p {
        PointRecord::Full(r) => r.point().to_array(),
        PointRecord::Calabi(r) => r.point().to_array(),
        PointRecord::Reduced(_) => unreachable!("checked by coords validation"),
    }
}

fn run_report(
    potential: &Potential,
    system: SystemArg,
    points: Vec<PointRecord>,
    tol: f64,
    with_equation_max: bool,
) -> CliResult<Report> {
    let at_point = |i: usize, e: hkma_core::Error| CliError(format!("point {i}: {e}"));
    match system {
        SystemArg::Reduced => {
            let mut rows = Vec::with_capacity(points.len());
            for (i, p) in points.iter().enumerate() {
                let PointRecord::Reduced(r) = p else { unreachable!() };
                let res = reduced_residuals(potential, &r.point()).map_err(|e| at_point(i, e))?;
                rows.push(res.r);
            }
            let report = aggregate_reduced(rows, tol);
            Ok(residual_report_to_json(
                potential.name(),
                &report,
                points,
                with_equation_max,
            ))
        }
        SystemArg::Full => {
            let mut rows: Vec<FullResiduals> = Vec::with_capacity(points.len());
            for (i, p) in points.iter().enumerate() {
                rows.push(
                    full_residuals_at(potential, &slots8(p)).map_err(|e| at_point(i, e))?,
                );
            }
            let report = aggregate_full(&rows, tol);
            Ok(residual_report_to_json(
                potential.name(),
                &report,
                points,
                with_equation_max,
            ))
        }
        SystemArg::Forms => {
            let calib = calibrate_on_flat()?;
            let mut defects = Vec::with_capacity(points.len());
            for (i, p) in points.iter().enumerate() {
                defects.push(
                    hyperkahler_algebra_defect(potential, &slots8(p), &calib)
                        .map_err(|e| at_point(i, e))?,
                );
            }
            Ok(forms_report_to_json(
                potential.name(),
                tol,
                points,
                &defects,
                with_equation_max,
            ))
        }
    }
}

fn parse_scan_bounds(json: Option<&str>) -> CliResult<ReducedBox> {
    let mut bx = ReducedBox::default_grid();
    let Some(text) = json else { return Ok(bx) };
    let cfg: BoundsConfig =
        serde_json::from_str(text).map_err(|e| CliError(format!("malformed bounds: {e}")))?;
    if cfg.s.is_some() {
        return Err(CliError(
            "scan bounds use the rho axis, not s (s is a solve-config axis)".into(),
        ));
    }
    let axes = [cfg.q_re, cfg.q_im, cfg.zeta_re, cfg.zeta_im, cfg.v, cfg.rho];
    for (k, axis) in axes.iter().enumerate() {
        if let Some([lo, hi]) = axis {
            bx.lo[k] = *lo;
            bx.hi[k] = *hi;
        }
    }
    if !bx.is_valid() {
        return Err(CliError("bounds must be finite with lo <= hi".into()));
    }
    Ok(bx)
}

fn scan_points(coords: CoordSystem, bx: &ReducedBox, n: usize, seed: u64) -> Vec<PointRecord> {
    let with_fiber = sample_reduced_with_fiber(n, seed, bx);
    match coords {
        CoordSystem::Reduced => with_fiber
            .iter()
            .map(|(r, _)| PointRecord::Reduced(ReducedRecord::from_point(r)))
            .collect(),
        CoordSystem::Full => with_fiber
            .iter()
            .map(|(r, f)| PointRecord::Full(FullRecord::from_point(&reduced_to_full(r, f))))
            .collect(),
        CoordSystem::Calabi => with_fiber
            .iter()
            .map(|(r, f)| {
                PointRecord::Calabi(CalabiRecord::from_point(&darboux_to_calabi(
                    &reduced_to_full(r, f),
                )))
            })
            .collect(),
    }
}

fn run(command: Command) -> CliResult<bool> {
    match command {
        Command::Verify {
            potential,
            system,
            points,
            tol,
            n,
            out,
        } => {
            let pot = load_potential(&potential)?;
            check_system(&pot, system)?;
            let tol = tol.unwrap_or_else(|| default_tol(&potential));
            let pts = match &points {
                Some(path) => load_points(path, pot.coords())?,
                None => default_points(
                    pot.coords(),
                    n.unwrap_or_else(|| default_grid_size(&potential)),
                ),
            };
            let report = run_report(&pot, system, pts, tol, false)?;
            let pass = report.pass;
            write_out(out.as_ref(), &report)?;
            Ok(pass)
        }
        Command::Scan {
            potential,
            system,
            bounds,
            n,
            seed,
            tol,
            out,
        } => {
            if n == 0 {
                return Err(CliError("scan needs n > 0".into()));
            }
            let pot = load_potential(&potential)?;
            check_system(&pot, system)?;
            let tol = tol.unwrap_or_else(|| default_tol(&potential));
            let bx = parse_scan_bounds(bounds.as_deref())?;
            let pts = scan_points(pot.coords(), &bx, n, seed);
            let report = run_report(&pot, system, pts, tol, true)?;
            let pass = report.pass;
            write_out(out.as_ref(), &report)?;
            Ok(pass)
        }
        Command::Jacobi {
            trials,
            seed,
            tol,
            out,
        } => {
            if trials == 0 {
                return Err(CliError("jacobi needs trials > 0".into()));
            }
            let max_defect = hkma_core::brackets::jacobi_suite(trials, seed)?;
            let report = JacobiReport {
                trials,
                seed,
                tolerance: tol,
                max_defect,
                pass: max_defect <= tol,
            };
            let pass = report.pass;
            write_out(out.as_ref(), &report)?;
            Ok(pass)
        }
        Command::Transform {
            points,
            direction,
            out,
        } => {
            let text = fs::read_to_string(&points)
                .map_err(|e| CliError(format!("cannot read {}: {e}", points.display())))?;
            let file: PointsFile = serde_json::from_str(&text)
                .map_err(|e| CliError(format!("malformed points file: {e}")))?;
            file.validate()?;
            let result = transform_points(&file, direction)?;
            write_out(out.as_ref(), &result)?;
            Ok(true)
        }
        Command::Solve { config, out } => {
            let text = fs::read_to_string(&config)
                .map_err(|e| CliError(format!("cannot read {}: {e}", config.display())))?;
            let cfg: SolveConfigFile = serde_json::from_str(&text)
                .map_err(|e| CliError(format!("malformed solve config: {e}")))?;
            let report = run_solve(&cfg)?;
            let pass = report.converged;
            write_out(out.as_ref(), &report)?;
            Ok(pass)
        }
    }
}

fn transform_points(file: &PointsFile, direction: Direction) -> CliResult<PointsFile> {
    let need = |coords: &str| -> CliResult<()> {
        if file.coords == coords {
            Ok(())
        } else {
            Err(CliError(format!(
                "this direction needs coords '{coords}', file has '{}'",
                file.coords
            )))
        }
    };
    let at_point = |i: usize, e: hkma_core::Error| CliError(format!("point {i}: {e}"));
    match direction {
        Direction::FullToReduced => {
            need("full")?;
            let mut out = Vec::with_capacity(file.points.len());
            for (i, p) in file.points.iter().enumerate() {
                let PointRecord::Full(r) = p else { unreachable!() };
                let (red, fib) = full_to_reduced(&r.point()).map_err(|e| at_point(i, e))?;
                out.push(PointRecord::Reduced(ReducedRecord::with_fiber(&red, &fib)));
            }
            Ok(PointsFile {
                coords: "reduced".into(),
                points: out,
            })
        }
        Direction::ReducedToFull => {
            need("reduced")?;
            let out = file
                .points
                .iter()
                .map(|p| {
                    let PointRecord::Reduced(r) = p else { unreachable!() };
                    PointRecord::Full(FullRecord::from_point(&reduced_to_full(
                        &r.point(),
                        &r.fiber(),
                    )))
                })
                .collect();
            Ok(PointsFile {
                coords: "full".into(),
                points: out,
            })
        }
        Direction::DarbouxToCalabi => {
            need("full")?;
            let out = file
                .points
                .iter()
                .map(|p| {
                    let PointRecord::Full(r) = p else { unreachable!() };
                    PointRecord::Calabi(CalabiRecord::from_point(&darboux_to_calabi(&r.point())))
                })
                .collect();
            Ok(PointsFile {
                coords: "calabi".into(),
                points: out,
            })
        }
    }
}

fn run_solve(cfg: &SolveConfigFile) -> CliResult<SolveReport> {
    let mut bounds = CollocationBox::default_box();
    if let Some(b) = &cfg.collocation.bounds {
        if b.rho.is_some() {
            return Err(CliError(
                "solve bounds use the s = e^rho axis, not rho".into(),
            ));
        }
        let axes = [b.q_re, b.q_im, b.zeta_re, b.zeta_im, b.v, b.s];
        for (k, axis) in axes.iter().enumerate() {
            if let Some([lo, hi]) = axis {
                bounds.lo[k] = *lo;
                bounds.hi[k] = *hi;
            }
        }
    }
    let pts = sample_collocation(&bounds, cfg.collocation.count, cfg.collocation.seed)?;
    let start = match &cfg.start {
        StartSpec::Named(name) if name == "flat" => BasisExpansion::flat(cfg.degree)?,
        StartSpec::Named(name) if name == "zero" => BasisExpansion::zeros(cfg.degree),
        StartSpec::Named(name) => {
            return Err(CliError(format!(
                "unknown start '{name}' (use \"flat\", \"zero\" or a coefficient array)"
            )))
        }
        StartSpec::Coefficients(c) => {
            let expect = hkma_core::solver::basis_len(cfg.degree);
            if c.len() != expect {
                return Err(CliError(format!(
                    "start has {} coefficients but degree {} needs {expect}",
                    c.len(),
                    cfg.degree
                )));
            }
            BasisExpansion {
                degree: cfg.degree,
                coeffs: c.clone(),
            }
        }
    };
    let start = match &cfg.noise {
        Some(noise) => start.with_noise(noise.amplitude, noise.seed),
        None => start,
    };
    let solve_cfg = SolveConfig {
        max_iter: cfg.max_iter,
        tol: cfg.tol,
        lm_lambda0: cfg.lm_lambda0,
        tikhonov: cfg.tikhonov,
    };
    let outcome = solve(&start, &pts, &solve_cfg)?;
    Ok(SolveReport {
        degree: cfg.degree,
        converged: outcome.converged,
        iterations: outcome.iterations,
        final_sup: outcome.final_sup,
        final_rms: outcome.final_rms,
        coefficients: outcome.coeffs.coeffs,
        history: outcome
            .history
            .iter()
            .map(|h| IterationEntry {
                iteration: h.iteration,
                sup: h.sup,
                rms: h.rms,
                lambda: h.lambda,
                accepted: h.accepted,
            })
            .collect(),
    })
}
