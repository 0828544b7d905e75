//! Subcommands. Each one turns a validated sweep point into a plan first, so
//! configuration errors surface before any computation starts.

use rayon::prelude::*;

use revivals_core::mathieu::{MathieuSolver, ResonanceContext};
use revivals_core::oracle::{resonant_coupling, run_oracle, OracleReport, OracleSetup};
use revivals_core::propagate::{DetectConfig, Grid, MIN_POINTS};
use revivals_core::revival::{powerlaw_interdependence, strong_regime, weak_regime, Regime, RegimeThresholds, TimeScales};
use revivals_core::spectra::{numeric_spectrum, powerlaw_energy, NumericSpectrumConfig, PowerLawSystem, SpectrumModel};
use revivals_core::{CouplingShape, DriveParams, Error, Time};

use crate::config::{ConfigError, RunConfig};
use crate::output::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Mathieu,
    Times,
    Simulate,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Mathieu => "mathieu",
            Command::Times => "times",
            Command::Simulate => "simulate",
            Command::Verify => "verify",
        }
    }

    fn columns(self) -> &'static [&'static str] {
        match self {
            Command::Spectrum => &["n", "energy_analytic", "energy_numeric", "relative_gap"],
            Command::Mathieu => &["nu", "q", "a"],
            Command::Times => &[
                "status", "coupling", "delta", "mu", "q", "nu0", "m_cl", "m_q", "t0_cl", "tl_cl", "t0_q", "tl_q",
                "regime", "weak_relation_residual", "strong_relation_residual", "c_k",
            ],
            Command::Simulate => &["t", "reA", "imA", "abs2A"],
            Command::Verify => &["quantity", "predicted", "measured", "rel_error", "tolerance", "status"],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Ok,
    VerificationFailed,
    NumericFailed,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::NumericFailed => 3,
            Status::VerificationFailed => 4,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Numeric(String),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e}"),
            CliError::Numeric(e) => write!(f, "numeric failure: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

pub struct Outcome {
    pub table: Table,
    pub status: Status,
}

/// Short machine-readable tag for a failed row.
pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Domain(_) => "domain-error",
        Error::InvalidInput(_) => "invalid-input",
        Error::VanishingNonlinearity => "vanishing-nonlinearity",
        Error::ResonanceSingularity { .. } => "resonance-singularity",
        Error::PerturbationBreakdown { .. } => "perturbation-breakdown",
        Error::NonConvergence { .. } => "non-convergence",
        Error::DerivativeInstability { .. } => "derivative-instability",
        Error::SpectrumNotConverged { .. } => "spectrum-not-converged",
        Error::GridTooSmall { .. } => "grid-too-small",
        Error::Unstable { .. } => "unstable",
    }
}

struct PointResult {
    comments: Vec<String>,
    rows: Vec<Vec<Cell>>,
    status: Status,
}

impl PointResult {
    fn ok(comments: Vec<String>, rows: Vec<Vec<Cell>>) -> Self {
        PointResult { comments, rows, status: Status::Ok }
    }
}

enum Plan {
    Spectrum { sys: PowerLawSystem, n_min: usize, n_max: usize, numeric: NumericSpectrumConfig },
    Mathieu { solver: MathieuSolver, nus: Vec<f64>, qs: Vec<f64> },
    Times(TimesPlan),
    Simulate(OracleSetup),
    Verify { setup: OracleSetup, tol_cl: f64, tol_q: f64 },
}

struct TimesPlan {
    sys: PowerLawSystem,
    r: f64,
    lambda: f64,
    order: u32,
    coupling: Option<f64>,
    shape: CouplingShape,
    n_points: usize,
    turning_fraction: f64,
    thresholds: RegimeThresholds,
}

fn thresholds(c: &RunConfig) -> Result<RegimeThresholds, ConfigError> {
    let d = RegimeThresholds::default();
    Ok(RegimeThresholds {
        weak_mu: c.f64_or("regime.weak_mu", d.weak_mu)?,
        weak_q: c.f64_or("regime.weak_q", d.weak_q)?,
        strong_mu: c.f64_or("regime.strong_mu", d.strong_mu)?,
        strong_beta: c.f64_or("regime.strong_beta", d.strong_beta)?,
    })
}

fn grid_settings(c: &RunConfig) -> Result<(usize, f64), ConfigError> {
    let n_points = c.usize_or("grid.n_points", 2048)?;
    if n_points < MIN_POINTS || !n_points.is_power_of_two() {
        return Err(c.invalid("grid.n_points", format!("must be a power of two >= {MIN_POINTS}, got {n_points}")));
    }
    let tf = c.f64_or("grid.turning_fraction", 0.7)?;
    if !(tf > 0.0 && tf < 1.0) {
        return Err(c.invalid("grid.turning_fraction", format!("must lie in (0, 1), got {tf}")));
    }
    Ok((n_points, tf))
}

fn oracle_setup(c: &RunConfig) -> Result<OracleSetup, ConfigError> {
    let sys = c.system()?;
    let (n0, width) = c.packet()?;
    let (lambda, order, coupling) = c.drive()?;
    let (n_points, turning_fraction) = grid_settings(c)?;
    let mut setup = OracleSetup::new(sys, n0, width).with_drive(lambda, order);
    setup.shape = c.shape()?;
    setup.coupling = coupling;
    setup.n_points = n_points;
    setup.turning_fraction = turning_fraction;
    for key in ["propagate.dt", "propagate.t_end"] {
        if let Some(v) = c.f64_opt(key)? {
            if v <= 0.0 {
                return Err(c.invalid(key, format!("must be > 0, got {v}")));
            }
        }
    }
    setup.dt = c.f64_opt("propagate.dt")?;
    setup.t_end = c.f64_opt("propagate.t_end")?;
    setup.samples_per_period = c.usize_or("propagate.samples_per_period", setup.samples_per_period)?;
    if setup.samples_per_period < 4 {
        return Err(c.invalid("propagate.samples_per_period", "must be >= 4"));
    }
    let threshold = c.f64_or("detect.revival_threshold", DetectConfig::default().revival_threshold)?;
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(c.invalid("detect.revival_threshold", format!("must lie in (0, 1], got {threshold}")));
    }
    setup.detect.revival_threshold = threshold;
    setup.thresholds = thresholds(c)?;
    Ok(setup)
}

fn plan(cmd: Command, c: &RunConfig) -> Result<Plan, ConfigError> {
    Ok(match cmd {
        Command::Spectrum => {
            let sys = c.system()?;
            let n_min = c.usize_or("spectrum.n_min", 0)?;
            let n_max = c.usize_or("spectrum.n_max", 20)?;
            if n_max < n_min {
                return Err(c.invalid("spectrum.n_max", format!("must be >= spectrum.n_min = {n_min}")));
            }
            let (_, turning_fraction) = grid_settings(c)?;
            let numeric = NumericSpectrumConfig {
                points_per_level: c.usize_or("spectrum.points_per_level", 200)?,
                tolerance: c.f64_or("spectrum.tolerance", 1e-5)?,
                turning_fraction,
                ..NumericSpectrumConfig::default()
            };
            if numeric.points_per_level < 2 {
                return Err(c.invalid("spectrum.points_per_level", "must be >= 2"));
            }
            if numeric.tolerance <= 0.0 {
                return Err(c.invalid("spectrum.tolerance", "must be > 0"));
            }
            Plan::Spectrum { sys, n_min, n_max, numeric }
        }
        Command::Mathieu => {
            let solver = MathieuSolver::default().with_backend(c.backend()?).with_branch(c.branch()?);
            let nus = c.range("mathieu.nu_min", "mathieu.nu_max", "mathieu.nu_count", (0.0, 3.0, 13))?;
            let qs = c.range("mathieu.q_min", "mathieu.q_max", "mathieu.q_count", (0.0, 10.0, 21))?;
            for (key, v) in [("mathieu.nu_max", nus.iter().fold(0.0f64, |m, v| m.max(v.abs()))), ("mathieu.q_max", qs.iter().fold(0.0f64, |m, v| m.max(v.abs())))] {
                let cap = if key == "mathieu.nu_max" { solver.max_order } else { solver.max_q };
                if v > cap {
                    return Err(c.invalid(key, format!("magnitude {v} exceeds {cap}")));
                }
            }
            Plan::Mathieu { solver, nus, qs }
        }
        Command::Times => {
            let sys = c.system()?;
            let r = c.level()?;
            let (lambda, order, coupling) = c.drive()?;
            let (n_points, turning_fraction) = grid_settings(c)?;
            Plan::Times(TimesPlan {
                sys,
                r,
                lambda,
                order,
                coupling,
                shape: c.shape()?,
                n_points,
                turning_fraction,
                thresholds: thresholds(c)?,
            })
        }
        Command::Simulate => Plan::Simulate(oracle_setup(c)?),
        Command::Verify => {
            let setup = oracle_setup(c)?;
            let tol_cl = c.f64_or("verify.tol_cl", 0.005)?;
            let tol_q = c.f64_or("verify.tol_q", 0.02)?;
            for (key, v) in [("verify.tol_cl", tol_cl), ("verify.tol_q", tol_q)] {
                if v <= 0.0 {
                    return Err(c.invalid(key, format!("must be > 0, got {v}")));
                }
            }
            Plan::Verify { setup, tol_cl, tol_q }
        }
    })
}

/// Runs `cmd` over every sweep point and assembles one table.
pub fn execute(cmd: Command, config: &RunConfig, version: &str, seed: Option<u64>) -> Result<Outcome, CliError> {
    let (axis, points) = config.sweep_points()?;
    let plans = points.iter().map(|(v, c)| Ok((*v, plan(cmd, c)?))).collect::<Result<Vec<_>, ConfigError>>()?;
    let results: Vec<PointResult> =
        plans.par_iter().map(|(_, p)| run_plan(p)).collect::<Result<Vec<_>, CliError>>()?;

    let mut table = Table::default();
    table.comments.push(format!("revivals {version}"));
    table.comments.push(format!("command: {}", cmd.name()));
    table.comments.push(format!("config-sha256: {}", config.hash()));
    if let Some(seed) = seed {
        table.comments.push(format!("seed: {seed}"));
    }
    if let Some(axis) = &axis {
        table.comments.push(format!("sweep: {axis}, {} points", plans.len()));
        table.columns.push(axis.clone());
    }
    table.columns.extend(cmd.columns().iter().map(|s| s.to_string()));

    let mut status = Status::Ok;
    for (i, ((value, _), result)) in plans.iter().zip(results).enumerate() {
        status = status.max(result.status);
        for c in result.comments {
            match value {
                Some(v) => table.comments.push(format!("point {i} ({} = {v:?}): {c}", axis.as_deref().unwrap_or(""))),
                None => table.comments.push(c),
            }
        }
        for mut row in result.rows {
            if let Some(v) = value {
                row.insert(0, Cell::Num(*v));
            }
            table.rows.push(row);
        }
    }
    Ok(Outcome { table, status })
}

fn numeric(e: Error) -> CliError {
    CliError::Numeric(e.to_string())
}

fn run_plan(plan: &Plan) -> Result<PointResult, CliError> {
    match plan {
        Plan::Spectrum { sys, n_min, n_max, numeric: cfg } => {
            let levels = numeric_spectrum(sys, sys.mass, sys.hbar, n_max + 1, cfg).map_err(numeric)?;
            let rows = (*n_min..=*n_max)
                .map(|n| {
                    let analytic = powerlaw_energy(sys, n as f64).map_err(numeric)?;
                    let e = levels.energies[n];
                    Ok(vec![Cell::Int(n as i64), Cell::Num(analytic), Cell::Num(e), Cell::Num((analytic - e) / e)])
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            let shift = levels.refinement_shift.iter().fold(0.0f64, |m, &s| m.max(s));
            let comments = vec![format!(
                "numeric: half-width {:?}, base points {}, largest refinement shift {:e}",
                levels.half_width, levels.base_points, shift
            )];
            Ok(PointResult::ok(comments, rows))
        }
        Plan::Mathieu { solver, nus, qs } => {
            let grid: Vec<(f64, f64)> = nus.iter().flat_map(|&nu| qs.iter().map(move |&q| (nu, q))).collect();
            let rows = grid
                .par_iter()
                .map(|&(nu, q)| {
                    let a = solver.characteristic_value(nu, q).map_err(numeric)?;
                    Ok(vec![Cell::Num(nu), Cell::Num(q), Cell::Num(a)])
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(PointResult::ok(Vec::new(), rows))
        }
        Plan::Times(p) => Ok(match times_row(p) {
            Ok(row) => PointResult::ok(Vec::new(), vec![row]),
            Err(e) => {
                let mut row = vec![Cell::text(error_kind(&e))];
                row.resize(Command::Times.columns().len(), Cell::Empty);
                PointResult { comments: vec![format!("error: {e}")], rows: vec![row], status: Status::NumericFailed }
            }
        }),
        Plan::Simulate(setup) => {
            let rep = run_oracle(setup).map_err(numeric)?;
            let s = &rep.series;
            let rows = (0..s.len())
                .map(|i| {
                    let a = s.amplitudes[i];
                    vec![Cell::Num(s.times[i]), Cell::Num(a.re), Cell::Num(a.im), Cell::Num(s.values[i])]
                })
                .collect();
            Ok(PointResult::ok(oracle_comments(&rep), rows))
        }
        Plan::Verify { setup, tol_cl, tol_q } => {
            let rep = run_oracle(setup).map_err(numeric)?;
            let mut failed = false;
            let mut row = |name: &str, predicted: Cell, measured: Option<f64>, err: Option<f64>, tol: f64, pass: bool| {
                failed |= !pass;
                vec![
                    Cell::text(name),
                    predicted,
                    Cell::opt(measured),
                    Cell::opt(err),
                    Cell::Num(tol),
                    Cell::text(match (pass, measured) {
                        (true, _) => "pass",
                        (false, None) => "fail-not-found",
                        (false, Some(_)) => "fail",
                    }),
                ]
            };
            let est = &rep.estimate;
            let cl_pass = rep.classical_error.is_some_and(|e| e.abs() <= *tol_cl);
            let cl = row("T_cl", Cell::Num(rep.predicted_cl), est.classical_period, rep.classical_error, *tol_cl, cl_pass);
            let q_pass = match rep.predicted_q {
                // No revival predicted: pass only if none was detected.
                Time::Unbounded => est.revival_time.is_none(),
                Time::Finite(_) => rep.revival_error.is_some_and(|e| e.abs() <= *tol_q),
            };
            let q = row("T_Q", Cell::time(rep.predicted_q), est.revival_time, rep.revival_error, *tol_q, q_pass);
            let status = if failed { Status::VerificationFailed } else { Status::Ok };
            Ok(PointResult { comments: oracle_comments(&rep), rows: vec![cl, q], status })
        }
    }
}

fn times_row(p: &TimesPlan) -> Result<Vec<Cell>, Error> {
    let coupling = match p.coupling {
        Some(v) => v,
        None if p.lambda == 0.0 => 0.0,
        None => {
            let r = p.r.round() as usize;
            let top = r + p.order as usize + 8;
            let grid = Grid::for_potential(&p.sys, p.sys.mass, p.sys.hbar, top, p.turning_fraction, p.n_points, 1.0)?;
            resonant_coupling(&p.sys, &grid, &p.shape, r, p.order)?
        }
    };
    let drive = DriveParams::new(p.lambda, coupling, p.order).with_shape(p.shape.clone());
    let ctx = ResonanceContext::new(SpectrumModel::power_law(&p.sys, p.r)?, drive.clone())?;
    let t = TimeScales::evaluate(&ctx, &p.thresholds)?;
    let weak = weak_regime(&ctx, &t).model_residual;
    let strong = strong_regime(&ctx, &t).ok().and_then(|s| s.model_residual);
    let c_k = powerlaw_interdependence(&p.sys, p.r, &drive, Regime::Weak).ok().and_then(|r| r.c_k);
    Ok(vec![
        Cell::text("ok"),
        Cell::Num(coupling),
        Cell::Num(t.delta),
        Cell::Num(t.mu),
        Cell::opt(t.q),
        Cell::opt(ctx.nu_of_k(0.0).ok()),
        Cell::Num(t.m_cl),
        Cell::Num(t.m_q),
        Cell::Num(t.t0_cl),
        Cell::Num(t.tl_cl),
        Cell::time(t.t0_q),
        Cell::time(t.tl_q),
        Cell::text(t.regime.name()),
        Cell::opt(weak),
        Cell::opt(strong),
        Cell::opt(c_k),
    ])
}

fn oracle_comments(rep: &OracleReport) -> Vec<String> {
    let frame = if rep.frame_frequency == 0.0 {
        "lab".to_string()
    } else {
        format!("rotating at {:?}", rep.frame_frequency)
    };
    let opt = |v: Option<f64>| v.map_or("not found".to_string(), |v| format!("{v:?}"));
    vec![
        format!("frame: {frame}"),
        format!("dt: {:?}, steps: {}, sample every: {}", rep.dt, rep.steps, rep.sample_every),
        format!(
            "coupling: {:?}, q: {}, mu: {:?}, perturbative window: {}",
            rep.coupling,
            opt(rep.times.q),
            rep.times.mu,
            rep.perturbative
        ),
        format!("packet: mean level {:?}, spread {:?}", rep.mean_level, rep.level_spread),
        format!("predicted T_cl: {:?}, T_Q: {}", rep.predicted_cl, rep.predicted_q),
        format!(
            "measured T_cl: {}, T_Q: {}, comb period: {}",
            opt(rep.estimate.classical_period),
            opt(rep.estimate.revival_time),
            opt(rep.estimate.comb_period)
        ),
        format!("max norm drift: {:e}, energy drift: {:e}", rep.max_norm_drift, rep.energy_drift),
    ]
}
