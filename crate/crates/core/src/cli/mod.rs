//! The `handsoff` command-line tool.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 initial state not
//! reachable, 3 verification failure.

pub mod config;
pub mod csv;
pub mod manifest;
pub mod svg;

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::di_oracle::DiInstance;
use crate::error::HandsoffError;
use crate::lti::{ControlSignal, LtiSystem, DEFAULT_ZERO_TOL};
use crate::pmp::{find_certificate, PmpCertificate};
use crate::solver::{self, transcribe, SparseSolveResult, TranscribedProblem};
use crate::value_map::{self, GridAxis, ValueOracle};

use self::config::SystemConfig;
use self::manifest::RunManifest;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_UNREACHABLE: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "handsoff", version, about = "Maximum hands-off control for single-input LTI systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Handsoff,
    L1,
    Reweighted,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Handsoff => "handsoff",
            Method::L1 => "l1",
            Method::Reweighted => "reweighted",
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct ProblemArgs {
    /// System JSON file with keys n, A, B and optional label.
    #[arg(long)]
    pub system: PathBuf,
    /// Initial state, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub xi: String,
    #[arg(long)]
    pub horizon: f64,
    /// Number of piecewise-constant intervals.
    #[arg(long, default_value_t = solver::DEFAULT_INTERVALS)]
    pub grid: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute a sparse control and write control.csv, report.json and manifest.json.
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, value_enum, default_value_t = Method::Handsoff)]
        method: Method,
        /// Exponent for the reweighted method.
        #[arg(long, default_value_t = solver::DEFAULT_P)]
        p: f64,
        #[arg(long, default_value_t = solver::DEFAULT_MAX_ITER)]
        max_iter: usize,
        #[arg(long, default_value_t = solver::DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long, default_value = "handsoff-out")]
        out: PathBuf,
    },
    /// Double-integrator demo: sparse control against a wide L1-optimal pulse.
    DemoDi {
        #[arg(long, allow_hyphen_values = true, default_value = "1,-1")]
        xi: String,
        #[arg(long, default_value_t = 5.0)]
        horizon: f64,
        #[arg(long, default_value_t = solver::DEFAULT_INTERVALS)]
        grid: usize,
        #[arg(long, default_value = "handsoff-out")]
        out: PathBuf,
    },
    /// Sample the minimum-support value over a 2-D grid of initial states.
    ValueMap {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        horizon: f64,
        #[arg(long, default_value_t = solver::DEFAULT_INTERVALS)]
        grid: usize,
        /// Grid spec `min:max:count,min:max:count`.
        #[arg(long, allow_hyphen_values = true)]
        range: String,
        /// Worker threads (output does not depend on this).
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Random convexity trials over the range box; 0 disables the probe.
        #[arg(long, default_value_t = 0)]
        probe_trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "handsoff-out")]
        out: PathBuf,
    },
    /// Report whether the initial state can be steered to the origin.
    Reachable {
        #[command(flatten)]
        problem: ProblemArgs,
    },
    /// Check a control CSV: magnitude, terminal residual, norms and a costate certificate.
    Verify {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Control CSV with columns t_start,u; its row count sets the grid.
        #[arg(long)]
        control: PathBuf,
        #[arg(long, default_value_t = solver::DEFAULT_P)]
        p: f64,
    },
}

#[derive(Debug)]
struct CliError {
    code: i32,
    message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<HandsoffError> for CliError {
    fn from(e: HandsoffError) -> Self {
        let code = match e {
            HandsoffError::NotReachable { .. } => EXIT_UNREACHABLE,
            _ => EXIT_INPUT,
        };
        Self { code, message: e.to_string() }
    }
}

fn input_error(message: impl Into<String>) -> CliError {
    CliError { code: EXIT_INPUT, message: message.into() }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Run a parsed command line; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Solve { problem, method, p, max_iter, epsilon, out } => {
            cmd_solve(&problem, method, p, max_iter, epsilon, &out)
        }
        Command::DemoDi { xi, horizon, grid, out } => cmd_demo_di(&xi, horizon, grid, &out),
        Command::ValueMap { system, horizon, grid, range, workers, probe_trials, seed, out } => {
            cmd_value_map(&system, horizon, grid, &range, workers, probe_trials, seed, &out)
        }
        Command::Reachable { problem } => cmd_reachable(&problem),
        Command::Verify { problem, control, p } => cmd_verify(&problem, &control, p),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

fn parse_state(text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>().map_err(|_| input_error(format!("--xi: `{s}` is not a number")))
        })
        .collect()
}

fn parse_range(text: &str) -> CliResult<Vec<GridAxis>> {
    text.split(',')
        .map(|part| {
            let fields: Vec<&str> = part.split(':').map(str::trim).collect();
            let bad = || input_error(format!("--range: `{part}` is not min:max:count"));
            if fields.len() != 3 {
                return Err(bad());
            }
            let min = fields[0].parse::<f64>().map_err(|_| bad())?;
            let max = fields[1].parse::<f64>().map_err(|_| bad())?;
            let count = fields[2].parse::<usize>().map_err(|_| bad())?;
            GridAxis::new(min, max, count).map_err(|e| input_error(format!("--range: {e}")))
        })
        .collect()
}

fn load_system(path: &Path) -> CliResult<(LtiSystem, Vec<u8>)> {
    let (cfg, bytes) = SystemConfig::load(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    let sys = cfg.to_system().map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    Ok((sys, bytes))
}

fn load_problem(args: &ProblemArgs, manifest: &mut RunManifest) -> CliResult<TranscribedProblem> {
    let (sys, bytes) = load_system(&args.system)?;
    let xi = parse_state(&args.xi)?;
    manifest.input(&args.system, &bytes);
    manifest.param("xi", xi.clone()).param("horizon", args.horizon).param("grid", args.grid);
    Ok(transcribe(&sys, &xi, args.horizon, args.grid)?)
}

fn write_file(dir: &Path, name: &str, contents: &str, manifest: &mut RunManifest) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| input_error(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| input_error(format!("cannot write {}: {e}", path.display())))?;
    manifest.output(name);
    Ok(())
}

fn write_manifest(dir: &Path, manifest: &RunManifest) -> CliResult<()> {
    let path = dir.join("manifest.json");
    std::fs::write(&path, manifest.to_json()).map_err(|e| input_error(format!("cannot write {}: {e}", path.display())))
}

fn certificate_json(cert: &Option<PmpCertificate>) -> serde_json::Value {
    match cert {
        Some(c) => json!({
            "found": true,
            "q0": c.q0,
            "max_violation": c.max_violation,
            "boundary_measure": c.boundary_measure,
            "margin": c.margin,
        }),
        None => json!({ "found": false }),
    }
}

fn support_json(u: &ControlSignal) -> serde_json::Value {
    match u.support_interval(DEFAULT_ZERO_TOL) {
        Some((a, b)) => json!([a, b]),
        None => serde_json::Value::Null,
    }
}

fn run_method(
    problem: &TranscribedProblem,
    method: Method,
    p: f64,
    max_iter: usize,
    epsilon: f64,
) -> crate::Result<SparseSolveResult> {
    match method {
        Method::Handsoff => solver::solve_max_handsoff(problem),
        Method::L1 => solver::solve_l1(problem),
        Method::Reweighted => solver::solve_reweighted_lp(problem, p, max_iter, epsilon),
    }
}

fn cmd_solve(args: &ProblemArgs, method: Method, p: f64, max_iter: usize, epsilon: f64, out: &Path) -> CliResult<i32> {
    let mut manifest = RunManifest::new("solve");
    let problem = load_problem(args, &mut manifest)?;
    manifest.param("method", method.name());
    if method == Method::Reweighted {
        manifest.param("p", p).param("max_iter", max_iter).param("epsilon", epsilon);
    }
    manifest
        .param("zero_tol", DEFAULT_ZERO_TOL)
        .param("feasibility_tol", solver::FEASIBILITY_TOL)
        .param("certificate_tol", crate::pmp::CERTIFICATE_TOL);

    let result = run_method(&problem, method, p, max_iter, epsilon)?;
    let u = &result.control;
    let cert = find_certificate(&problem, u)?;
    let norms = u.norms(p, DEFAULT_ZERO_TOL);

    write_file(out, "control.csv", &csv::control_csv(u), &mut manifest)?;
    let report = json!({
        "method": result.method.as_str(),
        "norms": norms,
        "l1_value": result.l1_value,
        "support": support_json(u),
        "fractional_count": result.fractional_count,
        "vertex_fractional_count": result.vertex_fractional_count,
        "iterations": result.iterations,
        "converged": result.converged,
        "residual": problem.residual(u.values()),
        "certificate": certificate_json(&cert),
    });
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    write_file(out, "report.json", &text, &mut manifest)?;
    write_manifest(out, &manifest)?;

    println!("method       {}", method.name());
    println!("L0           {:.6}", norms.l0);
    println!("L1           {:.6}", norms.l1);
    println!("Linf         {:.6}", norms.linf);
    match u.support_interval(DEFAULT_ZERO_TOL) {
        Some((a, b)) => println!("support      [{a}, {b})"),
        None => println!("support      empty"),
    }
    println!("fractional   {}", result.fractional_count);
    match &cert {
        Some(c) => println!("certificate  found, q0 = {:?}, max violation {:.3e}", c.q0, c.max_violation),
        None => println!("certificate  not found"),
    }
    println!("wrote {}", out.display());
    Ok(EXIT_OK)
}

fn cmd_demo_di(xi_text: &str, horizon: f64, grid: usize, out: &Path) -> CliResult<i32> {
    let xi = parse_state(xi_text)?;
    if xi.len() != 2 {
        return Err(input_error(format!("--xi: expected 2 entries, got {}", xi.len())));
    }
    let inst = DiInstance::new(xi[0], xi[1], horizon)?;
    let (t1, t2) = inst.analytic_handsoff()?;
    let u1 = inst.non_sparse_l1_control(grid)?;
    let sys = LtiSystem::double_integrator();
    let problem = transcribe(&sys, &xi, horizon, grid)?;
    let u2 = solver::solve_max_handsoff(&problem)?.control;
    let cert = find_certificate(&problem, &u2)?;

    let mut manifest = RunManifest::new("demo-di");
    manifest
        .param("xi", xi.clone())
        .param("horizon", horizon)
        .param("grid", grid)
        .param("zero_tol", DEFAULT_ZERO_TOL);
    write_file(out, "demo_di.csv", &csv::multi_control_csv(&["u_handsoff", "u_l1"], &[&u2, &u1]), &mut manifest)?;
    let plot = svg::step_plot(
        "L1-optimal u1 (dashed) and maximum hands-off u2 (solid)",
        &[
            svg::Series { name: "u1 (L1 optimal)", control: &u1, color: "#d62728", dashed: true },
            svg::Series { name: "u2 (max hands-off)", control: &u2, color: "#1f77b4", dashed: false },
        ],
    );
    write_file(out, "demo_di.svg", &plot, &mut manifest)?;
    write_manifest(out, &manifest)?;

    let (n2, n1) = (u2.norms(0.5, DEFAULT_ZERO_TOL), u1.norms(0.5, DEFAULT_ZERO_TOL));
    println!("control              L0        L1");
    println!("u2 (max hands-off)   {:<9.4} {:.9}", n2.l0, n2.l1);
    println!("u1 (L1 alternative)  {:<9.4} {:.9}", n1.l0, n1.l1);
    println!("analytic switch times  t1 = {t1}, t2 = {t2}");
    match u2.support_interval(DEFAULT_ZERO_TOL) {
        Some((a, b)) => println!("numeric support        [{a}, {b})"),
        None => println!("numeric support        empty"),
    }
    match &cert {
        Some(c) => println!("certificate            q0 = {:?}, max violation {:.3e}", c.q0, c.max_violation),
        None => println!("certificate            not found"),
    }
    println!("wrote {}", out.display());
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn cmd_value_map(
    system: &Path,
    horizon: f64,
    grid: usize,
    range: &str,
    workers: usize,
    probe_trials: usize,
    seed: u64,
    out: &Path,
) -> CliResult<i32> {
    let (sys, bytes) = load_system(system)?;
    if sys.n() != 2 {
        return Err(input_error(format!("value-map needs a 2-D system, got n = {}", sys.n())));
    }
    let axes = parse_range(range)?;
    if axes.len() != 2 {
        return Err(input_error(format!("--range: expected 2 axes, got {}", axes.len())));
    }
    let mut manifest = RunManifest::new("value-map");
    manifest
        .input(system, &bytes)
        .param("horizon", horizon)
        .param("grid", grid)
        .param("range", range)
        .param("workers", workers)
        .param("value_bound_tol", value_map::VALUE_BOUND_TOL);

    let field = value_map::sample_value_field(&sys, &axes, horizon, grid, workers)?;
    write_file(out, "value_map.csv", &csv::value_csv(&field), &mut manifest)?;
    let reachable = field.values.iter().filter(|v| v.is_some()).count();
    println!("{} of {} grid points reachable", reachable, field.len());

    if probe_trials > 0 {
        manifest.param("probe_trials", probe_trials).param("seed", seed);
        let oracle = ValueOracle::new(&sys, horizon, grid)?;
        let sample_box: Vec<(f64, f64)> = axes.iter().map(|a| (a.min, a.max)).collect();
        let report = value_map::convexity_probe(&oracle, &sample_box, probe_trials, seed)?;
        let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
        text.push('\n');
        write_file(out, "convexity.json", &text, &mut manifest)?;
        println!("convexity probe: {} trials, max violation {:.3e}", report.trials, report.max_violation);
    }
    write_manifest(out, &manifest)?;
    println!("wrote {}", out.display());
    Ok(EXIT_OK)
}

fn cmd_reachable(args: &ProblemArgs) -> CliResult<i32> {
    let mut manifest = RunManifest::new("reachable");
    let problem = load_problem(args, &mut manifest)?;
    if problem.is_reachable()? {
        let v = solver::value(&problem)?;
        println!("reachable (minimum L1 = minimum support = {v})");
        Ok(EXIT_OK)
    } else {
        println!("not reachable at horizon T = {}", args.horizon);
        Ok(EXIT_UNREACHABLE)
    }
}

fn report_check(name: &str, pass: bool, detail: &str) -> bool {
    println!("{name:<12} {}  {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

fn cmd_verify(args: &ProblemArgs, control: &Path, p: f64) -> CliResult<i32> {
    let (sys, _) = load_system(&args.system)?;
    let xi = parse_state(&args.xi)?;
    let text = std::fs::read_to_string(control)
        .map_err(|e| input_error(format!("cannot read {}: {e}", control.display())))?;
    let u = csv::parse_control_csv(&text, args.horizon).map_err(|e| input_error(format!("{}: {e}", control.display())))?;
    let problem = transcribe(&sys, &xi, args.horizon, u.n_intervals())?;

    let linf = u.linf_norm();
    let magnitude = report_check("magnitude", linf <= 1.0 + solver::BANG_TOL, &format!("max |u| = {linf}"));
    let residual = problem.residual(u.values());
    let feasible = report_check(
        "feasibility",
        residual <= problem.residual_tolerance(),
        &format!("terminal residual {residual:.3e} (tolerance {:.1e})", problem.residual_tolerance()),
    );
    let norms = u.norms(p, DEFAULT_ZERO_TOL);
    let finite = [norms.l0, norms.l1, norms.lp, norms.linf].iter().all(|v| v.is_finite());
    let norms_ok = report_check(
        "norms",
        finite,
        &format!("L0 {:.6}  L1 {:.6}  L{} {:.6}  Linf {:.6}", norms.l0, norms.l1, p, norms.lp, norms.linf),
    );
    let certified = if magnitude && feasible {
        match find_certificate(&problem, &u)? {
            Some(c) => report_check(
                "certificate",
                true,
                &format!("q0 = {:?}, max violation {:.3e}", c.q0, c.max_violation),
            ),
            None => report_check("certificate", false, "no costate satisfies the minimum condition"),
        }
    } else {
        report_check("certificate", false, "skipped: control is not admissible")
    };
    Ok(if magnitude && feasible && norms_ok && certified { EXIT_OK } else { EXIT_VERIFY })
}
