//! Experiment specifications and the runner.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use qnop::lab::{self, OracleReport};
use qnop::problems::{circle_cosine_system, modified_rosenbrock_10, motivating_quadratic_2d, quadratic_weighted_50};
use qnop::{
    minimize, minimize_lbfgs, solve_system, InitialMatrix, IterationTrace, NonlinearSystem, SmoothProblem,
    SolverStatus, StoppingRule,
};
use rayon::prelude::*;

use crate::methods::{system_methods, table2_methods, table3_methods, Driver, Family, Method};
use crate::table::Format;
use crate::CliError;

pub const DEFAULT_LAMBDAS: [f64; 6] = [50.0, 100.0, 200.0, 500.0, 1000.0, 5000.0];
pub const DEFAULT_SEED: u64 = 2024;
pub const DEFAULT_TRIALS: usize = 500;
pub const DEFAULT_MAX_ITERS: usize = 100_000;
/// `‖x_k − x⋆‖ ≤ 1e-7 ‖x₀ − x⋆‖` on the weighted quadratic.
pub const QUADRATIC_TOL: f64 = 1e-7;
/// `‖F(x_k)‖ ≤ 1e-7` on the systems.
pub const SYSTEM_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentId {
    Table2,
    Table3,
    Example1,
    Systems,
    Lab,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 5] =
        [ExperimentId::Table2, ExperimentId::Table3, ExperimentId::Example1, ExperimentId::Systems, ExperimentId::Lab];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentId::Table2 => "table2",
            ExperimentId::Table3 => "table3",
            ExperimentId::Example1 => "example1",
            ExperimentId::Systems => "systems",
            ExperimentId::Lab => "lab",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Self::ALL
            .into_iter()
            .find(|id| id.as_str() == s.trim())
            .ok_or_else(|| CliError::Usage(format!("unknown experiment `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub id: ExperimentId,
    /// Explicit method list; `None` uses the experiment's default rows.
    pub methods: Option<Vec<Method>>,
    pub lambdas: Vec<f64>,
    /// Projection windows; `None` uses the experiment's defaults.
    pub ds: Option<Vec<usize>>,
    /// L-BFGS memories; `None` uses the experiment's defaults.
    pub memories: Option<Vec<usize>>,
    pub seed: u64,
    pub trials: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
    /// Worker threads; `None` uses every hardware thread.
    pub workers: Option<usize>,
    pub max_iters: usize,
    /// Include wall time in the output.
    pub timing: bool,
}

impl ExperimentSpec {
    pub fn new(id: ExperimentId) -> Self {
        Self {
            id,
            methods: None,
            lambdas: DEFAULT_LAMBDAS.to_vec(),
            ds: None,
            memories: None,
            seed: DEFAULT_SEED,
            trials: DEFAULT_TRIALS,
            format: Format::Csv,
            out: None,
            workers: None,
            max_iters: DEFAULT_MAX_ITERS,
            timing: false,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |m: &str| Err(CliError::Usage(m.into()));
        if self.lambdas.is_empty() || self.lambdas.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return usage("lambdas must be a nonempty list of positive numbers");
        }
        if matches!(&self.methods, Some(m) if m.is_empty()) {
            return usage("method list is empty");
        }
        if matches!(&self.ds, Some(d) if d.is_empty() || d.contains(&0)) {
            return usage("d list must be nonempty and positive");
        }
        if matches!(&self.memories, Some(n) if n.is_empty() || n.contains(&0)) {
            return usage("N list must be nonempty and positive");
        }
        if self.workers == Some(0) {
            return usage("workers must be positive");
        }
        if self.trials == 0 || self.max_iters == 0 {
            return usage("trials and max_iters must be positive");
        }
        if let Some(methods) = &self.methods {
            let systems = self.id == ExperimentId::Systems;
            match self.id {
                ExperimentId::Table2 | ExperimentId::Table3 | ExperimentId::Systems => {
                    if let Some(m) = methods.iter().find(|m| m.is_system() != systems) {
                        return Err(CliError::Usage(format!("method {m} does not apply to {}", self.id)));
                    }
                }
                ExperimentId::Example1 => {
                    if let Some(m) = methods.iter().find(|m| !matches!(m.family, Family::Dfp | Family::Bfgs | Family::Psb)) {
                        return Err(CliError::Usage(format!("method {m} does not apply to example1")));
                    }
                }
                ExperimentId::Lab => return usage("lab takes no method list"),
            }
        }
        Ok(())
    }

    /// Methods actually run.
    pub fn resolved_methods(&self) -> Vec<Method> {
        if let Some(m) = &self.methods {
            return m.clone();
        }
        match self.id {
            ExperimentId::Table2 => {
                table2_methods(self.ds.as_deref().unwrap_or(&[1, 2]), self.memories.as_deref().unwrap_or(&[3, 10]))
            }
            ExperimentId::Table3 => table3_methods(self.memories.as_deref().unwrap_or(&[3, 4, 5]), self.ds.as_deref()),
            ExperimentId::Systems => system_methods(self.ds.as_deref().unwrap_or(&[1])),
            ExperimentId::Example1 => {
                vec![Method::standard(Family::Dfp), Method::standard(Family::Bfgs)]
            }
            ExperimentId::Lab => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RunStatus {
    Converged,
    MaxIters,
    Breakdown,
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::Converged => "converged",
            RunStatus::MaxIters => "max_iters",
            RunStatus::Breakdown => "breakdown",
        }
    }
}

impl From<&SolverStatus> for RunStatus {
    fn from(s: &SolverStatus) -> Self {
        match s {
            SolverStatus::Converged => RunStatus::Converged,
            SolverStatus::MaxIters => RunStatus::MaxIters,
            SolverStatus::Breakdown(_) => RunStatus::Breakdown,
        }
    }
}

impl FromStr for RunStatus {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "converged" => Ok(RunStatus::Converged),
            "max_iters" => Ok(RunStatus::MaxIters),
            "breakdown" => Ok(RunStatus::Breakdown),
            _ => Err(CliError::Parse(format!("unknown status `{s}`"))),
        }
    }
}

/// One solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub problem: String,
    pub method: Method,
    pub lambda: Option<f64>,
    pub iterations: usize,
    pub status: RunStatus,
    pub fallbacks: usize,
    /// Mean angle of `s_k` to `ker(B_k − A)` in degrees (example1 only).
    pub mean_angle: Option<f64>,
    pub wall_ms: Option<f64>,
}

/// Per-iteration angle for the motivating example.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleRow {
    pub iteration: usize,
    pub angle: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub id: ExperimentId,
    pub rows: Vec<ResultRow>,
    /// BFGS angle sequence (example1 only).
    pub angles: Vec<AngleRow>,
    pub oracles: Vec<OracleReport>,
}

impl Report {
    /// 0 clean, 1 some run did not converge, 2 an oracle reported violations.
    pub fn exit_code(&self) -> i32 {
        if self.rows.iter().any(|r| r.status != RunStatus::Converged) {
            1
        } else if self.oracles.iter().any(|o| !o.clean()) {
            2
        } else {
            0
        }
    }
}

struct Cell {
    method: Method,
    lambda: Option<f64>,
    problem: Problem,
}

#[derive(Clone, Copy)]
enum Problem {
    Quadratic,
    Circle,
    Rosenbrock,
}

impl Problem {
    fn name(&self) -> &'static str {
        match self {
            Problem::Quadratic => "quadratic50",
            Problem::Circle => "circle-cosine",
            Problem::Rosenbrock => "rosenbrock10",
        }
    }
}

fn run_smooth(method: &Method, problem: &SmoothProblem, stop: StoppingRule, b0: InitialMatrix, max_iters: usize, angles: bool) -> Result<IterationTrace, CliError> {
    let mut plan = method.plan(stop, b0, max_iters);
    if angles {
        if let Some(a) = &problem.hessian {
            plan.config = plan.config.with_reference(a.clone()).with_angles();
        }
    }
    let trace = match plan.driver {
        Driver::Dense => minimize(problem, &plan.config),
        Driver::Lbfgs => minimize_lbfgs(problem, &plan.config),
        Driver::System(_) => unreachable!("validated"),
    };
    trace.map_err(|e| CliError::Run(format!("{method}: {e}")))
}

fn run_system(method: &Method, system: &NonlinearSystem, max_iters: usize) -> Result<IterationTrace, CliError> {
    let plan = method.plan(StoppingRule::ResidualNorm { eps: SYSTEM_TOL }, InitialMatrix::ScaledIdentity(1.0), max_iters);
    let Driver::System(kind) = plan.driver else { unreachable!("validated") };
    solve_system(system, kind, &plan.config).map_err(|e| CliError::Run(format!("{method}: {e}")))
}

fn row(cell: &Cell, trace: &IterationTrace, elapsed: f64, timing: bool, angle: bool) -> ResultRow {
    ResultRow {
        problem: cell.problem.name().into(),
        method: cell.method,
        lambda: cell.lambda,
        iterations: trace.iterations(),
        status: RunStatus::from(&trace.status),
        fallbacks: trace.fallback_count(),
        mean_angle: if angle { trace.mean_angle() } else { None },
        wall_ms: timing.then_some(elapsed),
    }
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        b = b.num_threads(w);
    }
    b.build().map_err(|e| CliError::Run(e.to_string()))
}

/// Runs every cell of `spec`. Rows come back in spec order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Report, CliError> {
    spec.validate()?;
    let methods = spec.resolved_methods();
    let pool = pool(spec.workers)?;
    match spec.id {
        ExperimentId::Table2 | ExperimentId::Table3 => {
            let problem = quadratic_weighted_50();
            let x_star = problem.minimizer.clone().unwrap_or_else(|| vec![0.0; problem.n]);
            let cells: Vec<Cell> = methods
                .iter()
                .flat_map(|m| spec.lambdas.iter().map(move |&l| Cell { method: *m, lambda: Some(l), problem: Problem::Quadratic }))
                .collect();
            let rows = pool.install(|| {
                cells
                    .par_iter()
                    .map(|cell| {
                        let t = Instant::now();
                        let stop = StoppingRule::IterateError { x_star: x_star.clone(), eps_rel: QUADRATIC_TOL };
                        let b0 = InitialMatrix::ScaledIdentity(cell.lambda.unwrap_or(1.0));
                        let trace = run_smooth(&cell.method, &problem, stop, b0, spec.max_iters, false)?;
                        Ok(row(cell, &trace, t.elapsed().as_secs_f64() * 1e3, spec.timing, false))
                    })
                    .collect::<Result<Vec<_>, CliError>>()
            })?;
            Ok(Report { id: spec.id, rows, angles: Vec::new(), oracles: Vec::new() })
        }
        ExperimentId::Systems => {
            let cells: Vec<Cell> = [Problem::Circle, Problem::Rosenbrock]
                .into_iter()
                .flat_map(|p| methods.iter().map(move |m| Cell { method: *m, lambda: None, problem: p }))
                .collect();
            let rows = pool.install(|| {
                cells
                    .par_iter()
                    .map(|cell| {
                        let system = match cell.problem {
                            Problem::Circle => circle_cosine_system(),
                            _ => modified_rosenbrock_10(),
                        };
                        let t = Instant::now();
                        let trace = run_system(&cell.method, &system, spec.max_iters)?;
                        Ok(row(cell, &trace, t.elapsed().as_secs_f64() * 1e3, spec.timing, false))
                    })
                    .collect::<Result<Vec<_>, CliError>>()
            })?;
            Ok(Report { id: spec.id, rows, angles: Vec::new(), oracles: Vec::new() })
        }
        ExperimentId::Example1 => {
            let ex = motivating_quadratic_2d();
            let stop = StoppingRule::GradNorm { eps: ex.grad_tol, relative: true };
            let results = pool.install(|| {
                methods
                    .par_iter()
                    .map(|m| {
                        let t = Instant::now();
                        let trace = run_smooth(m, &ex.problem, stop.clone(), InitialMatrix::Explicit(ex.b0.clone()), spec.max_iters, true)?;
                        Ok((trace, t.elapsed().as_secs_f64() * 1e3))
                    })
                    .collect::<Result<Vec<_>, CliError>>()
            })?;
            let mut rows = Vec::new();
            let mut angles = Vec::new();
            for (m, (trace, ms)) in methods.iter().zip(&results) {
                let cell = Cell { method: *m, lambda: None, problem: Problem::Quadratic };
                let mut r = row(&cell, trace, *ms, spec.timing, true);
                r.problem = ex.problem.name.clone();
                rows.push(r);
                if m.family == Family::Bfgs && angles.is_empty() {
                    angles = trace.angles().into_iter().enumerate().map(|(iteration, angle)| AngleRow { iteration, angle }).collect();
                }
            }
            Ok(Report { id: spec.id, rows, angles, oracles: Vec::new() })
        }
        ExperimentId::Lab => {
            let oracles = pool.install(|| lab_reports(spec.trials, spec.seed));
            Ok(Report { id: spec.id, rows: Vec::new(), angles: Vec::new(), oracles })
        }
    }
}

/// Every lab suite, with independent suites run in parallel.
pub fn lab_reports(trials: usize, seed: u64) -> Vec<OracleReport> {
    let jobs: Vec<Box<dyn Fn() -> Vec<OracleReport> + Send + Sync>> = vec![
        Box::new(move || lab::termination_suite(100, seed)),
        Box::new(move || vec![lab::span_inclusion_suite(100, seed.wrapping_add(1))]),
        Box::new(move || vec![lab::kernel_monotonicity_suite(100, seed.wrapping_add(2))]),
        Box::new(move || vec![lab::image_space_suite(trials, seed.wrapping_add(3))]),
        Box::new(move || lab::error_reduction_suite(trials, seed.wrapping_add(4))),
        Box::new(move || lab::image_gain_suite(trials, seed.wrapping_add(5))),
        Box::new(move || lab::projection_gain_suite(trials, seed.wrapping_add(6))),
        Box::new(move || lab::lemma_suite(trials, seed.wrapping_add(7))),
    ];
    jobs.par_iter().map(|job| job()).collect::<Vec<_>>().into_iter().flatten().collect()
}
