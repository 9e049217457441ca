//! Experiment harness behind the `rkhs-bench` binary: single solves,
//! convergence sweeps and cross-checks against the finite-difference oracle,
//! with CSV and JSON artifacts.
//!
//! Configuration is a flat `key = value` file (`#` starts a comment) whose
//! keys are the ones accepted by [`RunConfig::set`]; command-line flags are
//! applied on top of it.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use crate::collocation::{
    assemble, error_norms, generate_nodes, solve, KernelPair, PicardReport, Solution, SolutionErrors, SolveMode,
    SolverConfig,
};
use crate::error::{Error, Result};
use crate::fd_oracle::{self_error_estimate, solve_coupled_fd, OracleEstimate};
use crate::grid::{error_vs_exact, ErrorNorms, GridField, SpaceTimeGrid};
use crate::optimality::{residual_adjoint, residual_forward};
use crate::problem::{builtin_example, cost_functional, homogenize, ControlProblem, ExactSolution};

pub const SOLUTION_HEADER: &str = "x,t,y_exact,y_approx,p_exact,p_approx,u_exact,u_approx,err_y,err_p";
pub const CONVERGENCE_HEADER: &str = "n_total,linf_y,l2_y,linf_p,l2_p,cond_estimate,seconds";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Direct,
    Picard,
}

/// Which set of times `slices.csv` reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SliceTimes {
    /// 0, 0.1, 0.3, 0.5, 0.7, 0.9, 1
    Prose,
    /// 0, 0.2, 0.5, 0.7, 0.9, 1
    Caption,
}

impl SliceTimes {
    pub fn times(self) -> &'static [f64] {
        match self {
            SliceTimes::Prose => &[0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0],
            SliceTimes::Caption => &[0.0, 0.2, 0.5, 0.7, 0.9, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub example_id: u32,
    pub nu: f64,
    pub n_x: usize,
    pub n_t: usize,
    /// Evaluation grid points per axis, boundaries included.
    pub eval_grid: (usize, usize),
    pub ridge_lambda: f64,
    pub mode: Mode,
    pub output_dir: PathBuf,
    pub slice_times: SliceTimes,
    /// Node layouts for `convergence`.
    pub sweep: Vec<(usize, usize)>,
    /// Interior points per axis of the oracle grid for `crosscheck`.
    pub oracle_grid: (usize, usize),
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            example_id: 1,
            nu: 1e-2,
            n_x: 8,
            n_t: 8,
            eval_grid: (101, 101),
            ridge_lambda: SolverConfig::default().ridge_lambda,
            mode: Mode::Direct,
            output_dir: PathBuf::from("."),
            slice_times: SliceTimes::Prose,
            sweep: vec![(4, 4), (8, 8), (12, 12), (16, 16)],
            oracle_grid: (64, 64),
        }
    }
}

fn parse_dims(value: &str) -> Result<(usize, usize)> {
    let (a, b) = value
        .split_once(['x', 'X'])
        .ok_or_else(|| Error::Config(format!("expected dimensions like 16x16, got '{value}'")))?;
    Ok((parse_num(a.trim(), "dimension")?, parse_num(b.trim(), "dimension")?))
}

fn parse_num<T: std::str::FromStr>(value: &str, what: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::Config(format!("cannot parse {what} from '{value}'")))
}

impl RunConfig {
    /// Sets one option. Keys: `example`, `nu`, `nx`, `nt`, `eval_grid`,
    /// `ridge`, `mode`, `out`, `slice_times`, `sweep`, `oracle_grid`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim().replace('-', "_").as_str() {
            "example" | "example_id" => self.example_id = parse_num(value, "example id")?,
            "nu" => self.nu = parse_num(value, "nu")?,
            "nx" | "n_x" => self.n_x = parse_num(value, "n_x")?,
            "nt" | "n_t" => self.n_t = parse_num(value, "n_t")?,
            "eval_grid" => self.eval_grid = parse_dims(value)?,
            "ridge" | "ridge_lambda" => self.ridge_lambda = parse_num(value, "ridge weight")?,
            "mode" => {
                self.mode = match value {
                    "direct" => Mode::Direct,
                    "picard" => Mode::Picard,
                    other => return Err(Error::Config(format!("unknown mode '{other}'"))),
                }
            }
            "out" | "output_dir" => self.output_dir = PathBuf::from(value),
            "slice_times" => {
                self.slice_times = match value {
                    "prose" => SliceTimes::Prose,
                    "caption" => SliceTimes::Caption,
                    other => return Err(Error::Config(format!("unknown slice set '{other}'"))),
                }
            }
            "sweep" => {
                self.sweep = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(parse_dims)
                    .collect::<Result<_>>()?
            }
            "oracle_grid" => self.oracle_grid = parse_dims(value)?,
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Applies every `key = value` line of a config file body.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::Config(format!("nu must be positive, got {}", self.nu)));
        }
        if self.n_x == 0 || self.n_t == 0 {
            return Err(Error::Config("node counts must be positive".into()));
        }
        if self.eval_grid.0 < 3 || self.eval_grid.1 < 3 {
            return Err(Error::Config("evaluation grid needs at least 3 points per axis".into()));
        }
        if !(self.ridge_lambda >= 0.0 && self.ridge_lambda.is_finite()) {
            return Err(Error::Config("ridge weight must be non-negative".into()));
        }
        if self.sweep.iter().any(|&(a, b)| a == 0 || b == 0) || self.oracle_grid.0 == 0 || self.oracle_grid.1 == 0 {
            return Err(Error::Config("sweep and oracle dimensions must be positive".into()));
        }
        if !(1..=3).contains(&self.example_id) {
            return Err(Error::UnknownExample(self.example_id));
        }
        Ok(())
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            ridge_lambda: self.ridge_lambda,
            mode: match self.mode {
                Mode::Direct => SolveMode::Direct,
                Mode::Picard => SolveMode::picard(),
            },
            ..SolverConfig::default()
        }
    }

    /// One-line summary used when reporting failures.
    pub fn context(&self) -> String {
        format!("example={} nu={:e} nodes={}x{}", self.example_id, self.nu, self.n_x, self.n_t)
    }
}

/// A problem together with its known solution.
#[derive(Clone)]
pub struct Case {
    pub problem: ControlProblem,
    pub exact: ExactSolution,
}

impl Case {
    pub fn builtin(id: u32, nu: f64) -> Result<Self> {
        let (problem, exact) = builtin_example(id, nu)?;
        Ok(Self { problem, exact })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CondReport {
    pub pre: f64,
    pub post: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualReport {
    pub forward_max: f64,
    pub adjoint_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub norms: SolutionErrors,
    pub cond: CondReport,
    pub residuals: ResidualReport,
    pub j_cost: f64,
    pub seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub picard: Option<PicardReport>,
}

fn solve_nodes(case: &Case, n_x: usize, n_t: usize, solver: &SolverConfig) -> Result<Solution> {
    let rect = case.problem.rect();
    let hom = homogenize(&case.problem)?;
    let nodes = generate_nodes(n_x, n_t, rect)?;
    let kernels = Arc::new(KernelPair::for_rect(rect)?);
    let system = assemble(&hom, &nodes, kernels)?;
    solve(&system, solver)
}

/// Largest residuals of both equations at the corners of the node cells,
/// which are never collocation points of a uniform layout.
pub fn held_out_residuals(sol: &Solution, n_x: usize, n_t: usize) -> Result<ResidualReport> {
    let rect = sol.problem().rect();
    let (cx, ct) = (n_x.max(2), n_t.max(2));
    let (y, p) = (sol.state_field(), sol.adjoint_field());
    let mut out = ResidualReport { forward_max: 0.0, adjoint_max: 0.0 };
    for k in 1..ct {
        let t = k as f64 * rect.t_final / ct as f64;
        for i in 1..cx {
            let x = rect.a + i as f64 * rect.width() / cx as f64;
            out.forward_max = out.forward_max.max(residual_forward(&y, &p, sol.problem(), x, t)?.abs());
            out.adjoint_max = out.adjoint_max.max(residual_adjoint(&y, &p, sol.problem(), x, t)?.abs());
        }
    }
    Ok(out)
}

/// Full pipeline for one case without touching the file system.
pub fn run_case(case: &Case, cfg: &RunConfig) -> Result<(Solution, RunReport)> {
    cfg.validate()?;
    let start = Instant::now();
    let sol = solve_nodes(case, cfg.n_x, cfg.n_t, &cfg.solver_config())?;
    let norms = error_norms(&sol, &case.exact, cfg.eval_grid)?;
    let residuals = held_out_residuals(&sol, cfg.n_x, cfg.n_t)?;
    let grid = SpaceTimeGrid::with_points(case.problem.rect(), cfg.eval_grid.0, cfg.eval_grid.1)?;
    let (y, _, u) = sol.evaluate_grid(&grid)?;
    let j_cost = cost_functional(&y, &u, &case.problem)?;
    let report = RunReport {
        config: cfg.clone(),
        norms,
        cond: CondReport { pre: sol.diagnostics.cond_pre, post: sol.diagnostics.cond_post },
        residuals,
        j_cost,
        seconds: start.elapsed().as_secs_f64(),
        picard: sol.diagnostics.picard,
    };
    if let Some(pr) = report.picard {
        if !pr.converged {
            log::warn!("picard iteration stopped after {} steps without converging", pr.iterations);
        }
    }
    Ok((sol, report))
}

fn fmt_row(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        // avoid "-0" in the output
        let v = if *v == 0.0 { 0.0 } else { *v };
        write!(out, "{v:.16e}").expect("writing to a String cannot fail");
    }
    out.push('\n');
}

fn solution_rows(sol: &Solution, exact: &ExactSolution, points: &[(f64, f64)]) -> Result<String> {
    let mut out = String::from(SOLUTION_HEADER);
    out.push('\n');
    for &(x, t) in points {
        let v = sol.evaluate(x, t)?;
        let (ye, pe) = (exact.y.value(x, t), exact.p.value(x, t));
        fmt_row(&mut out, &[x, t, ye, v.y, pe, v.p, exact.u(x, t), v.u, v.y - ye, v.p - pe]);
    }
    Ok(out)
}

/// `solution.csv` contents on the evaluation grid, time-major.
pub fn solution_csv(sol: &Solution, exact: &ExactSolution, grid: &SpaceTimeGrid) -> Result<String> {
    let xs = grid.xs();
    let points: Vec<(f64, f64)> = grid.ts().into_iter().flat_map(|t| xs.iter().map(move |&x| (x, t))).collect();
    solution_rows(sol, exact, &points)
}

/// `slices.csv` contents: the evaluation grid's `x` points at each slice time
/// (scaled to the final time of the problem).
pub fn slices_csv(sol: &Solution, exact: &ExactSolution, grid: &SpaceTimeGrid, times: SliceTimes) -> Result<String> {
    let xs = grid.xs();
    let t_final = grid.rect.t_final;
    let points: Vec<(f64, f64)> = times
        .times()
        .iter()
        .flat_map(|&s| {
            let t = if s == 1.0 { t_final } else { s * t_final };
            xs.iter().map(move |&x| (x, t))
        })
        .collect();
    solution_rows(sol, exact, &points)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Runs one solve and writes `solution.csv`, `slices.csv` and `report.json`.
pub fn solve_to_dir(case: &Case, cfg: &RunConfig) -> Result<RunReport> {
    let (sol, report) = run_case(case, cfg)?;
    let grid = SpaceTimeGrid::with_points(case.problem.rect(), cfg.eval_grid.0, cfg.eval_grid.1)?;
    write_file(&cfg.output_dir, "solution.csv", &solution_csv(&sol, &case.exact, &grid)?)?;
    write_file(&cfg.output_dir, "slices.csv", &slices_csv(&sol, &case.exact, &grid, cfg.slice_times)?)?;
    write_file(&cfg.output_dir, "report.json", &to_json(&report)?)?;
    Ok(report)
}

/// `solve` subcommand on the configured built-in example.
pub fn cmd_solve(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    solve_to_dir(&Case::builtin(cfg.example_id, cfg.nu)?, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n_total: usize,
    pub linf_y: f64,
    pub l2_y: f64,
    pub linf_p: f64,
    pub l2_p: f64,
    pub cond_estimate: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Sweep positions `i` where `l2_y[i] > 1.05 * l2_y[i - 1]`.
    pub violations: Vec<usize>,
}

impl ConvergenceReport {
    pub fn is_monotone(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CONVERGENCE_HEADER);
        out.push('\n');
        for r in &self.rows {
            write!(out, "{}", r.n_total).expect("writing to a String cannot fail");
            for v in [r.linf_y, r.l2_y, r.linf_p, r.l2_p, r.cond_estimate, r.seconds] {
                write!(out, ",{v:.16e}").expect("writing to a String cannot fail");
            }
            out.push('\n');
        }
        out
    }
}

/// Solves the case at every sweep layout and checks that `l2_y` does not
/// grow by more than 5% from one layout to the next.
pub fn convergence_study(case: &Case, cfg: &RunConfig) -> Result<ConvergenceReport> {
    cfg.validate()?;
    if cfg.sweep.len() < 2 {
        return Err(Error::Config(format!("a convergence sweep needs at least 2 layouts, got {}", cfg.sweep.len())));
    }
    let solver = cfg.solver_config();
    let mut rows = Vec::with_capacity(cfg.sweep.len());
    for &(n_x, n_t) in &cfg.sweep {
        let start = Instant::now();
        let sol = solve_nodes(case, n_x, n_t, &solver)?;
        let e = error_norms(&sol, &case.exact, cfg.eval_grid)?;
        rows.push(ConvergenceRow {
            n_total: n_x * n_t,
            linf_y: e.linf_y,
            l2_y: e.l2_y,
            linf_p: e.linf_p,
            l2_p: e.l2_p,
            cond_estimate: sol.diagnostics.cond_pre,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    let violations: Vec<usize> = (1..rows.len()).filter(|&i| rows[i].l2_y > 1.05 * rows[i - 1].l2_y).collect();
    for &i in &violations {
        log::warn!("l2_y grew from {:.3e} to {:.3e} at sweep position {i}", rows[i - 1].l2_y, rows[i].l2_y);
    }
    Ok(ConvergenceReport { rows, violations })
}

/// `convergence` subcommand: writes `convergence.csv`.
pub fn cmd_convergence(cfg: &RunConfig) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let report = convergence_study(&Case::builtin(cfg.example_id, cfg.nu)?, cfg)?;
    write_file(&cfg.output_dir, "convergence.csv", &report.to_csv())?;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleGridEcho {
    pub n_x: usize,
    pub n_t: usize,
    pub h: f64,
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrosscheckReport {
    pub config: RunConfig,
    pub oracle_grid: OracleGridEcho,
    /// Max difference of the two states over the oracle grid.
    pub discrepancy_y: f64,
    pub discrepancy_p: f64,
    pub rkhs_error_y: ErrorNorms,
    pub rkhs_error_p: ErrorNorms,
    pub oracle_error_y: ErrorNorms,
    pub oracle_error_p: ErrorNorms,
    pub oracle_estimate: OracleEstimate,
    pub tolerance: f64,
    pub agree: bool,
    pub cond: CondReport,
    pub seconds: f64,
}

/// Solves the case with both methods and compares them on the oracle grid.
pub fn crosscheck(case: &Case, cfg: &RunConfig) -> Result<CrosscheckReport> {
    cfg.validate()?;
    let start = Instant::now();
    let rect = case.problem.rect();
    let sol = solve_nodes(case, cfg.n_x, cfg.n_t, &cfg.solver_config())?;
    let grid = SpaceTimeGrid::new(rect, cfg.oracle_grid.0, cfg.oracle_grid.1)?;
    let fd = solve_coupled_fd(&case.problem, grid)?;
    let estimate = self_error_estimate(&case.problem, &fd)?;
    let (y, p, _) = sol.evaluate_grid(&grid)?;
    let diff = |a: &GridField, b: &GridField| -> Result<f64> { Ok(a.zip_map(b, |u, v| u - v)?.max_abs()) };
    let exact_y = |x, t| case.exact.y.value(x, t);
    let exact_p = |x, t| case.exact.p.value(x, t);
    let discrepancy_y = diff(&y, &fd.y)?;
    let tolerance = (3.0 * estimate.y).max(1e-3);
    Ok(CrosscheckReport {
        config: cfg.clone(),
        oracle_grid: OracleGridEcho { n_x: grid.n_x, n_t: grid.n_t, h: grid.h(), k: grid.k() },
        discrepancy_y,
        discrepancy_p: diff(&p, &fd.p)?,
        rkhs_error_y: error_vs_exact(&y, &exact_y),
        rkhs_error_p: error_vs_exact(&p, &exact_p),
        oracle_error_y: error_vs_exact(&fd.y, &exact_y),
        oracle_error_p: error_vs_exact(&fd.p, &exact_p),
        oracle_estimate: estimate,
        tolerance,
        agree: discrepancy_y <= tolerance,
        cond: CondReport { pre: sol.diagnostics.cond_pre, post: sol.diagnostics.cond_post },
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// `crosscheck` subcommand: writes `crosscheck.json`.
pub fn cmd_crosscheck(cfg: &RunConfig) -> Result<CrosscheckReport> {
    cfg.validate()?;
    let report = crosscheck(&Case::builtin(cfg.example_id, cfg.nu)?, cfg)?;
    write_file(&cfg.output_dir, "crosscheck.json", &to_json(&report)?)?;
    Ok(report)
}
