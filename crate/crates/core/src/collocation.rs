//! Kernel collocation for the coupled state/adjoint system.
//!
//! The homogenized state is expanded in `psi_j1 = L1_(r,s) K((x,t),(r,s))`
//! evaluated at the node `(x_j, t_j)`, with `K` the state kernel (zero at
//! `x = a, b` and `t = 0`); the homogenized adjoint uses `psi_j2` built from
//! `L2` and the adjoint kernel (zero at `x = a, b` and `t = T`). Enforcing both
//! equations at every node gives the `2n x 2n` system
//!
//! ```text
//! [ L1 psi_j1(z_i)   -psi_j2(z_i)/nu ] [b1]   [ G1(z_i)                 ]
//! [ psi_j1(z_i)       L2 psi_j2(z_i) ] [b2] = [ y_d(z_i) - y_hat(z_i) + G2(z_i) ]
//! ```
//!
//! where the linear couplings have been moved to the left-hand side.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Rectangle, SpaceTimeField};
use crate::grid::{ErrorNorms, GridField, SpaceTimeGrid};
use crate::kernel::TensorKernel;
use crate::linalg::{equilibrate_rows, ridge_solve, DenseLu, DenseMatrix};
use crate::problem::{ExactSolution, HomogenizedProblem};

/// How the nodes were generated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum NodeDescriptor {
    /// Half-offset tensor grid, time-major then space, ascending.
    Uniform { n_x: usize, n_t: usize },
    /// Caller-supplied list, kept in the given order.
    Custom,
}

/// Distinct collocation nodes strictly inside the space-time rectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet {
    rect: Rectangle,
    nodes: Vec<(f64, f64)>,
    descriptor: NodeDescriptor,
}

impl NodeSet {
    /// Uniform half-offset grid `x_i = a + (i - 1/2)(b - a)/n_x`,
    /// `t_k = (k - 1/2) T / n_t`, ordered by time level, then by `x`.
    pub fn uniform(n_x: usize, n_t: usize, rect: Rectangle) -> Result<Self> {
        if n_x == 0 || n_t == 0 {
            return Err(Error::Config(format!("node counts must be positive, got {n_x}x{n_t}")));
        }
        let mut nodes = Vec::with_capacity(n_x * n_t);
        for k in 0..n_t {
            let t = (k as f64 + 0.5) * rect.t_final / n_t as f64;
            for i in 0..n_x {
                let x = rect.a + (i as f64 + 0.5) * rect.width() / n_x as f64;
                nodes.push((x, t));
            }
        }
        Ok(Self { rect, nodes, descriptor: NodeDescriptor::Uniform { n_x, n_t } })
    }

    pub fn from_points(rect: Rectangle, nodes: Vec<(f64, f64)>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Config("node set is empty".into()));
        }
        for &(x, t) in &nodes {
            if !(x > rect.a && x < rect.b && t > 0.0 && t < rect.t_final) {
                return Err(Error::Config(format!("node ({x}, {t}) is not strictly interior")));
            }
        }
        let mut sorted = nodes.clone();
        sorted.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("nodes must be pairwise distinct".into()));
        }
        Ok(Self { rect, nodes, descriptor: NodeDescriptor::Custom })
    }

    pub fn rect(&self) -> Rectangle {
        self.rect
    }

    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    pub fn descriptor(&self) -> NodeDescriptor {
        self.descriptor
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Same as [`NodeSet::uniform`].
pub fn generate_nodes(n_x: usize, n_t: usize, rect: Rectangle) -> Result<NodeSet> {
    NodeSet::uniform(n_x, n_t, rect)
}

/// Distinct values of one coordinate plus, for each node, its position in
/// that list.
#[derive(Debug, Clone)]
struct Coordinates {
    values: Vec<f64>,
    of_node: Vec<usize>,
}

impl Coordinates {
    fn new(raw: impl Iterator<Item = f64>) -> Self {
        let raw: Vec<f64> = raw.collect();
        let mut values = raw.clone();
        values.sort_by(f64::total_cmp);
        values.dedup();
        let of_node = raw
            .iter()
            .map(|v| values.binary_search_by(|p| p.total_cmp(v)).expect("value is present"))
            .collect();
        Self { values, of_node }
    }
}

/// The state and adjoint tensor kernels on one rectangle.
#[derive(Debug, Clone)]
pub struct KernelPair {
    pub state: TensorKernel,
    pub adjoint: TensorKernel,
}

impl KernelPair {
    pub fn for_rect(rect: Rectangle) -> Result<Self> {
        Ok(Self {
            state: TensorKernel::state(rect.a, rect.b, rect.t_final)?,
            adjoint: TensorKernel::adjoint(rect.a, rect.b, rect.t_final)?,
        })
    }

    fn check(&self, rect: Rectangle) -> Result<()> {
        let tol = 1e-12 * (1.0 + rect.width().max(rect.t_final));
        for (name, k) in [("state", &self.state), ("adjoint", &self.adjoint)] {
            let (a, b, t0, t1) = k.rectangle();
            if (a - rect.a).abs() > tol || (b - rect.b).abs() > tol || t0.abs() > tol || (t1 - rect.t_final).abs() > tol {
                return Err(Error::KernelDomainMismatch(format!(
                    "{name} kernel lives on [{a}, {b}] x [{t0}, {t1}], problem on [{}, {}] x [0, {}]",
                    rect.a, rect.b, rect.t_final
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisKind {
    /// Built from `L1` and the state kernel.
    State,
    /// Built from `L2` and the adjoint kernel.
    Adjoint,
}

impl BasisKind {
    fn time_sign(self) -> f64 {
        match self {
            BasisKind::State => -1.0,
            BasisKind::Adjoint => 1.0,
        }
    }

    fn kernel(self, kernels: &KernelPair) -> &TensorKernel {
        match self {
            BasisKind::State => &kernels.state,
            BasisKind::Adjoint => &kernels.adjoint,
        }
    }
}

/// `psi_j = L_(r,s) K((x,t),(r,s))` at `(r,s) = center`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisFunction {
    pub center: (f64, f64),
    pub kind: BasisKind,
}

impl BasisFunction {
    /// `d^dx/dx^dx d^dt/dt^dt psi_j(x, t)`.
    pub fn eval(&self, kernels: &KernelPair, x: f64, t: f64, dx: usize, dt: usize) -> Result<f64> {
        let k = self.kind.kernel(kernels);
        let (xc, tc) = self.center;
        let s0 = k.spatial().eval(x, xc, dx, 0)?;
        let s2 = k.spatial().eval(x, xc, dx, 2)?;
        let t0 = k.temporal().eval(t, tc, dt, 0)?;
        let t1 = k.temporal().eval(t, tc, dt, 1)?;
        Ok(s2 * t0 + self.kind.time_sign() * s0 * t1)
    }

    /// The operator that built this basis function applied again at `(x, t)`.
    pub fn apply_operator(&self, kernels: &KernelPair, x: f64, t: f64) -> Result<f64> {
        Ok(self.kind.time_sign() * self.eval(kernels, x, t, 0, 1)? + self.eval(kernels, x, t, 2, 0)?)
    }
}

/// Kernel derivative tables between node coordinates:
/// `space[(a, b)][i][j] = d^a_x d^b_r k(x_i, x_j)` and likewise in time.
struct NodeTables {
    nx: usize,
    nt: usize,
    // index by [alpha/2][beta/2] over alpha, beta in {0, 2}
    space: [[Vec<f64>; 2]; 2],
    // index by [alpha][beta] over alpha, beta in {0, 1}
    state_time: [[Vec<f64>; 2]; 2],
    adjoint_time: [[Vec<f64>; 2]; 2],
}

impl NodeTables {
    fn new(kernels: &KernelPair, xs: &Coordinates, ts: &Coordinates) -> Self {
        let (nx, nt) = (xs.values.len(), ts.values.len());
        let table = |k: &crate::kernel::Kernel1D, v: &[f64], da: usize, db: usize| -> Vec<f64> {
            let mut out = Vec::with_capacity(v.len() * v.len());
            for &p in v {
                for &c in v {
                    out.push(k.eval_unchecked(p, c, da, db));
                }
            }
            out
        };
        let sk = kernels.state.spatial();
        let space = [
            [table(sk, &xs.values, 0, 0), table(sk, &xs.values, 0, 2)],
            [table(sk, &xs.values, 2, 0), table(sk, &xs.values, 2, 2)],
        ];
        let time = |k: &crate::kernel::Kernel1D| {
            [
                [table(k, &ts.values, 0, 0), table(k, &ts.values, 0, 1)],
                [table(k, &ts.values, 1, 0), table(k, &ts.values, 1, 1)],
            ]
        };
        Self {
            nx,
            nt,
            space,
            state_time: time(kernels.state.temporal()),
            adjoint_time: time(kernels.adjoint.temporal()),
        }
    }

    /// `(psi, L psi)` of the basis centered at node coordinates `(jx, jt)`,
    /// evaluated at node coordinates `(ix, it)`.
    fn entry(&self, kind: BasisKind, ix: usize, it: usize, jx: usize, jt: usize) -> (f64, f64) {
        let s = |a: usize, b: usize| self.space[a][b][ix * self.nx + jx];
        let time = match kind {
            BasisKind::State => &self.state_time,
            BasisKind::Adjoint => &self.adjoint_time,
        };
        let tm = |a: usize, b: usize| time[a][b][it * self.nt + jt];
        let sign = kind.time_sign();
        let psi = s(0, 1) * tm(0, 0) + sign * s(0, 0) * tm(0, 1);
        let psi_t = s(0, 1) * tm(1, 0) + sign * s(0, 0) * tm(1, 1);
        let psi_xx = s(1, 1) * tm(0, 0) + sign * s(1, 0) * tm(0, 1);
        (psi, sign * psi_t + psi_xx)
    }
}

/// Assembled collocation system `A b = C`.
#[derive(Debug, Clone)]
pub struct CollocationSystem {
    pub matrix: DenseMatrix,
    pub rhs: Vec<f64>,
    pub nodes: NodeSet,
    kernels: Arc<KernelPair>,
    hom: HomogenizedProblem,
}

impl CollocationSystem {
    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn kernels(&self) -> &KernelPair {
        &self.kernels
    }

    pub fn problem(&self) -> &HomogenizedProblem {
        &self.hom
    }

    /// 1-norm condition estimate of the raw matrix; infinite if singular.
    pub fn condition_estimate(&self) -> f64 {
        DenseLu::factor(&self.matrix).map(|lu| lu.condition_estimate()).unwrap_or(f64::INFINITY)
    }

    /// Replaces matrix and right-hand side, keeping nodes and kernels.
    pub fn with_matrix(mut self, matrix: DenseMatrix, rhs: Vec<f64>) -> Result<Self> {
        let size = 2 * self.n();
        if matrix.rows() != size || matrix.cols() != size || rhs.len() != size {
            return Err(Error::GridMismatch(format!("expected a {size}x{size} system")));
        }
        self.matrix = matrix;
        self.rhs = rhs;
        Ok(self)
    }
}

/// Builds the collocation system for the homogenized problem.
pub fn assemble(hom: &HomogenizedProblem, nodes: &NodeSet, kernels: Arc<KernelPair>) -> Result<CollocationSystem> {
    let rect = hom.rect();
    kernels.check(rect)?;
    if nodes.rect() != rect {
        return Err(Error::KernelDomainMismatch("node set and problem use different rectangles".into()));
    }
    let n = nodes.len();
    let xs = Coordinates::new(nodes.nodes().iter().map(|p| p.0));
    let ts = Coordinates::new(nodes.nodes().iter().map(|p| p.1));
    let tables = NodeTables::new(&kernels, &xs, &ts);
    let inv_nu = 1.0 / hom.nu();

    let size = 2 * n;
    let mut data = vec![0.0; size * size];
    data.par_chunks_mut(size).enumerate().for_each(|(row, out)| {
        let i = row % n;
        let (ix, it) = (xs.of_node[i], ts.of_node[i]);
        for j in 0..n {
            let (jx, jt) = (xs.of_node[j], ts.of_node[j]);
            let (psi1, l_psi1) = tables.entry(BasisKind::State, ix, it, jx, jt);
            let (psi2, l_psi2) = tables.entry(BasisKind::Adjoint, ix, it, jx, jt);
            if row < n {
                out[j] = l_psi1;
                out[n + j] = -inv_nu * psi2;
            } else {
                out[j] = psi1;
                out[n + j] = l_psi2;
            }
        }
    });

    let mut rhs = vec![0.0; size];
    for (i, &(x, t)) in nodes.nodes().iter().enumerate() {
        rhs[i] = hom.state_forcing().value(x, t);
        rhs[n + i] = hom.target().value(x, t) - hom.state_lift().value(x, t) + hom.adjoint_forcing().value(x, t);
    }
    if let Some(bad) = rhs.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidProblem(format!("right-hand side entry {bad} is not finite")));
    }

    Ok(CollocationSystem {
        matrix: DenseMatrix::from_row_major(size, size, data),
        rhs,
        nodes: nodes.clone(),
        kernels,
        hom: hom.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SolveMode {
    /// One LU solve of the coupled system (or a ridge least-squares solve).
    Direct,
    /// Fixed-point iteration between the two equations: the adjoint
    /// coefficients are updated from the state solve they induce, with
    /// under-relaxation.
    Picard { tolerance: f64, max_iterations: usize, relaxation: f64 },
}

impl SolveMode {
    pub fn picard() -> Self {
        SolveMode::Picard { tolerance: 1e-10, max_iterations: 200, relaxation: 0.6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Ridge weight on the row-equilibrated system; zero selects plain LU
    /// with partial pivoting.
    pub ridge_lambda: f64,
    /// Scale rows by their largest entry before factorizing.
    pub equilibrate: bool,
    pub mode: SolveMode,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { ridge_lambda: 1e-12, equilibrate: true, mode: SolveMode::Direct }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PicardReport {
    pub iterations: usize,
    pub converged: bool,
    /// Relative size of the last coefficient update.
    pub last_update: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveDiagnostics {
    /// Condition estimate of the assembled matrix.
    pub cond_pre: f64,
    /// Condition estimate after row equilibration.
    pub cond_post: f64,
    pub ridge_lambda: f64,
    pub picard: Option<PicardReport>,
    pub seconds: f64,
}

/// Coefficients of the truncated series together with what is needed to
/// evaluate them.
#[derive(Debug, Clone)]
pub struct Solution {
    pub b1: Vec<f64>,
    pub b2: Vec<f64>,
    pub diagnostics: SolveDiagnostics,
    nodes: NodeSet,
    kernels: Arc<KernelPair>,
    hom: HomogenizedProblem,
    xs: Coordinates,
    ts: Coordinates,
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn block(m: &DenseMatrix, r0: usize, c0: usize, n: usize) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(n, n);
    for i in 0..n {
        out.row_mut(i).copy_from_slice(&m.row(r0 + i)[c0..c0 + n]);
    }
    out
}

/// Solves the assembled system.
pub fn solve(system: &CollocationSystem, config: &SolverConfig) -> Result<Solution> {
    let start = Instant::now();
    if !(config.ridge_lambda >= 0.0 && config.ridge_lambda.is_finite()) {
        return Err(Error::Config(format!("ridge weight {} must be non-negative", config.ridge_lambda)));
    }
    let n = system.n();
    let cond_pre = system.condition_estimate();
    let mut matrix = system.matrix.clone();
    let mut rhs = system.rhs.clone();
    if config.equilibrate {
        equilibrate_rows(&mut matrix, &mut rhs);
    }
    let lu = DenseLu::factor(&matrix);
    let cond_post = lu.as_ref().map(|f| f.condition_estimate()).unwrap_or(f64::INFINITY);

    let (b, picard) = match config.mode {
        SolveMode::Direct if config.ridge_lambda > 0.0 => {
            let mu = config.ridge_lambda.sqrt();
            let b = ridge_solve(&matrix, &rhs, mu)
                .ok_or_else(|| Error::NumericallySingular("ridge least-squares system is rank deficient".into()))?;
            (b, None)
        }
        SolveMode::Direct => {
            let lu = lu.map_err(|p| {
                Error::NumericallySingular(format!(
                    "zero pivot in column {} (relative {:.2e}); nodes too close or too many for double precision",
                    p.column, p.relative
                ))
            })?;
            (refined_solve(&lu, &matrix, &rhs), None)
        }
        SolveMode::Picard { tolerance, max_iterations, relaxation } => {
            let (b, report) = picard_solve(system, n, tolerance, max_iterations, relaxation)?;
            (b, Some(report))
        }
    };
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericallySingular("solve produced non-finite coefficients".into()));
    }
    let xs = Coordinates::new(system.nodes.nodes().iter().map(|p| p.0));
    let ts = Coordinates::new(system.nodes.nodes().iter().map(|p| p.1));
    Ok(Solution {
        b1: b[..n].to_vec(),
        b2: b[n..].to_vec(),
        diagnostics: SolveDiagnostics {
            cond_pre,
            cond_post,
            ridge_lambda: config.ridge_lambda,
            picard,
            seconds: start.elapsed().as_secs_f64(),
        },
        nodes: system.nodes.clone(),
        kernels: system.kernels.clone(),
        hom: system.hom.clone(),
        xs,
        ts,
    })
}

/// LU solve followed by two steps of iterative refinement.
fn refined_solve(lu: &DenseLu, a: &DenseMatrix, rhs: &[f64]) -> Vec<f64> {
    let mut x = lu.solve(rhs);
    for _ in 0..2 {
        let ax = a.mul_vec(&x);
        let r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, v)| b - v).collect();
        let dx = lu.solve(&r);
        x.iter_mut().zip(&dx).for_each(|(x, d)| *x += d);
    }
    x
}

fn picard_solve(
    system: &CollocationSystem,
    n: usize,
    tolerance: f64,
    max_iterations: usize,
    relaxation: f64,
) -> Result<(Vec<f64>, PicardReport)> {
    if !(relaxation > 0.0 && relaxation <= 1.0) {
        return Err(Error::Config(format!("relaxation {relaxation} must lie in (0, 1]")));
    }
    let a = &system.matrix;
    let (a11, a12, a21, a22) = (block(a, 0, 0, n), block(a, 0, n, n), block(a, n, 0, n), block(a, n, n, n));
    let singular = |name: &'static str| {
        move |p: crate::linalg::SingularPivot| {
            Error::NumericallySingular(format!("{name} block has a zero pivot in column {}", p.column))
        }
    };
    let lu11 = DenseLu::factor(&a11).map_err(singular("state"))?;
    let lu22 = DenseLu::factor(&a22).map_err(singular("adjoint"))?;
    let (c1, c2) = (&system.rhs[..n], &system.rhs[n..]);

    let state_from = |b2: &[f64]| {
        let coupled = a12.mul_vec(b2);
        let r: Vec<f64> = c1.iter().zip(&coupled).map(|(c, v)| c - v).collect();
        refined_solve(&lu11, &a11, &r)
    };
    let mut b2 = vec![0.0; n];
    let mut report = PicardReport { iterations: 0, converged: false, last_update: f64::INFINITY };
    for iter in 1..=max_iterations {
        let b1 = state_from(&b2);
        let coupled = a21.mul_vec(&b1);
        let r: Vec<f64> = c2.iter().zip(&coupled).map(|(c, v)| c - v).collect();
        let target = refined_solve(&lu22, &a22, &r);
        let next: Vec<f64> = b2.iter().zip(&target).map(|(old, new)| (1.0 - relaxation) * old + relaxation * new).collect();
        let delta = max_norm(&next.iter().zip(&b2).map(|(p, q)| p - q).collect::<Vec<_>>());
        let scale = max_norm(&next);
        b2 = next;
        report.iterations = iter;
        report.last_update = if scale > 0.0 { delta / scale } else { delta };
        if !report.last_update.is_finite() {
            break;
        }
        if delta <= tolerance * scale || delta == 0.0 {
            report.converged = true;
            break;
        }
    }
    let mut b = state_from(&b2);
    b.extend_from_slice(&b2);
    Ok((b, report))
}

/// Values of the full solution at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointValue {
    pub y: f64,
    pub p: f64,
    pub u: f64,
}

impl Solution {
    pub fn nodes(&self) -> &NodeSet {
        &self.nodes
    }

    pub fn problem(&self) -> &HomogenizedProblem {
        &self.hom
    }

    pub fn kernels(&self) -> &KernelPair {
        &self.kernels
    }

    /// Homogenized state and adjoint (`y~`, `p~`) with derivative orders
    /// `dx` and `dt`, without domain checks.
    fn homogeneous(&self, x: f64, t: f64, dx: usize, dt: usize) -> (f64, f64) {
        let k = &self.kernels;
        let sp = k.state.spatial();
        let (st, at) = (k.state.temporal(), k.adjoint.temporal());
        let s0: Vec<f64> = self.xs.values.iter().map(|&c| sp.eval_unchecked(x, c, dx, 0)).collect();
        let s2: Vec<f64> = self.xs.values.iter().map(|&c| sp.eval_unchecked(x, c, dx, 2)).collect();
        let mut y = 0.0;
        let mut p = 0.0;
        let tau: Vec<[f64; 4]> = self
            .ts
            .values
            .iter()
            .map(|&c| {
                [
                    st.eval_unchecked(t, c, dt, 0),
                    st.eval_unchecked(t, c, dt, 1),
                    at.eval_unchecked(t, c, dt, 0),
                    at.eval_unchecked(t, c, dt, 1),
                ]
            })
            .collect();
        for j in 0..self.nodes.len() {
            let (jx, jt) = (self.xs.of_node[j], self.ts.of_node[j]);
            let tv = &tau[jt];
            y += self.b1[j] * (s2[jx] * tv[0] - s0[jx] * tv[1]);
            p += self.b2[j] * (s2[jx] * tv[2] + s0[jx] * tv[3]);
        }
        (y, p)
    }

    /// `(y~, p~)` and their derivatives `d^dx/dx^dx d^dt/dt^dt`.
    pub fn homogeneous_derivative(&self, x: f64, t: f64, dx: usize, dt: usize) -> Result<(f64, f64)> {
        self.hom.rect().check(x, t)?;
        Ok(self.homogeneous(x, t, dx, dt))
    }

    /// Total state, total adjoint and control at a point of the closed
    /// rectangle.
    pub fn evaluate(&self, x: f64, t: f64) -> Result<PointValue> {
        self.hom.rect().check(x, t)?;
        Ok(self.evaluate_unchecked(x, t))
    }

    fn evaluate_unchecked(&self, x: f64, t: f64) -> PointValue {
        let (yh, ph) = self.homogeneous(x, t, 0, 0);
        let y = self.hom.total_state(yh, x, t);
        let p = self.hom.total_adjoint(ph, x, t);
        PointValue { y, p, u: p / self.hom.nu() }
    }

    /// Evaluates `(y, p, u)` on every grid point.
    pub fn evaluate_grid(&self, grid: &SpaceTimeGrid) -> Result<(GridField, GridField, GridField)> {
        if grid.rect != self.hom.rect() {
            return Err(Error::GridMismatch("evaluation grid does not cover the problem rectangle".into()));
        }
        let xs = grid.xs();
        let rows: Vec<Vec<PointValue>> = grid
            .ts()
            .par_iter()
            .map(|&t| xs.iter().map(|&x| self.evaluate_unchecked(x, t)).collect())
            .collect();
        let flat: Vec<PointValue> = rows.into_iter().flatten().collect();
        Ok((
            GridField::new(*grid, flat.iter().map(|v| v.y).collect())?,
            GridField::new(*grid, flat.iter().map(|v| v.p).collect())?,
            GridField::new(*grid, flat.iter().map(|v| v.u).collect())?,
        ))
    }

    /// Homogenized state `y~` as a field with exact derivatives.
    pub fn state_field(&self) -> HomogeneousField<'_> {
        HomogeneousField { sol: self, adjoint: false }
    }

    /// Homogenized adjoint `p~` as a field with exact derivatives.
    pub fn adjoint_field(&self) -> HomogeneousField<'_> {
        HomogeneousField { sol: self, adjoint: true }
    }
}

/// One component of the homogenized solution.
pub struct HomogeneousField<'a> {
    sol: &'a Solution,
    adjoint: bool,
}

impl HomogeneousField<'_> {
    fn pick(&self, v: (f64, f64)) -> f64 {
        if self.adjoint {
            v.1
        } else {
            v.0
        }
    }
}

impl SpaceTimeField for HomogeneousField<'_> {
    fn value(&self, x: f64, t: f64) -> f64 {
        self.pick(self.sol.homogeneous(x, t, 0, 0))
    }
    fn dt(&self, x: f64, t: f64) -> f64 {
        self.pick(self.sol.homogeneous(x, t, 0, 1))
    }
    fn dx(&self, x: f64, t: f64) -> f64 {
        self.pick(self.sol.homogeneous(x, t, 1, 0))
    }
    fn dxx(&self, x: f64, t: f64) -> f64 {
        self.pick(self.sol.homogeneous(x, t, 2, 0))
    }
    fn has_exact_derivatives(&self) -> bool {
        true
    }
}

/// Errors of state, adjoint and control over a uniform evaluation grid.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct SolutionErrors {
    pub linf_y: f64,
    pub l2_y: f64,
    pub linf_p: f64,
    pub l2_p: f64,
    pub linf_u: f64,
    pub l2_u: f64,
}

impl SolutionErrors {
    fn from_parts(y: ErrorNorms, p: ErrorNorms, u: ErrorNorms) -> Self {
        Self { linf_y: y.linf, l2_y: y.l2, linf_p: p.linf, l2_p: p.l2, linf_u: u.linf, l2_u: u.l2 }
    }
}

/// Errors of any `(x, t) -> (y, p)` approximation against an exact pair on a
/// grid; `u` errors are those of `p` divided by `nu`.
pub fn error_norms_of(
    approx: impl Fn(f64, f64) -> (f64, f64),
    exact: &ExactSolution,
    grid: &SpaceTimeGrid,
) -> SolutionErrors {
    let ey = GridField::from_fn(*grid, |x, t| approx(x, t).0 - exact.y.value(x, t));
    let ep = GridField::from_fn(*grid, |x, t| approx(x, t).1 - exact.p.value(x, t));
    let eu = GridField::from_fn(*grid, |x, t| approx(x, t).1 / exact.nu - exact.u(x, t));
    SolutionErrors::from_parts(ey.norms(), ep.norms(), eu.norms())
}

/// Errors of a solution on a `points_x x points_t` uniform grid
/// (boundaries included).
pub fn error_norms(sol: &Solution, exact: &ExactSolution, eval_grid: (usize, usize)) -> Result<SolutionErrors> {
    let grid = SpaceTimeGrid::with_points(sol.hom.rect(), eval_grid.0, eval_grid.1)?;
    let (y, p, u) = sol.evaluate_grid(&grid)?;
    let ey = crate::grid::error_vs_exact(&y, &|x, t| exact.y.value(x, t));
    let ep = crate::grid::error_vs_exact(&p, &|x, t| exact.p.value(x, t));
    let eu = crate::grid::error_vs_exact(&u, &|x, t| exact.u(x, t));
    Ok(SolutionErrors::from_parts(ey, ep, eu))
}
