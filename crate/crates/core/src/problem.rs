//! Distributed optimal control problems for the 1-D heat equation.
//!
//! A problem asks for a heat source `u` on `[a, b] x (0, T)` minimizing
//!
//! ```text
//! J(u) = 1/2 int int (y - y_d)^2 + nu/2 int int u^2
//! ```
//!
//! subject to `-y_t + y_xx = u`, Dirichlet traces `h1`, `h2` at `x = a, b`,
//! and the initial temperature `y0`.
//!
//! Manufactured benchmarks do not always give an adjoint that vanishes on the
//! spatial boundary, so a problem may also carry adjoint Dirichlet traces. They
//! are zero for a genuine control problem.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use log::warn;

use crate::error::{Error, Result};
use crate::field::{AnalyticField, FieldRef, FnField, Profile, QuotientField, Rectangle};
use crate::grid::GridField;

/// Number of probe points per axis used to check user-supplied data.
const PROBE_POINTS: usize = 21;

#[derive(Clone)]
pub struct ControlProblem {
    rect: Rectangle,
    nu: f64,
    target: FieldRef,
    h_left: Profile,
    h_right: Profile,
    y0: Profile,
    adjoint_left: Profile,
    adjoint_right: Profile,
}

impl fmt::Debug for ControlProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ControlProblem").field("rect", &self.rect).field("nu", &self.nu).finish_non_exhaustive()
    }
}

impl ControlProblem {
    /// Problem with zero boundary and initial data.
    pub fn new(rect: Rectangle, nu: f64, target: FieldRef) -> Result<Self> {
        if !(nu.is_finite() && nu > 0.0) {
            return Err(Error::InvalidProblem(format!("Tikhonov parameter nu = {nu} must be positive")));
        }
        Ok(Self {
            rect,
            nu,
            target,
            h_left: Profile::zero(),
            h_right: Profile::zero(),
            y0: Profile::zero(),
            adjoint_left: Profile::zero(),
            adjoint_right: Profile::zero(),
        })
    }

    /// Sets the Dirichlet traces `y(a, t) = h1(t)` and `y(b, t) = h2(t)`.
    pub fn with_boundary(mut self, h_left: Profile, h_right: Profile) -> Self {
        self.h_left = h_left;
        self.h_right = h_right;
        self.warn_if_incompatible();
        self
    }

    pub fn with_initial(mut self, y0: Profile) -> Self {
        self.y0 = y0;
        self.warn_if_incompatible();
        self
    }

    /// Sets adjoint traces `p(a, t)` and `p(b, t)`; both must vanish at `T`.
    pub fn with_adjoint_boundary(mut self, left: Profile, right: Profile) -> Self {
        self.adjoint_left = left;
        self.adjoint_right = right;
        self
    }

    fn warn_if_incompatible(&self) {
        let (a, b) = (self.rect.a, self.rect.b);
        let dl = (self.y0.eval(a) - self.h_left.eval(0.0)).abs();
        let dr = (self.y0.eval(b) - self.h_right.eval(0.0)).abs();
        if dl > 1e-10 || dr > 1e-10 {
            warn!("initial data and boundary traces disagree at t = 0 (left {dl:.3e}, right {dr:.3e})");
        }
    }

    pub fn rect(&self) -> Rectangle {
        self.rect
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Desired state `y_d`.
    pub fn target(&self) -> &FieldRef {
        &self.target
    }

    pub fn h_left(&self) -> &Profile {
        &self.h_left
    }

    pub fn h_right(&self) -> &Profile {
        &self.h_right
    }

    pub fn initial(&self) -> &Profile {
        &self.y0
    }

    pub fn adjoint_left(&self) -> &Profile {
        &self.adjoint_left
    }

    pub fn adjoint_right(&self) -> &Profile {
        &self.adjoint_right
    }
}

/// Exact state/adjoint pair; the control is `u = p / nu`.
#[derive(Clone)]
pub struct ExactSolution {
    pub y: FieldRef,
    pub p: FieldRef,
    pub nu: f64,
}

impl ExactSolution {
    pub fn control(&self) -> FieldRef {
        Arc::new(QuotientField::new(self.p.clone(), self.nu))
    }

    pub fn u(&self, x: f64, t: f64) -> f64 {
        self.p.value(x, t) / self.nu
    }
}

/// Problem rewritten for unknowns with zero boundary and initial data:
/// `y = y~ + y_hat` and `p = p~ + P`.
#[derive(Clone)]
pub struct HomogenizedProblem {
    base: ControlProblem,
    boundary_lift: FieldRef,
    state_lift: FieldRef,
    adjoint_lift: FieldRef,
    state_forcing: FieldRef,
    adjoint_forcing: FieldRef,
}

impl fmt::Debug for HomogenizedProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HomogenizedProblem").field("base", &self.base).finish_non_exhaustive()
    }
}

impl HomogenizedProblem {
    pub fn base(&self) -> &ControlProblem {
        &self.base
    }

    pub fn rect(&self) -> Rectangle {
        self.base.rect
    }

    pub fn nu(&self) -> f64 {
        self.base.nu
    }

    /// Linear-in-`x` interpolant `Y` of the state boundary traces.
    pub fn boundary_lift(&self) -> &FieldRef {
        &self.boundary_lift
    }

    /// `y_hat = Y + y0 - Y(., 0)`.
    pub fn state_lift(&self) -> &FieldRef {
        &self.state_lift
    }

    /// Linear-in-`x` interpolant of the adjoint boundary traces.
    pub fn adjoint_lift(&self) -> &FieldRef {
        &self.adjoint_lift
    }

    /// `G1`, forcing of the homogenized state equation.
    pub fn state_forcing(&self) -> &FieldRef {
        &self.state_forcing
    }

    /// `G2`, forcing of the homogenized adjoint equation.
    pub fn adjoint_forcing(&self) -> &FieldRef {
        &self.adjoint_forcing
    }

    pub fn target(&self) -> &FieldRef {
        &self.base.target
    }

    pub fn total_state(&self, homogeneous: f64, x: f64, t: f64) -> f64 {
        homogeneous + self.state_lift.value(x, t)
    }

    pub fn total_adjoint(&self, homogeneous: f64, x: f64, t: f64) -> f64 {
        homogeneous + self.adjoint_lift.value(x, t)
    }
}

fn linear_lift(rect: Rectangle, left: Profile, right: Profile) -> FieldRef {
    let (a, b) = (rect.a, rect.b);
    let wl = move |x: f64| (x - b) / (a - b);
    let wr = move |x: f64| (x - a) / (b - a);
    let (l1, r1, l2, r2) = (left.clone(), right.clone(), left.clone(), right.clone());
    AnalyticField::new(
        move |x, t| wl(x) * left.eval(t) + wr(x) * right.eval(t),
        move |x, t| wl(x) * l1.first(t) + wr(x) * r1.first(t),
        move |_, t| (r2.eval(t) - l2.eval(t)) / (b - a),
        |_, _| 0.0,
    )
    .into_ref()
}

/// Transfers boundary, initial and adjoint boundary data into forcing terms.
pub fn homogenize(problem: &ControlProblem) -> Result<HomogenizedProblem> {
    let rect = problem.rect;
    let t_samples: Vec<f64> = (0..PROBE_POINTS).map(|k| rect.t_final * k as f64 / (PROBE_POINTS - 1) as f64).collect();
    let x_samples: Vec<f64> =
        (0..PROBE_POINTS).map(|i| rect.a + rect.width() * i as f64 / (PROBE_POINTS - 1) as f64).collect();
    problem.h_left.probe_differentiable(1, &t_samples, "h1")?;
    problem.h_right.probe_differentiable(1, &t_samples, "h2")?;
    problem.y0.probe_differentiable(2, &x_samples, "y0")?;
    problem.adjoint_left.probe_differentiable(1, &t_samples, "adjoint trace at a")?;
    problem.adjoint_right.probe_differentiable(1, &t_samples, "adjoint trace at b")?;
    let scale = 1.0 + problem.adjoint_left.eval(0.5 * rect.t_final).abs();
    for (name, g) in [("a", &problem.adjoint_left), ("b", &problem.adjoint_right)] {
        let end = g.eval(rect.t_final);
        if end.abs() > 1e-12 * scale {
            return Err(Error::InvalidProblem(format!(
                "adjoint trace at {name} must vanish at the final time, got {end}"
            )));
        }
    }

    let boundary_lift = linear_lift(rect, problem.h_left.clone(), problem.h_right.clone());
    let adjoint_lift = linear_lift(rect, problem.adjoint_left.clone(), problem.adjoint_right.clone());

    let (y_lift, y0) = (boundary_lift.clone(), problem.y0.clone());
    let (lift_t, lift_x, lift_xx, y0_x, y0_xx) =
        (boundary_lift.clone(), boundary_lift.clone(), boundary_lift.clone(), y0.clone(), y0.clone());
    let state_lift = AnalyticField::new(
        move |x, t| y_lift.value(x, t) + y0.eval(x) - y_lift.value(x, 0.0),
        move |x, t| lift_t.dt(x, t),
        move |x, t| lift_x.dx(x, t) + y0_x.first(x) - lift_x.dx(x, 0.0),
        move |x, t| lift_xx.dxx(x, t) + y0_xx.second(x),
    )
    .into_ref();

    let nu = problem.nu;
    let (lift, y0, p_lift) = (boundary_lift.clone(), problem.y0.clone(), adjoint_lift.clone());
    let state_forcing = FnField::new(move |x, t| lift.dt(x, t) - y0.second(x) + p_lift.value(x, t) / nu).into_ref();
    let p_lift = adjoint_lift.clone();
    let adjoint_forcing = FnField::new(move |x, t| -(p_lift.dt(x, t) + p_lift.dxx(x, t))).into_ref();

    Ok(HomogenizedProblem {
        base: problem.clone(),
        boundary_lift,
        state_lift,
        adjoint_lift,
        state_forcing,
        adjoint_forcing,
    })
}

/// Dense polynomial in one variable, `coeffs[i]` for `s^i`.
#[derive(Debug, Clone, PartialEq)]
struct Poly(Vec<f64>);

impl Poly {
    fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }

    fn pow(&self, n: u32) -> Poly {
        (0..n).fold(Poly(vec![1.0]), |acc, _| acc.mul(self))
    }

    fn derivative(&self, order: usize) -> Poly {
        let mut c = self.0.clone();
        for _ in 0..order {
            c = c.iter().enumerate().skip(1).map(|(i, v)| i as f64 * v).collect();
            if c.is_empty() {
                c.push(0.0);
            }
        }
        Poly(c)
    }

    fn eval(&self, s: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * s + c)
    }
}

/// Spatial profile of a separable manufactured solution.
#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Poly(Poly),
    /// `sin(k pi x)`
    Sine(f64),
    /// `1 - cos(k pi x)`
    OneMinusCos(f64),
}

impl Shape {
    fn derivative(&self, order: usize, x: f64) -> f64 {
        let phase = order as f64 * PI / 2.0;
        match self {
            Shape::Poly(p) => p.derivative(order).eval(x),
            Shape::Sine(k) => (k * PI).powi(order as i32) * (k * PI * x + phase).sin(),
            Shape::OneMinusCos(k) if order == 0 => 1.0 - (k * PI * x).cos(),
            Shape::OneMinusCos(k) => -(k * PI).powi(order as i32) * (k * PI * x + phase).cos(),
        }
    }

    /// Derivative value at a domain endpoint, with round-off zeros of the
    /// trigonometric profiles snapped to exact zeros.
    fn endpoint_derivative(&self, order: usize, x: f64) -> f64 {
        let v = self.derivative(order, x);
        let scale = match self {
            Shape::Poly(_) => 0.0,
            Shape::Sine(k) | Shape::OneMinusCos(k) => (k * PI).powi(order as i32),
        };
        if v.abs() <= 1e-13 * scale {
            0.0
        } else {
            v
        }
    }
}

/// `y = tau(t) chi(x)` with `p = nu (-y_t + y_xx)`, so the state equation holds
/// exactly and every derivative is available in closed form.
#[derive(Debug, Clone)]
struct Separable {
    tau: Poly,
    chi: Shape,
    nu: f64,
}

impl Separable {
    fn tau(&self, order: usize, t: f64) -> f64 {
        self.tau.derivative(order).eval(t)
    }

    fn chi(&self, order: usize, x: f64) -> f64 {
        self.chi.derivative(order, x)
    }

    fn state(&self) -> FieldRef {
        let (s1, s2, s3, s4) = (self.clone(), self.clone(), self.clone(), self.clone());
        AnalyticField::new(
            move |x, t| s1.tau(0, t) * s1.chi(0, x),
            move |x, t| s2.tau(1, t) * s2.chi(0, x),
            move |x, t| s3.tau(0, t) * s3.chi(1, x),
            move |x, t| s4.tau(0, t) * s4.chi(2, x),
        )
        .into_ref()
    }

    fn adjoint(&self) -> FieldRef {
        let (s1, s2, s3, s4) = (self.clone(), self.clone(), self.clone(), self.clone());
        AnalyticField::new(
            move |x, t| s1.nu * (-s1.tau(1, t) * s1.chi(0, x) + s1.tau(0, t) * s1.chi(2, x)),
            move |x, t| s2.nu * (-s2.tau(2, t) * s2.chi(0, x) + s2.tau(1, t) * s2.chi(2, x)),
            move |x, t| s3.nu * (-s3.tau(1, t) * s3.chi(1, x) + s3.tau(0, t) * s3.chi(3, x)),
            move |x, t| s4.nu * (-s4.tau(1, t) * s4.chi(2, x) + s4.tau(0, t) * s4.chi(4, x)),
        )
        .into_ref()
    }

    fn adjoint_trace(&self, x: f64) -> Profile {
        let (c0, c2) = (self.chi.endpoint_derivative(0, x), self.chi.endpoint_derivative(2, x));
        let (d0, d1, d2) = (self.clone(), self.clone(), self.clone());
        Profile::with_derivatives(
            move |t| d0.nu * (-d0.tau(1, t) * c0 + d0.tau(0, t) * c2),
            move |t| d1.nu * (-d1.tau(2, t) * c0 + d1.tau(1, t) * c2),
            move |t| d2.nu * (-d2.tau(3, t) * c0 + d2.tau(2, t) * c2),
        )
    }
}

fn linear(c0: f64, c1: f64) -> Poly {
    Poly(vec![c0, c1])
}

fn separable_for(id: u32, nu: f64) -> Result<Separable> {
    let t = linear(0.0, 1.0);
    let one_minus_t = linear(1.0, -1.0);
    let two_minus_t = linear(2.0, -1.0);
    let (tau, chi) = match id {
        1 => (t.pow(2).mul(&one_minus_t.pow(3)), Shape::Poly(Poly(vec![0.0, -1.0, 1.0]))),
        2 => (t.pow(2).mul(&one_minus_t.pow(2)).mul(&two_minus_t.pow(2)), Shape::Sine(1.0)),
        3 => (t.pow(3).mul(&one_minus_t.pow(3)), Shape::OneMinusCos(2.0)),
        other => return Err(Error::UnknownExample(other)),
    };
    Ok(Separable { tau, chi, nu })
}

/// One of the three benchmark problems on `[0, 1] x [0, 1]` with zero state
/// boundary and initial data.
///
/// The exact state is
/// 1. `t^2 (1-t)^3 x (x-1)`
/// 2. `t^2 (1-t)^2 (2-t)^2 sin(pi x)`
/// 3. `t^3 (1-t)^3 (1 - cos(2 pi x))`
///
/// and the exact adjoint is `nu (-y_t + y_xx)`. The target `y_d` is derived
/// from the pair through the adjoint equation. For examples 1 and 3 the
/// adjoint does not vanish at `x = 0, 1`; its traces become the problem's
/// adjoint boundary data.
pub fn builtin_example(id: u32, nu: f64) -> Result<(ControlProblem, ExactSolution)> {
    let sep = separable_for(id, nu)?;
    let exact = ExactSolution { y: sep.state(), p: sep.adjoint(), nu };
    let rect = Rectangle::unit();
    let placeholder = ControlProblem::new(rect, nu, crate::field::zero_field())?;
    let target = derive_yd(&exact, &placeholder)?;
    let problem = ControlProblem::new(rect, nu, target)?
        .with_adjoint_boundary(sep.adjoint_trace(rect.a), sep.adjoint_trace(rect.b));
    Ok((problem, exact))
}

/// The adjoint of a built-in example written out as an explicit formula
/// (not through the separable derivative machinery).
pub fn closed_form_adjoint(id: u32, nu: f64, x: f64, t: f64) -> Result<f64> {
    let v = match id {
        1 => {
            let xx = x * (x - 1.0);
            nu * (2.0 * t * (t - 1.0).powi(3) * xx - 2.0 * t * t * (t - 1.0).powi(3)
                + 3.0 * t * t * (t - 1.0).powi(2) * xx)
        }
        2 => {
            let tau = t * t * (1.0 - t).powi(2) * (2.0 - t).powi(2);
            let tau_t = 2.0 * t * (1.0 - t).powi(2) * (2.0 - t).powi(2)
                - 2.0 * t * t * (1.0 - t) * (2.0 - t).powi(2)
                - 2.0 * t * t * (1.0 - t).powi(2) * (2.0 - t);
            nu * (-tau_t - PI * PI * tau) * (PI * x).sin()
        }
        3 => {
            let c = (2.0 * PI * x).cos();
            nu * ((-3.0 * t * t * (t - 1.0).powi(3) - 3.0 * t.powi(3) * (t - 1.0).powi(2)) * (c - 1.0)
                - 4.0 * PI * PI * t.powi(3) * (t - 1.0).powi(3) * c)
        }
        other => return Err(Error::UnknownExample(other)),
    };
    Ok(v)
}

/// Target consistent with the adjoint equation: `y_d = p_t + p_xx + y`.
pub fn derive_yd(exact: &ExactSolution, problem: &ControlProblem) -> Result<FieldRef> {
    let rect = problem.rect();
    if !(exact.y.has_exact_derivatives() && exact.p.has_exact_derivatives()) {
        // Difference quotients must at least be finite on a probe grid.
        for i in 0..PROBE_POINTS {
            for k in 0..PROBE_POINTS {
                let x = rect.a + rect.width() * i as f64 / (PROBE_POINTS - 1) as f64;
                let t = rect.t_final * k as f64 / (PROBE_POINTS - 1) as f64;
                let v = exact.p.dt(x, t) + exact.p.dxx(x, t) + exact.y.value(x, t);
                if !v.is_finite() {
                    return Err(Error::NonDifferentiableData(format!(
                        "exact pair is not differentiable at ({x}, {t})"
                    )));
                }
            }
        }
    }
    let (y, p) = (exact.y.clone(), exact.p.clone());
    Ok(FnField::new(move |x, t| p.dt(x, t) + p.dxx(x, t) + y.value(x, t)).into_ref())
}

/// Trapezoidal approximation of the tracking functional `J`.
pub fn cost_functional(y: &GridField, u: &GridField, problem: &ControlProblem) -> Result<f64> {
    if y.grid() != u.grid() {
        return Err(Error::GridMismatch("state and control live on different grids".into()));
    }
    if y.grid().rect != problem.rect() {
        return Err(Error::GridMismatch("grid rectangle differs from the problem domain".into()));
    }
    let target = GridField::sample(*y.grid(), problem.target().as_ref());
    let tracking = y.zip_map(&target, |a, b| (a - b) * (a - b))?.integrate();
    let control = u.map(|v| v * v).integrate();
    Ok(0.5 * tracking + 0.5 * problem.nu() * control)
}
