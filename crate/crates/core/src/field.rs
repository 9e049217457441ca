//! Scalar fields on the space-time rectangle and scalar profiles on a line.
//!
//! Fields expose the derivatives the heat operators need. Fields built from
//! plain closures fall back to fourth-order central differences; built-in
//! and solver-backed fields override them with exact derivatives.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Step for first-derivative difference quotients.
const FD_STEP_1: f64 = 1e-3;
/// Step for second-derivative difference quotients.
const FD_STEP_2: f64 = 2e-3;

pub(crate) fn fd_first(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

pub(crate) fn fd_second(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h)) / (12.0 * h * h)
}

/// Closed space-time rectangle `[a, b] x [0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Rectangle {
    pub a: f64,
    pub b: f64,
    pub t_final: f64,
}

impl Rectangle {
    pub fn new(a: f64, b: f64, t_final: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidProblem(format!("spatial interval [{a}, {b}] must satisfy a < b")));
        }
        if !(t_final.is_finite() && t_final > 0.0) {
            return Err(Error::InvalidProblem(format!("final time {t_final} must be positive")));
        }
        Ok(Self { a, b, t_final })
    }

    pub fn unit() -> Self {
        Self { a: 0.0, b: 1.0, t_final: 1.0 }
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn area(&self) -> f64 {
        self.width() * self.t_final
    }

    pub fn contains(&self, x: f64, t: f64) -> bool {
        let sx = 1e-12 * self.width();
        let st = 1e-12 * self.t_final;
        x >= self.a - sx && x <= self.b + sx && t >= -st && t <= self.t_final + st
    }

    pub fn check(&self, x: f64, t: f64) -> Result<()> {
        if !(self.a - 1e-12 * self.width() <= x && x <= self.b + 1e-12 * self.width()) {
            return Err(Error::OutOfDomain { value: x, lo: self.a, hi: self.b });
        }
        if !(-1e-12 * self.t_final <= t && t <= self.t_final * (1.0 + 1e-12)) {
            return Err(Error::OutOfDomain { value: t, lo: 0.0, hi: self.t_final });
        }
        Ok(())
    }
}

/// A scalar field `f(x, t)` with the derivatives used by the heat operators.
pub trait SpaceTimeField: Send + Sync {
    fn value(&self, x: f64, t: f64) -> f64;

    fn dt(&self, x: f64, t: f64) -> f64 {
        fd_first(|s| self.value(x, s), t, FD_STEP_1)
    }

    fn dx(&self, x: f64, t: f64) -> f64 {
        fd_first(|s| self.value(s, t), x, FD_STEP_1)
    }

    fn dxx(&self, x: f64, t: f64) -> f64 {
        fd_second(|s| self.value(s, t), x, FD_STEP_2)
    }

    /// Whether the derivative methods are exact rather than difference
    /// quotients.
    fn has_exact_derivatives(&self) -> bool {
        false
    }
}

pub type FieldRef = Arc<dyn SpaceTimeField>;

type Fn2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type Fn1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Field defined by a closure; derivatives by finite differences.
#[derive(Clone)]
pub struct FnField(Fn2);

impl FnField {
    pub fn new(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self(Arc::new(f))
    }

    pub fn into_ref(self) -> FieldRef {
        Arc::new(self)
    }
}

impl SpaceTimeField for FnField {
    fn value(&self, x: f64, t: f64) -> f64 {
        (self.0)(x, t)
    }
}

/// Field with exact derivative closures.
#[derive(Clone)]
pub struct AnalyticField {
    value: Fn2,
    dt: Fn2,
    dx: Fn2,
    dxx: Fn2,
}

impl AnalyticField {
    pub fn new(
        value: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        dt: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        dx: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        dxx: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { value: Arc::new(value), dt: Arc::new(dt), dx: Arc::new(dx), dxx: Arc::new(dxx) }
    }

    pub fn into_ref(self) -> FieldRef {
        Arc::new(self)
    }
}

impl SpaceTimeField for AnalyticField {
    fn value(&self, x: f64, t: f64) -> f64 {
        (self.value)(x, t)
    }
    fn dt(&self, x: f64, t: f64) -> f64 {
        (self.dt)(x, t)
    }
    fn dx(&self, x: f64, t: f64) -> f64 {
        (self.dx)(x, t)
    }
    fn dxx(&self, x: f64, t: f64) -> f64 {
        (self.dxx)(x, t)
    }
    fn has_exact_derivatives(&self) -> bool {
        true
    }
}

/// Identically zero field.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroField;

impl SpaceTimeField for ZeroField {
    fn value(&self, _: f64, _: f64) -> f64 {
        0.0
    }
    fn dt(&self, _: f64, _: f64) -> f64 {
        0.0
    }
    fn dx(&self, _: f64, _: f64) -> f64 {
        0.0
    }
    fn dxx(&self, _: f64, _: f64) -> f64 {
        0.0
    }
    fn has_exact_derivatives(&self) -> bool {
        true
    }
}

pub fn zero_field() -> FieldRef {
    Arc::new(ZeroField)
}

/// Linear combination `sum c_i f_i` of fields; derivatives combine termwise.
#[derive(Clone)]
pub struct LinearCombination {
    terms: Vec<(f64, FieldRef)>,
}

impl LinearCombination {
    pub fn new(terms: Vec<(f64, FieldRef)>) -> Self {
        Self { terms }
    }

    pub fn into_ref(self) -> FieldRef {
        Arc::new(self)
    }
}

impl SpaceTimeField for LinearCombination {
    fn value(&self, x: f64, t: f64) -> f64 {
        self.terms.iter().map(|(c, f)| c * f.value(x, t)).sum()
    }
    fn dt(&self, x: f64, t: f64) -> f64 {
        self.terms.iter().map(|(c, f)| c * f.dt(x, t)).sum()
    }
    fn dx(&self, x: f64, t: f64) -> f64 {
        self.terms.iter().map(|(c, f)| c * f.dx(x, t)).sum()
    }
    fn dxx(&self, x: f64, t: f64) -> f64 {
        self.terms.iter().map(|(c, f)| c * f.dxx(x, t)).sum()
    }
    fn has_exact_derivatives(&self) -> bool {
        self.terms.iter().all(|(_, f)| f.has_exact_derivatives())
    }
}

/// Field `f / divisor`, evaluated by division so that scaling back and
/// dividing again reproduces the same floating-point values.
#[derive(Clone)]
pub struct QuotientField {
    inner: FieldRef,
    divisor: f64,
}

impl QuotientField {
    pub fn new(inner: FieldRef, divisor: f64) -> Self {
        Self { inner, divisor }
    }
}

impl SpaceTimeField for QuotientField {
    fn value(&self, x: f64, t: f64) -> f64 {
        self.inner.value(x, t) / self.divisor
    }
    fn dt(&self, x: f64, t: f64) -> f64 {
        self.inner.dt(x, t) / self.divisor
    }
    fn dx(&self, x: f64, t: f64) -> f64 {
        self.inner.dx(x, t) / self.divisor
    }
    fn dxx(&self, x: f64, t: f64) -> f64 {
        self.inner.dxx(x, t) / self.divisor
    }
    fn has_exact_derivatives(&self) -> bool {
        self.inner.has_exact_derivatives()
    }
}

/// A scalar function of one variable with optional exact first and second
/// derivatives.
#[derive(Clone)]
pub struct Profile {
    value: Fn1,
    first: Option<Fn1>,
    second: Option<Fn1>,
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Profile")
            .field("exact_first", &self.first.is_some())
            .field("exact_second", &self.second.is_some())
            .finish()
    }
}

impl Profile {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { value: Arc::new(f), first: None, second: None }
    }

    pub fn with_derivatives(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        first: impl Fn(f64) -> f64 + Send + Sync + 'static,
        second: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { value: Arc::new(f), first: Some(Arc::new(first)), second: Some(Arc::new(second)) }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn constant(c: f64) -> Self {
        Self::with_derivatives(move |_| c, |_| 0.0, |_| 0.0)
    }

    pub fn eval(&self, s: f64) -> f64 {
        (self.value)(s)
    }

    pub fn first(&self, s: f64) -> f64 {
        match &self.first {
            Some(d) => d(s),
            None => fd_first(|v| self.eval(v), s, FD_STEP_1),
        }
    }

    pub fn second(&self, s: f64) -> f64 {
        match &self.second {
            Some(d) => d(s),
            None => fd_second(|v| self.eval(v), s, FD_STEP_2),
        }
    }

    pub fn is_exact(&self) -> bool {
        self.first.is_some() && self.second.is_some()
    }

    /// Probes derivatives of the given order at `samples`. Difference
    /// quotients at two step sizes must be finite and agree; exact
    /// derivatives must be finite.
    pub fn probe_differentiable(&self, order: usize, samples: &[f64], name: &str) -> Result<()> {
        for &s in samples {
            let (exact, coarse, fine) = match order {
                1 => (
                    self.first.as_ref().map(|d| d(s)),
                    fd_first(|v| self.eval(v), s, 4.0 * FD_STEP_1),
                    fd_first(|v| self.eval(v), s, FD_STEP_1),
                ),
                2 => (
                    self.second.as_ref().map(|d| d(s)),
                    fd_second(|v| self.eval(v), s, 4.0 * FD_STEP_2),
                    fd_second(|v| self.eval(v), s, FD_STEP_2),
                ),
                _ => unreachable!("only first and second derivatives are probed"),
            };
            if let Some(e) = exact {
                if !e.is_finite() {
                    return Err(Error::NonDifferentiableData(format!(
                        "{name}: derivative of order {order} is not finite at {s}"
                    )));
                }
                continue;
            }
            let scale = 1.0 + coarse.abs().max(fine.abs());
            if !(coarse.is_finite() && fine.is_finite()) || (coarse - fine).abs() > 1e-3 * scale {
                return Err(Error::NonDifferentiableData(format!(
                    "{name}: derivative of order {order} is not resolved at {s} ({coarse} vs {fine})"
                )));
            }
        }
        Ok(())
    }
}
