//! Reproducing kernels of constrained Sobolev-type spaces on an interval and
//! their space-time tensor products.
//!
//! The space of order `m` on `[a, b]` holds functions whose `(m+1)`-th
//! derivative is square integrable and which satisfy a set of homogeneous
//! point constraints `u^(d)(a) = 0` or `u^(d)(b) = 0`. It carries the inner
//! product
//!
//! ```text
//! <u, v> = sum_{i=1..m} u^(i)(a) v^(i)(a) + int_a^b u^(m+1) v^(m+1) dx
//! ```
//!
//! Its reproducing kernel `k(x, y)` is, for fixed `y`, a piecewise polynomial
//! of degree `2m + 1` in `x` with a break at `x = y`. The two pieces are fixed
//! by the constraints, the natural boundary conditions that fall out of
//! integrating the inner product by parts, `C^{2m}` continuity at `x = y`, and
//! a jump of `(-1)^m` in the `(2m+1)`-th derivative.
//!
//! Each piece is also a polynomial of degree `2m + 1` in `y`, so after solving
//! the condition system at `2m + 2` Chebyshev values of `y` the kernel is
//! stored as two bivariate polynomials. Mixed derivatives in both arguments
//! are then exact polynomial derivatives.

use crate::error::{Error, Result};
use crate::linalg::{DenseLu, DenseMatrix};

/// Relative slack allowed when checking that a point lies in the interval.
const DOMAIN_SLACK: f64 = 1e-12;
/// Condition systems beyond this 1-norm condition estimate are rejected.
const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Endpoint {
    Left,
    Right,
}

/// Homogeneous point constraint `u^(derivative)(endpoint) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Constraint {
    pub endpoint: Endpoint,
    pub derivative: usize,
}

impl Constraint {
    pub fn left(derivative: usize) -> Self {
        Self { endpoint: Endpoint::Left, derivative }
    }

    pub fn right(derivative: usize) -> Self {
        Self { endpoint: Endpoint::Right, derivative }
    }
}

/// A constrained space of order `m` on `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceSpec {
    order: usize,
    a: f64,
    b: f64,
    constraints: Vec<Constraint>,
}

impl SpaceSpec {
    pub fn new(order: usize, interval: (f64, f64), constraints: Vec<Constraint>) -> Result<Self> {
        let (a, b) = interval;
        if order == 0 {
            return Err(Error::InvalidSpec("order m must be positive".into()));
        }
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidSpec(format!("interval [{a}, {b}] must satisfy a < b")));
        }
        if constraints.len() > 2 * order + 2 {
            return Err(Error::InvalidSpec(format!(
                "{} constraints exceed the limit 2m + 2 = {}",
                constraints.len(),
                2 * order + 2
            )));
        }
        let mut sorted = constraints.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != constraints.len() {
            return Err(Error::InvalidSpec("constraints must be distinct".into()));
        }
        if let Some(c) = constraints.iter().find(|c| c.derivative > order) {
            return Err(Error::InvalidSpec(format!(
                "constraint on derivative {} exceeds the space order {order}",
                c.derivative
            )));
        }
        Ok(Self { order, a, b, constraints })
    }

    /// Order 1 on `[0, T]` with `u(0) = 0`.
    pub fn initial_time(t_final: f64) -> Result<Self> {
        Self::new(1, (0.0, t_final), vec![Constraint::left(0)])
    }

    /// Order 1 on `[0, T]` with `u(T) = 0`.
    pub fn terminal_time(t_final: f64) -> Result<Self> {
        Self::new(1, (0.0, t_final), vec![Constraint::right(0)])
    }

    /// Order 2 on `[a, b]` with `u(a) = u(b) = 0`.
    pub fn dirichlet_space(a: f64, b: f64) -> Result<Self> {
        Self::new(2, (a, b), vec![Constraint::left(0), Constraint::right(0)])
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn is_constrained(&self, endpoint: Endpoint, derivative: usize) -> bool {
        self.constraints.contains(&Constraint { endpoint, derivative })
    }

    /// Polynomial degree of each kernel piece.
    pub fn degree(&self) -> usize {
        2 * self.order + 1
    }

    fn contains(&self, v: f64) -> bool {
        let slack = DOMAIN_SLACK * (self.b - self.a);
        v >= self.a - slack && v <= self.b + slack
    }

    fn check(&self, v: f64) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::OutOfDomain { value: v, lo: self.a, hi: self.b })
        }
    }
}

/// Which side of the diagonal a kernel piece covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Piece {
    /// `x <= y`
    Left,
    /// `x > y`
    Right,
}

/// Coefficients of `k(., y)` for one fixed `y`, in powers of the normalized
/// coordinate `(x - a) / (b - a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PieceCoefficients {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

/// Polynomial in `(xi, eta)` stored densely, `coeffs[p * n + q]` for
/// `xi^p eta^q`.
#[derive(Debug, Clone, PartialEq)]
struct Bivariate {
    n: usize,
    coeffs: Vec<f64>,
}

impl Bivariate {
    fn eval(&self, xi: f64, eta: f64, dxi: usize, deta: usize) -> f64 {
        let n = self.n;
        if dxi >= n || deta >= n {
            return 0.0;
        }
        // Horner in eta for each power of xi, then Horner in xi.
        let mut acc = 0.0;
        for p in (dxi..n).rev() {
            let mut inner = 0.0;
            for q in (deta..n).rev() {
                inner = inner * eta + self.coeffs[p * n + q] * falling(q, deta);
            }
            acc = acc * xi + inner * falling(p, dxi);
        }
        acc
    }
}

/// `p! / (p - r)!`, zero when `r > p`.
#[inline]
fn falling(p: usize, r: usize) -> f64 {
    if r > p {
        return 0.0;
    }
    ((p - r + 1)..=p).fold(1.0, |acc, v| acc * v as f64)
}

/// Reproducing kernel of a [`SpaceSpec`].
#[derive(Debug, Clone)]
pub struct Kernel1D {
    spec: SpaceSpec,
    left: Bivariate,
    right: Bivariate,
}

impl Kernel1D {
    /// Constructs the kernel, rejecting constraint sets that do not make the
    /// inner product definite.
    pub fn build(spec: SpaceSpec) -> Result<Self> {
        let n = spec.degree() + 1;
        // Chebyshev nodes in the normalized coordinate keep the Vandermonde
        // interpolation in eta well conditioned.
        let etas: Vec<f64> = (0..n)
            .map(|k| 0.5 * (1.0 - ((2 * k + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos()))
            .collect();
        let mut left_samples = Vec::with_capacity(n);
        let mut right_samples = Vec::with_capacity(n);
        for &eta in &etas {
            let c = solve_condition_system(&spec, eta)?;
            left_samples.push(c.left);
            right_samples.push(c.right);
        }
        let vandermonde = DenseMatrix::from_row_major(
            n,
            n,
            etas.iter().flat_map(|&e| (0..n).map(move |q| e.powi(q as i32))).collect(),
        );
        let lu = DenseLu::factor(&vandermonde)
            .map_err(|p| Error::SingularConditionSystem { pivot: p.relative })?;
        let fit = |samples: &[Vec<f64>]| {
            let mut coeffs = vec![0.0; n * n];
            for p in 0..n {
                let values: Vec<f64> = samples.iter().map(|s| s[p]).collect();
                let q_coeffs = lu.solve(&values);
                coeffs[p * n..(p + 1) * n].copy_from_slice(&q_coeffs);
            }
            Bivariate { n, coeffs }
        };
        let left = fit(&left_samples);
        let right = fit(&right_samples);
        Ok(Self { spec, left, right })
    }

    pub fn spec(&self) -> &SpaceSpec {
        &self.spec
    }

    /// Solves the piecewise condition system for one `y` directly.
    pub fn coefficients_at(&self, y: f64) -> Result<PieceCoefficients> {
        self.spec.check(y)?;
        let (a, b) = self.spec.interval();
        solve_condition_system(&self.spec, (y - a) / (b - a))
    }

    /// `d^dx/dx^dx d^dy/dy^dy k(x, y)`. On the diagonal the left piece is used.
    pub fn eval(&self, x: f64, y: f64, dx: usize, dy: usize) -> Result<f64> {
        self.spec.check(x)?;
        self.spec.check(y)?;
        Ok(self.eval_unchecked(x, y, dx, dy))
    }

    pub fn value(&self, x: f64, y: f64) -> Result<f64> {
        self.eval(x, y, 0, 0)
    }

    /// Evaluates one polynomial piece regardless of which side of the
    /// diagonal `(x, y)` lies on.
    pub fn eval_piece(&self, piece: Piece, x: f64, y: f64, dx: usize, dy: usize) -> Result<f64> {
        self.spec.check(x)?;
        self.spec.check(y)?;
        let (a, b) = self.spec.interval();
        let len = b - a;
        let poly = match piece {
            Piece::Left => &self.left,
            Piece::Right => &self.right,
        };
        Ok(poly.eval((x - a) / len, (y - a) / len, dx, dy) / len.powi((dx + dy) as i32))
    }

    pub(crate) fn eval_unchecked(&self, x: f64, y: f64, dx: usize, dy: usize) -> f64 {
        let (a, b) = self.spec.interval();
        let len = b - a;
        let poly = if x <= y { &self.left } else { &self.right };
        poly.eval((x - a) / len, (y - a) / len, dx, dy) / len.powi((dx + dy) as i32)
    }
}

/// Builds and solves the `(4m+4)`-square condition system at normalized
/// break point `eta`.
fn solve_condition_system(spec: &SpaceSpec, eta: f64) -> Result<PieceCoefficients> {
    let m = spec.order();
    let deg = spec.degree();
    let n = deg + 1;
    let (a, b) = spec.interval();
    let len = b - a;
    let mut mat = DenseMatrix::zeros(2 * n, 2 * n);
    let mut rhs = vec![0.0; 2 * n];

    // Row vector of the r-th xi-derivative of the monomials at xi.
    let deriv_row = |xi: f64, r: usize| -> Vec<f64> {
        (0..n)
            .map(|p| if p < r { 0.0 } else { falling(p, r) * xi.powi((p - r) as i32) })
            .collect()
    };

    let mut row = 0;
    // Left endpoint, left piece.
    for d in 0..=m {
        let target = mat.row_mut(row);
        if spec.is_constrained(Endpoint::Left, d) {
            target[..n].copy_from_slice(&deriv_row(0.0, d));
        } else {
            // [d >= 1] k^(d)(a) - (-1)^(m-d) k^(2m+1-d)(a) = 0, scaled by len^(2m+1-d).
            let high = deriv_row(0.0, deg - d);
            let sign = if (m - d).is_multiple_of(2) { 1.0 } else { -1.0 };
            for p in 0..n {
                target[p] = -sign * high[p];
            }
            if d >= 1 {
                let low = deriv_row(0.0, d);
                let w = len.powi((deg - 2 * d) as i32);
                for p in 0..n {
                    target[p] += w * low[p];
                }
            }
        }
        row += 1;
    }
    // Right endpoint, right piece.
    for d in 0..=m {
        let target = mat.row_mut(row);
        let r = if spec.is_constrained(Endpoint::Right, d) { d } else { deg - d };
        target[n..].copy_from_slice(&deriv_row(1.0, r));
        row += 1;
    }
    // C^{2m} continuity and the unit jump at the break point.
    for r in 0..=deg {
        let values = deriv_row(eta, r);
        let target = mat.row_mut(row);
        for p in 0..n {
            target[p] = values[p];
            target[n + p] = -values[p];
        }
        if r == deg {
            let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
            rhs[row] = sign * len.powi(deg as i32);
        }
        row += 1;
    }
    debug_assert_eq!(row, 2 * n);

    let lu = DenseLu::factor(&mat).map_err(|p| Error::SingularConditionSystem { pivot: p.relative })?;
    let cond = lu.condition_estimate();
    if !(cond.is_finite() && cond < MAX_CONDITION) {
        return Err(Error::SingularConditionSystem { pivot: 1.0 / cond });
    }
    let sol = lu.solve(&rhs);
    Ok(PieceCoefficients { left: sol[..n].to_vec(), right: sol[n..].to_vec() })
}

/// Space-time product kernel `K((x,t),(r,s)) = k_space(x,r) * k_time(t,s)`.
#[derive(Debug, Clone)]
pub struct TensorKernel {
    spatial: Kernel1D,
    temporal: Kernel1D,
}

impl TensorKernel {
    pub fn new(spatial: Kernel1D, temporal: Kernel1D) -> Self {
        Self { spatial, temporal }
    }

    /// Kernel for states: zero on `x = a`, `x = b` and at `t = 0`.
    pub fn state(a: f64, b: f64, t_final: f64) -> Result<Self> {
        Ok(Self::new(
            Kernel1D::build(SpaceSpec::dirichlet_space(a, b)?)?,
            Kernel1D::build(SpaceSpec::initial_time(t_final)?)?,
        ))
    }

    /// Kernel for adjoints: zero on `x = a`, `x = b` and at `t = T`.
    pub fn adjoint(a: f64, b: f64, t_final: f64) -> Result<Self> {
        Ok(Self::new(
            Kernel1D::build(SpaceSpec::dirichlet_space(a, b)?)?,
            Kernel1D::build(SpaceSpec::terminal_time(t_final)?)?,
        ))
    }

    pub fn spatial(&self) -> &Kernel1D {
        &self.spatial
    }

    pub fn temporal(&self) -> &Kernel1D {
        &self.temporal
    }

    /// `(a, b, t0, T)` of the space-time rectangle.
    pub fn rectangle(&self) -> (f64, f64, f64, f64) {
        let (a, b) = self.spatial.spec().interval();
        let (t0, t1) = self.temporal.spec().interval();
        (a, b, t0, t1)
    }

    /// `d^dx/dx^dx d^dt/dt^dt K((x,t),(r,s))`.
    pub fn eval(&self, point: (f64, f64), center: (f64, f64), dx: usize, dt: usize) -> Result<f64> {
        self.eval_mixed(point, center, (dx, 0), (dt, 0))
    }

    /// Mixed derivative with orders `(dx, dr)` in space and `(dt, ds)` in time.
    pub fn eval_mixed(
        &self,
        point: (f64, f64),
        center: (f64, f64),
        space_orders: (usize, usize),
        time_orders: (usize, usize),
    ) -> Result<f64> {
        let sx = self.spatial.eval(point.0, center.0, space_orders.0, space_orders.1)?;
        let st = self.temporal.eval(point.1, center.1, time_orders.0, time_orders.1)?;
        Ok(sx * st)
    }
}
