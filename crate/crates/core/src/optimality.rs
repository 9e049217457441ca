//! First-order optimality system of the heat control problem.
//!
//! With the gradient equation `nu u - p = 0` the optimality conditions reduce
//! to the coupled pair
//!
//! ```text
//! L1 y = -y_t + y_xx = p / nu
//! L2 p =  p_t + p_xx = y_d - y
//! ```
//!
//! written for the homogenized unknowns as `L1 y~ = p~/nu + G1` and
//! `L2 p~ = y_d - (y~ + y_hat) + G2`.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::{FieldRef, QuotientField, Rectangle, SpaceTimeField};
use crate::problem::HomogenizedProblem;
use crate::quadrature::gauss_legendre;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Operator {
    /// `L1 = -d/dt + d^2/dx^2`
    Forward,
    /// `L2 = d/dt + d^2/dx^2`
    Adjoint,
}

impl Operator {
    /// Sign of the time-derivative term.
    pub fn time_sign(self) -> f64 {
        match self {
            Operator::Forward => -1.0,
            Operator::Adjoint => 1.0,
        }
    }

    /// Applies the operator given `f_t` and `f_xx` at a point.
    pub fn combine(self, dt: f64, dxx: f64) -> f64 {
        self.time_sign() * dt + dxx
    }

    pub fn apply(self, field: &dyn SpaceTimeField, rect: &Rectangle, x: f64, t: f64) -> Result<f64> {
        rect.check(x, t)?;
        Ok(self.combine(field.dt(x, t), field.dxx(x, t)))
    }
}

/// Linear couplings `F1 = p / nu` and `F2 = y_d - (y + y_hat)`.
#[derive(Clone)]
pub struct Coupling {
    pub nu: f64,
    pub state_lift: FieldRef,
    pub target: FieldRef,
}

impl Coupling {
    pub fn from_problem(hom: &HomogenizedProblem) -> Self {
        Self { nu: hom.nu(), state_lift: hom.state_lift().clone(), target: hom.target().clone() }
    }

    pub fn state_coupling(&self, p: f64) -> f64 {
        p / self.nu
    }

    pub fn adjoint_coupling(&self, y: f64, x: f64, t: f64) -> f64 {
        self.target.value(x, t) - (y + self.state_lift.value(x, t))
    }
}

/// Control from the gradient equation, `u = p / nu`.
pub fn recover_control(p: FieldRef, nu: f64) -> FieldRef {
    std::sync::Arc::new(QuotientField::new(p, nu))
}

/// `L1 y - (p / nu + G1)` at a point, for homogenized unknowns.
pub fn residual_forward(
    y: &dyn SpaceTimeField,
    p: &dyn SpaceTimeField,
    hom: &HomogenizedProblem,
    x: f64,
    t: f64,
) -> Result<f64> {
    let lhs = Operator::Forward.apply(y, &hom.rect(), x, t)?;
    Ok(lhs - (p.value(x, t) / hom.nu() + hom.state_forcing().value(x, t)))
}

/// `L2 p - (y_d - (y + y_hat)) - G2` at a point, for homogenized unknowns.
pub fn residual_adjoint(
    y: &dyn SpaceTimeField,
    p: &dyn SpaceTimeField,
    hom: &HomogenizedProblem,
    x: f64,
    t: f64,
) -> Result<f64> {
    let lhs = Operator::Adjoint.apply(p, &hom.rect(), x, t)?;
    let coupling = Coupling::from_problem(hom).adjoint_coupling(y.value(x, t), x, t);
    Ok(lhs - coupling - hom.adjoint_forcing().value(x, t))
}

/// `int int (L1 phi) psi - int int phi (L2 psi)` by tensor Gauss-Legendre
/// quadrature with `points` nodes per axis. Vanishes when `phi` and `psi` are
/// zero on the whole boundary of the rectangle.
pub fn weak_adjointness_gap(phi: &dyn SpaceTimeField, psi: &dyn SpaceTimeField, rect: &Rectangle, points: usize) -> f64 {
    let xs = gauss_legendre(points, rect.a, rect.b);
    let ts = gauss_legendre(points, 0.0, rect.t_final);
    let mut gap = 0.0;
    for &(t, wt) in &ts {
        for &(x, wx) in &xs {
            let l1phi = Operator::Forward.combine(phi.dt(x, t), phi.dxx(x, t));
            let l2psi = Operator::Adjoint.combine(psi.dt(x, t), psi.dxx(x, t));
            gap += wx * wt * (l1phi * psi.value(x, t) - phi.value(x, t) * l2psi);
        }
    }
    gap
}
