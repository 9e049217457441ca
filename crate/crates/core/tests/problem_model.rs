mod common;

use common::bubble;
use proptest::prelude::*;
use rkhs_ocp::field::{zero_field, AnalyticField, Profile, Rectangle, SpaceTimeField};
use rkhs_ocp::optimality::{recover_control, residual_adjoint, residual_forward, weak_adjointness_gap};
use rkhs_ocp::problem::{builtin_example, derive_yd, homogenize, ControlProblem, HomogenizedProblem};

fn interior_grid(n: usize) -> impl Iterator<Item = (f64, f64)> {
    (1..=n).flat_map(move |k| (1..=n).map(move |i| (i as f64 / (n + 1) as f64, k as f64 / (n + 1) as f64)))
}

/// Exact pair of a built-in written as homogenized unknowns.
fn homogenized_exact(id: u32, nu: f64) -> (HomogenizedProblem, AnalyticField, AnalyticField) {
    let (prob, exact) = builtin_example(id, nu).unwrap();
    let hom = homogenize(&prob).unwrap();
    let (y, yh) = (exact.y.clone(), hom.state_lift().clone());
    let (p, pl) = (exact.p.clone(), hom.adjoint_lift().clone());
    let (y1, y2, y3, yh1, yh2, yh3) = (y.clone(), y.clone(), y.clone(), yh.clone(), yh.clone(), yh.clone());
    let ytilde = AnalyticField::new(
        move |x, t| y.value(x, t) - yh.value(x, t),
        move |x, t| y1.dt(x, t) - yh1.dt(x, t),
        move |x, t| y2.dx(x, t) - yh2.dx(x, t),
        move |x, t| y3.dxx(x, t) - yh3.dxx(x, t),
    );
    let (p1, p2, p3, pl1, pl2, pl3) = (p.clone(), p.clone(), p.clone(), pl.clone(), pl.clone(), pl.clone());
    let ptilde = AnalyticField::new(
        move |x, t| p.value(x, t) - pl.value(x, t),
        move |x, t| p1.dt(x, t) - pl1.dt(x, t),
        move |x, t| p2.dx(x, t) - pl2.dx(x, t),
        move |x, t| p3.dxx(x, t) - pl3.dxx(x, t),
    );
    (hom, ytilde, ptilde)
}

#[test]
fn builtins_satisfy_their_data() {
    for id in 1..=3 {
        let (prob, exact) = builtin_example(id, 1e-2).unwrap();
        for j in 0..50 {
            let s = j as f64 / 49.0;
            assert!((exact.y.value(0.0, s) - prob.h_left().eval(s)).abs() < 1e-12);
            assert!((exact.y.value(1.0, s) - prob.h_right().eval(s)).abs() < 1e-12);
            assert!((exact.y.value(s, 0.0) - prob.initial().eval(s)).abs() < 1e-12);
            assert!((exact.p.value(0.0, s) - prob.adjoint_left().eval(s)).abs() < 1e-12);
            assert!((exact.p.value(1.0, s) - prob.adjoint_right().eval(s)).abs() < 1e-12);
            assert!(exact.p.value(s, 1.0).abs() < 1e-12);
            assert_eq!(exact.u(s, 0.5), exact.p.value(s, 0.5) / 1e-2);
        }
    }
}

#[test]
fn second_example_has_a_homogeneous_adjoint() {
    let (prob, _) = builtin_example(2, 1e-2).unwrap();
    for s in [0.1, 0.5, 0.9] {
        assert!(prob.adjoint_left().eval(s).abs() < 1e-15);
        assert!(prob.adjoint_right().eval(s).abs() < 1e-15);
    }
}

#[test]
fn derived_target_closes_the_adjoint_equation() {
    for id in 1..=3 {
        for nu in [1e-2, 1e-6] {
            let (hom, y, p) = homogenized_exact(id, nu);
            for (x, t) in interior_grid(30) {
                let ra = residual_adjoint(&y, &p, &hom, x, t).unwrap();
                assert!(ra.abs() <= 1e-9, "example {id} nu {nu}: adjoint residual {ra} at ({x}, {t})");
                let rf = residual_forward(&y, &p, &hom, x, t).unwrap();
                assert!(rf.abs() <= 1e-9, "example {id}: forward residual {rf}");
            }
        }
    }
}

#[test]
fn derived_target_of_zero_pair_is_zero() {
    let prob = ControlProblem::new(Rectangle::unit(), 0.3, zero_field()).unwrap();
    let exact = rkhs_ocp::ExactSolution { y: zero_field(), p: zero_field(), nu: 0.3 };
    let yd = derive_yd(&exact, &prob).unwrap();
    assert_eq!(yd.value(0.4, 0.4), 0.0);
}

struct Scaled<'a>(&'a dyn SpaceTimeField, f64);

impl SpaceTimeField for Scaled<'_> {
    fn value(&self, x: f64, t: f64) -> f64 {
        self.1 * self.0.value(x, t)
    }
    fn dt(&self, x: f64, t: f64) -> f64 {
        self.1 * self.0.dt(x, t)
    }
    fn dx(&self, x: f64, t: f64) -> f64 {
        self.1 * self.0.dx(x, t)
    }
    fn dxx(&self, x: f64, t: f64) -> f64 {
        self.1 * self.0.dxx(x, t)
    }
}

#[test]
fn forward_residual_is_affine() {
    let (hom, y, p) = homogenized_exact(1, 1e-2);
    let (x, t) = (0.37, 0.61);
    let r = |s: f64| residual_forward(&Scaled(&y, s), &Scaled(&p, s), &hom, x, t).unwrap();
    let (r0, r1, r2) = (r(0.0), r(1.0), r(2.0));
    assert!((r2 - 2.0 * r1 + r0).abs() < 1e-10);
    assert!(r0.abs() > 1e-3, "the lift makes the residual of the zero pair non-trivial");
}

#[test]
fn control_recovery_is_idempotent() {
    let (_, exact) = builtin_example(3, 0.25).unwrap();
    let u = recover_control(exact.p.clone(), 0.25);
    let back = recover_control(std::sync::Arc::new(rkhs_ocp::field::QuotientField::new(u.clone(), 4.0)), 0.25);
    for (x, t) in interior_grid(6) {
        assert_eq!(back.value(x, t), u.value(x, t));
    }
}

#[test]
fn homogenization_with_lifted_boundary() {
    let prob = ControlProblem::new(Rectangle::unit(), 1.0, zero_field())
        .unwrap()
        .with_boundary(Profile::with_derivatives(|t| t, |_| 1.0, |_| 0.0), Profile::zero());
    let hom = homogenize(&prob).unwrap();
    for (x, t) in interior_grid(5) {
        assert!((hom.state_lift().value(x, t) - (1.0 - x) * t).abs() < 1e-14);
        assert!((hom.state_forcing().value(x, t) - (1.0 - x)).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn weak_adjointness(i in 2i32..5, j in 2i32..5, k in 2i32..5, l in 2i32..5,
                        i2 in 2i32..5, j2 in 2i32..5, k2 in 2i32..5, l2 in 2i32..5, s in -3.0f64..3.0) {
        let phi = bubble(i, j, k, l, s);
        let psi = bubble(i2, j2, k2, l2, 1.0);
        let gap = weak_adjointness_gap(&phi, &psi, &Rectangle::unit(), 12);
        prop_assert!(gap.abs() <= 1e-6, "gap {}", gap);
    }

    #[test]
    fn gradient_equation_holds_pointwise(id in 1u32..4, x in 0.0f64..1.0, t in 0.0f64..1.0, e in -6i32..0) {
        let nu = 10f64.powi(e);
        let (_, exact) = builtin_example(id, nu).unwrap();
        prop_assert_eq!(exact.control().value(x, t), exact.p.value(x, t) / nu);
    }
}
