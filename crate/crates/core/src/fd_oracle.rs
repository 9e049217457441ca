//! Finite-difference reference solver for the coupled optimality system.
//!
//! Crank-Nicolson in time and central differences in space, applied to the
//! forward state equation and the backward adjoint equation at once. All
//! levels are solved together as one banded system, ordered level by level
//! with `(y_i, p_i)` interleaved, so the half bandwidth is `2 n_x + 3`.

use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
pub use crate::grid::{error_vs_exact, ErrorNorms, GridField, SpaceTimeGrid};
use crate::linalg::BandMatrix;
use crate::problem::ControlProblem;

#[derive(Debug, Clone)]
pub struct FdSolution {
    pub y: GridField,
    pub p: GridField,
    pub u: GridField,
    pub seconds: f64,
}

/// Solves the discrete optimality system on `grid`.
pub fn solve_coupled_fd(problem: &ControlProblem, grid: SpaceTimeGrid) -> Result<FdSolution> {
    let start = Instant::now();
    if grid.rect != problem.rect() {
        return Err(Error::GridMismatch("oracle grid does not cover the problem rectangle".into()));
    }
    let nx = grid.n_x;
    let levels = grid.n_t + 2;
    let last = levels - 1;
    let (h, k) = (grid.h(), grid.k());
    let nu = problem.nu();
    let xs = grid.xs();
    let ts = grid.ts();

    let idx = |level: usize, i: usize, c: usize| 2 * (level * nx + (i - 1)) + c;
    let n = 2 * nx * levels;
    let band = 2 * nx + 3;
    let mut m = BandMatrix::zeros(n, band, band);
    let mut rhs = vec![0.0; n];

    let y_bc = |i: usize, level: usize| {
        if i == 0 {
            problem.h_left().eval(ts[level])
        } else {
            problem.h_right().eval(ts[level])
        }
    };
    let p_bc = |i: usize, level: usize| {
        if i == 0 {
            problem.adjoint_left().eval(ts[level])
        } else {
            problem.adjoint_right().eval(ts[level])
        }
    };
    let target = problem.target();

    for i in 1..=nx {
        let r = idx(0, i, 0);
        m.add(r, r, 1.0);
        rhs[r] = problem.initial().eval(xs[i]);
        let r = idx(last, i, 1);
        m.add(r, r, 1.0);
    }

    let lap = 0.5 / (h * h);
    for level in 0..last {
        let next = level + 1;
        for i in 1..=nx {
            // -(y^{n+1} - y^n)/k + (D y^{n+1} + D y^n)/2 - (p^{n+1} + p^n)/(2 nu) = 0
            let r = idx(next, i, 0);
            for (lv, time_coef) in [(next, -1.0 / k), (level, 1.0 / k)] {
                m.add(r, idx(lv, i, 0), time_coef - 2.0 * lap);
                m.add(r, idx(lv, i, 1), -0.5 / nu);
                for j in [i - 1, i + 1] {
                    if j == 0 || j == nx + 1 {
                        rhs[r] -= lap * y_bc(j, lv);
                    } else {
                        m.add(r, idx(lv, j, 0), lap);
                    }
                }
            }

            // (p^{n+1} - p^n)/k + (D p^{n+1} + D p^n)/2 + (y^{n+1} + y^n)/2
            //   = (y_d^{n+1} + y_d^n)/2
            let r = idx(level, i, 1);
            for (lv, time_coef) in [(next, 1.0 / k), (level, -1.0 / k)] {
                m.add(r, idx(lv, i, 1), time_coef - 2.0 * lap);
                m.add(r, idx(lv, i, 0), 0.5);
                rhs[r] += 0.5 * target.value(xs[i], ts[lv]);
                for j in [i - 1, i + 1] {
                    if j == 0 || j == nx + 1 {
                        rhs[r] -= lap * p_bc(j, lv);
                    } else {
                        m.add(r, idx(lv, j, 1), lap);
                    }
                }
            }
        }
    }

    let lu = m.factor().map_err(|p| {
        Error::SingularDiscretization(format!("zero pivot in row {} of the banded system", p.column))
    })?;
    let sol = lu.solve(&rhs);
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularDiscretization("solution is not finite".into()));
    }

    let px = grid.points_x();
    let mut y = vec![0.0; grid.len()];
    let mut p = vec![0.0; grid.len()];
    for level in 0..levels {
        for i in 0..px {
            let g = grid.index(i, level);
            if i == 0 || i == px - 1 {
                y[g] = y_bc(i, level);
                p[g] = p_bc(i, level);
            } else {
                y[g] = sol[idx(level, i, 0)];
                p[g] = sol[idx(level, i, 1)];
            }
        }
    }
    let y = GridField::new(grid, y)?;
    let p = GridField::new(grid, p)?;
    let u = p.map(|v| v / nu);
    Ok(FdSolution { y, p, u, seconds: start.elapsed().as_secs_f64() })
}

/// A posteriori error estimate of the oracle from one halving of both steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleEstimate {
    pub y: f64,
    pub p: f64,
}

/// Richardson estimate for a second-order scheme: the grid with `2n + 1`
/// interior points has exactly half the steps, and the coarse error is about
/// `4/3` of the coarse/fine difference at shared points.
pub fn self_error_estimate(problem: &ControlProblem, coarse: &FdSolution) -> Result<OracleEstimate> {
    let g = *coarse.y.grid();
    let fine_grid = SpaceTimeGrid::new(g.rect, 2 * g.n_x + 1, 2 * g.n_t + 1)?;
    let fine = solve_coupled_fd(problem, fine_grid)?;
    let mut dy = 0.0_f64;
    let mut dp = 0.0_f64;
    for k in 0..g.points_t() {
        for i in 0..g.points_x() {
            dy = dy.max((coarse.y.at(i, k) - fine.y.at(2 * i, 2 * k)).abs());
            dp = dp.max((coarse.p.at(i, k) - fine.p.at(2 * i, 2 * k)).abs());
        }
    }
    Ok(OracleEstimate { y: 4.0 / 3.0 * dy, p: 4.0 / 3.0 * dp })
}

/// Observed orders `log(e_i / e_{i+1}) / log(h_i / h_{i+1})` from `(h, error)`
/// pairs ordered from coarse to fine.
pub fn observed_orders(samples: &[(f64, f64)]) -> Vec<f64> {
    samples
        .windows(2)
        .map(|w| (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{zero_field, Rectangle};
    use crate::problem::builtin_example;

    #[test]
    fn zero_data_gives_zero_solution() {
        let p = ControlProblem::new(Rectangle::unit(), 0.1, zero_field()).unwrap();
        let s = solve_coupled_fd(&p, SpaceTimeGrid::new(Rectangle::unit(), 7, 5).unwrap()).unwrap();
        assert_eq!(s.y.max_abs(), 0.0);
        assert_eq!(s.p.max_abs(), 0.0);
    }

    #[test]
    fn boundary_values_are_imposed() {
        let (p, exact) = builtin_example(1, 1e-2).unwrap();
        let g = SpaceTimeGrid::new(Rectangle::unit(), 9, 9).unwrap();
        let s = solve_coupled_fd(&p, g).unwrap();
        for k in 0..g.points_t() {
            let t = g.t(k);
            assert_eq!(s.y.at(0, k), exact.y.value(0.0, t));
            assert!((s.p.at(g.points_x() - 1, k) - exact.p.value(1.0, t)).abs() < 1e-15);
        }
        for i in 0..g.points_x() {
            assert!((s.y.at(i, 0) - exact.y.value(g.x(i), 0.0)).abs() < 1e-15);
            assert!(s.p.at(i, g.points_t() - 1).abs() < 1e-15);
        }
    }

    #[test]
    fn orders_from_exact_powers() {
        let o = observed_orders(&[(0.1, 0.02), (0.05, 0.005)]);
        assert!((o[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn grid_must_match_problem() {
        let p = ControlProblem::new(Rectangle::unit(), 0.1, zero_field()).unwrap();
        let g = SpaceTimeGrid::new(Rectangle::new(0.0, 2.0, 1.0).unwrap(), 3, 3).unwrap();
        assert!(matches!(solve_coupled_fd(&p, g), Err(Error::GridMismatch(_))));
    }
}
