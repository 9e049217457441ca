//! Sets up a problem that is not one of the built-ins: a target given only as
//! a function on a stretched domain, with nonzero boundary data. There is no
//! exact solution, so the collocation solution is compared with the finite
//! difference reference as the node count grows.
//!
//! The data are chosen compatible at the corners. Because the adjoint vanishes
//! on both edges meeting at `(a, T)` and `(b, T)`, the optimal state must match
//! the target there; violating that leaves a corner singularity and the
//! collocation error then decays much more slowly.
//!
//!     cargo run --release --example custom_problem

use std::f64::consts::PI;
use std::sync::Arc;

use rkhs_ocp::collocation::{assemble, generate_nodes, solve, KernelPair, SolverConfig};
use rkhs_ocp::fd_oracle::{solve_coupled_fd, SpaceTimeGrid};
use rkhs_ocp::field::{FnField, Profile, Rectangle};
use rkhs_ocp::problem::{cost_functional, homogenize, ControlProblem};

fn main() -> rkhs_ocp::Result<()> {
    let (b, t_final, nu) = (2.0, 0.5, 1e-2);
    let rect = Rectangle::new(0.0, b, t_final)?;
    let h = |t: f64| 0.1 * t * t;
    let target = FnField::new(move |x, t| (PI * x / b).sin() * t + h(t) * (1.0 - x / b)).into_ref();
    let prob = ControlProblem::new(rect, nu, target)?
        .with_boundary(Profile::with_derivatives(h, |t| 0.2 * t, |_| 0.2), Profile::zero());
    let hom = homogenize(&prob)?;

    let grid = SpaceTimeGrid::new(rect, 127, 127)?;
    let fd = solve_coupled_fd(&prob, grid)?;
    println!("finite differences 127x127: J = {:.6e}", cost_functional(&fd.y, &fd.u, &prob)?);

    let kernels = Arc::new(KernelPair::for_rect(rect)?);
    for n in [6, 10, 14, 18] {
        let nodes = generate_nodes(n, n, rect)?;
        let sol = solve(&assemble(&hom, &nodes, kernels.clone())?, &SolverConfig::default())?;
        let (y, p, u) = sol.evaluate_grid(&grid)?;
        println!(
            "collocation {n:>2}x{n:<2}: J = {:.6e}  max |y - y_fd| = {:.3e}  max |p - p_fd| = {:.3e}",
            cost_functional(&y, &u, &prob)?,
            y.zip_map(&fd.y, |a, c| a - c)?.max_abs(),
            p.zip_map(&fd.p, |a, c| a - c)?.max_abs()
        );
    }
    Ok(())
}
