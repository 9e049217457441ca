//! Compares the collocation solution with the Crank-Nicolson reference solver
//! and measures the reference solver's order of accuracy.
//!
//!     cargo run --release --example oracle_crosscheck

use rkhs_ocp::bench::{crosscheck, Case, RunConfig};
use rkhs_ocp::fd_oracle::{error_vs_exact, observed_orders, solve_coupled_fd, SpaceTimeGrid};

fn main() -> rkhs_ocp::Result<()> {
    let case = Case::builtin(1, 1e-2)?;
    let cfg = RunConfig { n_x: 12, n_t: 12, oracle_grid: (64, 64), ..RunConfig::default() };
    let r = crosscheck(&case, &cfg)?;
    println!("collocation 12x12 vs finite differences 64x64 (h = {:.4}):", r.oracle_grid.h);
    println!("  max |y_rkhs - y_fd| = {:.3e}, tolerance {:.3e}, agree = {}", r.discrepancy_y, r.tolerance, r.agree);
    println!("  collocation error {:.3e}, oracle error {:.3e}, oracle estimate {:.3e}", r.rkhs_error_y.linf, r.oracle_error_y.linf, r.oracle_estimate.y);

    let mut samples = Vec::new();
    for n in [16, 32, 64, 128] {
        let grid = SpaceTimeGrid::new(case.problem.rect(), n, n)?;
        let fd = solve_coupled_fd(&case.problem, grid)?;
        let e = error_vs_exact(&fd.y, &|x, t| case.exact.y.value(x, t));
        println!("  oracle {n:>3}x{n:<3} linf_y {:.3e}  ({:.2}s)", e.linf, fd.seconds);
        samples.push((grid.h(), e.linf));
    }
    println!("  observed orders {:?}", observed_orders(&samples));
    Ok(())
}
