//! Solves the coupled system by fixed-point iteration between the state and
//! adjoint blocks for several relaxation factors and compares with the direct
//! solve.
//!
//!     cargo run --release --example picard_iteration

use std::sync::Arc;

use rkhs_ocp::collocation::{assemble, generate_nodes, solve, KernelPair, SolveMode, SolverConfig};
use rkhs_ocp::problem::{builtin_example, homogenize};

fn main() -> rkhs_ocp::Result<()> {
    let (prob, _) = builtin_example(1, 1e-2)?;
    let hom = homogenize(&prob)?;
    let nodes = generate_nodes(8, 8, prob.rect())?;
    let system = assemble(&hom, &nodes, Arc::new(KernelPair::for_rect(prob.rect())?))?;
    let exact_lu = SolverConfig { ridge_lambda: 0.0, ..SolverConfig::default() };
    let direct = solve(&system, &exact_lu)?;
    for relaxation in [1.0, 0.8, 0.6, 0.4] {
        let mode = SolveMode::Picard { tolerance: 1e-10, max_iterations: 200, relaxation };
        let sol = solve(&system, &SolverConfig { mode, ..exact_lu })?;
        let report = sol.diagnostics.picard.expect("picard mode reports");
        let diff = direct
            .b1
            .iter()
            .chain(&direct.b2)
            .zip(sol.b1.iter().chain(&sol.b2))
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        println!(
            "relaxation {relaxation:.1}: converged {:5} after {:3} iterations, max coefficient gap {diff:.2e}",
            report.converged, report.iterations
        );
    }
    Ok(())
}
