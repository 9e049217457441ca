//! Solves one built-in example by kernel collocation and prints errors,
//! condition estimates and a coarse table of the state.
//!
//!     cargo run --release --example solve_example -- [example] [nu] [n]

use std::sync::Arc;

use rkhs_ocp::collocation::{assemble, error_norms, generate_nodes, solve, KernelPair, SolverConfig};
use rkhs_ocp::problem::{builtin_example, homogenize};

fn main() -> rkhs_ocp::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let id: u32 = args.first().and_then(|s| s.parse().ok()).unwrap_or(1);
    let nu: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1e-2);
    let n: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(12);

    let (prob, exact) = builtin_example(id, nu)?;
    let hom = homogenize(&prob)?;
    let nodes = generate_nodes(n, n, prob.rect())?;
    let kernels = Arc::new(KernelPair::for_rect(prob.rect())?);
    let system = assemble(&hom, &nodes, kernels)?;
    let sol = solve(&system, &SolverConfig::default())?;
    let e = error_norms(&sol, &exact, (101, 101))?;

    println!("example {id}, nu = {nu:e}, {n}x{n} nodes ({} unknowns)", 2 * nodes.len());
    println!("  cond estimate {:.3e} (after row scaling {:.3e})", sol.diagnostics.cond_pre, sol.diagnostics.cond_post);
    println!("  state   linf {:.3e}  l2 {:.3e}", e.linf_y, e.l2_y);
    println!("  adjoint linf {:.3e}  l2 {:.3e}", e.linf_p, e.l2_p);
    println!("  control linf {:.3e}  l2 {:.3e}", e.linf_u, e.l2_u);
    println!("  y approx / exact at x = 0.5:");
    for t in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let v = sol.evaluate(0.5, t)?;
        println!("    t = {t:.1}: {:+.6e} / {:+.6e}", v.y, exact.y.value(0.5, t));
    }
    Ok(())
}
