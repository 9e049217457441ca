//! Sweeps the node count on all three built-in examples and prints the error
//! table with condition estimates.
//!
//!     cargo run --release --example convergence_study

use rkhs_ocp::bench::{convergence_study, Case, RunConfig};

fn main() -> rkhs_ocp::Result<()> {
    let cfg = RunConfig { sweep: vec![(4, 4), (8, 8), (12, 12), (16, 16), (20, 20)], ..RunConfig::default() };
    for id in 1..=3 {
        let report = convergence_study(&Case::builtin(id, cfg.nu)?, &cfg)?;
        println!("example {id}, nu = {:e}", cfg.nu);
        println!("  {:>7} {:>11} {:>11} {:>11} {:>11} {:>11}", "nodes", "linf_y", "l2_y", "linf_p", "l2_p", "cond");
        for r in &report.rows {
            println!(
                "  {:>7} {:>11.3e} {:>11.3e} {:>11.3e} {:>11.3e} {:>11.3e}",
                r.n_total, r.linf_y, r.l2_y, r.linf_p, r.l2_p, r.cond_estimate
            );
        }
        if !report.is_monotone() {
            println!("  l2_y grew at sweep positions {:?}", report.violations);
        }
    }
    Ok(())
}
