//! Runs the weakly regularized setting (nu = 1e-6, about 200 nodes) and writes
//! the CSV artifacts to a directory.
//!
//!     cargo run --release --example small_nu -- [output-dir]

use rkhs_ocp::bench::{solve_to_dir, Case, RunConfig};

fn main() -> rkhs_ocp::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "small-nu-output".into());
    for id in 1..=3 {
        let cfg = RunConfig {
            example_id: id,
            nu: 1e-6,
            n_x: 14,
            n_t: 14,
            output_dir: format!("{out}/example{id}").into(),
            ..RunConfig::default()
        };
        let r = solve_to_dir(&Case::builtin(id, cfg.nu)?, &cfg)?;
        println!(
            "example {id}: linf_y {:.3e}  linf_p {:.3e}  linf_u {:.3e}  cond {:.2e} -> {:.2e}  J {:.4e}",
            r.norms.linf_y, r.norms.linf_p, r.norms.linf_u, r.cond.pre, r.cond.post, r.j_cost
        );
    }
    println!("artifacts written under {out}/");
    Ok(())
}
