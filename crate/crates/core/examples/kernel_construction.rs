//! Builds the reproducing kernels of the three one-dimensional spaces and
//! prints a few values, the derivative jump on the diagonal and a Gram matrix
//! eigenvalue check.
//!
//!     cargo run --example kernel_construction

use rkhs_ocp::kernel::{Constraint, Kernel1D, Piece, SpaceSpec, TensorKernel};

fn main() -> rkhs_ocp::Result<()> {
    let spaces = [
        ("W1[0,1], u(0) = 0", SpaceSpec::initial_time(1.0)?),
        ("W1[0,1], u(1) = 0", SpaceSpec::terminal_time(1.0)?),
        ("W2[0,1], u(0) = u(1) = 0", SpaceSpec::dirichlet_space(0.0, 1.0)?),
        ("W2[0,1], u(0) = u'(0) = 0", SpaceSpec::new(2, (0.0, 1.0), vec![Constraint::left(0), Constraint::left(1)])?),
    ];
    for (name, spec) in spaces {
        let m = spec.order();
        let k = Kernel1D::build(spec)?;
        let y = 0.3;
        let jump = k.eval_piece(Piece::Left, y, y, 2 * m + 1, 0)? - k.eval_piece(Piece::Right, y, y, 2 * m + 1, 0)?;
        println!("{name}");
        println!("  k(0.2, 0.3) = {:+.12e}   k(0.3, 0.2) = {:+.12e}", k.value(0.2, 0.3)?, k.value(0.3, 0.2)?);
        println!("  k(0.7, 0.7) = {:+.12e}", k.value(0.7, 0.7)?);
        println!("  jump of d^{} k at x = y: {jump:+.3}", 2 * m + 1);
    }

    let state = TensorKernel::state(0.0, 1.0, 1.0)?;
    let pts: Vec<(f64, f64)> = (1..=15).map(|i| ((i as f64 * 0.37) % 1.0, (i as f64 * 0.61) % 1.0)).collect();
    let gram = nalgebra::DMatrix::from_fn(15, 15, |i, j| state.eval(pts[i], pts[j], 0, 0).unwrap());
    let eig = gram.clone().symmetric_eigenvalues();
    println!("state tensor kernel Gram matrix on 15 points: eigenvalues in [{:.3e}, {:.3e}]", eig.min(), eig.max());
    Ok(())
}
