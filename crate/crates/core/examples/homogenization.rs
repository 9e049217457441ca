//! Shows how nonzero boundary and initial data are lifted out of a problem and
//! what forcing terms remain for the homogenized unknowns.
//!
//!     cargo run --example homogenization

use rkhs_ocp::field::{zero_field, Profile, Rectangle};
use rkhs_ocp::problem::{builtin_example, homogenize, ControlProblem};

fn main() -> rkhs_ocp::Result<()> {
    // y(0, t) = t, y(1, t) = 0, y(x, 0) = 0
    let prob = ControlProblem::new(Rectangle::unit(), 1e-2, zero_field())?
        .with_boundary(Profile::with_derivatives(|t| t, |_| 1.0, |_| 0.0), Profile::zero());
    let hom = homogenize(&prob)?;
    println!("lifted boundary data h1(t) = t:");
    for &(x, t) in &[(0.0, 0.5), (0.25, 0.5), (0.5, 1.0)] {
        println!(
            "  ({x:.2}, {t:.2}): y_hat = {:+.4}  G1 = {:+.4}",
            hom.state_lift().value(x, t),
            hom.state_forcing().value(x, t)
        );
    }

    // The first built-in carries nonzero adjoint traces at x = 0 and x = 1.
    let (prob, exact) = builtin_example(1, 1e-2)?;
    let hom = homogenize(&prob)?;
    println!("built-in example 1, nu = 1e-2:");
    for &t in &[0.25, 0.5, 0.75] {
        println!(
            "  t = {t:.2}: p(0, t) = {:+.3e}  adjoint lift P(0, t) = {:+.3e}  G2(0.5, t) = {:+.3e}",
            exact.p.value(0.0, t),
            hom.adjoint_lift().value(0.0, t),
            hom.adjoint_forcing().value(0.5, t)
        );
    }
    Ok(())
}
