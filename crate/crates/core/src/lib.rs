//! Reproducing kernel collocation for distributed optimal control of the
//! one-dimensional heat equation.
//!
//! The control problem
//!
//! ```text
//! minimize  1/2 ||y - y_d||^2 + nu/2 ||u||^2
//! subject to  y_t - y_xx = -u  on (a, b) x (0, T),
//!             y(a, t) = h1(t),  y(b, t) = h2(t),  y(x, 0) = y0(x)
//! ```
//!
//! is replaced by its optimality system and solved by collocating the state
//! and the adjoint in reproducing kernel spaces whose kernels already satisfy
//! the homogeneous side conditions. A Crank-Nicolson solver of the same system
//! serves as an independent reference.
//!
//! Typical use:
//!
//! ```no_run
//! use std::sync::Arc;
//! use rkhs_ocp::{collocation, problem};
//!
//! let (prob, exact) = problem::builtin_example(1, 1e-2)?;
//! let hom = problem::homogenize(&prob)?;
//! let nodes = collocation::generate_nodes(8, 8, prob.rect())?;
//! let kernels = Arc::new(collocation::KernelPair::for_rect(prob.rect())?);
//! let system = collocation::assemble(&hom, &nodes, kernels)?;
//! let sol = collocation::solve(&system, &Default::default())?;
//! let errors = collocation::error_norms(&sol, &exact, (101, 101))?;
//! println!("max state error {:.3e}", errors.linf_y);
//! # Ok::<(), rkhs_ocp::Error>(())
//! ```
#![allow(clippy::needless_range_loop)]

pub mod bench;
pub mod collocation;
pub mod error;
pub mod fd_oracle;
pub mod field;
pub mod grid;
pub mod kernel;
pub mod linalg;
pub mod optimality;
pub mod problem;
pub mod quadrature;

pub use error::{Error, Result};
pub use field::{FieldRef, Profile, Rectangle, SpaceTimeField};
pub use kernel::{Kernel1D, SpaceSpec, TensorKernel};
pub use problem::{ControlProblem, ExactSolution, HomogenizedProblem};
