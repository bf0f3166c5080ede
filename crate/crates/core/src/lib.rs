//! Front-fixing solver and analysis toolkit for the one-dimensional parabolic free
//! boundary problem
//!
//! ```text
//! u_t = u_xx - lambda u,       0 < x < s(t)
//! u(0, t) = f(t),  u_x(s(t), t) = 0,  u(x, 0) = phi(x),  s(0) = b
//! s'(t) = int_0^s(t) (u(x, t) - sigma) dx
//! ```

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod error;
pub mod expr;
pub mod fit;
pub mod solver;
pub mod stencil;
pub mod tridiag;
pub mod types;
pub mod verify;

pub use error::{Error, Result};
pub use expr::{DiffScheme, Expr};
pub use solver::{Forcing, RunResult, RunStatus};
pub use types::{FrontRow, FrontSeries, Grid, Parameters, State, UniformSeries};
