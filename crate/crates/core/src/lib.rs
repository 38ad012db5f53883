//! Closed-form solution families of the functional equation
//!
//! ```text
//! F((x+y)/2) + f1(x) + f2(y) = G(g1(x) + g2(y))
//! ```
//!
//! together with the equivalent invariance equation of Matkowski means
//! `M(N(u,v), K(u,v)) = M(u,v)` where `M(u,v) = (f+g)^{-1}(f(u)+g(v))`.
//!
//! Modules:
//!
//! * [`fncore`]: intervals, scalar functions with exact derivatives, grids,
//!   monotone inversion, finite differences and the Schwarzian derivative.
//! * [`means`]: Matkowski means, the invariance residual, generator
//!   composition and the residual of the main equation.
//! * [`families`]: constructors for the 18 closed-form families.
//! * [`reduction`]: the `(phi, psi1, psi2, Psi1, Psi2)` system and its inverse.
//! * [`classify`]: branch detection, fraction fits and family recovery.

pub mod classify;
pub mod families;
pub mod fncore;
pub mod means;
pub mod reduction;

pub use fncore::{Expr, Grid, Interval, Monotonicity, RealFn};
pub use means::{ResidualReport, SolutionTuple};
