//! Exact feasibility solver for `{x : Ax = b, x >= 0}` with integer data.
//!
//! The solver keeps an upper-bound box `0 <= x <= u` that contains every
//! vertex of the polyhedron. Each outer iteration runs the bubble procedure
//! in the norm `||x||_D^2 = sum 4 x_j^2 / u_j^2`: starting from the minimum
//! norm point of the affine hull, it repeatedly projects onto the
//! intersection of the hull, the current supporting half-space and one
//! violated bound. It either reaches a point with `x >= 0`, or the iterate
//! leaves the ball of radius `2 sqrt(n)` and yields a separating inequality,
//! which shrinks at least one coordinate of `u` by half. Coordinates whose
//! bound drops below `1/Delta` are fixed to zero.
//!
//! All arithmetic is exact ([`scalar::Scalar`] is an arbitrary-precision
//! rational). Every infeasibility verdict comes with an [`certificates::AuditLog`]
//! that [`certificates::replay_audit`] re-checks without using solver code.

pub mod bubble;
pub mod certificates;
pub mod config;
pub mod driver;
pub mod error;
pub mod geometry;
pub mod instrument;
pub mod io;
pub mod problem;
pub mod scalar;

pub use config::Config;
pub use driver::{solve_feasibility, Solution, Verdict};
pub use error::{Result, SolveError};
pub use problem::Problem;
pub use scalar::Scalar;
