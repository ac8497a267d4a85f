//! Bifurcation analysis near curves of normally degenerate equilibria.
//!
//! The crate covers the whole pipeline for corank-one degeneracy along a
//! circle (or interval) of equilibria:
//!
//! * [`deformation`]: versal normal forms `H(a, y)` and reduced fields
//!   `F_i = eps g_i + y^{m_i} r_i`,
//! * [`resultant`]: the Sylvester determinant `R_m` whose zero set is the
//!   discriminant, with structure checks,
//! * [`blowup`]: polar blow-up of parameter space, tangent-cone
//!   classification, curve tracing and bifurcation arcs,
//! * [`lyapunov_schmidt`]: numerical reduction of an ambient system,
//! * [`branching`]: necessary and sufficient branch-point conditions,
//! * [`oracle`]: brute-force solution counting and branch tracing,
//! * [`applications`]: circular orbits in a radial potential and a
//!   three-species reaction network.

pub mod applications;
pub mod blowup;
pub mod cli;
pub mod branching;
pub mod deformation;
pub mod error;
pub mod expr;
pub mod lyapunov_schmidt;
pub mod model;
pub mod numerics;
pub mod oracle;
pub mod resultant;
pub mod synthetic;

pub use error::{Error, Result};
