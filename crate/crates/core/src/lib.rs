//! Energy-based discontinuous Galerkin discretizations of the scalar wave
//! equation, written as the first-order-in-time system u_t = v,
//! v_t = div(c^2 grad u) + f.
//!
//! The displacement u lives on a primal Cartesian mesh and the velocity v
//! either on the same mesh (`dg1d::assemble_nonstaggered_1d`) or on a dual
//! mesh whose vertices sit at the primal cell centers
//! (`dg1d::assemble_staggered_1d`, `dg2d::assemble_staggered_2d`). Time
//! stepping is explicit Taylor expansion of the semi-discrete system
//! (`timeint`), optionally with boundary-layer local time stepping.
//! `analysis` builds one-step matrices and eigenvalue/operator-norm
//! diagnostics for stability studies.

pub mod analysis;
pub mod basis;
pub mod dg1d;
pub mod dg2d;
mod error;
pub mod mesh;
pub mod operator;
pub mod timeint;

pub use error::Error;
