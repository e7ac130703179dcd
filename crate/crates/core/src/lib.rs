//! Numerical toolkit for the (-1)-homogeneous axisymmetric no-swirl
//! Navier-Stokes family.
//!
//! * [`profile`] solves the reduced Riccati-type ODE in `y = cos(theta)`,
//!   classifies parameters and brackets the admissible `gamma` range.
//! * [`field`] lifts a profile to the 3D velocity, pressure and gradient.
//! * [`functionals`] evaluates the force coefficient `b` and cone sup-norms.
//! * [`inequality`] checks weighted interpolation inequalities and weights.
//! * [`decay`] evaluates the L^q decay constant and envelope.

pub mod decay;
pub mod error;
pub mod field;
pub mod functionals;
pub mod inequality;
pub mod interp;
mod layer;
pub mod ode;
pub mod params;
pub mod profile;
pub mod quad;

pub use error::{Error, Result};
pub use params::{cbar3, endpoint_values, Branch, Classification, HomParams};
pub use profile::{gamma_range, is_admissible, ode_residual, solve_profile, GammaRange, SolverOptions, ThetaProfile};
