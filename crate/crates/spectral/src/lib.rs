//! Periodic-box pseudo-spectral solver for perturbations `w` of a mollified
//! stationary (-1)-homogeneous flow, with Picard and Duhamel fixed-point tools.

pub mod background;
pub mod error;
pub mod grid;
pub mod picard;
pub mod sim;
pub mod state;

pub use background::{make_background, Background, BackgroundReport};
pub use error::{SimError, SimResult};
pub use grid::Grid;
pub use picard::{bilinear_fixed_point, duhamel_rhs, picard_linear, Bilinear, PicardConfig, ScalarProduct, Trajectory};
pub use sim::{energy_report, linear_step, run_sim, NormSeries, SimConfig, Simulation};
pub use state::{InitSpec, SpectralState};
