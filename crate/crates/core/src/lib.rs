//! Numerical solver and verifier for the strongly irreversible Allen-Cahn
//! equation `u_t = (Δu − u³ + κu)₊` with homogeneous Dirichlet data, and for
//! its equivalent parabolic obstacle formulation.

pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod io;
mod linalg;
pub mod model;
pub mod obstacle;
pub mod presets;
pub mod spectral;
pub mod steppers;

pub use error::{Error, Result};
pub use grid::{Field, Grid, Norm};
pub use model::{EnergySnapshot, ModelParams};
