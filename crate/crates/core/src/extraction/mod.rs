//! Recovery of complex energies and eigenstate textures from spin-texture
//! time series by nonlinear least squares.

pub mod fit;
pub mod lm;

pub use fit::{fit_series, re_phi_from_fit, FitConfig, FitModel, FitResult, ModAngle};
