//! Periodic spectral calculus on `T^d = (R / 2πZ)^d`, `d ≤ 3`.
//!
//! Nodes sit at `x_j = 2πj/N` on every axis. Functions are stored point-major
//! with the last axis varying fastest, derivatives are taken with the FFT and
//! integrals with the (spectrally accurate) uniform trapezoid rule.

mod form;
pub(crate) mod function;
mod grid;

pub use form::{exterior_derivative, integrate_top, multi_indices, wedge, DiffForm};
pub use function::{random_band_limited, spectral_derivative, GridFunction};
pub use grid::{make_grid, Grid, AXIS_X, AXIS_Y, AXIS_Z};
