//! Numerical index theory on tori.
//!
//! The crate is organised bottom-up:
//!
//! * [`torus`]: periodic spectral grids, differential forms, wedge products
//!   and quadrature on `T^d`, `d = 1, 2, 3`.
//! * [`bundle`]: the explicit rank-one idempotent `e(x, y)` on `T²`, its
//!   Grassmann curvature form and Chern number.
//! * [`contact`]: the rotating contact forms `θ_k` on `T³`, Reeb fields,
//!   horizontal frames and pullbacks by the k-fold covers.
//! * [`operator`]: matrix-free sum-of-squares operators `P_{k,l}` acting on
//!   sections of the pulled-back line bundle.
//! * [`fredholm`]: finite-dimensional parametrices and the Connes–Skandalis
//!   idempotent.
//! * [`gamma`]: `Z/k`-equivariant operators on finite covers and their
//!   fundamental-domain traces.
//! * [`index`]: evaluation of the topological index formula and the cover
//!   consistency checks.
//! * [`suites`]: seeded property suites shared by the CLI and the tests.
//!
//! With the default `parallel` feature the inner loops (FFT lines, pointwise
//! solves, random trials) run on rayon; without it everything runs
//! sequentially and produces bit-identical results.

pub mod bundle;
pub mod check;
pub mod contact;
mod error;
pub mod fredholm;
pub mod gamma;
pub mod index;
pub mod operator;
pub mod par;
pub mod random;
pub mod suites;
pub mod torus;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
