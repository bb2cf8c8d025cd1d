//! Perturbed two-dimensional wave propagators `sin(t√H)P_c/√H` and
//! `cos(t√H)P_c` for `H = −Δ + V`, built from the limiting-absorption
//! resolvent, together with a finite-difference oracle and verifiers for
//! dispersive and Strichartz-type estimates.

pub mod error;
pub mod evolution;
pub mod fdtd;
pub mod freewave;
pub mod grid;
pub mod norms;
pub mod operator;
pub mod quadrature;
pub mod resolvent;
pub mod specfun;

pub use error::{Error, Result, Warning};
pub use grid::{make_grid, Grid2D};
pub use specfun::{hankel0, HankelBranch, QuadratureScheme, QuadratureSpec};
