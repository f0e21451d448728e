//! Numerical machinery for interlacing one-dimensional diffusions.
//!
//! The crate is organized bottom-up:
//!
//! * [`diffusion1d`]: scale/speed, conjugate diffusions, boundary
//!   classification and catalog transition kernels;
//! * [`kmgroup`]: Karlin–McGregor determinants, h-transforms, eigenfunctions
//!   and entrance laws;
//! * [`twolevel`]: block-determinant kernels on interlacing spaces and the
//!   intertwining residuals;
//! * [`reflectsde`]: Skorokhod maps and reflected-SDE simulation;
//! * [`edgekernels`]: determinantal densities of the edge particle systems;
//! * [`harness`]: random-matrix oracles, KS statistics, campaigns, CSV I/O.
//!
//! Quadrature, determinants and the Skorokhod projection are generic over
//! [`Real`]; simulation and the special-function kernels work in `f64`.

pub mod diffusion1d;
pub mod edgekernels;
pub mod error;
pub mod harness;
pub mod kmgroup;
pub mod linalg;
pub mod quad;
pub mod real;
pub mod reflectsde;
pub mod special;
pub mod twolevel;

pub use error::{Error, Result};
pub use real::Real;

/// Dense matrix over `f64`.
pub type Matrix = linalg::DenseMatrix<f64>;
/// Gauss–Legendre rule over `f64`.
pub type GaussLegendre = quad::GaussLegendre<f64>;
/// Skorokhod solution over `f64`.
pub type SkorokhodPath = reflectsde::SkorokhodSolution<f64>;
