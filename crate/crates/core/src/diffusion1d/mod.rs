//! One-dimensional diffusion calculus: scale and speed, conjugation, Feller
//! boundary classification, catalog transition kernels and the duality
//! identities between a diffusion and its conjugate.

mod classify;
mod duality;
mod kernel;
mod scale;
mod spec;
mod spectral;

pub use classify::{boundary_report, check_behaviors, classify_boundary, BoundaryReport, Finiteness};
pub use duality::{conjugate_density_residual, dual_speed, duality_residual, symmetry_residual, DualPair};
pub use kernel::{
    kernel, richardson_derivative, CirKernel, GaussKernel, GbmKernel, HalfLineKernel, IntervalKernel, KernelImpl,
    KernelSource, OuKernel, TransitionKernel,
};
pub use scale::{scale_speed, ScaleSpeed};
pub use spec::{
    besq, besq_absorbed, bm, bm_drift, bm_halfline, bm_interval, catalog, cir_with, gbm, jacobi, jacobi_with,
    laguerre, ou, BoundaryBehavior, BoundaryClass, Coef, DiffusionSpec, Endpoint, Family, PolyCoeffs,
};
pub use spectral::{
    interval_spectrum, modes_needed, spectrum, DiscreteSpectrum, IntervalSpectrum, JacobiSpectrum,
    LaguerreSpectrum, OuSpectrum, SpectralKernel, SPECTRAL_CAP, SPECTRAL_TOL,
};
