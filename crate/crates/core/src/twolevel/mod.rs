//! Two-level interlacing processes: block-determinant kernels, the fiber
//! operator Λ and the intertwining checks built on them.

mod block;
mod ops;
mod shape;
mod testfn;

pub use block::{block_kernel, BlockKernelEval, Residual, TwoLevel};
pub use ops::{chapman_residual, dynkin_residual, lambda_apply, master_intertwining_residual, submarkov_mass};
pub use shape::{InterlacingConfig, InterlacingShape, ShapeTag};
pub use testfn::{Factor, Term, TestFunction};
