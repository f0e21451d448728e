use crate::error::{Error, Result};

use super::kernel::{kernel, richardson_derivative, TransitionKernel};
use super::scale::{scale_speed, ScaleSpeed};
use super::spec::DiffusionSpec;

/// A diffusion together with its conjugate, kernels prebuilt.
#[derive(Clone, Debug)]
pub struct DualPair {
    pub spec: DiffusionSpec,
    pub dual_spec: DiffusionSpec,
    pub kernel: TransitionKernel,
    pub dual: TransitionKernel,
}

impl DualPair {
    pub fn new(spec: &DiffusionSpec) -> Result<Self> {
        let dual_spec = spec.conjugate()?;
        Ok(Self { kernel: kernel(spec)?, dual: kernel(&dual_spec)?, spec: spec.clone(), dual_spec })
    }

    /// `|P_t 1_{[l,y]}(x) − P̂_t 1_{[x,r]}(y)|`, atoms included on both sides.
    pub fn duality_residual(&self, t: f64, x: f64, y: f64) -> Result<f64> {
        interior_check(&self.spec, x)?;
        interior_check(&self.spec, y)?;
        let lhs = self.kernel.cdf(t, x, y);
        let rhs = self.dual.sf(t, y, x);
        Ok((lhs - rhs).abs())
    }

    /// `|p̂_t(x, y) + ∂_y P_t 1_{[l,x]}(y)|` by Richardson differences.
    pub fn conjugate_density_residual(&self, t: f64, x: f64, y: f64) -> Result<f64> {
        interior_check(&self.spec, x)?;
        interior_check(&self.spec, y)?;
        let d = richardson_derivative(|u| self.kernel.cdf(t, u, x), y, 1, self.spec.l, self.spec.r)?;
        Ok((self.dual.density(t, x, y) + d).abs())
    }
}

fn interior_check(spec: &DiffusionSpec, x: f64) -> Result<()> {
    if spec.is_interior(x) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{}: {x} is not interior", spec.name)))
    }
}

/// Duality residual of Siegmund type for a catalog diffusion.
pub fn duality_residual(spec: &DiffusionSpec, t: f64, x: f64, y: f64) -> Result<f64> {
    DualPair::new(spec)?.duality_residual(t, x, y)
}

/// Residual of `p̂_t(x, y) = −∂_y ∫_l^x p_t(y, dz)`.
pub fn conjugate_density_residual(spec: &DiffusionSpec, t: f64, x: f64, y: f64) -> Result<f64> {
    DualPair::new(spec)?.conjugate_density_residual(t, x, y)
}

/// Reversibility residual `|m(y) p_t(y, x) − m(x) p_t(x, y)|`.
pub fn symmetry_residual(kernel: &TransitionKernel, ss: &ScaleSpeed, t: f64, x: f64, y: f64) -> f64 {
    (ss.m(y) * kernel.density(t, y, x) - ss.m(x) * kernel.density(t, x, y)).abs()
}

/// Speed density of the conjugate diffusion, `m̂ = s′/a(c)`.
pub fn dual_speed(spec: &DiffusionSpec) -> Result<ScaleSpeed> {
    scale_speed(&spec.conjugate()?)
}
