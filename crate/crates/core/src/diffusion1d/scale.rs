use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quad;

use super::spec::DiffusionSpec;

/// Scale density, speed density and their cumulative versions from `c`.
///
/// `s′ = exp(−∫_c^x b/a)` exactly (no extra normalization), `m = 1/(s′a)`,
/// `s(c) = M(c) = 0`.
#[derive(Clone, Debug)]
pub struct ScaleSpeed {
    spec: Arc<DiffusionSpec>,
}

pub fn scale_speed(spec: &DiffusionSpec) -> Result<ScaleSpeed> {
    spec.check_coefficients()?;
    // Fails early when b/a is not integrable next to c.
    for x in spec.probe_points(5) {
        spec.log_scale_density(x)?;
    }
    Ok(ScaleSpeed { spec: Arc::new(spec.clone()) })
}

impl ScaleSpeed {
    pub fn spec(&self) -> &DiffusionSpec {
        &self.spec
    }

    pub fn log_s_prime(&self, x: f64) -> f64 {
        self.spec.log_scale_density(x).unwrap_or(f64::NAN)
    }

    pub fn s_prime(&self, x: f64) -> f64 {
        self.log_s_prime(x).exp()
    }

    /// Speed density; computed in log space so that `m·s′·a = 1` to rounding.
    pub fn m(&self, x: f64) -> f64 {
        (-self.log_s_prime(x) - self.spec.a(x).ln()).exp()
    }

    fn cumulative(&self, x: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
        let c = self.spec.c;
        if x == c {
            return Ok(0.0);
        }
        let (lo, hi, sign) = if x > c { (c, x, 1.0) } else { (x, c, -1.0) };
        let r = quad::adaptive(f, lo, hi, 1e-14, 1e-12, 4000);
        if !r.converged || !r.value.is_finite() {
            return Err(Error::Quadrature(format!("cumulative integral from c to {x} did not converge")));
        }
        Ok(sign * r.value)
    }

    /// Scale function `s(x) = ∫_c^x s′`.
    pub fn s(&self, x: f64) -> Result<f64> {
        self.cumulative(x, |u| self.s_prime(u))
    }

    /// Cumulative speed `M(x) = ∫_c^x m`.
    pub fn big_m(&self, x: f64) -> Result<f64> {
        self.cumulative(x, |u| self.m(u))
    }
}
