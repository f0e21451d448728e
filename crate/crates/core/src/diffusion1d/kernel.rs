use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, NodeMap};
use crate::special::{bessel_i_scaled, gaussian_derivative, heat, ln_gamma, normal_cdf, upper_gamma_q};

use super::spec::{BoundaryBehavior, DiffusionSpec, Family};
use super::spectral::{interval_spectrum, JacobiSpectrum, SpectralKernel};

/// Provenance of a kernel's density evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelSource {
    ClosedForm,
    SpectralSeries,
}

/// Family-specific evaluators behind a [`TransitionKernel`].
pub trait KernelImpl: Send + Sync {
    fn density(&self, t: f64, x: f64, y: f64) -> f64;

    fn try_density(&self, t: f64, x: f64, y: f64) -> Result<f64> {
        Ok(self.density(t, x, y))
    }

    fn atom_l(&self, _t: f64, _x: f64) -> f64 {
        0.0
    }

    fn atom_r(&self, _t: f64, _x: f64) -> f64 {
        0.0
    }

    /// `∫_l^y p_t(x, z) dz` when known in closed form.
    fn interior_cdf(&self, _t: f64, _x: f64, _y: f64) -> Option<f64> {
        None
    }

    /// `∂_y^k p_t(x, y)` when known analytically.
    fn dy(&self, _t: f64, _x: f64, _y: f64, _k: usize) -> Option<f64> {
        None
    }

    /// `∂_x^k p_t(x, y)` when known analytically.
    fn dx(&self, _t: f64, _x: f64, _y: f64, _k: usize) -> Option<f64> {
        None
    }

    /// Interval outside which `p_t(x, ·)` carries negligible mass.
    fn window(&self, t: f64, x: f64) -> (f64, f64);

    fn lower_map(&self) -> NodeMap {
        NodeMap::Linear
    }
}

/// Transition density of a catalog diffusion with explicit boundary atoms.
#[derive(Clone)]
pub struct TransitionKernel {
    imp: Arc<dyn KernelImpl>,
    pub name: String,
    pub l: f64,
    pub r: f64,
    pub source: KernelSource,
    /// Highest derivative order served (analytic or by differences).
    pub max_derivative_order: usize,
}

impl std::fmt::Debug for TransitionKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransitionKernel")
            .field("name", &self.name)
            .field("interval", &(self.l, self.r))
            .field("source", &self.source)
            .finish()
    }
}

const MAX_DERIVATIVE: usize = 4;

impl TransitionKernel {
    pub fn from_impl(name: &str, l: f64, r: f64, source: KernelSource, imp: Arc<dyn KernelImpl>) -> Self {
        Self { imp, name: name.to_string(), l, r, source, max_derivative_order: MAX_DERIVATIVE }
    }

    /// Interior density; zero outside the open interval.
    #[inline]
    pub fn density(&self, t: f64, x: f64, y: f64) -> f64 {
        if y <= self.l || y >= self.r {
            return 0.0;
        }
        self.imp.density(t, x, y)
    }

    pub fn try_density(&self, t: f64, x: f64, y: f64) -> Result<f64> {
        if y <= self.l || y >= self.r {
            return Ok(0.0);
        }
        self.imp.try_density(t, x, y)
    }

    pub fn atom_l(&self, t: f64, x: f64) -> f64 {
        self.imp.atom_l(t, x)
    }

    pub fn atom_r(&self, t: f64, x: f64) -> f64 {
        self.imp.atom_r(t, x)
    }

    pub fn window(&self, t: f64, x: f64) -> (f64, f64) {
        let (lo, hi) = self.imp.window(t, x);
        (lo.max(self.l), hi.min(self.r))
    }

    pub fn lower_map(&self) -> NodeMap {
        self.imp.lower_map()
    }

    /// `∫_l^y p_t(x, z) dz` (interior mass only).
    pub fn interior_cdf(&self, t: f64, x: f64, y: f64) -> f64 {
        if y <= self.l {
            return 0.0;
        }
        if let Some(v) = self.imp.interior_cdf(t, x, y) {
            return v;
        }
        let (lo, hi) = self.window(t, x);
        let top = y.min(self.r);
        if top <= lo {
            return 0.0;
        }
        if top >= hi {
            return self.interior_mass(t, x);
        }
        let r = quad::adaptive(|z| self.density(t, x, z), lo, top, 1e-15, 1e-13, 2000);
        r.value
    }

    /// `∫_y^r p_t(x, z) dz` (interior mass only).
    pub fn interior_sf(&self, t: f64, x: f64, y: f64) -> f64 {
        if y >= self.r {
            return 0.0;
        }
        if let Some(v) = self.imp.interior_cdf(t, x, y) {
            if let Some(total) = self.imp.interior_cdf(t, x, f64::INFINITY.min(self.r)) {
                return total - v;
            }
        }
        let (lo, hi) = self.window(t, x);
        let bottom = y.max(self.l);
        if bottom >= hi {
            return 0.0;
        }
        if bottom <= lo {
            return self.interior_mass(t, x);
        }
        let r = quad::adaptive(|z| self.density(t, x, z), bottom, hi, 1e-15, 1e-13, 2000);
        r.value
    }

    /// Total interior mass `∫ p_t(x, ·)`.
    pub fn interior_mass(&self, t: f64, x: f64) -> f64 {
        if let Some(v) = self.imp.interior_cdf(t, x, self.r) {
            return v;
        }
        let (lo, hi) = self.window(t, x);
        let r = quad::adaptive(|z| self.density(t, x, z), lo, hi, 1e-15, 1e-13, 4000);
        r.value
    }

    /// Markov semigroup applied to `1_{[l, y]}`, atom at `l` included.
    pub fn cdf(&self, t: f64, x: f64, y: f64) -> f64 {
        self.atom_l(t, x) + self.interior_cdf(t, x, y)
    }

    /// Markov semigroup applied to `1_{[y, r]}`, atom at `r` included.
    pub fn sf(&self, t: f64, x: f64, y: f64) -> f64 {
        self.atom_r(t, x) + self.interior_sf(t, x, y)
    }

    /// `∂_y^k p_t(x, y)`: analytic where available, else Richardson
    /// differences of the highest analytic lower order.
    pub fn dy(&self, t: f64, x: f64, y: f64, k: usize) -> Result<f64> {
        if k > self.max_derivative_order {
            return Err(Error::Domain(format!("{}: derivative order {k} not served", self.name)));
        }
        if k == 0 {
            return self.try_density(t, x, y);
        }
        if let Some(v) = self.imp.dy(t, x, y, k) {
            return Ok(v);
        }
        let base = (0..k).rev().find(|&j| j == 0 || self.imp.dy(t, x, y, j).is_some()).unwrap_or(0);
        let f = |u: f64| if base == 0 { self.density(t, x, u) } else { self.imp.dy(t, x, u, base).unwrap_or(f64::NAN) };
        richardson_derivative(f, y, k - base, self.l, self.r)
    }

    /// `∂_x^k p_t(x, y)`.
    pub fn dx(&self, t: f64, x: f64, y: f64, k: usize) -> Result<f64> {
        if k > self.max_derivative_order {
            return Err(Error::Domain(format!("{}: derivative order {k} not served", self.name)));
        }
        if k == 0 {
            return self.try_density(t, x, y);
        }
        if let Some(v) = self.imp.dx(t, x, y, k) {
            return Ok(v);
        }
        let base = (0..k).rev().find(|&j| j == 0 || self.imp.dx(t, x, y, j).is_some()).unwrap_or(0);
        let f = |u: f64| if base == 0 { self.imp.density(t, u, y) } else { self.imp.dx(t, u, y, base).unwrap_or(f64::NAN) };
        richardson_derivative(f, x, k - base, self.l, self.r)
    }
}

/// Base step for a `k`-th difference, before scaling by `max(1, |x|)`.
fn base_step(k: usize) -> f64 {
    match k {
        1 => 1e-5,
        2 => 1e-3,
        3 => 4e-3,
        _ => 1e-2,
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Central `k`-th difference with Richardson extrapolation (error O(h⁴)).
///
/// The stencil is shrunk to stay inside `(lo, hi)`; a stencil that would
/// need a step below 1e−3 of the nominal one is a degenerate input.
pub fn richardson_derivative(f: impl Fn(f64) -> f64, x: f64, k: usize, lo: f64, hi: f64) -> Result<f64> {
    if k == 0 {
        return Ok(f(x));
    }
    let nominal = base_step(k) * x.abs().max(1.0);
    let reach = 0.5 * k as f64;
    let room = (x - lo).min(hi - x);
    let mut h = nominal;
    if reach * h >= room {
        h = 0.9 * room / reach;
    }
    if !(h >= 1e-3 * nominal) {
        return Err(Error::DegenerateInput(format!(
            "difference stencil of order {k} at {x} does not fit inside ({lo}, {hi})"
        )));
    }
    let diff = |h: f64| -> f64 {
        let mut s = 0.0;
        for i in 0..=k {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * binomial(k, i) * f(x + (reach - i as f64) * h);
        }
        s / h.powi(k as i32)
    };
    let d1 = diff(h);
    let d2 = diff(0.5 * h);
    let v = (4.0 * d2 - d1) / 3.0;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::DegenerateInput(format!("non-finite difference quotient at {x}")))
    }
}

const GAUSS_WINDOW: f64 = 8.5;

/// Gaussian kernel `N(x + μt, t)`.
pub struct GaussKernel {
    pub mu: f64,
}

impl KernelImpl for GaussKernel {
    fn density(&self, t: f64, x: f64, y: f64) -> f64 {
        heat(t, y - x - self.mu * t)
    }
    fn interior_cdf(&self, t: f64, x: f64, y: f64) -> Option<f64> {
        Some(normal_cdf((y - x - self.mu * t) / t.sqrt()))
    }
    fn dy(&self, t: f64, x: f64, y: f64, k: usize) -> Option<f64> {
        Some(gaussian_derivative(k, x + self.mu * t, t, y))
    }
    fn dx(&self, t: f64, x: f64, y: f64, k: usize) -> Option<f64> {
        let s = if k % 2 == 0 { 1.0 } else { -1.0 };
        Some(s * gaussian_derivative(k, x + self.mu * t, t, y))
    }
    fn window(&self, t: f64, x: f64) -> (f64, f64) {
        let m = x + self.mu * t;
        let w = GAUSS_WINDOW * t.sqrt();
        (m - w, m + w)
    }
}

/// BM on [0, ∞) by the image method.
pub struct HalfLineKernel {
    pub reflecting: bool,
}

impl HalfLineKernel {
    fn sign(&self) -> f64 {
        if self.reflecting { 1.0 } else { -1.0 }
    }
}

impl KernelImpl for HalfLineKernel {
    fn density(&self, t: f64, x: f64, y: f64) -> f64 {
        heat(t, y - x) + self.sign() * heat(t, y + x)
    }
    fn atom_l(&self, t: f64, x: f64) -> f64 {
        if self.reflecting { 0.0 } else { 2.0 * normal_cdf(-x / t.sqrt()) }
    }
    fn interior_cdf(&self, t: f64, x: f64, y: f64) -> Option<f64> {
        let s = t.sqrt();
        let direct = normal_cdf((y - x) / s) - normal_cdf(-x / s);
        let image = normal_cdf((y + x) / s) - normal_cdf(x / s);
        Some(direct + self.sign() * image)
    }
    fn dy(&self, t: f64, x: f64, y: f64, k: usize) -> Option<f64> {
        Some(gaussian_derivative(k, x, t, y) + self.sign() * gaussian_derivative(k, -x, t, y))
    }
    fn dx(&self, t: f64, x: f64, y: f64, k: usize) -> Option<f64> {
        let s = if k % 2 == 0 { 1.0 } else { -1.0 };
        // The image term depends on y + x, so x-derivatives carry no sign flip.
        Some(s * gaussian_derivative(k, x, t, y) + self.sign() * gaussian_derivative(k, -x, t, y))
    }
    fn window(&self, t: f64, x: f64) -> (f64, f64) {
        let w = GAUSS_WINDOW * t.sqrt();
        (x - w, x + w)
    }
}

/// BM on [0, π] with reflecting/absorbing ends.
pub struct IntervalKernel {
    pub refl_l: bool,
    pub refl_r: bool,
    spectral: SpectralKernel,
}

impl IntervalKernel {
    pub fn new(refl_l: bool, refl_r: bool) -> Self {
        Self { refl_l, refl_r, spectral: SpectralKernel::new(Box::new(interval_spectrum(refl_l, refl_r))) }
    }

    /// Sign pattern of the images `(shift 2nπ, direct/mirrored)`.
    fn image_sum(&self, t: f64, x: f64, y: f64, g: impl Fn(f64) -> f64) -> f64 {
        let two_pi = 2.0 * std::f64::consts::PI;
        let mirror = if self.refl_l { 1.0 } else { -1.0 };
        let alternate = self.refl_l != self.refl_r;
        let reach = (GAUSS_WINDOW + 2.0) * t.sqrt();
        let nmax = (reach / two_pi).ceil() as i64 + 1;
        let mut s = 0.0;
        for n in -nmax..=nmax {
            let sn = if alternate && n.rem_euclid(2) == 1 { -1.0 } else { 1.0 };
            let shift = two_pi * n as f64;
            s += sn * (g(y - x + shift) + mirror * g(y + x + shift));
        }
        s
    }

    /// Density by the method of images.
    pub fn density_image(&self, t: f64, x: f64, y: f64) -> f64 {
        self.image_sum(t, x, y, |u| heat(t, u))
    }

    /// Density by the sine/cosine eigen-expansion.
    pub fn density_spectral(&self, t: f64, x: f64, y: f64) -> Result<f64> {
        self.spectral.try_density(t, x, y)
    }
}

impl KernelImpl for IntervalKernel {
    fn density(&self, t: f64, x: f64, y: f64) -> f64 {
        self.try_density(t, x, y).unwrap_or(f64::NAN)
    }
    fn try_density(&self, t: f64, x: f64, y: f64) -> Result<f64> {
        if t >= 0.25 { self.density_spectral(t, x, y) } else { Ok(self.density_image(t, x, y)) }
    }
    fn atom_l(&self, t: f64, x: f64) -> f64 {
        if self.refl_l {
            return 0.0;
        }
        let total = 1.0 - self.interior_cdf(t, x, std::f64::consts::PI).unwrap_or(f64::NAN);
        if !self.refl_r {
            // Split of the absorbed mass between the two ends.
            let pi = std::f64::consts::PI;
            let mut s = 1.0 - x / pi;
            for k in 1..=4096 {
                let kf = k as f64;
                let decay = (-0.5 * kf * kf * t).exp();
                s -= 2.0 / (kf * pi) * decay * (kf * x).sin();
                if decay < 1e-17 {
                    break;
                }
            }
            return s;
        }
        total
    }
    fn atom_r(&self, t: f64, x: f64) -> f64 {
        if self.refl_r {
            return 0.0;
        }
        let total = 1.0 - self.interior_cdf(t, x, std::f64::consts::PI).unwrap_or(f64::NAN);
        if self.refl_l { total } else { total - self.atom_l(t, x) }
    }
    fn interior_cdf(&self, t: f64, x: f64, y: f64) -> Option<f64> {
        let s = t.sqrt();
        let y = y.min(std::f64::consts::PI);
        // ∫_0^y of each image Gaussian.
        let two_pi = 2.0 * std::f64::consts::PI;
        let mirror = if self.refl_l { 1.0 } else { -1.0 };
        let alternate = self.refl_l != self.refl_r;
        let nmax = (((GAUSS_WINDOW + 2.0) * s) / two_pi).ceil() as i64 + 1;
        let mut acc = 0.0;
        for n in -nmax..=nmax {
            let sn = if alternate && n.rem_euclid(2) == 1 { -1.0 } else { 1.0 };
            let shift = two_pi * n as f64;
            let direct = normal_cdf((y - x + shift) / s) - normal_cdf((-x + shift) / s);
            let image = normal_cdf((y + x + shift) / s) - normal_cdf((x + shift) / s);
            acc += sn * (direct + mirror * image);
        }
        Some(acc)
    }
    fn dy(&self, t: f64, x: f64, y: f64, k: usize) -> Option<f64> {
        Some(self.image_sum(t, x, y, |u| gaussian_derivative(k, 0.0, t, u)))
    }
    fn dx(&self, t: f64, x: f64, y: f64, k: usize) -> Option<f64> {
        let two_pi = 2.0 * std::f64::consts::PI;
        let mirror = if self.refl_l { 1.0 } else { -1.0 };
        let alternate = self.refl_l != self.refl_r;
        let nmax = (((GAUSS_WINDOW + 2.0) * t.sqrt()) / two_pi).ceil() as i64 + 1;
        let sx = if k % 2 == 0 { 1.0 } else { -1.0 };
        let mut s = 0.0;
        for n in -nmax..=nmax {
            let sn = if alternate && n.rem_euclid(2) == 1 { -1.0 } else { 1.0 };
            let shift = two_pi * n as f64;
            s += sn
                * (sx * gaussian_derivative(k, 0.0, t, y - x + shift)
                    + mirror * gaussian_derivative(k, 0.0, t, y + x + shift));
        }
        Some(s)
    }
    fn window(&self, _t: f64, _x: f64) -> (f64, f64) {
        (0.0, std::f64::consts::PI)
    }
}

/// Ornstein–Uhlenbeck (Mehler) kernel for `b = −θx`, any sign of θ.
pub struct OuKernel {
    pub theta: f64,
}

impl OuKernel {
    fn moments(&self, t: f64, x: f64) -> (f64, f64, f64) {
        let th = self.theta;
        let e = (-th * t).exp();
        let var = if th.abs() < 1e-12 { t } else { -(-2.0 * th * t).exp_m1() / (2.0 * th) };
        (x * e, var, e)
    }
}

impl KernelImpl for OuKernel {
    fn density(&self, t: f64, x: f64, y: f64) -> f64 {
        let (m, v, _) = self.moments(t, x);
        heat(v, y - m)
    }
    fn interior_cdf(&self, t: f64, x: f64, y: f64) -> Option<f64> {
        let (m, v, _) = self.moments(t, x);
        Some(normal_cdf((y - m) / v.sqrt()))
    }
    fn dy(&self, t: f64, x: f64, y: f64, k: usize) -> Option<f64> {
        let (m, v, _) = self.moments(t, x);
        Some(gaussian_derivative(k, m, v, y))
    }
    fn dx(&self, t: f64, x: f64, y: f64, k: usize) -> Option<f64> {
        let (m, v, e) = self.moments(t, x);
        Some((-e).powi(k as i32) * gaussian_derivative(k, m, v, y))
    }
    fn window(&self, t: f64, x: f64) -> (f64, f64) {
        let (m, v, _) = self.moments(t, x);
        let w = GAUSS_WINDOW * v.sqrt();
        (m - w, m + w)
    }
}

/// `a = 2x`, `b = δ + κx` on (0, ∞): BESQ(δ) run on the clock
/// `τ = (1 − e^{−κt})/κ` and rescaled by `e^{κt}`.
pub struct CirKernel {
    pub delta: f64,
    pub kappa: f64,
    /// Killed at 0 (exit or regular absorbing).
    pub killed: bool,
}

impl CirKernel {
    fn nu(&self) -> f64 {
        0.5 * self.delta - 1.0
    }
    fn mu(&self) -> f64 {
        if self.killed { self.nu().abs() } else { self.nu() }
    }
    /// `(τ, e^{κt})`.
    fn clock(&self, t: f64) -> (f64, f64) {
        let k = self.kappa;
        if k.abs() < 1e-14 {
            (t, 1.0)
        } else {
            (-(-k * t).exp_m1() / k, (k * t).exp())
        }
    }

    /// BESQ(δ) density and the `I_{μ+1}` companion term at clock τ.
    fn besq_parts(&self, tau: f64, x: f64, y: f64) -> (f64, f64) {
        let nu = self.nu();
        let mu = self.mu();
        if y <= 0.0 {
            return (0.0, 0.0);
        }
        if x <= 0.0 {
            if self.killed {
                return (0.0, 0.0);
            }
            let lp = nu * y.ln() - y / (2.0 * tau) - (nu + 1.0) * (2.0 * tau).ln() - ln_gamma(nu + 1.0);
            return (lp.exp(), 0.0);
        }
        let z = (x * y).sqrt() / tau;
        let sx = x.sqrt();
        let sy = y.sqrt();
        let base = -(2.0 * tau).ln() + 0.5 * nu * (y / x).ln() - (sx - sy).powi(2) / (2.0 * tau);
        let p = base.exp() * bessel_i_scaled(mu, z);
        let q = base.exp() * bessel_i_scaled(mu + 1.0, z);
        (p, q)
    }

    fn besq_density(&self, tau: f64, x: f64, y: f64) -> f64 {
        self.besq_parts(tau, x, y).0
    }
}

impl KernelImpl for CirKernel {
    fn density(&self, t: f64, x: f64, y: f64) -> f64 {
        let (tau, g) = self.clock(t);
        self.besq_density(tau, x, y / g) / g
    }
    fn atom_l(&self, t: f64, x: f64) -> f64 {
        if !self.killed {
            return 0.0;
        }
        if x <= 0.0 {
            return 1.0;
        }
        let (tau, _) = self.clock(t);
        upper_gamma_q(self.nu().abs(), x / (2.0 * tau))
    }
    fn dy(&self, t: f64, x: f64, y: f64, k: usize) -> Option<f64> {
        if k != 1 || y <= 0.0 {
            return None;
        }
        let (tau, g) = self.clock(t);
        let yb = y / g;
        let (p, q) = self.besq_parts(tau, x, yb);
        let nu = self.nu();
        let d = if x <= 0.0 {
            p * (nu / yb - 1.0 / (2.0 * tau))
        } else {
            let z = (x * yb).sqrt() / tau;
            p * ((nu + self.mu()) / (2.0 * yb) - 1.0 / (2.0 * tau)) + q * z / (2.0 * yb)
        };
        Some(d / (g * g))
    }
    fn dx(&self, t: f64, x: f64, y: f64, k: usize) -> Option<f64> {
        if k != 1 || x <= 0.0 || y <= 0.0 {
            return None;
        }
        let (tau, g) = self.clock(t);
        let yb = y / g;
        let (p, q) = self.besq_parts(tau, x, yb);
        let z = (x * yb).sqrt() / tau;
        let d = p * ((self.mu() - self.nu()) / (2.0 * x) - 1.0 / (2.0 * tau)) + q * z / (2.0 * x);
        Some(d / g)
    }
    fn window(&self, t: f64, x: f64) -> (f64, f64) {
        let (tau, g) = self.clock(t);
        let d = self.delta.max(0.0);
        let mean = x + d * tau;
        let sd = (4.0 * x * tau + 2.0 * d * tau * tau).sqrt();
        let lo = (x.sqrt() - 9.0 * tau.sqrt()).max(0.0).powi(2);
        (g * lo, g * (mean + 12.0 * sd + 40.0 * tau))
    }
    fn lower_map(&self) -> NodeMap {
        NodeMap::SqrtLower
    }
}

/// Geometric BM: `log X_t ~ N(log x + (α − 1/2)t, t)`.
pub struct GbmKernel {
    pub alpha: f64,
}

impl KernelImpl for GbmKernel {
    fn density(&self, t: f64, x: f64, y: f64) -> f64 {
        if y <= 0.0 || x <= 0.0 {
            return 0.0;
        }
        let m = x.ln() + (self.alpha - 0.5) * t;
        heat(t, y.ln() - m) / y
    }
    fn interior_cdf(&self, t: f64, x: f64, y: f64) -> Option<f64> {
        if y <= 0.0 {
            return Some(0.0);
        }
        if y.is_infinite() {
            return Some(1.0);
        }
        let m = x.ln() + (self.alpha - 0.5) * t;
        Some(normal_cdf((y.ln() - m) / t.sqrt()))
    }
    fn window(&self, t: f64, x: f64) -> (f64, f64) {
        let m = x.ln() + (self.alpha - 0.5) * t;
        let w = GAUSS_WINDOW * t.sqrt();
        ((m - w).exp(), (m + w).exp())
    }
    fn lower_map(&self) -> NodeMap {
        NodeMap::Log
    }
}

/// Transition kernel of a catalog diffusion.
pub fn kernel(spec: &DiffusionSpec) -> Result<TransitionKernel> {
    let (imp, source): (Arc<dyn KernelImpl>, KernelSource) = match spec.family {
        Family::Bm { mu } => (Arc::new(GaussKernel { mu }), KernelSource::ClosedForm),
        Family::HalfLine => (
            Arc::new(HalfLineKernel { reflecting: spec.behavior_l == BoundaryBehavior::RegularReflecting }),
            KernelSource::ClosedForm,
        ),
        Family::Interval => (
            Arc::new(IntervalKernel::new(
                spec.behavior_l == BoundaryBehavior::RegularReflecting,
                spec.behavior_r == BoundaryBehavior::RegularReflecting,
            )),
            KernelSource::SpectralSeries,
        ),
        Family::Ou { theta } => (Arc::new(OuKernel { theta }), KernelSource::ClosedForm),
        Family::Cir { delta, kappa } => {
            (Arc::new(CirKernel { delta, kappa, killed: spec.behavior_l.is_absorbing() }), KernelSource::ClosedForm)
        }
        Family::Jacobi { beta, gamma } => {
            if spec.behavior_l.is_absorbing() || spec.behavior_r.is_absorbing() || beta <= 0.0 || gamma <= 0.0 {
                return Err(Error::Catalog(format!(
                    "{}: only non-absorbing Jacobi kernels (β, γ > 0) are in the catalog",
                    spec.name
                )));
            }
            (Arc::new(SpectralKernel::new(Box::new(JacobiSpectrum::new(beta, gamma)))), KernelSource::SpectralSeries)
        }
        Family::Gbm { alpha } => (Arc::new(GbmKernel { alpha }), KernelSource::ClosedForm),
        Family::Custom => {
            return Err(Error::Catalog(format!("{}: no transition kernel for user-supplied coefficients", spec.name)))
        }
    };
    Ok(TransitionKernel::from_impl(&spec.name, spec.l, spec.r, source, imp))
}
