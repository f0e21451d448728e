use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::special::{hermite_orthonormal, jacobi_sequence, laguerre_sequence, ln_gamma};

use super::kernel::KernelImpl;
use super::spec::{DiffusionSpec, Family};

/// Discrete spectrum `(λ_k, φ_k)` with `φ_k` orthonormal in `L²(m)`.
pub trait DiscreteSpectrum: Send + Sync {
    /// Decay rate `λ_k ≥ 0` of mode k, ascending in k.
    fn rate(&self, k: usize) -> f64;
    /// `φ_0(x), …, φ_{len−1}(x)`.
    fn eigenfunctions(&self, len: usize, x: f64, out: &mut Vec<f64>);
    /// The speed density the modes are normalized against.
    fn speed(&self, y: f64) -> f64;
    /// Upper bound for `|φ_k(x)|`, used by the truncation rule.
    fn bound(&self, k: usize, x: f64) -> f64;
    fn interval(&self) -> (f64, f64);
    /// Quadrature window for `p_t(x, ·)`; the whole interval unless overridden.
    fn window(&self, _t: f64, _x: f64) -> (f64, f64) {
        self.interval()
    }
}

pub const SPECTRAL_TOL: f64 = 1e-12;
pub const SPECTRAL_CAP: usize = 512;

/// Number of modes needed at `(t, x, y)` so that the next term's bound is
/// below [`SPECTRAL_TOL`].
pub fn modes_needed(sp: &dyn DiscreteSpectrum, t: f64, x: f64, y: f64) -> Result<usize> {
    let my = sp.speed(y);
    for k in 0..SPECTRAL_CAP {
        let b = (-sp.rate(k) * t).exp() * sp.bound(k, x) * sp.bound(k, y) * my;
        if b < SPECTRAL_TOL && k > 0 {
            return Ok(k);
        }
    }
    let k = SPECTRAL_CAP;
    Err(Error::Truncation { terms: k, tail: (-sp.rate(k) * t).exp() * sp.bound(k, x) * sp.bound(k, y) * my })
}

/// Density `m(y) Σ_k e^{−λ_k t} φ_k(x) φ_k(y)` of a discrete-spectrum family.
pub struct SpectralKernel {
    spectrum: Box<dyn DiscreteSpectrum>,
}

impl SpectralKernel {
    pub fn new(spectrum: Box<dyn DiscreteSpectrum>) -> Self {
        Self { spectrum }
    }

    pub fn spectrum(&self) -> &dyn DiscreteSpectrum {
        self.spectrum.as_ref()
    }
}

impl KernelImpl for SpectralKernel {
    fn density(&self, t: f64, x: f64, y: f64) -> f64 {
        self.try_density(t, x, y).unwrap_or(f64::NAN)
    }

    fn try_density(&self, t: f64, x: f64, y: f64) -> Result<f64> {
        let sp = self.spectrum.as_ref();
        let k = modes_needed(sp, t, x, y)?;
        let mut fx = Vec::with_capacity(k);
        let mut fy = Vec::with_capacity(k);
        sp.eigenfunctions(k, x, &mut fx);
        sp.eigenfunctions(k, y, &mut fy);
        let s: f64 = (0..k).map(|i| (-sp.rate(i) * t).exp() * fx[i] * fy[i]).sum();
        Ok(sp.speed(y) * s)
    }

    fn window(&self, t: f64, x: f64) -> (f64, f64) {
        self.spectrum.window(t, x)
    }
}

/// Sine/cosine modes of standard BM on [0, π].
pub struct IntervalSpectrum {
    pub refl_l: bool,
    pub refl_r: bool,
}

pub fn interval_spectrum(refl_l: bool, refl_r: bool) -> IntervalSpectrum {
    IntervalSpectrum { refl_l, refl_r }
}

impl IntervalSpectrum {
    /// Frequency of mode k.
    fn freq(&self, k: usize) -> f64 {
        let kf = k as f64;
        match (self.refl_l, self.refl_r) {
            (false, false) => kf + 1.0,
            (true, true) => kf,
            _ => kf + 0.5,
        }
    }
}

impl DiscreteSpectrum for IntervalSpectrum {
    fn rate(&self, k: usize) -> f64 {
        0.5 * self.freq(k).powi(2)
    }
    fn eigenfunctions(&self, len: usize, x: f64, out: &mut Vec<f64>) {
        out.clear();
        // Orthonormal in L²(2 dx): the speed of standard BM is 2.
        let c = (1.0 / PI).sqrt();
        for k in 0..len {
            let w = self.freq(k);
            let v = if self.refl_l {
                if w == 0.0 { (0.5f64).sqrt() * c } else { c * (w * x).cos() }
            } else {
                c * (w * x).sin()
            };
            out.push(v);
        }
    }
    fn speed(&self, _y: f64) -> f64 {
        2.0
    }
    fn bound(&self, _k: usize, _x: f64) -> f64 {
        (1.0 / PI).sqrt()
    }
    fn interval(&self) -> (f64, f64) {
        (0.0, PI)
    }
}

/// Hermite modes of `a = 1/2`, `b = −θx`, θ > 0.
pub struct OuSpectrum {
    pub theta: f64,
}

impl DiscreteSpectrum for OuSpectrum {
    fn rate(&self, k: usize) -> f64 {
        self.theta * k as f64
    }
    fn eigenfunctions(&self, len: usize, x: f64, out: &mut Vec<f64>) {
        hermite_orthonormal(len, self.theta.sqrt() * x, out);
        let c = self.theta.powf(0.25) / 2f64.sqrt();
        for v in out.iter_mut() {
            *v *= c;
        }
    }
    fn speed(&self, y: f64) -> f64 {
        2.0 * (-self.theta * y * y).exp()
    }
    fn bound(&self, _k: usize, x: f64) -> f64 {
        // Cramér's inequality for Hermite functions.
        1.086_435 * PI.powf(-0.25) * self.theta.powf(0.25) / 2f64.sqrt() * (0.5 * self.theta * x * x).exp()
    }
    fn interval(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
    fn window(&self, t: f64, x: f64) -> (f64, f64) {
        let th = self.theta;
        let m = x * (-th * t).exp();
        let v = -(-2.0 * th * t).exp_m1() / (2.0 * th);
        (m - 8.5 * v.sqrt(), m + 8.5 * v.sqrt())
    }
}

/// Laguerre modes of `a = 2x`, `b = δ + κx` with κ < 0, δ > 0, 0 not killing.
pub struct LaguerreSpectrum {
    pub delta: f64,
    pub kappa: f64,
}

impl LaguerreSpectrum {
    fn c(&self) -> f64 {
        -0.5 * self.kappa
    }
    fn alpha(&self) -> f64 {
        0.5 * self.delta - 1.0
    }
    fn log_norm(&self, k: usize) -> f64 {
        let a = self.alpha();
        -(a + 1.0) * self.c().ln() + ln_gamma(k as f64 + a + 1.0) - ln_gamma(k as f64 + 1.0)
    }
}

impl DiscreteSpectrum for LaguerreSpectrum {
    fn rate(&self, k: usize) -> f64 {
        2.0 * self.c() * k as f64
    }
    fn eigenfunctions(&self, len: usize, x: f64, out: &mut Vec<f64>) {
        laguerre_sequence(len, self.alpha(), self.c() * x, out);
        for (k, v) in out.iter_mut().enumerate() {
            *v *= (-0.5 * self.log_norm(k)).exp();
        }
    }
    fn speed(&self, y: f64) -> f64 {
        (self.alpha() * y.ln() - self.c() * y).exp()
    }
    fn bound(&self, k: usize, x: f64) -> f64 {
        let a = self.alpha();
        let binom = (ln_gamma(k as f64 + a.max(0.0) + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma(a.max(0.0) + 1.0)).exp();
        let b = if a >= 0.0 { binom } else { 2.0 };
        b * (0.5 * self.c() * x).exp() * (-0.5 * self.log_norm(k)).exp()
    }
    fn interval(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
    fn window(&self, t: f64, x: f64) -> (f64, f64) {
        // Stationary tail plus transient spread.
        let c = self.c();
        let hi = x + (self.delta + 60.0) / c + 20.0 * (x * t).sqrt() + 10.0;
        (0.0, hi)
    }
}

/// Jacobi-polynomial modes of `a = 2x(1−x)`, `b = 2(β − (β+γ)x)`, β, γ > 0.
pub struct JacobiSpectrum {
    pub beta: f64,
    pub gamma: f64,
}

impl JacobiSpectrum {
    pub fn new(beta: f64, gamma: f64) -> Self {
        Self { beta, gamma }
    }
    fn log_norm(&self, k: usize) -> f64 {
        let (b, g) = (self.beta, self.gamma);
        let kf = k as f64;
        if k == 0 {
            ln_gamma(b) + ln_gamma(g) - ln_gamma(b + g)
        } else {
            ln_gamma(kf + b) + ln_gamma(kf + g)
                - (2.0 * kf + b + g - 1.0).ln()
                - ln_gamma(kf + b + g - 1.0)
                - ln_gamma(kf + 1.0)
        }
    }
}

impl DiscreteSpectrum for JacobiSpectrum {
    fn rate(&self, k: usize) -> f64 {
        let kf = k as f64;
        2.0 * kf * (kf + self.beta + self.gamma - 1.0)
    }
    fn eigenfunctions(&self, len: usize, x: f64, out: &mut Vec<f64>) {
        jacobi_sequence(len, self.beta - 1.0, self.gamma - 1.0, 1.0 - 2.0 * x, out);
        for (k, v) in out.iter_mut().enumerate() {
            *v *= (-0.5 * self.log_norm(k)).exp();
        }
    }
    fn speed(&self, y: f64) -> f64 {
        ((self.beta - 1.0) * y.ln() + (self.gamma - 1.0) * (1.0 - y).ln()).exp()
    }
    fn bound(&self, k: usize, _x: f64) -> f64 {
        let q = (self.beta - 1.0).max(self.gamma - 1.0).max(0.0);
        let kf = k as f64;
        let binom = (ln_gamma(kf + q + 1.0) - ln_gamma(kf + 1.0) - ln_gamma(q + 1.0)).exp();
        binom.max(1.0) * (-0.5 * self.log_norm(k)).exp()
    }
    fn interval(&self) -> (f64, f64) {
        (0.0, 1.0)
    }
}

/// Discrete spectrum of a catalog diffusion, when it has one.
pub fn spectrum(spec: &DiffusionSpec) -> Result<Box<dyn DiscreteSpectrum>> {
    use super::spec::BoundaryBehavior as B;
    match spec.family {
        Family::Interval => Ok(Box::new(interval_spectrum(
            spec.behavior_l == B::RegularReflecting,
            spec.behavior_r == B::RegularReflecting,
        ))),
        Family::Ou { theta } if theta > 0.0 => Ok(Box::new(OuSpectrum { theta })),
        Family::Cir { delta, kappa } if kappa < 0.0 && delta > 0.0 && !spec.behavior_l.is_absorbing() => {
            Ok(Box::new(LaguerreSpectrum { delta, kappa }))
        }
        Family::Jacobi { beta, gamma }
            if beta > 0.0 && gamma > 0.0 && !spec.behavior_l.is_absorbing() && !spec.behavior_r.is_absorbing() =>
        {
            Ok(Box::new(JacobiSpectrum::new(beta, gamma)))
        }
        _ => Err(Error::Catalog(format!("{}: no discrete spectrum in the catalog", spec.name))),
    }
}
