use std::fmt;
use std::sync::Arc;

use crate::diffusion1d::{bm_drift, bm_halfline, catalog, spectrum, DiffusionSpec, Family};
use crate::error::{Error, Result};
use crate::linalg::det_with;
use crate::quad::GaussLegendre;

use super::weyl::canonical_probe;

/// A one-dimensional evaluator.
pub type Component = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Determinant-form function `h(x) = ±det(h_i(x_j))` with `P_t^n h = e^{λt} h`.
///
/// The sign is fixed once, at construction, so that `h` is positive at the
/// canonical probe point of the interval.
#[derive(Clone)]
pub struct Eigenfunction {
    pub name: String,
    components: Vec<Component>,
    /// λ in `P_t h = e^{λt} h`.
    pub rate: f64,
    pub l: f64,
    pub r: f64,
    sign: f64,
}

impl fmt::Debug for Eigenfunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Eigenfunction")
            .field("name", &self.name)
            .field("n", &self.n())
            .field("rate", &self.rate)
            .finish()
    }
}

impl Eigenfunction {
    pub fn new(name: &str, components: Vec<Component>, rate: f64, l: f64, r: f64) -> Result<Self> {
        let mut h = Self { name: name.to_string(), components, rate, l, r, sign: 1.0 };
        let probe = canonical_probe(l, r, h.n());
        let v = h.raw(&probe);
        if !(v.is_finite() && v != 0.0) {
            return Err(Error::DegenerateInput(format!("{name}: value {v} at the probe point {probe:?}")));
        }
        h.sign = v.signum();
        Ok(h)
    }

    /// `h ≡ 1` for a single particle.
    pub fn constant(l: f64, r: f64) -> Self {
        Self { name: "one".into(), components: vec![Arc::new(|_| 1.0)], rate: 0.0, l, r, sign: 1.0 }
    }

    pub fn n(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, i: usize, x: f64) -> f64 {
        (self.components[i])(x)
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// Sign applied to `det(h_i(x_j))`.
    pub fn sign(&self) -> f64 {
        self.sign
    }

    fn raw(&self, x: &[f64]) -> f64 {
        det_with(self.n(), |i, j| (self.components[i])(x[j]))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n());
        self.sign * self.raw(x)
    }

    /// Spot check `h > 0` on strictly ordered interior points.
    pub fn positive_on(&self, points: &[Vec<f64>]) -> bool {
        points.iter().all(|p| self.eval(p) > 0.0)
    }

    /// `∇ log h` by central differences.
    pub fn grad_log(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        let h0 = self.eval(x);
        let mut p = x.to_vec();
        for i in 0..x.len() {
            let mut step = 1e-6 * x[i].abs().max(1.0);
            // Keep the stencil inside the state interval.
            if self.l.is_finite() {
                step = step.min(0.5 * (x[i] - self.l));
            }
            if self.r.is_finite() {
                step = step.min(0.5 * (self.r - x[i]));
            }
            p[i] = x[i] + step;
            let up = self.eval(&p);
            p[i] = x[i] - step;
            let dn = self.eval(&p);
            p[i] = x[i];
            out.push((up - dn) / (2.0 * step * h0));
        }
    }
}

/// Catalog of determinant eigenfunctions.
#[derive(Debug, Clone)]
pub enum EigenFamily {
    /// `det(x_j^{i−1})` for quadratic `a` and affine `b`; the boundaries
    /// must not kill.
    Vandermonde(DiffusionSpec),
    /// `det(x_j^{i−1}/s′(x_j))` with `s′` the scale density of the wrapped
    /// diffusion; an eigenfunction of the conjugate's semigroup.
    ConjugateVandermonde(DiffusionSpec),
    /// `det(φ_{i−1}(x_j))` from a discrete spectrum.
    GroundState(DiffusionSpec),
    /// `det(e^{μ_i x_j})` for BM with drift `drift`, μ strictly increasing.
    Exponential { drift: f64, mu: Vec<f64> },
    /// `det(x_j^{2(i−1)})` (reflecting) or `det(x_j^{2i−1})` (killed) on [0, ∞).
    HalfLine { reflecting: bool },
}

impl EigenFamily {
    /// Diffusion whose Karlin–McGregor semigroup the eigenfunction belongs to.
    pub fn spec(&self) -> Result<DiffusionSpec> {
        match self {
            EigenFamily::Vandermonde(s) | EigenFamily::GroundState(s) => Ok(s.clone()),
            EigenFamily::ConjugateVandermonde(s) => s.conjugate(),
            EigenFamily::Exponential { drift, .. } => Ok(bm_drift(*drift)),
            EigenFamily::HalfLine { reflecting } => Ok(bm_halfline(*reflecting)),
        }
    }

    /// Parses `vdm:<id>`, `cvdm:<id>`, `ground:<id>`, `exp:<drift>:<μ1>,<μ2>,…`,
    /// `halfline:refl|abs`, where `<id>` is a diffusion catalog id.
    pub fn from_id(id: &str) -> Result<Self> {
        let (kind, rest) = id.split_once(':').ok_or_else(|| Error::Catalog(format!("bad eigenfunction id '{id}'")))?;
        match kind {
            "vdm" => Ok(EigenFamily::Vandermonde(catalog(rest)?)),
            "cvdm" => Ok(EigenFamily::ConjugateVandermonde(catalog(rest)?)),
            "ground" => Ok(EigenFamily::GroundState(catalog(rest)?)),
            "exp" => {
                let (d, mu) = rest.split_once(':').ok_or_else(|| Error::Catalog(format!("bad id '{id}'")))?;
                let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::Catalog(format!("bad number '{s}' in '{id}'")));
                let drift = parse(d)?;
                let mu = mu.split(',').map(parse).collect::<Result<Vec<_>>>()?;
                Ok(EigenFamily::Exponential { drift, mu })
            }
            "halfline" => match rest {
                "refl" => Ok(EigenFamily::HalfLine { reflecting: true }),
                "abs" => Ok(EigenFamily::HalfLine { reflecting: false }),
                _ => Err(Error::Catalog(format!("bad id '{id}'"))),
            },
            _ => Err(Error::Catalog(format!("unknown eigenfunction family '{kind}'"))),
        }
    }
}

/// `Σ_{k<n} (a₂k(k−1) + b₁k)`: the rate of the n-point Vandermonde.
fn vandermonde_rate(a2: f64, b1: f64, n: usize) -> f64 {
    (0..n).map(|k| {
        let kf = k as f64;
        a2 * kf * (kf - 1.0) + b1 * kf
    })
    .sum()
}

fn non_killing(spec: &DiffusionSpec) -> Result<()> {
    if spec.behavior_l.is_absorbing() || spec.behavior_r.is_absorbing() {
        return Err(Error::Catalog(format!("{}: the Vandermonde is not an eigenfunction under killing", spec.name)));
    }
    // Reflection at a regular end with finite s′ would need h′ = 0 there.
    if matches!(spec.family, Family::HalfLine | Family::Interval) {
        return Err(Error::Catalog(format!("{}: use the half-line or ground-state families", spec.name)));
    }
    Ok(())
}

fn poly_of(spec: &DiffusionSpec) -> Result<crate::diffusion1d::PolyCoeffs> {
    spec.poly.ok_or_else(|| Error::Catalog(format!("{}: coefficients are not polynomial", spec.name)))
}

/// Eigenfunction of the n-particle Karlin–McGregor semigroup for a catalog family.
pub fn eigenfunction_catalog(family: &EigenFamily, n: usize) -> Result<Eigenfunction> {
    if n == 0 {
        return Err(Error::Domain("eigenfunctions need n ≥ 1".into()));
    }
    match family {
        EigenFamily::Vandermonde(spec) => {
            non_killing(spec)?;
            let p = poly_of(spec)?;
            let comps: Vec<Component> = (0..n).map(|i| Arc::new(move |x: f64| x.powi(i as i32)) as Component).collect();
            Eigenfunction::new(&format!("vdm({})", spec.name), comps, vandermonde_rate(p.a2, p.b1, n), spec.l, spec.r)
        }
        EigenFamily::ConjugateVandermonde(spec) => {
            non_killing(spec)?;
            let p = poly_of(spec)?;
            let conj = spec.conjugate()?;
            let base = Arc::new(spec.clone());
            let comps: Vec<Component> = (0..n)
                .map(|i| {
                    let s = base.clone();
                    Arc::new(move |x: f64| x.powi(i as i32) * (-s.log_scale_density(x).unwrap_or(f64::NAN)).exp()) as Component
                })
                .collect();
            // Same rate as the (n+1)-point Vandermonde of the original.
            let rate = vandermonde_rate(p.a2, p.b1, n + 1);
            Eigenfunction::new(&format!("cvdm({})", spec.name), comps, rate, conj.l, conj.r)
        }
        EigenFamily::GroundState(spec) => ground_state(spec, n),
        EigenFamily::Exponential { drift, mu } => {
            if mu.len() != n {
                return Err(Error::Domain(format!("{} exponential rates for n = {n}", mu.len())));
            }
            if mu.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Domain(format!("exponential rates {mu:?} must increase strictly")));
            }
            let rate = mu.iter().map(|m| 0.5 * m * m + drift * m).sum();
            let comps: Vec<Component> = mu.iter().map(|&m| Arc::new(move |x: f64| (m * x).exp()) as Component).collect();
            Eigenfunction::new(&format!("exp(bm_drift:{drift})"), comps, rate, f64::NEG_INFINITY, f64::INFINITY)
        }
        EigenFamily::HalfLine { reflecting } => {
            let shift = if *reflecting { 0 } else { 1 };
            let comps: Vec<Component> =
                (0..n).map(|i| Arc::new(move |x: f64| x.powi((2 * i + shift) as i32)) as Component).collect();
            let name = if *reflecting { "halfline:refl" } else { "halfline:abs" };
            Eigenfunction::new(name, comps, 0.0, 0.0, f64::INFINITY)
        }
    }
}

/// Ground state `det(φ_{i−1}(x_j))` with rate `−(λ_0 + … + λ_{n−1})`.
pub fn ground_state(spec: &DiffusionSpec, n: usize) -> Result<Eigenfunction> {
    let sp: Arc<dyn crate::diffusion1d::DiscreteSpectrum> = Arc::from(spectrum(spec)?);
    let rate = -(0..n).map(|k| sp.rate(k)).sum::<f64>();
    let comps: Vec<Component> = (0..n)
        .map(|i| {
            let sp = sp.clone();
            Arc::new(move |x: f64| {
                let mut out = Vec::with_capacity(i + 1);
                sp.eigenfunctions(i + 1, x, &mut out);
                out[i]
            }) as Component
        })
        .collect();
    Eigenfunction::new(&format!("ground({})", spec.name), comps, rate, spec.l, spec.r)
}

/// One level of a one-dimensional chain: an eigenfunction `h_k` of the
/// level-k diffusion together with that diffusion's scale density.
#[derive(Clone)]
pub struct ChainLevel {
    pub h: Component,
    pub s_prime: Component,
}

/// Input to [`build_eigenfunction_recursive`]: levels listed from the top,
/// the base point of the iterated integrals and the stored rate.
#[derive(Clone)]
pub struct EigenChain {
    pub levels: Vec<ChainLevel>,
    pub c: f64,
    pub l: f64,
    pub r: f64,
    pub rate: f64,
}

/// Weights `w_1 = h_0`, `w_k = s′_{k−2} h_{k−1} / h_{k−2}²` of the iterated-integral system.
pub fn recursion_weights(chain: &EigenChain, n: usize) -> Result<Vec<Component>> {
    if chain.levels.len() < n {
        return Err(Error::Domain(format!("chain has {} levels, {n} needed", chain.levels.len())));
    }
    let mut w: Vec<Component> = vec![chain.levels[0].h.clone()];
    for k in 2..=n {
        let lo = chain.levels[k - 2].clone();
        let up = chain.levels[k - 1].h.clone();
        w.push(Arc::new(move |x: f64| {
            let h = (lo.h)(x);
            (lo.s_prime)(x) * up(x) / (h * h)
        }));
    }
    Ok(w)
}

/// `Π_k w_k(x)^{n−k+1}`: the Wronskian of the recursive components.
pub fn wronskian_product(weights: &[Component], x: f64) -> f64 {
    let n = weights.len();
    weights.iter().enumerate().map(|(k, w)| w(x).powi((n - k) as i32)).product()
}

/// `∫_c^x w(y) g(y) dy` by a fixed Gauss–Legendre rule.
fn gl_from(rule: &GaussLegendre<f64>, c: f64, x: f64, f: impl Fn(f64) -> f64) -> f64 {
    rule.composite(c, x, 2, f)
}

/// `T_k(y) = ∫_c^y w_{k+1}(z) T_{k+1}(z) dz` with `T_{i} ≡ 1`, evaluated at y.
fn iterated(rule: &GaussLegendre<f64>, w: &[Component], c: f64, k: usize, top: usize, y: f64) -> f64 {
    if k == top {
        return 1.0;
    }
    gl_from(rule, c, y, |z| (w[k])(z) * iterated(rule, w, c, k + 1, top, z))
}

/// Components `u_i = w_1 ∫_c^x w_2 ∫_c^{y_1} w_3 ⋯` built from a chain of
/// one-dimensional eigenfunctions.
pub fn build_eigenfunction_recursive(chain: &EigenChain, n: usize) -> Result<Eigenfunction> {
    let w = recursion_weights(chain, n)?;
    // Weights must be finite and positive on the interior for the integrals to exist.
    let probes = crate::kmgroup::weyl::canonical_probe(chain.l, chain.r, 9);
    for (k, wk) in w.iter().enumerate() {
        // The base point may sit on the boundary, where a weight can vanish.
        let base = (chain.c > chain.l && chain.c < chain.r).then_some(chain.c);
        for &x in probes.iter().chain(base.iter()) {
            let v = wk(x);
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Divergent(format!("weight w_{} = {v} at {x}", k + 1)));
            }
        }
    }
    let rule = Arc::new(GaussLegendre::<f64>::new(32));
    let w = Arc::new(w);
    let c = chain.c;
    let comps: Vec<Component> = (0..n)
        .map(|i| {
            let (rule, w) = (rule.clone(), w.clone());
            // Component i uses weights w_1..w_{i+1}.
            Arc::new(move |x: f64| (w[0])(x) * iterated(&rule, &w, c, 1, i + 1, x)) as Component
        })
        .collect();
    Eigenfunction::new("recursive", comps, chain.rate, chain.l, chain.r)
}
