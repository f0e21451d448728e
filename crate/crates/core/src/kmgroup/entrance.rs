use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal};

use crate::diffusion1d::{besq, bm, kernel, DiffusionSpec, TransitionKernel};
use crate::error::{Error, Result};
use crate::linalg::{det_with, vandermonde};
use crate::quad::NodeMap;

use super::eigen::{eigenfunction_catalog, EigenFamily, Eigenfunction};
use super::km::{chamber_nodes, h_transform_density, linear_nodes, symmetric_chamber_integral, GL_NODES};

/// Families of n-particle laws started from a degenerate boundary point.
#[derive(Debug, Clone, PartialEq)]
pub enum EntranceFamily {
    /// Dyson BM from the origin: `e^{−Σy²/2t} Δ(y)²`.
    Gue,
    /// Non-colliding BESQ(d) from 0: `Δ(y)² Π y^ν e^{−y/2t}`, `ν = d/2 − 1`.
    Besq { d: f64 },
    /// Half-line BM from 0: `e^{−Σy²/2t} Π(y_j² − y_i²)²`, times `Π y_i²` when killed.
    HalfLine { reflecting: bool },
    /// Drifting Dyson BM with drift vector μ:
    /// `det(e^{−(y_i − tμ_j)²/2t}) Δ(y)/Δ(μ)`.
    Drift { mu: Vec<f64> },
}

impl EntranceFamily {
    /// Parses `gue`, `besq:d`, `halfline:refl|abs`, `drift:μ1,μ2,…`.
    pub fn from_id(id: &str) -> Result<Self> {
        let bad = || Error::Catalog(format!("unknown entrance family '{id}'"));
        let (kind, rest) = id.split_once(':').unwrap_or((id, ""));
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
        match kind {
            "gue" => Ok(EntranceFamily::Gue),
            "besq" => Ok(EntranceFamily::Besq { d: num(rest)? }),
            "halfline" => match rest {
                "refl" => Ok(EntranceFamily::HalfLine { reflecting: true }),
                "abs" => Ok(EntranceFamily::HalfLine { reflecting: false }),
                _ => Err(bad()),
            },
            "drift" => Ok(EntranceFamily::Drift { mu: rest.split(',').map(num).collect::<Result<_>>()? }),
            _ => Err(bad()),
        }
    }

    /// The diffusion and the eigenfunction whose Doob transform this law enters.
    pub fn eigen_pair(&self, n: usize) -> Result<(DiffusionSpec, Eigenfunction)> {
        let fam = match self {
            EntranceFamily::Gue => EigenFamily::Vandermonde(bm()),
            EntranceFamily::Besq { d } => EigenFamily::Vandermonde(besq(*d)),
            EntranceFamily::HalfLine { reflecting } => EigenFamily::HalfLine { reflecting: *reflecting },
            EntranceFamily::Drift { mu } => {
                let mut m = mu.clone();
                m.sort_by(f64::total_cmp);
                EigenFamily::Exponential { drift: 0.0, mu: m }
            }
        };
        Ok((fam.spec()?, eigenfunction_catalog(&fam, n)?))
    }
}

/// How coincident drifts are handled in the drifted law.
#[derive(Debug, Clone, PartialEq)]
enum DriftForm {
    Distinct(Vec<f64>),
    /// All drifts equal: the confluent limit `y^{j−1} e^{μy}/(j−1)!`.
    Confluent(f64),
}

/// Normalized entrance-law density at a fixed time, with an exact sampler
/// for the scaling families.
#[derive(Debug, Clone)]
pub struct EntranceLaw {
    pub family: EntranceFamily,
    pub n: usize,
    pub t: f64,
    log_z: f64,
    drift: Option<DriftForm>,
    /// Maximum of the log acceptance ratio of the rejection sampler.
    log_bound: Option<f64>,
}

fn half_width(n: usize) -> f64 {
    2.0 * (n as f64).sqrt() + 9.0
}

impl EntranceLaw {
    fn nu(&self) -> f64 {
        match self.family {
            EntranceFamily::Besq { d } => 0.5 * d - 1.0,
            _ => 0.0,
        }
    }

    /// Unnormalized density on ordered `y`; zero off the closed chamber.
    pub fn unnormalized(&self, y: &[f64]) -> f64 {
        if y.len() != self.n || y.windows(2).any(|w| w[0] > w[1]) {
            return 0.0;
        }
        let t = self.t;
        match &self.family {
            EntranceFamily::Gue => {
                let v = vandermonde(y);
                (-0.5 * y.iter().map(|u| u * u).sum::<f64>() / t).exp() * v * v
            }
            EntranceFamily::Besq { .. } => {
                if y[0] <= 0.0 {
                    return 0.0;
                }
                let nu = self.nu();
                let v = vandermonde(y);
                let log: f64 = y.iter().map(|&u| nu * u.ln() - 0.5 * u / t).sum();
                v * v * log.exp()
            }
            EntranceFamily::HalfLine { reflecting } => {
                if y[0] < 0.0 {
                    return 0.0;
                }
                let sq: Vec<f64> = y.iter().map(|u| u * u).collect();
                let v = vandermonde(&sq);
                let extra: f64 = if *reflecting { 1.0 } else { sq.iter().product() };
                (-0.5 * sq.iter().sum::<f64>() / t).exp() * v * v * extra
            }
            EntranceFamily::Drift { .. } => {
                let gauss = (-0.5 * y.iter().map(|u| u * u).sum::<f64>() / t).exp();
                let vy = vandermonde(y);
                match self.drift.as_ref().expect("drift form set at construction") {
                    DriftForm::Distinct(mu) => {
                        // det(e^{−(y−tμ)²/2t}) = e^{−Σy²/2t − tΣμ²/2} det(e^{y_i μ_j}).
                        let shift = (-0.5 * t * mu.iter().map(|m| m * m).sum::<f64>()).exp();
                        let d = det_with(self.n, |i, j| (y[i] * mu[j]).exp());
                        gauss * shift * d * vy / vandermonde(mu)
                    }
                    DriftForm::Confluent(m) => {
                        let shift = (-0.5 * t * self.n as f64 * m * m).exp();
                        let fact: f64 = (1..self.n).map(|k| (1..=k).product::<usize>() as f64).product();
                        let d = vy * y.iter().map(|&u| (m * u).exp()).product::<f64>() / fact;
                        gauss * shift * d * vy
                    }
                }
            }
        }
    }

    /// Normalized density.
    pub fn density(&self, y: &[f64]) -> f64 {
        self.unnormalized(y) * (-self.log_z).exp()
    }

    /// `ln ∫_{W^n}` of the unnormalized density.
    pub fn log_normalizer(&self) -> f64 {
        self.log_z
    }

    /// Quadrature nodes covering the bulk of the law.
    pub fn nodes(&self) -> (Vec<(f64, f64)>, NodeMap) {
        let t = self.t;
        let st = t.sqrt();
        let w = half_width(self.n);
        let rule = crate::quad::GaussLegendre::<f64>::new(GL_NODES);
        match &self.family {
            EntranceFamily::Gue => (linear_nodes(-w * st, w * st, 4), NodeMap::Linear),
            EntranceFamily::Drift { mu } => {
                let lo = mu.iter().cloned().fold(f64::INFINITY, f64::min) * t - w * st;
                let hi = mu.iter().cloned().fold(f64::NEG_INFINITY, f64::max) * t + w * st;
                (linear_nodes(lo, hi, 4), NodeMap::Linear)
            }
            EntranceFamily::Besq { .. } => {
                let hi = 2.0 * t * (45.0 + 4.0 * self.n as f64 + 2.0 * self.nu().abs());
                (crate::quad::window_nodes(&rule, 0.0, hi, 4, NodeMap::SqrtLower), NodeMap::SqrtLower)
            }
            EntranceFamily::HalfLine { .. } => {
                let hi = st * (2.0 * (2.0 * self.n as f64).sqrt() + 10.0);
                (linear_nodes(0.0, hi, 4), NodeMap::Linear)
            }
        }
    }

    /// Draws one ordered configuration.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        let bound = self.log_bound.ok_or_else(|| Error::Domain(format!("no sampler for {:?}", self.family)))?;
        match &self.family {
            EntranceFamily::Gue => {
                let z = sample_gue_unit(self.n, bound, rng);
                Ok(z.into_iter().map(|v| v * self.t.sqrt()).collect())
            }
            EntranceFamily::Besq { .. } => {
                let z = sample_besq_unit(self.n, self.nu(), bound, rng)?;
                Ok(z.into_iter().map(|v| v * self.t).collect())
            }
            EntranceFamily::HalfLine { .. } => {
                let z = sample_besq_unit(self.n, self.nu_halfline(), bound, rng)?;
                Ok(z.into_iter().map(|v| (v * self.t).sqrt()).collect())
            }
            EntranceFamily::Drift { .. } => unreachable!("no bound for the drifted law"),
        }
    }

    /// Index of the BESQ law whose square root is the half-line law.
    fn nu_halfline(&self) -> f64 {
        match self.family {
            EntranceFamily::HalfLine { reflecting: true } => -0.5,
            _ => 0.5,
        }
    }
}

/// Entrance law of `family` with `n` particles at time `t`, normalized by quadrature.
pub fn entrance_law(family: &EntranceFamily, n: usize, t: f64) -> Result<EntranceLaw> {
    if n == 0 || !(t > 0.0) {
        return Err(Error::Domain(format!("need n ≥ 1 and t > 0, got n = {n}, t = {t}")));
    }
    let mut drift = None;
    let mut log_bound = None;
    match family {
        EntranceFamily::Gue => log_bound = Some(gue_log_bound(n)),
        EntranceFamily::Besq { d } => {
            if !(*d > 0.0) {
                return Err(Error::Domain(format!("BESQ entrance law needs d > 0, got {d}")));
            }
            log_bound = Some(besq_log_bound(n));
        }
        EntranceFamily::HalfLine { .. } => log_bound = Some(besq_log_bound(n)),
        EntranceFamily::Drift { mu } => {
            if mu.len() != n {
                return Err(Error::Domain(format!("{} drifts for n = {n}", mu.len())));
            }
            let mut m = mu.clone();
            m.sort_by(f64::total_cmp);
            drift = Some(if m.iter().all(|&v| v == m[0]) {
                DriftForm::Confluent(m[0])
            } else if m.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::DegenerateInput(format!("partially coincident drifts {mu:?}")));
            } else {
                DriftForm::Distinct(m)
            });
        }
    }
    let mut law = EntranceLaw { family: family.clone(), n, t, log_z: 0.0, drift, log_bound };
    if let EntranceFamily::Drift { mu } = &mut law.family {
        mu.sort_by(f64::total_cmp);
    }
    let (nodes, _) = law.nodes();
    let mut y = vec![0.0; n];
    let z = symmetric_chamber_integral(&nodes, n, |idx| {
        for (j, &k) in idx.iter().enumerate() {
            y[j] = nodes[k].0;
        }
        law.unnormalized(&y)
    });
    if !(z.is_finite() && z > 0.0) {
        return Err(Error::Quadrature(format!("entrance-law normalizer {z}")));
    }
    law.log_z = z.ln();
    Ok(law)
}

/// `max 2 ln Δ(z) − Σz²/4` over the chamber: the log acceptance bound of
/// the N(0, 2) proposal for the unit-time GUE law.
fn gue_log_bound(n: usize) -> f64 {
    let init: Vec<f64> = (0..n).map(|k| 2.0 * (k as f64 - 0.5 * (n as f64 - 1.0))).collect();
    concave_max(init, false, |z| z.iter().map(|v| -0.25 * v * v).sum(), |z, i| -0.5 * z[i])
}

/// `max 2 ln Δ(z) − Σz/4` over `0 ≤ z_1 < … < z_n`: the bound of the
/// Gamma(ν+1, 4) proposal for the unit-time BESQ law.
fn besq_log_bound(n: usize) -> f64 {
    let init: Vec<f64> = (0..n).map(|k| 4.0 * k as f64 + 1.0).collect();
    concave_max(init, true, |z| -0.25 * z.iter().sum::<f64>(), |_, _| -0.25)
}

fn log_vdm2(z: &[f64]) -> f64 {
    let mut s = 0.0;
    for j in 0..z.len() {
        for i in 0..j {
            s += 2.0 * (z[j] - z[i]).ln();
        }
    }
    s
}

/// Projected gradient ascent for `2 ln Δ + g`, concave on the chamber.
fn concave_max(mut z: Vec<f64>, nonneg: bool, g: impl Fn(&[f64]) -> f64, dg: impl Fn(&[f64], usize) -> f64) -> f64 {
    let n = z.len();
    let f = |z: &[f64]| {
        if z.windows(2).any(|w| w[0] >= w[1]) || (nonneg && z[0] < 0.0) {
            f64::NEG_INFINITY
        } else {
            log_vdm2(z) + g(z)
        }
    };
    if n == 1 && !nonneg {
        return f(&z);
    }
    let mut val = f(&z);
    let mut step = 0.5;
    for _ in 0..20_000 {
        let grad: Vec<f64> = (0..n)
            .map(|i| {
                let mut d = dg(&z, i);
                for j in 0..n {
                    if j != i {
                        d += 2.0 / (z[i] - z[j]);
                    }
                }
                if nonneg && i == 0 && z[0] <= 0.0 && d < 0.0 {
                    0.0
                } else {
                    d
                }
            })
            .collect();
        let gnorm = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
        if gnorm < 1e-12 {
            break;
        }
        let mut accepted = false;
        while step > 1e-16 {
            let mut cand: Vec<f64> = z.iter().zip(&grad).map(|(a, d)| a + step * d).collect();
            if nonneg && cand[0] < 0.0 {
                cand[0] = 0.0;
            }
            let cv = f(&cand);
            if cv > val {
                z = cand;
                val = cv;
                step *= 1.5;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    // Margin against the residual optimization error.
    val + 1e-9
}

fn sample_gue_unit<R: Rng + ?Sized>(n: usize, bound: f64, rng: &mut R) -> Vec<f64> {
    let prop = Normal::new(0.0, std::f64::consts::SQRT_2).expect("valid normal");
    loop {
        let mut z: Vec<f64> = (0..n).map(|_| prop.sample(rng)).collect();
        z.sort_by(f64::total_cmp);
        let lr = log_vdm2(&z) - 0.25 * z.iter().map(|v| v * v).sum::<f64>() - bound;
        if rng.random::<f64>().ln() < lr {
            return z;
        }
    }
}

fn sample_besq_unit<R: Rng + ?Sized>(n: usize, nu: f64, bound: f64, rng: &mut R) -> Result<Vec<f64>> {
    let prop = Gamma::new(nu + 1.0, 4.0).map_err(|e| Error::Domain(format!("gamma proposal: {e}")))?;
    loop {
        let mut z: Vec<f64> = (0..n).map(|_| prop.sample(rng)).collect();
        z.sort_by(f64::total_cmp);
        let lr = log_vdm2(&z) - 0.25 * z.iter().sum::<f64>() - bound;
        if rng.random::<f64>().ln() < lr {
            return Ok(z);
        }
    }
}

/// `|∫ μ_s(x) q_t^h(x, y) dx − μ_{s+t}(y)| / μ_{s+t}(y)` with `q^h` the Doob
/// transform the law enters.
pub fn entrance_consistency_residual(family: &EntranceFamily, n: usize, s: f64, t: f64, y: &[f64]) -> Result<f64> {
    let (spec, h) = family.eigen_pair(n)?;
    let k = kernel(&spec)?;
    let start = entrance_law(family, n, s)?;
    let end = entrance_law(family, n, s + t)?;
    let (nodes, _) = start.nodes();
    let mut x = vec![0.0; n];
    let mut failure = None;
    let lhs = symmetric_chamber_integral(&nodes, n, |idx| {
        for (j, &i) in idx.iter().enumerate() {
            x[j] = nodes[i].0;
        }
        let mu = start.density(&x);
        if mu == 0.0 || h.eval(&x) <= 0.0 {
            return 0.0;
        }
        match h_transform_density(&k, &h, t, &x, y) {
            Ok(v) => mu * v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let rhs = end.density(y);
    Ok((lhs - rhs).abs() / rhs)
}

/// `μ_t^x(y) ∝ det(h_i(y_j)) det(∂_x^{i−1} p_t(x, y_j))`: the law reached
/// from the coincident start `(x, …, x)`.
#[derive(Debug, Clone)]
pub struct PolynomialEnsemble {
    kernel: TransitionKernel,
    h: Eigenfunction,
    pub x: f64,
    pub t: f64,
    z: f64,
}

impl PolynomialEnsemble {
    fn raw(&self, y: &[f64]) -> Result<f64> {
        let n = self.h.n();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                d[i * n + j] = self.kernel.dx(self.t, self.x, y[j], i)?;
            }
        }
        Ok(self.h.eval(y) * crate::linalg::det_in_place(&mut d, n))
    }

    /// Normalized density on ordered `y`.
    pub fn density(&self, y: &[f64]) -> Result<f64> {
        if y.windows(2).any(|w| w[0] > w[1]) {
            return Ok(0.0);
        }
        Ok(self.raw(y)? / self.z)
    }
}

/// Entrance law from `(x, …, x)` built from the Taylor expansion of the kernel in x.
pub fn polynomial_ensemble_limit(kernel: &TransitionKernel, h: &Eigenfunction, x: f64, t: f64) -> Result<PolynomialEnsemble> {
    let n = h.n();
    let mut ens = PolynomialEnsemble { kernel: kernel.clone(), h: h.clone(), x, t, z: 1.0 };
    let nodes = chamber_nodes(kernel, t, &[x]);
    let mut y = vec![0.0; n];
    let mut failure = None;
    let z = symmetric_chamber_integral(&nodes, n, |idx| {
        for (j, &k) in idx.iter().enumerate() {
            y[j] = nodes[k].0;
        }
        ens.raw(&y).unwrap_or_else(|e| {
            failure.get_or_insert(e);
            0.0
        })
    });
    if let Some(e) = failure {
        return Err(e);
    }
    if !(z.is_finite() && z != 0.0) {
        return Err(Error::Quadrature(format!("polynomial ensemble normalizer {z}")));
    }
    ens.z = z;
    Ok(ens)
}
