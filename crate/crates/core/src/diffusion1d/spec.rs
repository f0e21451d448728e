use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

/// Coefficient evaluator `x ↦ value`.
pub type Coef = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Feller class of an endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryClass {
    Natural,
    Entrance,
    Exit,
    Regular,
}

impl BoundaryClass {
    /// Image under conjugation.
    pub fn conjugate(self) -> Self {
        match self {
            BoundaryClass::Natural => BoundaryClass::Natural,
            BoundaryClass::Entrance => BoundaryClass::Exit,
            BoundaryClass::Exit => BoundaryClass::Entrance,
            BoundaryClass::Regular => BoundaryClass::Regular,
        }
    }
}

impl fmt::Display for BoundaryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BoundaryClass::Natural => "natural",
            BoundaryClass::Entrance => "entrance",
            BoundaryClass::Exit => "exit",
            BoundaryClass::Regular => "regular",
        };
        f.write_str(s)
    }
}

/// Boundary behaviour attached to an endpoint of a diffusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryBehavior {
    Natural,
    Entrance,
    Exit,
    RegularReflecting,
    RegularAbsorbing,
}

impl BoundaryBehavior {
    pub fn conjugate(self) -> Self {
        match self {
            BoundaryBehavior::Natural => BoundaryBehavior::Natural,
            BoundaryBehavior::Entrance => BoundaryBehavior::Exit,
            BoundaryBehavior::Exit => BoundaryBehavior::Entrance,
            BoundaryBehavior::RegularReflecting => BoundaryBehavior::RegularAbsorbing,
            BoundaryBehavior::RegularAbsorbing => BoundaryBehavior::RegularReflecting,
        }
    }

    pub fn class(self) -> BoundaryClass {
        match self {
            BoundaryBehavior::Natural => BoundaryClass::Natural,
            BoundaryBehavior::Entrance => BoundaryClass::Entrance,
            BoundaryBehavior::Exit => BoundaryClass::Exit,
            BoundaryBehavior::RegularReflecting | BoundaryBehavior::RegularAbsorbing => BoundaryClass::Regular,
        }
    }

    /// Mass can be lost (absorbed) at this endpoint.
    pub fn is_absorbing(self) -> bool {
        matches!(self, BoundaryBehavior::Exit | BoundaryBehavior::RegularAbsorbing)
    }

    /// The process can sit at / start from this endpoint without being killed.
    pub fn is_reflecting_like(self) -> bool {
        matches!(self, BoundaryBehavior::Entrance | BoundaryBehavior::RegularReflecting)
    }
}

impl fmt::Display for BoundaryBehavior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BoundaryBehavior::Natural => "natural",
            BoundaryBehavior::Entrance => "entrance",
            BoundaryBehavior::Exit => "exit",
            BoundaryBehavior::RegularReflecting => "regular-reflecting",
            BoundaryBehavior::RegularAbsorbing => "regular-absorbing",
        };
        f.write_str(s)
    }
}

/// Which endpoint of the state interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Endpoint {
    Left,
    Right,
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Endpoint::Left => "l",
            Endpoint::Right => "r",
        })
    }
}

/// Catalog family tag. Drives closed-form kernels and spectra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `a = 1/2`, `b = μ` on ℝ.
    Bm { mu: f64 },
    /// Standard BM on [0, ∞) reflected or absorbed at 0.
    HalfLine,
    /// Standard BM on [0, π].
    Interval,
    /// `a = 1/2`, `b = −θx` on ℝ.
    Ou { theta: f64 },
    /// `a = 2x`, `b = δ + κx` on (0, ∞): BESQ(δ) for κ = 0, Laguerre for κ = −2.
    Cir { delta: f64, kappa: f64 },
    /// `a = 2x(1−x)`, `b = 2(β − (β+γ)x)` on (0, 1).
    Jacobi { beta: f64, gamma: f64 },
    /// `a = x²/2`, `b = αx` on (0, ∞).
    Gbm { alpha: f64 },
    /// User-supplied coefficients with no registered kernel.
    Custom,
}

/// `a = a₀ + a₁x + a₂x²`, `b = b₀ + b₁x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolyCoeffs {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub b0: f64,
    pub b1: f64,
}

/// A one-dimensional diffusion with generator `a d²/dx² + b d/dx`.
#[derive(Clone)]
pub struct DiffusionSpec {
    pub name: String,
    pub family: Family,
    a: Coef,
    b: Coef,
    a_prime: Option<Coef>,
    log_scale: Option<Coef>,
    pub l: f64,
    pub r: f64,
    pub behavior_l: BoundaryBehavior,
    pub behavior_r: BoundaryBehavior,
    pub c: f64,
    pub poly: Option<PolyCoeffs>,
}

impl fmt::Debug for DiffusionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiffusionSpec")
            .field("name", &self.name)
            .field("family", &self.family)
            .field("interval", &(self.l, self.r))
            .field("behavior_l", &self.behavior_l)
            .field("behavior_r", &self.behavior_r)
            .field("c", &self.c)
            .finish()
    }
}

fn coef(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Coef {
    Arc::new(f)
}

fn fmt_num(v: f64) -> String {
    format!("{v}")
}

impl DiffusionSpec {
    /// User-supplied diffusion. Kernels are unavailable for these.
    #[allow(clippy::too_many_arguments)]
    pub fn custom(
        name: &str,
        a: impl Fn(f64) -> f64 + Send + Sync + 'static,
        b: impl Fn(f64) -> f64 + Send + Sync + 'static,
        interval: (f64, f64),
        behavior_l: BoundaryBehavior,
        behavior_r: BoundaryBehavior,
        c: f64,
    ) -> Result<Self> {
        let spec = Self {
            name: name.to_string(),
            family: Family::Custom,
            a: coef(a),
            b: coef(b),
            a_prime: None,
            log_scale: None,
            l: interval.0,
            r: interval.1,
            behavior_l,
            behavior_r,
            c,
            poly: None,
        };
        spec.check_coefficients()?;
        Ok(spec)
    }

    /// Attach polynomial coefficients (enables the edge-system tables).
    pub fn with_poly(mut self, poly: PolyCoeffs) -> Self {
        self.poly = Some(poly);
        self
    }

    #[inline]
    pub fn a(&self, x: f64) -> f64 {
        (self.a)(x)
    }

    #[inline]
    pub fn b(&self, x: f64) -> f64 {
        (self.b)(x)
    }

    /// `a′(x)`, closed form when registered, else Richardson differences.
    pub fn a_prime(&self, x: f64) -> f64 {
        if let Some(ap) = &self.a_prime {
            return ap(x);
        }
        let mut h = 1e-4 * x.abs().max(1.0);
        if self.l.is_finite() {
            h = h.min(0.25 * (x - self.l));
        }
        if self.r.is_finite() {
            h = h.min(0.25 * (self.r - x));
        }
        let d = |h: f64| (self.a(x + h) - self.a(x - h)) / (2.0 * h);
        (4.0 * d(0.5 * h) - d(h)) / 3.0
    }

    /// Closed-form `ln s′` when the catalog provides one.
    pub fn log_scale_closed(&self) -> Option<&Coef> {
        self.log_scale.as_ref()
    }

    /// `ln s′(x) = −∫_c^x b/a`.
    pub fn log_scale_density(&self, x: f64) -> Result<f64> {
        if let Some(ls) = &self.log_scale {
            return Ok(ls(x));
        }
        if x == self.c {
            return Ok(0.0);
        }
        let (lo, hi, sign) = if x > self.c { (self.c, x, 1.0) } else { (x, self.c, -1.0) };
        let r = quad::adaptive(|u| self.b(u) / self.a(u), lo, hi, 1e-14, 1e-13, 2000);
        if !r.converged || !r.value.is_finite() {
            return Err(Error::CoefficientDomain(format!(
                "{}: b/a not integrable between c = {} and {x}",
                self.name, self.c
            )));
        }
        Ok(-sign * r.value)
    }

    pub fn is_interior(&self, x: f64) -> bool {
        x > self.l && x < self.r
    }

    /// Reference points strictly inside the interval for probing.
    pub fn probe_points(&self, count: usize) -> Vec<f64> {
        let (lo, hi) = match (self.l.is_finite(), self.r.is_finite()) {
            (true, true) => (self.l, self.r),
            (true, false) => (self.l, self.c.max(self.l) + 4.0 * (self.c - self.l).abs().max(1.0)),
            (false, true) => (self.r - 4.0 * (self.r - self.c).abs().max(1.0) - (self.r - self.c), self.r),
            (false, false) => (self.c - 4.0, self.c + 4.0),
        };
        (1..=count).map(|k| lo + (hi - lo) * k as f64 / (count + 1) as f64).collect()
    }

    /// `a > 0` and differentiable at interior probe points.
    pub fn check_coefficients(&self) -> Result<()> {
        if !(self.l < self.r) {
            return Err(Error::CoefficientDomain(format!("{}: empty interval", self.name)));
        }
        if !self.is_interior(self.c) {
            return Err(Error::CoefficientDomain(format!("{}: c = {} not interior", self.name, self.c)));
        }
        for x in self.probe_points(17) {
            let a = self.a(x);
            if !(a > 0.0) || !a.is_finite() {
                return Err(Error::CoefficientDomain(format!("{}: a({x}) = {a} is not positive", self.name)));
            }
            if !self.b(x).is_finite() {
                return Err(Error::CoefficientDomain(format!("{}: b({x}) not finite", self.name)));
            }
            // Smoothness probe: two difference steps must agree.
            let h = 1e-3 * x.abs().max(1.0);
            let h = if self.l.is_finite() { h.min(0.2 * (x - self.l)) } else { h };
            let h = if self.r.is_finite() { h.min(0.2 * (self.r - x)) } else { h };
            let d1 = (self.a(x + h) - self.a(x - h)) / (2.0 * h);
            let d2 = (self.a(x + 0.5 * h) - self.a(x - 0.5 * h)) / h;
            let scale = d1.abs().max(a / x.abs().max(1.0)).max(1e-12);
            if !d1.is_finite() || (d1 - d2).abs() > 1e-2 * scale {
                return Err(Error::CoefficientDomain(format!("{}: a not differentiable near {x}", self.name)));
            }
        }
        Ok(())
    }

    pub fn behavior(&self, e: Endpoint) -> BoundaryBehavior {
        match e {
            Endpoint::Left => self.behavior_l,
            Endpoint::Right => self.behavior_r,
        }
    }

    pub fn endpoint(&self, e: Endpoint) -> f64 {
        match e {
            Endpoint::Left => self.l,
            Endpoint::Right => self.r,
        }
    }

    /// Conjugate diffusion: `â = a`, `b̂ = a′ − b`, behaviours mapped.
    pub fn conjugate(&self) -> Result<DiffusionSpec> {
        let behavior_l = self.behavior_l.conjugate();
        let behavior_r = self.behavior_r.conjugate();
        match self.family {
            Family::Bm { mu } => Ok(bm_drift(-mu)),
            Family::HalfLine => Ok(bm_halfline(behavior_l == BoundaryBehavior::RegularReflecting)),
            Family::Interval => Ok(bm_interval(
                behavior_l == BoundaryBehavior::RegularReflecting,
                behavior_r == BoundaryBehavior::RegularReflecting,
            )),
            Family::Ou { theta } => Ok(ou(-theta)),
            Family::Cir { delta, kappa } => cir_with(2.0 - delta, -kappa, behavior_l),
            Family::Jacobi { beta, gamma } => jacobi_with(1.0 - beta, 1.0 - gamma, behavior_l, behavior_r),
            Family::Gbm { alpha } => Ok(gbm(1.0 - alpha)),
            Family::Custom => {
                for x in self.probe_points(9) {
                    let d = self.a_prime(x);
                    if !d.is_finite() {
                        return Err(Error::CoefficientDomain(format!("{}: a′({x}) not finite", self.name)));
                    }
                }
                let base = self.clone();
                let base_b = self.clone();
                Ok(DiffusionSpec {
                    name: format!("conj({})", self.name),
                    family: Family::Custom,
                    a: coef(move |x| base.a(x)),
                    b: coef(move |x| base_b.a_prime(x) - base_b.b(x)),
                    a_prime: self.a_prime.clone(),
                    log_scale: None,
                    l: self.l,
                    r: self.r,
                    behavior_l,
                    behavior_r,
                    c: self.c,
                    poly: self.poly.map(|p| PolyCoeffs { b0: p.a1 - p.b0, b1: 2.0 * p.a2 - p.b1, ..p }),
                })
            }
        }
    }

    /// Diffusion with drift `b + m·a′` (the edge-system ladder).
    pub fn drift_shifted(&self, m: usize) -> Result<DiffusionSpec> {
        let mf = m as f64;
        match self.family {
            Family::Bm { .. } | Family::Ou { .. } => Ok(self.clone()),
            Family::Cir { delta, kappa } => {
                let d = delta + 2.0 * mf;
                cir_with(d, kappa, shifted_behavior(self.behavior_l, cir_default_left(d)))
            }
            Family::Jacobi { beta, gamma } => jacobi_with(
                beta + mf,
                gamma + mf,
                shifted_behavior(self.behavior_l, jacobi_default(beta + mf)),
                shifted_behavior(self.behavior_r, jacobi_default(gamma + mf)),
            ),
            Family::Gbm { alpha } => Ok(gbm(alpha + mf)),
            Family::HalfLine | Family::Interval | Family::Custom => Err(Error::Catalog(format!(
                "{}: drift ladder needs a natural/entrance catalog family",
                self.name
            ))),
        }
    }
}

/// Keeps a chosen regular behaviour while the class stays regular; a shift
/// that changes the class takes the new class's default.
fn shifted_behavior(current: BoundaryBehavior, default: BoundaryBehavior) -> BoundaryBehavior {
    if current.class() == default.class() {
        current
    } else {
        default
    }
}

/// Standard Brownian motion.
pub fn bm() -> DiffusionSpec {
    bm_drift(0.0)
}

/// Brownian motion with drift μ.
pub fn bm_drift(mu: f64) -> DiffusionSpec {
    DiffusionSpec {
        name: if mu == 0.0 { "bm".into() } else { format!("bm_drift:{}", fmt_num(mu)) },
        family: Family::Bm { mu },
        a: coef(|_| 0.5),
        b: coef(move |_| mu),
        a_prime: Some(coef(|_| 0.0)),
        log_scale: Some(coef(move |x| -2.0 * mu * x)),
        l: f64::NEG_INFINITY,
        r: f64::INFINITY,
        behavior_l: BoundaryBehavior::Natural,
        behavior_r: BoundaryBehavior::Natural,
        c: 0.0,
        poly: Some(PolyCoeffs { a0: 0.5, a1: 0.0, a2: 0.0, b0: mu, b1: 0.0 }),
    }
}

/// Brownian motion on [0, ∞), reflected or absorbed at 0.
pub fn bm_halfline(reflecting: bool) -> DiffusionSpec {
    DiffusionSpec {
        name: format!("bm_halfline:{}", if reflecting { "refl" } else { "abs" }),
        family: Family::HalfLine,
        a: coef(|_| 0.5),
        b: coef(|_| 0.0),
        a_prime: Some(coef(|_| 0.0)),
        log_scale: Some(coef(|_| 0.0)),
        l: 0.0,
        r: f64::INFINITY,
        behavior_l: if reflecting { BoundaryBehavior::RegularReflecting } else { BoundaryBehavior::RegularAbsorbing },
        behavior_r: BoundaryBehavior::Natural,
        c: 1.0,
        poly: None,
    }
}

/// Brownian motion on [0, π] with the given end behaviours.
pub fn bm_interval(refl_l: bool, refl_r: bool) -> DiffusionSpec {
    let tag = |r: bool| if r { "refl" } else { "abs" };
    let beh = |r: bool| if r { BoundaryBehavior::RegularReflecting } else { BoundaryBehavior::RegularAbsorbing };
    DiffusionSpec {
        name: format!("bm_interval:{},{}", tag(refl_l), tag(refl_r)),
        family: Family::Interval,
        a: coef(|_| 0.5),
        b: coef(|_| 0.0),
        a_prime: Some(coef(|_| 0.0)),
        log_scale: Some(coef(|_| 0.0)),
        l: 0.0,
        r: PI,
        behavior_l: beh(refl_l),
        behavior_r: beh(refl_r),
        c: PI / 2.0,
        poly: None,
    }
}

/// Ornstein–Uhlenbeck `a = 1/2`, `b = −θx`.
pub fn ou(theta: f64) -> DiffusionSpec {
    DiffusionSpec {
        name: if theta == 1.0 { "ou".into() } else { format!("ou:{}", fmt_num(theta)) },
        family: Family::Ou { theta },
        a: coef(|_| 0.5),
        b: coef(move |x| -theta * x),
        a_prime: Some(coef(|_| 0.0)),
        log_scale: Some(coef(move |x| theta * x * x)),
        l: f64::NEG_INFINITY,
        r: f64::INFINITY,
        behavior_l: BoundaryBehavior::Natural,
        behavior_r: BoundaryBehavior::Natural,
        c: 0.0,
        poly: Some(PolyCoeffs { a0: 0.5, a1: 0.0, a2: 0.0, b0: 0.0, b1: -theta }),
    }
}

/// Default behaviour at 0 for `a = 2x`, `b = δ + κx`.
fn cir_default_left(delta: f64) -> BoundaryBehavior {
    if delta >= 2.0 {
        BoundaryBehavior::Entrance
    } else if delta > 0.0 {
        BoundaryBehavior::RegularReflecting
    } else {
        BoundaryBehavior::Exit
    }
}

/// Squared Bessel process of dimension d.
pub fn besq(d: f64) -> DiffusionSpec {
    cir_with(d, 0.0, cir_default_left(d)).expect("default behaviour is admissible")
}

/// BESQ(d) for 0 < d < 2 absorbed at the regular endpoint 0.
pub fn besq_absorbed(d: f64) -> Result<DiffusionSpec> {
    cir_with(d, 0.0, BoundaryBehavior::RegularAbsorbing)
}

/// Laguerre diffusion `a = 2x`, `b = α − 2x`.
pub fn laguerre(alpha: f64) -> DiffusionSpec {
    cir_with(alpha, -2.0, cir_default_left(alpha)).expect("default behaviour is admissible")
}

/// `a = 2x`, `b = δ + κx` with an explicit behaviour at 0.
pub fn cir_with(delta: f64, kappa: f64, behavior_l: BoundaryBehavior) -> Result<DiffusionSpec> {
    let class = cir_default_left(delta).class();
    if behavior_l.class() != class {
        return Err(Error::BoundaryAssumption(format!(
            "dimension {delta} makes 0 {class}, not {behavior_l}"
        )));
    }
    let name = if kappa == 0.0 {
        let base = format!("besq:{}", fmt_num(delta));
        if behavior_l == BoundaryBehavior::RegularAbsorbing { format!("{base},abs") } else { base }
    } else if kappa == -2.0 {
        let base = format!("lag:{}", fmt_num(delta));
        if behavior_l == BoundaryBehavior::RegularAbsorbing { format!("{base},abs") } else { base }
    } else {
        let base = format!("cir:{},{}", fmt_num(delta), fmt_num(kappa));
        if behavior_l == BoundaryBehavior::RegularAbsorbing { format!("{base},abs") } else { base }
    };
    Ok(DiffusionSpec {
        name,
        family: Family::Cir { delta, kappa },
        a: coef(|x| 2.0 * x),
        b: coef(move |x| delta + kappa * x),
        a_prime: Some(coef(|_| 2.0)),
        log_scale: Some(coef(move |x| -0.5 * delta * x.ln() - 0.5 * kappa * (x - 1.0))),
        l: 0.0,
        r: f64::INFINITY,
        behavior_l,
        behavior_r: BoundaryBehavior::Natural,
        c: 1.0,
        poly: Some(PolyCoeffs { a0: 0.0, a1: 2.0, a2: 0.0, b0: delta, b1: kappa }),
    })
}

fn jacobi_default(p: f64) -> BoundaryBehavior {
    if p >= 1.0 {
        BoundaryBehavior::Entrance
    } else if p > 0.0 {
        BoundaryBehavior::RegularReflecting
    } else {
        BoundaryBehavior::Exit
    }
}

/// Jacobi diffusion `a = 2x(1−x)`, `b = 2(β − (β+γ)x)` on (0, 1).
pub fn jacobi(beta: f64, gamma: f64) -> DiffusionSpec {
    jacobi_with(beta, gamma, jacobi_default(beta), jacobi_default(gamma)).expect("default behaviour is admissible")
}

pub fn jacobi_with(beta: f64, gamma: f64, bl: BoundaryBehavior, br: BoundaryBehavior) -> Result<DiffusionSpec> {
    if bl.class() != jacobi_default(beta).class() || br.class() != jacobi_default(gamma).class() {
        return Err(Error::BoundaryAssumption(format!(
            "jac:{beta},{gamma}: behaviours {bl}/{br} inconsistent with parameters"
        )));
    }
    Ok(DiffusionSpec {
        name: format!("jac:{},{}", fmt_num(beta), fmt_num(gamma)),
        family: Family::Jacobi { beta, gamma },
        a: coef(|x| 2.0 * x * (1.0 - x)),
        b: coef(move |x| 2.0 * (beta - (beta + gamma) * x)),
        a_prime: Some(coef(|x| 2.0 - 4.0 * x)),
        log_scale: Some(coef(move |x| -beta * (2.0 * x).ln() - gamma * (2.0 * (1.0 - x)).ln())),
        l: 0.0,
        r: 1.0,
        behavior_l: bl,
        behavior_r: br,
        c: 0.5,
        poly: Some(PolyCoeffs { a0: 0.0, a1: 2.0, a2: -2.0, b0: 2.0 * beta, b1: -2.0 * (beta + gamma) }),
    })
}

/// Geometric Brownian motion `a = x²/2`, `b = αx`.
pub fn gbm(alpha: f64) -> DiffusionSpec {
    DiffusionSpec {
        name: format!("gbm:{}", fmt_num(alpha)),
        family: Family::Gbm { alpha },
        a: coef(|x| 0.5 * x * x),
        b: coef(move |x| alpha * x),
        a_prime: Some(coef(|x| x)),
        log_scale: Some(coef(move |x| -2.0 * alpha * x.ln())),
        l: 0.0,
        r: f64::INFINITY,
        behavior_l: BoundaryBehavior::Natural,
        behavior_r: BoundaryBehavior::Natural,
        c: 1.0,
        poly: Some(PolyCoeffs { a0: 0.0, a1: 0.0, a2: 0.5, b0: 0.0, b1: alpha }),
    }
}

fn parse_num(s: &str, id: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Catalog(format!("bad numeric parameter '{s}' in '{id}'")))
}

fn parse_end(s: &str, id: &str) -> Result<bool> {
    match s.trim() {
        "refl" => Ok(true),
        "abs" => Ok(false),
        other => Err(Error::Catalog(format!("expected refl|abs, got '{other}' in '{id}'"))),
    }
}

/// Look up a catalog diffusion by its string id.
///
/// Ids: `bm`, `bm_drift:μ`, `ou`, `ou:θ`, `besq:d[,abs]`, `lag:α[,abs]`,
/// `cir:δ,κ[,abs]`, `jac:β,γ`, `gbm:α`, `bm_interval:refl|abs,refl|abs`,
/// `bm_halfline:refl|abs`.
pub fn catalog(id: &str) -> Result<DiffusionSpec> {
    let (head, args) = match id.split_once(':') {
        Some((h, a)) => (h.trim(), a.split(',').map(str::trim).collect::<Vec<_>>()),
        None => (id.trim(), Vec::new()),
    };
    let want = |n: usize| -> Result<()> {
        if args.len() == n {
            Ok(())
        } else {
            Err(Error::Catalog(format!("'{id}' expects {n} parameter(s)")))
        }
    };
    let abs_flag = |i: usize| -> Result<bool> {
        match args.get(i) {
            None => Ok(false),
            Some(&"abs") => Ok(true),
            Some(other) => Err(Error::Catalog(format!("unexpected flag '{other}' in '{id}'"))),
        }
    };
    match head {
        "bm" => {
            want(0)?;
            Ok(bm())
        }
        "bm_drift" => {
            want(1)?;
            Ok(bm_drift(parse_num(args[0], id)?))
        }
        "ou" => match args.len() {
            0 => Ok(ou(1.0)),
            1 => Ok(ou(parse_num(args[0], id)?)),
            _ => Err(Error::Catalog(format!("'{id}' expects at most one parameter"))),
        },
        "besq" | "lag" => {
            if args.is_empty() || args.len() > 2 {
                return Err(Error::Catalog(format!("'{id}' expects a dimension and optional ',abs'")));
            }
            let d = parse_num(args[0], id)?;
            let kappa = if head == "lag" { -2.0 } else { 0.0 };
            if abs_flag(1)? {
                cir_with(d, kappa, BoundaryBehavior::RegularAbsorbing)
            } else {
                cir_with(d, kappa, cir_default_left(d))
            }
        }
        "cir" => {
            if args.len() < 2 || args.len() > 3 {
                return Err(Error::Catalog(format!("'{id}' expects δ,κ and optional ',abs'")));
            }
            let d = parse_num(args[0], id)?;
            let k = parse_num(args[1], id)?;
            if abs_flag(2)? {
                cir_with(d, k, BoundaryBehavior::RegularAbsorbing)
            } else {
                cir_with(d, k, cir_default_left(d))
            }
        }
        "jac" => {
            want(2)?;
            Ok(jacobi(parse_num(args[0], id)?, parse_num(args[1], id)?))
        }
        "gbm" => {
            want(1)?;
            Ok(gbm(parse_num(args[0], id)?))
        }
        "bm_interval" => {
            want(2)?;
            Ok(bm_interval(parse_end(args[0], id)?, parse_end(args[1], id)?))
        }
        "bm_halfline" => {
            want(1)?;
            Ok(bm_halfline(parse_end(args[0], id)?))
        }
        _ => Err(Error::Catalog(format!("unknown diffusion id '{id}'"))),
    }
}
