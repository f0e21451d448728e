use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diffusion1d::{DiffusionSpec, Family};
use crate::error::{Error, Result};
use crate::kmgroup::{eigenfunction_catalog, EigenFamily, Eigenfunction, EntranceLaw};
use crate::twolevel::{InterlacingConfig, InterlacingShape, ShapeTag, TwoLevel};

use super::rng::{RngStreams, INIT_LEVEL};
use super::sim::{simulate, EdgeSide, LevelSpec, PathBundle, SimConfig, System};

/// Whether pathwise uniqueness of the reflected system is certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum YwStatus {
    Holds,
    Unknown,
}

/// Catalog families with a ½-Hölder diffusion coefficient and Lipschitz
/// drift hold; user-supplied coefficients carry no certificate.
pub fn yw_check(spec: &DiffusionSpec) -> YwStatus {
    match spec.family {
        Family::Custom => YwStatus::Unknown,
        Family::Bm { .. }
        | Family::HalfLine
        | Family::Interval
        | Family::Ou { .. }
        | Family::Cir { .. }
        | Family::Jacobi { .. }
        | Family::Gbm { .. } => YwStatus::Holds,
    }
}

fn warn_uncertified(spec: &DiffusionSpec) {
    if yw_check(spec) == YwStatus::Unknown {
        log::warn!("{}: no pathwise-uniqueness certificate; simulating anyway", spec.name);
    }
}

/// Points of the grid a rejection bound is taken over, per coordinate.
const BOUND_GRID: usize = 16;
const BOUND_SLACK: f64 = 1.25;
const MAX_PROPOSALS: usize = 1_000_000;

/// Draws `y` from `Λ^ĥ(x, ·) ∝ Π m̂(y_i) ĥ(y)` on the fiber over `x`.
///
/// Uniform proposals on the fiber box, accepted against 1.25 times the
/// largest density value on a 17-point-per-axis grid. A proposal above that
/// bound is reported as an error rather than silently biasing the draw.
pub fn sample_fiber<R: Rng + ?Sized>(tl: &TwoLevel, x: &[f64], h_hat: Option<&Eigenfunction>, rng: &mut R) -> Result<Vec<f64>> {
    let boxes = tl.shape.fiber(x, tl.l(), tl.r());
    if boxes.is_empty() {
        return Ok(Vec::new());
    }
    if boxes.iter().any(|&(a, b)| !(a.is_finite() && b.is_finite())) {
        return Err(Error::Domain(format!("fiber over {x:?} is unbounded; no uniform proposal")));
    }
    let g = |y: &[f64]| -> f64 {
        let m: f64 = y.iter().map(|&v| tl.m_hat(v)).product();
        m * h_hat.map_or(1.0, |h| h.eval(y))
    };
    let d = boxes.len();
    let mut bound = 0.0f64;
    let mut idx = vec![0usize; d];
    let mut y = vec![0.0; d];
    loop {
        for (k, &(a, b)) in boxes.iter().enumerate() {
            y[k] = a + (b - a) * idx[k] as f64 / BOUND_GRID as f64;
        }
        let v = g(&y);
        if v.is_finite() {
            bound = bound.max(v);
        }
        let mut k = 0;
        while k < d {
            idx[k] += 1;
            if idx[k] <= BOUND_GRID {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == d {
            break;
        }
    }
    if !(bound > 0.0) {
        return Err(Error::DegenerateInput(format!("fiber density vanishes on the grid over {x:?}")));
    }
    let bound = BOUND_SLACK * bound;
    for _ in 0..MAX_PROPOSALS {
        for (k, &(a, b)) in boxes.iter().enumerate() {
            y[k] = a + (b - a) * rng.random::<f64>();
        }
        let v = g(&y);
        if !v.is_finite() || v > bound {
            return Err(Error::Domain(format!("fiber density {v} at {y:?} exceeds the rejection bound {bound}")));
        }
        if rng.random::<f64>() * bound < v {
            return Ok(y);
        }
    }
    Err(Error::Budget(format!("no fiber sample over {x:?} after {MAX_PROPOSALS} proposals")))
}

/// Starting point of a two-level run.
#[derive(Debug, Clone)]
pub enum TwoLevelInit {
    Config(InterlacingConfig),
    /// `x` given, `y` drawn from `Λ^ĥ(x, ·)`.
    Lambda(Vec<f64>),
    /// `x` drawn from an entrance law at its time (which must be the run's
    /// start), then `y` from `Λ^ĥ(x, ·)`.
    Entrance(EntranceLaw),
}

/// Y is the conjugate diffusion (Doob-transformed by `ĥ` when given),
/// X the original one reflected onto the cofiber of Y.
#[derive(Debug, Clone)]
pub struct TwoLevelSim {
    pub two: TwoLevel,
    pub h_hat: Option<Eigenfunction>,
    system: System,
}

impl TwoLevelSim {
    pub fn new(spec: &DiffusionSpec, shape: InterlacingShape, h_hat: Option<Eigenfunction>) -> Result<Self> {
        let two = TwoLevel::new(spec, shape)?;
        warn_uncertified(spec);
        let y = LevelSpec::free(two.pair.dual_spec.clone(), shape.y_len(), h_hat.clone());
        let x = LevelSpec::interlaced(spec.clone(), shape.x_len(), shape.tag);
        let system = System::new(vec![y, x])?;
        Ok(Self { two, h_hat, system })
    }

    pub fn system(&self) -> &System {
        &self.system
    }

    /// `[y, x]`, bottom level first.
    pub fn initial(&self, init: &TwoLevelInit, cfg: &SimConfig, streams: &RngStreams, path: u64) -> Result<Vec<Vec<f64>>> {
        let mut rng = streams.stream(path, INIT_LEVEL, 0);
        let x = match init {
            TwoLevelInit::Config(c) => {
                if c.shape != self.two.shape {
                    return Err(Error::Domain(format!("initial configuration is {}, system is {}", c.shape, self.two.shape)));
                }
                return Ok(vec![c.y.to_vec(), c.x.to_vec()]);
            }
            TwoLevelInit::Lambda(x) => x.clone(),
            TwoLevelInit::Entrance(law) => {
                check_entrance_time(law, cfg)?;
                law.sample(&mut rng)?
            }
        };
        if x.len() != self.two.shape.x_len() {
            return Err(Error::Domain(format!("{} X particles given for {}", x.len(), self.two.shape)));
        }
        let y = sample_fiber(&self.two, &x, self.h_hat.as_ref(), &mut rng)?;
        Ok(vec![y, x])
    }

    pub fn run(&self, init: &TwoLevelInit, cfg: &SimConfig, streams: &RngStreams, path: u64) -> Result<PathBundle> {
        let start = self.initial(init, cfg, streams, path)?;
        simulate(&self.system, &start, cfg, streams, path)
    }
}

fn check_entrance_time(law: &EntranceLaw, cfg: &SimConfig) -> Result<()> {
    if (law.t - cfg.t0).abs() > 1e-12 * law.t.max(1.0) {
        return Err(Error::Config(format!("entrance law is taken at t = {}, the run starts at {}", law.t, cfg.t0)));
    }
    Ok(())
}

/// One run of [`TwoLevelSim`].
pub fn simulate_two_level(
    spec: &DiffusionSpec,
    shape: InterlacingShape,
    h_hat: Option<Eigenfunction>,
    init: &TwoLevelInit,
    cfg: &SimConfig,
    streams: &RngStreams,
    path: u64,
) -> Result<PathBundle> {
    TwoLevelSim::new(spec, shape, h_hat)?.run(init, cfg, streams, path)
}

/// Level specs `L_1, …, L_N` of a Gelfand–Tsetlin pattern with top diffusion
/// `top`: `L_k` has drift `b + (N − k)a′`.
pub fn gt_ladder(top: &DiffusionSpec, n: usize) -> Result<Vec<DiffusionSpec>> {
    (1..=n).map(|k| top.drift_shifted(n - k)).collect()
}

fn check_ladder(specs: &[DiffusionSpec]) -> Result<()> {
    let n = specs.len();
    let top = &specs[n - 1];
    for (k, s) in specs.iter().enumerate() {
        let m = (n - 1 - k) as f64;
        for x in top.probe_points(5) {
            let (a, b) = (s.a(x), s.b(x));
            let (a0, b0) = (top.a(x), top.b(x) + m * top.a_prime(x));
            let tol = 1e-9 * (1.0 + a0.abs() + b0.abs());
            if (a - a0).abs() > tol || (b - b0).abs() > tol || s.l != top.l || s.r != top.r {
                return Err(Error::Config(format!(
                    "level {} ({}) is not the top diffusion {} with drift shifted by {m}·a′",
                    k + 1,
                    s.name,
                    top.name
                )));
            }
        }
    }
    Ok(())
}

/// Start of a pattern run.
#[derive(Debug, Clone)]
pub enum GtInit {
    /// Levels `1..=N`, level `k` holding `k` ordered points.
    Pattern(Vec<Vec<f64>>),
    /// Top level from an entrance law at the run's start time; each lower
    /// level from `𝔏(x, dy) ∝ Π m̂(y_i) ĥ(y)` over the level above.
    Entrance(EntranceLaw),
}

/// Gelfand–Tsetlin pattern of depth N: level k holds k particles of `L_k`
/// reflected off level k − 1.
#[derive(Debug, Clone)]
pub struct GtSim {
    system: System,
    /// For k = 1..N−1: level k as Y under level k + 1, and its `ĥ`.
    pairs: Vec<(TwoLevel, Eigenfunction)>,
}

impl GtSim {
    pub fn new(specs: Vec<DiffusionSpec>) -> Result<Self> {
        let n = specs.len();
        if n == 0 {
            return Err(Error::Config("a pattern needs at least one level".into()));
        }
        check_ladder(&specs)?;
        warn_uncertified(&specs[n - 1]);
        let mut levels = vec![LevelSpec::free(specs[0].clone(), 1, None)];
        let mut pairs = Vec::new();
        for k in 1..n {
            levels.push(LevelSpec::interlaced(specs[k].clone(), k + 1, ShapeTag::NNplus1));
            let tl = TwoLevel::new(&specs[k], InterlacingShape::new(ShapeTag::NNplus1, k))?;
            let h = eigenfunction_catalog(&EigenFamily::ConjugateVandermonde(specs[k].clone()), k)?;
            pairs.push((tl, h));
        }
        Ok(Self { system: System::new(levels)?, pairs })
    }

    pub fn system(&self) -> &System {
        &self.system
    }

    pub fn initial(&self, init: &GtInit, cfg: &SimConfig, streams: &RngStreams, path: u64) -> Result<Vec<Vec<f64>>> {
        match init {
            GtInit::Pattern(p) => Ok(p.clone()),
            GtInit::Entrance(law) => {
                let n = self.system.levels().len();
                if law.n != n {
                    return Err(Error::Config(format!("entrance law has {} particles for a depth-{n} pattern", law.n)));
                }
                check_entrance_time(law, cfg)?;
                let mut rng = streams.stream(path, INIT_LEVEL, 0);
                let mut levels = vec![law.sample(&mut rng)?];
                for (tl, h) in self.pairs.iter().rev() {
                    let y = sample_fiber(tl, levels.last().expect("top level"), Some(h), &mut rng)?;
                    levels.push(y);
                }
                levels.reverse();
                Ok(levels)
            }
        }
    }

    pub fn run(&self, init: &GtInit, cfg: &SimConfig, streams: &RngStreams, path: u64) -> Result<PathBundle> {
        let start = self.initial(init, cfg, streams, path)?;
        simulate(&self.system, &start, cfg, streams, path)
    }
}

/// One run of [`GtSim`].
pub fn simulate_gt(specs: Vec<DiffusionSpec>, init: &GtInit, cfg: &SimConfig, streams: &RngStreams, path: u64) -> Result<PathBundle> {
    GtSim::new(specs)?.run(init, cfg, streams, path)
}

/// Edge system: particle k (level k − 1 of the system) has drift
/// `b + (n − k)a′` and is pushed off particle k − 1.
pub fn edge_system(spec: &DiffusionSpec, n: usize, side: EdgeSide) -> Result<System> {
    if n == 0 {
        return Err(Error::Config("an edge system needs at least one particle".into()));
    }
    warn_uncertified(spec);
    let mut levels = Vec::with_capacity(n);
    for k in 1..=n {
        let s = spec.drift_shifted(n - k)?;
        levels.push(if k == 1 { LevelSpec::free(s, 1, None) } else { LevelSpec::pushed(s, side) });
    }
    let sys = System::new(levels)?;
    for b in [spec.behavior_l, spec.behavior_r] {
        use crate::diffusion1d::BoundaryBehavior::*;
        if !matches!(b, Natural | Entrance) {
            return Err(Error::BoundaryAssumption(format!("{}: edge systems need natural or entrance boundaries, found {b}", spec.name)));
        }
    }
    Ok(sys)
}

/// One run of the edge system from `init` (ordered per side).
pub fn simulate_edge(
    spec: &DiffusionSpec,
    n: usize,
    side: EdgeSide,
    init: &[f64],
    cfg: &SimConfig,
    streams: &RngStreams,
    path: u64,
) -> Result<PathBundle> {
    let sys = edge_system(spec, n, side)?;
    if init.len() != n {
        return Err(Error::Domain(format!("{} starting points for {n} particles", init.len())));
    }
    let start: Vec<Vec<f64>> = init.iter().map(|&v| vec![v]).collect();
    simulate(&sys, &start, cfg, streams, path)
}

/// Runs `f` for paths `0..paths` in parallel; results come back in path order.
pub fn run_paths<T, F>(paths: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    (0..paths).into_par_iter().map(|p| f(p)).collect()
}
