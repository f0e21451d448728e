use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::diffusion1d::{BoundaryBehavior, DiffusionSpec};
use crate::error::{Error, Result};
use crate::kmgroup::Eigenfunction;
use crate::twolevel::{InterlacingShape, ShapeTag};

use super::rng::RngStreams;
use super::skorokhod::project;

/// Which way an edge system pushes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeSide {
    /// Increasing particles, each pushed up off its predecessor.
    Right,
    /// Decreasing particles, each pushed down off its predecessor.
    Left,
}

/// How a level sees the level below it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    /// Autonomous: no barrier from below. Particles stop the run on collision.
    Free,
    /// Reflected onto the cofiber of the level below, which plays Y.
    Interlaced(ShapeTag),
    /// A single particle pushed off the single particle below.
    Pushed(EdgeSide),
}

/// One level of a reflected system.
#[derive(Debug, Clone)]
pub struct LevelSpec {
    pub spec: DiffusionSpec,
    pub size: usize,
    pub relation: Relation,
    /// Doob transform of a free level: adds `2a ∂ log h` to the drift.
    pub h: Option<Eigenfunction>,
}

impl LevelSpec {
    pub fn free(spec: DiffusionSpec, size: usize, h: Option<Eigenfunction>) -> Self {
        Self { spec, size, relation: Relation::Free, h }
    }

    pub fn interlaced(spec: DiffusionSpec, size: usize, tag: ShapeTag) -> Self {
        Self { spec, size, relation: Relation::Interlaced(tag), h: None }
    }

    pub fn pushed(spec: DiffusionSpec, side: EdgeSide) -> Self {
        Self { spec, size: 1, relation: Relation::Pushed(side), h: None }
    }
}

/// Levels bottom-up; each level only sees the one below it.
#[derive(Debug, Clone)]
pub struct System {
    levels: Vec<LevelSpec>,
}

fn shape_over(tag: ShapeTag, below: usize) -> Option<InterlacingShape> {
    let n = match tag {
        ShapeTag::NNplus1 | ShapeTag::NN => below,
        ShapeTag::Nplus1N => below.checked_sub(1)?,
    };
    Some(InterlacingShape::new(tag, n))
}

impl System {
    pub fn new(levels: Vec<LevelSpec>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Config("a system needs at least one level".into()));
        }
        for (k, lv) in levels.iter().enumerate() {
            let bad = |msg: String| Err(Error::Config(format!("level {k} ({}): {msg}", lv.spec.name)));
            if let Some(h) = &lv.h {
                if lv.relation != Relation::Free {
                    return bad("only free levels take a Doob transform".into());
                }
                if h.n() != lv.size {
                    return bad(format!("h has {} variables for {} particles", h.n(), lv.size));
                }
            }
            match lv.relation {
                Relation::Free => {}
                _ if k == 0 => return bad("the bottom level must be free".into()),
                Relation::Interlaced(tag) => {
                    let below = levels[k - 1].size;
                    let shape = match shape_over(tag, below) {
                        Some(s) if s.x_len() == lv.size => s,
                        _ => return bad(format!("{} particles cannot sit over {below} as {tag}", lv.size)),
                    };
                    shape.check_spec(&lv.spec)?;
                }
                Relation::Pushed(_) => {
                    if lv.size != 1 || levels[k - 1].size != 1 {
                        return bad("edge levels hold one particle each".into());
                    }
                    for b in [lv.spec.behavior_l, lv.spec.behavior_r] {
                        if !matches!(b, BoundaryBehavior::Natural | BoundaryBehavior::Entrance) {
                            return Err(Error::BoundaryAssumption(format!(
                                "{}: edge systems need natural or entrance boundaries, found {b}",
                                lv.spec.name
                            )));
                        }
                    }
                }
            }
        }
        Ok(Self { levels })
    }

    pub fn levels(&self) -> &[LevelSpec] {
        &self.levels
    }

    /// Barriers on particle `i` of level `k` set by level `k − 1`; `∓∞` where none.
    fn neighbor_barriers(&self, k: usize, below: &[f64], out: &mut Vec<(f64, f64)>) {
        out.clear();
        let lv = &self.levels[k];
        match lv.relation {
            Relation::Free => out.resize(lv.size, (f64::NEG_INFINITY, f64::INFINITY)),
            Relation::Interlaced(tag) => {
                let shape = shape_over(tag, below.len()).expect("validated");
                out.extend(shape.cofiber(below, f64::NEG_INFINITY, f64::INFINITY));
            }
            Relation::Pushed(EdgeSide::Right) => out.push((below[0], f64::INFINITY)),
            Relation::Pushed(EdgeSide::Left) => out.push((f64::NEG_INFINITY, below[0])),
        }
    }

    /// Sizes, ordering, the relation to the level below and the state interval.
    pub fn check_state(&self, state: &[Vec<f64>]) -> Result<()> {
        if state.len() != self.levels.len() {
            return Err(Error::Domain(format!("{} levels given for a {}-level system", state.len(), self.levels.len())));
        }
        let mut bars = Vec::new();
        for (k, (lv, x)) in self.levels.iter().zip(state).enumerate() {
            if x.len() != lv.size {
                return Err(Error::Domain(format!("level {k}: {} positions for {} particles", x.len(), lv.size)));
            }
            if x.iter().any(|&v| !(v >= lv.spec.l && v <= lv.spec.r)) {
                return Err(Error::Domain(format!("level {k}: {x:?} leaves [{}, {}]", lv.spec.l, lv.spec.r)));
            }
            if x.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::Domain(format!("level {k}: {x:?} is not ordered")));
            }
            if k > 0 {
                self.neighbor_barriers(k, &state[k - 1], &mut bars);
                if x.iter().zip(&bars).any(|(&v, &(lo, hi))| v < lo || v > hi) {
                    return Err(Error::Domain(format!("level {k}: {x:?} violates its relation to {:?}", state[k - 1])));
                }
            }
        }
        Ok(())
    }
}

/// Time grid and what to keep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub t0: f64,
    pub horizon: f64,
    pub dt: f64,
    pub record: Record,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Record {
    /// Every grid time.
    Full,
    /// Start and end only; k increments summed over the run.
    Terminal,
}

impl SimConfig {
    pub fn new(horizon: f64, dt: f64) -> Self {
        Self { t0: 0.0, horizon, dt, record: Record::Terminal }
    }

    pub fn full(mut self) -> Self {
        self.record = Record::Full;
        self
    }

    pub fn from(mut self, t0: f64) -> Self {
        self.t0 = t0;
        self
    }

    fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.horizon > self.t0) {
            return Err(Error::Config(format!("horizon {} must exceed the start time {}", self.horizon, self.t0)));
        }
        Ok((((self.horizon - self.t0) / self.dt) - 1e-9).ceil().max(1.0) as usize)
    }
}

/// Why a run stopped early.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopEvent {
    /// Two particles of a free level met.
    Collision { level: usize },
    /// A particle reached an absorbing endpoint.
    Boundary { level: usize, particle: usize },
}

/// Trajectory of one level. Outer index is the recorded time.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LevelPath {
    pub positions: Vec<Vec<f64>>,
    /// Push from below over `(grid[i−1], grid[i]]`; zero at `i = 0`.
    pub k_lower: Vec<Vec<f64>>,
    /// Push from above over the same intervals.
    pub k_upper: Vec<Vec<f64>>,
}

/// One simulated path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBundle {
    pub grid: Vec<f64>,
    pub levels: Vec<LevelPath>,
    /// `+∞` unless the run stopped.
    pub tau: f64,
    pub event: Option<StopEvent>,
    pub seed: u64,
    pub path: u64,
    /// Euler steps taken.
    pub steps: usize,
    /// Steps in which some particle was pushed.
    pub contact_steps: usize,
    /// Steps ending with two particles of an interlaced level coincident.
    pub pinch_steps: usize,
}

impl PathBundle {
    pub fn stopped(&self) -> bool {
        self.event.is_some()
    }

    /// Last recorded positions of a level.
    pub fn terminal(&self, level: usize) -> &[f64] {
        self.levels[level].positions.last().expect("a bundle records its start")
    }

    pub fn contact_fraction(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.contact_steps as f64 / self.steps as f64
        }
    }
}

#[inline]
fn clamp_to(x: f64, l: f64, r: f64) -> f64 {
    x.max(l).min(r)
}

/// Euler–Maruyama with full truncation, Doob drift on free levels, per-step
/// projection onto the barriers from the level below.
///
/// Endpoint rules apply only to particles not shielded by a neighbor barrier
/// on that side: regular reflecting ends project (and count in k), finite
/// entrance or natural ends mirror, absorbing ends stop the run.
pub fn simulate(system: &System, init: &[Vec<f64>], cfg: &SimConfig, streams: &RngStreams, path: u64) -> Result<PathBundle> {
    let steps = cfg.steps()?;
    system.check_state(init)?;
    let levels = system.levels();
    let mut rngs: Vec<Vec<ChaCha8Rng>> = levels
        .iter()
        .enumerate()
        .map(|(k, lv)| (0..lv.size).map(|i| streams.stream(path, k as u32, i as u32)).collect())
        .collect();

    let zeros = |k: usize| vec![0.0; levels[k].size];
    let mut bundle = PathBundle {
        grid: vec![cfg.t0],
        levels: (0..levels.len())
            .map(|k| LevelPath { positions: vec![init[k].clone()], k_lower: vec![zeros(k)], k_upper: vec![zeros(k)] })
            .collect(),
        tau: f64::INFINITY,
        event: None,
        seed: streams.seed,
        path,
        steps: 0,
        contact_steps: 0,
        pinch_steps: 0,
    };
    let mut state: Vec<Vec<f64>> = init.to_vec();
    let mut acc_lo: Vec<Vec<f64>> = (0..levels.len()).map(zeros).collect();
    let mut acc_hi = acc_lo.clone();
    let mut bars = Vec::new();
    let mut grad = Vec::new();
    let mut drift = Vec::new();
    let mut t = cfg.t0;
    let mut prev = state.clone();
    let mut prev_lo = acc_lo.clone();
    let mut prev_hi = acc_lo.clone();

    'run: for step in 0..steps {
        let t_next = if step + 1 == steps { cfg.horizon } else { cfg.t0 + (step + 1) as f64 * cfg.dt };
        let h = t_next - t;
        let sq = h.sqrt();
        let mut touched = false;
        let mut pinched = false;
        for k in 0..levels.len() {
            prev[k].copy_from_slice(&state[k]);
            prev_lo[k].copy_from_slice(&acc_lo[k]);
            prev_hi[k].copy_from_slice(&acc_hi[k]);
        }
        for k in 0..levels.len() {
            let lv = &levels[k];
            let spec = &lv.spec;
            let (l, r) = (spec.l, spec.r);
            if lv.size == 0 {
                continue;
            }
            drift.clear();
            for &x in &state[k] {
                drift.push(spec.b(clamp_to(x, l, r)));
            }
            if let Some(hf) = &lv.h {
                hf.grad_log(&state[k], &mut grad);
                for (i, d) in drift.iter_mut().enumerate() {
                    *d += 2.0 * spec.a(clamp_to(state[k][i], l, r)).max(0.0) * grad[i];
                }
            }
            system.neighbor_barriers(k, if k > 0 { &state[k - 1] } else { &[] }, &mut bars);
            for i in 0..lv.size {
                let x = state[k][i];
                let sigma = (2.0 * spec.a(clamp_to(x, l, r)).max(0.0)).sqrt();
                let xi: f64 = rngs[k][i].sample(StandardNormal);
                let mut cand = x + drift[i] * h + sigma * sq * xi;
                let (mut lo, mut hi) = bars[i];
                if lo == f64::NEG_INFINITY && l.is_finite() {
                    match spec.behavior_l {
                        BoundaryBehavior::RegularReflecting => lo = l,
                        BoundaryBehavior::Entrance | BoundaryBehavior::Natural => {
                            if cand < l {
                                cand = clamp_to(2.0 * l - cand, l, r);
                            }
                        }
                        BoundaryBehavior::Exit | BoundaryBehavior::RegularAbsorbing => {
                            if cand <= l {
                                bundle.tau = t_next;
                                bundle.event = Some(StopEvent::Boundary { level: k, particle: i });
                                break 'run;
                            }
                        }
                    }
                }
                if hi == f64::INFINITY && r.is_finite() {
                    match spec.behavior_r {
                        BoundaryBehavior::RegularReflecting => hi = r,
                        BoundaryBehavior::Entrance | BoundaryBehavior::Natural => {
                            if cand > r {
                                cand = clamp_to(2.0 * r - cand, l, r);
                            }
                        }
                        BoundaryBehavior::Exit | BoundaryBehavior::RegularAbsorbing => {
                            if cand >= r {
                                bundle.tau = t_next;
                                bundle.event = Some(StopEvent::Boundary { level: k, particle: i });
                                break 'run;
                            }
                        }
                    }
                }
                let s = project(cand, lo, hi);
                if s.dk_lower > 0.0 || s.dk_upper > 0.0 {
                    touched = true;
                }
                state[k][i] = s.x;
                acc_lo[k][i] += s.dk_lower;
                acc_hi[k][i] += s.dk_upper;
            }
            if lv.size > 1 && state[k].windows(2).any(|w| w[1] - w[0] <= 0.0) {
                if lv.relation == Relation::Free {
                    bundle.tau = t_next;
                    bundle.event = Some(StopEvent::Collision { level: k });
                    break 'run;
                }
                // An interlaced level only closes a gap when both neighbours
                // were projected onto the same barrier in one step.
                pinched = true;
            }
        }
        bundle.steps += 1;
        if touched {
            bundle.contact_steps += 1;
        }
        if pinched {
            bundle.pinch_steps += 1;
        }
        for k in 1..levels.len() {
            system.neighbor_barriers(k, &state[k - 1], &mut bars);
            assert!(
                state[k].iter().zip(&bars).all(|(&v, &(lo, hi))| lo <= v && v <= hi),
                "interlacing lost at level {k}, t = {t_next}"
            );
        }
        t = t_next;
        if cfg.record == Record::Full || step + 1 == steps {
            bundle.grid.push(t);
            for (k, lp) in bundle.levels.iter_mut().enumerate() {
                lp.positions.push(state[k].clone());
                lp.k_lower.push(std::mem::replace(&mut acc_lo[k], vec![0.0; levels[k].size]));
                lp.k_upper.push(std::mem::replace(&mut acc_hi[k], vec![0.0; levels[k].size]));
            }
        }
    }
    if bundle.stopped() && cfg.record == Record::Terminal && *bundle.grid.last().unwrap() < t {
        // The last completed step is the terminal state.
        bundle.grid.push(t);
        for (k, lp) in bundle.levels.iter_mut().enumerate() {
            lp.positions.push(prev[k].clone());
            lp.k_lower.push(prev_lo[k].clone());
            lp.k_upper.push(prev_hi[k].clone());
        }
    }
    Ok(bundle)
}
