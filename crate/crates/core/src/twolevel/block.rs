use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diffusion1d::{scale_speed, DiffusionSpec, DualPair, ScaleSpeed, TransitionKernel};
use crate::error::{Error, Result};
use crate::kmgroup::Eigenfunction;
use crate::linalg::det_in_place;
use crate::quad::{self, GaussLegendre, NodeMap};

use super::shape::{InterlacingConfig, InterlacingShape};
use super::testfn::TestFunction;

pub(crate) const GL_NODES: usize = 32;

/// The four blocks of `q_t((x, y), (x′, y′))` and their determinant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockKernelEval {
    /// `p_t(x_i, x′_j)`, n₂ × n₂.
    pub a: Vec<Vec<f64>>,
    /// `m̂(y′_j)(P_t 1_{[l, y′_j]}(x_i) − 1(j ≥ i))` (strict for n,n), n₂ × n₁.
    pub b: Vec<Vec<f64>>,
    /// `−∂_{y_i} p_t(y_i, x′_j) / m̂(y_i)`, n₁ × n₂.
    pub c: Vec<Vec<f64>>,
    /// `p̂_t(y_i, y′_j)`, n₁ × n₁.
    pub d: Vec<Vec<f64>>,
    pub value: f64,
}

/// Paired left and right sides of an identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub lhs: f64,
    pub rhs: f64,
}

impl Residual {
    pub fn abs(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }

    /// Relative to `|lhs|`.
    pub fn rel(&self) -> f64 {
        self.abs() / self.lhs.abs()
    }
}

/// Union of kernel windows over several start points.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Window {
    pub lo: f64,
    pub hi: f64,
    /// Width of the narrowest single window; sets the panel count.
    pub narrow: f64,
}

impl Window {
    pub(crate) fn of(k: &TransitionKernel, t: f64, pts: &[f64]) -> Option<Self> {
        let mut w = Window { lo: f64::INFINITY, hi: f64::NEG_INFINITY, narrow: f64::INFINITY };
        for &p in pts {
            let (a, b) = k.window(t, p);
            w.lo = w.lo.min(a);
            w.hi = w.hi.max(b);
            w.narrow = w.narrow.min(b - a);
        }
        (w.hi > w.lo).then_some(w)
    }

    pub(crate) fn union(self, o: Option<Self>) -> Self {
        match o {
            None => self,
            Some(o) => Window { lo: self.lo.min(o.lo), hi: self.hi.max(o.hi), narrow: self.narrow.min(o.narrow) },
        }
    }

    pub(crate) fn panels(&self, a: f64, b: f64, min: usize) -> usize {
        ((4.0 * (b - a) / self.narrow).ceil() as usize).clamp(min, 64)
    }
}

/// Map for a segment `[a, b]` of `k`'s state space: clusters nodes at a
/// finite left endpoint where densities may be power-law singular.
pub(crate) fn segment_map(k: &TransitionKernel, a: f64) -> NodeMap {
    match k.lower_map() {
        NodeMap::SqrtLower if a <= k.l => NodeMap::SqrtLower,
        NodeMap::Log if a > 0.0 => NodeMap::Log,
        _ => NodeMap::Linear,
    }
}

/// A diffusion, its conjugate and an interlacing shape: everything the
/// block kernels need.
#[derive(Debug, Clone)]
pub struct TwoLevel {
    pub shape: InterlacingShape,
    pub pair: DualPair,
    dual_ss: ScaleSpeed,
    pub(crate) rule: GaussLegendre<f64>,
}

impl TwoLevel {
    /// Fails when the diffusion violates the shape's boundary assumptions.
    pub fn new(spec: &DiffusionSpec, shape: InterlacingShape) -> Result<Self> {
        shape.check_spec(spec)?;
        let pair = DualPair::new(spec)?;
        let dual_ss = scale_speed(&pair.dual_spec)?;
        Ok(Self { shape, pair, dual_ss, rule: GaussLegendre::new(GL_NODES) })
    }

    pub fn l(&self) -> f64 {
        self.pair.spec.l
    }

    pub fn r(&self) -> f64 {
        self.pair.spec.r
    }

    /// Speed density of the conjugate diffusion.
    #[inline]
    pub fn m_hat(&self, y: f64) -> f64 {
        self.dual_ss.m(y)
    }

    pub(crate) fn check(&self, x: &[f64], y: &[f64]) -> Result<()> {
        if !self.shape.interlaces(x, y) {
            return Err(Error::Domain(format!("x = {x:?}, y = {y:?} do not interlace as {}", self.shape)));
        }
        let (l, r) = (self.l(), self.r());
        if !x.iter().chain(y).all(|&v| v > l && v < r) {
            return Err(Error::Domain(format!("x = {x:?}, y = {y:?} not inside ({l}, {r})")));
        }
        Ok(())
    }

    fn b_entry(&self, t: f64, xi: f64, yj: f64, i: usize, j: usize) -> f64 {
        let ind = if self.shape.indicator(i, j) { 1.0 } else { 0.0 };
        self.m_hat(yj) * (self.pair.kernel.cdf(t, xi, yj) - ind)
    }

    fn c_entry(&self, t: f64, yi: f64, xj: f64, m_hat_yi: f64) -> Result<f64> {
        Ok(-self.pair.kernel.dx(t, yi, xj, 1)? / m_hat_yi)
    }

    /// The four blocks at `(x, y) → (x′, y′)`.
    pub fn blocks(&self, t: f64, x: &[f64], y: &[f64], xp: &[f64], yp: &[f64]) -> Result<BlockKernelEval> {
        self.check(x, y)?;
        self.check(xp, yp)?;
        let k = &self.pair.kernel;
        let a = x.iter().map(|&xi| xp.iter().map(|&u| k.try_density(t, xi, u)).collect::<Result<Vec<_>>>()).collect::<Result<Vec<_>>>()?;
        let b: Vec<Vec<f64>> = x
            .iter()
            .enumerate()
            .map(|(i, &xi)| yp.iter().enumerate().map(|(j, &v)| self.b_entry(t, xi, v, i, j)).collect())
            .collect();
        let c = y
            .iter()
            .map(|&yi| {
                let mh = self.m_hat(yi);
                xp.iter().map(|&u| self.c_entry(t, yi, u, mh)).collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let d = y
            .iter()
            .map(|&yi| yp.iter().map(|&v| self.pair.dual.try_density(t, yi, v)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let value = assemble_det(&a, &b, &c, &d);
        Ok(BlockKernelEval { a, b, c, d, value })
    }

    /// `q_t((x, y), (x′, y′))` without validation of the arguments.
    pub(crate) fn density_unchecked(&self, t: f64, x: &[f64], y: &[f64], xp: &[f64], yp: &[f64], buf: &mut Vec<f64>) -> Result<f64> {
        let (nx, ny) = (x.len(), y.len());
        let n = nx + ny;
        buf.clear();
        buf.resize(n * n, 0.0);
        let k = &self.pair.kernel;
        for (i, &xi) in x.iter().enumerate() {
            for (j, &u) in xp.iter().enumerate() {
                buf[i * n + j] = k.try_density(t, xi, u)?;
            }
            for (j, &v) in yp.iter().enumerate() {
                buf[i * n + nx + j] = self.b_entry(t, xi, v, i, j);
            }
        }
        for (i, &yi) in y.iter().enumerate() {
            let mh = self.m_hat(yi);
            let row = (nx + i) * n;
            for (j, &u) in xp.iter().enumerate() {
                buf[row + j] = self.c_entry(t, yi, u, mh)?;
            }
            for (j, &v) in yp.iter().enumerate() {
                buf[row + nx + j] = self.pair.dual.try_density(t, yi, v)?;
            }
        }
        Ok(det_in_place(buf, n))
    }

    /// `q_t((x, y), (x′, y′))`.
    pub fn density(&self, t: f64, x: &[f64], y: &[f64], xp: &[f64], yp: &[f64]) -> Result<f64> {
        self.check(x, y)?;
        self.check(xp, yp)?;
        self.density_unchecked(t, x, y, xp, yp, &mut Vec::new())
    }

    /// Window of the x′ columns: both levels' start points under `p_t`.
    fn x_window(&self, t: f64, x: &[f64], y: &[f64]) -> Result<Window> {
        let k = &self.pair.kernel;
        let w = Window::of(k, t, x).or_else(|| Window::of(k, t, y));
        let w = w.ok_or_else(|| Error::Quadrature("empty kernel window".into()))?;
        Ok(w.union(Window::of(k, t, y)))
    }

    /// Nodes for the Y level at time `t` started from `y`.
    pub(crate) fn y_nodes(&self, t: f64, y: &[f64]) -> Result<Vec<(Vec<f64>, f64)>> {
        let ny = y.len();
        if ny == 0 {
            return Ok(vec![(Vec::new(), 1.0)]);
        }
        let dual = &self.pair.dual;
        let w = Window::of(dual, t, y).ok_or_else(|| Error::Quadrature("empty dual window".into()))?;
        let panels = w.panels(w.lo, w.hi, 4);
        Ok(quad::ordered_nodes(&self.rule, w.lo, w.hi, ny, panels, segment_map(dual, w.lo)))
    }

    /// `∫ q_t((x, y), (x′, y′)) f(x′, y′) dx′` at fixed `y′`, optionally
    /// times `ĥ(y′)`.
    ///
    /// Column `j` of the x′ part depends on `x′_j` alone and the x′ domain
    /// is the box `cofiber(y′)`, so the tensor Gauss–Legendre rule factorizes
    /// into one-dimensional column integrals.
    pub fn x_integrated(&self, t: f64, x: &[f64], y: &[f64], yp: &[f64], f: &TestFunction) -> Result<f64> {
        let win = self.x_window(t, x, y)?;
        self.x_integrated_in(t, x, y, yp, f, &win)
    }

    fn x_integrated_in(&self, t: f64, x: &[f64], y: &[f64], yp: &[f64], f: &TestFunction, win: &Window) -> Result<f64> {
        let (nx, ny) = (x.len(), y.len());
        let n = nx + ny;
        let k = &self.pair.kernel;
        let cof = self.shape.cofiber(yp, self.l(), self.r());
        let mh: Vec<f64> = y.iter().map(|&v| self.m_hat(v)).collect();
        // (weight, node, column entries) per x′ column.
        let mut cols: Vec<Vec<(f64, f64, Vec<f64>)>> = Vec::with_capacity(nx);
        for &(a, b) in &cof {
            let (a, b) = (a.max(win.lo), b.min(win.hi));
            let mut col = Vec::new();
            if b > a {
                let nodes = quad::window_nodes(&self.rule, a, b, win.panels(a, b, 2), segment_map(k, a));
                for (u, w) in nodes {
                    let mut e = Vec::with_capacity(n);
                    for &xi in x {
                        e.push(k.try_density(t, xi, u)?);
                    }
                    for (i, &yi) in y.iter().enumerate() {
                        e.push(self.c_entry(t, yi, u, mh[i])?);
                    }
                    col.push((w, u, e));
                }
            }
            cols.push(col);
        }
        let mut ycols = vec![vec![0.0; n]; ny];
        for (j, &v) in yp.iter().enumerate() {
            for (i, &xi) in x.iter().enumerate() {
                ycols[j][i] = self.b_entry(t, xi, v, i, j);
            }
            for (i, &yi) in y.iter().enumerate() {
                ycols[j][nx + i] = self.pair.dual.try_density(t, yi, v)?;
            }
        }
        let mut buf = vec![0.0; n * n];
        let mut total = 0.0;
        for term in &f.terms {
            for (j, col) in cols.iter().enumerate() {
                let phi = term.x[j];
                for r in 0..n {
                    buf[r * n + j] = 0.0;
                }
                for (w, u, e) in col {
                    let wf = w * phi.eval(*u);
                    for r in 0..n {
                        buf[r * n + j] += wf * e[r];
                    }
                }
            }
            let mut psi = term.coef;
            for (j, ycol) in ycols.iter().enumerate() {
                psi *= term.y[j].eval(yp[j]);
                for r in 0..n {
                    buf[r * n + nx + j] = ycol[r];
                }
            }
            if psi != 0.0 {
                total += psi * det_in_place(&mut buf.clone(), n);
            }
        }
        Ok(total)
    }

    /// `x_integrated` with `f ≡ 1`: must equal `det(p̂_t(y_i, y′_j))`.
    pub fn x_marginal(&self, t: f64, x: &[f64], y: &[f64], yp: &[f64]) -> Result<f64> {
        self.check(x, y)?;
        self.x_integrated(t, x, y, yp, &TestFunction::one(x.len(), y.len()))
    }

    /// `(Q_t f)(x, y)`, or `(Q_t ĥf)(x, y)` when a weight is given.
    pub fn q_apply(&self, t: f64, x: &[f64], y: &[f64], f: &TestFunction, weight: Option<&Eigenfunction>) -> Result<f64> {
        self.check(x, y)?;
        if f.nx != x.len() || f.ny != y.len() {
            return Err(Error::Domain(format!("test function is on W^({},{}), point on W^({},{})", f.ny, f.nx, y.len(), x.len())));
        }
        if let Some(h) = weight {
            if h.n() != y.len() {
                return Err(Error::Domain(format!("{} has {} particles, Y level has {}", h.name, h.n(), y.len())));
            }
        }
        let win = self.x_window(t, x, y)?;
        let nodes = self.y_nodes(t, y)?;
        let parts = nodes
            .par_iter()
            .map(|(yp, w)| {
                let hw = weight.map_or(1.0, |h| h.eval(yp));
                if hw == 0.0 {
                    return Ok(0.0);
                }
                Ok(w * hw * self.x_integrated_in(t, x, y, yp, f, &win)?)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(parts.iter().sum())
    }
}

fn assemble_det(a: &[Vec<f64>], b: &[Vec<f64>], c: &[Vec<f64>], d: &[Vec<f64>]) -> f64 {
    let (nx, ny) = (a.len(), d.len());
    let n = nx + ny;
    let mut buf = vec![0.0; n * n];
    for i in 0..nx {
        buf[i * n..i * n + nx].copy_from_slice(&a[i]);
        buf[i * n + nx..(i + 1) * n].copy_from_slice(&b[i]);
    }
    for i in 0..ny {
        let row = (nx + i) * n;
        buf[row..row + nx].copy_from_slice(&c[i]);
        buf[row + nx..row + n].copy_from_slice(&d[i]);
    }
    det_in_place(&mut buf, n)
}

/// `q_t(z, z′)` for a catalog diffusion.
pub fn block_kernel(spec: &DiffusionSpec, shape: InterlacingShape, t: f64, z: &InterlacingConfig, zp: &InterlacingConfig) -> Result<f64> {
    if z.shape != shape || zp.shape != shape {
        return Err(Error::Domain(format!("configurations are not on {shape}")));
    }
    TwoLevel::new(spec, shape)?.density(t, &z.x, &z.y, &zp.x, &zp.y)
}
