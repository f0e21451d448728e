use std::sync::Mutex;

use rayon::prelude::*;

use crate::diffusion1d::DiffusionSpec;
use crate::error::{Error, Result};
use crate::kmgroup::{symmetric_chamber_integral, Eigenfunction, EntranceLaw};
use crate::linalg::det_in_place;
use crate::quad::{self, NodeMap};

use super::block::{segment_map, Residual, TwoLevel, Window};
use super::shape::{InterlacingConfig, InterlacingShape};
use super::testfn::TestFunction;

/// Dyadic shells added to an infinite fiber end before giving up.
const MAX_SHELLS: usize = 60;

/// Panel cap per coordinate so that tensor rules stay near 10⁵ nodes.
fn panel_cap(dims: usize) -> usize {
    match dims {
        0 | 1 => 16,
        2 => 6,
        _ => 3,
    }
}

/// Node with the dyadic shell it belongs to; 0 for bounded pieces.
type Labeled = (f64, f64, usize);

impl TwoLevel {
    /// One coordinate of the fiber: GL nodes on a bounded interval, or a
    /// unit core plus dyadic shells towards an infinite end.
    fn fiber_axis(&self, a: f64, b: f64) -> Vec<Labeled> {
        let rule = &self.rule;
        let lin = |lo: f64, hi: f64, s: usize| quad::window_nodes(rule, lo, hi, 1, NodeMap::Linear).into_iter().map(move |(u, w)| (u, w, s));
        match (a.is_finite(), b.is_finite()) {
            (true, true) => {
                let map = if a <= self.l() { self.pair.dual.lower_map() } else { NodeMap::Linear };
                let map = if map == NodeMap::Log { NodeMap::Linear } else { map };
                quad::window_nodes(rule, a, b, 2, map).into_iter().map(|(u, w)| (u, w, 0)).collect()
            }
            (false, true) => {
                let mut v: Vec<Labeled> = lin(b - 1.0, b, 0).collect();
                for k in 1..=MAX_SHELLS {
                    let (inner, outer) = (2f64.powi(k as i32 - 1), 2f64.powi(k as i32));
                    v.extend(lin(b - outer, b - inner, k));
                }
                v
            }
            (true, false) => {
                let mut v: Vec<Labeled> = lin(a, a + 1.0, 0).collect();
                for k in 1..=MAX_SHELLS {
                    let (inner, outer) = (2f64.powi(k as i32 - 1), 2f64.powi(k as i32));
                    v.extend(lin(a + inner, a + outer, k));
                }
                v
            }
            (false, false) => {
                let mut v: Vec<Labeled> = lin(-1.0, 1.0, 0).collect();
                for k in 1..=MAX_SHELLS {
                    let (inner, outer) = (2f64.powi(k as i32 - 1), 2f64.powi(k as i32));
                    v.extend(lin(-outer, -inner, k));
                    v.extend(lin(inner, outer, k));
                }
                v
            }
        }
    }

    /// `∫_{fiber(x)} Π m̂(y_i) g(y) dy`.
    ///
    /// Infinite fiber ends are covered shell by shell; the integral counts
    /// as converged once two consecutive shells add less than 1e-14 of the
    /// running total, and as divergent when the shells run out.
    pub fn fiber_integral<G>(&self, x: &[f64], g: G) -> Result<f64>
    where
        G: Fn(&[f64]) -> Result<f64> + Sync,
    {
        let (l, r) = (self.l(), self.r());
        let axes: Vec<Vec<Labeled>> = self.shape.fiber(x, l, r).iter().map(|&(a, b)| self.fiber_axis(a, b)).collect();
        let unbounded = axes.iter().any(|ax| ax.iter().any(|n| n.2 > 0));
        let mut total = 0.0;
        let mut quiet = 0;
        for shell in 0..=MAX_SHELLS {
            let mut pts = Vec::new();
            tensor_layer(&axes, shell, &mut Vec::new(), 1.0, false, &mut pts);
            let part: f64 = pts
                .par_iter()
                .map(|(y, w)| {
                    let m: f64 = y.iter().map(|&v| self.m_hat(v)).product();
                    if m == 0.0 {
                        return Ok(0.0);
                    }
                    Ok(w * m * g(y)?)
                })
                .collect::<Result<Vec<f64>>>()?
                .iter()
                .sum();
            total += part;
            if !total.is_finite() {
                return Err(Error::Divergent(format!("fiber integral over {x:?} is not finite")));
            }
            if !unbounded {
                return Ok(total);
            }
            if shell >= 3 && part.abs() <= 1e-14 * total.abs() {
                quiet += 1;
                if quiet == 2 {
                    return Ok(total);
                }
            } else {
                quiet = 0;
            }
        }
        Err(Error::Divergent(format!(
            "fiber integral over {x:?} still growing after {MAX_SHELLS} dyadic shells (total {total:e})"
        )))
    }

    /// `h(x) = Λ(Π ĥ)(x)`.
    pub fn h_from_hat(&self, h_hat: &Eigenfunction, x: &[f64]) -> Result<f64> {
        self.fiber_integral(x, |y| Ok(h_hat.eval(y)))
    }

    /// `(Λ f)(x)`, or `(Λ^ĥ f)(x) = Λ(ĥ f)(x)/h(x)` when `ĥ` is given.
    pub fn lambda_apply(&self, f: &TestFunction, x: &[f64], h_hat: Option<&Eigenfunction>) -> Result<f64> {
        match h_hat {
            None => self.fiber_integral(x, |y| Ok(f.eval(x, y))),
            Some(h) => {
                let num = self.fiber_integral(x, |y| Ok(h.eval(y) * f.eval(x, y)))?;
                let den = self.h_from_hat(h, x)?;
                if !(den > 0.0) {
                    return Err(Error::Domain(format!("h = {den} at {x:?}")));
                }
                Ok(num / den)
            }
        }
    }

    /// `∫ q_t((x, y), ·)`: total mass of the sub-Markov kernel.
    pub fn submarkov_mass(&self, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
        self.q_apply(t, x, y, &TestFunction::one(x.len(), y.len()), None)
    }

    /// `(Q^ĥ_t 1)(x, y) = e^{−λt} (Q_t ĥ)(x, y) / ĥ(y)`.
    pub fn h_transformed_mass(&self, h_hat: &Eigenfunction, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
        let q = self.q_apply(t, x, y, &TestFunction::one(x.len(), y.len()), Some(h_hat))?;
        Ok((-h_hat.rate * t).exp() * q / h_hat.eval(y))
    }

    /// `Q_t f` against `P̂ⁿ_t f` for `f` of the Y level only: the X level
    /// integrates out of the block determinant.
    pub fn dynkin_residual(&self, t: f64, f: &TestFunction, x: &[f64], y: &[f64]) -> Result<Residual> {
        if !f.y_only() {
            return Err(Error::Domain("Dynkin check needs a test function of the Y level only".into()));
        }
        let rhs = self.q_apply(t, x, y, f, None)?;
        let ny = y.len();
        if ny == 0 {
            return Ok(Residual { lhs: f.eval_y(&[]), rhs });
        }
        // Karlin–McGregor side on its own, finer rule.
        let dual = &self.pair.dual;
        let w = Window::of(dual, t, y).ok_or_else(|| Error::Quadrature("empty dual window".into()))?;
        let panels = (w.panels(w.lo, w.hi, 4) + 2).min(panel_cap(ny) + 2);
        let nodes = quad::ordered_nodes(&self.rule, w.lo, w.hi, ny, panels, segment_map(dual, w.lo));
        let parts = nodes
            .par_iter()
            .map(|(yp, wt)| {
                let mut buf = vec![0.0; ny * ny];
                for i in 0..ny {
                    for j in 0..ny {
                        buf[i * ny + j] = dual.try_density(t, y[i], yp[j])?;
                    }
                }
                Ok(wt * det_in_place(&mut buf, ny) * f.eval_y(yp))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(Residual { lhs: parts.iter().sum(), rhs })
    }

    /// `P^{n₂,h}_t Λ^ĥ f` against `Λ^ĥ Q^ĥ_t f` at `x`.
    ///
    /// Both sides carry the common factor `e^{−λt}/h(x)`; `ĥ(y)` cancels
    /// between `Λ^ĥ` and `Q^ĥ_t`, so the right side never divides by it.
    pub fn master_intertwining_residual(&self, h_hat: &Eigenfunction, t: f64, f: &TestFunction, x: &[f64]) -> Result<Residual> {
        let nx = x.len();
        if !x.iter().all(|&v| v > self.l() && v < self.r()) || x.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Domain(format!("x = {x:?} is not an interior ordered point")));
        }
        let k = &self.pair.kernel;
        let win = Window::of(k, t, x).ok_or_else(|| Error::Quadrature("empty kernel window".into()))?;
        let panels = win.panels(win.lo, win.hi, 4).min(panel_cap(nx));
        let outer = quad::ordered_nodes(&self.rule, win.lo, win.hi, nx, panels, segment_map(k, win.lo));
        let lhs_parts = outer
            .par_iter()
            .map(|(xp, w)| {
                let mut buf = vec![0.0; nx * nx];
                for i in 0..nx {
                    for j in 0..nx {
                        buf[i * nx + j] = k.try_density(t, x[i], xp[j])?;
                    }
                }
                let d = det_in_place(&mut buf, nx);
                if d == 0.0 {
                    return Ok(0.0);
                }
                Ok(w * d * self.fiber_integral(xp, |yp| Ok(h_hat.eval(yp) * f.eval(xp, yp)))?)
            })
            .collect::<Result<Vec<f64>>>()?;
        let lhs: f64 = lhs_parts.iter().sum();
        let rhs = self.fiber_integral(x, |y| self.q_apply(t, x, y, f, Some(h_hat)))?;
        let norm = (-h_hat.rate * t).exp() / self.h_from_hat(h_hat, x)?;
        Ok(Residual { lhs: norm * lhs, rhs: norm * rhs })
    }

    /// `q_{s+t}(z, z″)` against `∫ q_s(z, z′) q_t(z′, z″) dz′`.
    pub fn chapman_residual(&self, s: f64, t: f64, x: &[f64], y: &[f64], x2: &[f64], y2: &[f64]) -> Result<Residual> {
        self.check(x, y)?;
        self.check(x2, y2)?;
        let direct = self.density_unchecked(s + t, x, y, x2, y2, &mut Vec::new())?;
        let (nx, ny) = (x.len(), y.len());
        let (k, dual) = (&self.pair.kernel, &self.pair.dual);
        let y_nodes = if ny == 0 {
            vec![(Vec::new(), 1.0)]
        } else {
            let w = Window::of(dual, s, y).ok_or_else(|| Error::Quadrature("empty dual window".into()))?;
            let w = w.union(Window::of(dual, t, y2));
            let panels = w.panels(w.lo, w.hi, 4).min(panel_cap(ny));
            quad::ordered_nodes(&self.rule, w.lo, w.hi, ny, panels, segment_map(dual, w.lo))
        };
        let xw = Window::of(k, s, x)
            .or_else(|| Window::of(k, s, y))
            .ok_or_else(|| Error::Quadrature("empty kernel window".into()))?
            .union(Window::of(k, s, y))
            .union(Window::of(k, t, x2))
            .union(Window::of(k, t, y2));
        let cap = panel_cap(nx);
        let first_err: Mutex<Option<Error>> = Mutex::new(None);
        let parts: Vec<f64> = y_nodes
            .par_iter()
            .map(|(yp, wy)| {
                let cof = self.shape.cofiber(yp, self.l(), self.r());
                let mut dims = Vec::with_capacity(nx);
                for &(a, b) in &cof {
                    let (a, b) = (a.max(xw.lo), b.min(xw.hi));
                    if b <= a {
                        return 0.0;
                    }
                    dims.push((a, b, segment_map(k, a)));
                }
                let panels = dims.iter().map(|&(a, b, _)| xw.panels(a, b, 2)).max().unwrap_or(2).min(cap);
                let (mut b1, mut b2) = (Vec::new(), Vec::new());
                let inner = quad::box_integral(&self.rule, &dims, panels, |xp| {
                    let q1 = self.density_unchecked(s, x, y, xp, yp, &mut b1);
                    let q2 = self.density_unchecked(t, xp, yp, x2, y2, &mut b2);
                    match (q1, q2) {
                        (Ok(a), Ok(b)) => a * b,
                        (Err(e), _) | (_, Err(e)) => {
                            first_err.lock().unwrap().get_or_insert(e);
                            0.0
                        }
                    }
                });
                wy * inner
            })
            .collect();
        if let Some(e) = first_err.into_inner().unwrap() {
            return Err(e);
        }
        Ok(Residual { lhs: direct, rhs: parts.iter().sum() })
    }

    /// `∫ μ_s(dx) Λ^ĥ Q^ĥ_t f(x)` against `∫ μ_{s+t}(dx) Λ^ĥ f(x)` for
    /// entrance laws of the X level.
    pub fn entrance_transport_residual(
        &self,
        mu_s: &EntranceLaw,
        mu_st: &EntranceLaw,
        h_hat: &Eigenfunction,
        t: f64,
        f: &TestFunction,
    ) -> Result<Residual> {
        let nx = self.shape.x_len();
        if mu_s.n != nx || mu_st.n != nx {
            return Err(Error::Domain(format!("entrance laws have {} and {} particles, X level has {nx}", mu_s.n, mu_st.n)));
        }
        let lam_q = |x: &[f64]| -> Result<f64> {
            let num = self.fiber_integral(x, |y| self.q_apply(t, x, y, f, Some(h_hat)))?;
            Ok((-h_hat.rate * t).exp() * num / self.h_from_hat(h_hat, x)?)
        };
        let lam = |x: &[f64]| self.lambda_apply(f, x, Some(h_hat));
        let lhs = integrate_law(mu_s, lam_q)?;
        let rhs = integrate_law(mu_st, lam)?;
        Ok(Residual { lhs, rhs })
    }
}

/// `∫_{W^n} μ(x) g(x) dx` on the law's own nodes, in parallel over the
/// strictly increasing node tuples.
fn integrate_law(mu: &EntranceLaw, g: impl Fn(&[f64]) -> Result<f64> + Sync) -> Result<f64> {
    let (nodes, _) = mu.nodes();
    let n = mu.n;
    let mut tuples = Vec::new();
    symmetric_chamber_integral(&nodes, n, |idx| {
        tuples.push(idx.to_vec());
        0.0
    });
    let parts = tuples
        .par_iter()
        .map(|idx| {
            let x: Vec<f64> = idx.iter().map(|&k| nodes[k].0).collect();
            let w: f64 = idx.iter().map(|&k| nodes[k].1).product();
            let d = mu.density(&x);
            if d == 0.0 || w == 0.0 {
                return Ok(0.0);
            }
            Ok(w * d * g(&x)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(parts.iter().sum())
}

/// Tensor nodes whose largest shell label is exactly `shell`.
fn tensor_layer(axes: &[Vec<Labeled>], shell: usize, pt: &mut Vec<f64>, w: f64, hit: bool, out: &mut Vec<(Vec<f64>, f64)>) {
    let d = pt.len();
    if d == axes.len() {
        if hit || shell == 0 {
            out.push((pt.clone(), w));
        }
        return;
    }
    for &(u, wu, s) in &axes[d] {
        if s > shell {
            continue;
        }
        pt.push(u);
        tensor_layer(axes, shell, pt, w * wu, hit || s == shell, out);
        pt.pop();
    }
}

fn engine(spec: &DiffusionSpec, shape: InterlacingShape) -> Result<TwoLevel> {
    TwoLevel::new(spec, shape)
}

fn on_shape(z: &InterlacingConfig, shape: InterlacingShape) -> Result<()> {
    if z.shape != shape {
        return Err(Error::Domain(format!("configuration is on {}, expected {shape}", z.shape)));
    }
    Ok(())
}

/// `∫ q_t(z, ·)`.
pub fn submarkov_mass(spec: &DiffusionSpec, shape: InterlacingShape, t: f64, z: &InterlacingConfig) -> Result<f64> {
    on_shape(z, shape)?;
    engine(spec, shape)?.submarkov_mass(t, &z.x, &z.y)
}

/// `(Λ f)(x)`, or `(Λ^ĥ f)(x)` when `ĥ` is given.
pub fn lambda_apply(spec: &DiffusionSpec, shape: InterlacingShape, f: &TestFunction, x: &[f64], h_hat: Option<&Eigenfunction>) -> Result<f64> {
    engine(spec, shape)?.lambda_apply(f, x, h_hat)
}

/// See [`TwoLevel::dynkin_residual`].
pub fn dynkin_residual(spec: &DiffusionSpec, shape: InterlacingShape, t: f64, f: &TestFunction, z: &InterlacingConfig) -> Result<Residual> {
    on_shape(z, shape)?;
    engine(spec, shape)?.dynkin_residual(t, f, &z.x, &z.y)
}

/// See [`TwoLevel::master_intertwining_residual`].
pub fn master_intertwining_residual(
    spec: &DiffusionSpec,
    shape: InterlacingShape,
    h_hat: &Eigenfunction,
    t: f64,
    f: &TestFunction,
    x: &[f64],
) -> Result<Residual> {
    engine(spec, shape)?.master_intertwining_residual(h_hat, t, f, x)
}

/// See [`TwoLevel::chapman_residual`].
pub fn chapman_residual(
    spec: &DiffusionSpec,
    shape: InterlacingShape,
    s: f64,
    t: f64,
    z: &InterlacingConfig,
    z2: &InterlacingConfig,
) -> Result<Residual> {
    on_shape(z, shape)?;
    on_shape(z2, shape)?;
    engine(spec, shape)?.chapman_residual(s, t, &z.x, &z.y, &z2.x, &z2.y)
}
