use crate::diffusion1d::{spectrum, DiffusionSpec, TransitionKernel};
use crate::error::{Error, Result};
use crate::linalg::{det_in_place, det_with};
use crate::quad::{self, GaussLegendre, NodeMap};

use super::eigen::Eigenfunction;
use super::weyl::for_each_strict_tuple;

/// Karlin–McGregor density `det(p_t(x_i, y_j))` of n copies killed on
/// collision. Only the interior density enters: particles absorbed at a
/// boundary are killed too.
pub fn km_density(kernel: &TransitionKernel, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Domain(format!("dimension mismatch {} vs {}", x.len(), y.len())));
    }
    let n = x.len();
    let mut buf = Vec::with_capacity(n * n);
    for &xi in x {
        for &yj in y {
            buf.push(kernel.try_density(t, xi, yj)?);
        }
    }
    Ok(det_in_place(&mut buf, n))
}

/// Doob transform `e^{−λt} h(y)/h(x) · det(p_t(x_i, y_j))`.
pub fn h_transform_density(kernel: &TransitionKernel, h: &Eigenfunction, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    let hx = h.eval(x);
    if !(hx > 0.0) {
        return Err(Error::Domain(format!("{} is not positive at {x:?} (value {hx})", h.name)));
    }
    let km = km_density(kernel, t, x, y)?;
    Ok((-h.rate * t).exp() * h.eval(y) / hx * km)
}

pub(crate) const GL_NODES: usize = 32;

/// Gauss–Legendre nodes on the union of the kernel windows from `xs`.
///
/// The panel count keeps at least four panels per narrowest window.
pub fn chamber_nodes(kernel: &TransitionKernel, t: f64, xs: &[f64]) -> Vec<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut narrow = f64::INFINITY;
    for &x in xs {
        let (a, b) = kernel.window(t, x);
        lo = lo.min(a);
        hi = hi.max(b);
        narrow = narrow.min(b - a);
    }
    let panels = ((4.0 * (hi - lo) / narrow).ceil() as usize).clamp(4, 64);
    let rule = GaussLegendre::<f64>::new(GL_NODES);
    quad::window_nodes(&rule, lo, hi, panels, kernel.lower_map())
}

/// `∫_{W^n} f` for `f` symmetric and vanishing where two coordinates meet,
/// over the tensor grid `nodes`: the box integral divided by n! equals the
/// sum over strictly increasing node tuples.
pub fn symmetric_chamber_integral(nodes: &[(f64, f64)], n: usize, mut f: impl FnMut(&[usize]) -> f64) -> f64 {
    let mut total = 0.0;
    for_each_strict_tuple(nodes.len(), n, |idx| {
        let w: f64 = idx.iter().map(|&k| nodes[k].1).product();
        if w != 0.0 {
            total += w * f(idx);
        }
    });
    total
}

/// `p_t(x_i, node_k)` for every start coordinate and node.
pub(crate) fn density_table(kernel: &TransitionKernel, t: f64, x: &[f64], nodes: &[(f64, f64)]) -> Result<Vec<Vec<f64>>> {
    x.iter()
        .map(|&xi| nodes.iter().map(|&(y, _)| kernel.try_density(t, xi, y)).collect::<Result<Vec<_>>>())
        .collect()
}

/// `(P_t^n g)(x) = ∫_{W^n} det(p_t(x_i, y_j)) g(y) dy` for antisymmetric `g`
/// given through its values on node tuples.
fn km_apply_antisym(
    kernel: &TransitionKernel,
    t: f64,
    x: &[f64],
    nodes: &[(f64, f64)],
    mut g: impl FnMut(&[usize]) -> f64,
) -> Result<f64> {
    let n = x.len();
    let table = density_table(kernel, t, x, nodes)?;
    let mut buf = vec![0.0; n * n];
    Ok(symmetric_chamber_integral(nodes, n, |idx| {
        for i in 0..n {
            for (j, &k) in idx.iter().enumerate() {
                buf[i * n + j] = table[i][k];
            }
        }
        det_in_place(&mut buf, n) * g(idx)
    }))
}

/// `max |(P_t h)(x) − e^{λt} h(x)| / |h(x)|` over the probes.
pub fn eigen_residual(kernel: &TransitionKernel, h: &Eigenfunction, t: f64, probes: &[Vec<f64>]) -> Result<f64> {
    let n = h.n();
    let mut worst: f64 = 0.0;
    for x in probes {
        if x.len() != n || !x.iter().all(|&v| v > kernel.l && v < kernel.r) {
            return Err(Error::Domain(format!("probe {x:?} is not an interior point of W^{n}")));
        }
        let nodes = chamber_nodes(kernel, t, x);
        let comp: Vec<Vec<f64>> = (0..n).map(|i| nodes.iter().map(|&(y, _)| h.component(i, y)).collect()).collect();
        let sign = h.sign();
        let ph = km_apply_antisym(kernel, t, x, &nodes, |idx| sign * det_with(n, |i, j| comp[i][idx[j]]))?;
        if !ph.is_finite() {
            return Err(Error::Quadrature(format!("semigroup action not finite at {x:?}")));
        }
        let hx = h.eval(x);
        worst = worst.max((ph - (h.rate * t).exp() * hx).abs() / hx.abs());
    }
    Ok(worst)
}

/// Survival probability `∫_{W^n} det(p_t(x_i, y_j)) dy` by nested
/// quadrature over the ordered region.
pub fn km_mass(kernel: &TransitionKernel, t: f64, x: &[f64]) -> Result<f64> {
    let n = x.len();
    let nodes = chamber_nodes(kernel, t, x);
    let (lo, hi) = match (nodes.first(), nodes.last()) {
        (Some(a), Some(b)) => (kernel.window(t, x[0]).0.min(a.0), b.0.max(kernel.window(t, x[n - 1]).1)),
        _ => return Ok(0.0),
    };
    let rule = GaussLegendre::<f64>::new(GL_NODES);
    let panels = (nodes.len() / GL_NODES).max(2);
    let mut failure = None;
    let mut buf = vec![0.0; n * n];
    let v = quad::ordered_integral(&rule, lo, hi, n, panels, kernel.lower_map(), |y| {
        for i in 0..n {
            for j in 0..n {
                match kernel.try_density(t, x[i], y[j]) {
                    Ok(p) => buf[i * n + j] = p,
                    Err(e) => {
                        failure.get_or_insert(e);
                        buf[i * n + j] = 0.0;
                    }
                }
            }
        }
        det_in_place(&mut buf, n)
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// Karlin–McGregor density by the Cauchy–Binet expansion over ordered mode
/// tuples `k_1 < … < k_n`:
/// `Σ e^{−(λ_{k_1}+…+λ_{k_n})t} det(φ_{k_i}(x_j)) det(φ_{k_i}(y_j)) Π m(y_j)`.
///
/// `tol` bounds the estimated tail; the error reports the bound if the
/// mode cap is hit first.
pub fn spectral_km(spec: &DiffusionSpec, t: f64, x: &[f64], y: &[f64], tol: f64) -> Result<f64> {
    let n = x.len();
    if y.len() != n {
        return Err(Error::Domain(format!("dimension mismatch {} vs {}", n, y.len())));
    }
    if !(t > 0.0) {
        return Err(Error::Domain(format!("t = {t} must be positive")));
    }
    let sp = spectrum(spec)?;
    let bx = |k: usize| x.iter().map(|&v| sp.bound(k, v)).fold(0.0, f64::max);
    let by = |k: usize| y.iter().map(|&v| sp.bound(k, v)).fold(0.0, f64::max);
    let my: f64 = y.iter().map(|&v| sp.speed(v)).product();
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    // A tuple with top mode K is bounded by n!² Π bounds e^{−λ_K t}; the
    // lower modes contribute at most the same bound each.
    let cap = crate::diffusion1d::SPECTRAL_CAP;
    let mut modes = None;
    let mut tail = f64::INFINITY;
    for k in n..cap {
        let b = bx(k) * by(k);
        tail = fact * fact * b.powi(n as i32) * (-sp.rate(k) * t).exp() * my * (k as f64).powi(n as i32 - 1);
        if tail < tol {
            modes = Some(k);
            break;
        }
    }
    let modes = modes.ok_or(Error::Truncation { terms: cap, tail })?;
    let mut fx = Vec::with_capacity(modes);
    let mut fy = Vec::with_capacity(modes);
    let px: Vec<Vec<f64>> = x
        .iter()
        .map(|&v| {
            sp.eigenfunctions(modes, v, &mut fx);
            fx.clone()
        })
        .collect();
    let py: Vec<Vec<f64>> = y
        .iter()
        .map(|&v| {
            sp.eigenfunctions(modes, v, &mut fy);
            fy.clone()
        })
        .collect();
    let rates: Vec<f64> = (0..modes).map(|k| sp.rate(k)).collect();
    let mut sum = 0.0;
    for_each_strict_tuple(modes, n, |ks| {
        let decay = (-ks.iter().map(|&k| rates[k]).sum::<f64>() * t).exp();
        if decay == 0.0 {
            return;
        }
        let dx = det_with(n, |i, j| px[j][ks[i]]);
        let dy = det_with(n, |i, j| py[j][ks[i]]);
        sum += decay * dx * dy;
    });
    Ok(sum * my)
}

/// Nodes of the plain linear map on `[lo, hi]` (for callers outside a kernel).
pub fn linear_nodes(lo: f64, hi: f64, panels: usize) -> Vec<(f64, f64)> {
    quad::window_nodes(&GaussLegendre::<f64>::new(GL_NODES), lo, hi, panels, NodeMap::Linear)
}
