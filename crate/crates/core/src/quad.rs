//! Gauss–Legendre rules, adaptive Gauss–Kronrod and node maps for the
//! nested quadratures.

use crate::real::Real;

/// Gauss–Legendre rule on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Nodes by Newton iteration on the Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let nn = T::count(n);
        let half = T::lit(0.5);
        let eps = T::epsilon() * T::lit(4.0);
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess.
            let theta = T::PI() * (T::count(i) + T::lit(0.75)) / (nn + half);
            let mut x = theta.cos();
            let mut dp = T::one();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x = x - dx;
                if dx.abs() <= eps {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != T::zero() { d } else { dp };
            let w = T::lit(2.0) / ((T::one() - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// ∫_a^b f with the rule mapped affinely.
    pub fn integrate(&self, a: T, b: T, mut f: impl FnMut(T) -> T) -> T {
        let half = T::lit(0.5);
        let c = half * (a + b);
        let h = half * (b - a);
        let mut s = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s = s + *w * f(c + h * *x);
        }
        s * h
    }

    /// Composite rule over `panels` equal panels.
    pub fn composite(&self, a: T, b: T, panels: usize, mut f: impl FnMut(T) -> T) -> T {
        let panels = panels.max(1);
        let step = (b - a) / T::count(panels);
        let mut s = T::zero();
        for k in 0..panels {
            let lo = a + step * T::count(k);
            s = s + self.integrate(lo, lo + step, &mut f);
        }
        s
    }

    /// Physical (node, weight) pairs on [a, b] with `panels` equal panels.
    pub fn mapped(&self, a: T, b: T, panels: usize) -> Vec<(T, T)> {
        let panels = panels.max(1);
        let step = (b - a) / T::count(panels);
        let half = T::lit(0.5);
        let mut out = Vec::with_capacity(panels * self.len());
        for k in 0..panels {
            let lo = a + step * T::count(k);
            let c = lo + half * step;
            let h = half * step;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                out.push((c + h * *x, *w * h));
            }
        }
        out
    }
}

fn legendre_with_derivative<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kk = T::count(k);
        let p2 = ((T::lit(2.0) * kk - T::one()) * x * p1 - (kk - T::one()) * p0) / kk;
        p0 = p1;
        p1 = p2;
    }
    let nn = T::count(n);
    let d = nn * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

/// How a finite integration window is parameterized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeMap {
    Linear,
    /// `y = a + u²`, clustering nodes at a power-law lower endpoint.
    SqrtLower,
    /// `y = e^u` on `[ln a, ln b]` for scale-invariant densities; needs `a > 0`.
    Log,
}

/// Quadrature nodes on [a, b] under `map`.
pub fn window_nodes<T: Real>(rule: &GaussLegendre<T>, a: T, b: T, panels: usize, map: NodeMap) -> Vec<(T, T)> {
    if b <= a {
        return Vec::new();
    }
    match map {
        NodeMap::Linear => rule.mapped(a, b, panels),
        NodeMap::SqrtLower => {
            let umax = (b - a).sqrt();
            rule.mapped(T::zero(), umax, panels)
                .into_iter()
                .map(|(u, w)| (a + u * u, w * T::lit(2.0) * u))
                .collect()
        }
        NodeMap::Log => rule
            .mapped(a.ln(), b.ln(), panels)
            .into_iter()
            .map(|(u, w)| {
                let y = u.exp();
                (y, w * y)
            })
            .collect(),
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: T,
    pub converged: bool,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<T: Real>(f: &mut impl FnMut(T) -> T, a: T, b: T) -> (T, T) {
    let half = T::lit(0.5);
    let c = half * (a + b);
    let h = half * (b - a);
    let fc = f(c);
    let mut rk = fc * T::lit(WGK[7]);
    let mut rg = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = h * T::lit(XGK[j]);
        let s = f(c - dx) + f(c + dx);
        rk = rk + T::lit(WGK[j]) * s;
        if j % 2 == 1 {
            rg = rg + T::lit(WG[j / 2]) * s;
        }
    }
    (rk * h, ((rk - rg) * h).abs())
}

/// Globally adaptive Gauss–Kronrod (7/15) on a finite interval.
pub fn adaptive<T: Real>(mut f: impl FnMut(T) -> T, a: T, b: T, abs_tol: T, rel_tol: T, max_intervals: usize) -> QuadResult<T> {
    if a == b {
        return QuadResult { value: T::zero(), error: T::zero(), converged: true };
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut parts = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    while err > abs_tol.max(rel_tol * total.abs()) {
        if parts.len() >= max_intervals {
            return QuadResult { value: total, error: err, converged: false };
        }
        let (idx, _) = parts
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (lo, hi, pv, pe) = parts.swap_remove(idx);
        let mid = T::lit(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            parts.push((lo, hi, pv, pe));
            return QuadResult { value: total, error: err, converged: false };
        }
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        total = total - pv + v1 + v2;
        err = err - pe + e1 + e2;
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
        if !total.is_finite() {
            return QuadResult { value: total, error: err, converged: false };
        }
    }
    // Re-sum to shed accumulated rounding from the running totals.
    let value = parts.iter().fold(T::zero(), |s, p| s + p.2);
    let error = parts.iter().fold(T::zero(), |s, p| s + p.3);
    QuadResult { value, error, converged: true }
}

/// Tensor-product rule over a box; `dims[k] = (a, b, map)`.
pub fn box_integral<T: Real>(rule: &GaussLegendre<T>, dims: &[(T, T, NodeMap)], panels: usize, mut f: impl FnMut(&[T]) -> T) -> T {
    let grids: Vec<Vec<(T, T)>> = dims.iter().map(|&(a, b, m)| window_nodes(rule, a, b, panels, m)).collect();
    if grids.iter().any(|g| g.is_empty()) {
        return T::zero();
    }
    let n = dims.len();
    let mut idx = vec![0usize; n];
    let mut pt: Vec<T> = grids.iter().map(|g| g[0].0).collect();
    let mut total = T::zero();
    loop {
        let mut w = T::one();
        for k in 0..n {
            pt[k] = grids[k][idx[k]].0;
            w = w * grids[k][idx[k]].1;
        }
        total = total + w * f(&pt);
        // Odometer increment.
        let mut k = n;
        loop {
            if k == 0 {
                return total;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < grids[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// `∫ f` over `lo ≤ y_1 ≤ … ≤ y_n ≤ hi` by nested Gauss–Legendre, each
/// coordinate ranging over `[y_{k−1}, hi]`. `map` applies to the first
/// coordinate only.
pub fn ordered_integral<T: Real>(rule: &GaussLegendre<T>, lo: T, hi: T, n: usize, panels: usize, map: NodeMap, mut f: impl FnMut(&[T]) -> T) -> T {
    fn rec<T: Real>(rule: &GaussLegendre<T>, hi: T, panels: usize, map: NodeMap, pt: &mut Vec<T>, left: usize, from: T, f: &mut dyn FnMut(&[T]) -> T) -> T {
        if left == 0 {
            return f(pt);
        }
        let nodes = window_nodes(rule, from, hi, panels, if pt.is_empty() { map } else { NodeMap::Linear });
        let mut s = T::zero();
        for (y, w) in nodes {
            pt.push(y);
            s = s + w * rec(rule, hi, panels, map, pt, left - 1, y, f);
            pt.pop();
        }
        s
    }
    if n == 0 {
        return f(&[]);
    }
    let mut pt = Vec::with_capacity(n);
    rec(rule, hi, panels, map, &mut pt, n, lo, &mut f)
}

/// Nodes and weights of the rule behind [`ordered_integral`], materialized
/// so callers can evaluate in parallel.
pub fn ordered_nodes<T: Real>(rule: &GaussLegendre<T>, lo: T, hi: T, n: usize, panels: usize, map: NodeMap) -> Vec<(Vec<T>, T)> {
    let mut out = Vec::new();
    let mut stack: Vec<(Vec<T>, T)> = vec![(Vec::with_capacity(n), T::one())];
    while let Some((pt, w)) = stack.pop() {
        if pt.len() == n {
            out.push((pt, w));
            continue;
        }
        let from = pt.last().copied().unwrap_or(lo);
        let m = if pt.is_empty() { map } else { NodeMap::Linear };
        for (y, wy) in window_nodes(rule, from, hi, panels, m) {
            let mut next = pt.clone();
            next.push(y);
            stack.push((next, w * wy));
        }
    }
    out
}

/// ∫_a^∞ f via `x = a + u/(1−u)`.
pub fn adaptive_upper_infinite<T: Real>(mut f: impl FnMut(T) -> T, a: T, abs_tol: T, rel_tol: T, max_intervals: usize) -> QuadResult<T> {
    let one = T::one();
    adaptive(
        |u: T| {
            let d = one - u;
            if d <= T::zero() {
                return T::zero();
            }
            let x = a + u / d;
            let v = f(x) / (d * d);
            if v.is_finite() { v } else { T::zero() }
        },
        T::zero(),
        one,
        abs_tol,
        rel_tol,
        max_intervals,
    )
}

/// ∫_{−∞}^b f via reflection onto the upper case.
pub fn adaptive_lower_infinite<T: Real>(mut f: impl FnMut(T) -> T, b: T, abs_tol: T, rel_tol: T, max_intervals: usize) -> QuadResult<T> {
    adaptive_upper_infinite(|x: T| f(-x), -b, abs_tol, rel_tol, max_intervals)
}

/// ∫_a^b f where either end may be infinite.
pub fn adaptive_general<T: Real>(mut f: impl FnMut(T) -> T, a: T, b: T, abs_tol: T, rel_tol: T, max_intervals: usize) -> QuadResult<T> {
    match (a.is_finite(), b.is_finite()) {
        (true, true) => adaptive(f, a, b, abs_tol, rel_tol, max_intervals),
        (true, false) => adaptive_upper_infinite(f, a, abs_tol, rel_tol, max_intervals),
        (false, true) => adaptive_lower_infinite(f, b, abs_tol, rel_tol, max_intervals),
        (false, false) => {
            let r1 = adaptive_lower_infinite(&mut f, T::zero(), abs_tol, rel_tol, max_intervals);
            let r2 = adaptive_upper_infinite(&mut f, T::zero(), abs_tol, rel_tol, max_intervals);
            QuadResult { value: r1.value + r2.value, error: r1.error + r2.error, converged: r1.converged && r2.converged }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        let rule = GaussLegendre::<f64>::new(8);
        // Degree 15 is the exactness limit for 8 nodes.
        let v = rule.integrate(-1.0, 2.0, |x| x.powi(15) + 3.0 * x * x);
        let exact = (2f64.powi(16) - 1.0) / 16.0 + (8.0 + 1.0);
        assert!((v - exact).abs() < 1e-9 * exact);
        let s: f64 = rule.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn legendre_rule_in_single_precision() {
        let rule = GaussLegendre::<f32>::new(6);
        let v = rule.integrate(0.0, 1.0, |x| x.powi(3));
        assert!((v - 0.25).abs() < 1e-6);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let r = adaptive(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 1e-10, 1e-10, 500);
        assert!(r.converged);
        assert!((r.value - 2.0).abs() < 1e-8);
    }

    #[test]
    fn semi_infinite_gaussian_tail() {
        let r = adaptive_general(|x: f64| (-x * x / 2.0).exp(), f64::NEG_INFINITY, f64::INFINITY, 1e-12, 1e-12, 500);
        assert!((r.value - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn sqrt_map_integrates_power_singularity() {
        let rule = GaussLegendre::<f64>::new(32);
        let nodes = window_nodes(&rule, 0.0, 4.0, 1, NodeMap::SqrtLower);
        let v: f64 = nodes.iter().map(|(y, w)| w * y.powf(-0.5)).sum();
        assert!((v - 4.0).abs() < 1e-12);
    }
    #[test]
    fn ordered_and_box_integrals_agree_on_symmetric_integrands() {
        let rule = GaussLegendre::<f64>::new(16);
        let f = |y: &[f64]| (y[0] * y[1]).exp() * (y[0] - y[1]).powi(2);
        let full = box_integral(&rule, &[(0.0, 1.0, NodeMap::Linear), (0.0, 1.0, NodeMap::Linear)], 2, f);
        let half = ordered_integral(&rule, 0.0, 1.0, 2, 2, NodeMap::Linear, f);
        assert!((full - 2.0 * half).abs() < 1e-12);
        // Volume of the ordered 3-simplex in the unit cube.
        let v = ordered_integral(&rule, 0.0, 1.0, 3, 1, NodeMap::Linear, |_| 1.0);
        assert!((v - 1.0 / 6.0).abs() < 1e-14);
        let f3 = |y: &[f64]| (y[0] + 2.0 * y[1] - y[2]).cos();
        let nested = ordered_integral(&rule, -1.0, 2.0, 3, 2, NodeMap::Linear, f3);
        let flat: f64 = ordered_nodes(&rule, -1.0, 2.0, 3, 2, NodeMap::Linear).iter().map(|(p, w)| w * f3(p)).sum();
        assert!((nested - flat).abs() < 1e-13);
    }
}
