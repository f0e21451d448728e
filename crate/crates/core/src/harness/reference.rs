use crate::error::{Error, Result};
use crate::special::{normal_cdf, normal_pdf};
use crate::GaussLegendre;

/// Piecewise-linear distribution function through tabulated points.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedCdf {
    pub x: Vec<f64>,
    pub f: Vec<f64>,
}

impl TabulatedCdf {
    pub fn eval(&self, z: f64) -> f64 {
        let n = self.x.len();
        if z <= self.x[0] {
            return self.f[0];
        }
        if z >= self.x[n - 1] {
            return self.f[n - 1];
        }
        let i = self.x.partition_point(|&u| u <= z) - 1;
        let w = (z - self.x[i]) / (self.x[i + 1] - self.x[i]);
        self.f[i] + w * (self.f[i + 1] - self.f[i])
    }

    /// Total tabulated mass.
    pub fn mass(&self) -> f64 {
        self.f[self.f.len() - 1]
    }
}

const CELL_NODES: usize = 8;
const INNER_NODES: usize = 16;
const INNER_PANEL: f64 = 0.25;

/// Marginal distribution functions of the lower and upper coordinate of a
/// density on `{y₁ < y₂} ∩ [lo, hi]²`, tabulated on `cells + 1` points.
///
/// Returns the tables and the number of outer quadrature nodes used.
pub fn pair_marginal_cdfs(density: impl Fn(f64, f64) -> f64 + Sync, lo: f64, hi: f64, cells: usize) -> Result<(TabulatedCdf, TabulatedCdf)> {
    use rayon::prelude::*;
    if !(lo < hi) || cells == 0 {
        return Err(Error::Domain(format!("bad marginal grid [{lo}, {hi}] with {cells} cells")));
    }
    let outer = GaussLegendre::new(CELL_NODES);
    let inner = GaussLegendre::new(INNER_NODES);
    let h = (hi - lo) / cells as f64;
    let inner_int = |a: f64, b: f64, f: &dyn Fn(f64) -> f64| -> f64 {
        if b <= a {
            return 0.0;
        }
        let panels = ((b - a) / INNER_PANEL).ceil().max(1.0) as usize;
        inner.composite(a, b, panels, f)
    };
    let cell_mass: Vec<(f64, f64)> = (0..cells)
        .into_par_iter()
        .map(|i| {
            let (a, b) = (lo + i as f64 * h, lo + (i + 1) as f64 * h);
            let lower = outer.integrate(a, b, |u| inner_int(u, hi, &|v| density(u, v)));
            let upper = outer.integrate(a, b, |v| inner_int(lo, v, &|u| density(u, v)));
            (lower, upper)
        })
        .collect();
    let x: Vec<f64> = (0..=cells).map(|i| lo + i as f64 * h).collect();
    let mut f1 = vec![0.0; cells + 1];
    let mut f2 = vec![0.0; cells + 1];
    for (i, &(a, b)) in cell_mass.iter().enumerate() {
        f1[i + 1] = f1[i] + a;
        f2[i + 1] = f2[i] + b;
    }
    Ok((TabulatedCdf { x: x.clone(), f: f1 }, TabulatedCdf { x, f: f2 }))
}

/// Outer quadrature nodes used by [`pair_marginal_cdfs`].
pub fn pair_marginal_nodes(cells: usize) -> usize {
    cells * CELL_NODES
}

/// Distribution function at time `t` of a three-dimensional Bessel process
/// started from `x > 0`: the law of Brownian motion conditioned to stay
/// positive.
pub fn bes3_cdf(t: f64, x: f64, z: f64) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    let s = t.sqrt();
    let (u, w) = (x / s, z / s);
    let v = normal_cdf(w - u) - normal_cdf(-u) + normal_cdf(w + u) - normal_cdf(u) + (normal_pdf(w + u) - normal_pdf(w - u)) / u;
    v.clamp(0.0, 1.0)
}
