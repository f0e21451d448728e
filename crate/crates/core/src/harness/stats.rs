use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest sample accepted by [`ks_compare`].
pub const KS_MIN_SAMPLES: usize = 1000;
const MOMENT_CELLS: usize = 4000;

/// Outcome of comparing a Monte Carlo sample with a reference law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCReport {
    pub n: usize,
    /// Two-sided Kolmogorov–Smirnov distance, in [0, 1].
    pub ks: f64,
    /// Asymptotic Kolmogorov p-value; informational only.
    pub p_value: f64,
    /// `|sample moment − reference moment|` for orders 1..=4.
    pub moment_errors: [f64; 4],
    pub runtime_s: f64,
    pub seed: u64,
}

impl MCReport {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_runtime(mut self, secs: f64) -> Self {
        self.runtime_s = secs;
        self
    }
}

/// Right-continuous empirical distribution function.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() || samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateInput("empirical cdf needs finite samples".into()));
        }
        samples.sort_by(f64::total_cmp);
        Ok(Self { sorted: samples })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.sorted.partition_point(|&u| u <= z) as f64 / self.sorted.len() as f64
    }
}

/// Kolmogorov survival function `P(sup|B⁰| > λ)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Jacobi-theta form converges fast for small λ.
        let c = std::f64::consts::PI * std::f64::consts::PI / (8.0 * lambda * lambda);
        let s: f64 = (1..=20).map(|j| (-((2 * j - 1) as f64).powi(2) * c).exp()).sum();
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let s: f64 = (1..=100)
            .map(|j| {
                let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * (j * j) as f64 * lambda * lambda).exp()
            })
            .sum();
        (2.0 * s).clamp(0.0, 1.0)
    }
}

/// Sup distance between `cdf` and the empirical law of `sorted`.
fn ks_sorted(sorted: &[f64], cdf: &impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        // Ties jump together.
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let f = cdf(sorted[i]);
        d = d.max((f - i as f64 / n).abs()).max(((j + 1) as f64 / n - f).abs());
        i = j + 1;
    }
    d.min(1.0)
}

/// Two-sided KS statistic of `samples` against `exact_cdf`, with moments of
/// the reference law obtained as Stieltjes sums over a grid covering the
/// sample range.
pub fn ks_compare(samples: &[f64], exact_cdf: impl Fn(f64) -> f64) -> Result<MCReport> {
    let clock = Instant::now();
    if samples.len() < KS_MIN_SAMPLES {
        return Err(Error::DegenerateInput(format!("{} samples, need at least {KS_MIN_SAMPLES}", samples.len())));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateInput("non-finite sample".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    let pad = 0.25 * (hi - lo).max(1e-3);
    let (a, b) = (lo - pad, hi + pad);

    let h = (b - a) / MOMENT_CELLS as f64;
    let mut prev = exact_cdf(a);
    let mut ref_mom = [0.0; 4];
    for i in 0..MOMENT_CELLS {
        let x1 = a + (i + 1) as f64 * h;
        let f = exact_cdf(x1);
        if !f.is_finite() || f < -1e-9 || f > 1.0 + 1e-9 {
            return Err(Error::Domain(format!("reference cdf {f} at {x1} is not a probability")));
        }
        if f < prev - 1e-9 {
            return Err(Error::Domain(format!("reference cdf decreases at {x1}: {prev} → {f}")));
        }
        let mid = x1 - 0.5 * h;
        let dm = f - prev;
        let mut p = 1.0;
        for m in &mut ref_mom {
            p *= mid;
            *m += p * dm;
        }
        prev = f;
    }
    let n = sorted.len();
    let mut moment_errors = [0.0; 4];
    for (k, e) in moment_errors.iter_mut().enumerate() {
        let s = sorted.iter().map(|v| v.powi(k as i32 + 1)).sum::<f64>() / n as f64;
        *e = (s - ref_mom[k]).abs();
    }
    let ks = ks_sorted(&sorted, &exact_cdf);
    let rn = (n as f64).sqrt();
    let p_value = kolmogorov_sf((rn + 0.12 + 0.11 / rn) * ks);
    Ok(MCReport { n, ks, p_value, moment_errors, runtime_s: clock.elapsed().as_secs_f64(), seed: 0 })
}

/// `max_z |f(z) − g(z)|` over a grid.
pub fn sup_diff(grid: &[f64], f: impl Fn(f64) -> Result<f64>, g: impl Fn(f64) -> f64) -> Result<f64> {
    let mut d: f64 = 0.0;
    for &z in grid {
        d = d.max((f(z)? - g(z)).abs());
    }
    Ok(d)
}

/// `count` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..count).map(|i| a + (b - a) * i as f64 / (count - 1) as f64).collect(),
    }
}
