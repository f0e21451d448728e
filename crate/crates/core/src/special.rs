//! Special functions used by the closed-form and spectral kernels.

use libm::erfc;
use std::f64::consts::{PI, SQRT_2};

pub use statrs::function::gamma::{gamma_ur, ln_gamma};

/// Standard normal density.
#[inline]
pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Standard normal distribution function, accurate in both tails.
#[inline]
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

/// Heat kernel `e^{−u²/2v}/√(2πv)` for variance `v`.
#[inline]
pub fn heat(v: f64, u: f64) -> f64 {
    (-0.5 * u * u / v).exp() / (2.0 * PI * v).sqrt()
}

/// Probabilists' Hermite polynomial `He_m(z)`.
pub fn hermite_he(m: usize, z: f64) -> f64 {
    let mut h0 = 1.0;
    if m == 0 {
        return h0;
    }
    let mut h1 = z;
    for k in 1..m {
        let h2 = z * h1 - k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// `∂_u^m` of the Gaussian density `N(μ, v)` evaluated at `u`.
pub fn gaussian_derivative(m: usize, mean: f64, var: f64, u: f64) -> f64 {
    let sd = var.sqrt();
    let z = (u - mean) / sd;
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    sign * hermite_he(m, z) * normal_pdf(z) / sd.powi(m as i32 + 1)
}

/// Physicists' Hermite polynomials normalized in `L²(e^{−z²}dz)`, k = 0..len.
pub fn hermite_orthonormal(len: usize, z: f64, out: &mut Vec<f64>) {
    out.clear();
    if len == 0 {
        return;
    }
    out.push(PI.powf(-0.25));
    if len == 1 {
        return;
    }
    out.push(SQRT_2 * z * out[0]);
    for k in 1..len - 1 {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * z * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
        out.push(next);
    }
}

/// Generalized Laguerre polynomials `L_k^{(α)}(x)`, k = 0..len.
pub fn laguerre_sequence(len: usize, alpha: f64, x: f64, out: &mut Vec<f64>) {
    out.clear();
    if len == 0 {
        return;
    }
    out.push(1.0);
    if len == 1 {
        return;
    }
    out.push(1.0 + alpha - x);
    for k in 1..len - 1 {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * out[k] - (kf + alpha) * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
}

/// Jacobi polynomials `P_k^{(α,β)}(u)`, k = 0..len.
pub fn jacobi_sequence(len: usize, alpha: f64, beta: f64, u: f64, out: &mut Vec<f64>) {
    out.clear();
    if len == 0 {
        return;
    }
    out.push(1.0);
    if len == 1 {
        return;
    }
    out.push((alpha + 1.0) + (alpha + beta + 2.0) * (u - 1.0) / 2.0);
    let ab = alpha + beta;
    for k in 2..len {
        let kf = k as f64;
        let c = 2.0 * kf + ab;
        let a1 = 2.0 * kf * (kf + ab) * (c - 2.0);
        let a2 = (c - 1.0) * (c * (c - 2.0) * u + alpha * alpha - beta * beta);
        let a3 = 2.0 * (kf + alpha - 1.0) * (kf + beta - 1.0) * c;
        let next = (a2 * out[k - 1] - a3 * out[k - 2]) / a1;
        out.push(next);
    }
}

/// Exponentially scaled modified Bessel function `e^{−z} I_μ(z)` for
/// `μ > −1`, `z ≥ 0` (the series is positive-term for every such order).
pub fn bessel_i_scaled(mu: f64, z: f64) -> f64 {
    debug_assert!(mu > -1.0 && z >= 0.0);
    if z == 0.0 {
        return if mu == 0.0 { 1.0 } else { 0.0 };
    }
    if z > 40.0 + mu * mu {
        return bessel_i_scaled_asymptotic(mu, z);
    }
    bessel_i_scaled_series(mu, z)
}

fn bessel_i_scaled_series(mu: f64, z: f64) -> f64 {
    // Positive-term power series, started in log space.
    let half = 0.5 * z;
    let q = half * half;
    let mut term = (mu * half.ln() - ln_gamma(mu + 1.0) - z).exp();
    if term == 0.0 {
        // Leading term underflows; the series peaks later.
        return log_series_i_scaled(mu, z);
    }
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + mu));
        sum += term;
        if term <= sum * 1e-17 && k > q.sqrt() {
            break;
        }
        if k > 100_000.0 {
            break;
        }
    }
    sum
}

fn log_series_i_scaled(mu: f64, z: f64) -> f64 {
    // log-sum-exp over terms; slow path only for extreme parameters.
    let lh = (0.5 * z).ln();
    let mut logs = Vec::new();
    let mut k = 0.0f64;
    let mut best = f64::NEG_INFINITY;
    loop {
        let lt = (2.0 * k + mu) * lh - ln_gamma(k + 1.0) - ln_gamma(k + mu + 1.0) - z;
        best = best.max(lt);
        logs.push(lt);
        if lt < best - 40.0 && k > z {
            break;
        }
        k += 1.0;
        if k > 200_000.0 {
            break;
        }
    }
    let s: f64 = logs.iter().map(|l| (l - best).exp()).sum();
    (best + s.ln()).exp()
}

fn bessel_i_scaled_asymptotic(mu: f64, z: f64) -> f64 {
    let m4 = 4.0 * mu * mu;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= -(m4 - odd * odd) / (kf * 8.0 * z);
        if term.abs() > prev {
            break;
        }
        prev = term.abs();
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * PI * z).sqrt()
}

/// Regularized upper incomplete gamma `Q(a, x)` with `Q(0, x) = 0`.
pub fn upper_gamma_q(a: f64, x: f64) -> f64 {
    if a <= 0.0 {
        return 0.0;
    }
    if x <= 0.0 {
        return 1.0;
    }
    gamma_ur(a, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_matches_reference_values() {
        // I_0(1) = 1.2660658777520082, I_1(2) = 1.5906368546373291,
        // I_{1/2}(z) = sqrt(2/(πz)) sinh z.
        assert!((bessel_i_scaled(0.0, 1.0) * 1f64.exp() - 1.266_065_877_752_008_2).abs() < 1e-14);
        assert!((bessel_i_scaled(1.0, 2.0) * 2f64.exp() - 1.590_636_854_637_329).abs() < 1e-13);
        for &z in &[0.3, 5.0, 39.0, 41.0, 80.0, 500.0] {
            let exact = (2.0 / (PI * z)).sqrt() * 0.5 * (1.0 - (-2.0 * z).exp());
            let got = bessel_i_scaled(0.5, z);
            assert!((got - exact).abs() < 1e-13 * exact, "z={z}: {got} vs {exact}");
        }
    }

    #[test]
    fn bessel_branches_agree_at_switch() {
        for &mu in &[0.0, 0.25, 1.0, 2.5] {
            let z = 40.0 + mu * mu;
            let a = bessel_i_scaled_series(mu, z);
            let b = bessel_i_scaled_asymptotic(mu, z);
            assert!((a - b).abs() < 1e-12 * a, "mu={mu}: {a} vs {b}");
        }
    }

    #[test]
    fn hermite_sequences_are_orthonormal() {
        let rule = crate::quad::GaussLegendre::<f64>::new(64);
        let mut buf = Vec::new();
        let g = |i: usize, j: usize| {
            let mut b = Vec::new();
            rule.composite(-10.0, 10.0, 4, |z| {
                hermite_orthonormal(6, z, &mut b);
                b[i] * b[j] * (-z * z).exp()
            })
        };
        for i in 0..6 {
            for j in 0..6 {
                let v = g(i, j);
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((v - e).abs() < 1e-12, "({i},{j}) -> {v}");
            }
        }
        hermite_orthonormal(0, 1.0, &mut buf);
        assert!(buf.is_empty());
    }

    #[test]
    fn classical_polynomials_low_degree() {
        let mut b = Vec::new();
        laguerre_sequence(3, 0.5, 2.0, &mut b);
        // L_2^{(α)}(x) = x²/2 − (α+2)x + (α+2)(α+1)/2.
        assert!((b[2] - (2.0 - 5.0 + 2.5 * 1.5 / 2.0)).abs() < 1e-14);
        jacobi_sequence(3, 0.0, 0.0, 0.3, &mut b);
        // Legendre P_2.
        assert!((b[2] - 0.5 * (3.0 * 0.09 - 1.0)).abs() < 1e-14);
        assert_eq!(hermite_he(3, 2.0), 8.0 - 6.0);
    }

    #[test]
    fn gaussian_derivative_matches_finite_difference() {
        let h = 1e-4;
        let f = |u: f64| heat(0.7, u - 0.2);
        let fd = (f(0.9 + h) - f(0.9 - h)) / (2.0 * h);
        assert!((gaussian_derivative(1, 0.2, 0.7, 0.9) - fd).abs() < 1e-8);
        assert!((gaussian_derivative(0, 0.2, 0.7, 0.9) - f(0.9)).abs() < 1e-15);
    }
}
