use std::f64::consts::PI;

use interlace::diffusion1d::*;
use interlace::edgekernels::*;
use interlace::quad::{self, NodeMap};
use interlace::reflectsde::{run_paths, simulate_edge, EdgeSide, RngStreams, SimConfig};
use interlace::{Error, GaussLegendre};
use libm::erfc;

fn big_phi(u: f64) -> f64 {
    0.5 * erfc(-u / std::f64::consts::SQRT_2)
}

fn gauss(w: f64, u: f64) -> f64 {
    (-0.5 * (u / w).powi(2)).exp() / (w * (2.0 * PI).sqrt())
}

/// `∫ f` over the side's ordered cone in two dimensions.
fn cone2(side: EdgeSide, lo: f64, hi: f64, panels: usize, f: impl Fn(&[f64]) -> f64) -> f64 {
    let rule = GaussLegendre::new(32);
    quad::ordered_integral(&rule, lo, hi, 2, panels, NodeMap::Linear, |u| match side {
        EdgeSide::Right => f(u),
        EdgeSide::Left => f(&[u[1], u[0]]),
    })
}

#[test]
fn bm_first_integral_at_the_mean() {
    let tb = build_edge_table(&bm(), 1, 1.0).unwrap();
    assert!((tb.s(1, 1, 0.0, 0.0).unwrap() - 0.5).abs() < 1e-14);
}

#[test]
fn order_zero_is_the_density() {
    for spec in [bm(), ou(0.7), besq(3.0)] {
        let tb = build_edge_table(&spec, 3, 0.8).unwrap();
        let k = kernel(&spec.drift_shifted(1).unwrap()).unwrap();
        let (x, xp) = (0.6, 1.1);
        assert_eq!(tb.s(2, 0, x, xp).unwrap(), k.density(0.8, x, xp));
        assert_eq!(tb.s_bar(2, 0, x, xp).unwrap(), k.density(0.8, x, xp));
    }
}

#[test]
fn ladder_constants() {
    let tb = build_edge_table(&besq(2.0), 3, 1.0).unwrap();
    assert_eq!(tb.c, vec![0.0; 3]);
    // OU: a₂ = 0, b₁ = −θ.
    let tb = build_edge_table(&ou(0.7), 3, 1.0).unwrap();
    assert_eq!(tb.c, vec![-0.7; 3]);
    // GBM: a₂ = 1/2, b₁ = α; c_{k,n} = (n − k − 1) + α.
    let tb = build_edge_table(&gbm(0.25), 3, 1.0).unwrap();
    assert_eq!(tb.c, vec![1.25, 0.25, -0.75]);
}

#[test]
fn unsupported_forms_are_rejected() {
    assert!(matches!(build_edge_table(&bm_halfline(true), 2, 1.0).unwrap_err(), Error::Config(_)));
    assert!(matches!(build_edge_table(&besq(1.0), 2, 1.0).unwrap_err(), Error::BoundaryAssumption(_)));
    let tb = build_edge_table(&bm(), 2, 1.0).unwrap();
    assert!(edge_density(&tb, &[0.0, 1.0], &[0.0], EdgeSide::Right).is_err());
    assert!(edge_density(&tb, &[1.0, 0.0], &[0.0, 1.0], EdgeSide::Right).is_err());
    assert!(edge_max_cdf(&tb, &[1.0, 0.0], 0.0).is_err());
}

#[test]
fn one_particle_reduces_to_the_diffusion() {
    let tb = build_edge_table(&bm(), 1, 2.0).unwrap();
    let p = kernel(&bm()).unwrap();
    for (x, y) in [(0.0, 0.3), (-1.0, 2.0)] {
        assert_eq!(edge_density(&tb, &[x], &[y], EdgeSide::Right).unwrap(), p.density(2.0, x, y));
        let want = big_phi((y - x) / 2f64.sqrt());
        assert!((edge_max_cdf(&tb, &[x], y).unwrap() - want).abs() < 1e-14);
        assert!((edge_min_cdf(&tb, &[x], y).unwrap() - want).abs() < 1e-14);
    }
}

#[test]
fn bm_two_particles_are_conservative() {
    let tb = build_edge_table(&bm(), 2, 1.0).unwrap();
    for side in [EdgeSide::Right, EdgeSide::Left] {
        let x = if side == EdgeSide::Right { [-0.2, 0.3] } else { [0.3, -0.2] };
        let mass = cone2(side, -9.0, 9.0, 12, |u| edge_density(&tb, &x, u, side).unwrap());
        assert!((mass - 1.0).abs() < 1e-3, "{side:?}: mass {mass}");
    }
}

#[test]
fn ou_and_besq_are_conservative() {
    let tb = build_edge_table(&ou(0.5), 2, 0.7).unwrap();
    let mass = cone2(EdgeSide::Right, -9.0, 9.0, 12, |u| edge_density(&tb, &[0.0, 0.4], u, EdgeSide::Right).unwrap());
    assert!((mass - 1.0).abs() < 1e-3, "OU mass {mass}");
    let tb = build_edge_table(&besq(2.0), 2, 0.5).unwrap();
    let mass = cone2(EdgeSide::Right, 0.0, 20.0, 16, |u| edge_density(&tb, &[0.5, 1.0], u, EdgeSide::Right).unwrap());
    assert!((mass - 1.0).abs() < 1e-3, "BESQ mass {mass}");
}

/// `S^{(i−1),j} = −e^{−c_{i−1,n} t} ∂_x S^{(i),j+1}`, derivative by Richardson differences.
#[test]
fn recurrence_between_neighbouring_particles() {
    for (spec, pts) in [
        (bm(), vec![(0.0, 0.5), (-1.0, 0.2)]),
        (ou(0.7), vec![(0.3, -0.4), (1.0, 1.5)]),
        (besq(2.0), vec![(1.0, 1.5), (2.0, 0.8)]),
        (gbm(0.25), vec![(1.0, 1.3), (0.7, 0.5)]),
    ] {
        let n = 3;
        let t = 0.6;
        let tb = build_edge_table(&spec, n, t).unwrap();
        for i in 2..=n {
            assert_eq!(tb.recurrence_factor(i - 1), -(-tb.c[i - 2] * t).exp());
            for j in -1..=1 {
                for &(x, xp) in &pts {
                    let lhs = tb.s(i - 1, j, x, xp).unwrap();
                    let d = richardson_derivative(|u| tb.s(i, j + 1, u, xp).unwrap(), x, 1, spec.l, spec.r).unwrap();
                    let rhs = -(-tb.c[i - 2] * t).exp() * d;
                    let rel = (lhs - rhs).abs() / lhs.abs().max(1e-3);
                    assert!(rel < 1e-5, "{} i={i} j={j} ({x},{xp}): {lhs} vs {rhs}", spec.name);
                }
            }
        }
    }
}

/// With `e^{+c t}` the identity holds only where `c = 0`.
#[test]
fn recurrence_exponent_sign_matters() {
    let t = 0.6;
    let tb = build_edge_table(&ou(0.7), 2, t).unwrap();
    let (x, xp) = (0.3, -0.4);
    let lhs = tb.s(1, 0, x, xp).unwrap();
    let d = richardson_derivative(|u| tb.s(2, 1, u, xp).unwrap(), x, 1, f64::NEG_INFINITY, f64::INFINITY).unwrap();
    let plus = -(tb.c[0] * t).exp() * d;
    assert!((lhs - plus).abs() / lhs.abs() > 0.5);
}

/// The reflection appears as a Neumann condition: `∂_{x_i} s_t = 0` on `x_i = x_{i−1}`.
#[test]
fn neumann_condition_on_the_collision_line() {
    for (spec, x1, yp) in [(bm(), 0.2, [0.0, 0.7]), (ou(0.5), -0.3, [-0.5, 0.6]), (besq(2.0), 1.0, [0.8, 2.0])] {
        let tb = build_edge_table(&spec, 2, 0.8).unwrap();
        let s = |x2: f64| edge_density(&tb, &[x1, x2.max(x1)], &yp, EdgeSide::Right).unwrap();
        // One-sided difference into the allowed region, second order.
        let h = 1e-4;
        let d = (-3.0 * s(x1) + 4.0 * s(x1 + h) - s(x1 + 2.0 * h)) / (2.0 * h);
        assert!(d.abs() < 1e-4, "{}: ∂ = {d}", spec.name);
    }
}

#[test]
fn short_time_concentrates_on_the_start() {
    let tb = build_edge_table(&bm(), 2, 1e-3).unwrap();
    let x = [-0.5, 0.5];
    let f = |u: &[f64]| (-(u[0] + 0.4).powi(2) - (u[1] - 0.6).powi(2)).exp();
    let v = cone2(EdgeSide::Right, -2.0, 2.0, 32, |u| edge_density(&tb, &x, u, EdgeSide::Right).unwrap() * f(u));
    assert!((v - f(&x)).abs() < 1e-2, "{v} vs {}", f(&x));
}

#[test]
fn max_cdf_is_monotone() {
    let tb = build_edge_table(&bm(), 2, 1.0).unwrap();
    let mut prev = 0.0;
    for i in 0..60 {
        let z = -4.0 + 0.15 * i as f64;
        let v = edge_max_cdf(&tb, &[0.0, 0.5], z).unwrap();
        assert!(v >= prev - 1e-12 && (-1e-12..=1.0 + 1e-12).contains(&v));
        prev = v;
        // Raising any start coordinate can only lower the CDF.
        assert!(edge_max_cdf(&tb, &[0.2, 0.5], z).unwrap() <= v + 1e-12);
        assert!(edge_max_cdf(&tb, &[0.0, 0.7], z).unwrap() <= v + 1e-12);
    }
    assert!(edge_max_cdf(&tb, &[0.0, 0.5], -8.0).unwrap() < 1e-9);
    assert!((edge_max_cdf(&tb, &[0.0, 0.5], 9.0).unwrap() - 1.0).abs() < 1e-9);
    let mut prev = 0.0;
    for i in 0..60 {
        let z = -4.0 + 0.15 * i as f64;
        let v = edge_min_cdf(&tb, &[0.5, 0.0], z).unwrap();
        assert!(v >= prev - 1e-12);
        prev = v;
    }
}

#[test]
fn staircase_limit_is_smooth() {
    // Coincident start: the limit agrees with a start ε away.
    let tb = build_edge_table(&bm(), 3, 1.0).unwrap();
    let a = edge_max_cdf(&tb, &[0.0, 0.0, 0.0], 1.0).unwrap();
    let b = edge_max_cdf(&tb, &[0.0, 1e-3, 2e-3], 1.0).unwrap();
    assert!((a - b).abs() < 5e-3);
    assert_eq!(staircase(&[0.0, 0.0], EdgeSide::Right, 0.1, false), vec![0.1, 0.2]);
    assert_eq!(staircase(&[0.0, 0.0], EdgeSide::Left, 0.1, false), vec![0.2, 0.1]);
}

/// Smoothed terminal density of the simulated edge system against the formula.
#[test]
fn density_matches_simulation() {
    let tb = build_edge_table(&bm(), 2, 1.0).unwrap();
    let x0 = [0.0, 0.1];
    let w = 0.2;
    let cfg = SimConfig::new(1.0, 5e-4);
    let streams = RngStreams::new(31);
    let ends = run_paths(20_000, |p| {
        let b = simulate_edge(&bm(), 2, EdgeSide::Right, &x0, &cfg, &streams, p)?;
        Ok([b.terminal(0)[0], b.terminal(1)[0]])
    })
    .unwrap();
    let mut worst = 0.0f64;
    for a in [-0.8, 0.0, 0.8] {
        for b in [0.0, 0.8, 1.6] {
            let mc = ends.iter().map(|e| gauss(w, e[0] - a) * gauss(w, e[1] - b)).sum::<f64>() / ends.len() as f64;
            let exact = cone2(EdgeSide::Right, -7.0, 7.0, 10, |u| {
                edge_density(&tb, &x0, u, EdgeSide::Right).unwrap() * gauss(w, u[0] - a) * gauss(w, u[1] - b)
            });
            worst = worst.max((mc - exact).abs());
        }
    }
    assert!(worst <= 0.05, "sup diff {worst}");
}
