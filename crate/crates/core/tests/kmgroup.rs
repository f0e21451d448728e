use std::f64::consts::PI;
use std::sync::Arc;

use interlace::diffusion1d::*;
use interlace::kmgroup::*;
use interlace::quad::{self, GaussLegendre, NodeMap};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn gauss(t: f64, u: f64) -> f64 {
    (-u * u / (2.0 * t)).exp() / (2.0 * PI * t).sqrt()
}

/// Nested adaptive integral over `lo < y1 < y2 < hi`; independent of the
/// library's tensor grids.
fn ordered2(f: impl Fn(f64, f64) -> f64, lo: f64, hi: f64) -> f64 {
    quad::adaptive(|y1| quad::adaptive(|y2| f(y1, y2), y1, hi, 1e-13, 1e-11, 400).value, lo, hi, 1e-12, 1e-10, 400).value
}

fn ratio_spread(pairs: &[(f64, f64)]) -> f64 {
    let r: Vec<f64> = pairs.iter().map(|(a, b)| a / b).collect();
    let mean = r.iter().sum::<f64>() / r.len() as f64;
    r.iter().map(|v| (v / mean - 1.0).abs()).fold(0.0, f64::max)
}

fn probes2(l: f64, r: f64) -> Vec<Vec<f64>> {
    let (a, b) = if l.is_finite() && r.is_finite() { (l, r) } else if l.is_finite() { (l, l + 4.0) } else { (-2.0, 2.0) };
    let u = |s: f64| a + (b - a) * s;
    vec![vec![u(0.2), u(0.5)], vec![u(0.3), u(0.45)], vec![u(0.15), u(0.8)]]
}

#[test]
fn km_single_particle_is_the_kernel() {
    let k = kernel(&ou(1.0)).unwrap();
    for (x, y) in [(0.2, -0.4), (1.0, 1.3)] {
        let v = km_density(&k, 0.7, &[x], &[y]).unwrap();
        assert!((v - k.density(0.7, x, y)).abs() < 1e-15);
    }
}

#[test]
fn km_bm_two_by_two_closed_form() {
    let k = kernel(&bm()).unwrap();
    let v = km_density(&k, 1.0, &[0.0, 1.0], &[0.0, 1.0]).unwrap();
    // φ(0)² − φ(1)² = (1 − e^{−1})/2π.
    let oracle = (1.0 - (-1.0f64).exp()) / (2.0 * PI);
    assert!((v - oracle).abs() < 1e-15);
    assert!((v - 0.100605).abs() < 5e-7);
}

#[test]
fn km_vanishes_on_coincident_points() {
    let k = kernel(&besq(3.0)).unwrap();
    assert_eq!(km_density(&k, 0.5, &[1.0, 2.0], &[1.5, 1.5]).unwrap(), 0.0);
    assert_eq!(km_density(&k, 0.5, &[1.2, 1.2], &[1.0, 2.5]).unwrap(), 0.0);
    assert!(km_density(&k, 0.5, &[1.0], &[1.0, 2.0]).is_err());
}

#[test]
fn dyson_transform_is_a_probability_density() {
    let k = kernel(&bm()).unwrap();
    let h = eigenfunction_catalog(&EigenFamily::Vandermonde(bm()), 2).unwrap();
    let x = [0.0, 1.0];
    let mass = ordered2(|a, b| h_transform_density(&k, &h, 1.0, &x, &[a, b]).unwrap(), -9.0, 10.0);
    assert!((mass - 1.0).abs() < 1e-4, "mass {mass}");
    // Constant h on one conservative particle gives back p_t.
    let one = Eigenfunction::constant(f64::NEG_INFINITY, f64::INFINITY);
    let v = h_transform_density(&k, &one, 0.4, &[0.3], &[1.0]).unwrap();
    assert!((v - gauss(0.4, 0.7)).abs() < 1e-15);
}

#[test]
fn h_transform_rejects_nonpositive_start() {
    let k = kernel(&bm()).unwrap();
    let h = eigenfunction_catalog(&EigenFamily::Vandermonde(bm()), 2).unwrap();
    assert!(matches!(h_transform_density(&k, &h, 1.0, &[1.0, 1.0], &[0.0, 1.0]), Err(interlace::Error::Domain(_))));
    assert!(h_transform_density(&k, &h, 1.0, &[1.0, 0.0], &[0.0, 1.0]).is_err());
}

#[test]
fn catalog_examples() {
    let h = eigenfunction_catalog(&EigenFamily::Vandermonde(bm()), 3).unwrap();
    assert_eq!(h.rate, 0.0);
    for x in [[-1.0, 0.2, 2.0], [0.1, 0.3, 0.35]] {
        let vdm = (x[1] - x[0]) * (x[2] - x[0]) * (x[2] - x[1]);
        assert!((h.eval(&x) / vdm - 1.0).abs() < 1e-12);
    }

    let s = eigenfunction_catalog(&EigenFamily::GroundState(bm_interval(false, false)), 1).unwrap();
    assert!((s.rate + 0.5).abs() < 1e-15);
    let pairs: Vec<(f64, f64)> = [0.3, 1.0, 2.5].iter().map(|&x| (s.eval(&[x]), x.sin())).collect();
    assert!(ratio_spread(&pairs) < 1e-13);

    // det(x_i^{j+ν}) for the conjugate of BESQ(d).
    for d in [0.5f64, 3.0] {
        let nu = 0.5 * d - 1.0;
        let h = eigenfunction_catalog(&EigenFamily::ConjugateVandermonde(besq(d)), 2).unwrap();
        let pairs: Vec<(f64, f64)> = [[0.3f64, 0.9], [1.0, 4.0], [2.0, 2.1]]
            .iter()
            .map(|x| {
                let det = x[0].powf(1.0 + nu) * x[1].powf(2.0 + nu) - x[0].powf(2.0 + nu) * x[1].powf(1.0 + nu);
                (h.eval(x), det)
            })
            .collect();
        assert!(ratio_spread(&pairs) < 1e-12, "d = {d}");
        assert_eq!(h.rate, 0.0);
    }
}

#[test]
fn catalog_rejects_unsupported_requests() {
    assert!(eigenfunction_catalog(&EigenFamily::Vandermonde(besq_absorbed(1.0).unwrap()), 2).is_err());
    assert!(eigenfunction_catalog(&EigenFamily::Vandermonde(bm_halfline(true)), 2).is_err());
    assert!(eigenfunction_catalog(&EigenFamily::GroundState(bm()), 2).is_err());
    assert!(eigenfunction_catalog(&EigenFamily::Exponential { drift: 0.0, mu: vec![1.0, 0.5] }, 2).is_err());
    assert!(EigenFamily::from_id("nope:bm").is_err());
    assert!(matches!(EigenFamily::from_id("exp:0.5:-1,1").unwrap(), EigenFamily::Exponential { .. }));
}

#[test]
fn eigen_residual_examples() {
    let k = kernel(&bm()).unwrap();
    let h = eigenfunction_catalog(&EigenFamily::Vandermonde(bm()), 2).unwrap();
    let r = eigen_residual(&k, &h, 0.5, &probes2(f64::NEG_INFINITY, f64::INFINITY)).unwrap();
    assert!(r <= 1e-6, "bm vandermonde {r}");

    let refl = bm_interval(true, true);
    let one = Eigenfunction::constant(0.0, PI);
    let r = eigen_residual(&kernel(&refl).unwrap(), &one, 0.6, &[vec![0.4], vec![2.9]]).unwrap();
    assert!(r <= 1e-9, "constant on reflecting interval {r}");

    let killed = bm_interval(false, false);
    let s = eigenfunction_catalog(&EigenFamily::GroundState(killed.clone()), 2).unwrap();
    assert!((s.rate + 2.5).abs() < 1e-15);
    let r = eigen_residual(&kernel(&killed).unwrap(), &s, 0.3, &probes2(0.0, PI)).unwrap();
    assert!(r <= 1e-6, "sine ground state {r}");
}

/// Stored rates across the catalog, each validated by the semigroup action.
#[test]
fn stored_rates_make_the_residual_vanish() {
    let cases: Vec<(EigenFamily, usize, f64)> = vec![
        (EigenFamily::Vandermonde(ou(1.0)), 2, -1.0),
        (EigenFamily::Vandermonde(ou(0.5)), 3, -1.5),
        (EigenFamily::Vandermonde(laguerre(3.0)), 2, -2.0),
        (EigenFamily::Vandermonde(jacobi(1.5, 2.0)), 2, -2.0 * (1.5 + 2.0)),
        (EigenFamily::Vandermonde(besq(3.0)), 2, 0.0),
        (EigenFamily::Vandermonde(gbm(0.3)), 2, 0.3),
        (EigenFamily::ConjugateVandermonde(bm()), 2, 0.0),
        (EigenFamily::ConjugateVandermonde(ou(1.0)), 2, -3.0),
        (EigenFamily::ConjugateVandermonde(besq(3.0)), 2, 0.0),
        (EigenFamily::ConjugateVandermonde(laguerre(3.0)), 1, -2.0),
        (EigenFamily::Exponential { drift: 0.4, mu: vec![-0.5, 1.0] }, 2, 0.125 - 0.2 + 0.5 + 0.4),
        (EigenFamily::HalfLine { reflecting: true }, 2, 0.0),
        (EigenFamily::HalfLine { reflecting: false }, 2, 0.0),
        (EigenFamily::GroundState(bm_interval(true, true)), 2, -0.5),
        (EigenFamily::GroundState(ou(1.0)), 2, -1.0),
    ];
    for (fam, n, rate) in cases {
        let h = eigenfunction_catalog(&fam, n).unwrap();
        assert!((h.rate - rate).abs() < 1e-12, "{}: stored rate {} vs {rate}", h.name, h.rate);
        let spec = fam.spec().unwrap();
        let k = kernel(&spec).unwrap();
        let probes: Vec<Vec<f64>> = match n {
            1 => vec![vec![0.7], vec![1.6]],
            2 => probes2(h.l, h.r.min(if spec.r.is_finite() { spec.r } else { f64::INFINITY })),
            _ => vec![vec![-1.0, 0.1, 0.9], vec![-0.3, 0.0, 1.7]],
        };
        let r = eigen_residual(&k, &h, 0.4, &probes).unwrap();
        assert!(r <= 1e-6, "{}: residual {r}", h.name);
    }
}

#[test]
fn stored_rate_is_not_inferred() {
    // A deliberately wrong rate is caught by the residual.
    let h = eigenfunction_catalog(&EigenFamily::Vandermonde(ou(1.0)), 2).unwrap();
    let wrong = Eigenfunction::new("wrong", h.components().to_vec(), 0.0, h.l, h.r).unwrap();
    let r = eigen_residual(&kernel(&ou(1.0)).unwrap(), &wrong, 0.4, &probes2(h.l, h.r)).unwrap();
    assert!(r > 0.1);
}

#[test]
fn eigenfunctions_are_positive_on_the_chamber() {
    let fams = [
        EigenFamily::Vandermonde(bm()),
        EigenFamily::ConjugateVandermonde(besq(3.0)),
        EigenFamily::GroundState(bm_interval(false, false)),
        EigenFamily::GroundState(bm_interval(true, true)),
        EigenFamily::HalfLine { reflecting: false },
    ];
    for fam in fams {
        let h = eigenfunction_catalog(&fam, 3).unwrap();
        let (l, r) = (h.l, h.r);
        let (a, b) = if r.is_finite() { (l, r) } else if l.is_finite() { (l, l + 6.0) } else { (-3.0, 3.0) };
        let mut pts = Vec::new();
        for i in 1..8 {
            for j in i + 1..9 {
                for k in j + 1..10 {
                    let u = |m: usize| a + (b - a) * m as f64 / 10.0;
                    pts.push(vec![u(i), u(j), u(k)]);
                }
            }
        }
        assert!(h.positive_on(&pts), "{}", h.name);
    }
}

#[test]
fn spectral_expansion_matches_closed_forms() {
    let killed = bm_interval(false, false);
    let ik = IntervalKernel::new(false, false);
    for (x, y) in [(0.5, 1.0), (2.0, 2.9), (1.5, 0.2)] {
        let v = spectral_km(&killed, 1.0, &[x], &[y], 1e-13).unwrap();
        assert!((v - ik.density_image(1.0, x, y)).abs() < 1e-8);
    }
    let o = ou(1.0);
    let k = kernel(&o).unwrap();
    for (x, y) in [([-0.5, 0.4], [-0.2, 0.9]), ([0.0, 1.0], [0.5, 0.6])] {
        let s = spectral_km(&o, 0.5, &x, &y, 1e-12).unwrap();
        let m = km_density(&k, 0.5, &x, &y).unwrap();
        assert!((s - m).abs() < 1e-7, "ou: {s} vs {m}");
    }
}

#[test]
fn spectral_leading_term_dominates_at_large_times() {
    let spec = bm_interval(false, false);
    let (x, y) = ([0.7, 2.0], [1.1, 2.4]);
    let lead = |t: f64| {
        let phi = |k: f64, u: f64| (k * u).sin() / PI.sqrt();
        let dx = phi(1.0, x[0]) * phi(2.0, x[1]) - phi(2.0, x[0]) * phi(1.0, x[1]);
        let dy = phi(1.0, y[0]) * phi(2.0, y[1]) - phi(2.0, y[0]) * phi(1.0, y[1]);
        (-2.5 * t).exp() * dx * dy * 4.0
    };
    let r4 = spectral_km(&spec, 4.0, &x, &y, 1e-16).unwrap() / lead(4.0);
    let r8 = spectral_km(&spec, 8.0, &x, &y, 1e-20).unwrap() / lead(8.0);
    assert!((r8 - 1.0).abs() < (r4 - 1.0).abs() || (r8 - 1.0).abs() < 1e-12);
    assert!((r8 - 1.0).abs() < 1e-4, "{r8}");
}

#[test]
fn ground_states_reduce_to_classical_determinants() {
    let s = ground_state(&bm_interval(true, true), 2).unwrap();
    let pairs: Vec<(f64, f64)> =
        [[0.2, 1.0], [1.0, 3.0], [2.0, 2.5]].iter().map(|x| (s.eval(x), x[1].cos() - x[0].cos())).collect();
    // det(cos((k−1)x_j)) = cos x_2 − cos x_1 up to a constant (negative here).
    assert!(ratio_spread(&pairs) < 1e-12);

    let g = ground_state(&ou(1.0), 3).unwrap();
    let pairs: Vec<(f64, f64)> = [[-1.0, 0.0, 1.0], [-0.2, 0.5, 2.0], [0.1, 0.2, 0.3]]
        .iter()
        .map(|x| (g.eval(x), (x[1] - x[0]) * (x[2] - x[0]) * (x[2] - x[1])))
        .collect();
    assert!(ratio_spread(&pairs) < 1e-10);

    // Rate is minus the sum of the lowest decay rates.
    for spec in [bm_interval(false, false), ou(2.0), laguerre(3.0), jacobi(1.5, 2.0)] {
        let sp = spectrum(&spec).unwrap();
        let mut rates: Vec<f64> = (0..6).map(|k| sp.rate(k)).collect();
        rates.sort_by(f64::total_cmp);
        let g = ground_state(&spec, 3).unwrap();
        assert!((g.rate + rates[..3].iter().sum::<f64>()).abs() < 1e-12);
    }
    assert!(ground_state(&gbm(0.5), 2).is_err());
}

fn level(h: impl Fn(f64) -> f64 + Send + Sync + 'static, s: impl Fn(f64) -> f64 + Send + Sync + 'static) -> ChainLevel {
    ChainLevel { h: Arc::new(h), s_prime: Arc::new(s) }
}

fn fd_wronskian(h: &Eigenfunction, x: f64) -> f64 {
    let n = h.n();
    let e = 1e-3;
    // Central differences up to order n−1.
    let deriv = |i: usize, k: usize| -> f64 {
        let coeffs: &[(f64, f64)] = match k {
            0 => &[(0.0, 1.0)],
            1 => &[(-1.0, -0.5), (1.0, 0.5)],
            _ => &[(-1.0, 1.0), (0.0, -2.0), (1.0, 1.0)],
        };
        coeffs.iter().map(|&(o, c)| c * h.component(i, x + o * e)).sum::<f64>() / e.powi(k as i32)
    };
    interlace::linalg::det_with(n, |i, k| deriv(i, k)) * h.sign()
}

#[test]
fn recursive_construction_reproduces_known_families() {
    // Unit BM chain: span{1, x, x²/2}.
    let bm_chain = EigenChain { levels: (0..3).map(|_| level(|_| 1.0, |_| 1.0)).collect(), c: 0.0, l: f64::NEG_INFINITY, r: f64::INFINITY, rate: 0.0 };
    let h = build_eigenfunction_recursive(&bm_chain, 3).unwrap();
    let pairs: Vec<(f64, f64)> = [[-1.0, 0.0, 1.0], [0.3, 0.8, 2.2]]
        .iter()
        .map(|x| (h.eval(x), (x[1] - x[0]) * (x[2] - x[0]) * (x[2] - x[1])))
        .collect();
    assert!(ratio_spread(&pairs) < 1e-8);
    let h2 = build_eigenfunction_recursive(&bm_chain, 2).unwrap();
    let w = recursion_weights(&bm_chain, 2).unwrap();
    for x in [-0.5, 0.4, 1.7] {
        assert!((fd_wronskian(&h2, x) - wronskian_product(&w, x)).abs() < 1e-6);
    }

    // Half-line chain: ½(x₂² − x₁²).
    let half = EigenChain { levels: vec![level(|_| 1.0, |_| 1.0), level(|x| x, |_| 1.0)], c: 0.0, l: 0.0, r: f64::INFINITY, rate: 0.0 };
    let h = build_eigenfunction_recursive(&half, 2).unwrap();
    let pairs: Vec<(f64, f64)> =
        [[0.5, 1.0], [0.1, 3.0], [2.0, 2.2]].iter().map(|x| (h.eval(x), 0.5 * (x[1] * x[1] - x[0] * x[0]))).collect();
    assert!(ratio_spread(&pairs) < 1e-8);
    let w = recursion_weights(&half, 2).unwrap();
    for x in [0.5, 1.3] {
        let fd = fd_wronskian(&h, x);
        assert!((fd / wronskian_product(&w, x) - 1.0).abs() < 1e-5, "{fd}");
    }

    // BESQ ladder: h_k = x^{ν+1+k}, s′_k = x^{ν+k} gives det(x_i^{j+ν}).
    for d in [1.0, 3.0] {
        let nu: f64 = 0.5 * d - 1.0;
        let levels = (0..3)
            .map(|k| {
                let kf = k as f64;
                level(move |x: f64| x.powf(nu + 1.0 + kf), move |x: f64| x.powf(nu + kf))
            })
            .collect();
        let chain = EigenChain { levels, c: 1.0, l: 0.0, r: f64::INFINITY, rate: 0.0 };
        let h = build_eigenfunction_recursive(&chain, 3).unwrap();
        let pairs: Vec<(f64, f64)> = [[0.2, 0.9, 1.5], [1.0, 2.0, 3.5], [0.5, 0.6, 4.0]]
            .iter()
            .map(|x| (h.eval(x), interlace::linalg::det_with(3, |i, j| x[j].powf(i as f64 + 1.0 + nu))))
            .collect();
        assert!(ratio_spread(&pairs) < 1e-8, "d = {d}");
        let w = recursion_weights(&chain, 3).unwrap();
        assert!((wronskian_product(&w, 2.0) - 2f64.powf(3.0 * (nu + 1.0))).abs() < 1e-12);
    }
}

#[test]
fn recursive_construction_rejects_bad_weights() {
    let chain = EigenChain { levels: vec![level(|x| x, |_| 1.0), level(|_| -1.0, |_| 1.0)], c: 1.0, l: 0.0, r: f64::INFINITY, rate: 0.0 };
    assert!(matches!(build_eigenfunction_recursive(&chain, 2), Err(interlace::Error::Divergent(_))));
    assert!(build_eigenfunction_recursive(&chain, 3).is_err());
}

#[test]
fn gue_entrance_law_matches_formula_and_normalizer() {
    let law = entrance_law(&EntranceFamily::Gue, 2, 1.0).unwrap();
    // ∫_{x1<x2} e^{−|x|²/2}(x2 − x1)² = ½ · 2π · E[(X2 − X1)²] = 2π.
    assert!((law.log_normalizer() - (2.0 * PI).ln()).abs() < 1e-10);
    for y in [[-1.0f64, 0.5], [0.0, 2.0], [-0.3, -0.1]] {
        let f = (-(y[0] * y[0] + y[1] * y[1]) / 2.0).exp() * (y[1] - y[0]).powi(2) / (2.0 * PI);
        assert!((law.density(&y) - f).abs() < 1e-12);
    }
    assert_eq!(law.density(&[1.0, 0.0]), 0.0);
    let mass = ordered2(|a, b| law.density(&[a, b]), -12.0, 12.0);
    assert!((mass - 1.0).abs() < 1e-8);
}

#[test]
fn besq_single_particle_law_is_the_kernel_from_zero() {
    for d in [1.0, 3.0] {
        let law = entrance_law(&EntranceFamily::Besq { d }, 1, 1.0).unwrap();
        let k = kernel(&besq(d)).unwrap();
        for y in [0.1, 1.0, 4.0] {
            assert!((law.density(&[y]) / k.density(1.0, 0.0, y) - 1.0).abs() < 1e-8, "d = {d}, y = {y}");
        }
    }
}

#[test]
fn drifted_law_tends_to_gue() {
    let gue = entrance_law(&EntranceFamily::Gue, 2, 1.0).unwrap();
    let exact = entrance_law(&EntranceFamily::Drift { mu: vec![0.0, 0.0] }, 2, 1.0).unwrap();
    let y = [-0.4, 0.9];
    assert!((exact.density(&y) - gue.density(&y)).abs() < 1e-12);
    let mut prev = f64::INFINITY;
    for eps in [0.2, 0.05, 0.0125] {
        let law = entrance_law(&EntranceFamily::Drift { mu: vec![-eps, eps] }, 2, 1.0).unwrap();
        let diff = (law.density(&y) - gue.density(&y)).abs();
        assert!(diff < prev);
        prev = diff;
    }
    assert!(prev < 1e-3);
    assert!(entrance_law(&EntranceFamily::Drift { mu: vec![0.0, 0.0, 1.0] }, 3, 1.0).is_err());
}

#[test]
fn entrance_laws_are_consistent_with_the_transformed_dynamics() {
    let fams = [EntranceFamily::Gue, EntranceFamily::Besq { d: 3.0 }, EntranceFamily::HalfLine { reflecting: true }, EntranceFamily::HalfLine { reflecting: false }];
    for fam in &fams {
        for n in [1, 2] {
            let y: Vec<f64> = if n == 1 { vec![0.8] } else { vec![0.4, 1.5] };
            let r = entrance_consistency_residual(fam, n, 0.5, 0.5, &y).unwrap();
            assert!(r < 1e-4, "{fam:?} n = {n}: {r}");
        }
    }
    let r = entrance_consistency_residual(&EntranceFamily::Drift { mu: vec![-0.5, 0.7] }, 2, 0.5, 0.5, &[0.1, 0.9]).unwrap();
    assert!(r < 1e-4, "drift {r}");
}

#[test]
fn entrance_samplers_match_moments() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let m = 20_000;
    // Top eigenvalue of GUE(2): E = 2/√π at t = 1, scaled by √t.
    let t = 2.0;
    let law = entrance_law(&EntranceFamily::Gue, 2, t).unwrap();
    let top: Vec<f64> = (0..m).map(|_| law.sample(&mut rng).unwrap()[1]).collect();
    let mean = top.iter().sum::<f64>() / m as f64;
    let sd = (top.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m as f64).sqrt();
    assert!((mean - 2.0 / PI.sqrt() * t.sqrt()).abs() < 4.0 * sd / (m as f64).sqrt(), "{mean}");

    let law = entrance_law(&EntranceFamily::Besq { d: 3.0 }, 1, 0.5).unwrap();
    let s: Vec<f64> = (0..m).map(|_| law.sample(&mut rng).unwrap()[0]).collect();
    let mean = s.iter().sum::<f64>() / m as f64;
    // BESQ(3) from 0: mean d·t, variance 2d t².
    assert!((mean - 1.5).abs() < 4.0 * (6.0f64 * 0.25).sqrt() / (m as f64).sqrt(), "{mean}");

    let law = entrance_law(&EntranceFamily::HalfLine { reflecting: true }, 1, 1.0).unwrap();
    let s: Vec<f64> = (0..m).map(|_| law.sample(&mut rng).unwrap()[0]).collect();
    let mean = s.iter().sum::<f64>() / m as f64;
    assert!((mean - (2.0 / PI).sqrt()).abs() < 4.0 * (1.0 - 2.0 / PI).sqrt() / (m as f64).sqrt());

    let drift = entrance_law(&EntranceFamily::Drift { mu: vec![0.0, 1.0] }, 2, 1.0).unwrap();
    assert!(drift.sample(&mut rng).is_err());
}

#[test]
fn sampled_configurations_are_ordered_and_reproducible() {
    let law = entrance_law(&EntranceFamily::Besq { d: 2.0 }, 3, 1.0).unwrap();
    let mut a = ChaCha8Rng::seed_from_u64(11);
    let mut b = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let u = law.sample(&mut a).unwrap();
        assert!(u.windows(2).all(|w| w[0] <= w[1]) && u[0] >= 0.0);
        assert_eq!(u, law.sample(&mut b).unwrap());
    }
}

#[test]
fn polynomial_ensemble_examples() {
    let k = kernel(&bm()).unwrap();
    let h = eigenfunction_catalog(&EigenFamily::Vandermonde(bm()), 2).unwrap();
    let ens = polynomial_ensemble_limit(&k, &h, 0.0, 1.0).unwrap();
    let gue = entrance_law(&EntranceFamily::Gue, 2, 1.0).unwrap();
    for y in [[-1.0, 0.5], [0.2, 2.2], [-2.5, -0.3]] {
        assert!((ens.density(&y).unwrap() - gue.density(&y)).abs() < 1e-8);
    }

    let one = Eigenfunction::constant(f64::NEG_INFINITY, f64::INFINITY);
    let ens = polynomial_ensemble_limit(&k, &one, 0.7, 0.5).unwrap();
    assert!((ens.density(&[1.0]).unwrap() - gauss(0.5, 0.3)).abs() < 1e-10);

    for d in [2.0, 3.0] {
        let k = kernel(&besq(d)).unwrap();
        let h = eigenfunction_catalog(&EigenFamily::Vandermonde(besq(d)), 2).unwrap();
        let ens = polynomial_ensemble_limit(&k, &h, 1e-9, 1.0).unwrap();
        let law = entrance_law(&EntranceFamily::Besq { d }, 2, 1.0).unwrap();
        for y in [[0.5, 2.0], [1.0, 6.0], [3.0, 3.5]] {
            let (a, b) = (ens.density(&y).unwrap(), law.density(&y));
            assert!((a - b).abs() < 1e-6, "d = {d}: {a} vs {b}");
        }
    }
}

#[test]
fn km_mass_is_sub_markov() {
    let specs = [bm(), ou(1.0), besq(3.0), besq_absorbed(1.0).unwrap(), bm_halfline(false), bm_interval(false, true), gbm(0.2)];
    for spec in specs {
        let k = kernel(&spec).unwrap();
        let (a, b) = match (spec.l.is_finite(), spec.r.is_finite()) {
            (true, true) => (spec.l + 0.3, spec.r - 0.8),
            (true, false) => (spec.l + 0.4, spec.l + 1.5),
            _ => (-0.3, 0.4),
        };
        let m = km_mass(&k, 0.5, &[a, b]).unwrap();
        assert!(m > 0.0 && m <= 1.0 + 1e-8, "{}: {m}", spec.name);
    }
    // One particle on ℝ is conservative.
    let m = km_mass(&kernel(&bm()).unwrap(), 0.5, &[0.3]).unwrap();
    assert!((m - 1.0).abs() < 1e-10);
}

#[test]
fn km_chapman_kolmogorov() {
    let k = kernel(&bm()).unwrap();
    let rule = GaussLegendre::<f64>::new(32);
    for (x, y) in [([-0.5, 0.5], [-0.2, 0.9]), ([0.0, 1.5], [0.3, 1.0])] {
        let dims = [(-8.0, 9.0, NodeMap::Linear), (-8.0, 9.0, NodeMap::Linear)];
        // The integrand is symmetric in z, so the box integral counts the chamber twice.
        let lhs = 0.5
            * quad::box_integral(&rule, &dims, 8, |z| {
                km_density(&k, 0.5, &x, z).unwrap() * km_density(&k, 0.5, z, &y).unwrap()
            });
        let rhs = km_density(&k, 1.0, &x, &y).unwrap();
        assert!(((lhs - rhs) / rhs).abs() < 1e-3);
    }
}
