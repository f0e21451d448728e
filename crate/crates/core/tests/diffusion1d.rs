use interlace::diffusion1d::*;
use interlace::quad;

fn gauss_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Φ by direct quadrature of the density; independent of erf.
fn phi_by_quadrature(z: f64) -> f64 {
    quad::adaptive_general(gauss_pdf, f64::NEG_INFINITY, z, 1e-15, 1e-14, 1000).value
}

#[test]
fn scale_speed_closed_forms() {
    let ss = scale_speed(&bm()).unwrap();
    for x in [-3.0, 0.0, 2.5] {
        assert!((ss.s_prime(x) - 1.0).abs() < 1e-15);
        assert!((ss.m(x) - 2.0).abs() < 1e-15);
    }
    let ss = scale_speed(&ou(1.0)).unwrap();
    for x in [-1.5, 0.3, 2.0] {
        assert!((ss.s_prime(x) / (x * x).exp() - 1.0).abs() < 1e-13);
        assert!((ss.m(x) / (2.0 * (-x * x).exp()) - 1.0).abs() < 1e-13);
    }
}

#[test]
fn besq_scale_speed_matches_quadrature_oracle() {
    // Same coefficients without the closed-form log scale: ln s′ comes
    // from quadrature of b/a.
    for d in [0.5, 1.0, 3.0] {
        let closed = scale_speed(&besq(d)).unwrap();
        let raw = DiffusionSpec::custom(
            "raw-besq",
            |x| 2.0 * x,
            move |_| d,
            (0.0, f64::INFINITY),
            BoundaryBehavior::Natural,
            BoundaryBehavior::Natural,
            1.0,
        )
        .unwrap();
        let numeric = scale_speed(&raw).unwrap();
        for x in [0.05f64, 0.7, 4.0, 11.0] {
            let sp = x.powf(-d / 2.0);
            let m = x.powf(d / 2.0 - 1.0) / 2.0;
            assert!((closed.s_prime(x) / sp - 1.0).abs() < 1e-13);
            assert!((closed.m(x) / m - 1.0).abs() < 1e-13);
            assert!((numeric.s_prime(x) / sp - 1.0).abs() < 1e-10, "d={d} x={x}");
        }
    }
}

#[test]
fn speed_scale_product_is_reciprocal_of_a() {
    for id in ["bm", "bm_drift:0.7", "ou", "ou:-0.5", "besq:3", "lag:2.5", "jac:1.5,0.5", "gbm:0.25"] {
        let spec = catalog(id).unwrap();
        let ss = scale_speed(&spec).unwrap();
        for x in spec.probe_points(9) {
            let p = ss.m(x) * ss.s_prime(x) * spec.a(x);
            assert!((p - 1.0).abs() < 1e-12, "{id} at {x}: {p}");
        }
    }
}

#[test]
fn cumulative_scale_and_speed() {
    let ss = scale_speed(&bm()).unwrap();
    assert!((ss.s(1.5).unwrap() - 1.5).abs() < 1e-12);
    assert!((ss.big_m(-0.5).unwrap() + 1.0).abs() < 1e-12);
    let g = scale_speed(&gbm(0.25)).unwrap();
    // s′ = x^{−1/2} ⇒ s(x) = 2(√x − 1).
    assert!((g.s(4.0).unwrap() - 2.0).abs() < 1e-10);
}

#[test]
fn conjugation_catalog() {
    let b = besq(3.0).conjugate().unwrap();
    assert_eq!(b.family, Family::Cir { delta: -1.0, kappa: 0.0 });
    assert_eq!(b.behavior_l, BoundaryBehavior::Exit);
    assert!((b.b(0.7) - (-1.0)).abs() < 1e-15);
    let w = bm().conjugate().unwrap();
    assert_eq!(w.family, Family::Bm { mu: 0.0 });
    let g = gbm(0.3).conjugate().unwrap();
    assert_eq!(g.family, Family::Gbm { alpha: 0.7 });
    let h = bm_halfline(true).conjugate().unwrap();
    assert_eq!(h.behavior_l, BoundaryBehavior::RegularAbsorbing);
    let j = jacobi(1.0, 1.0).conjugate().unwrap();
    assert!(j.b(0.3).abs() < 1e-15, "Wright–Fisher drift vanishes");
    let r = besq(1.0).conjugate().unwrap();
    assert_eq!(r.behavior_l, BoundaryBehavior::RegularAbsorbing);
}

#[test]
fn conjugate_drift_is_a_prime_minus_b() {
    let spec = DiffusionSpec::custom(
        "quad",
        |x| 1.0 + x * x,
        |x| -x,
        (f64::NEG_INFINITY, f64::INFINITY),
        BoundaryBehavior::Natural,
        BoundaryBehavior::Natural,
        0.0,
    )
    .unwrap();
    let c = spec.conjugate().unwrap();
    for x in [-2.0, -0.3, 0.0, 1.7] {
        assert!((c.b(x) - (2.0 * x + x)).abs() < 1e-8, "x={x}");
        assert_eq!(c.a(x), spec.a(x));
    }
    let cc = c.conjugate().unwrap();
    for x in [-1.0, 0.5, 2.0] {
        assert!((cc.b(x) - spec.b(x)).abs() < 1e-7);
    }
}

#[test]
fn conjugate_swaps_scale_and_speed_up_to_constants() {
    for id in ["bm_drift:0.4", "ou", "besq:3", "gbm:0.25", "jac:1.5,2", "lag:3"] {
        let spec = catalog(id).unwrap();
        let ss = scale_speed(&spec).unwrap();
        let dual = dual_speed(&spec).unwrap();
        let pts = spec.probe_points(7);
        let r0 = dual.s_prime(pts[0]) / ss.m(pts[0]);
        let q0 = dual.m(pts[0]) / ss.s_prime(pts[0]);
        for &x in &pts {
            assert!((dual.s_prime(x) / ss.m(x) / r0 - 1.0).abs() < 1e-10, "{id}");
            assert!((dual.m(x) / ss.s_prime(x) / q0 - 1.0).abs() < 1e-10, "{id}");
        }
        // The constants are a(c) and 1/a(c).
        assert!((r0 - spec.a(spec.c)).abs() < 1e-10 * r0.abs().max(1.0), "{id}: {r0}");
        assert!((q0 * spec.a(spec.c) - 1.0).abs() < 1e-10, "{id}");
    }
}

#[test]
fn boundary_examples() {
    assert_eq!(classify_boundary(&besq(3.0), Endpoint::Left).unwrap(), BoundaryClass::Entrance);
    assert_eq!(classify_boundary(&besq(1.0), Endpoint::Left).unwrap(), BoundaryClass::Regular);
    assert_eq!(classify_boundary(&bm(), Endpoint::Right).unwrap(), BoundaryClass::Natural);
    assert_eq!(classify_boundary(&besq(0.0), Endpoint::Left).unwrap(), BoundaryClass::Exit);
    assert_eq!(classify_boundary(&bm_halfline(true), Endpoint::Left).unwrap(), BoundaryClass::Regular);
}

#[test]
fn classification_commutes_with_conjugation() {
    for id in ["bm", "ou", "besq:0.5", "besq:1", "besq:2", "besq:3", "jac:1,1", "gbm:0.25", "lag:3", "bm_drift:1"] {
        let spec = catalog(id).unwrap();
        let conj = spec.conjugate().unwrap();
        for e in [Endpoint::Left, Endpoint::Right] {
            let c = classify_boundary(&spec, e).unwrap();
            let d = classify_boundary(&conj, e).unwrap();
            assert_eq!(d, c.conjugate(), "{id} at {e}");
            assert_eq!(spec.behavior(e).class(), c, "{id} tag at {e}");
        }
        check_behaviors(&spec).unwrap();
    }
}

#[test]
fn mismatched_tag_is_rejected() {
    let spec = DiffusionSpec::custom(
        "fake-entrance",
        |_| 0.5,
        |_| 0.0,
        (f64::NEG_INFINITY, f64::INFINITY),
        BoundaryBehavior::Entrance,
        BoundaryBehavior::Natural,
        0.0,
    )
    .unwrap();
    assert!(check_behaviors(&spec).is_err());
}

#[test]
fn catalog_ids() {
    assert!(catalog("bm_interval:refl,abs").is_ok());
    assert!(catalog("bm_halfline:abs").is_ok());
    assert!(matches!(catalog("heston"), Err(interlace::Error::Catalog(_))));
    assert!(matches!(catalog("besq:x"), Err(interlace::Error::Catalog(_))));
    assert!(kernel(&catalog("jac:0,0").unwrap()).is_err());
}

#[test]
fn kernel_examples() {
    let k = kernel(&bm()).unwrap();
    assert!((k.density(1.0, 0.0, 0.0) - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
    assert!((k.density(1.0, 0.0, 0.0) - 0.398_942_3).abs() < 1e-7);
    let h = kernel(&bm_halfline(false)).unwrap();
    let oracle = 2.0 * phi_by_quadrature(-1.0);
    assert!((h.atom_l(1.0, 1.0) - oracle).abs() < 1e-12);
    assert!((h.atom_l(1.0, 1.0) - 0.317_310_5).abs() < 1e-7);
}

fn total_mass(k: &TransitionKernel, t: f64, x: f64) -> f64 {
    k.interior_mass(t, x) + k.atom_l(t, x) + k.atom_r(t, x)
}

#[test]
fn kernels_conserve_mass() {
    let ids = [
        "bm",
        "bm_drift:-0.6",
        "ou",
        "ou:-0.5",
        "besq:3",
        "besq:1",
        "besq:1,abs",
        "besq:-1",
        "besq:0",
        "lag:3",
        "cir:-1,2",
        "jac:1,1",
        "jac:0.5,2",
        "gbm:0.25",
        "bm_halfline:refl",
        "bm_halfline:abs",
        "bm_interval:abs,abs",
        "bm_interval:refl,refl",
        "bm_interval:abs,refl",
        "bm_interval:refl,abs",
    ];
    for id in ids {
        let spec = catalog(id).unwrap();
        let k = kernel(&spec).unwrap();
        for &t in &[0.3, 1.0] {
            for x in spec.probe_points(3) {
                let mass = total_mass(&k, t, x);
                assert!((mass - 1.0).abs() < 1e-8, "{id} t={t} x={x}: {mass}");
            }
        }
    }
}

#[test]
fn reversibility_against_speed() {
    for id in ["bm_drift:0.3", "ou", "ou:-0.4", "besq:3", "besq:-1", "besq:1", "lag:2.5", "gbm:0.25", "bm_halfline:abs", "bm_interval:abs,refl", "jac:1.5,1"] {
        let spec = catalog(id).unwrap();
        let k = kernel(&spec).unwrap();
        let ss = scale_speed(&spec).unwrap();
        let pts = spec.probe_points(4);
        for &x in &pts {
            for &y in &pts {
                let scale = ss.m(x) * k.density(0.7, x, y);
                let r = symmetry_residual(&k, &ss, 0.7, x, y);
                assert!(r <= 1e-10 * scale.max(1.0), "{id}: ({x},{y}) residual {r}");
            }
        }
    }
}

#[test]
fn duality_examples() {
    let pair = DualPair::new(&bm_halfline(true)).unwrap();
    assert!(pair.duality_residual(1.0, 0.5, 1.0).unwrap() <= 1e-8);
    let pair = DualPair::new(&besq(3.0)).unwrap();
    assert!(pair.duality_residual(1.0, 1.0, 2.0).unwrap() <= 1e-6);
    // Short times: both sides tend to 1 for x < y.
    let pair = DualPair::new(&bm()).unwrap();
    let lhs = pair.kernel.cdf(1e-6, 0.0, 0.1);
    assert!((lhs - 1.0).abs() < 1e-12);
    assert!(pair.duality_residual(1e-6, 0.0, 0.1).unwrap() < 1e-12);
}

#[test]
fn conjugate_density_examples() {
    let pair = DualPair::new(&bm()).unwrap();
    for x in [-1.0, 0.0, 0.8] {
        for y in [-0.5, 0.4, 1.3] {
            assert!(pair.conjugate_density_residual(0.6, x, y).unwrap() <= 1e-7);
        }
    }
    let pair = DualPair::new(&ou(1.0)).unwrap();
    assert!(pair.conjugate_density_residual(0.5, 0.0, 1.0).unwrap() <= 1e-6);
    let pair = DualPair::new(&besq(3.0)).unwrap();
    assert!(pair.conjugate_density_residual(1.0, 1.0, 2.0).unwrap() <= 1e-6);
    // Stencil that cannot fit next to the endpoint.
    let pair = DualPair::new(&bm_halfline(false)).unwrap();
    assert!(matches!(
        pair.conjugate_density_residual(1.0, 1.0, 1e-12),
        Err(interlace::Error::DegenerateInput(_))
    ));
}

#[test]
fn interval_spectral_matches_images() {
    for (rl, rr) in [(false, false), (true, true), (false, true), (true, false)] {
        let k = IntervalKernel::new(rl, rr);
        for &t in &[0.3, 1.0, 2.0] {
            for &x in &[0.4, 1.5, 2.9] {
                for &y in &[0.2, 1.1, 3.0] {
                    let a = k.density_image(t, x, y);
                    let b = k.density_spectral(t, x, y).unwrap();
                    assert!((a - b).abs() < 1e-8, "({rl},{rr}) t={t}: {a} vs {b}");
                }
            }
        }
    }
}

#[test]
fn spectral_series_match_closed_forms() {
    let mehler = kernel(&ou(1.0)).unwrap();
    let series = SpectralKernel::new(Box::new(OuSpectrum { theta: 1.0 }));
    for &(x, y) in &[(0.0, 0.3), (-1.0, 0.5), (1.2, 1.9)] {
        let a = mehler.density(0.5, x, y);
        let b = series.try_density(0.5, x, y).unwrap();
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
    let cir = kernel(&laguerre(3.0)).unwrap();
    let lag = SpectralKernel::new(Box::new(LaguerreSpectrum { delta: 3.0, kappa: -2.0 }));
    for &(x, y) in &[(0.5, 0.3), (1.0, 2.0), (2.5, 0.8)] {
        let a = cir.density(0.8, x, y);
        let b = lag.try_density(0.8, x, y).unwrap();
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
}

#[test]
fn spectral_truncation_reports_small_times() {
    let s = SpectralKernel::new(Box::new(JacobiSpectrum::new(1.0, 1.0)));
    assert!(matches!(s.try_density(1e-7, 0.5, 0.5), Err(interlace::Error::Truncation { .. })));
}

#[test]
fn analytic_derivatives_match_differences() {
    for id in ["besq:3", "besq:-1", "lag:2.5", "bm_halfline:abs", "ou", "bm_interval:abs,refl"] {
        let spec = catalog(id).unwrap();
        let k = kernel(&spec).unwrap();
        let (x, y, t) = (1.1, 1.6, 0.8);
        let fy = richardson_derivative(|u| k.density(t, x, u), y, 1, spec.l, spec.r).unwrap();
        let fx = richardson_derivative(|u| k.density(t, u, y), x, 1, spec.l, spec.r).unwrap();
        assert!((k.dy(t, x, y, 1).unwrap() - fy).abs() < 1e-8, "{id} dy");
        assert!((k.dx(t, x, y, 1).unwrap() - fx).abs() < 1e-8, "{id} dx");
        let fyy = richardson_derivative(|u| k.density(t, x, u), y, 2, spec.l, spec.r).unwrap();
        assert!((k.dy(t, x, y, 2).unwrap() - fyy).abs() < 1e-6, "{id} dyy");
    }
}

#[test]
fn besq_entrance_density_from_origin() {
    let k = kernel(&besq(3.0)).unwrap();
    // Limit x → 0 of the Bessel form.
    let a = k.density(1.0, 0.0, 1.3);
    let b = k.density(1.0, 1e-12, 1.3);
    assert!((a - b).abs() < 1e-9);
}
