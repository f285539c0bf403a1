use std::f64::consts::PI;
use std::sync::Arc;

use fracspde::kernel::*;
use fracspde::quad::{integrate_points, integrate_points_to_infinity, Tolerance};
use fracspde::specialfn::{stable_density, StableParams};
use fracspde::Error;
use proptest::prelude::*;

fn params(alpha: f64, beta: f64) -> ModelParams {
    ModelParams::new(alpha, beta, 1.0, 1).unwrap()
}

#[test]
fn dual_route_grid() {
    for &alpha in &[1.0, 1.5, 2.0] {
        for &beta in &[0.3, 0.5, 0.7] {
            let p = params(alpha, beta);
            for &t in &[0.1f64, 1.0, 10.0] {
                let a = t.powf(beta / alpha);
                for &k in &[0.0, 0.4, 1.3, 2.7, 5.0] {
                    if k == 0.0 && alpha <= 1.0 {
                        continue; // G_t(0) = ∞ when d ≥ α
                    }
                    let x = [k * a];
                    let s = green_subordination(&p, t, &x).unwrap();
                    let f = green_fourier(&p, t, &x).unwrap();
                    assert!(
                        (s - f).abs() <= 1e-5 * s.max(1.0),
                        "{p} t={t} x={}: {s} vs {f}",
                        x[0]
                    );
                }
            }
        }
    }
}

#[test]
fn dual_route_spec_point() {
    let p = params(2.0, 0.5);
    let s = green_subordination(&p, 1.0, &[0.0]).unwrap();
    let f = green_fourier(&p, 1.0, &[0.0]).unwrap();
    assert!((s - f).abs() < 1e-6);
}

#[test]
fn beta_one_is_the_stable_density() {
    for &alpha in &[0.7, 1.0, 1.5, 2.0] {
        let p = ModelParams::new(alpha, 1.0, 1.3, 1).unwrap();
        let sp = StableParams::new(alpha, 1.3, 1).unwrap();
        for &x in &[0.0, 0.2, 1.0, 4.0] {
            for &t in &[0.5, 2.0] {
                let g = green_fourier(&p, t, &[x]).unwrap();
                let st = stable_density(sp, t, &[x]).unwrap();
                assert!(
                    (g - st).abs() < 1e-8,
                    "alpha={alpha} x={x} t={t}: {g} vs {st}"
                );
            }
        }
    }
    // Gaussian: (4πt)^{-1/2} at the origin
    let p = params(2.0, 1.0);
    let v = green_subordination(&p, 1.0, &[0.0]).unwrap();
    assert!((v - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-10);
}

#[test]
fn isotropy() {
    let p = ModelParams::new(1.6, 0.4, 1.0, 2).unwrap();
    let a = green_fourier(&p, 0.8, &[0.3, -0.4]).unwrap();
    let b = green_fourier(&p, 0.8, &[-0.5, 0.0]).unwrap();
    assert!((a - b).abs() < 1e-12 * a);
}

#[test]
fn normalization() {
    for &(alpha, beta, d) in &[
        (2.0, 0.5, 1),
        (1.5, 0.5, 1),
        (1.2, 0.3, 1),
        (1.8, 0.7, 2),
        (0.9, 0.6, 1),
    ] {
        let p = ModelParams::new(alpha, beta, 0.8, d).unwrap();
        let prof = GreenProfile::new(p).unwrap();
        let t = 1.7;
        let a = p.scale(t);
        let area = fracspde::specialfn::sphere_area(d);
        let f = |r: f64| area * r.powi(d as i32 - 1) * prof.density(t, r);
        let pts: Vec<f64> = [0.0, 1e-4, 1e-2, 0.1, 1.0, 10.0, 100.0]
            .iter()
            .map(|m| m * a)
            .collect();
        let tol = Tolerance::new(1e-12, 1e-10).with_max_intervals(5000);
        let mass = integrate_points_to_infinity(f, &pts, tol).unwrap().value;
        assert!((mass - 1.0).abs() < 1e-6, "{p}: mass {mass}");
    }
}

#[test]
fn cstar_gaussian_oracle() {
    let c = cstar(&params(2.0, 1.0)).unwrap();
    assert!((c - 1.0 / (2.0 * (2.0 * PI).sqrt())).abs() < 1e-6, "{c}");
}

#[test]
fn cstar_needs_square_integrability() {
    let p = ModelParams::new(0.5, 0.5, 1.0, 1).unwrap();
    assert!(matches!(cstar(&p), Err(Error::Hypothesis(_))));
}

#[test]
fn l2_norm_matches_direct_quadrature() {
    let p = params(1.5, 0.5);
    let prof = GreenProfile::new(p).unwrap();
    let mut logs = vec![];
    for &t in &[0.25, 1.0, 4.0] {
        let a = p.scale(t);
        let f = |x: f64| 2.0 * prof.density(t, x).powi(2);
        let pts: Vec<f64> = [0.0, 1e-3, 0.1, 1.0, 10.0].iter().map(|m| m * a).collect();
        let direct = integrate_points_to_infinity(f, &pts, Tolerance::new(1e-14, 1e-10))
            .unwrap()
            .value;
        let l2 = l2_norm(&p, t).unwrap();
        assert!((direct - l2).abs() < 0.01 * l2, "t={t}: {direct} vs {l2}");
        logs.push((t.ln(), l2.ln()));
    }
    let slope = (logs[2].1 - logs[0].1) / (logs[2].0 - logs[0].0);
    assert!((slope + p.theta()).abs() < 1e-3);
    let r = l2_norm(&p, 1.0).unwrap() / l2_norm(&p, 2.0).unwrap();
    assert!((r - 2f64.powf(p.theta())).abs() < 1e-12);
}

#[test]
fn bound_shapes_hold_with_bounded_ratio() {
    let p = params(1.5, 0.5);
    let b = GreenBounds::calibrate(GreenProfile::new(p).unwrap()).unwrap();
    assert!(b.c1 > 0.0 && b.c2 / b.c1 < 50.0, "c1={} c2={}", b.c1, b.c2);
    for i in 0..=20 {
        let t = 10f64.powf(-2.0 + 4.0 * i as f64 / 20.0);
        for j in 0..=40 {
            let x = if j == 0 {
                0.0
            } else {
                10f64.powf(-3.0 + 6.0 * j as f64 / 40.0)
            };
            let g = green_fourier(&p, t, &[x]).unwrap();
            let (lo, hi) = b.bounds(t, &[x]);
            assert!(lo <= g && g <= hi, "t={t} x={x}: {lo} ≤ {g} ≤ {hi}");
        }
    }
    let (lo, hi) = green_bounds(&p, 1.0, &[100.0]).unwrap();
    assert!(lo < hi);
}

#[test]
fn bounds_require_d_below_alpha() {
    let p = ModelParams::new(1.5, 0.5, 1.0, 2).unwrap();
    assert!(matches!(
        green_bounds(&p, 1.0, &[0.0, 0.0]),
        Err(Error::Hypothesis(_))
    ));
}

#[test]
fn smoothing_of_constant_and_ball_data() {
    let p = params(1.5, 0.5);
    let prof = GreenProfile::new(p).unwrap();
    assert_eq!(
        initial_smoothing(&prof, &InitialData::Constant(2.5), 3.0, &[7.0]).unwrap(),
        2.5
    );
    let ball = InitialData::Ball {
        radius: 1.0,
        level: 1.0,
    };
    let mut inside_min = f64::INFINITY;
    for &t in &[0.1, 1.0, 5.0] {
        for i in -30..=30 {
            let x = i as f64 * 0.1;
            let v = initial_smoothing(&prof, &ball, t, &[x]).unwrap();
            assert!((0.0..=1.0).contains(&v));
            if x.abs() < 1.0 && t == 1.0 {
                inside_min = inside_min.min(v);
            }
        }
    }
    assert!(inside_min > 0.1, "{inside_min}");
    // function data agrees with the exact segment mass for an indicator
    let f = InitialData::Function {
        f: Arc::new(|_| 1.0),
        support: 1.0,
    };
    let a = initial_smoothing(&prof, &f, 0.7, &[0.4]).unwrap();
    let b = initial_smoothing(&prof, &ball, 0.7, &[0.4]).unwrap();
    assert!((a - b).abs() < 1e-8, "{a} vs {b}");
}

#[test]
fn interval_eigenpairs() {
    let (r, nu) = (1.3, 0.6);
    let ep = dirichlet_eigenpairs_interval(r, nu, 12).unwrap();
    assert!((ep.mu()[0] - nu * (PI / (2.0 * r)).powi(2)).abs() < 1e-14);
    for i in 0..12 {
        for j in 0..12 {
            let f = |x: f64| ep.phi(i, &[x]) * ep.phi(j, &[x]);
            let pts: Vec<f64> = (0..=24).map(|k| -r + 2.0 * r * k as f64 / 24.0).collect();
            let g = integrate_points(f, &pts, Tolerance::new(1e-13, 1e-12))
                .unwrap()
                .value;
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((g - want).abs() < 1e-8, "({i},{j}): {g}");
        }
    }
    for k in 1..100 {
        let x = -r + 2.0 * r * k as f64 / 100.0;
        assert!(ep.phi(0, &[x]) > 0.0);
    }
}

#[test]
fn killed_kernel_is_dominated_and_decays() {
    let beta = 0.5;
    let ep = dirichlet_eigenpairs_interval(1.0, 1.0, 3000).unwrap();
    let p = params(2.0, beta);
    let prof = GreenProfile::new(p).unwrap();
    for &t in &[0.01, 0.1, 1.0] {
        for i in -4..=4 {
            for j in -4..=4 {
                let (x, y) = (0.24 * i as f64, 0.24 * j as f64);
                let s = killed_green_with_tol(&ep, beta, t, &[x], &[y], 1e-8).unwrap();
                let free = prof.density(t, (x - y).abs());
                assert!(s.value >= -1e-6, "t={t} x={x} y={y}: {}", s.value);
                assert!(
                    s.value <= free + 1e-6,
                    "t={t} x={x} y={y}: {} > {free}",
                    s.value
                );
            }
        }
    }
    let far = killed_green(&ep, beta, 1e8, &[0.0], &[0.0]).unwrap();
    let mid = killed_green(&ep, beta, 1e2, &[0.0], &[0.0]).unwrap();
    assert!(far < mid && far < 1e-3, "{far} {mid}");
}

#[test]
fn killed_kernel_lower_bound_near_diagonal() {
    // calibrate C on small t with |x - y| < t^{β/α}; the ratio must stay
    // bounded away from zero as t shrinks
    let beta = 0.5;
    let ep = dirichlet_eigenpairs_interval(1.0, 1.0, 4000).unwrap();
    let theta = beta / 2.0;
    let mut ratios = vec![];
    for &t in &[1e-3f64, 3e-3, 1e-2, 3e-2] {
        let w = t.powf(beta / 2.0);
        for &f in &[0.0, 0.5, 0.9] {
            let v = killed_green(&ep, beta, t, &[0.0], &[f * w]).unwrap();
            ratios.push(v * t.powf(theta));
        }
    }
    let c = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(c > 0.05, "calibrated C = {c}");
}

fn brute_force_pair(
    prof: &GreenProfile,
    omega: f64,
    tau: f64,
    x1: f64,
    x2: f64,
    r: f64,
    n: usize,
) -> f64 {
    // midpoint rule with the singular diagonal replaced by its cell average
    let h = 2.0 * r / n as f64;
    let ys: Vec<f64> = (0..n).map(|i| -r + h * (i as f64 + 0.5)).collect();
    let g1: Vec<f64> = ys
        .iter()
        .map(|y| prof.density(tau, (x1 - y).abs()) * h)
        .collect();
    let g2: Vec<f64> = ys
        .iter()
        .map(|y| prof.density(tau, (x2 - y).abs()) * h)
        .collect();
    let diag = (h / 2.0).powf(-omega) / (1.0 - omega);
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let k = if i == j {
                diag
            } else {
                (ys[i] - ys[j]).abs().powf(-omega)
            };
            s += g1[i] * k * g2[j];
        }
    }
    s
}

#[test]
fn pair_integral_matches_dense_grid() {
    let p = params(2.0, 0.5);
    let prof = GreenProfile::new(p).unwrap();
    let ck = CorrelationKernel::Riesz { omega: 0.3 };
    let r = 4.0;
    for &(t, s, x1, x2) in &[
        (1.0, 0.0, 0.0, 0.0),
        (2.0, 1.5, 0.3, -0.5),
        (3.0, 0.0, 1.0, 1.5),
    ] {
        let v =
            pair_correlation_integral(&prof, &ck, t, s, &[x1], &[x2], r, PairOptions::default())
                .unwrap();
        let b = brute_force_pair(&prof, 0.3, t - s, x1, x2, r, 4000);
        assert!((v - b).abs() < 0.01 * b, "t={t} s={s}: {v} vs {b}");
    }
}

#[test]
fn pair_integral_constant_correlation_factorizes() {
    let p = params(1.5, 0.5);
    let prof = GreenProfile::new(p).unwrap();
    let kf = 0.7;
    let ck = CorrelationKernel::Tabulated {
        f: Arc::new(move |_, _| kf),
        floor: kf,
        radius: 3.0,
    };
    let r = 3.0;
    let t = (r / 2.0f64).powf(1.5);
    let v = pair_correlation_integral(
        &prof,
        &ck,
        t,
        0.0,
        &[0.2],
        &[-0.4],
        r,
        PairOptions::default(),
    )
    .unwrap();
    let m1 = prof.segment_mass(t, -r - 0.2, r - 0.2);
    let m2 = prof.segment_mass(t, -r + 0.4, r + 0.4);
    assert!((v - kf * m1 * m2).abs() < 1e-7, "{v} vs {}", kf * m1 * m2);
    assert!(v <= kf);
}

#[test]
fn pair_integral_riesz_shape() {
    let p = params(1.5, 0.5);
    let prof = GreenProfile::new(p).unwrap();
    let omega = 0.4;
    let ck = CorrelationKernel::Riesz { omega };
    let mut ratios = vec![];
    for &tau in &[1e-4, 1e-3, 1e-2, 1e-1] {
        let v = pair_correlation_integral(
            &prof,
            &ck,
            tau,
            0.0,
            &[0.0],
            &[0.0],
            2.0,
            PairOptions::default(),
        )
        .unwrap();
        ratios.push(v * tau.powf(omega * p.beta / p.alpha));
    }
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    assert!(lo > 0.0 && hi / lo < 2.0, "{ratios:?}");
}

#[test]
fn pair_integral_in_two_dimensions() {
    // Riesz convolution on the grid agrees with the direct double sum
    let p = ModelParams::new(1.8, 0.5, 1.0, 2).unwrap();
    let prof = GreenProfile::new(p).unwrap();
    let omega = 0.5;
    let opts = PairOptions {
        tol: 1e-8,
        grid: 24,
    };
    let riesz = pair_correlation_integral(
        &prof,
        &CorrelationKernel::Riesz { omega },
        0.5,
        0.0,
        &[0.1, 0.0],
        &[0.0, 0.2],
        2.0,
        opts,
    )
    .unwrap();
    let h = 4.0 / 24.0;
    let diag = riesz_cell_average(omega, h, 2);
    let tab = CorrelationKernel::Tabulated {
        f: Arc::new(move |x, y| {
            let r = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
            if r < 1e-12 {
                diag
            } else {
                r.powf(-omega)
            }
        }),
        floor: 0.1,
        radius: 2.0,
    };
    let direct =
        pair_correlation_integral(&prof, &tab, 0.5, 0.0, &[0.1, 0.0], &[0.0, 0.2], 2.0, opts)
            .unwrap();
    assert!(
        (riesz - direct).abs() < 1e-9 * direct,
        "{riesz} vs {direct}"
    );
}

#[test]
fn pair_integral_preconditions() {
    let p = params(2.0, 0.5);
    let prof = GreenProfile::new(p).unwrap();
    let ck = CorrelationKernel::Riesz { omega: 0.3 };
    let o = PairOptions::default();
    assert!(pair_correlation_integral(&prof, &ck, 1.0, 1.0, &[0.0], &[0.0], 4.0, o).is_err());
    assert!(pair_correlation_integral(&prof, &ck, 5.0, 0.0, &[0.0], &[0.0], 4.0, o).is_err());
    assert!(pair_correlation_integral(&prof, &ck, 1.0, 0.0, &[5.0], &[0.0], 4.0, o).is_err());
    let bad = CorrelationKernel::Riesz { omega: 1.2 };
    assert!(matches!(
        pair_correlation_integral(&prof, &bad, 1.0, 0.0, &[0.0], &[0.0], 4.0, o),
        Err(Error::Hypothesis(_))
    ));
}

#[test]
fn kernel_table_csv() {
    let p = params(1.5, 0.5);
    let prof = GreenProfile::new(p).unwrap();
    let b = GreenBounds::calibrate(prof.clone()).unwrap();
    let mut buf = Vec::new();
    write_kernel_table(&mut buf, &prof, Some(&b), &[1.0, 2.0], &[0.0, 1.0, 5.0]).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,x,G,lower,upper");
    assert_eq!(lines.len(), 7);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn profile_is_even_and_scales(alpha in 1.1f64..2.0, beta in 0.2f64..0.9, t in 0.05f64..20.0, x in 0.0f64..5.0) {
        let p = params(alpha, beta);
        let prof = GreenProfile::new(p).unwrap();
        let a = prof.density_at(t, &[x]);
        let b = prof.density_at(t, &[-x]);
        prop_assert_eq!(a, b);
        // G_t(x) = 2^{βd/α} G_{2t}(2^{β/α} x)
        let c = 2f64.powf(p.theta()) * prof.density(2.0 * t, 2f64.powf(beta / alpha) * x);
        prop_assert!((a - c).abs() <= 1e-9 * a.max(1e-300) + 1e-15);
    }

    #[test]
    fn ball_smoothing_is_bounded_by_level(t in 0.01f64..10.0, x in -3.0f64..3.0, level in 0.0f64..4.0) {
        let prof = GreenProfile::new(params(1.7, 0.6)).unwrap();
        let v = initial_smoothing(&prof, &InitialData::Ball { radius: 1.0, level }, t, &[x]).unwrap();
        prop_assert!(v >= 0.0 && v <= level + 1e-12);
    }
}
