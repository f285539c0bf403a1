use fracspde::renewal::*;
use fracspde::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn numerical_blowup(rp: &RenewalProblem, t_max: f64) -> f64 {
    volterra_solve(rp, t_max / 1000.0, t_max)
        .unwrap()
        .blowup
        .expect("blow-up")
        .time
}

#[test]
fn bounded_formula_examples() {
    let rp = RenewalProblem::new(2.0, 1.0, 1.0, 0.37)
        .unwrap()
        .with_horizon(1.0)
        .unwrap();
    assert_eq!(blowup_time_bounded(&rp).unwrap(), 0.5);
    let rp = RenewalProblem::new(1.0, 1.0, 1.0, 0.0)
        .unwrap()
        .with_horizon(1.0)
        .unwrap();
    assert_eq!(blowup_time_bounded(&rp).unwrap(), 1.0);
    let t = numerical_blowup(&rp, 1.2);
    assert!((t - 1.0).abs() < 0.01, "{t}");
    // larger C, earlier blow-up
    let mut prev = f64::INFINITY;
    for c in [1.0, 2.0, 5.0, 50.0, 1e3] {
        let rp = RenewalProblem::new(c, 1.0, 0.5, 0.2)
            .unwrap()
            .with_horizon(3.0)
            .unwrap();
        let t = blowup_time_bounded(&rp).unwrap();
        assert!(t < prev);
        prev = t;
    }
    assert!(prev < 0.1);
    let rp = RenewalProblem::new(1.0, 2.0, 1.0, 0.5)
        .unwrap()
        .with_horizon(4.0)
        .unwrap();
    let c0 = minimal_initial_level(&rp, 0.25).unwrap();
    let at = RenewalProblem { c: c0, ..rp };
    assert!((blowup_time_bounded(&at).unwrap() - 0.25).abs() < 1e-12);
}

#[test]
fn unbounded_formula_examples() {
    let rp = RenewalProblem::new(1.0, 1.0, 1.0, 0.0).unwrap();
    assert_eq!(
        blowup_time_unbounded(&rp, UnboundedVariant::Constant).unwrap(),
        2.0
    );
    let rp = RenewalProblem::new(1.0, 1.0, 1.0, 0.25).unwrap();
    let t = blowup_time_unbounded(&rp, UnboundedVariant::Decaying).unwrap();
    assert!((t - 0.25).abs() < 1e-15);
    let rp = RenewalProblem::new(1.0, 1.0, 1.0, 0.6).unwrap();
    assert!(matches!(
        blowup_time_unbounded(&rp, UnboundedVariant::Constant),
        Err(Error::Hypothesis(_))
    ));
    // exponent reduction keeps h^{1+γ} ≥ C^{γ-γ₀} h^{1+γ₀} and yields a time
    let red = reduce_exponent(&rp, 0.3).unwrap();
    assert!(red.is_subcritical());
    assert_eq!(red.d, 1.0);
    let t = blowup_time_unbounded_reduced(&rp, UnboundedVariant::Constant).unwrap();
    assert!(t.is_finite() && t > 0.0);
    let hot = RenewalProblem::new(3.0, 1.0, 2.0, 0.5).unwrap();
    let red = reduce_exponent(&hot, 0.5).unwrap();
    assert!((red.d - 3.0f64.powf(1.5)).abs() < 1e-12);
    let never = RenewalProblem::new(1.0, 1.0, 1.0, 1.2).unwrap();
    assert!(blowup_time_unbounded_reduced(&never, UnboundedVariant::Constant).is_err());
}

#[test]
fn theta_zero_matches_ode() {
    for &(c, d) in &[(1.0, 1.0), (2.0, 0.5), (0.5, 3.0), (4.0, 0.1)] {
        let rp = RenewalProblem::new(c, d, 1.0, 0.0).unwrap();
        let exact = 1.0 / (c * d);
        let t = numerical_blowup(&rp, 1.3 * exact);
        assert!(
            (t - exact).abs() < 0.01 * exact,
            "C={c} D={d}: {t} vs {exact}"
        );
    }
}

#[test]
fn drift_formula_matches_ode() {
    assert_eq!(blowup_time_drift(1.0, 1.0).unwrap(), 1.0);
    assert_eq!(blowup_time_drift(2.0, 1.0).unwrap(), 0.5);
    for &(kappa, eta) in &[(1.0, 1.0), (2.0, 1.0), (1.5, 0.5), (0.8, 2.0)] {
        let want = blowup_time_drift(kappa, eta).unwrap();
        let rp = RenewalProblem::new(kappa, 1.0, eta, 0.0).unwrap();
        let t = numerical_blowup(&rp, 1.3 * want);
        assert!(
            (t - want).abs() < 0.01 * want,
            "κ={kappa} η={eta}: {t} vs {want}"
        );
    }
}

#[test]
fn sampled_problems_respect_the_ordering() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut n = 0;
    while n < 20 {
        let gamma = rng.gen_range(0.2..2.0);
        let theta = rng.gen_range(0.0..0.95) / (1.0 + gamma);
        let rp = RenewalProblem::new(
            rng.gen_range(0.5..3.0),
            rng.gen_range(0.3..3.0),
            gamma,
            theta,
        )
        .unwrap();
        let t0 = blowup_time_unbounded(&rp, UnboundedVariant::Constant).unwrap();
        let sol = volterra_solve(&rp, 1.05 * t0 / 1000.0, 1.05 * t0).unwrap();
        let t = sol
            .blowup
            .unwrap_or_else(|| panic!("{rp:?}: no blow-up before {}", 1.05 * t0))
            .time;
        let cert = BlowupCertificate::new(rp, t0, Some(t));
        assert!(cert.ordering_holds, "{rp:?}: numerical {t} > formula {t0}");
        let bounded = blowup_time_bounded(&rp.with_horizon(t0).unwrap()).unwrap();
        if bounded <= t0 {
            assert!(
                t <= bounded * (1.0 + 1e-3),
                "{rp:?}: {t} > bounded {bounded}"
            );
        }
        n += 1;
    }
}

#[test]
fn singular_kernel_blows_up_before_the_formula() {
    let rp = RenewalProblem::new(1.0, 1.0, 1.0, 0.5).unwrap();
    // (1+γ)θ = 1: use the reduced formula as the comparison time
    let t0 = blowup_time_unbounded_reduced(&rp, UnboundedVariant::Constant).unwrap();
    let t = numerical_blowup(&rp, t0);
    assert!(t <= t0, "{t} vs {t0}");
}

#[test]
fn grid_convergence_and_monotone_trajectory() {
    let rp = RenewalProblem::new(1.0, 1.0, 1.0, 0.3).unwrap();
    let sol = volterra_solve(&rp, 0.002, 2.0).unwrap();
    let b = sol.blowup.unwrap();
    let n = b.levels.len();
    let change = (b.levels[n - 1] - b.levels[n - 2]).abs() / b.levels[n - 1];
    assert!(change < 0.02, "{:?}", b.levels);
    let v = &sol.trajectory.values;
    assert!(v[0] == 1.0 && v.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn no_blowup_returns_the_trajectory() {
    let rp = RenewalProblem::new(0.1, 0.1, 1.0, 0.2).unwrap();
    let sol = volterra_solve(&rp, 0.01, 1.0).unwrap();
    assert!(sol.blowup.is_none());
    assert_eq!(sol.trajectory.values.len(), 101);
    let mut buf = vec![];
    write_trajectory(&mut buf, &sol.trajectory).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with("t,h\n0,1e-1\n"));
}

#[test]
fn comparison_principle() {
    let base = RenewalProblem::new(1.0, 1.0, 1.0, 0.4).unwrap();
    // a window ending before either blow-up, so both use the requested step
    let lo = volterra_solve(&base, 1e-4, 0.05).unwrap().trajectory.values;
    for bigger in [
        RenewalProblem { c: 1.2, ..base },
        RenewalProblem { d: 1.3, ..base },
    ] {
        let hi = volterra_solve(&bigger, 1e-4, 0.05)
            .unwrap()
            .trajectory
            .values;
        assert_eq!(lo.len(), hi.len());
        for (a, b) in lo.iter().zip(&hi) {
            assert!(b >= a);
        }
    }
}

#[test]
fn laplace_variant() {
    let rp = RenewalProblem::new(1.0, 1.0, 1.0, 1.0).unwrap();
    let v = laplace_renewal_check(&rp, 0.01, 10.0).unwrap();
    assert!(
        v.time < 10.0 && (v.time - v.coarse).abs() < 0.02 * v.time,
        "{v:?}"
    );
    let mut prev = f64::INFINITY;
    for c in [0.5, 1.0, 2.0, 4.0] {
        let t = laplace_renewal_check(&RenewalProblem { c, ..rp }, 0.01, 10.0)
            .unwrap()
            .time;
        assert!(t <= prev);
        prev = t;
    }
    // θ → 0 reduces to the constant-kernel solve
    let flat = RenewalProblem::new(1.0, 1.0, 1.0, 1e-9).unwrap();
    let a = laplace_renewal_check(&flat, 0.001, 2.0).unwrap().time;
    let b = numerical_blowup(&RenewalProblem { theta: 0.0, ..flat }, 2.0);
    assert!((a - b).abs() < 0.01 * b, "{a} vs {b}");
    let weak = RenewalProblem::new(1e-3, 1e-3, 1.0, 0.5).unwrap();
    assert!(matches!(
        laplace_renewal_check(&weak, 0.05, 1.0),
        Err(Error::HorizonExhausted { .. })
    ));
}

#[test]
fn dirichlet_formula_and_numerics() {
    let dr = DirichletRenewal::new(1.0, 1.0, 1.0, 0.25).unwrap();
    assert_eq!(dr.regime, DirichletRegime::Sub);
    assert_eq!(
        dirichlet_blowup_time(&dr),
        DirichletOutcome::ClosedForm(2.25)
    );
    // critical and super-critical cases against P^{-η} = C₃^{-η} - ηC₄∫_1^t s^{-q} ds
    let crit = DirichletRenewal::new(1.0, 1.0, 1.0, 0.5).unwrap();
    assert_eq!(crit.regime, DirichletRegime::Critical);
    let t = dirichlet_blowup_time(&crit).time().unwrap();
    assert!((t - 1f64.exp()).abs() < 1e-4 * t, "{t}");
    let sup = DirichletRenewal::new(2.0, 1.0, 1.0, 0.75).unwrap();
    let q: f64 = 1.5;
    let exact = (1.0 - (q - 1.0) * 0.5).powf(-1.0 / (q - 1.0));
    let t = dirichlet_blowup_time(&sup).time().unwrap();
    assert!((t - exact).abs() < 1e-4 * exact, "{t} vs {exact}");
    let quiet = DirichletRenewal::new(0.1, 0.1, 1.0, 0.9).unwrap();
    assert!(matches!(
        dirichlet_blowup_time(&quiet),
        DirichletOutcome::NoBlowup { .. }
    ));
    // continuity across β(1+η) = 1 and monotonicity in C₃
    let below = dirichlet_blowup_time(&DirichletRenewal::new(1.0, 1.0, 1.0, 0.5 - 1e-7).unwrap())
        .time()
        .unwrap();
    assert!((below - 1f64.exp()).abs() < 1e-4);
    let mut prev = f64::INFINITY;
    for c3 in [0.5, 1.0, 2.0, 8.0] {
        let t = dirichlet_blowup_time(&DirichletRenewal::new(c3, 1.0, 1.0, 0.25).unwrap())
            .time()
            .unwrap();
        assert!(t < prev);
        prev = t;
    }
}

#[test]
fn certificate_serializes() {
    let rp = RenewalProblem::new(1.0, 1.0, 1.0, 0.0).unwrap();
    let cert = BlowupCertificate::new(rp, 2.0, Some(1.0));
    let text = cert.to_toml().unwrap();
    assert!(
        text.contains("formula_time = 2.0") && text.contains("ordering_holds = true"),
        "{text}"
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn formulas_are_monotone_in_c(c in 0.1f64..10.0, d in 0.1f64..5.0, gamma in 0.1f64..3.0, frac in 0.0f64..0.99) {
        let theta = frac / (1.0 + gamma);
        let a = RenewalProblem::new(c, d, gamma, theta).unwrap();
        let b = RenewalProblem { c: 1.5 * c, ..a };
        for v in [UnboundedVariant::Constant, UnboundedVariant::Decaying] {
            prop_assert!(blowup_time_unbounded(&b, v).unwrap() <= blowup_time_unbounded(&a, v).unwrap());
        }
        let (ah, bh) = (a.with_horizon(2.0).unwrap(), b.with_horizon(2.0).unwrap());
        prop_assert!(blowup_time_bounded(&bh).unwrap() <= blowup_time_bounded(&ah).unwrap());
    }
}
