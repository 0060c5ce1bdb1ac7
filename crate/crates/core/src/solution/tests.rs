use super::*;
use crate::ibvp::FunctionSpec;
use crate::testutil::{problem, random_c64, rng};
use rand::Rng;

fn dirichlet_exact(x: f64, t: f64) -> C64 {
    C64::new((-PI * PI * t).exp() * (PI * x).sin(), 0.0)
}

#[test]
fn sine_transform_matches_antiderivative() {
    let de = DataEvaluator::new(problem("heat_dirichlet").spec());
    let mut r = rng(3);
    for _ in 0..20 {
        let rho = random_c64(&mut r, 6.0);
        let expect = PI * (1.0 + (-C64::i() * rho).exp()) / (PI * PI - rho * rho);
        assert!((de.transform_q0(rho) - expect).norm() < 1e-12 * (1.0 + expect.norm()));
    }
}

#[test]
fn time_transforms_are_rotation_invariant() {
    let p = problem("heat_dirichlet_forced");
    let de = DataEvaluator::new(p.spec());
    let w = omega_pow(2, 1);
    let mut r = rng(4);
    for _ in 0..20 {
        let rho = random_c64(&mut r, 2.0);
        for j in 1..=2 {
            let a = de.transform_h(j, rho);
            assert!((a - de.transform_h(j, w * rho)).norm() < 1e-12 * (1.0 + a.norm()));
        }
    }
    let zero = DataEvaluator::new(problem("heat_dirichlet").spec());
    assert_eq!(zero.transform_h(1, C64::new(1.3, 0.2)), C64::new(0.0, 0.0));
}

#[test]
fn dirichlet_series_matches_sine_mode() {
    let s = Solver::new(&problem("heat_dirichlet"), 0.05).unwrap();
    for t in [0.05, 0.1, 0.5, 1.0] {
        for x in [0.0, 0.2, 0.5, 0.9] {
            let e = s.series(x, t, 0).unwrap();
            assert!(
                (e.value - dirichlet_exact(x, t)).norm() < 1e-6,
                "x={x} t={t} {}",
                e.value
            );
        }
    }
}

#[test]
fn dirichlet_integral_matches_sine_mode() {
    let s = Solver::new(&problem("heat_dirichlet"), 0.05).unwrap();
    for t in [0.05, 0.1, 0.5, 1.0] {
        for x in [0.0, 0.2, 0.5, 0.9] {
            let e = s.integral(x, t, 0).unwrap();
            assert!(
                (e.value - dirichlet_exact(x, t)).norm() < 1e-6,
                "x={x} t={t} {}",
                e.value
            );
        }
    }
}

#[test]
fn series_and_integral_agree() {
    for name in [
        "heat_neumann",
        "heat_robin",
        "airy_periodic",
        "heat_dirichlet_forced",
    ] {
        let s = Solver::new(&problem(name), 0.05).unwrap();
        let mut r = rng(9);
        for _ in 0..5 {
            let x = r.gen_range(0.05..0.95);
            let t = r.gen_range(0.05..1.0);
            let a = s.series(x, t, 0).unwrap();
            let b = s.integral(x, t, 0).unwrap();
            assert!(
                (a.value - b.value).norm() < 1e-6,
                "{name} x={x} t={t}: {} vs {}",
                a.value,
                b.value
            );
        }
    }
}

fn exp_fn(coef: f64, rate: f64) -> FunctionSpec {
    FunctionSpec::Exp(vec![crate::ibvp::ExpTerm {
        coef: C64::new(coef, 0.0),
        rate: C64::new(rate, 0.0),
    }])
}

fn sine_fn(amplitude: f64) -> FunctionSpec {
    FunctionSpec::Trig(vec![crate::ibvp::TrigTerm {
        freq: PI,
        cos: C64::new(0.0, 0.0),
        sin: C64::new(amplitude, 0.0),
    }])
}

/// Exact traces of `exp(-pi^2 t) sin(pi x)`.
fn dirichlet_traces() -> BoundaryTraces {
    let decay = -PI * PI;
    BoundaryTraces {
        left: vec![FunctionSpec::zero(), exp_fn(PI, decay)],
        right: vec![FunctionSpec::zero(), exp_fn(-PI, decay)],
    }
}

#[test]
fn neumann_series_matches_cosine_mode() {
    let s = Solver::new(&problem("heat_neumann"), 0.05).unwrap();
    for t in [0.05, 0.3, 1.0] {
        for x in [0.0, 0.3, 0.7, 1.0] {
            let e = s.series(x, t, 0).unwrap();
            let exact = (-PI * PI * t).exp() * (PI * x).cos();
            assert!((e.value - exact).norm() < 1e-6, "x={x} t={t} {}", e.value);
        }
    }
}

#[test]
fn third_order_periodic_mode_in_both_directions() {
    for sign in [1.0, -1.0] {
        let mut spec = crate::testutil::spec("airy_periodic");
        spec.direction = C64::new(0.0, sign);
        let p = crate::ibvp::validate(&spec).unwrap();
        let s = Solver::new(&p, 0.05).unwrap();
        let k = 2.0 * PI;
        for t in [0.05, 0.5] {
            for x in [0.1, 0.6] {
                let exact = (-spec.direction * k.powi(3) * t + C64::i() * k * x).exp();
                let e = s.series(x, t, 0).unwrap();
                assert!(
                    (e.value - exact).norm() < 1e-6,
                    "a={} x={x} t={t} {}",
                    spec.direction,
                    e.value
                );
                let i = s.integral(x, t, 0).unwrap();
                assert!(
                    (i.value - exact).norm() < 1e-6,
                    "a={} x={x} t={t} {}",
                    spec.direction,
                    i.value
                );
            }
        }
    }
}

#[test]
fn one_sided_problem_has_only_the_integral_form() {
    let s = Solver::new(&problem("one_sided"), 0.1).unwrap();
    match s.series(0.4, 0.2, 0) {
        Err(SolveError::SeriesRefused { which, status }) => {
            assert_eq!((which, status), ("reversed problem", Status::IllPosed));
        }
        other => panic!("expected refusal, got {other:?}"),
    }
    let v = s.integral(0.4, 0.2, 0).unwrap();
    assert!(v.value.norm().is_finite() && v.value.norm() < 10.0);
    assert!(v.error < 1e-6);
}

#[test]
fn forced_dirichlet_matches_lifted_sine_series() {
    // Lifting by (1-x) h1 + x h2 and summing the sine series of the
    // remainder's Duhamel integral, 4000 modes.
    let s = Solver::new(&problem("heat_dirichlet_forced"), 0.05).unwrap();
    let (x, t) = (0.6320217761519603, 0.08457413124087483);
    let reference = 0.3851566192060323;
    for v in [s.series(x, t, 0).unwrap(), s.integral(x, t, 0).unwrap()] {
        assert!(
            (v.value.re - reference).abs() < 1e-6 && v.value.im.abs() < 1e-9,
            "{}",
            v.value
        );
    }
}

#[test]
fn dirichlet_residues_carry_the_single_mode() {
    let s = Solver::new(&problem("heat_dirichlet"), 0.1).unwrap();
    let (x, t) = (0.3, 0.1);
    let mut mode = C64::new(0.0, 0.0);
    for (k, z) in s.spectrum().zeros.iter().enumerate() {
        let r = C64::i() * s.residue_at(k, Part::Initial, Half::Plus, x, t, 0).unwrap();
        if (z.re.abs() - PI).abs() < 1e-6 {
            mode += r;
        } else {
            assert!(r.norm() < 1e-10, "{} {}", z.re, r);
        }
    }
    assert!((mode - dirichlet_exact(x, t)).norm() < 1e-10);
}

#[test]
fn residues_match_circle_quadrature() {
    for name in ["heat_robin", "heat_dirichlet_forced", "airy_periodic"] {
        let s = Solver::new(&problem(name), 0.1).unwrap();
        for k in 0..s.spectrum().zeros.len().min(6) {
            let sigma = s.spectrum().zeros[k].value();
            for half in [Half::Plus, Half::Minus] {
                let direct = s.residue_at(k, Part::All, half, 0.4, 0.3, 0).unwrap();
                let quad = circle_residue(
                    |rho| s.integrand(Part::All, half, rho, 0.4, 0.3, 0),
                    sigma,
                    0.1,
                    64,
                );
                assert!(
                    (direct - quad).norm() < 1e-8 * (1.0 + direct.norm()),
                    "{name} {k}: {direct} {quad}"
                );
            }
        }
    }
}

#[test]
fn boundary_data_combination() {
    let p = problem("heat_dirichlet_forced");
    let cs = cramer_system(&p).unwrap();
    let de = DataEvaluator::new(p.spec());
    let c0 = crate::charmat::c_poly(2, C64::new(1.0, 0.0), 0);
    let mut r = rng(11);
    for _ in 0..50 {
        let rho = random_c64(&mut r, 4.0);
        let expect = c0.eval(rho)
            * (de.transform_h(1, rho) - (-C64::i() * rho).exp() * de.transform_h(2, rho));
        assert!((h_of_rho(&cs, &de, rho) - expect).norm() < 1e-12 * (1.0 + expect.norm()));
        assert!(data_identity_residual(&cs, &de, rho) < 1e-9);
    }
    let hom = problem("heat_dirichlet");
    let cs = cramer_system(&hom).unwrap();
    assert_eq!(
        h_of_rho(&cs, &DataEvaluator::new(hom.spec()), C64::new(0.7, 0.1)),
        C64::new(0.0, 0.0)
    );
}

#[test]
fn global_relation_holds_for_exact_traces() {
    let spec = crate::testutil::spec("heat_dirichlet");
    let final_profile = sine_fn((-PI * PI).exp());
    let qt = |rho: C64| final_profile.exp_moment(-C64::i() * rho, 1.0);
    let mut r = rng(12);
    let samples: Vec<C64> = (0..40).map(|_| random_c64(&mut r, 5.0)).collect();
    let exact = global_relation_residual(&spec, &dirichlet_traces(), &qt, &samples);
    assert!(exact < 1e-10, "{exact}");
    let perturbed =
        global_relation_residual(&spec, &dirichlet_traces(), &|rho| 1.01 * qt(rho), &samples);
    // The final-time profile is small, so the defect is small in absolute
    // terms but far above round-off.
    assert!(perturbed > 1e-7 && perturbed > 1e4 * exact, "{perturbed}");

    let mut zero = spec.clone();
    zero.initial = FunctionSpec::zero();
    let none = BoundaryTraces {
        left: vec![FunctionSpec::zero(); 2],
        right: vec![FunctionSpec::zero(); 2],
    };
    assert_eq!(
        global_relation_residual(&zero, &none, &|_| C64::new(0.0, 0.0), &samples),
        0.0
    );
}

#[test]
fn boundary_values_recovered_from_integral() {
    let s = Solver::new(&problem("heat_dirichlet"), 0.1).unwrap();
    for t in [0.1, 0.4, 1.0] {
        let (f0, g0) = s.recover_boundary_functions(0, t).unwrap();
        assert!(f0.norm() < 1e-4 && g0.norm() < 1e-4);
        let (f1, g1) = s.recover_boundary_functions(1, t).unwrap();
        let slope = PI * (-PI * PI * t).exp();
        assert!(
            (f1 - slope).norm() < 1e-4 && (g1 + slope).norm() < 1e-4,
            "{f1} {g1}"
        );
    }
}

#[test]
fn final_time_numerators_are_entire() {
    // A short horizon keeps exp(a rho^n T) eta within reach of double
    // precision at the first few zeros.
    let mut spec = crate::testutil::spec("heat_dirichlet");
    spec.final_time = 0.1;
    let p = crate::ibvp::validate(&spec).unwrap();
    let amplitude = (-PI * PI * 0.1).exp();
    let s = Solver::new(&p, 0.05)
        .unwrap()
        .with_final_transform(Box::new(move |rho| {
            sine_fn(amplitude).exp_moment(-C64::i() * rho, 1.0)
        }));
    for k in 0..5 {
        let d = entire_defect(&s, k, 0.1, 64).unwrap();
        assert!(d.norm() < 1e-8, "{k}: {d}");
    }
    let wrong = Solver::new(&p, 0.05)
        .unwrap()
        .with_final_transform(Box::new(move |rho| {
            sine_fn(1.01 * amplitude).exp_moment(-C64::i() * rho, 1.0)
        }));
    assert!(entire_defect(&wrong, 0, 0.1, 64).unwrap().norm() > 1e-4);
    let without = Solver::new(&problem("heat_dirichlet"), 0.5).unwrap();
    assert!(matches!(
        entire_defect(&without, 0, 0.1, 64),
        Err(SolveError::MissingFinalTime)
    ));
}

#[test]
fn small_time_series_returns_initial_profile() {
    let p = problem("heat_robin");
    let s = Solver::new(&p, 1e-3).unwrap();
    let v = s.series(0.5, 1e-3, 0).unwrap();
    let q0 = p.spec().initial.eval(0.5);
    assert!((v.value - q0).norm() < 1e-3, "{} vs {q0}", v.value);
}

#[test]
fn points_outside_the_domain_are_rejected() {
    let s = Solver::new(&problem("heat_dirichlet"), 0.1).unwrap();
    assert!(matches!(
        s.series(1.5, 0.2, 0),
        Err(SolveError::Position(_))
    ));
    assert!(matches!(s.integral(0.5, 2.0, 0), Err(SolveError::Time(_))));
    assert!(matches!(s.series(0.5, 0.0, 0), Err(SolveError::Time(_))));
}

#[test]
fn double_zeros_use_circle_residues() {
    let s = Solver::new(&problem("heat_periodic"), 0.1).unwrap();
    assert!(s.spectrum().has_multiple());
    let k = 2.0 * PI;
    for (x, t) in [(0.2, 0.1), (0.7, 0.3)] {
        let mode = (C64::i() * k * x - k * k * t).exp();
        let series = s.series(x, t, 0).unwrap().value;
        let integral = s.integral(x, t, 0).unwrap().value;
        assert!((series - mode).norm() < 1e-6, "{series} vs {mode}");
        assert!((integral - mode).norm() < 1e-6, "{integral} vs {mode}");
    }
}

#[test]
fn cancelling_residues_are_refused() {
    // Zeros of this coupled problem sit just inside the growth sectors,
    // where the residue numerators cannot be resolved in double precision.
    let s = Solver::new(&problem("coupled_skew"), 0.5).unwrap();
    assert!(matches!(
        s.integral(0.5, 0.5, 0),
        Err(SolveError::Cancellation { .. })
    ));
    assert!(matches!(
        s.series(0.5, 0.5, 0),
        Err(SolveError::Cancellation { .. })
    ));
}
