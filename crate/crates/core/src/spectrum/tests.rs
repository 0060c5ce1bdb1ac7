use super::*;
use crate::charmat::{build_char_matrix, char_det};
use crate::exppoly::{CPoly, DataAtom, ExponentKey};
use crate::testutil::problem;

fn delta(name: &str) -> ExpPolynomial {
    char_det(&build_char_matrix(&problem(name))).unwrap()
}

#[test]
fn dirichlet_zeros_are_multiples_of_pi() {
    let s = find_zeros(&delta("heat_dirichlet"), 10.0).unwrap();
    assert_eq!(s.origin_order, 1);
    assert_eq!(s.zeros.len(), 6);
    for z in &s.zeros {
        let k = (z.re / PI).round();
        assert!((1.0..=3.0).contains(&k.abs()));
        assert!((z.value() - C64::new(k * PI, 0.0)).norm() < 1e-8);
        assert_eq!((z.class, z.mult), (ZeroClass::Real, 1));
    }
    assert_eq!(s.winding_count, s.refined_count as i64);
    assert!(s.flagged.is_empty());
    assert!((s.epsilon - 1.0).abs() < 1e-12);
    assert_eq!(s.indices(ZeroClass::Plus).len(), 6);
    assert!(s.indices(ZeroClass::Minus).is_empty());
}

#[test]
fn origin_orders() {
    let order = |name| ExpSum::new(&delta(name)).unwrap().origin_order().unwrap();
    assert_eq!(order("heat_dirichlet"), 1);
    // rho^3 from the prefactors times a bracket vanishing to third order.
    assert_eq!(order("3pseudo"), 6);
}

#[test]
fn spectra_are_closed_under_rotation() {
    for name in [
        "heat_dirichlet",
        "heat_neumann",
        "airy_periodic",
        "3pseudo",
        "one_sided",
        "heat_robin",
    ] {
        let d = delta(name);
        let s = find_zeros(&d, 15.0).unwrap();
        assert!(s.flagged.is_empty(), "{name}");
        assert_eq!(s.winding_count, s.refined_count as i64, "{name}");
        assert!(
            s.rotation_defect(d.order()) < 1e-7,
            "{name}: {}",
            s.rotation_defect(d.order())
        );
        for z in &s.zeros {
            let r = ExpSum::new(&d).unwrap().scaled(z.value());
            assert!(r.value.norm() <= 1e-10 * r.magnitude, "{name}");
        }
    }
}

#[test]
fn even_periodic_zeros_are_double() {
    let s = find_zeros(&delta("heat_periodic"), 15.0).unwrap();
    assert!(!s.zeros.is_empty());
    for z in &s.zeros {
        assert_eq!(z.mult, 2);
        let k = (z.re / (2.0 * PI)).round();
        assert!((z.value() - C64::new(2.0 * PI * k, 0.0)).norm() < 1e-4);
    }
}

#[test]
fn dirichlet_diagram_is_a_segment() {
    let d = indicator_diagram(&delta("heat_dirichlet")).unwrap();
    assert_eq!(d.hull.len(), 2);
    let rays = asymptotic_rays(&d, 2);
    let mut angles: Vec<f64> = rays.iter().map(|r| r.angle).collect();
    angles.sort_by(f64::total_cmp);
    assert!(angles[0].abs() < 1e-12 && (angles[1] - PI).abs() < 1e-12);
}

#[test]
fn coupled_example_diagram_is_a_triangle() {
    let d = indicator_diagram(&delta("3pseudo")).unwrap();
    assert_eq!(d.points.len(), 4);
    assert_eq!(d.hull.len(), 3);
    for v in &d.hull {
        assert!((v.norm() - 1.0).abs() < 1e-12);
    }
    let rays = asymptotic_rays(&d, 3);
    assert!(rays.iter().all(|r| r.width == 0.0 && r.points == 2));
}

#[test]
fn ray_exponents_tie_for_the_maximum() {
    for name in [
        "heat_dirichlet",
        "3pseudo",
        "one_sided",
        "fourth_periodic",
        "heat_robin",
    ] {
        let d = delta(name);
        let diagram = indicator_diagram(&d).unwrap();
        for (side, ray) in diagram
            .sides
            .iter()
            .zip(asymptotic_rays(&diagram, d.order()))
        {
            let growth = |p: C64| (C64::from_polar(1.0, ray.angle) * p.conj()).im;
            let best = diagram
                .points
                .iter()
                .map(|p| growth(*p))
                .fold(f64::NEG_INFINITY, f64::max);
            for &i in &side.members {
                assert!((growth(diagram.points[i]) - best).abs() < 1e-9, "{name}");
            }
        }
    }
}

#[test]
fn one_sided_zeros_lie_on_rays() {
    // Equal coefficient moduli on every hull side put the zeros exactly on
    // the rays, so there is no trend to observe.
    let s = find_zeros(&delta("one_sided"), 40.0).unwrap();
    let q = s.ray_deviation_by_quartile();
    assert_eq!(q.len(), 4);
    assert!(q.iter().all(|d| *d < 1e-12), "{q:?}");
}

#[test]
fn symmetry_check_and_negative_control() {
    for name in ["heat_dirichlet", "3pseudo", "fourth_periodic", "one_sided"] {
        assert!(
            verify_symmetry(&delta(name), 5.0, 1).unwrap() <= 1e-10,
            "{name}"
        );
    }
    let d = delta("3pseudo");
    let bump = ExpPolynomial::term(
        ExponentKey::single(3, 0),
        DataAtom::None,
        CPoly::constant(C64::new(0.3, 0.0)),
    );
    assert!(verify_symmetry(&(&d + &bump), 5.0, 1).unwrap() > 1e-3);
}

#[test]
fn polynomial_symmetry_reduces_to_coefficients() {
    // c0 c1 c2 for n = 3 is a constant times rho^3, odd under rotation only by
    // omega^3 = 1, so it passes.
    let p = ExpPolynomial::from_poly(3, CPoly::monomial(C64::new(1.0, 0.0), 3));
    assert!(verify_symmetry(&p, 5.0, 2).unwrap() < 1e-12);
    let q = ExpPolynomial::from_poly(3, CPoly::monomial(C64::new(1.0, 0.0), 1));
    assert!(verify_symmetry(&q, 5.0, 2).unwrap() > 1e-3);
}

#[test]
fn zero_finder_rejects_atoms() {
    let a = ExpPolynomial::atom(2, DataAtom::Q0(0));
    assert_eq!(find_zeros(&a, 1.0).unwrap_err(), SpectrumError::HasAtoms);
}

#[test]
fn skewed_coupled_zeros_approach_rays() {
    let s = find_zeros(&delta("coupled_skew"), 40.0).unwrap();
    let q = s.ray_deviation_by_quartile();
    assert!(q[0] > 1e-3, "{q:?}");
    assert!(q[3] < 0.5 * q[0], "{q:?}");
    assert!(q.windows(2).all(|w| w[1] < w[0]), "{q:?}");
}
