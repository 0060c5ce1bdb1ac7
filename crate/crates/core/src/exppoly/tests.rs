use super::*;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn sample(n: usize) -> ExpPolynomial {
    let a =
        ExpPolynomial::exp_root(n, 0).mul_poly(&CPoly::from_coeffs(vec![c(1.0, 0.0), c(0.0, 2.0)]));
    let b = ExpPolynomial::exp_root(n, 1).scale(c(-0.5, 0.25));
    &(&a + &b) + &ExpPolynomial::constant(n, c(3.0, 0.0))
}

#[test]
fn roots_of_unity_sum_to_zero() {
    for n in 2..7 {
        let full = ExponentKey::new(n, (1 << n) - 1);
        assert!(full.s().norm() < 1e-14);
    }
    assert_eq!(omega_pow(4, 1), c(6.123233995736766e-17, 1.0));
    assert_eq!(omega_pow(3, -3), c(1.0, 0.0));
}

#[test]
fn key_order_is_lexicographic() {
    let n = 3;
    let mut keys: Vec<ExponentKey> = (0..8).map(|m| ExponentKey::new(n, m)).collect();
    keys.sort();
    let shown: Vec<String> = keys.iter().map(|k| k.to_string()).collect();
    assert_eq!(
        shown,
        ["{}", "{0}", "{0,1}", "{0,1,2}", "{0,2}", "{1}", "{1,2}", "{2}"]
    );
}

#[test]
fn repeated_index_is_an_error() {
    let e = ExpPolynomial::exp_root(3, 1);
    assert_eq!(
        e.try_mul(&e),
        Err(ExpPolyError::ExponentCollision { index: 1 })
    );
    let q = ExpPolynomial::atom(3, DataAtom::Q0(0));
    assert!(matches!(
        q.try_mul(&q),
        Err(ExpPolyError::AtomCollision(..))
    ));
}

#[test]
fn subtraction_cancels_exactly() {
    let p = sample(3);
    assert!((&p - &p).is_zero());
}

#[test]
fn det_of_diagonal_is_product() {
    let n = 3;
    let mut m = vec![vec![ExpPolynomial::zero(n); n]; n];
    for k in 0..n {
        m[k][k] = ExpPolynomial::exp_root(n, k).scale(c(k as f64 + 1.0, 0.0));
    }
    let d = ExpPolynomial::det(&m).unwrap();
    assert_eq!(d.len(), 1);
    let (key, _, poly) = d.terms().next().unwrap();
    assert_eq!(key.mask(), 0b111);
    assert!((poly.coeff(0) - c(6.0, 0.0)).norm() < 1e-14);
}

#[test]
fn det_two_by_two_numeric() {
    let n = 2;
    let row = |k: usize| {
        vec![
            ExpPolynomial::constant(n, c(1.0, 0.0)),
            ExpPolynomial::exp_root(n, k),
        ]
    };
    let m = vec![row(0), row(1)];
    let d = ExpPolynomial::det(&m).unwrap();
    let rho = c(0.7, -0.2);
    let expect = (-C64::i() * omega_pow(2, 1) * rho).exp() - (-C64::i() * rho).exp();
    assert!((d.evaluate(rho, None).unwrap() - expect).norm() < 1e-13);
}

#[test]
fn missing_evaluator_reported() {
    let q = ExpPolynomial::atom(2, DataAtom::H(1));
    assert_eq!(
        q.evaluate(c(1.0, 0.0), None),
        Err(ExpPolyError::MissingEvaluator(DataAtom::H(1)))
    );
}

#[test]
fn derivative_matches_finite_difference() {
    let p = sample(4);
    let d = p.derivative();
    let rho = c(0.4, 0.9);
    let h = 1e-6;
    let fd = (p.evaluate(rho + h, None).unwrap() - p.evaluate(rho - h, None).unwrap()) / (2.0 * h);
    assert!((fd - d.evaluate(rho, None).unwrap()).norm() < 1e-7);
}

#[test]
fn classes_merge_equal_exponents() {
    // For n = 2 the empty set and {0,1} share s = 0.
    let n = 2;
    let a = ExpPolynomial::constant(n, c(1.0, 0.0));
    let b = ExpPolynomial::term(
        ExponentKey::new(n, 0b11),
        DataAtom::None,
        CPoly::constant(c(-1.0, 0.0)),
    );
    let sum = &a + &b;
    assert_eq!(sum.len(), 2);
    assert!(sum.classes().is_empty());
}

#[test]
fn dominant_exponent_on_upper_half_plane() {
    // exp(-i rho) vs exp(i rho) for n = 2: on (0, pi) Im(e^{i phi} s) is
    // largest for s = 1.
    let n = 2;
    let p = &ExpPolynomial::exp_root(n, 0) + &ExpPolynomial::exp_root(n, 1);
    let dom = p.dominant_exponent(0.0, std::f64::consts::PI).unwrap();
    assert_eq!(dom.len(), 1);
    assert_eq!(dom[0].key, ExponentKey::single(n, 0));
    assert!(dom[0].strict);
    let both = p.dominant_exponent(-1.0, 1.0).unwrap();
    assert_eq!(both.len(), 2);
    assert!(!both[0].strict);
}

#[test]
fn dump_round_trips() {
    let p = &sample(3) + &ExpPolynomial::atom(3, DataAtom::QT(2)).scale(c(0.0, -1.5));
    let text = p.dump();
    let back = ExpPolynomial::parse_dump(3, &text).unwrap();
    assert_eq!(back.dump(), text);
}

fn arb_poly() -> impl Strategy<Value = CPoly> {
    prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64), 1..4)
        .prop_map(|v| CPoly::from_coeffs(v.into_iter().map(|(a, b)| c(a, b)).collect()))
}

fn arb_exppoly(n: usize) -> impl Strategy<Value = ExpPolynomial> {
    prop::collection::vec((0u32..(1 << n), arb_poly()), 1..4).prop_map(move |terms| {
        terms
            .into_iter()
            .fold(ExpPolynomial::zero(n), |acc, (m, p)| {
                &acc + &ExpPolynomial::term(ExponentKey::new(n, m), DataAtom::None, p)
            })
    })
}

proptest! {
    #[test]
    fn evaluation_is_additive(p in arb_exppoly(3), q in arb_exppoly(3), re in -2.0..2.0f64, im in -2.0..2.0f64) {
        let rho = c(re, im);
        let lhs = (&p + &q).evaluate(rho, None).unwrap();
        let rhs = p.evaluate(rho, None).unwrap() + q.evaluate(rho, None).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + rhs.norm()));
    }

    #[test]
    fn disjoint_products_evaluate_multiplicatively(p in arb_poly(), q in arb_poly(), re in -2.0..2.0f64) {
        let n = 4;
        let a = ExpPolynomial::term(ExponentKey::new(n, 0b0011), DataAtom::None, p);
        let b = ExpPolynomial::term(ExponentKey::new(n, 0b0100), DataAtom::None, q);
        let rho = c(re, 0.3);
        let lhs = a.try_mul(&b).unwrap().evaluate(rho, None).unwrap();
        let rhs = a.evaluate(rho, None).unwrap() * b.evaluate(rho, None).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + rhs.norm()));
    }

    #[test]
    fn dump_is_stable(p in arb_exppoly(4)) {
        let text = p.dump();
        prop_assert_eq!(ExpPolynomial::parse_dump(4, &text).unwrap().dump(), text);
    }
}
