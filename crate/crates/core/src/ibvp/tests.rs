use super::*;
use proptest::prelude::*;
use std::f64::consts::PI;

fn spec_text(name: &str) -> String {
    let path = format!("{}/specs/{name}.json", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn parses_heat_dirichlet() {
    let p = parse_problem(&spec_text("heat_dirichlet")).unwrap();
    assert_eq!(p.order, 2);
    assert_eq!(p.direction, C64::new(1.0, 0.0));
    assert_eq!(
        p.boundary,
        vec![vec![0.0, 0.0, 1.0, 0.0], vec![0.0, 0.0, 0.0, 1.0]]
    );
    assert_eq!(p.final_time, 1.0);
    assert!((p.initial.eval(0.5) - C64::new(1.0, 0.0)).norm() < 1e-15);
    assert!(p.is_homogeneous());
}

#[test]
fn wrong_data_arity_names_path() {
    let text =
        spec_text("heat_dirichlet").replace(r#""h": ["#, r#""h": [{"kind":"poly","coeffs":[]}, "#);
    let err = parse_problem(&text).unwrap_err();
    assert_eq!(err.path, "$.h");
    let bad = spec_text("heat_dirichlet").replace(r#""T": 1"#, r#""T": "one""#);
    assert_eq!(parse_problem(&bad).unwrap_err().path, "$.T");
}

#[test]
fn parses_coupled_third_order_example() {
    let p = parse_problem(&spec_text("3pseudo")).unwrap();
    assert_eq!(p.order, 3);
    assert_eq!(p.direction, C64::i());
    assert_eq!(p.boundary[2], vec![0.0, 0.0, 0.0, 0.0, 1.0, 2.0]);
}

#[test]
fn every_shipped_spec_validates() {
    for name in [
        "heat_dirichlet",
        "heat_neumann",
        "heat_periodic",
        "airy_periodic",
        "fourth_periodic",
        "3pseudo",
        "one_sided",
        "heat_robin",
        "heat_dirichlet_forced",
        "coupled_skew",
    ] {
        let p = parse_problem(&spec_text(name)).unwrap();
        assert!(validate(&p).is_ok(), "{name}: {:?}", validate(&p).err());
    }
}

#[test]
fn incompatible_initial_datum_reports_rows() {
    let mut p = parse_problem(&spec_text("heat_dirichlet")).unwrap();
    p.initial = FunctionSpec::Trig(vec![TrigTerm {
        freq: PI,
        cos: C64::new(1.0, 0.0),
        sin: C64::new(0.0, 0.0),
    }]);
    let errs = validate(&p).unwrap_err();
    match &errs[..] {
        [Violation::Compatibility { residual, rows, .. }] => {
            assert!((residual - 1.0).abs() < 1e-15);
            assert!((rows[0] - C64::new(1.0, 0.0)).norm() < 1e-15);
            assert!((rows[1] - C64::new(-1.0, 0.0)).norm() < 1e-15);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn odd_order_requires_imaginary_unit() {
    let mut p = parse_problem(&spec_text("airy_periodic")).unwrap();
    p.direction = C64::new(1.0, 0.0);
    let errs = validate(&p).unwrap_err();
    assert!(matches!(errs[..], [Violation::Direction { n: 3, .. }]));
}

#[test]
fn non_reduced_matrix_rejected() {
    let mut p = parse_problem(&spec_text("heat_dirichlet")).unwrap();
    p.boundary[0] = vec![0.0, 0.0, 2.0, 0.0];
    let errs = validate(&p).unwrap_err();
    assert!(matches!(errs[0], Violation::NotReduced(_)));
}

#[test]
fn dirichlet_index_sets() {
    let s = index_sets(&[vec![0.0, 0.0, 1.0, 0.0], vec![0.0, 0.0, 0.0, 1.0]], 2).unwrap();
    assert_eq!(s.hat_plus, vec![0]);
    assert_eq!(s.hat_minus, vec![0]);
    assert_eq!(s.tilde_plus, vec![1]);
    assert_eq!(s.tilde_minus, vec![1]);
    assert_eq!(s.unknown_labels, vec![3, 2]);
    assert_eq!(s.pivot_labels, vec![1, 0]);
    assert_eq!(s.pivot_row_plus[&0], 0);
    assert_eq!(s.pivot_row_minus[&0], 1);
}

#[test]
fn coupled_example_index_sets_and_class() {
    let p = parse_problem(&spec_text("3pseudo")).unwrap();
    let s = index_sets(&p.boundary, 3).unwrap();
    assert_eq!(s.hat_plus, vec![0, 1, 2]);
    assert!(s.hat_minus.is_empty());
    assert!(s.tilde_plus.is_empty());
    assert_eq!(s.tilde_minus, vec![0, 1, 2]);
    let c = classify_bc(&p.boundary, &s, true);
    assert!(c.coupled && !c.robin && !c.simple);
    assert_eq!((c.coupling, c.right_handed), (3, 0));
    assert_eq!((c.b1, c.b2, c.b3), (3, 3, 0));
}

#[test]
fn mirror_pattern_puts_all_pivots_right() {
    let n = 3;
    let m: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            (0..2 * n)
                .map(|c| if c == 2 * k + 1 { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    let s = index_sets(&m, n).unwrap();
    assert!(s.hat_plus.is_empty());
    assert_eq!(s.hat_minus, vec![0, 1, 2]);
}

#[test]
fn dirichlet_classification() {
    let m = vec![vec![0.0, 0.0, 1.0, 0.0], vec![0.0, 0.0, 0.0, 1.0]];
    let s = index_sets(&m, 2).unwrap();
    let c = classify_bc(&m, &s, true);
    assert!(!c.coupled && !c.robin && c.simple);
    assert_eq!((c.coupling, c.right_handed), (0, 1));
}

#[test]
fn robin_row_detected() {
    let m = vec![vec![1.0, 0.0, 1.0, 0.0], vec![0.0, 0.0, 0.0, 1.0]];
    let s = index_sets(&m, 2).unwrap();
    let c = classify_bc(&m, &s, true);
    assert!(c.robin && !c.coupled && !c.simple);
    // Left pivot on q_x(0); the right zero-order column pivots, so the only
    // pivot-free right column (order 1) is untouched by left-pivot rows.
    assert_eq!((c.b1, c.b2, c.b3), (0, 1, 0));
}

#[test]
fn row_reduce_recovers_pivots() {
    let m = vec![vec![0.0, 2.0, 4.0, 0.0], vec![1.0, 1.0, 0.0, 3.0]];
    let (r, t) = row_reduce(&m).unwrap();
    assert!(pivot_columns(&r).is_ok());
    for i in 0..2 {
        for c in 0..4 {
            let v: f64 = (0..2).map(|k| t[i][k] * m[k][c]).sum();
            assert!((v - r[i][c]).abs() < 1e-14);
        }
    }
}

fn arb_matrix(n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-3i32..=3, 2 * n), n).prop_map(|m| {
        m.into_iter()
            .map(|r| r.into_iter().map(f64::from).collect())
            .collect()
    })
}

proptest! {
    #[test]
    fn labels_partition_all_traces(m in arb_matrix(3)) {
        if let Some((r, _)) = row_reduce(&m) {
            let s = index_sets(&r, 3).unwrap();
            let mut all: Vec<usize> = s.unknown_labels.iter().chain(&s.pivot_labels).copied().collect();
            prop_assert!(s.unknown_labels.windows(2).all(|w| w[0] > w[1]));
            prop_assert!(s.pivot_labels.windows(2).all(|w| w[0] > w[1]));
            all.sort();
            prop_assert_eq!(all, (0..6).collect::<Vec<_>>());
            let c = classify_bc(&r, &s, true);
            prop_assert!(c.b1 <= c.b2 && c.b2 <= 3 && c.b3 <= 3);
            prop_assert_eq!(c.simple, !c.coupled && !c.robin);
        }
    }

    #[test]
    fn validation_is_idempotent(m in arb_matrix(2)) {
        if let Some((r, _)) = row_reduce(&m) {
            let p = ProblemSpec {
                order: 2,
                direction: C64::new(1.0, 0.0),
                boundary: r,
                final_time: 1.0,
                initial: FunctionSpec::zero(),
                data: vec![FunctionSpec::zero(), FunctionSpec::zero()],
            };
            let v = validate(&p).unwrap();
            prop_assert!(validate(v.spec()).is_ok());
        }
    }
}
