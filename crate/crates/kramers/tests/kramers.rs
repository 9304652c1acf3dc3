use proptest::prelude::*;
use std::f64::consts::PI;
use wk_field::*;
use wk_kramers::*;
use wk_topology::*;

fn topo(src: &str, lo: &[f64], hi: &[f64], n: &[usize]) -> Topology {
    let f = parse_field(src, lo.len()).unwrap();
    let grid = Grid::new(DomainSpec::new(lo.to_vec(), hi.to_vec()).unwrap(), GridSpec { nodes: n.to_vec() }).unwrap();
    analyze(&f, &grid, &Tolerances::default(), TieBreak::default()).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn double_well() -> Topology {
    topo("(x1^2-1)^2", &[-1.7], &[1.7], &[1025])
}

#[test]
fn interior_saddle_constant() {
    let t = double_well();
    let l = t.labeling.labels.iter().find(|l| l.tier == (2, 1)).unwrap();
    let z = t.point(l.j[0]);
    let c = saddle_constant(z, &[t.point(l.minimum)]).unwrap();
    assert_eq!(c.kind, SaddleKind::Interior);
    assert_eq!(c.h_power, 1.0);
    assert!(rel(c.constant, 4.0 * 2f64.sqrt() / PI) < 1e-12);
    assert!((c.constant - 1.80063).abs() < 1e-5);
}

#[test]
fn boundary_critical_constant() {
    let t = topo("(x1^2-1)^2", &[-1.7], &[0.0], &[2049]);
    let l = &t.labeling.labels[0];
    let c = saddle_constant(t.point(l.j[0]), &[t.point(l.minimum)]).unwrap();
    assert_eq!(c.kind, SaddleKind::BoundaryCritical);
    assert!(rel(c.constant, 8.0 * 2f64.sqrt() / PI) < 1e-12);
    assert!((c.constant - 3.60127).abs() < 1e-5);
}

#[test]
fn boundary_noncritical_constants_symmetric() {
    let t = double_well();
    let l = &t.labeling.labels[0];
    let argmin: Vec<&CriticalPoint> = l.argmin.iter().map(|&q| t.point(q)).collect();
    assert_eq!(argmin.len(), 2);
    let cs: Vec<SaddleContribution> = l.j.iter().map(|&z| saddle_constant(t.point(z), &argmin).unwrap()).collect();
    assert_eq!(cs.len(), 2);
    assert!(cs.iter().all(|c| c.kind == SaddleKind::BoundaryNoncritical && c.h_power == 0.5));
    assert!(rel(cs[0].constant, cs[1].constant) < 1e-12);
    // ∂ₙf(1.7) = 4·1.7·(1.7² − 1), B = 2·8^{−½}
    let dn = 4.0 * 1.7 * (1.7f64 * 1.7 - 1.0);
    let expect = 2.0 * dn / PI.sqrt() / (2.0 / 8f64.sqrt());
    assert!(rel(cs[0].constant, expect) < 1e-12);
}

#[test]
fn constant_errors() {
    let t = double_well();
    let minimum = t.point(t.labeling.labels[0].minimum);
    let saddle = t.critical_points.iter().find(|c| c.kind == PointKind::Interior && c.index == 1).unwrap();
    assert!(matches!(saddle_constant(minimum, &[minimum]), Err(KramersError::Unsupported { .. })));
    assert!(matches!(saddle_constant(saddle, &[saddle]), Err(KramersError::NotAMinimum { .. })));
}

#[test]
fn double_well_predictions() {
    let t = double_well();
    let p = predict(&t).unwrap();
    assert_eq!(p.predictions.len(), 2);
    let (a, b) = (&p.predictions[0], &p.predictions[1]);
    assert!((a.energy - 3.5721).abs() < 1e-12);
    assert_eq!(a.gamma, 0.5);
    assert_eq!(a.k2, 0.0);
    assert!((b.energy - 1.0).abs() < 1e-12);
    assert_eq!(b.gamma, 1.0);
    assert_eq!(b.k1, 0.0);
    assert!(rel(b.k2, 4.0 * 2f64.sqrt() / PI) < 1e-12);
    assert_eq!(a.error_order, ErrorOrder::H);
    assert_eq!(b.error_order, ErrorOrder::H);
    assert!(p.cross_terms.is_empty());
    // the inner well of +1 sits inside the well of −1 and f(+1) = f(−1), so the
    // strict nesting condition fails for the pair
    assert_eq!(p.applicability.m_star, 1);
    let two = &p.applicability.prefixes[1];
    assert!(two.energy_gap && two.disjoint_saddles && !two.strict_nesting);
}

#[test]
fn tilted_double_well_separates_both_branches() {
    // raising the inner minimum restores strict nesting
    let t = topo("(x1^2-1)^2 + 0.1*x1", &[-1.7], &[1.7], &[1025]);
    let p = predict(&t).unwrap();
    assert_eq!(p.applicability.m_star, 2);
}

#[test]
fn single_well_prediction() {
    let t = topo("x1^2", &[-1.0], &[1.0], &[257]);
    let p = predict(&t).unwrap();
    assert_eq!(p.predictions.len(), 1);
    let q = &p.predictions[0];
    assert_eq!(q.gamma, 0.5);
    assert_eq!(q.k2, 0.0);
    // two endpoints, ∂ₙf = 2, det Hess at the minimum = 2
    let k1 = 2.0 * (2.0 * 2.0 / PI.sqrt() * 2f64.sqrt());
    assert!(rel(q.k1, k1) < 1e-12);
    for h in [0.1, 0.2, 0.3] {
        assert!(rel(q.lambda(h), h.sqrt() * k1 * (-2.0 / h).exp()) < 1e-13);
    }
    assert_eq!(p.applicability.m_star, 1);
}

#[test]
fn shared_saddle_cross_term() {
    let t = topo("x1^6/6 - 5*x1^4/4 + 2*x1^2", &[-2.6], &[2.6], &[2049]);
    let p = predict(&t).unwrap();
    assert_eq!(p.predictions.len(), 3);
    assert!(!p.cross_terms.is_empty());
    assert!(p.cross_terms.iter().all(|c| c.k > 0.0 && !c.shared.is_empty()));
    let prefixes = &p.applicability.prefixes;
    assert!(!prefixes[1].disjoint_saddles);
}

#[test]
fn half_well_boundary_saddle_formula() {
    let t = topo("(x1^2-1)^2", &[-1.7], &[0.0], &[2049]);
    let BoundarySaddleVerdict::Applicable(f) = boundary_saddle_formula(&t) else { panic!("not applicable") };
    assert!(rel(f.prefactor, 8.0 * 2f64.sqrt() / PI) < 1e-12);
    let p = predict(&t).unwrap();
    assert_eq!(p.predictions[0].error_order, ErrorOrder::SqrtH);
    for h in [0.05, 0.1, 0.2, 0.3] {
        assert!(rel(f.lambda(h), p.predictions[0].lambda(h)) < 1e-13);
    }
}

#[test]
fn two_dimensional_boundary_saddle_formula() {
    // steep in x2, so the only contact of {f < 1} with ∂Ω is the saddle (0, 0)
    let t = topo("(x1^2-1)^2 + 2*x2^2", &[-1.7, -1.0], &[0.0, 1.0], &[129, 65]);
    let BoundarySaddleVerdict::Applicable(f) = boundary_saddle_formula(&t) else { panic!("not applicable") };
    // (2/π)·|−4|·16^{−½} / 32^{−½}
    assert!(rel(f.prefactor, 2.0 / PI * 4.0 / 4.0 * 32f64.sqrt()) < 1e-12);
    assert!((f.energy - 1.0).abs() < 1e-12);
    let p = predict(&t).unwrap();
    for h in [0.1, 0.25] {
        assert!(rel(f.lambda(h), p.predictions[0].lambda(h)) < 1e-13);
    }
}

#[test]
fn face_contacts_block_boundary_saddle_formula() {
    // f = 1 at (−1, ±1) too, so the well touches ∂Ω away from the saddle
    let t = topo("(x1^2-1)^2 + x2^2", &[-1.7, -1.0], &[0.0, 1.0], &[129, 65]);
    match boundary_saddle_formula(&t) {
        BoundarySaddleVerdict::NotApplicable { reasons } => assert_eq!(reasons.len(), 2, "{reasons:?}"),
        v => panic!("unexpected {v:?}"),
    }
    let p = predict(&t).unwrap();
    let q = &p.predictions[0];
    assert!(q.k1 > 0.0 && q.k2 > 0.0);
    assert_eq!(q.gamma, 0.5);
}

#[test]
fn full_double_well_not_applicable() {
    assert!(!boundary_saddle_formula(&double_well()).is_applicable());
}

#[test]
fn hypothesis_failure_refused() {
    let t = topo("-2*x1*x2 + (x1^4 + x2^4)/2", &[-1.7, -1.7], &[0.0, 1.7], &[129, 257]);
    assert!(matches!(predict(&t), Err(KramersError::Hypotheses(v)) if !v.is_empty()));
    assert!(!boundary_saddle_formula(&t).is_applicable());
}

#[test]
fn predictions_serialize() {
    let p = predict(&double_well()).unwrap();
    let s = serde_json::to_string(&p).unwrap();
    for key in ["\"energy\"", "\"gamma\"", "\"k1\"", "\"k2\"", "\"a1\"", "\"a2\"", "\"b\"", "\"m_star\""] {
        assert!(s.contains(key), "missing {key}");
    }
}

fn fixtures() -> Vec<Topology> {
    vec![
        double_well(),
        topo("(x1^2-1)^2", &[-1.7], &[0.0], &[1025]),
        topo("x1^2", &[-1.0], &[1.0], &[257]),
        topo("x1^6/6 - 5*x1^4/4 + 2*x1^2", &[-2.6], &[2.6], &[1025]),
        topo("1 - cos(3.141592653589793*x1)", &[-3.0], &[3.0], &[1201]),
        topo("(x1^2-1)^2 + x2^2", &[-1.7, -1.0], &[0.0, 1.0], &[97, 49]),
    ]
}

#[test]
fn ordering_at_small_h() {
    for t in fixtures() {
        let p = predict(&t).unwrap();
        for w in p.predictions.windows(2) {
            assert!(w[0].scale(1e-3) >= w[1].scale(1e-3));
        }
    }
}

#[test]
fn structural_invariants() {
    for t in fixtures() {
        let p = predict(&t).unwrap();
        for q in &p.predictions {
            assert!(q.k1 != 0.0 || q.k2 != 0.0);
            assert_eq!(q.gamma == 0.5, q.k1 != 0.0);
        }
        for c in &p.cross_terms {
            let px = p.predictions.iter().find(|q| q.minimum == c.x).unwrap();
            let py = p.predictions.iter().find(|q| q.minimum == c.y).unwrap();
            let get = |q: &KramersPrediction, z| q.contributions.iter().find(|s| s.saddle == z).unwrap().constant;
            let k_yx: f64 = c.shared.iter().map(|&z| (get(py, z) * get(px, z)).sqrt()).sum();
            assert!(rel(c.k, k_yx) < 1e-14);
        }
        // pairs without shared saddles carry no cross term
        for a in &p.predictions {
            for b in &p.predictions {
                if a.minimum < b.minimum && !a.j.iter().any(|z| b.j.contains(z)) {
                    assert!(!p.cross_terms.iter().any(|c| (c.x, c.y) == (a.minimum, b.minimum) || (c.x, c.y) == (b.minimum, a.minimum)));
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    #[test]
    fn evaluator_identities(h in 0.01f64..1.0, h2 in 0.01f64..1.0, which in 0usize..4) {
        let ts = [
            double_well(),
            topo("(x1^2-1)^2", &[-1.7], &[0.0], &[513]),
            topo("x1^2", &[-1.0], &[1.0], &[129]),
            topo("(x1^2-1)^2 + x2^2", &[-1.7, -1.0], &[0.0, 1.0], &[65, 33]),
        ];
        let p = predict(&ts[which]).unwrap();
        for q in &p.predictions {
            prop_assert!(rel(q.lambda(h), q.lambda_from_a(h)) < 1e-12);
            let back = q.lambda(h) * h.powf(-q.gamma) * (2.0 * q.energy / h).exp();
            prop_assert!(rel(back, q.prefactor(h)) < 1e-9);
            if q.k1 == 0.0 || q.k2 == 0.0 {
                prop_assert!(rel(q.prefactor(h), q.prefactor(h2)) < 1e-12);
            }
        }
    }
}
