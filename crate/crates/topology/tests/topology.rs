use proptest::prelude::*;
use wk_field::*;
use wk_topology::*;

fn setup(src: &str, lo: &[f64], hi: &[f64], n: &[usize]) -> (ScalarField, Grid) {
    let f = parse_field(src, lo.len()).unwrap();
    let grid = Grid::new(DomainSpec::new(lo.to_vec(), hi.to_vec()).unwrap(), GridSpec { nodes: n.to_vec() }).unwrap();
    (f, grid)
}

fn topo(src: &str, lo: &[f64], hi: &[f64], n: &[usize]) -> Topology {
    let (f, grid) = setup(src, lo, hi, n);
    analyze(&f, &grid, &Tolerances::default(), TieBreak::default()).unwrap()
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

#[test]
fn double_well_critical_points() {
    let t = topo("(x1^2-1)^2", &[-1.7], &[1.7], &[1025]);
    let interior: Vec<_> = t.critical_points.iter().filter(|c| c.kind == PointKind::Interior).collect();
    assert_eq!(interior.len(), 3);
    let minima: Vec<_> = interior.iter().filter(|c| c.index == 0).collect();
    assert_eq!(minima.len(), 2);
    assert!(minima.iter().any(|c| close(&c.location, &[-1.0], 1e-12)));
    assert!(minima.iter().any(|c| close(&c.location, &[1.0], 1e-12)));
    let s = interior.iter().find(|c| c.index == 1).unwrap();
    assert!(close(&s.location, &[0.0], 1e-12));
    assert_eq!(s.mu_d(), -4.0);
}

#[test]
fn single_well_critical_points() {
    let t = topo("x1^2", &[-1.0], &[1.0], &[257]);
    let interior: Vec<_> = t.critical_points.iter().filter(|c| c.kind == PointKind::Interior).collect();
    assert_eq!(interior.len(), 1);
    assert_eq!(interior[0].index, 0);
    assert!(close(&interior[0].location, &[0.0], 1e-14));
}

#[test]
fn two_dimensional_critical_points() {
    let t = topo("(x1^2-1)^2 + x2^2", &[-1.7, -1.0], &[1.7, 1.0], &[129, 65]);
    let interior: Vec<_> = t.critical_points.iter().filter(|c| c.kind == PointKind::Interior).collect();
    assert_eq!(interior.len(), 3);
    let s = interior.iter().find(|c| c.index == 1).unwrap();
    assert!(close(&s.location, &[0.0, 0.0], 1e-12));
    assert_eq!(s.hessian_eigenvalues, vec![-4.0, 2.0]);
    for x in [-1.0, 1.0] {
        assert!(interior.iter().any(|c| c.index == 0 && close(&c.location, &[x, 0.0], 1e-10)));
    }
}

#[test]
fn degenerate_potential_rejected() {
    let (f, grid) = setup("x1^4", &[-1.0], &[1.0], &[257]);
    match analyze(&f, &grid, &Tolerances::default(), TieBreak::default()) {
        Err(TopologyError::Degenerate { .. }) => {}
        other => panic!("expected a degenerate-Hessian error, got {other:?}"),
    }
}

#[test]
fn no_minimum_is_an_error() {
    let (f, grid) = setup("x1", &[-1.0], &[1.0], &[65]);
    assert!(matches!(analyze(&f, &grid, &Tolerances::default(), TieBreak::default()), Err(TopologyError::NoMinima)));
}

#[test]
fn merge_events_examples() {
    let t = topo("(x1^2-1)^2", &[-1.7], &[1.7], &[1025]);
    assert_eq!(t.merge.events.len(), 1);
    let e = &t.merge.events[0];
    assert!((e.level - 1.0).abs() < 1e-5);
    let (f, grid) = setup("(x1^2-1)^2", &[-1.7], &[1.7], &[1025]);
    let _ = f;
    assert!(grid.coords(e.witness)[0].abs() < 2.0 * grid.max_dx());
    assert!(e.refined_saddle.is_some());

    let t = topo("x1^2", &[-1.0], &[1.0], &[257]);
    assert!(t.merge.events.is_empty());
    assert_eq!(t.merge.births.len(), 1);

    // three minima, two saddles at different heights
    let t = topo("x1^6/6 - 5*x1^4/4 + 2*x1^2 + 0.1*x1", &[-2.6], &[2.6], &[2049]);
    let levels: Vec<f64> = t.merge.events.iter().map(|e| e.level).collect();
    assert_eq!(levels.len(), 2);
    assert!(levels[0] < levels[1]);
    let saddle_values: Vec<f64> = {
        let mut v: Vec<f64> = t
            .critical_points
            .iter()
            .filter(|c| c.kind == PointKind::Interior && c.index == 1)
            .map(|c| c.value)
            .collect();
        v.sort_by(f64::total_cmp);
        v
    };
    for (l, s) in levels.iter().zip(&saddle_values) {
        assert!((l - s).abs() < 1e-4, "{l} vs {s}");
    }
}

#[test]
fn merge_levels_non_decreasing_and_one_birth_per_grid_minimum() {
    for (src, lo, hi, n) in [
        ("(x1^2-1)^2 + x2^2", vec![-1.7, -1.0], vec![1.7, 1.0], vec![97, 65]),
        ("sin(3*x1)*cos(2*x2) + 0.1*(x1^2 + x2^2)", vec![-2.0, -2.0], vec![2.0, 2.0], vec![81, 81]),
    ] {
        let (f, grid) = setup(src, &lo, &hi, &n);
        let values = evaluate_on_grid(&f, &grid).unwrap();
        let m = MergeStructure::build(&grid, &values.f);
        for w in m.events.windows(2) {
            assert!(w[0].level <= w[1].level);
        }
        let grid_minima: Vec<usize> = (0..grid.node_count())
            .filter(|&v| grid.neighbors(v).all(|(w, _)| (values.f[w], w) > (values.f[v], v)))
            .collect();
        let mut births: Vec<usize> = m.births.iter().map(|b| b.node).collect();
        births.sort_unstable();
        assert_eq!(births, grid_minima);
        assert_eq!(m.events.len(), m.births.len() - 1);
    }
}

#[path = "common/oracle.rs"]
mod oracle;

const ORACLE_FIXTURES: &[(&str, f64, f64)] = &[
    ("(x1^2-1)^2", -1.7, 1.7),
    ("(x1^2-1)^2", -1.7, 0.0),
    ("x1^2", -1.0, 1.0),
    ("x1^6/6 - 5*x1^4/4 + 2*x1^2 + 0.1*x1", -2.6, 2.6),
    ("(x1^2-1)^2 + 0.3*x1 + 0.2*sin(5*x1)", -1.8, 1.6),
];

#[test]
fn labeling_matches_interval_oracle() {
    for &(src, a, b) in ORACLE_FIXTURES {
        let t = topo(src, &[a], &[b], &[2049]);
        let field = parse_field(src, 1).unwrap();
        // odd sample count with both endpoints and grid-aligned saddles where possible
        let s = oracle::sample(|x| field.value(&[x]), a, b, 400_001);
        let expect = oracle::labeling(&s, 1e-9);
        let mut got: Vec<(f64, Vec<f64>)> = t
            .labeling
            .labels
            .iter()
            .map(|l| (l.energy, l.j.iter().map(|&z| t.point(z).location[0]).collect()))
            .collect();
        let mut exp = expect.clone();
        let key = |v: &(f64, Vec<f64>)| (v.0 * 1e6).round() as i64;
        got.sort_by_key(key);
        exp.sort_by_key(key);
        assert_eq!(got.len(), exp.len(), "{src}: {got:?} vs {exp:?}");
        let dx = (b - a) / 400_000.0;
        for (g, e) in got.iter().zip(&exp) {
            assert!((g.0 - e.0).abs() < 1e-6, "{src}: E {} vs {}", g.0, e.0);
            assert_eq!(g.1.len(), e.1.len(), "{src}: j {:?} vs {:?}", g.1, e.1);
            let mut gj = g.1.clone();
            gj.sort_by(f64::total_cmp);
            for (x, y) in gj.iter().zip(&e.1) {
                assert!((x - y).abs() <= 2.0 * dx, "{src}: j {:?} vs {:?}", g.1, e.1);
            }
        }
        assert!(t.labeling.invariant_violations().is_empty(), "{src}");
    }
}

#[test]
fn jmap_examples() {
    let t = topo("(x1^2-1)^2", &[-1.7], &[1.7], &[4097]);
    let ls = &t.labeling.labels;
    assert_eq!(ls.len(), 2);
    assert_eq!(ls[0].tier, (1, 1));
    assert!(close(&t.point(ls[0].minimum).location, &[-1.0], 1e-12));
    let j0: Vec<f64> = ls[0].j.iter().map(|&z| t.point(z).location[0]).collect();
    assert_eq!(j0, vec![-1.7, 1.7]);
    assert!((ls[0].energy - 1.89f64.powi(2)).abs() < 1e-12);
    assert_eq!(ls[1].tier, (2, 1));
    assert!(close(&t.point(ls[1].minimum).location, &[1.0], 1e-12));
    assert_eq!(ls[1].j.len(), 1);
    assert!(t.point(ls[1].j[0]).location[0].abs() < 1e-12);
    assert!((ls[1].energy - 1.0).abs() < 1e-12);

    let t = topo("x1^2", &[-1.0], &[1.0], &[257]);
    assert_eq!(t.labeling.m0(), 1);
    let j: Vec<f64> = t.labeling.labels[0].j.iter().map(|&z| t.point(z).location[0]).collect();
    assert_eq!(j, vec![-1.0, 1.0]);
    assert_eq!(t.labeling.labels[0].energy, 1.0);

    let t = topo("(x1^2-1)^2", &[-1.7], &[0.0], &[2049]);
    assert_eq!(t.labeling.m0(), 1);
    let l = &t.labeling.labels[0];
    assert_eq!(l.j.len(), 1);
    assert_eq!(t.point(l.j[0]).location, vec![0.0]);
    assert_eq!(t.point(l.j[0]).kind, PointKind::BoundaryCritical);
    assert!((l.energy - 1.0).abs() < 1e-12);
}

#[test]
fn generalized_saddle_classification() {
    let t = topo("(x1^2-1)^2", &[-1.7], &[1.7], &[1025]);
    assert_eq!(t.saddles.separating.len(), 1);
    assert!(t.point(t.saddles.separating[0]).location[0].abs() < 1e-12);
    assert_eq!(t.saddles.boundary.len(), 2);
    for b in &t.saddles.boundary {
        assert_eq!(b.case, BoundaryCase::NonCritical);
        let dn = t.point(b.point).boundary.as_ref().unwrap().normal_derivative;
        assert!((dn - 4.0 * 1.7 * (1.7f64.powi(2) - 1.0)).abs() < 1e-12);
        assert!((dn - 12.852).abs() < 1e-9);
    }
    let t = topo("x1^2", &[-1.0], &[1.0], &[257]);
    assert!(t.saddles.separating.is_empty());
    assert_eq!(t.saddles.boundary.len(), 2);
    assert!(t.saddles.boundary.iter().all(|b| b.case == BoundaryCase::NonCritical));

    let t = topo("(x1^2-1)^2", &[-1.7], &[0.0], &[2049]);
    assert_eq!(t.saddles.boundary.len(), 1);
    let b = &t.saddles.boundary[0];
    assert_eq!(b.case, BoundaryCase::Critical);
    assert_eq!(t.point(b.point).mu_d(), -4.0);
}

#[test]
fn hypothesis_examples() {
    let t = topo("(x1^2-1)^2", &[-1.7], &[0.0], &[2049]);
    assert!(t.hypotheses.pass());
    assert_eq!(t.hypotheses.alignment.len(), 1);
    assert_eq!(t.hypotheses.alignment[0].angle, 0.0);

    let t = topo("(x1^2-1)^2 + x2^2", &[-1.7, -1.0], &[0.0, 1.0], &[129, 65]);
    let a = t.hypotheses.alignment.iter().find(|a| t.point(a.point).location == vec![0.0, 0.0]).unwrap();
    assert_eq!(a.angle, 0.0);
    assert!(t.hypotheses.h1_pass);

    let t = topo("-2*x1*x2 + (x1^4 + x2^4)/2", &[-1.7, -1.7], &[0.0, 1.7], &[129, 257]);
    assert!(!t.hypotheses.h1_pass);
    assert!(!t.hypotheses.pass());
    assert!(!t.hypotheses.violations.is_empty());
    let a = &t.hypotheses.alignment[0];
    assert!((a.angle - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
}

#[test]
fn half_domain_contacts_include_face_minima() {
    // {f < 1} touches the faces x2 = ±1 at (−1, ±1), at the same level as the
    // boundary saddle (0, 0)
    let t = topo("(x1^2-1)^2 + x2^2", &[-1.7, -1.0], &[0.0, 1.0], &[129, 65]);
    let l = &t.labeling.labels[0];
    let mut j: Vec<Vec<f64>> = l.j.iter().map(|&z| t.point(z).location.clone()).collect();
    j.sort_by(|a, b| a[1].total_cmp(&b[1]));
    assert_eq!(j.len(), 3);
    assert!(close(&j[0], &[-1.0, -1.0], 1e-12));
    assert!(close(&j[1], &[0.0, 0.0], 0.0));
    assert!(close(&j[2], &[-1.0, 1.0], 1e-12));
}

#[test]
fn shared_saddles_in_triple_well() {
    let t = topo("1 - cos(3.141592653589793*x1)", &[-3.0], &[3.0], &[1201]);
    let ls = &t.labeling.labels;
    assert_eq!(ls.len(), 3);
    assert!(ls.iter().all(|l| l.tier.0 == 1 && (l.energy - 2.0).abs() < 1e-12));
    let shared = |a: &WellLabel, b: &WellLabel| a.j.iter().filter(|z| b.j.contains(z)).count();
    assert_eq!(shared(&ls[0], &ls[1]), 1);
    assert_eq!(shared(&ls[1], &ls[2]), 1);
    assert_eq!(shared(&ls[0], &ls[2]), 0);
    assert!(t.labeling.invariant_violations().is_empty());
}

fn gamma_class(t: &Topology, l: &WellLabel) -> bool {
    l.j.iter().any(|&z| t.point(z).kind == PointKind::BoundaryNoncritical)
}

#[test]
fn tie_break_invariance() {
    for (src, lo, hi, n) in [
        ("(x1^2-1)^2", vec![-1.7], vec![1.7], vec![1025]),
        ("1 - cos(3.141592653589793*x1)", vec![-3.0], vec![3.0], vec![1201]),
        ("(x1^2-1)^2 + x2^2", vec![-1.7, -1.0], vec![1.7, 1.0], vec![97, 49]),
    ] {
        let (f, grid) = setup(src, &lo, &hi, &n);
        let mut sets = Vec::new();
        for tie in [TieBreak::LexSmallest, TieBreak::LexLargest] {
            let t = analyze(&f, &grid, &Tolerances::default(), tie).unwrap();
            let mut v: Vec<(i64, bool)> =
                t.labeling.labels.iter().map(|l| ((l.energy * 1e9).round() as i64, gamma_class(&t, l))).collect();
            v.sort();
            sets.push(v);
        }
        assert_eq!(sets[0], sets[1], "{src}");
    }
}

#[test]
fn energies_stable_under_refinement() {
    let mut prev: Option<Vec<f64>> = None;
    for n in [257, 513, 1025] {
        let t = topo("(x1^2-1)^2 + 0.3*x1 + 0.2*sin(5*x1)", &[-1.8], &[1.6], &[n]);
        let e: Vec<f64> = t.labeling.labels.iter().map(|l| l.energy).collect();
        if let Some(p) = &prev {
            assert_eq!(p.len(), e.len());
            let h = 3.4 / (n - 1) as f64;
            for (a, b) in p.iter().zip(&e) {
                assert!((a - b).abs() <= 10.0 * h * h, "{a} vs {b}");
            }
        }
        prev = Some(e);
    }
}

#[test]
fn principal_wells_open_and_disjoint() {
    let (f, grid) = setup("1 - cos(3.141592653589793*x1)", &[-3.0], &[3.0], &[1201]);
    let t = analyze(&f, &grid, &Tolerances::default(), TieBreak::default()).unwrap();
    let ws = &t.saddles.wells;
    for w in ws {
        assert!(w.nodes.iter().all(|&v| grid.kind(v) == NodeKind::Interior));
    }
    for a in 0..ws.len() {
        for b in a + 1..ws.len() {
            assert!(ws[a].nodes.iter().all(|v| ws[b].nodes.binary_search(v).is_err()));
        }
    }
}

#[test]
fn topology_json_has_stable_fields() {
    let t = topo("(x1^2-1)^2", &[-1.7], &[1.7], &[257]);
    let v: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
    for key in ["critical_points", "merge", "saddles", "labeling", "hypotheses", "tol_level", "dimension"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let c = &v["critical_points"][0];
    for key in ["id", "location", "value", "index", "kind", "on_boundary", "hessian_eigenvalues"] {
        assert!(c.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["labeling"]["labels"][0]["tier"], serde_json::json!([1, 1]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn tilted_double_well_invariants(a in -0.4f64..0.4, lo in -2.0f64..-1.4, hi in 1.4f64..2.0) {
        let src = format!("(x1^2-1)^2 + {}*x1", a.abs());
        let src = if a < 0.0 { src.replace('+', "-") } else { src };
        let t = topo(&src, &[lo], &[hi], &[513]);
        prop_assert!(t.labeling.invariant_violations().is_empty());
        prop_assert!(t.labeling.labels.iter().all(|l| l.energy > 0.0));
        let minima = t.critical_points.iter().filter(|c| c.kind == PointKind::Interior && c.index == 0).count();
        prop_assert_eq!(t.labeling.m0(), minima);
    }
}
