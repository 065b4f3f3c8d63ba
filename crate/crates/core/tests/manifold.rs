use shadowrate::case::EpsCase;
use shadowrate::equilibria::find_all_limit;
use shadowrate::manifold::*;
use shadowrate::model::{Coef, Family, Nonlinearity, ProblemConfig, ProfileKind, ProfileSpec};
use shadowrate::semigroup::FlowConfig;
use shadowrate::Error;

fn config(c: Coef, f: Nonlinearity) -> ProblemConfig {
    ProblemConfig {
        lambda: 0.1,
        c,
        m0: 0.05,
        x1: 0.3,
        x2: 0.7,
        eps0: 0.1,
        f,
        profile: ProfileSpec {
            kind: ProfileKind::Ramp,
            p0: Coef::Poly(vec![1.0, 0.5]),
            alpha: 1.0,
        },
    }
}

fn cubic() -> Nonlinearity {
    Nonlinearity::cubic(1.0, 1.0, 4.0)
}

fn default_case(n: usize) -> EpsCase {
    EpsCase::new(&config(Coef::Poly(vec![0.0, 0.8]), cubic()), 0.01, n).unwrap()
}

fn flat_case() -> EpsCase {
    let mut cfg = config(Coef::Const(0.4), cubic());
    cfg.profile = ProfileSpec {
        kind: ProfileKind::CustomTable {
            table: vec![(0.0, 1.0), (1.0, 1.0)],
        },
        p0: Coef::Const(1.0),
        alpha: 1.0,
    };
    EpsCase::new(&cfg, 0.1, 128).unwrap()
}

fn box_spec(case: &EpsCase, s: &SpectralSplit) -> GraphSpec {
    let eqs = find_all_limit(&case.op_lim, &cubic()).unwrap();
    let states: Vec<Vec<f64>> = eqs.iter().map(|e| case.op_lim.embed(&e.u)).collect();
    let states: Vec<Vec<f64>> = if s.op.is_limit() {
        eqs.iter().map(|e| e.u.clone()).collect()
    } else {
        states
    };
    GraphSpec::new(box_for(s, &states, 0.5), s.m)
}

#[test]
fn constant_coefficients_slow_generator() {
    let case = flat_case();
    let s = split(&case.op_eps, 1).unwrap();
    assert!((s.beta - 0.5).abs() < 1e-10, "{}", s.beta);
    let exact = 0.5 + std::f64::consts::PI.powi(2);
    assert!((s.gamma - exact).abs() / exact < 1e-3);
    assert_eq!(s.big_m, 1.0);
}

#[test]
fn slow_and_fast_parts_rebuild_the_load() {
    let case = default_case(128);
    let s = split(&case.op_eps, 2).unwrap();
    let z: Vec<f64> = case.mesh.nodes.iter().map(|x| 0.1 * (7.0 * x).sin()).collect();
    let eta = [0.4, -0.2];
    let (h, g) = s.h_g(&cubic(), &eta, &z);
    let mut u = s.lift(&eta);
    u.iter_mut().zip(&z).for_each(|(a, b)| *a += b);
    let l = shadowrate::nonlinear::load(&case.op_eps, &cubic(), &u);
    let mut rebuilt = s.lift(&h);
    rebuilt.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
    let back = case.op_eps.mass.matvec(&rebuilt);
    let err = back.iter().zip(&l).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-12, "{err}");
    assert!(s.coords(&g).iter().all(|c| c.abs() < 1e-10));
}

#[test]
fn gap_table_ratio_largest_across_first_gap() {
    let case = default_case(256);
    let ratios: Vec<f64> = (1..=3)
        .map(|m| {
            let s = split(&case.op_eps, m).unwrap();
            s.gamma / s.beta
        })
        .collect();
    assert!(ratios[0] > ratios[1] && ratios[0] > ratios[2], "{ratios:?}");
}

#[test]
fn zero_nonlinearity_gives_zero_graph_in_one_iteration() {
    let case = default_case(128);
    let s = split(&case.op_eps, 1).unwrap();
    let g = compute_graph(&s, &Nonlinearity::zero(), &GraphSpec::new(1.0, 1)).unwrap();
    assert_eq!(g.changes, vec![0.0]);
    assert!(g.graph.values.iter().all(|v| v.iter().all(|&x| x == 0.0)));
}

#[test]
fn linear_nonlinearity_keeps_zero_graph() {
    let case = default_case(128);
    let s = split(&case.op_eps, 1).unwrap();
    let f = Nonlinearity {
        family: Family::Custom,
        params: vec![0.0, 0.3],
        cutoff_k: 100.0,
    };
    let spec = GraphSpec::new(1.0, 1);
    let zero = GraphFunction::zero(1, case.op_eps.ndof(), &spec);
    let (next, change) = lp_iterate(&s, &f, &zero, &spec, spec.horizon(s.gamma)).unwrap();
    assert!(change < 1e-12, "{change}");
    assert!(next.sup_norm(&case.op_eps.a) < 1e-12);
}

#[test]
fn cubic_graph_contracts_and_is_a_fixed_point() {
    let case = default_case(128);
    let s = split(&case.op_eps, 1).unwrap();
    let spec = box_spec(&case, &s);
    let g = compute_graph(&s, &cubic(), &spec).unwrap();
    assert!(g.kappa < 1.0 && g.kappa > 0.0, "{}", g.kappa);
    for w in g.changes.windows(2) {
        assert!(w[1] <= g.kappa * w[0] * (1.0 + 1e-12));
    }
    assert!(g.sup <= spec.sup_bound && g.lipschitz <= spec.lipschitz_budget);
    let (_, change) = lp_iterate(&s, &cubic(), &g.graph, &spec, g.horizon).unwrap();
    assert!(change <= 2.0 * spec.tol, "{change}");
    let inv = invariance_residual(&s, &cubic(), &g.graph, spec.rho_core(), 0.5, FlowConfig::default()).unwrap();
    assert!(inv <= 5e-3, "{inv}");
}

#[test]
fn graph_distance_to_itself_is_zero() {
    let case = default_case(128);
    let s = split(&case.op_lim, 1).unwrap();
    let spec = box_spec(&case, &s);
    let g = compute_graph(&s, &cubic(), &spec).unwrap();
    let d = graph_diff(&s, &g.graph, &s, &g.graph, spec.rho_core()).unwrap();
    assert!(d < 1e-14, "{d}");
}

#[test]
fn graph_points_lie_on_the_graph() {
    let case = default_case(128);
    let s = split(&case.op_eps, 1).unwrap();
    let spec = box_spec(&case, &s);
    let g = compute_graph(&s, &cubic(), &spec).unwrap();
    for k in g.graph.nodes_within(spec.rho_box) {
        let mut u = s.lift(&g.graph.node(k));
        u.iter_mut().zip(&g.graph.values[k]).for_each(|(a, b)| *a += b);
        assert!(distance_to_graph(&s, &g.graph, &u) < 1e-12);
    }
}

#[test]
fn uncut_backward_flow_escapes_the_box() {
    let case = default_case(128);
    let s = split(&case.op_eps, 1).unwrap();
    let spec = GraphSpec {
        cutoff: false,
        ..GraphSpec::new(1.5, 1)
    };
    match compute_graph(&s, &cubic(), &spec) {
        Err(Error::BoxEscape { allowed, .. }) => assert_eq!(allowed, 1.5),
        other => panic!("{:?}", other.map(|g| g.kappa)),
    }
}

#[test]
fn slow_dimension_is_bounded() {
    let case = default_case(64);
    assert!(matches!(split(&case.op_eps, 0), Err(Error::Config(_))));
    assert!(matches!(split(&case.op_eps, 4), Err(Error::Config(_))));
}
