use robust_la::benchmarks::{build_bending, build_truss, BendingConfig, TrussConfig};
use robust_la::criteria::StrengthCriterion;
use robust_la::limit_analysis::*;
use robust_la::linalg::{DenseMatrix, SparseMatrix, Triplets};
use robust_la::reformulate::Method;
use robust_la::solver::simplex::{maximize_inequality, LpOutcome};
use robust_la::solver::{SolveStatus, SolverSettings};
use robust_la::uncertainty::UncertaintySet;
use robust_la::Error;

fn settings() -> SolverSettings {
    SolverSettings::with_tol(1e-9, 200)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-12)
}

fn bending(n: usize, eta: f64, gamma: f64) -> LimitAnalysisProblem {
    build_bending(&BendingConfig::new(n, eta, gamma)).unwrap()
}

/// `max λ` over `H N + λ f = 0`, `|N| ≤ R` by the dense simplex.
fn simplex_limit_load(p: &LimitAnalysisProblem, r: f64) -> f64 {
    let h = p.h.to_dense();
    let (rows, n) = (h.nrows(), h.ncols());
    let mut a = Vec::new();
    let mut b = Vec::new();
    for i in 0..rows {
        let mut row: Vec<f64> = h.row(i).to_vec();
        row.push(p.f_ref[i]);
        a.push(row.clone());
        b.push(0.0);
        a.push(row.iter().map(|v| -v).collect());
        b.push(0.0);
    }
    for j in 0..n {
        for s in [1.0, -1.0] {
            let mut row = vec![0.0; n + 1];
            row[j] = s;
            a.push(row);
            b.push(r);
        }
    }
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    match maximize_inequality(&c, &DenseMatrix::from_rows(&a).unwrap(), &b) {
        LpOutcome::Optimal { value, .. } => value,
        other => panic!("{other:?}"),
    }
}

#[test]
fn nominal_bending_is_the_plastic_moment() {
    let p = bending(4, 0.5, 2.0);
    let s = solve_nominal(&p, &settings()).unwrap();
    // y = ±1/8, ±3/8 and a = 1/4
    assert!(rel(s.lambda, 0.25) < 1e-8, "{}", s.lambda);
    for (i, sig) in s.sigma.iter().enumerate() {
        let expected = if i < 2 { 1.0 } else { -1.0 };
        assert!((sig - expected).abs() < 1e-6);
    }
}

#[test]
fn zero_reference_load_is_unbounded() {
    let mut p = bending(4, 0.5, 1.0);
    p.f_ref = vec![0.0];
    match solve_nominal(&p, &settings()) {
        Err(Error::Solver { status, .. }) => assert_eq!(status, SolveStatus::DualInfeasible),
        other => panic!("{other:?}"),
    }
}

#[test]
fn unsupportable_fixed_load_is_infeasible() {
    let mut p = bending(4, 0.5, 1.0);
    p.f_fix0 = vec![10.0];
    p.f_ref = vec![0.0];
    match solve_nominal(&p, &settings()) {
        Err(Error::Solver { status, .. }) => assert_eq!(status, SolveStatus::PrimalInfeasible),
        other => panic!("{other:?}"),
    }
}

#[test]
fn nominal_truss_matches_simplex_and_crushes_the_vertical_member() {
    let p = build_truss(&TrussConfig::default(), &settings()).unwrap();
    assert_eq!(p.num_equations(), 9);
    assert_eq!(p.num_stresses(), 12);
    assert_eq!(p.f_fix.as_ref().unwrap().ncols(), 8);
    let s = solve_nominal(&p, &settings()).unwrap();
    let oracle = simplex_limit_load(&p, 1.0);
    assert!(rel(s.lambda, oracle) < 1e-7, "{} vs {oracle}", s.lambda);
    // member (2, 3) below the load fails in compression
    assert!((s.sigma[2] + 1.0).abs() < 1e-6, "{:?}", s.sigma);
}

#[test]
fn static_rc_examples() {
    for gamma in [0.0, 0.5, 1.0, 2.5, 4.0] {
        for eta in [0.25, 0.9] {
            let p = bending(4, eta, gamma);
            let expected = (1.0 - eta * gamma.min(1.0)) * 0.25;
            for m in [Method::Homothetic, Method::VertexExact, Method::Roos] {
                let s = solve_static_rc(&p, m, &settings()).unwrap();
                assert!((s.lambda - expected).abs() < 1e-7, "{m:?} Γ={gamma} η={eta}: {}", s.lambda);
            }
        }
    }
    // box of size Γ/n
    let (n, eta, gamma) = (4, 0.6, 3.0);
    let mut p = bending(n, eta, gamma);
    p.set = Some(UncertaintySet::box_set(n).unwrap().with_radius(gamma / n as f64).unwrap());
    let s = solve_static_rc(&p, Method::BertsimasSim, &settings()).unwrap();
    assert!(rel(s.lambda, (1.0 - eta * gamma / n as f64) * 0.25) < 1e-7);
    let truss = build_truss(&TrussConfig::default().with_alpha(0.1), &settings()).unwrap();
    assert!(matches!(solve_static_rc(&truss, Method::Roos, &settings()), Err(Error::InvalidInput(_))));
}

#[test]
fn aarc_examples() {
    for eta in [0.25, 0.75] {
        let full = solve_aarc(&bending(4, eta, 4.0), Method::Roos, &settings()).unwrap();
        assert!(rel(full.lambda, (1.0 - eta) * 0.25) < 1e-6, "{}", full.lambda);
        let none = solve_aarc(&bending(4, eta, 0.0), Method::Roos, &settings()).unwrap();
        assert!(rel(none.lambda, 0.25) < 1e-6);
    }
    let mut p = bending(4, 0.5, 2.0);
    p.strength_uncertainty.clear();
    p.set = None;
    let s = solve_aarc(&p, Method::VertexExact, &settings()).unwrap();
    assert!(rel(s.lambda, 0.25) < 1e-7);
    assert_eq!(s.rule.sigma_cols.ncols(), 0);
    let truss = build_truss(&TrussConfig::default(), &settings()).unwrap();
    let nominal = solve_nominal(&truss, &settings()).unwrap().lambda;
    let s = solve_aarc(&truss, Method::Roos, &settings()).unwrap();
    assert!(rel(s.lambda, nominal) < 1e-6);
    assert!(matches!(solve_aarc(&truss, Method::Homothetic, &settings()), Err(Error::InvalidInput(_))));
}

#[test]
fn evaluate_at_examples() {
    let (n, eta, gamma) = (4, 0.5, 2.0);
    let p = bending(n, eta, gamma);
    let s = evaluate_at(&p, &[0.0; 4], &settings()).unwrap();
    assert!(rel(s.lambda, 0.25) < 1e-8);
    let s = evaluate_at(&p, &[gamma / n as f64; 4], &settings()).unwrap();
    assert!(rel(s.lambda, (1.0 - eta * gamma / n as f64) * 0.25) < 1e-7);
    assert!(matches!(evaluate_at(&p, &[1.0; 4], &settings()), Err(Error::InvalidInput(_))));
    assert!(matches!(evaluate_at(&p, &[0.0; 3], &settings()), Err(Error::DimensionMismatch(_))));
}

#[test]
fn infeasible_realization_carries_a_certificate() {
    // bar 0 carries the reference load, bar 1 alone holds a fixed load that
    // the degraded bar cannot carry
    let mut h = Triplets::new(2, 2);
    h.push(0, 0, 1.0);
    h.push(1, 1, 1.0);
    let bar = StrengthCriterion::interval(1.0).unwrap();
    let p = LimitAnalysisProblem {
        h: SparseMatrix::from_triplets(&h).unwrap(),
        f_ref: vec![1.0, 0.0],
        f_fix0: vec![0.0, 0.8],
        f_fix: None,
        elements: vec![
            Element {
                indices: vec![0],
                criterion: bar.clone(),
            },
            Element {
                indices: vec![1],
                criterion: bar,
            },
        ],
        strength_uncertainty: vec![StrengthUncertainty {
            element: 1,
            sigma: DenseMatrix::zeros(1, 1),
            b: vec![0.5],
        }],
        extra_equalities: Vec::new(),
        set: Some(UncertaintySet::box_set(1).unwrap()),
    };
    let s = evaluate_at(&p, &[1.0], &settings()).unwrap();
    assert_eq!(s.status, SolveStatus::PrimalInfeasible);
    assert_eq!(s.lambda, f64::NEG_INFINITY);
    assert!(s.certificate.is_some());
    let v = worst_case_vertex_oracle(&p, &settings()).unwrap();
    assert_eq!(v.stats.min, f64::NEG_INFINITY);
    assert_eq!(v.stats.infeasible, 1);
    assert_eq!(v.argmin_vertex, vec![1.0]);
    // the sentinel survives a JSON round trip
    let back: VertexOracle = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(back, v);
}

#[test]
fn vertex_oracle_examples() {
    let p = bending(4, 0.5, 0.0);
    let v = worst_case_vertex_oracle(&p, &settings()).unwrap();
    assert_eq!(v.lambdas.len(), 1);
    assert_eq!(v.argmin_vertex, vec![0.0; 4]);
    assert!(rel(v.lambda_min, 0.25) < 1e-8);
    for gamma in [1.0, 1.5, 2.0, 3.0] {
        let p = bending(4, 0.75, gamma);
        let v = worst_case_vertex_oracle(&p, &settings()).unwrap();
        let a = solve_aarc(&p, Method::VertexExact, &settings()).unwrap();
        assert!(rel(a.lambda, v.lambda_min) < 1e-6, "Γ={gamma}: {} vs {}", a.lambda, v.lambda_min);
        assert!(v.stats.min <= v.stats.mean && v.stats.mean <= v.stats.max);
    }
}

#[test]
fn sampling_oracle_examples() {
    let p = bending(4, 0.5, 2.0);
    let a = worst_case_sampling_oracle(&p, 3, 20, &settings()).unwrap();
    let b = worst_case_sampling_oracle(&p, 3, 20, &settings()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.samples.len(), 20);
    for z in &a.samples {
        assert!(p.set.as_ref().unwrap().membership(z, 1e-8).unwrap());
    }
    let aarc = solve_aarc(&p, Method::Roos, &settings()).unwrap().lambda;
    assert!(a.stats.min >= aarc - 1e-6);
    // Γ = 0 projects every sample onto ζ = 0
    let p0 = bending(4, 0.5, 0.0);
    let s = worst_case_sampling_oracle(&p0, 1, 1, &settings()).unwrap();
    assert_eq!(s.samples, vec![vec![0.0; 4]]);
    assert!(rel(s.stats.min, 0.25) < 1e-8);
}

#[test]
fn sampling_mean_tracks_the_uniform_realization() {
    let cfg = BendingConfig::new(20, 0.5, 10.0);
    let p = build_bending(&cfg).unwrap();
    let s = worst_case_sampling_oracle(&p, 5, 40, &settings()).unwrap();
    let mean_zeta: f64 = s.samples.iter().flatten().sum::<f64>() / (20.0 * 40.0);
    let uniform = evaluate_at(&p, &[mean_zeta; 20], &settings()).unwrap().lambda;
    assert!(rel(s.stats.mean, uniform) < 0.05, "{} vs {uniform}", s.stats.mean);
}

#[test]
fn rule_replay_on_bending_and_truss() {
    let problems = [
        bending(4, 0.75, 2.5),
        build_bending(&BendingConfig::new(6, 0.5, 2.0).zero_average()).unwrap(),
        build_truss(&TrussConfig::default().with_alpha(0.1), &settings()).unwrap(),
    ];
    for p in problems {
        let s = solve_aarc(&p, Method::Roos, &settings()).unwrap();
        let zetas = p.set.as_ref().unwrap().sample(17, 200).unwrap();
        let r = replay_rule(&p, &s.rule, &zetas).unwrap();
        assert!(r.equilibrium_residual <= 1e-9, "{r:?}");
        assert!(r.strength <= 1.0 + 1e-6, "{r:?}");
        assert!(r.lambda_gap <= 1e-8, "{r:?}");
    }
}

/// Two von Mises elements sharing a load, with stress-space uncertainty.
fn conic_toy(set: UncertaintySet) -> LimitAnalysisProblem {
    let mut h = Triplets::new(2, 4);
    h.push(0, 0, 1.0);
    h.push(0, 2, 1.0);
    h.push(1, 1, 1.0);
    h.push(1, 3, -0.5);
    let vm = StrengthCriterion::plane_stress_von_mises(1.0).unwrap();
    let m = set.dim();
    LimitAnalysisProblem {
        h: SparseMatrix::from_triplets(&h).unwrap(),
        f_ref: vec![-1.0, -0.3],
        f_fix0: Vec::new(),
        f_fix: None,
        elements: vec![
            Element {
                indices: vec![0, 1],
                criterion: vm.clone(),
            },
            Element {
                indices: vec![2, 3],
                criterion: vm,
            },
        ],
        strength_uncertainty: vec![StrengthUncertainty {
            element: 0,
            sigma: DenseMatrix::from_cols(2, &(0..m).map(|j| vec![0.2 * (j + 1) as f64, -0.1]).collect::<Vec<_>>()),
            b: vec![0.05; m],
        }],
        extra_equalities: Vec::new(),
        set: Some(set),
    }
}

#[test]
fn reformulation_dominance_on_a_conic_instance() {
    for set in [UncertaintySet::box_set(2).unwrap(), UncertaintySet::cross_polytope(2).unwrap(), UncertaintySet::budget(3, 1.5).unwrap()] {
        let p = conic_toy(set.clone());
        let bs = solve_aarc(&p, Method::BertsimasSim, &settings()).unwrap().lambda;
        let roos = solve_aarc(&p, Method::Roos, &settings()).unwrap().lambda;
        let ve = solve_aarc(&p, Method::VertexExact, &settings()).unwrap().lambda;
        assert!(bs <= roos + 1e-6 && roos <= ve + 1e-6, "{:?}: {bs} {roos} {ve}", set.kind());
        let rc = solve_static_rc(&p, Method::VertexExact, &settings()).unwrap().lambda;
        let v = worst_case_vertex_oracle(&p, &settings()).unwrap();
        let n = solve_nominal(&p, &settings()).unwrap().lambda;
        assert!(ordering_holds(rc, ve, v.lambda_min, n, 1e-6), "{rc} {ve} {} {n}", v.lambda_min);
    }
}

#[test]
fn ordering_chain_on_bending() {
    for gamma in [0.0, 0.5, 1.5, 3.0, 4.0] {
        let p = bending(4, 0.9, gamma);
        let n = solve_nominal(&p, &settings()).unwrap().lambda;
        let rc = solve_static_rc(&p, Method::Roos, &settings()).unwrap().lambda;
        let a = solve_aarc(&p, Method::Roos, &settings()).unwrap().lambda;
        let v = worst_case_vertex_oracle(&p, &settings()).unwrap().lambda_min;
        assert!(ordering_holds(rc, a, v, n, 1e-6), "Γ={gamma}: {rc} {a} {v} {n}");
    }
}

#[test]
fn validation_rejects_inconsistent_problems() {
    let good = bending(4, 0.5, 1.0);
    let mut p = good.clone();
    p.elements.pop();
    assert!(matches!(p.validate(), Err(Error::InvalidInput(_))));
    let mut p = good.clone();
    p.elements[1].indices = vec![0];
    assert!(p.validate().is_err());
    let mut p = good.clone();
    p.f_ref = vec![1.0, 2.0];
    assert!(matches!(p.validate(), Err(Error::DimensionMismatch(_))));
    let mut p = good.clone();
    p.strength_uncertainty[0].b = vec![0.0; 3];
    assert!(matches!(p.validate(), Err(Error::DimensionMismatch(_))));
    let mut p = good;
    p.set = None;
    assert!(p.validate().is_err());
}

#[test]
fn problem_and_results_round_trip_through_json() {
    let p = build_truss(&TrussConfig::default().with_alpha(0.05), &settings()).unwrap();
    let back = LimitAnalysisProblem::from_json(&p.to_json()).unwrap();
    assert_eq!(back, p);
    let s = solve_aarc(&p, Method::Roos, &settings()).unwrap();
    let back: AarcSolution = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
    assert_eq!(back, s);
    let err = LimitAnalysisProblem::from_json("{\"H\": 3}").unwrap_err();
    assert!(matches!(err, Error::Json(_)));
}

#[test]
fn par_map_keeps_order() {
    let items: Vec<usize> = (0..97).collect();
    let out = par_map(&items, |i| i * 2);
    assert_eq!(out, items.iter().map(|i| i * 2).collect::<Vec<_>>());
    assert!(worker_count() >= 1);
}

#[test]
fn default_tolerance_bounds_the_objective_error() {
    // a hundred fibers each within the residual tolerance used to add up to 1e-6
    let s = SolverSettings::default();
    let l = solve_nominal(&bending(100, 0.9, 0.0), &s).unwrap().lambda;
    assert!(rel(l, 0.25) < 1e-8, "{l}");
}

#[test]
fn near_collapse_realizations_are_classified() {
    let s = SolverSettings::default();
    for (alpha, vertex) in [(0.23, 0usize), (0.23, 1), (0.28, 72), (0.3, 64)] {
        let p = build_truss(&TrussConfig::default().with_alpha(alpha), &s).unwrap();
        let z = p.set.as_ref().unwrap().vertices().unwrap()[vertex].clone();
        let r = evaluate_at(&p, &z, &s).unwrap();
        assert!(matches!(r.status, SolveStatus::Optimal | SolveStatus::PrimalInfeasible), "α={alpha}: {:?}", r.status);
    }
}
