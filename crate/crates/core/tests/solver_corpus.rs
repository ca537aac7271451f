mod common;

use common::*;
use proptest::prelude::*;
use robust_la::solver::presolve::presolve;
use robust_la::solver::{solve, solve_with, ConeProgram, SolveStatus, SolverSettings};

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

#[test]
fn simplex_oracle_agrees_with_basis_enumeration() {
    for (k, (n, cuts)) in [(2, 3), (3, 4), (4, 6), (5, 5)].iter().enumerate() {
        let (c, a, b) = random_lp(100 + k as u64, *n, *cuts);
        let brute = vertex_enumeration_lp(&c, &a, &b).unwrap();
        match robust_la::solver::simplex::maximize_inequality(&c, &a, &b) {
            robust_la::solver::simplex::LpOutcome::Optimal { value, .. } => {
                assert!((value - brute).abs() < 1e-9, "{value} vs {brute}")
            }
            o => panic!("{o:?}"),
        }
    }
}

#[test]
fn corpus_optima_match_oracles() {
    for case in corpus() {
        let r = solve(&case.program, 1e-8, 200);
        assert_eq!(r.status, SolveStatus::Optimal, "{}: {:?}", case.name, r.residuals);
        let e = rel_err(r.objective_value, case.optimum);
        assert!(e <= 1e-7, "{}: {} vs {} (rel {e:e})", case.name, r.objective_value, case.optimum);
        assert!(case.program.in_cone(&r.x, 1e-7), "{}", case.name);
    }
}

#[test]
fn weak_duality_on_corpus() {
    for case in corpus() {
        let r = solve(&case.program, 1e-8, 200);
        let slack = 10.0 * r.tolerance * r.objective_value.abs().max(1.0);
        assert!(r.objective_value <= r.dual_objective + slack, "{}", case.name);
    }
}

#[test]
fn certificates_detected() {
    for (name, p, expected) in certificate_cases() {
        let r = solve(&p, 1e-8, 200);
        assert_eq!(r.status, expected, "{name}");
        // the same verdict without presolve
        let mut s = SolverSettings::default();
        s.presolve = false;
        assert_eq!(solve_with(&p, &s).status, expected, "{name} (no presolve)");
    }
}

#[test]
fn presolve_preserves_optimal_values() {
    let mut reduced = 0;
    for case in corpus() {
        let pre = presolve(&case.program).unwrap();
        if pre.num_vars() < case.program.num_vars() || pre.num_rows() < case.program.num_rows() {
            reduced += 1;
        }
        let mut s = SolverSettings::default();
        s.presolve = false;
        let a = solve_with(&case.program, &s);
        let b = solve_with(&pre, &s);
        assert!(rel_err(a.objective_value, b.objective_value) <= 1e-7, "{}", case.name);
    }
    assert!(reduced >= 1);
}

#[test]
fn objective_scaling_scales_the_value() {
    for case in corpus() {
        let mut p = case.program.clone();
        p.objective.iter_mut().for_each(|v| *v *= 10.0);
        let a = solve(&case.program, 1e-8, 200);
        let b = solve(&p, 1e-8, 200);
        assert_eq!(a.status, b.status, "{}", case.name);
        assert!(rel_err(b.objective_value, 10.0 * a.objective_value) <= 1e-6, "{}", case.name);
    }
}

#[test]
fn solves_are_deterministic() {
    for case in corpus().into_iter().take(6) {
        let a = solve(&case.program, 1e-8, 200);
        let b = solve(&case.program, 1e-8, 200);
        assert_eq!(a, b);
    }
}

#[test]
fn json_round_trip_of_corpus_is_bit_exact() {
    for case in corpus() {
        let back = ConeProgram::from_json(&case.program.to_json()).unwrap();
        assert_eq!(back, case.program);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn random_lps_match_simplex(seed in 0u64..10_000, n in 2usize..7, cuts in 1usize..9) {
        let (c, a, b) = random_lp(seed, n, cuts);
        let oracle = match robust_la::solver::simplex::maximize_inequality(&c, &a, &b) {
            robust_la::solver::simplex::LpOutcome::Optimal { value, .. } => value,
            o => panic!("{o:?}"),
        };
        let r = solve(&inequality_lp(&c, &a, &b), 1e-8, 200);
        prop_assert_eq!(r.status, SolveStatus::Optimal);
        prop_assert!(rel_err(r.objective_value, oracle) <= 1e-7);
        prop_assert!(r.objective_value <= r.dual_objective + 1e-7 * r.objective_value.abs().max(1.0));
    }
}
