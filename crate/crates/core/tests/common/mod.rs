#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robust_la::linalg::{DenseMatrix, SparseMatrix, Triplets};
use robust_la::solver::simplex::{maximize_inequality, LpOutcome};
use robust_la::solver::{Cone, ConeProgram, SolveStatus};

pub struct Case {
    pub name: String,
    pub program: ConeProgram,
    pub optimum: f64,
}

pub fn program(rows: &[(usize, usize, f64)], nrows: usize, rhs: Vec<f64>, cones: Vec<Cone>, c: Vec<f64>) -> ConeProgram {
    let mut t = Triplets::new(nrows, c.len());
    for (i, j, v) in rows {
        t.push(*i, *j, *v);
    }
    ConeProgram {
        objective: c,
        eq_matrix: SparseMatrix::from_triplets(&t).unwrap(),
        eq_rhs: rhs,
        cones,
        offset: 0.0,
    }
}

/// `max cᵀx s.t. A x ≤ b` as `[x free | s ≥ 0]`, `A x + s = b`.
pub fn inequality_lp(c: &[f64], a: &DenseMatrix, b: &[f64]) -> ConeProgram {
    let (m, n) = (a.nrows(), a.ncols());
    let mut rows = Vec::new();
    for i in 0..m {
        for j in 0..n {
            if a[(i, j)] != 0.0 {
                rows.push((i, j, a[(i, j)]));
            }
        }
        rows.push((i, n + i, 1.0));
    }
    let mut obj = c.to_vec();
    obj.extend(std::iter::repeat_n(0.0, m));
    program(&rows, m, b.to_vec(), vec![Cone::free(n), Cone::nonneg(m)], obj)
}

/// Random bounded LP: `|x_i| ≤ 3` plus random cuts that keep the origin
/// strictly feasible.
pub fn random_lp(seed: u64, n: usize, cuts: usize) -> (Vec<f64>, DenseMatrix, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = 2 * n + cuts;
    let mut a = DenseMatrix::zeros(m, n);
    let mut b = vec![0.0; m];
    for j in 0..n {
        a[(2 * j, j)] = 1.0;
        a[(2 * j + 1, j)] = -1.0;
        b[2 * j] = 3.0;
        b[2 * j + 1] = 3.0;
    }
    for i in 2 * n..m {
        for j in 0..n {
            a[(i, j)] = rng.random_range(-1.0..1.0);
        }
        b[i] = rng.random_range(0.5..2.0);
    }
    let c = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    (c, a, b)
}

/// Brute-force LP oracle: enumerate every basis of `n` active constraints.
pub fn vertex_enumeration_lp(c: &[f64], a: &DenseMatrix, b: &[f64]) -> Option<f64> {
    let (m, n) = (a.nrows(), a.ncols());
    let mut best: Option<f64> = None;
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let sub = DenseMatrix::from_rows(&idx.iter().map(|i| a.row(*i).to_vec()).collect::<Vec<_>>()).unwrap();
        let rhs: Vec<f64> = idx.iter().map(|i| b[*i]).collect();
        if let Some(x) = robust_la::linalg::solve_dense(&sub, &rhs) {
            let ax = a.mul_vec(&x);
            if ax.iter().zip(b).all(|(l, r)| *l <= r + 1e-9) {
                let v = robust_la::linalg::dot(c, &x);
                best = Some(best.map_or(v, |bv: f64| bv.max(v)));
            }
        }
        // next combination
        let mut k = n;
        while k > 0 && idx[k - 1] == m - n + k - 1 {
            k -= 1;
        }
        if k == 0 {
            return best;
        }
        idx[k - 1] += 1;
        for l in k..n {
            idx[l] = idx[l - 1] + 1;
        }
    }
}

fn simplex_value(c: &[f64], a: &DenseMatrix, b: &[f64]) -> f64 {
    match maximize_inequality(c, a, b) {
        LpOutcome::Optimal { value, .. } => value,
        o => panic!("oracle LP not optimal: {o:?}"),
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Twenty LPs and SOCPs with optima from independent oracles (dense
/// simplex or closed-form geometry).
pub fn corpus() -> Vec<Case> {
    let mut cases = Vec::new();
    cases.push(Case {
        name: "scalar_bound".into(),
        program: program(&[(0, 0, 1.0), (0, 1, 1.0)], 1, vec![1.0], vec![Cone::nonneg(2)], vec![1.0, 0.0]),
        optimum: 1.0,
    });
    let a = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0], vec![-1.0, 0.0], vec![0.0, -1.0]]).unwrap();
    let b = [4.0, 12.0, 18.0, 0.0, 0.0];
    cases.push(Case {
        name: "textbook_lp".into(),
        program: inequality_lp(&[3.0, 5.0], &a, &b),
        optimum: 36.0,
    });
    for (k, (n, cuts)) in [(2, 3), (3, 4), (4, 6), (5, 5), (6, 8), (8, 10), (10, 15), (12, 20)].iter().enumerate() {
        let (c, a, b) = random_lp(100 + k as u64, *n, *cuts);
        cases.push(Case {
            name: format!("random_lp_{n}x{cuts}"),
            optimum: simplex_value(&c, &a, &b),
            program: inequality_lp(&c, &a, &b),
        });
    }
    // equality-constrained LP with a duplicated row and fixed variables:
    // max x0 + 2x1 + x2 s.t. x0 + x1 + x2 = 1 (twice), x3 = 2, x2 - x3 = -1.5,
    // x ≥ 0 ⇒ x3 = 2, x2 = 0.5, x1 = 0.5
    cases.push(Case {
        name: "presolve_lp".into(),
        program: program(
            &[
                (0, 0, 1.0),
                (0, 1, 1.0),
                (0, 2, 1.0),
                (1, 0, 2.0),
                (1, 1, 2.0),
                (1, 2, 2.0),
                (2, 3, 1.0),
                (3, 2, 1.0),
                (3, 3, -1.0),
            ],
            4,
            vec![1.0, 2.0, 2.0, -1.5],
            vec![Cone::nonneg(4)],
            vec![1.0, 2.0, 1.0, 0.0],
        ),
        optimum: 1.5,
    });
    // degenerate vertex: many constraints active at the optimum (1, 1)
    let a = DenseMatrix::from_rows(&[
        vec![1.0, 0.0],
        vec![0.0, 1.0],
        vec![1.0, 1.0],
        vec![2.0, 1.0],
        vec![1.0, 2.0],
        vec![-1.0, 0.0],
        vec![0.0, -1.0],
    ])
    .unwrap();
    let b = [1.0, 1.0, 2.0, 3.0, 3.0, 0.0, 0.0];
    cases.push(Case {
        name: "degenerate_lp".into(),
        optimum: simplex_value(&[1.0, 1.0], &a, &b),
        program: inequality_lp(&[1.0, 1.0], &a, &b),
    });
    // max x1 + x2 s.t. ‖(x1, x2)‖ ≤ 1
    cases.push(Case {
        name: "unit_disc".into(),
        program: program(&[(0, 0, 1.0)], 1, vec![1.0], vec![Cone::soc(3)], vec![0.0, 1.0, 1.0]),
        optimum: 2f64.sqrt(),
    });
    // max cᵀx s.t. ‖x - x0‖ ≤ r: optimum cᵀx0 + r‖c‖
    {
        let c = [1.0, -2.0, 0.5, 3.0, -1.0];
        let x0 = [0.3, -1.0, 2.0, 0.0, 1.5];
        let r = 1.7;
        // vars: x (free, 5) | (t, u) soc(6); t = r, u - x = -x0
        let mut rows = vec![(0usize, 5usize, 1.0)];
        for k in 0..5 {
            rows.push((1 + k, 6 + k, 1.0));
            rows.push((1 + k, k, -1.0));
        }
        let mut rhs = vec![r];
        rhs.extend(x0.iter().map(|v| -v));
        let mut obj = c.to_vec();
        obj.extend([0.0; 6]);
        cases.push(Case {
            name: "shifted_ball".into(),
            program: program(&rows, 6, rhs, vec![Cone::free(5), Cone::soc(6)], obj),
            optimum: robust_la::linalg::dot(&c, &x0) + r * norm(&c),
        });
    }
    // distance from p to the plane aᵀx = β: max -t s.t. ‖x - p‖ ≤ t
    {
        let p = [1.0, 2.0, -1.0];
        let a = [1.0, 1.0, 1.0];
        let beta = 5.0;
        let dist = (robust_la::linalg::dot(&a, &p) - beta).abs() / norm(&a);
        // vars: x (3 free) | (t, u) soc(4); u - x = -p; aᵀx = β
        let mut rows = Vec::new();
        for k in 0..3 {
            rows.push((k, 4 + k, 1.0));
            rows.push((k, k, -1.0));
            rows.push((3, k, a[k]));
        }
        let mut rhs: Vec<f64> = p.iter().map(|v| -v).collect();
        rhs.push(beta);
        let mut obj = vec![0.0; 7];
        obj[3] = -1.0;
        cases.push(Case {
            name: "plane_distance".into(),
            program: program(&rows, 4, rhs, vec![Cone::free(3), Cone::soc(4)], obj),
            optimum: -dist,
        });
    }
    // Fermat-type: max -(‖x - a‖ + ‖x - b‖) = -‖a - b‖
    {
        let a = [0.0, 0.0];
        let b = [3.0, 4.0];
        // vars: x (2 free) | (t1, u1) soc3 | (t2, u2) soc3
        let mut rows = Vec::new();
        for k in 0..2 {
            rows.push((k, 3 + k, 1.0));
            rows.push((k, k, -1.0));
            rows.push((2 + k, 6 + k, 1.0));
            rows.push((2 + k, k, -1.0));
        }
        let rhs = vec![-a[0], -a[1], -b[0], -b[1]];
        let mut obj = vec![0.0; 8];
        obj[2] = -1.0;
        obj[5] = -1.0;
        cases.push(Case {
            name: "sum_of_norms".into(),
            program: program(&rows, 4, rhs, vec![Cone::free(2), Cone::soc(3), Cone::soc(3)], obj),
            optimum: -5.0,
        });
    }
    // max cᵀx s.t. ‖x‖ ≤ 1, x ≥ 0: optimum ‖c⁺‖
    {
        let c = [1.0, -2.0, 2.0, -0.5];
        // vars: x (4 nonneg) | (t, u) soc5; t = 1; u - x = 0
        let mut rows = vec![(0, 4, 1.0)];
        for k in 0..4 {
            rows.push((1 + k, 5 + k, 1.0));
            rows.push((1 + k, k, -1.0));
        }
        let mut obj = c.to_vec();
        obj.extend([0.0; 5]);
        let cp: Vec<f64> = c.iter().map(|v: &f64| v.max(0.0)).collect();
        cases.push(Case {
            name: "orthant_ball".into(),
            program: program(&rows, 5, vec![1.0, 0.0, 0.0, 0.0, 0.0], vec![Cone::nonneg(4), Cone::soc(5)], obj),
            optimum: norm(&cp),
        });
    }
    // max cᵀx s.t. ‖L x‖ ≤ 1 with L lower triangular: ‖L⁻ᵀ c‖
    {
        let l = DenseMatrix::from_rows(&[vec![2.0, 0.0, 0.0], vec![1.0, 1.0, 0.0], vec![-0.5, 0.3, 0.7]]).unwrap();
        let c = [1.0, 1.0, -1.0];
        let w = robust_la::linalg::solve_dense(&l.transpose(), &c).unwrap();
        // vars: x (3 free) | (t, u) soc4; t = 1; u - L x = 0
        let mut rows = vec![(0, 3, 1.0)];
        for i in 0..3 {
            rows.push((1 + i, 4 + i, 1.0));
            for j in 0..3 {
                if l[(i, j)] != 0.0 {
                    rows.push((1 + i, j, -l[(i, j)]));
                }
            }
        }
        let mut obj = c.to_vec();
        obj.extend([0.0; 4]);
        cases.push(Case {
            name: "ellipsoid".into(),
            program: program(&rows, 4, vec![1.0, 0.0, 0.0, 0.0], vec![Cone::free(3), Cone::soc(4)], obj),
            optimum: norm(&w),
        });
    }
    // min ‖x‖₁ s.t. aᵀx = 1: optimum 1/‖a‖∞ (as max of the negation)
    {
        let a = [0.5, -4.0, 2.0];
        // vars: x⁺ (3), x⁻ (3) nonneg
        let mut rows = Vec::new();
        for k in 0..3 {
            rows.push((0, k, a[k]));
            rows.push((0, 3 + k, -a[k]));
        }
        cases.push(Case {
            name: "l1_min".into(),
            program: program(&rows, 1, vec![1.0], vec![Cone::nonneg(6)], vec![-1.0; 6]),
            optimum: -0.25,
        });
    }
    // distance from p to the nonnegative orthant: ‖p⁻‖
    {
        let p = [1.0, -3.0, 2.0, -4.0];
        let mut rows = Vec::new();
        for k in 0..4 {
            rows.push((k, 5 + k, 1.0));
            rows.push((k, k, -1.0));
        }
        let mut obj = vec![0.0; 9];
        obj[4] = -1.0;
        cases.push(Case {
            name: "orthant_projection".into(),
            program: program(&rows, 4, p.iter().map(|v| -v).collect(), vec![Cone::nonneg(4), Cone::soc(5)], obj),
            optimum: -5.0,
        });
    }
    assert_eq!(cases.len(), 20);
    cases
}

/// Crafted programs that are infeasible or unbounded.
pub fn certificate_cases() -> Vec<(&'static str, ConeProgram, SolveStatus)> {
    vec![
        (
            "nonneg_sum_negative",
            program(&[(0, 0, 1.0), (0, 1, 1.0)], 1, vec![-1.0], vec![Cone::nonneg(2)], vec![1.0, 1.0]),
            SolveStatus::PrimalInfeasible,
        ),
        (
            "soc_radius_too_small",
            program(&[(0, 0, 1.0), (1, 1, 1.0)], 2, vec![1.0, 2.0], vec![Cone::soc(3)], vec![0.0, 0.0, 1.0]),
            SolveStatus::PrimalInfeasible,
        ),
        (
            "contradictory_cuts",
            // x1 + x2 + s1 = 1, x1 + x2 - s2 = 3
            program(
                &[(0, 0, 1.0), (0, 1, 1.0), (0, 2, 1.0), (1, 0, 1.0), (1, 1, 1.0), (1, 3, -1.0)],
                2,
                vec![1.0, 3.0],
                vec![Cone::free(2), Cone::nonneg(2)],
                vec![1.0, 0.0, 0.0, 0.0],
            ),
            SolveStatus::PrimalInfeasible,
        ),
        (
            "unbounded_ray",
            program(&[(0, 0, 1.0), (0, 1, -1.0)], 1, vec![0.0], vec![Cone::nonneg(2)], vec![1.0, 0.0]),
            SolveStatus::DualInfeasible,
        ),
        (
            "unbounded_cone",
            // max x1 s.t. |x1| ≤ x0, x0 - s = 1 (s ≥ 0)
            program(&[(0, 0, 1.0), (0, 2, -1.0)], 1, vec![1.0], vec![Cone::soc(2), Cone::nonneg(1)], vec![0.0, 1.0, 0.0]),
            SolveStatus::DualInfeasible,
        ),
        (
            "unbounded_free",
            program(&[(0, 0, 1.0), (0, 1, -1.0), (1, 2, 1.0)], 2, vec![1.0, 1.0], vec![Cone::free(2), Cone::nonneg(1)], vec![1.0, 1.0, 0.0]),
            SolveStatus::DualInfeasible,
        ),
    ]
}
