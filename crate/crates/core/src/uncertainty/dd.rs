//! Double-description vertex enumeration for bounded polyhedra
//! `{x : A x ≤ b}`.
//!
//! The polyhedron is homogenized to the cone `{(t, x) : b t - A x ≥ 0, t ≥ 0}`
//! whose extreme rays with `t > 0` are the vertices. Constraints are added one
//! at a time and adjacency uses the combinatorial test.

use crate::linalg::{rank, solve_dense, DenseMatrix};

const ZERO_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
struct Ray {
    v: Vec<f64>,
    /// Indices of processed constraints that are tight at this ray.
    zero: Vec<u64>,
}

fn bit_set(bits: &mut [u64], k: usize) {
    bits[k / 64] |= 1 << (k % 64);
}

fn is_subset(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

fn intersect(a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter().zip(b).map(|(x, y)| x & y).collect()
}

fn popcount(a: &[u64]) -> usize {
    a.iter().map(|x| x.count_ones() as usize).sum()
}

fn normalize(v: &mut [f64]) {
    let s = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    }
}

/// Vertices of the bounded polyhedron `{x : A x ≤ b}`. Returns `None` if the
/// homogenized constraint matrix lacks full column rank (the polyhedron has a
/// lineality space) or a ray with `t = 0` survives (it is unbounded).
pub fn vertices(a: &DenseMatrix, b: &[f64]) -> Option<Vec<Vec<f64>>> {
    let (m, n) = (a.nrows(), a.ncols());
    let d = n + 1;
    // homogenized rows h_i · (t, x) ≥ 0
    let mut rows: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let mut r = Vec::with_capacity(d);
            r.push(b[i]);
            r.extend(a.row(i).iter().map(|v| -v));
            r
        })
        .collect();
    let mut t_row = vec![0.0; d];
    t_row[0] = 1.0;
    rows.push(t_row);
    let total = rows.len();
    let words = total.div_ceil(64);

    // initial basis of d independent rows, chosen greedily
    let mut basis: Vec<usize> = Vec::with_capacity(d);
    let mut order: Vec<usize> = vec![total - 1];
    order.extend(0..m);
    for &k in &order {
        if basis.len() == d {
            break;
        }
        let mut trial: Vec<Vec<f64>> = basis.iter().map(|i| rows[*i].clone()).collect();
        trial.push(rows[k].clone());
        let mat = DenseMatrix::from_rows(&trial).ok()?;
        if rank(&mat, 1e-9) == trial.len() {
            basis.push(k);
        }
    }
    if basis.len() < d {
        return None;
    }
    let hb = DenseMatrix::from_rows(&basis.iter().map(|k| rows[*k].clone()).collect::<Vec<_>>()).ok()?;
    let mut rays: Vec<Ray> = Vec::with_capacity(d);
    for j in 0..d {
        let mut e = vec![0.0; d];
        e[j] = 1.0;
        let mut v = solve_dense(&hb, &e)?;
        normalize(&mut v);
        let mut zero = vec![0u64; words];
        for (jj, k) in basis.iter().enumerate() {
            if jj != j {
                bit_set(&mut zero, *k);
            }
        }
        rays.push(Ray { v, zero });
    }

    let mut processed: Vec<bool> = vec![false; total];
    for k in &basis {
        processed[*k] = true;
    }
    for k in 0..total {
        if processed[k] {
            continue;
        }
        processed[k] = true;
        let h = &rows[k];
        let vals: Vec<f64> = rays.iter().map(|r| crate::linalg::dot(h, &r.v)).collect();
        let (mut pos, mut neg, mut zer) = (Vec::new(), Vec::new(), Vec::new());
        for (i, v) in vals.iter().enumerate() {
            if *v > ZERO_TOL {
                pos.push(i);
            } else if *v < -ZERO_TOL {
                neg.push(i);
            } else {
                zer.push(i);
            }
        }
        if neg.is_empty() {
            for i in zer {
                bit_set(&mut rays[i].zero, k);
            }
            continue;
        }
        let mut next: Vec<Ray> = Vec::with_capacity(pos.len() + zer.len());
        for &i in pos.iter().chain(&zer) {
            let mut r = rays[i].clone();
            if vals[i].abs() <= ZERO_TOL {
                bit_set(&mut r.zero, k);
            }
            next.push(r);
        }
        for &p in &pos {
            for &q in &neg {
                let common = intersect(&rays[p].zero, &rays[q].zero);
                if popcount(&common) + 2 < d {
                    continue;
                }
                let adjacent = rays
                    .iter()
                    .enumerate()
                    .all(|(i, r)| i == p || i == q || !is_subset(&common, &r.zero));
                if !adjacent {
                    continue;
                }
                let (ap, aq) = (vals[p], vals[q]);
                let mut v: Vec<f64> = rays[q].v.iter().zip(&rays[p].v).map(|(x, y)| ap * x - aq * y).collect();
                normalize(&mut v);
                let mut zero = common;
                bit_set(&mut zero, k);
                next.push(Ray { v, zero });
            }
        }
        rays = next;
    }

    let mut out: Vec<Vec<f64>> = Vec::new();
    for r in rays {
        if r.v[0] <= ZERO_TOL {
            if r.v.iter().any(|x| x.abs() > ZERO_TOL) {
                return None;
            }
            continue;
        }
        let x: Vec<f64> = r.v[1..].iter().map(|v| v / r.v[0]).collect();
        if !out.iter().any(|o| o.iter().zip(&x).all(|(a, b)| (a - b).abs() <= 1e-9 * (1.0 + a.abs()))) {
            out.push(x);
        }
    }
    Some(out)
}
