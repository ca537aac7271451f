//! Dense two-phase simplex with Bland's rule.
//!
//! Independent of the interior-point code; used for polyhedral support
//! functions and membership, and as a cross-check in tests.

use crate::linalg::DenseMatrix;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

const PIVOT_TOL: f64 = 1e-11;

struct Tableau {
    /// `m` constraint rows followed by the objective row; last column is rhs.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let pv = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= pv;
        }
        let prow = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i != r {
                let f = row[c];
                if f != 0.0 {
                    for (v, p) in row.iter_mut().zip(&prow) {
                        *v -= f * p;
                    }
                }
            }
        }
        self.basis[r] = c;
    }

    /// Minimizes the objective row over columns in `allowed`. Returns false
    /// when unbounded.
    fn run(&mut self, allowed: &[bool]) -> bool {
        let m = self.basis.len();
        let rhs = self.ncols;
        loop {
            let obj = &self.t[m];
            let Some(c) = (0..self.ncols).find(|&j| allowed[j] && obj[j] < -PIVOT_TOL) else {
                return true;
            };
            let mut best: Option<(usize, f64)> = None;
            for i in 0..m {
                let a = self.t[i][c];
                if a > PIVOT_TOL {
                    let ratio = self.t[i][rhs] / a;
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - 1e-12 || (ratio <= br + 1e-12 && self.basis[i] < self.basis[bi]) {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            match best {
                None => return false,
                Some((r, _)) => self.pivot(r, c),
            }
        }
    }
}

/// `max cᵀx s.t. A x = b, x ≥ 0`.
pub fn maximize_standard(c: &[f64], a: &DenseMatrix, b: &[f64]) -> LpOutcome {
    let (m, n) = (a.nrows(), a.ncols());
    assert_eq!(c.len(), n);
    assert_eq!(b.len(), m);
    let ncols = n + m;
    let mut t = Vec::with_capacity(m + 1);
    for i in 0..m {
        let s = if b[i] < 0.0 { -1.0 } else { 1.0 };
        let mut row = vec![0.0; ncols + 1];
        for j in 0..n {
            row[j] = s * a[(i, j)];
        }
        row[n + i] = 1.0;
        row[ncols] = s * b[i];
        t.push(row);
    }
    // phase one: minimize the sum of artificials
    let mut obj = vec![0.0; ncols + 1];
    for row in &t {
        for j in 0..n {
            obj[j] -= row[j];
        }
        obj[ncols] -= row[ncols];
    }
    t.push(obj);
    let mut tab = Tableau {
        t,
        basis: (n..n + m).collect(),
        ncols,
    };
    let all = vec![true; ncols];
    tab.run(&all);
    let bnorm = b.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    if -tab.t[m][ncols] > 1e-9 * (1.0 + bnorm) {
        return LpOutcome::Infeasible;
    }
    // drive artificials out of the basis; rows where that fails are redundant
    let mut redundant = vec![false; m];
    for i in 0..m {
        if tab.basis[i] >= n {
            match (0..n).find(|&j| tab.t[i][j].abs() > 1e-9) {
                Some(j) => tab.pivot(i, j),
                None => redundant[i] = true,
            }
        }
    }
    // phase two
    let mut obj = vec![0.0; ncols + 1];
    for j in 0..n {
        obj[j] = -c[j];
    }
    for i in 0..m {
        let bj = tab.basis[i];
        if bj < n && obj[bj] != 0.0 {
            let f = obj[bj];
            for (o, v) in obj.iter_mut().zip(&tab.t[i]) {
                *o -= f * v;
            }
        }
    }
    tab.t[m] = obj;
    for (i, r) in redundant.iter().enumerate() {
        if *r {
            tab.t[i].iter_mut().for_each(|v| *v = 0.0);
        }
    }
    let allowed: Vec<bool> = (0..ncols).map(|j| j < n).collect();
    if !tab.run(&allowed) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![0.0; n];
    for i in 0..m {
        if !redundant[i] && tab.basis[i] < n {
            x[tab.basis[i]] = tab.t[i][ncols];
        }
    }
    let value = crate::linalg::dot(c, &x);
    LpOutcome::Optimal { x, value }
}

/// `max cᵀx s.t. A x ≤ b` with `x` free.
pub fn maximize_inequality(c: &[f64], a: &DenseMatrix, b: &[f64]) -> LpOutcome {
    let (m, n) = (a.nrows(), a.ncols());
    // x = u - v, slack s: [A, -A, I] (u, v, s) = b
    let mut std = DenseMatrix::zeros(m, 2 * n + m);
    for i in 0..m {
        for j in 0..n {
            std[(i, j)] = a[(i, j)];
            std[(i, n + j)] = -a[(i, j)];
        }
        std[(i, 2 * n + i)] = 1.0;
    }
    let mut cc = vec![0.0; 2 * n + m];
    for j in 0..n {
        cc[j] = c[j];
        cc[n + j] = -c[j];
    }
    match maximize_standard(&cc, &std, b) {
        LpOutcome::Optimal { x, value } => LpOutcome::Optimal {
            x: (0..n).map(|j| x[j] - x[n + j]).collect(),
            value,
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_lp() {
        // max 3x + 5y s.t. x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18
        let a = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0]]).unwrap();
        match maximize_inequality(&[3.0, 5.0], &a, &[4.0, 12.0, 18.0]) {
            LpOutcome::Optimal { x, value } => {
                assert!((value - 36.0).abs() < 1e-12);
                assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 6.0).abs() < 1e-12);
            }
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let a = DenseMatrix::from_rows(&[vec![1.0], vec![-1.0]]).unwrap();
        assert_eq!(maximize_inequality(&[1.0], &a, &[-1.0, -1.0]), LpOutcome::Infeasible);
        let a = DenseMatrix::from_rows(&[vec![-1.0]]).unwrap();
        assert_eq!(maximize_inequality(&[1.0], &a, &[0.0]), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_equalities() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap();
        match maximize_standard(&[1.0, 2.0], &a, &[1.0, 2.0]) {
            LpOutcome::Optimal { value, .. } => assert!((value - 2.0).abs() < 1e-12),
            o => panic!("{o:?}"),
        }
    }
}
