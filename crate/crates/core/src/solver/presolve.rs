//! Removal of fixed variables, empty rows and duplicate rows.
//!
//! A free or nonnegative variable that is the only remaining entry of an
//! equality row is fixed to the value that row forces; the row is dropped and
//! the value folded into the other right-hand sides and the objective offset.
//! Second-order cone members are never fixed.

use std::collections::HashMap;

use super::{Cone, ConeKind, ConeProgram, SolveReport, SolveStatus};
use crate::linalg::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PresolveInfeasible {
    /// Original index of an equality row that cannot be satisfied.
    pub row: usize,
}

#[derive(Debug, Clone)]
pub struct Presolved {
    pub program: ConeProgram,
    original: ConeProgram,
    kept_vars: Vec<usize>,
    kept_rows: Vec<usize>,
    fixed: Vec<Option<f64>>,
    /// `(row, var)` pairs in the order variables were fixed.
    fixing_rows: Vec<(usize, usize)>,
}

fn feas_tol(scale: f64) -> f64 {
    1e-9 * (1.0 + scale.abs())
}

impl Presolved {
    pub fn new(p: &ConeProgram) -> Result<Self, PresolveInfeasible> {
        let n = p.num_vars();
        let m = p.num_rows();
        let mut kind = Vec::with_capacity(n);
        for c in &p.cones {
            kind.extend(std::iter::repeat_n(c.kind, c.size));
        }
        let et = p.eq_matrix.transpose();
        let mut rhs = p.eq_rhs.clone();
        let mut active = vec![true; m];
        let mut fixed: Vec<Option<f64>> = vec![None; n];
        let mut fixing_rows = Vec::new();

        let mut changed = true;
        while changed {
            changed = false;
            for i in 0..m {
                if !active[i] {
                    continue;
                }
                let (cols, vals) = p.eq_matrix.row(i);
                let mut live = cols.iter().zip(vals).filter(|(j, _)| fixed[**j].is_none());
                let first = live.next();
                let second = live.next();
                match (first, second) {
                    (None, _) => {
                        if rhs[i].abs() > feas_tol(p.eq_rhs[i]) {
                            return Err(PresolveInfeasible { row: i });
                        }
                        active[i] = false;
                        changed = true;
                    }
                    (Some((&j, &a)), None) if kind[j] != ConeKind::SecondOrder => {
                        let mut v = rhs[i] / a;
                        if kind[j] == ConeKind::NonNeg {
                            if v < -feas_tol(rhs[i] / a) {
                                return Err(PresolveInfeasible { row: i });
                            }
                            v = v.max(0.0);
                        }
                        fixed[j] = Some(v);
                        active[i] = false;
                        fixing_rows.push((i, j));
                        let (rows, coefs) = et.row(j);
                        for (k, e) in rows.iter().zip(coefs) {
                            rhs[*k] -= e * v;
                        }
                        changed = true;
                    }
                    _ => {}
                }
            }
        }

        // duplicate rows (up to a scale factor) over the remaining variables
        let mut seen: HashMap<Vec<(usize, u64)>, (usize, f64)> = HashMap::new();
        for i in 0..m {
            if !active[i] {
                continue;
            }
            let (cols, vals) = p.eq_matrix.row(i);
            let live: Vec<(usize, f64)> = cols
                .iter()
                .zip(vals)
                .filter(|(j, _)| fixed[**j].is_none())
                .map(|(j, v)| (*j, *v))
                .collect();
            let lead = live[0].1;
            let key: Vec<(usize, u64)> = live.iter().map(|(j, v)| (*j, (v / lead).to_bits())).collect();
            match seen.get(&key) {
                Some(&(first_row, first_lead)) => {
                    let s = lead / first_lead;
                    if (rhs[i] - s * rhs[first_row]).abs() > feas_tol(rhs[i]) {
                        return Err(PresolveInfeasible { row: i });
                    }
                    active[i] = false;
                }
                None => {
                    seen.insert(key, (i, lead));
                }
            }
        }

        let kept_rows: Vec<usize> = (0..m).filter(|i| active[*i]).collect();
        let kept_vars: Vec<usize> = (0..n).filter(|j| fixed[*j].is_none()).collect();
        let mut cones = Vec::new();
        let mut start = 0;
        for c in &p.cones {
            let size = (start..start + c.size).filter(|j| fixed[*j].is_none()).count();
            if size > 0 {
                cones.push(Cone { kind: c.kind, size });
            }
            start += c.size;
        }
        let offset = p.offset
            + fixed
                .iter()
                .zip(&p.objective)
                .filter_map(|(f, c)| f.map(|v| v * c))
                .sum::<f64>();
        let program = ConeProgram {
            objective: kept_vars.iter().map(|j| p.objective[*j]).collect(),
            eq_matrix: p.eq_matrix.select(&kept_rows, &kept_vars),
            eq_rhs: kept_rows.iter().map(|i| rhs[*i]).collect(),
            cones,
            offset,
        };
        Ok(Self {
            program,
            original: p.clone(),
            kept_vars,
            kept_rows,
            fixed,
            fixing_rows,
        })
    }

    pub fn num_fixed(&self) -> usize {
        self.fixed.iter().filter(|f| f.is_some()).count()
    }

    pub fn num_removed_rows(&self) -> usize {
        self.original.num_rows() - self.kept_rows.len()
    }

    /// Maps a report on the reduced program back to the original variables
    /// and rows.
    pub fn postsolve(&self, r: SolveReport) -> SolveReport {
        let n = self.original.num_vars();
        let m = self.original.num_rows();
        let certificate = matches!(r.status, SolveStatus::PrimalInfeasible | SolveStatus::DualInfeasible);
        let mut x = vec![0.0; n];
        for (k, j) in self.kept_vars.iter().enumerate() {
            x[*j] = r.x[k];
        }
        if !certificate {
            for (j, f) in self.fixed.iter().enumerate() {
                if let Some(v) = f {
                    x[j] = *v;
                }
            }
        }
        let mut y = vec![0.0; m];
        for (k, i) in self.kept_rows.iter().enumerate() {
            y[*i] = r.y[k];
        }
        if !certificate {
            // choose the multiplier of each fixing row so that the fixed
            // variable's reduced cost vanishes
            let e = &self.original.eq_matrix;
            let et: SparseMatrix = e.transpose();
            for &(i, j) in self.fixing_rows.iter().rev() {
                let (rows, coefs) = et.row(j);
                let mut acc = self.original.objective[j];
                let mut pivot = 0.0;
                for (k, a) in rows.iter().zip(coefs) {
                    if *k == i {
                        pivot = *a;
                    } else {
                        acc -= a * y[*k];
                    }
                }
                y[i] = acc / pivot;
            }
        }
        let mut z = self.original.eq_matrix.tmul_vec(&y);
        if !certificate {
            for (zj, cj) in z.iter_mut().zip(&self.original.objective) {
                *zj -= cj;
            }
        }
        SolveReport { x, y, z, ..r }
    }
}

/// Returns the reduced program (its `offset` carries the fixed part of the
/// objective).
pub fn presolve(p: &ConeProgram) -> Result<ConeProgram, crate::Error> {
    p.validate().map_err(crate::Error::InvalidInput)?;
    Presolved::new(p).map(|r| r.program).map_err(|e| crate::Error::Solver {
        status: SolveStatus::PrimalInfeasible,
        context: format!("equality row {} cannot be satisfied", e.row),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Triplets;

    fn lp(rows: &[(usize, usize, f64)], nrows: usize, rhs: Vec<f64>, cones: Vec<Cone>, c: Vec<f64>) -> ConeProgram {
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

    #[test]
    fn chain_of_singletons_is_fixed() {
        // x0 = 2, x0 + x1 = 5, x1 + x2 + x3 = 4
        let p = lp(
            &[(0, 0, 1.0), (1, 0, 1.0), (1, 1, 1.0), (2, 1, 1.0), (2, 2, 1.0), (2, 3, 1.0)],
            3,
            vec![2.0, 5.0, 4.0],
            vec![Cone::free(1), Cone::nonneg(3)],
            vec![1.0, 1.0, 2.0, 0.0],
        );
        let r = Presolved::new(&p).unwrap();
        assert_eq!(r.num_fixed(), 2);
        assert_eq!(r.program.num_vars(), 2);
        assert_eq!(r.program.eq_rhs, vec![1.0]);
        assert_eq!(r.program.offset, 5.0);
        assert_eq!(r.program.cones, vec![Cone::nonneg(2)]);
    }

    #[test]
    fn scaled_duplicate_rows_are_merged_or_rejected() {
        let base = [(0, 0, 1.0), (0, 1, 2.0), (1, 0, -2.0), (1, 1, -4.0)];
        let ok = lp(&base, 2, vec![1.0, -2.0], vec![Cone::nonneg(2)], vec![1.0, 0.0]);
        assert_eq!(Presolved::new(&ok).unwrap().program.num_rows(), 1);
        let bad = lp(&base, 2, vec![1.0, 2.0], vec![Cone::nonneg(2)], vec![1.0, 0.0]);
        assert_eq!(Presolved::new(&bad).unwrap_err().row, 1);
    }

    #[test]
    fn negative_fixed_nonneg_is_infeasible() {
        let p = lp(&[(0, 0, 2.0)], 1, vec![-1.0], vec![Cone::nonneg(1)], vec![1.0]);
        assert_eq!(Presolved::new(&p).unwrap_err().row, 0);
        let z = lp(&[], 1, vec![1e-3], vec![Cone::nonneg(1)], vec![1.0]);
        assert!(Presolved::new(&z).is_err());
    }

    #[test]
    fn soc_members_are_kept() {
        let p = lp(&[(0, 0, 1.0)], 1, vec![1.0], vec![Cone::soc(2)], vec![0.0, 1.0]);
        let r = Presolved::new(&p).unwrap();
        assert_eq!(r.num_fixed(), 0);
    }
}
