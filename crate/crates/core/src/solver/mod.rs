//! Standard-form conic programs and the embedded interior-point solver.
//!
//! A [`ConeProgram`] is `maximize cᵀx + offset s.t. E x = r, x ∈ K` where `K`
//! is a product of free, nonnegative and second-order cones laid out in
//! order. The reported dual `y` satisfies `Eᵀy - c ∈ K*` so that `rᵀy + offset`
//! bounds the primal objective from above.

mod cones;
mod ipm;
pub mod presolve;
pub mod simplex;

use serde::{Deserialize, Serialize};

use crate::linalg::SparseMatrix;

pub use ipm::InteriorPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeKind {
    Free,
    NonNeg,
    SecondOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cone {
    pub kind: ConeKind,
    pub size: usize,
}

impl Cone {
    pub fn free(size: usize) -> Self {
        Self {
            kind: ConeKind::Free,
            size,
        }
    }

    pub fn nonneg(size: usize) -> Self {
        Self {
            kind: ConeKind::NonNeg,
            size,
        }
    }

    pub fn soc(size: usize) -> Self {
        Self {
            kind: ConeKind::SecondOrder,
            size,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeProgram {
    /// Maximized objective `c`.
    pub objective: Vec<f64>,
    pub eq_matrix: SparseMatrix,
    pub eq_rhs: Vec<f64>,
    pub cones: Vec<Cone>,
    /// Constant added to the objective value (set by presolve).
    #[serde(default)]
    pub offset: f64,
}

impl ConeProgram {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.eq_rhs.len()
    }

    pub fn validate(&self) -> Result<(), String> {
        let n = self.objective.len();
        if self.eq_matrix.ncols() != n {
            return Err(format!(
                "eq_matrix has {} columns but the objective has {n} entries",
                self.eq_matrix.ncols()
            ));
        }
        if self.eq_matrix.nrows() != self.eq_rhs.len() {
            return Err(format!(
                "eq_matrix has {} rows but eq_rhs has {} entries",
                self.eq_matrix.nrows(),
                self.eq_rhs.len()
            ));
        }
        let total: usize = self.cones.iter().map(|c| c.size).sum();
        if total != n {
            return Err(format!("cone sizes sum to {total}, expected {n}"));
        }
        if let Some(c) = self
            .cones
            .iter()
            .find(|c| c.kind == ConeKind::SecondOrder && c.size < 2)
        {
            return Err(format!("second-order cone of size {} (minimum 2)", c.size));
        }
        if self.objective.iter().chain(&self.eq_rhs).any(|v| !v.is_finite()) || !self.offset.is_finite() {
            return Err("objective or right-hand side contains non-finite values".into());
        }
        Ok(())
    }

    /// Whether `x` lies in the cone product within `tol`.
    pub fn in_cone(&self, x: &[f64], tol: f64) -> bool {
        let mut start = 0;
        for c in &self.cones {
            let s = &x[start..start + c.size];
            let ok = match c.kind {
                ConeKind::Free => true,
                ConeKind::NonNeg => s.iter().all(|v| *v >= -tol),
                ConeKind::SecondOrder => crate::linalg::norm2(&s[1..]) <= s[0] + tol,
            };
            if !ok {
                return false;
            }
            start += c.size;
        }
        true
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        crate::linalg::dot(&self.objective, x) + self.offset
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("cone programs always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self, crate::Error> {
        let p: Self = serde_json::from_str(s)?;
        p.validate().map_err(crate::Error::InvalidInput)?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    PrimalInfeasible,
    /// Dual infeasible, i.e. the primal is unbounded.
    DualInfeasible,
    MaxIter,
    NumericalFailure,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Dual slack `Eᵀy - c`.
    pub z: Vec<f64>,
    pub objective_value: f64,
    pub dual_objective: f64,
    pub iterations: usize,
    pub residuals: Residuals,
    pub tolerance: f64,
}

impl SolveReport {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub(crate) fn failed(status: SolveStatus, n: usize, p: usize, tol: f64) -> Self {
        let objective_value = match status {
            SolveStatus::PrimalInfeasible => f64::NEG_INFINITY,
            SolveStatus::DualInfeasible => f64::INFINITY,
            _ => f64::NAN,
        };
        Self {
            status,
            x: vec![0.0; n],
            y: vec![0.0; p],
            z: vec![0.0; n],
            objective_value,
            dual_objective: objective_value,
            iterations: 0,
            residuals: Residuals::default(),
            tolerance: tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Relative feasibility and gap tolerance.
    pub tol: f64,
    pub max_iter: usize,
    /// Tolerance on normalized infeasibility certificates.
    pub tol_infeasible: f64,
    pub presolve: bool,
    pub equilibrate: bool,
    /// Static regularization added to the KKT diagonal.
    pub static_reg: f64,
    pub refine_steps: usize,
    pub step_fraction: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 200,
            tol_infeasible: 1e-8,
            presolve: true,
            equilibrate: true,
            static_reg: 1e-9,
            refine_steps: 8,
            step_fraction: 0.99,
        }
    }
}

impl SolverSettings {
    pub fn with_tol(tol: f64, max_iter: usize) -> Self {
        Self {
            tol,
            max_iter,
            ..Self::default()
        }
    }
}

/// Anything able to solve a [`ConeProgram`].
pub trait ConicBackend: Send + Sync {
    fn name(&self) -> &str;
    fn solve(&self, program: &ConeProgram, settings: &SolverSettings) -> SolveReport;
}

/// Solves with the embedded interior-point method and default settings
/// apart from `tol` and `max_iter`.
pub fn solve(program: &ConeProgram, tol: f64, max_iter: usize) -> SolveReport {
    InteriorPoint.solve(program, &SolverSettings::with_tol(tol, max_iter))
}

pub fn solve_with(program: &ConeProgram, settings: &SolverSettings) -> SolveReport {
    InteriorPoint.solve(program, settings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Triplets;

    fn program(rows: &[(usize, usize, f64)], nrows: usize, rhs: Vec<f64>, cones: Vec<Cone>, c: Vec<f64>) -> ConeProgram {
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
    fn bounded_scalar_lp() {
        // max x s.t. x + s = 1, x, s ≥ 0
        let p = program(&[(0, 0, 1.0), (0, 1, 1.0)], 1, vec![1.0], vec![Cone::nonneg(2)], vec![1.0, 0.0]);
        let r = solve(&p, 1e-8, 200);
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.objective_value - 1.0).abs() < 1e-7);
    }

    #[test]
    fn unit_disc() {
        // max x1 + x2 s.t. ‖(x1, x2)‖ ≤ t, t = 1
        let p = program(&[(0, 0, 1.0)], 1, vec![1.0], vec![Cone::soc(3)], vec![0.0, 1.0, 1.0]);
        let r = solve(&p, 1e-8, 200);
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.objective_value - 2f64.sqrt()).abs() < 1e-7, "{r:?}");
        assert!(r.objective_value <= r.dual_objective + 1e-7);
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let p = program(&[(0, 0, 0.1 + 0.2), (0, 2, -1e-17)], 1, vec![1.0 / 3.0], vec![Cone::free(1), Cone::soc(2)], vec![0.7, 1e300, -2.5]);
        let back = ConeProgram::from_json(&p.to_json()).unwrap();
        assert_eq!(p, back);
    }

    #[test]
    fn malformed_program_is_reported() {
        let mut p = program(&[(0, 0, 1.0)], 1, vec![1.0], vec![Cone::nonneg(1)], vec![1.0]);
        p.cones = vec![Cone::nonneg(2)];
        assert!(p.validate().is_err());
        assert_eq!(solve(&p, 1e-8, 10).status, SolveStatus::NumericalFailure);
    }
}
