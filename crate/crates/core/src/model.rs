//! Small modelling layer: variables, affine expressions and conic
//! constraints, compiled to a [`ConeProgram`].

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::linalg::{SparseMatrix, Triplets};
use crate::solver::{self, Cone, ConeProgram, SolveReport, SolveStatus, SolverSettings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Var(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Free,
    NonNeg,
}

/// `Σ coef·var + constant`. Terms may repeat; they are summed on use.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LinExpr {
    pub terms: Vec<(Var, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn term(v: Var, a: f64) -> Self {
        Self {
            terms: vec![(v, a)],
            constant: 0.0,
        }
    }

    /// `Σ coefs[k]·vars[k]`, skipping zero coefficients.
    pub fn dot(vars: &[Var], coefs: &[f64]) -> Self {
        debug_assert_eq!(vars.len(), coefs.len());
        Self {
            terms: vars
                .iter()
                .zip(coefs)
                .filter(|(_, a)| **a != 0.0)
                .map(|(v, a)| (*v, *a))
                .collect(),
            constant: 0.0,
        }
    }

    pub fn add_term(&mut self, v: Var, a: f64) {
        if a != 0.0 {
            self.terms.push((v, a));
        }
    }

    /// `self += a * other`
    pub fn add_scaled(&mut self, other: &LinExpr, a: f64) {
        if a == 0.0 {
            return;
        }
        self.terms.extend(other.terms.iter().map(|(v, c)| (*v, a * c)));
        self.constant += a * other.constant;
    }

    pub fn scaled(&self, a: f64) -> LinExpr {
        let mut e = LinExpr::zero();
        e.add_scaled(self, a);
        e
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|(_, a)| *a == 0.0)
    }

    pub fn eval(&self, values: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|(v, a)| a * values[v.0]).sum::<f64>()
    }

    /// Merges repeated variables and drops zero coefficients.
    pub fn simplified(&self) -> LinExpr {
        let mut t = self.terms.clone();
        t.sort_by_key(|(v, _)| *v);
        let mut out: Vec<(Var, f64)> = Vec::with_capacity(t.len());
        for (v, a) in t {
            match out.last_mut() {
                Some((lv, la)) if *lv == v => *la += a,
                _ => out.push((v, a)),
            }
        }
        out.retain(|(_, a)| *a != 0.0);
        LinExpr {
            terms: out,
            constant: self.constant,
        }
    }

    /// `Σ coefs[k]·exprs[k]`.
    pub fn combine(exprs: &[LinExpr], coefs: &[f64]) -> LinExpr {
        let mut e = LinExpr::zero();
        for (x, a) in exprs.iter().zip(coefs) {
            e.add_scaled(x, *a);
        }
        e
    }
}

impl From<Var> for LinExpr {
    fn from(v: Var) -> Self {
        LinExpr::term(v, 1.0)
    }
}

impl From<f64> for LinExpr {
    fn from(c: f64) -> Self {
        LinExpr::constant(c)
    }
}

impl Add for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: LinExpr) -> LinExpr {
        self.add_scaled(&rhs, 1.0);
        self
    }
}

impl Sub for LinExpr {
    type Output = LinExpr;
    fn sub(mut self, rhs: LinExpr) -> LinExpr {
        self.add_scaled(&rhs, -1.0);
        self
    }
}

impl Neg for LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        self.scaled(-1.0)
    }
}

impl Mul<f64> for LinExpr {
    type Output = LinExpr;
    fn mul(self, a: f64) -> LinExpr {
        self.scaled(a)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    /// `expr = 0`
    Eq(LinExpr),
    /// `expr ≥ 0`
    NonNeg(LinExpr),
    /// `‖(e₁, …, e_k)‖₂ ≤ e₀`
    Soc(Vec<LinExpr>),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Model {
    domains: Vec<Domain>,
    constraints: Vec<Constraint>,
    /// Maximized.
    objective: LinExpr,
}

#[derive(Debug, Clone)]
pub struct Compiled {
    pub program: ConeProgram,
    /// Program index of each model variable.
    pub position: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ModelSolution {
    pub status: SolveStatus,
    pub objective: f64,
    pub values: Vec<f64>,
    pub report: SolveReport,
}

impl ModelSolution {
    pub fn value(&self, v: Var) -> f64 {
        self.values[v.0]
    }

    pub fn eval(&self, e: &LinExpr) -> f64 {
        e.eval(&self.values)
    }
}

/// Constant nonnegativity constraints below this are reported infeasible.
const CONSTANT_SLACK: f64 = 1e-12;

impl Model {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, d: Domain) -> Var {
        self.domains.push(d);
        Var(self.domains.len() - 1)
    }

    pub fn add_vars(&mut self, n: usize, d: Domain) -> Vec<Var> {
        (0..n).map(|_| self.add_var(d)).collect()
    }

    pub fn num_vars(&self) -> usize {
        self.domains.len()
    }

    pub fn domain(&self, v: Var) -> Domain {
        self.domains[v.0]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn add_eq(&mut self, e: LinExpr) {
        self.constraints.push(Constraint::Eq(e));
    }

    /// `lhs ≤ rhs`
    pub fn add_le(&mut self, lhs: LinExpr, rhs: LinExpr) {
        self.constraints.push(Constraint::NonNeg(rhs - lhs));
    }

    pub fn add_nonneg(&mut self, e: LinExpr) {
        self.constraints.push(Constraint::NonNeg(e));
    }

    /// `‖rest‖₂ ≤ head`
    pub fn add_soc(&mut self, head: LinExpr, rest: Vec<LinExpr>) {
        let mut v = Vec::with_capacity(rest.len() + 1);
        v.push(head);
        v.extend(rest);
        self.constraints.push(Constraint::Soc(v));
    }

    pub fn set_objective(&mut self, e: LinExpr) {
        self.objective = e;
    }

    pub fn objective(&self) -> &LinExpr {
        &self.objective
    }

    pub fn compile(&self) -> Compiled {
        let nv = self.domains.len();
        let mut position = vec![0usize; nv];
        let free: Vec<usize> = (0..nv).filter(|i| self.domains[*i] == Domain::Free).collect();
        let nonneg: Vec<usize> = (0..nv).filter(|i| self.domains[*i] == Domain::NonNeg).collect();
        for (k, i) in free.iter().enumerate() {
            position[*i] = k;
        }
        for (k, i) in nonneg.iter().enumerate() {
            position[*i] = free.len() + k;
        }

        enum Row<'a> {
            Eq(&'a LinExpr),
            Slack(&'a LinExpr, usize),
            Cone(&'a LinExpr, usize),
            Infeasible,
        }
        let mut rows: Vec<Row> = Vec::new();
        let mut slacks = 0usize;
        for c in &self.constraints {
            match c {
                Constraint::Eq(e) => rows.push(Row::Eq(e)),
                Constraint::NonNeg(e) => {
                    let s = e.simplified();
                    if s.terms.is_empty() {
                        if e.constant < -CONSTANT_SLACK {
                            rows.push(Row::Infeasible);
                        }
                    } else if s.constant == 0.0
                        && s.terms.len() == 1
                        && s.terms[0].1 > 0.0
                        && self.domains[s.terms[0].0 .0] == Domain::NonNeg
                    {
                        // implied by the variable's domain
                    } else {
                        rows.push(Row::Slack(e, slacks));
                        slacks += 1;
                    }
                }
                Constraint::Soc(_) => {}
            }
        }
        let nfixed = free.len() + nonneg.len() + slacks;
        let mut cones = vec![Cone::free(free.len()), Cone::nonneg(nonneg.len() + slacks)];
        let mut next = nfixed;
        for c in &self.constraints {
            if let Constraint::Soc(es) = c {
                for (k, e) in es.iter().enumerate() {
                    rows.push(Row::Cone(e, next + k));
                }
                cones.push(Cone::soc(es.len()));
                next += es.len();
            }
        }
        cones.retain(|c| c.size > 0);
        let n = next;
        let mut t = Triplets::new(rows.len(), n);
        let mut rhs = Vec::with_capacity(rows.len());
        for (i, r) in rows.iter().enumerate() {
            let push_expr = |t: &mut Triplets, e: &LinExpr, sign: f64| {
                for (v, a) in &e.terms {
                    t.push(i, position[v.0], sign * a);
                }
            };
            match r {
                Row::Eq(e) => {
                    push_expr(&mut t, e, 1.0);
                    rhs.push(-e.constant);
                }
                Row::Slack(e, s) => {
                    push_expr(&mut t, e, 1.0);
                    t.push(i, free.len() + nonneg.len() + s, -1.0);
                    rhs.push(-e.constant);
                }
                Row::Cone(e, u) => {
                    push_expr(&mut t, e, -1.0);
                    t.push(i, *u, 1.0);
                    rhs.push(e.constant);
                }
                Row::Infeasible => rhs.push(1.0),
            }
        }
        let mut objective = vec![0.0; n];
        for (v, a) in &self.objective.terms {
            objective[position[v.0]] += a;
        }
        let program = ConeProgram {
            objective,
            eq_matrix: SparseMatrix::from_triplets(&t).expect("model indices are in range"),
            eq_rhs: rhs,
            cones,
            offset: self.objective.constant,
        };
        Compiled { program, position }
    }

    pub fn solve(&self, settings: &SolverSettings) -> ModelSolution {
        let c = self.compile();
        let report = solver::solve_with(&c.program, settings);
        let values = c.position.iter().map(|p| report.x[*p]).collect();
        ModelSolution {
            status: report.status,
            objective: report.objective_value,
            values,
            report,
        }
    }

    /// Checks every constraint at `values` within `tol`.
    pub fn satisfied_by(&self, values: &[f64], tol: f64) -> bool {
        let dom_ok = self
            .domains
            .iter()
            .zip(values)
            .all(|(d, v)| *d == Domain::Free || *v >= -tol);
        dom_ok
            && self.constraints.iter().all(|c| match c {
                Constraint::Eq(e) => e.eval(values).abs() <= tol,
                Constraint::NonNeg(e) => e.eval(values) >= -tol,
                Constraint::Soc(es) => {
                    let head = es[0].eval(values);
                    let tail: Vec<f64> = es[1..].iter().map(|e| e.eval(values)).collect();
                    crate::linalg::norm2(&tail) <= head + tol
                }
            })
    }
}
