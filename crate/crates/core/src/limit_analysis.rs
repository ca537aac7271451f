//! Lower-bound limit analysis on discrete structures: nominal, static robust
//! and affinely adjustable robust load factors, plus realization oracles.
//!
//! Equilibrium is `H σ + λ f_ref + f_fix0 + F_fix ζ = 0`. Strength
//! uncertainty on element `e` reads `g_e(σ_e + Σ_e ζ) ≤ 1 − b_eᵀζ`. Both kinds
//! share one `ζ` and one set.

use serde::{Deserialize, Serialize};

use crate::criteria::StrengthCriterion;
use crate::linalg::{self, DenseMatrix, SparseMatrix};
use crate::model::{Domain, LinExpr, Model, Var};
use crate::reformulate::{emit_robust, Emitter, Method};
use crate::solver::{SolveStatus, SolverSettings};
use crate::uncertainty::UncertaintySet;
use crate::{Error, Result};

/// Serde helpers writing non-finite floats as the strings `"inf"`, `"-inf"`
/// and `"nan"`, which plain JSON cannot carry.
pub mod nonfinite {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    fn to_repr(v: f64) -> Repr {
        if v.is_finite() {
            Repr::Num(v)
        } else if v.is_nan() {
            Repr::Text("nan".into())
        } else if v > 0.0 {
            Repr::Text("inf".into())
        } else {
            Repr::Text("-inf".into())
        }
    }

    fn from_repr<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
        match r {
            Repr::Num(v) => Ok(v),
            Repr::Text(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(E::custom(format!("expected a number, \"inf\", \"-inf\" or \"nan\", got {other:?}"))),
            },
        }
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        to_repr(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        from_repr(Repr::deserialize(d)?)
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(v.iter().map(|x| to_repr(*x)))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            Vec::<Repr>::deserialize(d)?.into_iter().map(from_repr).collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Element {
    /// Positions of the element's generalized stresses in `σ`.
    pub indices: Vec<usize>,
    pub criterion: StrengthCriterion,
}

/// `Σ_e` (d×m) and `b_e` for one element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrengthUncertainty {
    pub element: usize,
    #[serde(rename = "Sigma")]
    pub sigma: DenseMatrix,
    pub b: Vec<f64>,
}

/// `Σ_k coef_k σ_{index_k} = rhs`, imposed on `σ(ζ)` for every `ζ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearEquality {
    pub terms: Vec<(usize, f64)>,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitAnalysisProblem {
    #[serde(rename = "H")]
    pub h: SparseMatrix,
    pub f_ref: Vec<f64>,
    #[serde(default)]
    pub f_fix0: Vec<f64>,
    /// Uncertain fixed-load directions, one column per `ζ_j`.
    #[serde(rename = "F_fix", default, skip_serializing_if = "Option::is_none")]
    pub f_fix: Option<DenseMatrix>,
    pub elements: Vec<Element>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub strength_uncertainty: Vec<StrengthUncertainty>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_equalities: Vec<LinearEquality>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<UncertaintySet>,
}

impl LimitAnalysisProblem {
    pub fn from_json(s: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(s)?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem serializes")
    }

    pub fn num_stresses(&self) -> usize {
        self.h.ncols()
    }

    pub fn num_equations(&self) -> usize {
        self.h.nrows()
    }

    /// Dimension of `ζ`, zero without a set.
    pub fn set_dim(&self) -> usize {
        self.set.as_ref().map_or(0, UncertaintySet::dim)
    }

    pub fn has_loading_uncertainty(&self) -> bool {
        self.f_fix.as_ref().is_some_and(|f| f.ncols() > 0 && !f.is_zero())
    }

    fn fixed_load(&self) -> Vec<f64> {
        if self.f_fix0.is_empty() {
            vec![0.0; self.num_equations()]
        } else {
            self.f_fix0.clone()
        }
    }

    fn uncertainty_of(&self, element: usize) -> Option<&StrengthUncertainty> {
        self.strength_uncertainty.iter().find(|u| u.element == element)
    }

    pub fn validate(&self) -> Result<()> {
        let (r, n, m) = (self.num_equations(), self.num_stresses(), self.set_dim());
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if self.f_ref.len() != r {
            return Err(Error::DimensionMismatch(format!("f_ref has {} entries for {r} equations", self.f_ref.len())));
        }
        if !self.f_fix0.is_empty() && self.f_fix0.len() != r {
            return Err(Error::DimensionMismatch(format!("f_fix0 has {} entries for {r} equations", self.f_fix0.len())));
        }
        if let Some(f) = &self.f_fix {
            if f.ncols() > 0 && (f.nrows() != r || f.ncols() != m) {
                return Err(Error::DimensionMismatch(format!(
                    "F_fix is {}x{}, expected {r}x{m}",
                    f.nrows(),
                    f.ncols()
                )));
            }
        }
        let mut owner = vec![usize::MAX; n];
        for (e, el) in self.elements.iter().enumerate() {
            if el.indices.len() != el.criterion.stress_dim() {
                return Err(Error::DimensionMismatch(format!(
                    "element {e} has {} stresses but its criterion has dimension {}",
                    el.indices.len(),
                    el.criterion.stress_dim()
                )));
            }
            for &i in &el.indices {
                if i >= n {
                    return bad(format!("element {e} refers to stress {i} of {n}"));
                }
                if owner[i] != usize::MAX {
                    return bad(format!("stress {i} belongs to elements {} and {e}", owner[i]));
                }
                owner[i] = e;
            }
        }
        if let Some(i) = owner.iter().position(|o| *o == usize::MAX) {
            return bad(format!("stress {i} belongs to no element"));
        }
        let mut seen = vec![false; self.elements.len()];
        for u in &self.strength_uncertainty {
            if u.element >= self.elements.len() {
                return bad(format!("strength uncertainty refers to element {} of {}", u.element, self.elements.len()));
            }
            if std::mem::replace(&mut seen[u.element], true) {
                return bad(format!("element {} has two strength uncertainty entries", u.element));
            }
            let d = self.elements[u.element].indices.len();
            if u.sigma.nrows() != d || u.sigma.ncols() != m || u.b.len() != m {
                return Err(Error::DimensionMismatch(format!(
                    "strength uncertainty of element {}: Σ is {}x{} and b has {} entries, expected {d}x{m} and {m}",
                    u.element,
                    u.sigma.nrows(),
                    u.sigma.ncols(),
                    u.b.len()
                )));
            }
        }
        if !self.strength_uncertainty.is_empty() && self.set.is_none() {
            return bad("strength uncertainty needs a set".into());
        }
        for (k, eq) in self.extra_equalities.iter().enumerate() {
            if let Some((i, _)) = eq.terms.iter().find(|(i, _)| *i >= n) {
                return bad(format!("extra equality {k} refers to stress {i} of {n}"));
            }
        }
        let finite = self.f_ref.iter().chain(&self.f_fix0).all(|v| v.is_finite());
        if !finite {
            return bad("loads must be finite".into());
        }
        Ok(())
    }

    fn set_ref(&self) -> Result<&UncertaintySet> {
        self.set.as_ref().ok_or_else(|| Error::InvalidInput("problem has no uncertainty set".into()))
    }

    /// Adds `H σ + λ f + load = 0` and the extra equalities with the given
    /// right-hand-side weight (1 for `σ₀`, 0 for the columns `σ_j`).
    fn add_equilibrium(&self, model: &mut Model, sigma: &[Var], lambda: Var, load: &[f64], rhs_weight: f64) {
        for i in 0..self.num_equations() {
            let (cols, vals) = self.h.row(i);
            let mut e = LinExpr::zero();
            for (j, v) in cols.iter().zip(vals) {
                e.add_term(sigma[*j], *v);
            }
            e.add_term(lambda, self.f_ref[i]);
            e.constant += load[i];
            model.add_eq(e.simplified());
        }
        for eq in &self.extra_equalities {
            let mut e = LinExpr::constant(-eq.rhs * rhs_weight);
            for (i, c) in &eq.terms {
                e.add_term(sigma[*i], *c);
            }
            model.add_eq(e.simplified());
        }
    }

    fn slice(&self, sigma: &[Var], e: usize) -> Vec<LinExpr> {
        self.elements[e].indices.iter().map(|i| LinExpr::from(sigma[*i])).collect()
    }
}

/// Outcome of one deterministic limit analysis solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaSolution {
    pub status: SolveStatus,
    #[serde(with = "nonfinite")]
    pub lambda: f64,
    pub sigma: Vec<f64>,
    pub iterations: usize,
    /// Farkas certificate (equality multipliers) when infeasible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Vec<f64>>,
}

fn solve_lambda_model(model: &Model, sigma: &[Var], settings: &SolverSettings) -> LaSolution {
    let sol = model.solve(settings);
    let (lambda, certificate) = match sol.status {
        SolveStatus::Optimal => (sol.objective, None),
        SolveStatus::PrimalInfeasible => (f64::NEG_INFINITY, Some(sol.report.y.clone())),
        SolveStatus::DualInfeasible => (f64::INFINITY, None),
        _ => (f64::NAN, None),
    };
    LaSolution {
        status: sol.status,
        lambda,
        sigma: sigma.iter().map(|v| sol.value(*v)).collect(),
        iterations: sol.report.iterations,
        certificate,
    }
}

fn require_optimal(s: LaSolution, context: &str) -> Result<LaSolution> {
    if s.status == SolveStatus::Optimal {
        Ok(s)
    } else {
        Err(Error::Solver {
            status: s.status,
            context: context.into(),
        })
    }
}

/// Deterministic problem at `ζ`, or at the nominal point when `zeta` is `None`.
fn realization_model(problem: &LimitAnalysisProblem, zeta: Option<&[f64]>) -> (Model, Vec<Var>) {
    let mut model = Model::new();
    let sigma = model.add_vars(problem.num_stresses(), Domain::Free);
    let lambda = model.add_var(Domain::Free);
    let mut load = problem.fixed_load();
    if let (Some(z), Some(f)) = (zeta, &problem.f_fix) {
        if f.ncols() > 0 {
            linalg::axpy(1.0, &f.mul_vec(z), &mut load);
        }
    }
    problem.add_equilibrium(&mut model, &sigma, lambda, &load, 1.0);
    for (e, el) in problem.elements.iter().enumerate() {
        let mut x = problem.slice(&sigma, e);
        let mut t = LinExpr::constant(1.0);
        if let (Some(z), Some(u)) = (zeta, problem.uncertainty_of(e)) {
            for (xk, shift) in x.iter_mut().zip(u.sigma.mul_vec(z)) {
                xk.constant += shift;
            }
            t.constant -= linalg::dot(&u.b, z);
        }
        el.criterion.constrain(&mut model, &x, t);
    }
    model.set_objective(lambda.into());
    (model, sigma)
}

/// `λ_N`: the load factor with every uncertain quantity at `ζ = 0`.
pub fn solve_nominal(problem: &LimitAnalysisProblem, settings: &SolverSettings) -> Result<LaSolution> {
    problem.validate()?;
    let (model, sigma) = realization_model(problem, None);
    require_optimal(solve_lambda_model(&model, &sigma, settings), "nominal limit analysis")
}

/// `λ⁺(ζ)`. Infeasible realizations are returned with `λ = −∞` and a
/// certificate rather than as an error.
pub fn evaluate_at(problem: &LimitAnalysisProblem, zeta: &[f64], settings: &SolverSettings) -> Result<LaSolution> {
    problem.validate()?;
    let set = problem.set_ref()?;
    if zeta.len() != set.dim() {
        return Err(Error::DimensionMismatch(format!("ζ has {} entries, the set has dimension {}", zeta.len(), set.dim())));
    }
    if !set.membership(zeta, 1e-8)? {
        return Err(Error::InvalidInput("ζ lies outside the uncertainty set".into()));
    }
    let (model, sigma) = realization_model(problem, Some(zeta));
    let s = solve_lambda_model(&model, &sigma, settings);
    match s.status {
        SolveStatus::Optimal | SolveStatus::PrimalInfeasible | SolveStatus::DualInfeasible => Ok(s),
        status => Err(Error::Solver {
            status,
            context: "limit analysis at a realization".into(),
        }),
    }
}

/// `λ_RC`: one stress field that is admissible for every `ζ`.
pub fn solve_static_rc(problem: &LimitAnalysisProblem, method: Method, settings: &SolverSettings) -> Result<LaSolution> {
    problem.validate()?;
    if problem.has_loading_uncertainty() {
        return Err(Error::InvalidInput(
            "a static stress field cannot equilibrate uncertain fixed loads; use the adjustable counterpart".into(),
        ));
    }
    let mut model = Model::new();
    let sigma = model.add_vars(problem.num_stresses(), Domain::Free);
    let lambda = model.add_var(Domain::Free);
    problem.add_equilibrium(&mut model, &sigma, lambda, &problem.fixed_load(), 1.0);
    let mut em = Emitter::new(&mut model);
    for (e, el) in problem.elements.iter().enumerate() {
        let x = problem.slice(&sigma, e);
        match problem.uncertainty_of(e) {
            Some(u) => {
                let cols: Vec<Vec<LinExpr>> = (0..u.sigma.ncols())
                    .map(|j| u.sigma.col(j).into_iter().map(LinExpr::constant).collect())
                    .collect();
                emit_robust(&mut em, &el.criterion, &x, &cols, &u.b, problem.set_ref()?, method)?;
            }
            None => el.criterion.constrain(em.model, &x, LinExpr::constant(1.0)),
        }
    }
    model.set_objective(lambda.into());
    require_optimal(solve_lambda_model(&model, &sigma, settings), "static robust limit analysis")
}

/// `σ(ζ) = σ₀ + Σ σ_j ζ_j`, `λ(ζ) = λ₀ + Λᵀζ`, with the guaranteed load
/// factor `λ̄ ≤ λ(ζ)` on the whole set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineDecisionRule {
    pub sigma0: Vec<f64>,
    /// n×m, column `j` is `σ_j`.
    pub sigma_cols: DenseMatrix,
    pub lambda0: f64,
    pub lambda_cols: Vec<f64>,
    pub lambda_bar: f64,
}

impl AffineDecisionRule {
    pub fn sigma_at(&self, zeta: &[f64]) -> Vec<f64> {
        let mut s = self.sigma0.clone();
        if self.sigma_cols.ncols() > 0 {
            linalg::axpy(1.0, &self.sigma_cols.mul_vec(zeta), &mut s);
        }
        s
    }

    pub fn lambda_at(&self, zeta: &[f64]) -> f64 {
        self.lambda0 + linalg::dot(&self.lambda_cols, zeta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AarcSolution {
    pub status: SolveStatus,
    pub lambda: f64,
    pub rule: AffineDecisionRule,
    pub iterations: usize,
}

/// `λ_AARC = max λ̄` over affine rules, with `λ̄ + π_U(−Λ) ≤ λ₀`.
pub fn solve_aarc(problem: &LimitAnalysisProblem, method: Method, settings: &SolverSettings) -> Result<AarcSolution> {
    problem.validate()?;
    if method == Method::Homothetic {
        return Err(Error::InvalidInput(
            "the homothetic counterpart needs constant columns; the adjustable counterpart has variable ones".into(),
        ));
    }
    let n = problem.num_stresses();
    let Some(set) = &problem.set else {
        // nothing to adjust to
        let s = solve_nominal(problem, settings)?;
        return Ok(AarcSolution {
            status: s.status,
            lambda: s.lambda,
            rule: AffineDecisionRule {
                sigma0: s.sigma,
                sigma_cols: DenseMatrix::zeros(n, 0),
                lambda0: s.lambda,
                lambda_cols: Vec::new(),
                lambda_bar: s.lambda,
            },
            iterations: s.iterations,
        });
    };
    let m = set.dim();
    let mut model = Model::new();
    let sigma0 = model.add_vars(n, Domain::Free);
    let lambda0 = model.add_var(Domain::Free);
    let sigma_j: Vec<Vec<Var>> = (0..m).map(|_| model.add_vars(n, Domain::Free)).collect();
    let lambda_j = model.add_vars(m, Domain::Free);
    let lambda_bar = model.add_var(Domain::Free);

    problem.add_equilibrium(&mut model, &sigma0, lambda0, &problem.fixed_load(), 1.0);
    for j in 0..m {
        let load = match &problem.f_fix {
            Some(f) if f.ncols() > 0 => f.col(j),
            _ => vec![0.0; problem.num_equations()],
        };
        problem.add_equilibrium(&mut model, &sigma_j[j], lambda_j[j], &load, 0.0);
    }
    let mut em = Emitter::new(&mut model);
    for (e, el) in problem.elements.iter().enumerate() {
        let x = problem.slice(&sigma0, e);
        let mut cols: Vec<Vec<LinExpr>> = sigma_j.iter().map(|s| problem.slice(s, e)).collect();
        let b = match problem.uncertainty_of(e) {
            Some(u) => {
                for (j, col) in cols.iter_mut().enumerate() {
                    for (k, c) in col.iter_mut().enumerate() {
                        c.constant += u.sigma[(k, j)];
                    }
                }
                u.b.clone()
            }
            None => vec![0.0; m],
        };
        emit_robust(&mut em, &el.criterion, &x, &cols, &b, set, method)?;
    }
    let neg: Vec<LinExpr> = lambda_j.iter().map(|l| LinExpr::term(*l, -1.0)).collect();
    set.constrain_support(&mut model, &neg, LinExpr::from(lambda0) - lambda_bar.into())?;
    model.set_objective(lambda_bar.into());

    let sol = model.solve(settings);
    if sol.status != SolveStatus::Optimal {
        return Err(Error::Solver {
            status: sol.status,
            context: "adjustable robust limit analysis".into(),
        });
    }
    let values = |vs: &[Var]| vs.iter().map(|v| sol.value(*v)).collect::<Vec<f64>>();
    let mut rule = AffineDecisionRule {
        sigma0: values(&sigma0),
        sigma_cols: DenseMatrix::from_cols(n, &sigma_j.iter().map(|s| values(s)).collect::<Vec<_>>()),
        lambda0: sol.value(lambda0),
        lambda_cols: values(&lambda_j),
        lambda_bar: sol.value(lambda_bar),
    };
    polish_rule(problem, &mut rule)?;
    Ok(AarcSolution {
        status: sol.status,
        lambda: rule.lambda_bar,
        rule,
        iterations: sol.report.iterations,
    })
}

/// Removes the interior-point equality residual from every `(σ, λ)` pair by
/// a minimum-norm correction, then tightens `λ̄` to the exact guarantee.
fn polish_rule(problem: &LimitAnalysisProblem, rule: &mut AffineDecisionRule) -> Result<()> {
    let n = problem.num_stresses();
    let (r, q) = (problem.num_equations(), problem.extra_equalities.len());
    // A = [H f_ref; C 0] acting on (σ, λ)
    let mut a = DenseMatrix::zeros(r + q, n + 1);
    for i in 0..r {
        let (cols, vals) = problem.h.row(i);
        for (j, v) in cols.iter().zip(vals) {
            a[(i, *j)] = *v;
        }
        a[(i, n)] = problem.f_ref[i];
    }
    for (k, eq) in problem.extra_equalities.iter().enumerate() {
        for (i, c) in &eq.terms {
            a[(r + k, *i)] += *c;
        }
    }
    let basis = row_basis(&a);
    let project = |x: &mut Vec<f64>, rhs: &[f64]| {
        let ax = a.mul_vec(x);
        let res: Vec<f64> = basis.iter().map(|&i| rhs[i] - ax[i]).collect();
        let rows: Vec<Vec<f64>> = basis.iter().map(|&i| a.row(i).to_vec()).collect();
        let sub = DenseMatrix::from_rows(&rows).expect("rows have equal length");
        let gram = sub.matmul(&sub.transpose());
        if let Some(y) = crate::linalg::solve_dense(&gram, &res) {
            linalg::axpy(1.0, &sub.tmul_vec(&y), x);
        }
    };
    let mut rhs = vec![0.0; r + q];
    for (i, v) in problem.fixed_load().iter().enumerate() {
        rhs[i] = -v;
    }
    for (k, eq) in problem.extra_equalities.iter().enumerate() {
        rhs[r + k] = eq.rhs;
    }
    if !basis.is_empty() {
        let mut x0: Vec<f64> = rule.sigma0.iter().copied().chain([rule.lambda0]).collect();
        project(&mut x0, &rhs);
        rule.lambda0 = x0[n];
        x0.truncate(n);
        rule.sigma0 = x0;
        for j in 0..rule.lambda_cols.len() {
            let mut rj = vec![0.0; r + q];
            if let Some(f) = problem.f_fix.as_ref().filter(|f| f.ncols() > 0) {
                for i in 0..r {
                    rj[i] = -f[(i, j)];
                }
            }
            let mut xj: Vec<f64> = rule.sigma_cols.col(j).into_iter().chain([rule.lambda_cols[j]]).collect();
            project(&mut xj, &rj);
            rule.lambda_cols[j] = xj[n];
            for i in 0..n {
                rule.sigma_cols[(i, j)] = xj[i];
            }
        }
    }
    if let Some(set) = &problem.set {
        let neg: Vec<f64> = rule.lambda_cols.iter().map(|l| -l).collect();
        rule.lambda_bar = rule.lambda_bar.min(rule.lambda0 - set.support_function(&neg)?);
    }
    Ok(())
}

/// Indices of a maximal set of linearly independent rows (modified
/// Gram–Schmidt with a relative drop tolerance).
fn row_basis(a: &DenseMatrix) -> Vec<usize> {
    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut keep = Vec::new();
    for i in 0..a.nrows() {
        let mut v = a.row(i).to_vec();
        let n0 = linalg::norm2(&v);
        if n0 == 0.0 {
            continue;
        }
        for u in &q {
            let c = linalg::dot(u, &v);
            linalg::axpy(-c, u, &mut v);
        }
        let nv = linalg::norm2(&v);
        if nv > 1e-10 * n0 {
            v.iter_mut().for_each(|x| *x /= nv);
            q.push(v);
            keep.push(i);
        }
    }
    keep
}

/// Worker threads for the oracles: `ROBUST_LA_THREADS` when set, otherwise
/// the available parallelism.
pub fn worker_count() -> usize {
    std::env::var("ROBUST_LA_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Maps `f` over `items` on up to [`worker_count`] threads; results keep the
/// input order.
pub fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let threads = worker_count().min(items.len()).max(1);
    if threads == 1 {
        return items.iter().map(f).collect();
    }
    let chunk = items.len().div_ceil(threads);
    std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| {
                let f = &f;
                s.spawn(move || part.iter().map(f).collect::<Vec<R>>())
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("oracle worker panicked")).collect()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleStats {
    /// `−∞` as soon as one realization is infeasible.
    #[serde(with = "nonfinite")]
    pub min: f64,
    /// Mean and max over the feasible realizations.
    #[serde(with = "nonfinite")]
    pub mean: f64,
    #[serde(with = "nonfinite")]
    pub max: f64,
    pub count: usize,
    pub infeasible: usize,
}

impl OracleStats {
    pub fn from_values(values: &[f64]) -> Self {
        let feasible: Vec<f64> = values.iter().copied().filter(|v| *v > f64::NEG_INFINITY).collect();
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let (mean, max) = if feasible.is_empty() {
            (f64::NEG_INFINITY, f64::NEG_INFINITY)
        } else {
            (
                feasible.iter().sum::<f64>() / feasible.len() as f64,
                feasible.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            )
        };
        Self {
            min,
            mean,
            max,
            count: values.len(),
            infeasible: values.len() - feasible.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexOracle {
    #[serde(with = "nonfinite")]
    pub lambda_min: f64,
    /// Lowest vertex index attaining the minimum within `1e-9` relative.
    pub argmin: usize,
    pub argmin_vertex: Vec<f64>,
    pub stats: OracleStats,
    #[serde(with = "nonfinite::vec")]
    pub lambdas: Vec<f64>,
}

fn lambdas_at(problem: &LimitAnalysisProblem, zetas: &[Vec<f64>], settings: &SolverSettings) -> Result<Vec<f64>> {
    par_map(zetas, |z| evaluate_at(problem, z, settings).map(|s| s.lambda))
        .into_iter()
        .collect()
}

/// `λ⁺` at every vertex of the set. The minimum is an upper bound on the
/// adjustable robust load factor, not necessarily equal to it.
pub fn worst_case_vertex_oracle(problem: &LimitAnalysisProblem, settings: &SolverSettings) -> Result<VertexOracle> {
    problem.validate()?;
    let vertices = problem.set_ref()?.vertices()?;
    let lambdas = lambdas_at(problem, &vertices, settings)?;
    let stats = OracleStats::from_values(&lambdas);
    let tie = if stats.min.is_finite() { 1e-9 * stats.min.abs().max(1e-12) } else { 0.0 };
    let argmin = lambdas
        .iter()
        .position(|l| *l <= stats.min + tie)
        .expect("at least one vertex");
    Ok(VertexOracle {
        lambda_min: stats.min,
        argmin,
        argmin_vertex: vertices[argmin].clone(),
        stats,
        lambdas,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingOracle {
    pub stats: OracleStats,
    pub samples: Vec<Vec<f64>>,
    #[serde(with = "nonfinite::vec")]
    pub lambdas: Vec<f64>,
}

/// `λ⁺` on `count` seeded samples projected onto the set.
pub fn worst_case_sampling_oracle(problem: &LimitAnalysisProblem, seed: u64, count: usize, settings: &SolverSettings) -> Result<SamplingOracle> {
    problem.validate()?;
    let samples = problem.set_ref()?.sample(seed, count)?;
    let lambdas = lambdas_at(problem, &samples, settings)?;
    Ok(SamplingOracle {
        stats: OracleStats::from_values(&lambdas),
        samples,
        lambdas,
    })
}

/// Worst deviations of an affine rule over a batch of realizations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuleReplay {
    /// Max-norm residual of equilibrium and extra equalities.
    pub equilibrium_residual: f64,
    /// Largest `g_e(σ_e(ζ) + Σ_e ζ) + b_eᵀζ`.
    pub strength: f64,
    /// Largest `λ̄ − λ(ζ)`.
    pub lambda_gap: f64,
}

pub fn replay_rule(problem: &LimitAnalysisProblem, rule: &AffineDecisionRule, zetas: &[Vec<f64>]) -> Result<RuleReplay> {
    problem.validate()?;
    let mut out = RuleReplay {
        equilibrium_residual: 0.0,
        strength: f64::NEG_INFINITY,
        lambda_gap: f64::NEG_INFINITY,
    };
    let load0 = problem.fixed_load();
    for z in zetas {
        let s = rule.sigma_at(z);
        let lam = rule.lambda_at(z);
        let mut res = problem.h.mul_vec(&s);
        linalg::axpy(lam, &problem.f_ref, &mut res);
        linalg::axpy(1.0, &load0, &mut res);
        if let Some(f) = problem.f_fix.as_ref().filter(|f| f.ncols() > 0) {
            linalg::axpy(1.0, &f.mul_vec(z), &mut res);
        }
        for eq in &problem.extra_equalities {
            res.push(eq.terms.iter().map(|(i, c)| c * s[*i]).sum::<f64>() - eq.rhs);
        }
        out.equilibrium_residual = out.equilibrium_residual.max(linalg::norm_inf(&res));
        for (e, el) in problem.elements.iter().enumerate() {
            let mut x: Vec<f64> = el.indices.iter().map(|i| s[*i]).collect();
            let mut shift = 0.0;
            if let Some(u) = problem.uncertainty_of(e) {
                linalg::axpy(1.0, &u.sigma.mul_vec(z), &mut x);
                shift = linalg::dot(&u.b, z);
            }
            out.strength = out.strength.max(el.criterion.gauge_value(&x)? + shift);
        }
        out.lambda_gap = out.lambda_gap.max(rule.lambda_bar - lam);
    }
    Ok(out)
}

/// `λ_RC ≤ λ_AARC ≤ vertex-min ≤ λ_N`, each step within `tol` relative to `λ_N`.
pub fn ordering_holds(rc: f64, aarc: f64, vertex_min: f64, nominal: f64, tol: f64) -> bool {
    let slack = tol * nominal.abs().max(1.0);
    rc <= aarc + slack && aarc <= vertex_min + slack && vertex_min <= nominal + slack
}
