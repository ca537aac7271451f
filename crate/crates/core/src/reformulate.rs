//! Deterministic counterparts of robust strength constraints
//! `g(σ + Σζ) ≤ 1 − bᵀζ  ∀ζ ∈ U`.
//!
//! Linear atoms (including the halves of `Abs` and `LinfBall` atoms) are
//! robustified exactly through the support function of `U` whatever the
//! method; the methods differ only on conic atoms.

use serde::{Deserialize, Serialize};

use crate::criteria::{constrain_h, AtomKind, ConicAtom, LinearizedAtom, MohrCoulombParams, StrengthCriterion, TracePoint};
use crate::linalg::DenseMatrix;
use crate::model::{Domain, LinExpr, Model, Var};
use crate::solver::{ConeProgram, SolveStatus, SolverSettings};
use crate::uncertainty::{SetKind, UncertaintySet};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Homothetic,
    VertexExact,
    BertsimasSim,
    Roos,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Homothetic => "homothetic",
            Method::VertexExact => "vertex_exact",
            Method::BertsimasSim => "bertsimas_sim",
            Method::Roos => "roos",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "homothetic" => Ok(Method::Homothetic),
            "vertex_exact" | "vertex" => Ok(Method::VertexExact),
            "bertsimas_sim" | "bs" => Ok(Method::BertsimasSim),
            "roos" => Ok(Method::Roos),
            _ => Err(Error::InvalidInput(format!("unknown method {s:?}"))),
        }
    }
}

/// Named group of auxiliary variables introduced by a reformulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarGroup {
    pub name: String,
    pub vars: Vec<Var>,
}

/// Accumulates constraints into a model and records the variable groups.
pub struct Emitter<'m> {
    pub model: &'m mut Model,
    pub groups: Vec<VarGroup>,
}

impl<'m> Emitter<'m> {
    pub fn new(model: &'m mut Model) -> Self {
        Self { model, groups: Vec::new() }
    }

    fn vars(&mut self, name: &str, n: usize, domain: Domain) -> Vec<Var> {
        let vars = self.model.add_vars(n, domain);
        self.groups.push(VarGroup {
            name: name.into(),
            vars: vars.clone(),
        });
        vars
    }
}

fn sub(a: &[LinExpr], b: &[LinExpr]) -> Vec<LinExpr> {
    a.iter().zip(b).map(|(x, y)| x.clone() - y.clone()).collect()
}

fn add_scaled(a: &[LinExpr], b: &[LinExpr], s: f64) -> Vec<LinExpr> {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let mut e = x.clone();
            e.add_scaled(y, s);
            e
        })
        .collect()
}

fn exprs(vars: &[Var]) -> Vec<LinExpr> {
    vars.iter().map(|v| LinExpr::from(*v)).collect()
}

fn constants(v: &[f64]) -> Vec<LinExpr> {
    v.iter().map(|c| LinExpr::constant(*c)).collect()
}

fn unsupported(method: Method, set: &UncertaintySet) -> Error {
    Error::UnsupportedMethod {
        method: method.name().into(),
        set: set.kind().name().into(),
    }
}

/// `π_U(b)`, rejecting sets on which `1 − bᵀζ` can turn negative.
fn worst_homothetic_factor(b: &[f64], set: &UncertaintySet) -> Result<f64> {
    let beta = set.support_function(b)?;
    if beta > 1.0 + 1e-12 {
        return Err(Error::DegenerateCriterion(format!("worst-case factor 1 - π_U(b) = {} < 0", 1.0 - beta)));
    }
    Ok(beta)
}

/// Adds the robust counterpart of every atom of `criterion` for
/// `g(x + Σ cols_j ζ_j) ≤ 1 − bᵀζ`. `cols[j]` is the stress-space column
/// multiplying `ζ_j`; entries may be decision variables.
pub fn emit_robust(
    em: &mut Emitter,
    criterion: &StrengthCriterion,
    x: &[LinExpr],
    cols: &[Vec<LinExpr>],
    b: &[f64],
    set: &UncertaintySet,
    method: Method,
) -> Result<()> {
    let (d, m) = (criterion.stress_dim(), set.dim());
    if x.len() != d || cols.len() != m || cols.iter().any(|c| c.len() != d) || b.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "robust constraint needs x of length {d}, {m} columns of length {d} and b of length {m}"
        )));
    }
    worst_homothetic_factor(b, set)?;
    if method == Method::Homothetic {
        if cols.iter().flatten().any(|e| !e.is_constant() || e.constant != 0.0) {
            return Err(Error::InvalidInput("homothetic counterpart requires Σ = 0".into()));
        }
        let beta = set.support_function(b)?;
        if beta >= 1.0 {
            return Err(Error::DegenerateCriterion(format!("π_U(b) = {beta} ≥ 1 removes all strength")));
        }
        criterion.constrain(em.model, x, LinExpr::constant(1.0 - beta));
        return Ok(());
    }
    for atom in criterion.atoms() {
        for part in atom.split_linear() {
            if part.kind == AtomKind::Linear {
                emit_linear(em, &part, x, cols, b, set)?;
            } else {
                match method {
                    Method::VertexExact => emit_vertex(em, &part, x, cols, b, set)?,
                    Method::BertsimasSim => emit_bertsimas_sim(em, &part, x, cols, b, set)?,
                    Method::Roos => emit_roos(em, &part, x, cols, b, set)?,
                    Method::Homothetic => unreachable!(),
                }
            }
        }
    }
    Ok(())
}

/// `cᵀx + π_U(Σᵀc + βb) ≤ β` for the half-space `cᵀσ ≤ β`.
fn emit_linear(em: &mut Emitter, atom: &ConicAtom, x: &[LinExpr], cols: &[Vec<LinExpr>], b: &[f64], set: &UncertaintySet) -> Result<()> {
    let c = atom.a.row(0);
    let beta = atom.b;
    let z: Vec<LinExpr> = cols
        .iter()
        .zip(b)
        .map(|(col, bj)| {
            let mut e = LinExpr::combine(col, c);
            e.constant += beta * bj;
            e.simplified()
        })
        .collect();
    let bound = LinExpr::constant(beta) - LinExpr::combine(x, c);
    set.constrain_support(em.model, &z, bound)
}

fn emit_vertex(em: &mut Emitter, atom: &ConicAtom, x: &[LinExpr], cols: &[Vec<LinExpr>], b: &[f64], set: &UncertaintySet) -> Result<()> {
    if !set.is_polyhedral() {
        return Err(unsupported(Method::VertexExact, set));
    }
    let data = cols.iter().flatten().all(LinExpr::is_constant);
    let mut seen = std::collections::HashSet::new();
    for v in set.vertices()? {
        if data {
            // identical shifts give identical constraints
            let mut key: Vec<u64> = (0..x.len())
                .map(|k| (cols.iter().zip(&v).map(|(c, z)| c[k].constant * z).sum::<f64>() + 0.0).to_bits())
                .collect();
            key.push((crate::linalg::dot(b, &v) + 0.0).to_bits());
            if !seen.insert(key) {
                continue;
            }
        }
        let mut arg = x.to_vec();
        for (j, zj) in v.iter().enumerate() {
            if *zj != 0.0 {
                arg = add_scaled(&arg, &cols[j], *zj);
            }
        }
        let rhs = 1.0 - crate::linalg::dot(b, &v);
        atom.constrain_gauge(em.model, &arg, LinExpr::constant(rhs));
    }
    Ok(())
}

fn emit_bertsimas_sim(em: &mut Emitter, atom: &ConicAtom, x: &[LinExpr], cols: &[Vec<LinExpr>], b: &[f64], set: &UncertaintySet) -> Result<()> {
    if !matches!(set.kind(), SetKind::Box | SetKind::Ellipsoid | SetKind::CrossPolytope | SetKind::Budget) {
        return Err(unsupported(Method::BertsimasSim, set));
    }
    // s_j = max{g(Σ_j) + b_j, g(−Σ_j) − b_j}; g(x) + π_U(s) ≤ 1
    let mut s = Vec::with_capacity(cols.len());
    for (col, bj) in cols.iter().zip(b) {
        let neg: Vec<LinExpr> = col.iter().map(|e| -e.clone()).collect();
        if col.iter().all(LinExpr::is_constant) {
            let v: Vec<f64> = col.iter().map(|e| e.constant).collect();
            let nv: Vec<f64> = v.iter().map(|t| -t).collect();
            s.push(LinExpr::constant((atom.gauge(&v) + bj).max(atom.gauge(&nv) - bj)));
        } else {
            let sj = em.vars("s", 1, Domain::Free)[0];
            atom.constrain_gauge(em.model, col, LinExpr::from(sj) - LinExpr::constant(*bj));
            atom.constrain_gauge(em.model, &neg, LinExpr::from(sj) + LinExpr::constant(*bj));
            s.push(sj.into());
        }
    }
    let r = em.vars("r", 1, Domain::Free)[0];
    set.constrain_support(em.model, &s, r.into())?;
    atom.constrain_gauge(em.model, x, LinExpr::constant(1.0) - r.into());
    Ok(())
}

fn emit_roos(em: &mut Emitter, atom: &ConicAtom, x: &[LinExpr], cols: &[Vec<LinExpr>], b: &[f64], set: &UncertaintySet) -> Result<()> {
    let d = x.len();
    let m = cols.len();
    let rad = set.radius();
    let scaled: Vec<Vec<LinExpr>> = cols.iter().map(|c| c.iter().map(|e| e.scaled(rad)).collect()).collect();
    match set.kind() {
        SetKind::Box => {
            let w = em.vars("w", m, Domain::Free);
            let wm: Vec<Vec<Var>> = (0..m).map(|_| em.vars("W", d, Domain::Free)).collect();
            let mut rest = x.to_vec();
            let mut budget = LinExpr::constant(1.0);
            for j in 0..m {
                let wj = exprs(&wm[j]);
                rest = sub(&rest, &wj);
                budget.add_term(w[j], -1.0);
                let rb = rad * b[j];
                atom.constrain_gauge(em.model, &sub(&wj, &scaled[j]), LinExpr::from(w[j]) + LinExpr::constant(rb));
                atom.constrain_gauge(em.model, &add_scaled(&wj, &scaled[j], 1.0), LinExpr::from(w[j]) - LinExpr::constant(rb));
            }
            atom.constrain_gauge(em.model, &rest, budget);
        }
        SetKind::CrossPolytope => {
            let w = em.vars("w", 1, Domain::Free)[0];
            let wv = exprs(&em.vars("W", d, Domain::Free));
            for j in 0..m {
                let rb = rad * b[j];
                atom.constrain_gauge(em.model, &sub(&wv, &scaled[j]), LinExpr::from(w) + LinExpr::constant(rb));
                atom.constrain_gauge(em.model, &add_scaled(&wv, &scaled[j], 1.0), LinExpr::from(w) - LinExpr::constant(rb));
            }
            atom.constrain_gauge(em.model, &sub(x, &wv), LinExpr::constant(1.0) - w.into());
        }
        SetKind::Ellipsoid => return Err(Error::NotPolyhedral),
        _ => {
            let p = set.as_polyhedron()?;
            let r = p.num_rows();
            let v = em.vars("v", r, Domain::Free);
            let vm: Vec<Vec<Var>> = (0..r).map(|_| em.vars("V", d, Domain::Free)).collect();
            // g(x − Vd) + dᵀv ≤ 1
            let mut arg = x.to_vec();
            for i in 0..r {
                if p.d[i] != 0.0 {
                    arg = add_scaled(&arg, &exprs(&vm[i]), -p.d[i]);
                }
            }
            atom.constrain_gauge(em.model, &arg, LinExpr::constant(1.0) - LinExpr::dot(&v, &p.d));
            for i in 0..r {
                atom.constrain_gauge(em.model, &exprs(&vm[i]), v[i].into());
            }
            for j in 0..m {
                em.model.add_eq(LinExpr::dot(&v, &p.d1.col(j)) - LinExpr::constant(b[j]));
                for k in 0..d {
                    // (V D1)_{kj} + Σ_{kj} = 0
                    let mut e = cols[j][k].clone();
                    for i in 0..r {
                        e.add_term(vm[i][k], p.d1.row(i)[j]);
                    }
                    em.model.add_eq(e);
                }
            }
            for q in 0..p.num_lifting() {
                em.model.add_eq(LinExpr::dot(&v, &p.d2.col(q)));
                for k in 0..d {
                    let mut e = LinExpr::zero();
                    for i in 0..r {
                        e.add_term(vm[i][k], p.d2.row(i)[q]);
                    }
                    em.model.add_eq(e);
                }
            }
        }
    }
    Ok(())
}

/// `g(σ + Σζ) ≤ 1 − bᵀζ ∀ζ ∈ U` with data `Σ` (d×m) and `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustConstraintSpec {
    pub gauge: StrengthCriterion,
    #[serde(rename = "Sigma")]
    pub sigma: DenseMatrix,
    pub b: Vec<f64>,
    pub set: UncertaintySet,
}

impl RobustConstraintSpec {
    pub fn new(gauge: StrengthCriterion, sigma: DenseMatrix, b: Vec<f64>, set: UncertaintySet) -> Result<Self> {
        let (d, m) = (gauge.stress_dim(), set.dim());
        if sigma.nrows() != d || sigma.ncols() != m || b.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "Σ is {}x{} and b has {} entries; expected {d}x{m} and {m}",
                sigma.nrows(),
                sigma.ncols(),
                b.len()
            )));
        }
        Ok(Self { gauge, sigma, b, set })
    }

    /// Direct evaluation of `g(σ + Σζ) + bᵀζ` for one realization.
    pub fn evaluate(&self, sigma: &[f64], zeta: &[f64]) -> Result<f64> {
        let mut x = sigma.to_vec();
        for (k, xk) in x.iter_mut().enumerate() {
            *xk += crate::linalg::dot(self.sigma.row(k), zeta);
        }
        Ok(self.gauge.gauge_value(&x)? + crate::linalg::dot(&self.b, zeta))
    }

    pub fn block(&self, method: Method) -> Result<ConstraintBlock> {
        let d = self.gauge.stress_dim();
        let mut model = Model::new();
        let sigma = model.add_vars(d, Domain::Free);
        let x = exprs(&sigma);
        let cols: Vec<Vec<LinExpr>> = (0..self.set.dim()).map(|j| constants(&self.sigma.col(j))).collect();
        let mut em = Emitter::new(&mut model);
        emit_robust(&mut em, &self.gauge, &x, &cols, &self.b, &self.set, method)?;
        let mut groups = vec![VarGroup {
            name: "sigma".into(),
            vars: sigma.clone(),
        }];
        groups.extend(em.groups);
        Ok(ConstraintBlock {
            method,
            stress_dim: d,
            model,
            sigma,
            groups,
        })
    }
}

/// A convex constraint system over `σ` and auxiliary variables.
#[derive(Debug, Clone)]
pub struct ConstraintBlock {
    pub method: Method,
    stress_dim: usize,
    model: Model,
    sigma: Vec<Var>,
    groups: Vec<VarGroup>,
}

#[derive(Serialize)]
struct BlockJson<'a> {
    method: Method,
    stress_dim: usize,
    variables: Vec<GroupJson<'a>>,
    program: ConeProgram,
}

#[derive(Serialize)]
struct GroupJson<'a> {
    name: &'a str,
    columns: Vec<usize>,
}

impl ConstraintBlock {
    pub fn stress_dim(&self) -> usize {
        self.stress_dim
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    /// `(name, size)` of each variable group, `sigma` first.
    pub fn variables(&self) -> Vec<(String, usize)> {
        self.groups.iter().map(|g| (g.name.clone(), g.vars.len())).collect()
    }

    pub fn num_constraints(&self) -> usize {
        self.model.constraints().len()
    }

    fn check(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.stress_dim {
            return Err(Error::DimensionMismatch(format!("stress has length {}, expected {}", v.len(), self.stress_dim)));
        }
        Ok(())
    }

    /// Whether some choice of auxiliary variables satisfies the block at `σ`.
    pub fn is_feasible(&self, sigma: &[f64]) -> Result<bool> {
        self.check(sigma)?;
        let mut m = self.model.clone();
        for (v, s) in self.sigma.iter().zip(sigma) {
            m.add_eq(LinExpr::from(*v) - LinExpr::constant(*s));
        }
        match m.solve(&SolverSettings::default()).status {
            SolveStatus::Optimal => Ok(true),
            SolveStatus::PrimalInfeasible => Ok(false),
            status => Err(Error::Solver {
                status,
                context: "block feasibility".into(),
            }),
        }
    }

    /// `max{t : t·u ∈ block}`, `None` when unbounded along `u`.
    pub fn radius_along(&self, u: &[f64]) -> Result<Option<f64>> {
        self.check(u)?;
        let mut m = self.model.clone();
        let t = m.add_var(Domain::Free);
        for (v, uk) in self.sigma.iter().zip(u) {
            m.add_eq(LinExpr::from(*v) - LinExpr::term(t, *uk));
        }
        m.set_objective(t.into());
        let sol = m.solve(&SolverSettings::default());
        match sol.status {
            SolveStatus::Optimal => Ok(Some(sol.objective)),
            SolveStatus::DualInfeasible => Ok(None),
            status => Err(Error::Solver {
                status,
                context: "block radius along a ray".into(),
            }),
        }
    }

    pub fn trace_boundary(&self, directions: usize) -> Result<Vec<TracePoint>> {
        if self.stress_dim != 2 {
            return Err(Error::TraceRequires2D(self.stress_dim));
        }
        if directions < 3 {
            return Err(Error::InvalidInput("tracing needs at least 3 directions".into()));
        }
        crate::criteria::ray_angles(directions)
            .into_iter()
            .map(|theta| {
                let u = [theta.cos(), theta.sin()];
                let r = self.radius_along(&u)?;
                Ok(TracePoint {
                    theta,
                    point: r.map(|r| [r * u[0], r * u[1]]),
                })
            })
            .collect()
    }

    /// The block as a cone-program fragment: variable groups name program
    /// columns of the compiled constraint system (zero objective).
    pub fn to_json(&self) -> String {
        let compiled = self.model.compile();
        let variables = self
            .groups
            .iter()
            .map(|g| GroupJson {
                name: &g.name,
                columns: g.vars.iter().map(|v| compiled.position[v.0]).collect(),
            })
            .collect();
        let out = BlockJson {
            method: self.method,
            stress_dim: self.stress_dim,
            variables,
            program: compiled.program,
        };
        serde_json::to_string_pretty(&out).expect("block serializes")
    }
}

/// `(1 − π_U(b))G`.
pub fn homothetic_rc(criterion: &StrengthCriterion, b: &[f64], set: &UncertaintySet) -> Result<StrengthCriterion> {
    let beta = set.support_function(b)?;
    if beta >= 1.0 {
        return Err(Error::DegenerateCriterion(format!("π_U(b) = {beta} ≥ 1 removes all strength")));
    }
    criterion.homothetic_scale(beta)
}

/// One gauge constraint per vertex of `U`.
pub fn vertex_exact(spec: &RobustConstraintSpec) -> Result<ConstraintBlock> {
    spec.block(Method::VertexExact)
}

pub fn bertsimas_sim(spec: &RobustConstraintSpec) -> Result<ConstraintBlock> {
    spec.block(Method::BertsimasSim)
}

/// Specialized box and cross-polytope forms; the general polyhedral form for
/// other polyhedral sets.
pub fn roos_polyhedral(spec: &RobustConstraintSpec) -> Result<ConstraintBlock> {
    spec.block(Method::Roos)
}

/// Result of an erosion: explicit for vertex enumeration, a block otherwise.
#[derive(Debug, Clone)]
pub enum Eroded {
    Criterion(StrengthCriterion),
    Block(ConstraintBlock),
}

impl Eroded {
    pub fn trace_boundary(&self, directions: usize) -> Result<Vec<TracePoint>> {
        match self {
            Eroded::Criterion(c) => c.trace_boundary(directions),
            Eroded::Block(b) => b.trace_boundary(directions),
        }
    }

    /// Largest `t` with `t·u` in the eroded set, `None` when unbounded.
    pub fn radius_along(&self, u: &[f64]) -> Result<Option<f64>> {
        match self {
            Eroded::Criterion(c) => {
                let g = c.gauge_value(u)?;
                Ok((g > 0.0).then(|| 1.0 / g))
            }
            Eroded::Block(b) => b.radius_along(u),
        }
    }

    pub fn is_member(&self, sigma: &[f64], tol: f64) -> Result<bool> {
        match self {
            Eroded::Criterion(c) => c.membership(sigma, tol),
            Eroded::Block(b) => b.is_feasible(sigma),
        }
    }
}

/// `G ⊖ (scale·U)`: stresses that stay in `G` under every shift of the set.
pub fn erode(criterion: &StrengthCriterion, stress_set: &UncertaintySet, scale: f64, method: Method) -> Result<Eroded> {
    let d = criterion.stress_dim();
    if stress_set.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "stress set has dimension {}, criterion {d}",
            stress_set.dim()
        )));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidInput(format!("erosion scale must be positive, got {scale}")));
    }
    if method == Method::VertexExact {
        let mut atoms = Vec::new();
        for v in stress_set.vertices()? {
            let shift: Vec<f64> = v.iter().map(|x| x * scale).collect();
            atoms.extend(criterion.translated(&shift)?.atoms().iter().cloned());
        }
        let label = format!("{} eroded", criterion.label());
        return Ok(Eroded::Criterion(StrengthCriterion::new(d, atoms, label)?));
    }
    let sigma = DenseMatrix::identity(d).scale(scale);
    let spec = RobustConstraintSpec::new(criterion.clone(), sigma, vec![0.0; d], stress_set.clone())?;
    Ok(Eroded::Block(spec.block(method)?))
}

/// Bertsimas–Sim style counterpart of one parametric atom
/// `h(A(k)σ) ≤ b(k)` linearized along the columns of `K`:
/// `h(A₀σ) − b₀ + π_U(s) ≤ 0`, `s_j ≥ h(±ΔA_jσ) ∓ Δb_j`.
pub fn linearized_parametric_rc(
    kind: AtomKind,
    a0: &DenseMatrix,
    b0: f64,
    da: &[DenseMatrix],
    db: &[f64],
    set: &UncertaintySet,
) -> Result<ConstraintBlock> {
    let (rows, d, m) = (a0.nrows(), a0.ncols(), set.dim());
    if da.len() != m || db.len() != m || da.iter().any(|x| x.nrows() != rows || x.ncols() != d) {
        return Err(Error::DimensionMismatch(format!(
            "need {m} derivative matrices of shape {rows}x{d} and {m} right-hand-side derivatives"
        )));
    }
    if !matches!(set.kind(), SetKind::Box | SetKind::Ellipsoid | SetKind::CrossPolytope | SetKind::Budget) {
        return Err(unsupported(Method::BertsimasSim, set));
    }
    let mut model = Model::new();
    let sigma = model.add_vars(d, Domain::Free);
    let x = exprs(&sigma);
    let apply = |a: &DenseMatrix, s: f64| -> Vec<LinExpr> { (0..rows).map(|i| LinExpr::combine(&x, a.row(i)).scaled(s)).collect() };
    let mut groups = vec![VarGroup {
        name: "sigma".into(),
        vars: sigma.clone(),
    }];
    let mut s = Vec::with_capacity(m);
    for j in 0..m {
        if da[j].is_zero() {
            // h(±0) = 0 for every kind
            s.push(LinExpr::constant(db[j].abs()));
            continue;
        }
        let sj = model.add_var(Domain::Free);
        groups.push(VarGroup {
            name: "s".into(),
            vars: vec![sj],
        });
        constrain_h(&mut model, kind, apply(&da[j], 1.0), LinExpr::from(sj) + LinExpr::constant(db[j]));
        constrain_h(&mut model, kind, apply(&da[j], -1.0), LinExpr::from(sj) - LinExpr::constant(db[j]));
        s.push(sj.into());
    }
    let t = model.add_var(Domain::Free);
    groups.push(VarGroup {
        name: "t".into(),
        vars: vec![t],
    });
    set.constrain_support(&mut model, &s, t.into())?;
    constrain_h(&mut model, kind, apply(a0, 1.0), LinExpr::constant(b0) - t.into());
    Ok(ConstraintBlock {
        method: Method::BertsimasSim,
        stress_dim: d,
        model,
        sigma,
        groups,
    })
}

/// Robust Mohr–Coulomb criterion with tension cut-off in `(σ₁, σ₃)` for
/// `ζ = (ζ_c, ζ_φ, ζ_ft)` in a box, ellipsoid or cross-polytope.
pub fn robust_mohr_coulomb(params: &MohrCoulombParams, set: &UncertaintySet) -> Result<StrengthCriterion> {
    params.validate()?;
    if set.dim() != 3 {
        return Err(Error::DimensionMismatch(format!("Mohr–Coulomb uncertainty has dimension 3, got {}", set.dim())));
    }
    let kind = set.kind();
    if !matches!(kind, SetKind::Box | SetKind::Ellipsoid | SetKind::CrossPolytope) {
        return Err(Error::UnsupportedMethod {
            method: "robust Mohr–Coulomb".into(),
            set: kind.name().into(),
        });
    }
    let [mc, cut] = params.linearization();
    let rad = set.radius();
    // s_j = ΔA_jσ − Δb_j; keep the nonzero components
    let comps: Vec<(Vec<f64>, f64)> = mc
        .da
        .iter()
        .zip(&mc.db)
        .filter(|(a, b)| a.iter().any(|v| *v != 0.0) || **b != 0.0)
        .map(|(a, b)| (a.iter().map(|v| v * rad).collect(), -b * rad))
        .collect();
    let mut atoms = Vec::new();
    let line = |signs: &[(f64, usize)]| -> Result<ConicAtom> {
        let mut a = mc.a0.clone();
        let mut bound = mc.b0;
        for (e, j) in signs {
            crate::linalg::axpy(*e, &comps[*j].0, &mut a);
            bound -= e * comps[*j].1;
        }
        ConicAtom::linear(&a, bound)
    };
    match kind {
        SetKind::Box => {
            let k = comps.len();
            for mask in 0u32..(1 << k) {
                let signs: Vec<(f64, usize)> = (0..k).map(|j| (if mask >> j & 1 == 1 { -1.0 } else { 1.0 }, j)).collect();
                atoms.push(line(&signs)?);
            }
        }
        SetKind::CrossPolytope => {
            for (j, (a, o)) in comps.iter().enumerate() {
                if a.iter().all(|v| *v == 0.0) {
                    atoms.push(line(&[(o.signum(), j)])?);
                } else {
                    atoms.push(line(&[(1.0, j)])?);
                    atoms.push(line(&[(-1.0, j)])?);
                }
            }
            if comps.is_empty() {
                atoms.push(line(&[])?);
            }
        }
        _ => {
            if comps.is_empty() {
                atoms.push(line(&[])?);
            } else {
                let a = DenseMatrix::from_rows(&comps.iter().map(|c| c.0.clone()).collect::<Vec<_>>()).expect("rows");
                let atom = ConicAtom::new(AtomKind::Soc, a, mc.b0)
                    .and_then(|x| x.with_offset(comps.iter().map(|c| c.1).collect()))
                    .and_then(|x| x.with_linear(mc.a0.clone()))?;
                atoms.push(atom);
            }
        }
    }
    let neg_db: Vec<f64> = cut.db.iter().map(|v| -v).collect();
    atoms.push(ConicAtom::linear(&cut.a0, cut.b0 - set.support_function(&neg_db)?)?);
    StrengthCriterion::new(2, atoms, format!("robust_mohr_coulomb({})", kind.name()))
}

/// Realization of a linearized atom list at `ζ` as a criterion.
pub fn linearized_realization(atoms: &[LinearizedAtom], zeta: &[f64]) -> Result<StrengthCriterion> {
    let d = atoms.first().map_or(0, |a| a.a0.len());
    let list = atoms
        .iter()
        .map(|l| {
            let (a, b) = l.realize(zeta);
            ConicAtom::linear(&a, b)
        })
        .collect::<Result<Vec<_>>>()?;
    StrengthCriterion::new(d, list, "realization")
}
