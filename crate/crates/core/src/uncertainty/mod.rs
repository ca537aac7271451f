//! Uncertainty sets: support functions, membership, polyhedral forms, vertex
//! enumeration, projection and sampling.

pub mod dd;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, DenseMatrix};
use crate::model::{Domain, LinExpr, Model};
use crate::solver::simplex::{maximize_inequality, maximize_standard, LpOutcome};
use crate::solver::{SolveStatus, SolverSettings};
use crate::{Error, Result};

/// Default cap on the number of enumerated vertices.
pub const DEFAULT_VERTEX_CAP: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetKind {
    Box,
    Ellipsoid,
    CrossPolytope,
    Budget,
    OneSidedBudget,
    Polyhedron,
}

impl SetKind {
    pub fn name(&self) -> &'static str {
        match self {
            SetKind::Box => "box",
            SetKind::Ellipsoid => "ellipsoid",
            SetKind::CrossPolytope => "cross_polytope",
            SetKind::Budget => "budget",
            SetKind::OneSidedBudget => "one_sided_budget",
            SetKind::Polyhedron => "polyhedron",
        }
    }
}

/// `{ζ : ∃ξ, D1 ζ + D2 ξ ≤ d}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyhedron {
    pub d1: DenseMatrix,
    pub d2: DenseMatrix,
    pub d: Vec<f64>,
}

impl Polyhedron {
    pub fn num_rows(&self) -> usize {
        self.d.len()
    }

    pub fn num_lifting(&self) -> usize {
        self.d2.ncols()
    }

    /// `[D1 D2]` as one matrix.
    pub fn stacked(&self) -> DenseMatrix {
        let (r, m, q) = (self.d.len(), self.d1.ncols(), self.d2.ncols());
        let mut a = DenseMatrix::zeros(r, m + q);
        for i in 0..r {
            a.row_mut(i)[..m].copy_from_slice(self.d1.row(i));
            a.row_mut(i)[m..].copy_from_slice(self.d2.row(i));
        }
        a
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SetJson", into = "SetJson")]
pub struct UncertaintySet {
    kind: SetKind,
    dim: usize,
    radius: f64,
    gamma: f64,
    polyhedron: Option<Polyhedron>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SetJson {
    kind: SetKind,
    dim: usize,
    #[serde(default = "one")]
    radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[serde(rename = "D1", default, skip_serializing_if = "Option::is_none")]
    d1: Option<Vec<Vec<f64>>>,
    #[serde(rename = "D2", default, skip_serializing_if = "Option::is_none")]
    d2: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d: Option<Vec<f64>>,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<SetJson> for UncertaintySet {
    type Error = String;
    fn try_from(j: SetJson) -> std::result::Result<Self, String> {
        let set = match j.kind {
            SetKind::Box => Self::box_set(j.dim),
            SetKind::Ellipsoid => Self::ellipsoid(j.dim),
            SetKind::CrossPolytope => Self::cross_polytope(j.dim),
            SetKind::Budget | SetKind::OneSidedBudget => {
                let g = j.gamma.ok_or("budget sets need \"gamma\"")?;
                if j.kind == SetKind::Budget {
                    Self::budget(j.dim, g)
                } else {
                    Self::one_sided_budget(j.dim, g)
                }
            }
            SetKind::Polyhedron => {
                let d = j.d.ok_or("polyhedron needs \"d\"")?;
                let d1 = DenseMatrix::from_rows(&j.d1.ok_or("polyhedron needs \"D1\"")?)?;
                let d1 = if d1.nrows() == 0 { DenseMatrix::zeros(0, j.dim) } else { d1 };
                let d2 = match j.d2 {
                    Some(rows) if rows.iter().any(|r| !r.is_empty()) => DenseMatrix::from_rows(&rows)?,
                    _ => DenseMatrix::zeros(d.len(), 0),
                };
                Self::polyhedron(d1, d2, d)
            }
        }
        .map_err(|e| e.to_string())?;
        set.with_radius(j.radius).map_err(|e| e.to_string())
    }
}

impl From<UncertaintySet> for SetJson {
    fn from(s: UncertaintySet) -> Self {
        let budget = matches!(s.kind, SetKind::Budget | SetKind::OneSidedBudget);
        let (d1, d2, d) = match s.polyhedron {
            Some(p) => (Some(p.d1.to_rows()), Some(p.d2.to_rows()), Some(p.d)),
            None => (None, None, None),
        };
        SetJson {
            kind: s.kind,
            dim: s.dim,
            radius: s.radius,
            gamma: budget.then_some(s.gamma),
            d1,
            d2,
            d,
        }
    }
}

fn dim_check(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::DimensionMismatch(format!("{what} has length {got}, expected {want}")));
    }
    Ok(())
}

fn choose(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl UncertaintySet {
    fn simple(kind: SetKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("uncertainty dimension must be at least 1".into()));
        }
        Ok(Self {
            kind,
            dim,
            radius: 1.0,
            gamma: 0.0,
            polyhedron: None,
        })
    }

    /// Unit ℓ∞ ball.
    pub fn box_set(dim: usize) -> Result<Self> {
        Self::simple(SetKind::Box, dim)
    }

    /// Unit ℓ2 ball.
    pub fn ellipsoid(dim: usize) -> Result<Self> {
        Self::simple(SetKind::Ellipsoid, dim)
    }

    /// Unit ℓ1 ball.
    pub fn cross_polytope(dim: usize) -> Result<Self> {
        Self::simple(SetKind::CrossPolytope, dim)
    }

    /// `{‖ζ‖∞ ≤ 1, ‖ζ‖₁ ≤ Γ}`.
    pub fn budget(dim: usize, gamma: f64) -> Result<Self> {
        let mut s = Self::simple(SetKind::Budget, dim)?;
        s.set_gamma(gamma)?;
        Ok(s)
    }

    /// `{0 ≤ ζ ≤ 1, Σζ ≤ Γ}`.
    pub fn one_sided_budget(dim: usize, gamma: f64) -> Result<Self> {
        let mut s = Self::simple(SetKind::OneSidedBudget, dim)?;
        s.set_gamma(gamma)?;
        Ok(s)
    }

    fn set_gamma(&mut self, gamma: f64) -> Result<()> {
        if !(0.0..=self.dim as f64).contains(&gamma) {
            return Err(Error::InvalidInput(format!("gamma = {gamma} outside [0, {}]", self.dim)));
        }
        self.gamma = gamma;
        Ok(())
    }

    /// `{ζ : ∃ξ, D1 ζ + D2 ξ ≤ d}`; must be bounded and contain the origin.
    pub fn polyhedron(d1: DenseMatrix, d2: DenseMatrix, d: Vec<f64>) -> Result<Self> {
        let dim = d1.ncols();
        if d1.nrows() != d.len() || d2.nrows() != d.len() {
            return Err(Error::DimensionMismatch(format!(
                "D1 has {} rows, D2 has {} rows, d has {} entries",
                d1.nrows(),
                d2.nrows(),
                d.len()
            )));
        }
        if d1.as_slice().iter().chain(d2.as_slice()).chain(&d).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("polyhedron data must be finite".into()));
        }
        let mut s = Self::simple(SetKind::Polyhedron, dim)?;
        s.polyhedron = Some(Polyhedron { d1, d2, d });
        if !s.membership(&vec![0.0; dim], 1e-12)? {
            return Err(Error::InvalidInput("polyhedron does not contain the origin".into()));
        }
        for j in 0..dim {
            for sgn in [1.0, -1.0] {
                let mut z = vec![0.0; dim];
                z[j] = sgn;
                s.support_function(&z)?;
            }
        }
        Ok(s)
    }

    pub fn with_radius(mut self, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidInput(format!("radius must be positive, got {radius}")));
        }
        self.radius = radius;
        Ok(self)
    }

    pub fn kind(&self) -> SetKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn is_polyhedral(&self) -> bool {
        self.kind != SetKind::Ellipsoid
    }

    /// Whether `-ζ ∈ U` for every `ζ ∈ U`.
    pub fn is_symmetric(&self) -> bool {
        !matches!(self.kind, SetKind::OneSidedBudget | SetKind::Polyhedron)
    }

    /// `π_U(z) = sup{zᵀζ : ζ ∈ U}`.
    pub fn support_function(&self, z: &[f64]) -> Result<f64> {
        dim_check("direction", z.len(), self.dim)?;
        let r = self.radius;
        Ok(match self.kind {
            SetKind::Box => r * linalg::norm1(z),
            SetKind::Ellipsoid => r * linalg::norm2(z),
            SetKind::CrossPolytope => r * linalg::norm_inf(z),
            SetKind::Budget => r * top_sum(z.iter().map(|v| v.abs()).collect(), self.gamma),
            SetKind::OneSidedBudget => r * top_sum(z.iter().map(|v| v.max(0.0)).collect(), self.gamma),
            SetKind::Polyhedron => {
                let p = self.polyhedron.as_ref().expect("polyhedron data");
                let q = p.num_lifting();
                let mut c = z.to_vec();
                c.extend(std::iter::repeat_n(0.0, q));
                let d: Vec<f64> = p.d.iter().map(|v| v * r).collect();
                match maximize_inequality(&c, &p.stacked(), &d) {
                    LpOutcome::Optimal { value, .. } => value,
                    LpOutcome::Unbounded => return Err(Error::UnboundedSet),
                    LpOutcome::Infeasible => return Err(Error::InvalidInput("polyhedron is empty".into())),
                }
            }
        })
    }

    pub fn membership(&self, zeta: &[f64], tol: f64) -> Result<bool> {
        dim_check("point", zeta.len(), self.dim)?;
        let r = self.radius;
        let inf = linalg::norm_inf(zeta);
        Ok(match self.kind {
            SetKind::Box => inf <= r + tol,
            SetKind::Ellipsoid => linalg::norm2(zeta) <= r + tol,
            SetKind::CrossPolytope => linalg::norm1(zeta) <= r + tol,
            SetKind::Budget => inf <= r + tol && linalg::norm1(zeta) <= self.gamma * r + tol,
            SetKind::OneSidedBudget => {
                zeta.iter().all(|v| *v >= -tol && *v <= r + tol) && zeta.iter().sum::<f64>() <= self.gamma * r + tol
            }
            SetKind::Polyhedron => {
                let p = self.polyhedron.as_ref().expect("polyhedron data");
                let rhs: Vec<f64> = p
                    .d
                    .iter()
                    .zip(p.d1.mul_vec(zeta))
                    .map(|(d, a)| d * r - a + tol)
                    .collect();
                if p.num_lifting() == 0 {
                    rhs.iter().all(|v| *v >= 0.0)
                } else {
                    let zero = vec![0.0; p.num_lifting()];
                    !matches!(maximize_inequality(&zero, &p.d2, &rhs), LpOutcome::Infeasible)
                }
            }
        })
    }

    /// `(D1, D2, d)` with the radius folded into `d`.
    pub fn as_polyhedron(&self) -> Result<Polyhedron> {
        let m = self.dim;
        let r = self.radius;
        let eye = DenseMatrix::identity(m);
        let neg = eye.scale(-1.0);
        let ones = DenseMatrix::from_vec(1, m, vec![1.0; m]);
        let zrow = DenseMatrix::zeros(1, m);
        let zm = DenseMatrix::zeros(m, m);
        Ok(match self.kind {
            SetKind::Ellipsoid => return Err(Error::NotPolyhedral),
            SetKind::Box => Polyhedron {
                d1: eye.vstack(&neg),
                d2: DenseMatrix::zeros(2 * m, 0),
                d: vec![r; 2 * m],
            },
            SetKind::CrossPolytope => {
                let mut d = vec![0.0; 2 * m + 1];
                d[2 * m] = r;
                Polyhedron {
                    d1: eye.vstack(&neg).vstack(&zrow),
                    d2: neg.vstack(&neg).vstack(&ones),
                    d,
                }
            }
            SetKind::Budget => {
                // ±ζ ≤ ξ, ξ ≤ r, Σξ ≤ Γ r
                let mut d = vec![0.0; 2 * m];
                d.extend(std::iter::repeat_n(r, m));
                d.push(self.gamma * r);
                Polyhedron {
                    d1: eye.vstack(&neg).vstack(&zm).vstack(&zrow),
                    d2: neg.vstack(&neg).vstack(&eye).vstack(&ones),
                    d,
                }
            }
            SetKind::OneSidedBudget => {
                let mut d = vec![r; m];
                d.extend(std::iter::repeat_n(0.0, m));
                d.push(self.gamma * r);
                Polyhedron {
                    d1: eye.vstack(&neg).vstack(&ones),
                    d2: DenseMatrix::zeros(2 * m + 1, 0),
                    d,
                }
            }
            SetKind::Polyhedron => {
                let p = self.polyhedron.as_ref().expect("polyhedron data");
                Polyhedron {
                    d1: p.d1.clone(),
                    d2: p.d2.clone(),
                    d: p.d.iter().map(|v| v * r).collect(),
                }
            }
        })
    }

    /// Number of vertices, if it has a closed form.
    fn vertex_count(&self) -> Option<f64> {
        let m = self.dim;
        let k = self.gamma.floor() as usize;
        let frac = self.gamma - k as f64;
        match self.kind {
            SetKind::Box => Some(2f64.powi(m as i32)),
            SetKind::CrossPolytope => Some(2.0 * m as f64),
            SetKind::Budget => Some(if k >= m {
                2f64.powi(m as i32)
            } else if frac == 0.0 {
                choose(m, k) * 2f64.powi(k as i32)
            } else {
                choose(m, k) * 2f64.powi(k as i32) * (m - k) as f64 * 2.0
            }),
            SetKind::OneSidedBudget => {
                let base: f64 = (0..=k.min(m)).map(|j| choose(m, j)).sum();
                Some(if frac > 0.0 && k < m { base + choose(m, k) * (m - k) as f64 } else { base })
            }
            _ => None,
        }
    }

    pub fn vertices(&self) -> Result<Vec<Vec<f64>>> {
        self.vertices_capped(DEFAULT_VERTEX_CAP)
    }

    pub fn vertices_capped(&self, cap: usize) -> Result<Vec<Vec<f64>>> {
        if let Some(c) = self.vertex_count() {
            if c > cap as f64 {
                return Err(Error::VertexBudgetExceeded(cap));
            }
        }
        let m = self.dim;
        let r = self.radius;
        let k = self.gamma.floor() as usize;
        let frac = self.gamma - k as f64;
        let mut out = Vec::new();
        match self.kind {
            SetKind::Ellipsoid => return Err(Error::NotPolyhedral),
            SetKind::Box => {
                for mask in 0u64..(1u64 << m) {
                    out.push((0..m).map(|j| if mask >> j & 1 == 1 { -r } else { r }).collect());
                }
            }
            SetKind::CrossPolytope => {
                for j in 0..m {
                    for s in [r, -r] {
                        let mut v = vec![0.0; m];
                        v[j] = s;
                        out.push(v);
                    }
                }
            }
            SetKind::Budget => {
                if k >= m {
                    return self.box_like(m, r).vertices_capped(cap);
                }
                for support in subsets(m, k) {
                    for signs in 0u64..(1u64 << k) {
                        let mut v = vec![0.0; m];
                        for (b, j) in support.iter().enumerate() {
                            v[*j] = if signs >> b & 1 == 1 { -r } else { r };
                        }
                        if frac > 0.0 {
                            for j in (0..m).filter(|j| !support.contains(j)) {
                                for s in [frac * r, -frac * r] {
                                    let mut w = v.clone();
                                    w[j] = s;
                                    out.push(w);
                                }
                            }
                        } else {
                            out.push(v);
                        }
                    }
                }
            }
            SetKind::OneSidedBudget => {
                for size in 0..=k.min(m) {
                    for support in subsets(m, size) {
                        let mut v = vec![0.0; m];
                        for j in &support {
                            v[*j] = r;
                        }
                        if size == k && frac > 0.0 && k < m {
                            for j in (0..m).filter(|j| !support.contains(j)) {
                                let mut w = v.clone();
                                w[j] = frac * r;
                                out.push(w);
                            }
                        }
                        out.push(v);
                    }
                }
            }
            SetKind::Polyhedron => {
                out = self.polyhedron_vertices()?;
                if out.len() > cap {
                    return Err(Error::VertexBudgetExceeded(cap));
                }
            }
        }
        Ok(out)
    }

    fn box_like(&self, m: usize, r: f64) -> Self {
        Self {
            kind: SetKind::Box,
            dim: m,
            radius: r,
            gamma: 0.0,
            polyhedron: None,
        }
    }

    /// Generic enumeration: double description on the lifted polytope, then
    /// projection and removal of non-extreme points.
    pub fn polyhedron_vertices(&self) -> Result<Vec<Vec<f64>>> {
        let p = self.as_polyhedron()?;
        let m = self.dim;
        let lifted = dd::vertices(&p.stacked(), &p.d).ok_or_else(|| {
            Error::InvalidInput("vertex enumeration needs bounded lifting variables (full column rank [D1 D2])".into())
        })?;
        let mut cand: Vec<Vec<f64>> = Vec::new();
        for v in lifted {
            let z = v[..m].to_vec();
            if !cand.iter().any(|c| c.iter().zip(&z).all(|(a, b)| (a - b).abs() <= 1e-9 * (1.0 + a.abs()))) {
                cand.push(z);
            }
        }
        if p.num_lifting() == 0 {
            return Ok(cand);
        }
        let mut out = Vec::new();
        for (i, z) in cand.iter().enumerate() {
            let others: Vec<&Vec<f64>> = cand.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, v)| v).collect();
            if others.is_empty() || !in_hull(z, &others) {
                out.push(z.clone());
            }
        }
        Ok(out)
    }

    /// Adds `π_U(z) ≤ bound` to `model` using auxiliary variables.
    pub fn constrain_support(&self, model: &mut Model, z: &[LinExpr], bound: LinExpr) -> Result<()> {
        dim_check("direction", z.len(), self.dim)?;
        if z.iter().all(LinExpr::is_constant) {
            let zc: Vec<f64> = z.iter().map(|e| e.constant).collect();
            let v = self.support_function(&zc)?;
            model.add_nonneg(bound - LinExpr::constant(v));
            return Ok(());
        }
        let r = self.radius;
        match self.kind {
            SetKind::Box => {
                let mut total = LinExpr::zero();
                for e in z {
                    if e.is_constant() {
                        total.constant += e.constant.abs();
                    } else {
                        let u = model.add_var(Domain::NonNeg);
                        model.add_le(e.clone(), u.into());
                        model.add_le(-e.clone(), u.into());
                        total.add_term(u, 1.0);
                    }
                }
                model.add_le(total * r, bound);
            }
            SetKind::Ellipsoid => {
                model.add_soc(bound * (1.0 / r), z.to_vec());
            }
            SetKind::CrossPolytope => {
                let t = model.add_var(Domain::NonNeg);
                for e in z {
                    model.add_le(e.clone(), t.into());
                    model.add_le(-e.clone(), t.into());
                }
                model.add_le(LinExpr::term(t, r), bound);
            }
            SetKind::Budget | SetKind::OneSidedBudget => {
                // π(z) = min_{t ≥ 0} r (Γ t + Σ max(|z_k| - t, 0)) (one-sided: z_k⁺)
                let one_sided = self.kind == SetKind::OneSidedBudget;
                let t = model.add_var(Domain::NonNeg);
                let mut total = LinExpr::term(t, self.gamma);
                for e in z {
                    if e.is_constant() && e.constant == 0.0 {
                        continue;
                    }
                    let u = model.add_var(Domain::NonNeg);
                    let cover = LinExpr::from(u) + t.into();
                    model.add_le(e.clone(), cover.clone());
                    if !one_sided {
                        model.add_le(-e.clone(), cover);
                    }
                    total.add_term(u, 1.0);
                }
                model.add_le(total * r, bound);
            }
            SetKind::Polyhedron => {
                // LP duality: w ≥ 0, D1ᵀw = z, D2ᵀw = 0, r dᵀw ≤ bound
                let p = self.polyhedron.as_ref().expect("polyhedron data");
                let w = model.add_vars(p.num_rows(), Domain::NonNeg);
                for (j, e) in z.iter().enumerate() {
                    model.add_eq(LinExpr::dot(&w, &p.d1.col(j)) - e.clone());
                }
                for j in 0..p.num_lifting() {
                    model.add_eq(LinExpr::dot(&w, &p.d2.col(j)));
                }
                let dw: Vec<f64> = p.d.iter().map(|v| v * r).collect();
                model.add_le(LinExpr::dot(&w, &dw), bound);
            }
        }
        Ok(())
    }

    /// Adds `ζ ∈ U` for the given expressions.
    pub fn constrain_member(&self, model: &mut Model, zeta: &[LinExpr]) -> Result<()> {
        dim_check("point", zeta.len(), self.dim)?;
        let r = self.radius;
        match self.kind {
            SetKind::Ellipsoid => model.add_soc(LinExpr::constant(r), zeta.to_vec()),
            _ => {
                let p = self.as_polyhedron()?;
                let xi = model.add_vars(p.num_lifting(), Domain::Free);
                for i in 0..p.num_rows() {
                    let mut e = LinExpr::combine(zeta, p.d1.row(i));
                    e.add_scaled(&LinExpr::dot(&xi, p.d2.row(i)), 1.0);
                    model.add_le(e, LinExpr::constant(p.d[i]));
                }
            }
        }
        Ok(())
    }

    /// Closest point of the set in the Euclidean norm; members are returned
    /// unchanged. Norm balls and budget sets use exact thresholding; general
    /// polyhedra go through [`Self::project_conic`].
    pub fn project(&self, point: &[f64]) -> Result<Vec<f64>> {
        dim_check("point", point.len(), self.dim)?;
        if self.membership(point, 0.0)? {
            return Ok(point.to_vec());
        }
        let r = self.radius;
        let sign = |v: f64| if v < 0.0 { -1.0 } else { 1.0 };
        let threshold = |a: Vec<f64>, cap: f64, total: f64, signs: Vec<f64>| -> Vec<f64> {
            let theta = clip_threshold(&a, cap, total);
            a.iter()
                .zip(signs)
                .map(|(v, s)| s * (v - theta).clamp(0.0, cap))
                .collect()
        };
        Ok(match self.kind {
            SetKind::Box => point.iter().map(|v| v.clamp(-r, r)).collect(),
            SetKind::Ellipsoid => {
                let n = linalg::norm2(point);
                point.iter().map(|v| v * r / n).collect()
            }
            SetKind::CrossPolytope => threshold(
                point.iter().map(|v| v.abs()).collect(),
                f64::INFINITY,
                r,
                point.iter().map(|v| sign(*v)).collect(),
            ),
            SetKind::Budget => threshold(
                point.iter().map(|v| v.abs()).collect(),
                r,
                self.gamma * r,
                point.iter().map(|v| sign(*v)).collect(),
            ),
            SetKind::OneSidedBudget => threshold(point.to_vec(), r, self.gamma * r, vec![1.0; self.dim]),
            SetKind::Polyhedron => return self.project_conic(point),
        })
    }

    /// Projection by minimizing `‖ζ - p‖` as a cone program. The optimal
    /// value is accurate to the solver tolerance but the minimizer only to
    /// roughly its square root along directions where the distance is flat.
    pub fn project_conic(&self, point: &[f64]) -> Result<Vec<f64>> {
        dim_check("point", point.len(), self.dim)?;
        if self.membership(point, 0.0)? {
            return Ok(point.to_vec());
        }
        let mut model = Model::new();
        let zeta = model.add_vars(self.dim, Domain::Free);
        let t = model.add_var(Domain::Free);
        let ze: Vec<LinExpr> = zeta.iter().map(|v| LinExpr::from(*v)).collect();
        self.constrain_member(&mut model, &ze)?;
        model.add_soc(
            t.into(),
            zeta.iter().zip(point).map(|(v, p)| LinExpr::from(*v) - LinExpr::constant(*p)).collect(),
        );
        model.set_objective(LinExpr::term(t, -1.0));
        let mut sol = model.solve(&SolverSettings::with_tol(1e-10, 200));
        if sol.status != SolveStatus::Optimal {
            sol = model.solve(&SolverSettings::default());
        }
        if sol.status != SolveStatus::Optimal {
            return Err(Error::Solver {
                status: sol.status,
                context: "projection onto uncertainty set".into(),
            });
        }
        let z: Vec<f64> = zeta.iter().map(|v| sol.value(*v)).collect();
        Ok(self.repair(z))
    }

    /// Pulls a numerically near-feasible point onto the set where the
    /// structure makes that exact.
    fn repair(&self, mut z: Vec<f64>) -> Vec<f64> {
        let r = self.radius;
        let scale_to = |z: &mut Vec<f64>, norm: f64, cap: f64| {
            if norm > cap && norm > 0.0 {
                let f = cap / norm;
                z.iter_mut().for_each(|v| *v *= f);
            }
        };
        match self.kind {
            SetKind::Box => z.iter_mut().for_each(|v| *v = v.clamp(-r, r)),
            SetKind::Ellipsoid => {
                let n = linalg::norm2(&z);
                scale_to(&mut z, n, r);
            }
            SetKind::CrossPolytope => {
                let n = linalg::norm1(&z);
                scale_to(&mut z, n, r);
            }
            SetKind::Budget => {
                z.iter_mut().for_each(|v| *v = v.clamp(-r, r));
                let n = linalg::norm1(&z);
                scale_to(&mut z, n, self.gamma * r);
            }
            SetKind::OneSidedBudget => {
                z.iter_mut().for_each(|v| *v = v.clamp(0.0, r));
                let n: f64 = z.iter().sum();
                scale_to(&mut z, n, self.gamma * r);
            }
            SetKind::Polyhedron => {}
        }
        z
    }

    /// Per-coordinate bounds `[lo, hi]` of the set.
    pub fn bounding_box(&self) -> Result<Vec<(f64, f64)>> {
        let r = self.radius;
        Ok(match self.kind {
            SetKind::OneSidedBudget => vec![(0.0, r.min(self.gamma * r).max(0.0)); self.dim],
            SetKind::Budget => vec![(-r.min(self.gamma * r), r.min(self.gamma * r)); self.dim],
            SetKind::Polyhedron => {
                let mut out = Vec::with_capacity(self.dim);
                for j in 0..self.dim {
                    let mut e = vec![0.0; self.dim];
                    e[j] = 1.0;
                    let hi = self.support_function(&e)?;
                    e[j] = -1.0;
                    let lo = -self.support_function(&e)?;
                    out.push((lo, hi));
                }
                out
            }
            _ => vec![(-r, r); self.dim],
        })
    }

    /// `count` members drawn uniformly on the bounding box and projected onto
    /// the set; deterministic in `seed`.
    pub fn sample(&self, seed: u64, count: usize) -> Result<Vec<Vec<f64>>> {
        let bounds = self.bounding_box()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let p: Vec<f64> = bounds
                .iter()
                .map(|(lo, hi)| if hi > lo { rng.random_range(*lo..=*hi) } else { *lo })
                .collect();
            out.push(self.project(&p)?);
        }
        Ok(out)
    }
}

/// Sum of the `⌊Γ⌋` largest entries plus the fractional part of `Γ` times
/// the next one.
fn top_sum(mut a: Vec<f64>, gamma: f64) -> f64 {
    a.sort_by(|x, y| y.total_cmp(x));
    let k = (gamma.floor() as usize).min(a.len());
    let frac = gamma - gamma.floor();
    let head: f64 = a[..k].iter().sum();
    head + if k < a.len() { frac * a[k] } else { 0.0 }
}

/// Smallest `θ ≥ 0` with `Σ clamp(a_j - θ, 0, cap) ≤ total`, found exactly
/// on the piecewise-linear breakpoints.
fn clip_threshold(a: &[f64], cap: f64, total: f64) -> f64 {
    let g = |th: f64| a.iter().map(|v| (v - th).clamp(0.0, cap)).sum::<f64>();
    if g(0.0) <= total {
        return 0.0;
    }
    let mut bps: Vec<f64> = a.iter().copied().chain(a.iter().map(|v| v - cap)).filter(|v| *v > 0.0 && v.is_finite()).collect();
    bps.push(0.0);
    bps.sort_by(f64::total_cmp);
    bps.dedup();
    // g is decreasing; find consecutive breakpoints bracketing `total`
    let mut lo = 0.0;
    let mut g_lo = g(0.0);
    for &b in &bps {
        let g_b = g(b);
        if g_b <= total {
            return if g_lo == g_b { b } else { lo + (g_lo - total) * (b - lo) / (g_lo - g_b) };
        }
        lo = b;
        g_lo = g_b;
    }
    lo
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for l in i..k {
            idx[l] = idx[l - 1] + 1;
        }
    }
}

/// Whether `p` is a convex combination of `pts`.
fn in_hull(p: &[f64], pts: &[&Vec<f64>]) -> bool {
    let (m, n) = (p.len(), pts.len());
    let mut a = DenseMatrix::zeros(m + 1, n);
    for (j, v) in pts.iter().enumerate() {
        for i in 0..m {
            a[(i, j)] = v[i];
        }
        a[(m, j)] = 1.0;
    }
    let mut b = p.to_vec();
    b.push(1.0);
    matches!(maximize_standard(&vec![0.0; n], &a, &b), LpOutcome::Optimal { .. })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn support_examples() {
        assert_eq!(UncertaintySet::box_set(2).unwrap().support_function(&[3.0, -4.0]).unwrap(), 7.0);
        assert_eq!(UncertaintySet::ellipsoid(2).unwrap().support_function(&[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(UncertaintySet::budget(3, 2.0).unwrap().support_function(&[1.0, 1.0, 1.0]).unwrap(), 2.0);
        let s = UncertaintySet::one_sided_budget(3, 1.5).unwrap();
        assert_eq!(s.support_function(&[-5.0, 2.0, 1.0]).unwrap(), 2.5);
    }

    #[test]
    fn membership_examples() {
        assert!(UncertaintySet::box_set(2).unwrap().membership(&[1.0, -1.0], 0.0).unwrap());
        assert!(!UncertaintySet::cross_polytope(2).unwrap().membership(&[0.6, 0.6], 0.0).unwrap());
        let s = UncertaintySet::one_sided_budget(4, 2.0).unwrap();
        assert!(s.membership(&[1.0, 1.0, 0.0, 0.0], 0.0).unwrap());
        assert!(s.membership(&[0.0; 4], 0.0).unwrap());
        assert!(matches!(s.membership(&[0.0; 3], 0.0), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn polyhedral_forms_match_the_standard_descriptions() {
        let b = UncertaintySet::box_set(2).unwrap().as_polyhedron().unwrap();
        assert_eq!(b.d1.to_rows(), vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0], vec![0.0, -1.0]]);
        assert_eq!(b.d2.ncols(), 0);
        assert_eq!(b.d, vec![1.0; 4]);
        let c = UncertaintySet::cross_polytope(2).unwrap().as_polyhedron().unwrap();
        assert_eq!(c.d, vec![0.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(matches!(UncertaintySet::ellipsoid(2).unwrap().as_polyhedron(), Err(Error::NotPolyhedral)));
    }

    #[test]
    fn vertex_cap_is_enforced() {
        let s = UncertaintySet::box_set(21).unwrap();
        assert!(matches!(s.vertices(), Err(Error::VertexBudgetExceeded(_))));
        assert!(matches!(UncertaintySet::ellipsoid(2).unwrap().vertices(), Err(Error::NotPolyhedral)));
    }

    #[test]
    fn json_shape() {
        let s = UncertaintySet::budget(3, 1.5).unwrap().with_radius(2.0).unwrap();
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"{"kind":"budget","dim":3,"radius":2.0,"gamma":1.5}"#);
        assert_eq!(serde_json::from_str::<UncertaintySet>(&j).unwrap(), s);
        assert!(serde_json::from_str::<UncertaintySet>(r#"{"kind":"budget","dim":3,"radius":1.0,"gamma":4.0}"#).is_err());
        let p: UncertaintySet =
            serde_json::from_str(r#"{"kind":"polyhedron","dim":1,"radius":1,"D1":[[1],[-1]],"d":[1,2]}"#).unwrap();
        assert_eq!(p.support_function(&[-1.0]).unwrap(), 2.0);
    }
}
