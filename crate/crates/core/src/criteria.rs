//! Convex strength criteria as intersections of conic atoms
//! `h(Aσ + o) + lᵀσ ≤ b`, their gauges, and the concrete criteria used by the
//! benchmarks.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::linalg::{self, DenseMatrix};
use crate::model::{Domain, LinExpr, Model};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomKind {
    /// `|·|` of a single row.
    Abs,
    LinfBall,
    L1Ball,
    /// Euclidean norm.
    Soc,
    /// Identity of a single row; may be negative.
    Linear,
}

/// One atom `h(Aσ + o) + lᵀσ ≤ b`. The offset `o` and linear term `l` are
/// optional (empty means zero); they appear in translated and robust
/// Mohr–Coulomb criteria.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConicAtom {
    pub kind: AtomKind,
    #[serde(rename = "A")]
    pub a: DenseMatrix,
    pub b: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub offset: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub linear: Vec<f64>,
}

impl ConicAtom {
    pub fn new(kind: AtomKind, a: DenseMatrix, b: f64) -> Result<Self> {
        let atom = Self {
            kind,
            a,
            b,
            offset: Vec::new(),
            linear: Vec::new(),
        };
        atom.validate()?;
        Ok(atom)
    }

    /// Single-row linear atom `aᵀσ ≤ b`.
    pub fn linear(a: &[f64], b: f64) -> Result<Self> {
        Self::new(AtomKind::Linear, DenseMatrix::from_vec(1, a.len(), a.to_vec()), b)
    }

    pub fn with_offset(mut self, offset: Vec<f64>) -> Result<Self> {
        self.offset = offset;
        self.validate()?;
        Ok(self)
    }

    pub fn with_linear(mut self, linear: Vec<f64>) -> Result<Self> {
        self.linear = linear;
        self.validate()?;
        Ok(self)
    }

    pub fn stress_dim(&self) -> usize {
        self.a.ncols()
    }

    pub fn offset_at(&self, i: usize) -> f64 {
        self.offset.get(i).copied().unwrap_or(0.0)
    }

    pub fn linear_at(&self, j: usize) -> f64 {
        self.linear.get(j).copied().unwrap_or(0.0)
    }

    fn validate(&self) -> Result<()> {
        let rows = self.a.nrows();
        if rows == 0 || self.a.ncols() == 0 {
            return Err(Error::InvalidInput("atom matrix must be non-empty".into()));
        }
        if matches!(self.kind, AtomKind::Abs | AtomKind::Linear) && rows != 1 {
            return Err(Error::InvalidInput(format!("{:?} atoms take a single row, got {rows}", self.kind)));
        }
        if !self.offset.is_empty() && self.offset.len() != rows {
            return Err(Error::DimensionMismatch(format!("offset has {} entries for {rows} rows", self.offset.len())));
        }
        if !self.linear.is_empty() && self.linear.len() != self.a.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "linear term has {} entries for stress dimension {}",
                self.linear.len(),
                self.a.ncols()
            )));
        }
        if !self.b.is_finite() || self.a.as_slice().iter().chain(&self.offset).chain(&self.linear).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("atom data must be finite".into()));
        }
        let slack = self.b - self.h(&self.offset_vec());
        if slack <= 0.0 {
            return Err(Error::DegenerateCriterion(format!(
                "the origin is not strictly inside the atom (h(o) - b = {})",
                -slack
            )));
        }
        Ok(())
    }

    fn offset_vec(&self) -> Vec<f64> {
        (0..self.a.nrows()).map(|i| self.offset_at(i)).collect()
    }

    /// `h(x)` for the atom's kind.
    pub fn h(&self, x: &[f64]) -> f64 {
        match self.kind {
            AtomKind::Abs => x[0].abs(),
            AtomKind::LinfBall => linalg::norm_inf(x),
            AtomKind::L1Ball => linalg::norm1(x),
            AtomKind::Soc => linalg::norm2(x),
            AtomKind::Linear => x[0],
        }
    }

    /// `h(Aσ + o) + lᵀσ - b`, positive when violated.
    pub fn violation(&self, sigma: &[f64]) -> f64 {
        self.residual_at(sigma, 1.0)
    }

    /// `h(Aσ + αo) + lᵀσ - αb`.
    fn residual_at(&self, sigma: &[f64], alpha: f64) -> f64 {
        let mut x = self.a.mul_vec(sigma);
        for (i, v) in x.iter_mut().enumerate() {
            *v += alpha * self.offset_at(i);
        }
        let lin: f64 = (0..sigma.len()).map(|j| self.linear_at(j) * sigma[j]).sum();
        self.h(&x) + lin - alpha * self.b
    }

    /// Minkowski gauge of the atom's set, `inf{α ≥ 0 : h(Aσ + αo) + lᵀσ ≤ αb}`.
    /// Always finite since atoms contain the origin strictly.
    pub fn gauge(&self, sigma: &[f64]) -> f64 {
        let c: f64 = (0..sigma.len()).map(|j| self.linear_at(j) * sigma[j]).sum();
        let u = self.a.mul_vec(sigma);
        if self.offset.is_empty() {
            return ((self.h(&u) + c) / self.b).max(0.0);
        }
        match self.kind {
            AtomKind::Linear => ((u[0] + c) / (self.b - self.offset[0])).max(0.0),
            AtomKind::Soc => {
                // largest α with ‖u + αo‖² = (αb - c)², αb ≥ c
                let o = &self.offset;
                let qa = self.b * self.b - linalg::dot(o, o);
                let qb = -2.0 * (self.b * c + linalg::dot(&u, o));
                let qc = c * c - linalg::dot(&u, &u);
                let disc = (qb * qb - 4.0 * qa * qc).max(0.0);
                let root = (-qb + disc.sqrt()) / (2.0 * qa);
                root.max(c / self.b).max(0.0)
            }
            _ => {
                // φ(α) = residual is convex with φ → -∞; bisect for the zero
                if self.residual_at(sigma, 0.0) <= 0.0 {
                    return 0.0;
                }
                let mut hi = 1.0;
                while self.residual_at(sigma, hi) > 0.0 {
                    hi *= 2.0;
                }
                let mut lo = 0.0;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if self.residual_at(sigma, mid) > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                hi
            }
        }
    }

    /// Equivalent list of atoms with `Abs` and `LinfBall` split into linear
    /// half-spaces and the linear term folded in.
    pub fn split_linear(&self) -> Vec<ConicAtom> {
        let d = self.stress_dim();
        let rows: Vec<(Vec<f64>, f64)> = match self.kind {
            AtomKind::Abs | AtomKind::LinfBall => (0..self.a.nrows())
                .flat_map(|i| {
                    let r = self.a.row(i).to_vec();
                    let o = self.offset_at(i);
                    [(r.clone(), o), (r.iter().map(|v| -v).collect(), -o)]
                })
                .collect(),
            AtomKind::Linear => vec![(self.a.row(0).to_vec(), self.offset_at(0))],
            _ => return vec![self.clone()],
        };
        rows.into_iter()
            .map(|(r, o)| {
                let a: Vec<f64> = (0..d).map(|j| r[j] + self.linear_at(j)).collect();
                ConicAtom {
                    kind: AtomKind::Linear,
                    a: DenseMatrix::from_vec(1, d, a),
                    b: self.b - o,
                    offset: Vec::new(),
                    linear: Vec::new(),
                }
            })
            .collect()
    }

    /// The atom for `σ + shift`: `{σ : σ + shift ∈ atom}`.
    pub fn translated(&self, shift: &[f64]) -> Result<ConicAtom> {
        let ash = self.a.mul_vec(shift);
        let offset: Vec<f64> = (0..self.a.nrows()).map(|i| self.offset_at(i) + ash[i]).collect();
        let lin: f64 = (0..shift.len()).map(|j| self.linear_at(j) * shift[j]).sum();
        let atom = ConicAtom {
            kind: self.kind,
            a: self.a.clone(),
            b: self.b - lin,
            offset,
            linear: self.linear.clone(),
        };
        atom.validate()?;
        Ok(atom)
    }

    /// Adds `g(x) ≤ t` (the atom's gauge) to `model`, together with `t ≥ 0`.
    pub fn constrain_gauge(&self, model: &mut Model, x: &[LinExpr], t: LinExpr) {
        let d = self.stress_dim();
        debug_assert_eq!(x.len(), d);
        if !t.is_constant() {
            model.add_nonneg(t.clone());
        }
        let rows: Vec<LinExpr> = (0..self.a.nrows())
            .map(|i| {
                let mut e = LinExpr::combine(x, self.a.row(i));
                e.add_scaled(&t, self.offset_at(i));
                e
            })
            .collect();
        let mut rhs = t.scaled(self.b);
        if !self.linear.is_empty() {
            rhs.add_scaled(&LinExpr::combine(x, &self.linear), -1.0);
        }
        constrain_h(model, self.kind, rows, rhs);
    }
}

/// Adds `h(rows) ≤ rhs` for the given kind (no sign condition on `rhs`).
pub fn constrain_h(model: &mut Model, kind: AtomKind, rows: Vec<LinExpr>, rhs: LinExpr) {
    match kind {
        AtomKind::Linear => model.add_le(rows[0].clone(), rhs),
        AtomKind::Abs | AtomKind::LinfBall => {
            for r in rows {
                model.add_le(r.clone(), rhs.clone());
                model.add_le(-r, rhs.clone());
            }
        }
        AtomKind::L1Ball => {
            let mut total = LinExpr::zero();
            for r in rows {
                if r.is_constant() {
                    total.constant += r.constant.abs();
                    continue;
                }
                let u = model.add_var(Domain::NonNeg);
                model.add_le(r.clone(), u.into());
                model.add_le(-r, u.into());
                total.add_term(u, 1.0);
            }
            model.add_le(total, rhs);
        }
        AtomKind::Soc => model.add_soc(rhs, rows),
    }
}

/// Intersection of conic atoms in a `stress_dim`-dimensional stress space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CriterionJson")]
pub struct StrengthCriterion {
    stress_dim: usize,
    #[serde(rename = "constraints")]
    atoms: Vec<ConicAtom>,
    #[serde(default)]
    label: String,
}

#[derive(Deserialize)]
struct CriterionJson {
    stress_dim: usize,
    constraints: Vec<ConicAtom>,
    #[serde(default)]
    label: String,
}

impl TryFrom<CriterionJson> for StrengthCriterion {
    type Error = String;
    fn try_from(j: CriterionJson) -> std::result::Result<Self, String> {
        for a in &j.constraints {
            a.validate().map_err(|e| e.to_string())?;
        }
        Self::new(j.stress_dim, j.constraints, j.label).map_err(|e| e.to_string())
    }
}

/// One traced ray: the boundary point, or `None` if the criterion is
/// unbounded along the ray.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub theta: f64,
    pub point: Option<[f64; 2]>,
}

impl TracePoint {
    pub fn radius(&self) -> f64 {
        self.point.map_or(f64::INFINITY, |p| p[0].hypot(p[1]))
    }
}

/// Evenly spaced unit rays `(cos θ, sin θ)`, θ = 2πk/n.
pub fn ray_angles(directions: usize) -> Vec<f64> {
    (0..directions).map(|k| 2.0 * PI * k as f64 / directions as f64).collect()
}

/// Writes traced boundaries as `theta,x,y` rows; unbounded rays get empty
/// coordinates.
pub fn trace_to_csv(points: &[TracePoint]) -> String {
    let mut s = String::from("theta,x,y\n");
    for p in points {
        match p.point {
            Some([x, y]) => s.push_str(&format!("{},{},{}\n", p.theta, x, y)),
            None => s.push_str(&format!("{},,\n", p.theta)),
        }
    }
    s
}

impl StrengthCriterion {
    pub fn new(stress_dim: usize, atoms: Vec<ConicAtom>, label: impl Into<String>) -> Result<Self> {
        if stress_dim == 0 {
            return Err(Error::InvalidInput("stress dimension must be at least 1".into()));
        }
        if atoms.is_empty() {
            return Err(Error::InvalidInput("a criterion needs at least one atom".into()));
        }
        if let Some(a) = atoms.iter().find(|a| a.stress_dim() != stress_dim) {
            return Err(Error::DimensionMismatch(format!(
                "atom acts on dimension {}, criterion on {stress_dim}",
                a.stress_dim()
            )));
        }
        Ok(Self {
            stress_dim,
            atoms,
            label: label.into(),
        })
    }

    /// `|σ| ≤ σ₀`.
    pub fn interval(sigma0: f64) -> Result<Self> {
        positive("sigma0", sigma0)?;
        let atom = ConicAtom::new(AtomKind::Abs, DenseMatrix::from_vec(1, 1, vec![1.0]), sigma0)?;
        Self::new(1, vec![atom], format!("interval({sigma0})"))
    }

    /// `-σ_c ≤ σ ≤ σ_t` with distinct tensile and compressive strengths.
    pub fn asymmetric_interval(tension: f64, compression: f64) -> Result<Self> {
        positive("tension", tension)?;
        positive("compression", compression)?;
        let atoms = vec![ConicAtom::linear(&[1.0], tension)?, ConicAtom::linear(&[-1.0], compression)?];
        Self::new(1, atoms, format!("interval({tension}, {compression})"))
    }

    /// `√(σ₁² + σ₂² − σ₁σ₂) ≤ σ₀` in principal plane stresses.
    pub fn plane_stress_von_mises(sigma0: f64) -> Result<Self> {
        positive("sigma0", sigma0)?;
        let a = DenseMatrix::from_rows(&[vec![1.0, -0.5], vec![0.0, 0.75f64.sqrt()]]).expect("2x2");
        let atom = ConicAtom::new(AtomKind::Soc, a, sigma0)?;
        Self::new(2, vec![atom], format!("von_mises({sigma0})"))
    }

    /// Mohr–Coulomb with tension cut-off in `(σ₁, σ₃)`, nominal parameters.
    pub fn mohr_coulomb_tension_cutoff(params: &MohrCoulombParams) -> Result<Self> {
        params.validate()?;
        let (s, c) = params.phi0.sin_cos();
        let atoms = vec![
            ConicAtom::linear(&[1.0 + s, -1.0 + s], 2.0 * params.c0 * c)?,
            ConicAtom::linear(&[0.0, 1.0], params.ft0)?,
        ];
        Self::new(2, atoms, "mohr_coulomb")
    }

    pub fn stress_dim(&self) -> usize {
        self.stress_dim
    }

    pub fn atoms(&self) -> &[ConicAtom] {
        &self.atoms
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    fn check(&self, sigma: &[f64]) -> Result<()> {
        if sigma.len() != self.stress_dim {
            return Err(Error::DimensionMismatch(format!(
                "stress has length {}, expected {}",
                sigma.len(),
                self.stress_dim
            )));
        }
        Ok(())
    }

    /// Max of the atom gauges.
    pub fn gauge_value(&self, sigma: &[f64]) -> Result<f64> {
        self.check(sigma)?;
        Ok(self.atoms.iter().map(|a| a.gauge(sigma)).fold(0.0, f64::max))
    }

    /// All atoms hold within additive `tol`.
    pub fn membership(&self, sigma: &[f64], tol: f64) -> Result<bool> {
        self.check(sigma)?;
        Ok(self.atoms.iter().all(|a| a.violation(sigma) <= tol))
    }

    /// `(1 − β)G`.
    pub fn homothetic_scale(&self, beta: f64) -> Result<Self> {
        if !(beta < 1.0) {
            return Err(Error::DegenerateCriterion(format!("homothetic factor 1 - β = {} ≤ 0", 1.0 - beta)));
        }
        let f = 1.0 - beta;
        let atoms = self
            .atoms
            .iter()
            .map(|a| ConicAtom {
                kind: a.kind,
                a: a.a.clone(),
                b: a.b * f,
                offset: a.offset.iter().map(|v| v * f).collect(),
                linear: a.linear.clone(),
            })
            .collect();
        Ok(Self {
            stress_dim: self.stress_dim,
            atoms,
            label: self.label.clone(),
        })
    }

    /// `{σ : σ + shift ∈ G}`.
    pub fn translated(&self, shift: &[f64]) -> Result<Self> {
        self.check(shift)?;
        let atoms = self.atoms.iter().map(|a| a.translated(shift)).collect::<Result<_>>()?;
        Ok(Self {
            stress_dim: self.stress_dim,
            atoms,
            label: self.label.clone(),
        })
    }

    /// `G ∩ other`.
    pub fn intersect(&self, other: &StrengthCriterion) -> Result<Self> {
        if other.stress_dim != self.stress_dim {
            return Err(Error::DimensionMismatch("criteria act on different stress spaces".into()));
        }
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        Ok(Self {
            stress_dim: self.stress_dim,
            atoms,
            label: self.label.clone(),
        })
    }

    /// Adds `σ ∈ tG` to `model` (`t = 1` for plain membership).
    pub fn constrain(&self, model: &mut Model, sigma: &[LinExpr], t: LinExpr) {
        for a in &self.atoms {
            a.constrain_gauge(model, sigma, t.clone());
        }
    }

    /// Boundary points `u_θ / g(u_θ)` on `directions` evenly spaced rays.
    pub fn trace_boundary(&self, directions: usize) -> Result<Vec<TracePoint>> {
        if self.stress_dim != 2 {
            return Err(Error::TraceRequires2D(self.stress_dim));
        }
        if directions < 3 {
            return Err(Error::InvalidInput("tracing needs at least 3 directions".into()));
        }
        ray_angles(directions)
            .into_iter()
            .map(|theta| {
                let u = [theta.cos(), theta.sin()];
                let g = self.gauge_value(&u)?;
                Ok(TracePoint {
                    theta,
                    point: (g > 1e-12).then(|| [u[0] / g, u[1] / g]),
                })
            })
            .collect()
    }
}

/// Largest `t ≥ 0` with `base + t·dir` in `G` (bisection on membership),
/// `None` if `base` is outside or the ray is unbounded within `cap`.
fn ray_extent(g: &StrengthCriterion, base: &[f64], dir: &[f64], cap: f64) -> Option<f64> {
    let at = |t: f64| -> Vec<f64> { base.iter().zip(dir).map(|(b, d)| b + t * d).collect() };
    if !g.membership(base, 0.0).ok()? {
        return None;
    }
    if g.membership(&at(cap), 0.0).ok()? {
        return None;
    }
    let (mut lo, mut hi) = (0.0, cap);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g.membership(&at(mid), 0.0).unwrap_or(false) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

/// Tensile strength of a criterion in `(σ₁, σ₃)`: the hydrostatic apex
/// `σ₁ = σ₃ = p`.
pub fn hydrostatic_apex(g: &StrengthCriterion) -> Result<f64> {
    let gv = g.gauge_value(&[1.0, 1.0])?;
    Ok(if gv > 0.0 { 1.0 / gv } else { f64::INFINITY })
}

/// Cohesion of a criterion in `(σ₁, σ₃)`: the shear stress where its Mohr
/// envelope crosses `σ_n = 0`, i.e. `max_p √(R(p)² − p²)` over circles of
/// centre `p` and largest admissible radius `R(p)`.
pub fn envelope_cohesion(g: &StrengthCriterion) -> Result<f64> {
    if g.stress_dim() != 2 {
        return Err(Error::TraceRequires2D(g.stress_dim()));
    }
    let apex = hydrostatic_apex(g)?;
    let scale = 1.0 / g.gauge_value(&[1.0, -1.0])?.max(1e-300);
    let cap = 1e3 * scale.max(apex.min(1e300));
    let tau = |p: f64| -> f64 {
        match ray_extent(g, &[p, p], &[1.0, -1.0], cap) {
            Some(r) if r > p.abs() => (r * r - p * p).sqrt(),
            _ => 0.0,
        }
    };
    let hi = if apex.is_finite() { apex } else { scale };
    let lo = -4.0 * scale;
    // coarse grid, then golden-section refinement around the best cell
    let n = 400;
    let grid: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    let best = (0..=n).max_by(|a, b| tau(grid[*a]).total_cmp(&tau(grid[*b]))).unwrap_or(0);
    let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(n)]);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if tau(c) < tau(d) {
            a = c;
        } else {
            b = d;
        }
    }
    Ok(tau(0.5 * (a + b)).max(tau(grid[best])))
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

/// Mohr–Coulomb strength parameters with their uncertainty amplitudes.
/// Angles are in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MohrCoulombParams {
    pub c0: f64,
    pub phi0: f64,
    pub ft0: f64,
    #[serde(default)]
    pub dc: f64,
    #[serde(default)]
    pub dphi: f64,
    #[serde(default)]
    pub dft: f64,
    #[serde(default)]
    pub rho: f64,
}

/// `A(k₀)`, `b(k₀)` and the directional derivatives along the columns of `K`
/// for one linear atom `A(k)σ ≤ b(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedAtom {
    pub a0: Vec<f64>,
    pub b0: f64,
    pub da: Vec<Vec<f64>>,
    pub db: Vec<f64>,
}

impl LinearizedAtom {
    /// `A(ζ) = a0 + Σ ΔAⱼζⱼ`, `b(ζ) = b0 + Σ Δbⱼζⱼ`.
    pub fn realize(&self, zeta: &[f64]) -> (Vec<f64>, f64) {
        let mut a = self.a0.clone();
        let mut b = self.b0;
        for (j, z) in zeta.iter().enumerate() {
            linalg::axpy(*z, &self.da[j], &mut a);
            b += self.db[j] * z;
        }
        (a, b)
    }
}

impl MohrCoulombParams {
    pub fn new(c0: f64, phi0: f64, ft0: f64) -> Self {
        Self {
            c0,
            phi0,
            ft0,
            dc: 0.0,
            dphi: 0.0,
            dft: 0.0,
            rho: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("c0", self.c0)?;
        positive("ft0", self.ft0)?;
        if !(self.phi0 > 0.0 && self.phi0 < PI / 2.0) {
            return Err(Error::InvalidInput(format!("phi0 = {} outside (0, π/2)", self.phi0)));
        }
        for (name, v) in [("dc", self.dc), ("dphi", self.dphi), ("dft", self.dft)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be nonnegative, got {v}")));
            }
        }
        if !(-1.0..=0.0).contains(&self.rho) {
            return Err(Error::InvalidInput(format!("rho = {} outside [-1, 0]", self.rho)));
        }
        Ok(())
    }

    /// Cohesion at the worst case, `c₀ − Δc`.
    pub fn c_min(&self) -> f64 {
        self.c0 - self.dc
    }

    /// Columns of `K`: the parameter increments `(δc, δφ, δf_t)` per unit
    /// `ζⱼ`. The cohesion increment along ζ₂ is `c₀ρΔφ`, in stress times
    /// radians.
    pub fn k_matrix(&self) -> [[f64; 3]; 3] {
        let r = (1.0 - self.rho * self.rho).max(0.0).sqrt();
        [
            [-self.dc, 0.0, 0.0],
            [self.c0 * self.rho * self.dphi, r * self.dphi, 0.0],
            [0.0, 0.0, -self.dft],
        ]
    }

    /// The Mohr–Coulomb line and the tension cut-off, linearized at the
    /// nominal parameters along the columns of [`Self::k_matrix`].
    pub fn linearization(&self) -> [LinearizedAtom; 2] {
        let (s, c) = self.phi0.sin_cos();
        let k = self.k_matrix();
        let mut mc = LinearizedAtom {
            a0: vec![1.0 + s, -1.0 + s],
            b0: 2.0 * self.c0 * c,
            da: Vec::with_capacity(3),
            db: Vec::with_capacity(3),
        };
        let mut cut = LinearizedAtom {
            a0: vec![0.0, 1.0],
            b0: self.ft0,
            da: Vec::with_capacity(3),
            db: Vec::with_capacity(3),
        };
        for [dc, dphi, dft] in k {
            mc.da.push(vec![c * dphi, c * dphi]);
            mc.db.push(2.0 * c * dc - 2.0 * self.c0 * s * dphi);
            cut.da.push(vec![0.0, 0.0]);
            cut.db.push(dft);
        }
        [mc, cut]
    }

    /// Criterion of the linearized realization at `ζ`.
    pub fn realization(&self, zeta: &[f64]) -> Result<StrengthCriterion> {
        if zeta.len() != 3 {
            return Err(Error::DimensionMismatch(format!("Mohr–Coulomb ζ has length {}, expected 3", zeta.len())));
        }
        let atoms = self
            .linearization()
            .iter()
            .map(|l| {
                let (a, b) = l.realize(zeta);
                ConicAtom::linear(&a, b)
            })
            .collect::<Result<Vec<_>>>()?;
        StrengthCriterion::new(2, atoms, "mohr_coulomb_realization")
    }
}
