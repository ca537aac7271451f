//! Benchmark structures: the multifiber beam in bending (with and without
//! the zero-average force condition) and a small planar truss under
//! uncertain fixed loads, with closed-form reference values and sweeps.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::criteria::{MohrCoulombParams, StrengthCriterion};
use crate::limit_analysis::{
    self, par_map, Element, LimitAnalysisProblem, LinearEquality, StrengthUncertainty,
};
use crate::linalg::{rank, DenseMatrix, SparseMatrix, Triplets};
use crate::reformulate::{erode, Eroded, Method};
use crate::solver::SolverSettings;
use crate::uncertainty::UncertaintySet;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BendingConfig {
    pub n: usize,
    #[serde(default = "one")]
    pub sigma0: f64,
    #[serde(default)]
    pub eta: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub zero_average: bool,
    /// Fiber positions; equally spaced midpoints of `[−1/2, 1/2]` by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
    /// Fiber areas; `1/n` each by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<f64>>,
}

fn one() -> f64 {
    1.0
}

impl BendingConfig {
    pub fn new(n: usize, eta: f64, gamma: f64) -> Self {
        Self {
            n,
            sigma0: 1.0,
            eta,
            gamma,
            zero_average: false,
            y: None,
            a: None,
        }
    }

    pub fn zero_average(mut self) -> Self {
        self.zero_average = true;
        self
    }

    pub fn positions(&self) -> Vec<f64> {
        self.y.clone().unwrap_or_else(|| {
            let n = self.n as f64;
            (0..self.n).map(|i| (i as f64 + 0.5) / n - 0.5).collect()
        })
    }

    pub fn areas(&self) -> Vec<f64> {
        self.a.clone().unwrap_or_else(|| vec![1.0 / self.n as f64; self.n])
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if self.n == 0 {
            return bad("bending needs at least one fiber".into());
        }
        if !(self.sigma0 > 0.0 && self.sigma0.is_finite()) {
            return bad(format!("sigma0 must be positive, got {}", self.sigma0));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return bad(format!("eta = {} outside [0, 1]", self.eta));
        }
        if !(0.0..=self.n as f64).contains(&self.gamma) {
            return bad(format!("gamma = {} outside [0, {}]", self.gamma, self.n));
        }
        let (y, a) = (self.positions(), self.areas());
        if y.len() != self.n || a.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "{} positions and {} areas for {} fibers",
                y.len(),
                a.len(),
                self.n
            )));
        }
        if a.iter().any(|v| !(*v > 0.0)) || (a.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad("fiber areas must be positive and sum to 1".into());
        }
        Ok(())
    }

    /// `σ₀ Σ a_i |y_i|`, the fully plastic moment.
    pub fn nominal_reference(&self) -> f64 {
        self.sigma0 * self.positions().iter().zip(self.areas()).map(|(y, a)| a * y.abs()).sum::<f64>()
    }

    /// `(1 − η min{Γ, 1}) λ_N`.
    pub fn static_rc_reference(&self) -> f64 {
        (1.0 - self.eta * self.gamma.min(1.0)) * self.nominal_reference()
    }

    /// `(1 − η + η(1 − Γ/n)²) λ_N`, the large-`n` adjustable limit load.
    pub fn large_n_reference(&self) -> f64 {
        let r = 1.0 - self.gamma / self.n as f64;
        (1.0 - self.eta + self.eta * r * r) * self.nominal_reference()
    }

    /// `λ⁺` at the uniform realization `ζ_i = Γ/n`.
    pub fn uniform_reference(&self) -> f64 {
        (1.0 - self.eta * self.gamma / self.n as f64) * self.nominal_reference()
    }
}

/// One moment equation `Σ −y_i a_i σ_i = λ`, interval criteria `|σ_i| ≤ σ₀`
/// degraded to `(1 − η ζ_i) σ₀`, and a one-sided budget set.
pub fn build_bending(cfg: &BendingConfig) -> Result<LimitAnalysisProblem> {
    cfg.validate()?;
    let (n, y, a) = (cfg.n, cfg.positions(), cfg.areas());
    let mut h = Triplets::new(1, n);
    for i in 0..n {
        h.push(0, i, -y[i] * a[i]);
    }
    let criterion = StrengthCriterion::interval(cfg.sigma0)?;
    let elements = (0..n)
        .map(|i| Element {
            indices: vec![i],
            criterion: criterion.clone(),
        })
        .collect();
    let strength_uncertainty = (0..n)
        .map(|i| {
            let mut b = vec![0.0; n];
            b[i] = cfg.eta;
            StrengthUncertainty {
                element: i,
                sigma: DenseMatrix::zeros(1, n),
                b,
            }
        })
        .collect();
    let extra_equalities = if cfg.zero_average {
        vec![LinearEquality {
            terms: a.iter().copied().enumerate().collect(),
            rhs: 0.0,
        }]
    } else {
        Vec::new()
    };
    let p = LimitAnalysisProblem {
        h: SparseMatrix::from_triplets(&h).map_err(Error::InvalidInput)?,
        f_ref: vec![-1.0],
        f_fix0: Vec::new(),
        f_fix: None,
        elements,
        strength_uncertainty,
        extra_equalities,
        set: Some(UncertaintySet::one_sided_budget(n, cfg.gamma)?),
    };
    p.validate()?;
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Support {
    pub node: usize,
    pub fixed: Vec<Axis>,
}

/// Missing JSON fields take the default geometry's values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrussConfig {
    pub nodes: Vec<[f64; 2]>,
    pub members: Vec<[usize; 2]>,
    pub supports: Vec<Support>,
    /// Axial strength, `|N_e| ≤ R₀`.
    pub r0: f64,
    pub load_node: usize,
    /// Reference force `F` at `load_node`.
    pub force: [f64; 2],
    /// Free degrees of freedom carrying an uncertain load of amplitude `αλ_N|F|`.
    pub uncertain_dofs: Vec<(usize, Axis)>,
    pub alpha: f64,
}

impl Default for TrussConfig {
    /// Two unit square bays and a triangular overhang, pinned at the left,
    /// on a roller at node 5, loaded downward at the top of the first bay.
    fn default() -> Self {
        Self {
            nodes: vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0], [2.0, 1.0], [2.0, 0.0], [2.5, 0.0]],
            members: vec![[0, 3], [1, 2], [2, 3], [1, 3], [0, 2], [2, 4], [3, 5], [4, 5], [3, 4], [2, 5], [4, 6], [5, 6]],
            supports: vec![
                Support {
                    node: 0,
                    fixed: vec![Axis::X, Axis::Y],
                },
                Support {
                    node: 1,
                    fixed: vec![Axis::X, Axis::Y],
                },
                Support {
                    node: 5,
                    fixed: vec![Axis::Y],
                },
            ],
            r0: 1.0,
            load_node: 2,
            force: [0.0, -1.0],
            uncertain_dofs: vec![
                (2, Axis::X),
                (3, Axis::X),
                (3, Axis::Y),
                (4, Axis::X),
                (4, Axis::Y),
                (5, Axis::X),
                (6, Axis::X),
                (6, Axis::Y),
            ],
            alpha: 0.0,
        }
    }
}

impl TrussConfig {
    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    /// Row of each `(node, axis)` in the equilibrium system, `None` when fixed.
    pub fn dof_rows(&self) -> Vec<[Option<usize>; 2]> {
        let mut rows = vec![[None, None]; self.nodes.len()];
        let mut next = 0;
        for (k, r) in rows.iter_mut().enumerate() {
            for (a, axis) in [Axis::X, Axis::Y].into_iter().enumerate() {
                let fixed = self.supports.iter().any(|s| s.node == k && s.fixed.contains(&axis));
                if !fixed {
                    r[a] = Some(next);
                    next += 1;
                }
            }
        }
        rows
    }

    fn row_of(&self, rows: &[[Option<usize>; 2]], node: usize, axis: Axis) -> Result<usize> {
        rows.get(node)
            .and_then(|r| r[axis as usize])
            .ok_or_else(|| Error::InvalidInput(format!("node {node} {axis:?} is not a free degree of freedom")))
    }

    pub fn validate(&self) -> Result<()> {
        let nn = self.nodes.len();
        let bad = |m: String| Err(Error::InvalidInput(m));
        if !(self.r0 > 0.0 && self.r0.is_finite()) {
            return bad(format!("r0 must be positive, got {}", self.r0));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be nonnegative, got {}", self.alpha));
        }
        for (e, [i, j]) in self.members.iter().enumerate() {
            if *i >= nn || *j >= nn || i == j {
                return bad(format!("member {e} joins nodes {i} and {j} of {nn}"));
            }
            let d = [self.nodes[*j][0] - self.nodes[*i][0], self.nodes[*j][1] - self.nodes[*i][1]];
            if d[0].hypot(d[1]) == 0.0 {
                return bad(format!("member {e} has zero length"));
            }
        }
        if self.supports.iter().any(|s| s.node >= nn) || self.load_node >= nn {
            return bad("support or load refers to a missing node".into());
        }
        Ok(())
    }

    fn equilibrium(&self) -> Result<(SparseMatrix, Vec<f64>)> {
        let rows = self.dof_rows();
        let ndof = rows.iter().flatten().flatten().count();
        let mut h = Triplets::new(ndof, self.members.len());
        for (e, [i, j]) in self.members.iter().enumerate() {
            let (pi, pj) = (self.nodes[*i], self.nodes[*j]);
            let len = (pj[0] - pi[0]).hypot(pj[1] - pi[1]);
            let u = [(pj[0] - pi[0]) / len, (pj[1] - pi[1]) / len];
            // tension pulls node i toward j and node j toward i
            for a in 0..2 {
                if let Some(r) = rows[*i][a] {
                    h.push(r, e, u[a]);
                }
                if let Some(r) = rows[*j][a] {
                    h.push(r, e, -u[a]);
                }
            }
        }
        let mut f = vec![0.0; ndof];
        for (a, axis) in [Axis::X, Axis::Y].into_iter().enumerate() {
            if self.force[a] != 0.0 {
                f[self.row_of(&rows, self.load_node, axis)?] = self.force[a];
            }
        }
        Ok((SparseMatrix::from_triplets(&h).map_err(Error::InvalidInput)?, f))
    }
}

/// The truss with `F_fix = αλ_N|F|·[e_1 … e_8]` on a box set. Runs a
/// nominal solve of the same geometry to obtain `λ_N`.
pub fn build_truss(cfg: &TrussConfig, settings: &SolverSettings) -> Result<LimitAnalysisProblem> {
    cfg.validate()?;
    let (h, f_ref) = cfg.equilibrium()?;
    let hd = h.to_dense();
    let mut aug = hd.to_rows();
    for (row, f) in aug.iter_mut().zip(&f_ref) {
        row.push(*f);
    }
    let aug = DenseMatrix::from_rows(&aug).map_err(Error::InvalidInput)?;
    if rank(&aug, 1e-10) > rank(&hd, 1e-10) {
        return Err(Error::InvalidInput(
            "geometrically unstable truss: no bar forces equilibrate the reference load".into(),
        ));
    }
    let criterion = StrengthCriterion::interval(cfg.r0)?;
    let elements = (0..cfg.members.len())
        .map(|e| Element {
            indices: vec![e],
            criterion: criterion.clone(),
        })
        .collect();
    let mut p = LimitAnalysisProblem {
        h,
        f_ref,
        f_fix0: Vec::new(),
        f_fix: None,
        elements,
        strength_uncertainty: Vec::new(),
        extra_equalities: Vec::new(),
        set: None,
    };
    let nominal = limit_analysis::solve_nominal(&p, settings).map_err(|e| match e {
        Error::Solver { status, .. } => Error::Solver {
            status,
            context: "nominal truss solve (unstable geometry or missing strength bound?)".into(),
        },
        other => other,
    })?;
    let rows = cfg.dof_rows();
    let m = cfg.uncertain_dofs.len();
    if m > 0 {
        let amp = cfg.alpha * nominal.lambda * cfg.force[0].hypot(cfg.force[1]);
        let mut f = DenseMatrix::zeros(p.num_equations(), m);
        for (j, (node, axis)) in cfg.uncertain_dofs.iter().enumerate() {
            f[(cfg.row_of(&rows, *node, *axis)?, j)] = amp;
        }
        p.f_fix = Some(f);
        p.set = Some(UncertaintySet::box_set(m)?);
    }
    p.validate()?;
    Ok(p)
}

/// Robust Mohr–Coulomb reference data in MPa: `c₀ = 1`, `φ₀ = 30°`,
/// `Δc = 0.15`, `Δφ = 5°`, `Δf_t = 0`, tension cutoff at the apex `c₀ cot φ₀`.
pub fn mohr_coulomb_reference(rho: f64) -> MohrCoulombParams {
    let phi0 = 30f64.to_radians();
    MohrCoulombParams {
        c0: 1.0,
        phi0,
        ft0: 1.0 / phi0.tan(),
        dc: 0.15,
        dphi: 5f64.to_radians(),
        dft: 0.0,
        rho,
    }
}

/// Plane-stress von Mises (`σ₀ = 1`) eroded by `α·U`.
pub fn eroded_von_mises(alpha: f64, set: &UncertaintySet, method: Method) -> Result<Eroded> {
    erode(&StrengthCriterion::plane_stress_von_mises(1.0)?, set, alpha, method)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepQuantity {
    Nominal,
    Rc,
    Aarc,
    Vertex,
    Sampling,
}

impl SweepQuantity {
    pub fn name(&self) -> &'static str {
        match self {
            SweepQuantity::Nominal => "nominal",
            SweepQuantity::Rc => "rc",
            SweepQuantity::Aarc => "aarc",
            SweepQuantity::Vertex => "vertex",
            SweepQuantity::Sampling => "sampling",
        }
    }
}

impl std::str::FromStr for SweepQuantity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nominal" => Ok(Self::Nominal),
            "rc" => Ok(Self::Rc),
            "aarc" => Ok(Self::Aarc),
            "vertex" => Ok(Self::Vertex),
            "sampling" => Ok(Self::Sampling),
            _ => Err(Error::InvalidInput(format!("unknown sweep quantity {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Bending(BendingConfig),
    Truss(TrussConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub family: Family,
    /// Bending budgets; ignored for the truss.
    #[serde(default)]
    pub gammas: Vec<f64>,
    #[serde(default)]
    pub etas: Vec<f64>,
    /// Truss load amplitudes; ignored for bending.
    #[serde(default)]
    pub alphas: Vec<f64>,
    pub quantities: Vec<SweepQuantity>,
    /// Reformulation used for `rc` and `aarc`.
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_method() -> Method {
    Method::Roos
}

fn default_samples() -> usize {
    100
}

/// One CSV row. Parameters that do not apply to the family are empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub gamma: Option<f64>,
    pub eta: Option<f64>,
    pub alpha: Option<f64>,
    pub method: String,
    #[serde(with = "limit_analysis::nonfinite")]
    pub lambda: f64,
    #[serde(with = "limit_analysis::nonfinite")]
    pub lambda_ratio: f64,
    pub status: String,
    pub argmin: Option<usize>,
    pub wall_time: f64,
}

pub const SWEEP_HEADER: &str = "gamma,eta,alpha,method,lambda,lambda_ratio,status,argmin,wall_time";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

impl SweepRow {
    pub fn to_csv(&self) -> String {
        [
            opt(&self.gamma),
            opt(&self.eta),
            opt(&self.alpha),
            csv_field(&self.method),
            self.lambda.to_string(),
            self.lambda_ratio.to_string(),
            csv_field(&self.status),
            opt(&self.argmin),
            format!("{:.6}", self.wall_time),
        ]
        .join(",")
    }
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.to_csv());
        s.push('\n');
    }
    s
}

struct Cell {
    gamma: Option<f64>,
    eta: Option<f64>,
    alpha: Option<f64>,
}

/// Runs every quantity on every grid cell, cells in parallel. Failures are
/// recorded in the `status` column and the sweep continues.
pub fn sweep(spec: &SweepSpec, settings: &SolverSettings) -> Result<Vec<SweepRow>> {
    let cells: Vec<Cell> = match &spec.family {
        Family::Bending(base) => {
            let gammas = if spec.gammas.is_empty() { vec![base.gamma] } else { spec.gammas.clone() };
            let etas = if spec.etas.is_empty() { vec![base.eta] } else { spec.etas.clone() };
            etas.iter()
                .flat_map(|e| {
                    gammas.iter().map(move |g| Cell {
                        gamma: Some(*g),
                        eta: Some(*e),
                        alpha: None,
                    })
                })
                .collect()
        }
        Family::Truss(base) => {
            let alphas = if spec.alphas.is_empty() { vec![base.alpha] } else { spec.alphas.clone() };
            alphas
                .iter()
                .map(|a| Cell {
                    gamma: None,
                    eta: None,
                    alpha: Some(*a),
                })
                .collect()
        }
    };
    if spec.quantities.is_empty() {
        return Err(Error::InvalidInput("sweep needs at least one quantity".into()));
    }
    let rows = par_map(&cells, |cell| run_cell(spec, cell, settings));
    Ok(rows.into_iter().flatten().collect())
}

fn run_cell(spec: &SweepSpec, cell: &Cell, settings: &SolverSettings) -> Vec<SweepRow> {
    let row = |method: &str, lambda: f64, ratio: f64, status: String, argmin: Option<usize>, t: f64| SweepRow {
        gamma: cell.gamma,
        eta: cell.eta,
        alpha: cell.alpha,
        method: method.into(),
        lambda,
        lambda_ratio: ratio,
        status,
        argmin,
        wall_time: t,
    };
    let start = Instant::now();
    let built = match &spec.family {
        Family::Bending(base) => build_bending(&BendingConfig {
            gamma: cell.gamma.unwrap_or(base.gamma),
            eta: cell.eta.unwrap_or(base.eta),
            ..base.clone()
        }),
        Family::Truss(base) => build_truss(&base.clone().with_alpha(cell.alpha.unwrap_or(base.alpha)), settings),
    };
    let problem = match built {
        Ok(p) => p,
        Err(e) => {
            let t = start.elapsed().as_secs_f64();
            return spec
                .quantities
                .iter()
                .map(|q| row(q.name(), f64::NAN, f64::NAN, format!("error: {e}"), None, t))
                .collect();
        }
    };
    let nominal = limit_analysis::solve_nominal(&problem, settings).map(|s| s.lambda);
    let lambda_n = *nominal.as_ref().unwrap_or(&f64::NAN);
    spec.quantities
        .iter()
        .map(|q| {
            let t0 = Instant::now();
            let out: Result<(f64, Option<usize>)> = match q {
                SweepQuantity::Nominal => nominal.as_ref().map(|l| (*l, None)).map_err(|e| Error::InvalidInput(e.to_string())),
                SweepQuantity::Rc => limit_analysis::solve_static_rc(&problem, spec.method, settings).map(|s| (s.lambda, None)),
                SweepQuantity::Aarc => limit_analysis::solve_aarc(&problem, spec.method, settings).map(|s| (s.lambda, None)),
                SweepQuantity::Vertex => {
                    limit_analysis::worst_case_vertex_oracle(&problem, settings).map(|v| (v.lambda_min, Some(v.argmin)))
                }
                SweepQuantity::Sampling => {
                    limit_analysis::worst_case_sampling_oracle(&problem, spec.seed, spec.samples, settings).map(|s| (s.stats.min, None))
                }
            };
            let t = t0.elapsed().as_secs_f64();
            let name = match q {
                SweepQuantity::Rc | SweepQuantity::Aarc => format!("{}:{}", q.name(), spec.method.name()),
                _ => q.name().to_string(),
            };
            match out {
                Ok((l, argmin)) => row(&name, l, l / lambda_n, "optimal".into(), argmin, t),
                Err(e) => row(&name, f64::NAN, f64::NAN, format!("error: {e}"), None, t),
            }
        })
        .collect()
}
