//! Homogeneous self-dual embedding with Nesterov–Todd scaling and a
//! Mehrotra predictor-corrector.
//!
//! Internally the program is `min c̃ᵀx s.t. E x = r, x ∈ K` with `c̃ = -c`
//! and dual `max rᵀy s.t. Eᵀy + z = c̃, z ∈ K*` (`z = 0` on free blocks).

use super::cones::{self, Block, NtScaling};
use super::presolve::Presolved;
use super::{ConeProgram, ConicBackend, Residuals, SolveReport, SolveStatus, SolverSettings};
use crate::linalg::{self, PivotRegularization, QuasiDefiniteLdl, SparseMatrix};

#[derive(Debug, Clone, Copy, Default)]
pub struct InteriorPoint;

impl ConicBackend for InteriorPoint {
    fn name(&self) -> &str {
        "hsde-ipm"
    }

    fn solve(&self, program: &ConeProgram, settings: &SolverSettings) -> SolveReport {
        let (n, p) = (program.num_vars(), program.num_rows());
        if program.validate().is_err() {
            return SolveReport::failed(SolveStatus::NumericalFailure, n, p, settings.tol);
        }
        if !settings.presolve {
            return solve_retrying(program, settings);
        }
        match Presolved::new(program) {
            Err(_) => SolveReport::failed(SolveStatus::PrimalInfeasible, n, p, settings.tol),
            Ok(pre) => {
                let r = solve_retrying(&pre.program, settings);
                pre.postsolve(r)
            }
        }
    }
}

/// Stalls near infeasibility usually clear up with a stronger static
/// regularization; the result is still checked on the original program.
fn solve_retrying(prog: &ConeProgram, st: &SolverSettings) -> SolveReport {
    let first = solve_core(prog, st);
    if first.status != SolveStatus::NumericalFailure {
        return first;
    }
    let mut retry = *st;
    for reg in RETRY_REGULARIZATION {
        if reg <= st.static_reg {
            continue;
        }
        retry.static_reg = reg;
        let r = solve_core(prog, &retry);
        if r.status != SolveStatus::NumericalFailure {
            return r;
        }
    }
    first
}

const RUIZ_PASSES: usize = 15;
const SCALE_BOUNDS: (f64, f64) = (1e-4, 1e4);
/// Iterations allowed past the residual test to tighten the objective bound.
const EXTRA_ITERATIONS: usize = 5;
const RETRY_REGULARIZATION: [f64; 2] = [1e-7, 1e-5];

/// Ruiz equilibration of `E`, with one common column factor per
/// second-order block so that cone membership is preserved.
fn equilibrate(e: &SparseMatrix, blocks: &[Block]) -> (Vec<f64>, Vec<f64>) {
    let (m, n) = (e.nrows(), e.ncols());
    let mut dr = vec![1.0; m];
    let mut dc = vec![1.0; n];
    for _ in 0..RUIZ_PASSES {
        let s = e.scale(&dr, &dc);
        let rn = s.row_inf_norms();
        let mut cn = s.col_inf_norms();
        for b in blocks {
            if let Block::Soc { .. } = b {
                let mx = cn[b.range()].iter().fold(0.0f64, |a, v| a.max(*v));
                cn[b.range()].iter_mut().for_each(|v| *v = mx);
            }
        }
        let mut done = true;
        for (d, v) in dr.iter_mut().zip(&rn).chain(dc.iter_mut().zip(&cn)) {
            if *v > 0.0 {
                if (v - 1.0).abs() > 1e-3 {
                    done = false;
                }
                *d = (*d / v.sqrt()).clamp(SCALE_BOUNDS.0, SCALE_BOUNDS.1);
            }
        }
        if done {
            break;
        }
    }
    (dr, dc)
}

/// Quasi-definite KKT system `[D + δI, Eᵀ; E, -δI]` with a fixed pattern.
struct Kkt {
    n: usize,
    pattern: Vec<(usize, usize)>,
    /// Unregularized values (`D`, `E`, zero), used for refinement.
    base: Vec<f64>,
    values: Vec<f64>,
    cone_len: usize,
    diag_pos: Vec<usize>,
    ldl: QuasiDefiniteLdl,
    delta: f64,
    refine_steps: usize,
}

impl Kkt {
    fn new(blocks: &[Block], e: &SparseMatrix, delta: f64, refine_steps: usize) -> Result<Self, ()> {
        let (m, n) = (e.nrows(), e.ncols());
        let mut pattern = cones::kkt_cone_pattern(blocks);
        let cone_len = pattern.len();
        let mut base = vec![0.0; cone_len];
        for i in 0..m {
            let (cols, vals) = e.row(i);
            for (j, v) in cols.iter().zip(vals) {
                pattern.push((*j, n + i));
                base.push(*v);
            }
        }
        for i in 0..m {
            pattern.push((n + i, n + i));
            base.push(0.0);
        }
        let diag_pos = pattern
            .iter()
            .enumerate()
            .filter(|(_, (i, j))| i == j)
            .map(|(k, _)| k)
            .collect();
        let signs: Vec<f64> = (0..n + m).map(|k| if k < n { 1.0 } else { -1.0 }).collect();
        let ldl = QuasiDefiniteLdl::new(n + m, &pattern, &signs).map_err(|_| ())?;
        Ok(Self {
            n,
            values: base.clone(),
            pattern,
            base,
            cone_len,
            diag_pos,
            ldl,
            delta,
            refine_steps,
        })
    }

    fn factor(&mut self, cone_values: &[f64]) -> Result<(), ()> {
        debug_assert_eq!(cone_values.len(), self.cone_len);
        self.base[..self.cone_len].copy_from_slice(cone_values);
        self.values.copy_from_slice(&self.base);
        for &k in &self.diag_pos {
            let (i, _) = self.pattern[k];
            self.values[k] += if i < self.n { self.delta } else { -self.delta };
        }
        self.ldl
            .factor(&self.values, PivotRegularization::default())
            .map(|_| ())
            .map_err(|_| ())
    }

    fn mul_base(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for (&(i, j), a) in self.pattern.iter().zip(&self.base) {
            out[i] += a * v[j];
            if i != j {
                out[j] += a * v[i];
            }
        }
        out
    }

    /// Solves against the unregularized matrix using iterative refinement.
    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut sol = rhs.to_vec();
        self.ldl.solve(&mut sol);
        let scale = 1.0 + linalg::norm_inf(rhs);
        let mut res = linalg::sub(rhs, &self.mul_base(&sol));
        let mut res_norm = linalg::norm_inf(&res);
        for _ in 0..self.refine_steps {
            if res_norm <= 1e-14 * scale {
                break;
            }
            let mut corr = res.clone();
            self.ldl.solve(&mut corr);
            let cand: Vec<f64> = sol.iter().zip(&corr).map(|(a, b)| a + b).collect();
            let cand_res = linalg::sub(rhs, &self.mul_base(&cand));
            let cand_norm = linalg::norm_inf(&cand_res);
            if !(cand_norm < res_norm) {
                break;
            }
            sol = cand;
            res = cand_res;
            res_norm = cand_norm;
        }
        sol
    }
}

struct Scaled {
    e: SparseMatrix,
    r: Vec<f64>,
    c: Vec<f64>,
    dr: Vec<f64>,
    dc: Vec<f64>,
    cost_scale: f64,
}

struct Quality {
    pres: f64,
    dres: f64,
    gap: f64,
    objective_error: f64,
    pobj: f64,
    dobj: f64,
}

fn solve_core(prog: &ConeProgram, st: &SolverSettings) -> SolveReport {
    let n = prog.num_vars();
    let m = prog.num_rows();
    let blocks = cones::blocks(&prog.cones);
    let c_min: Vec<f64> = prog.objective.iter().map(|v| -v).collect();

    if n == 0 {
        let feasible = prog.eq_rhs.iter().all(|v| v.abs() <= st.tol);
        let status = if feasible { SolveStatus::Optimal } else { SolveStatus::PrimalInfeasible };
        let mut r = SolveReport::failed(status, 0, m, st.tol);
        if feasible {
            r.objective_value = prog.offset;
            r.dual_objective = prog.offset;
        }
        return r;
    }

    let (dr, dc) = if st.equilibrate {
        equilibrate(&prog.eq_matrix, &blocks)
    } else {
        (vec![1.0; m], vec![1.0; n])
    };
    let cs: Vec<f64> = c_min.iter().zip(&dc).map(|(c, d)| c * d).collect();
    let cmax = linalg::norm_inf(&cs);
    let cost_scale = if st.equilibrate && cmax > 0.0 {
        (1.0 / cmax).clamp(SCALE_BOUNDS.0, SCALE_BOUNDS.1)
    } else {
        1.0
    };
    let sc = Scaled {
        e: prog.eq_matrix.scale(&dr, &dc),
        r: prog.eq_rhs.iter().zip(&dr).map(|(r, d)| r * d).collect(),
        c: cs.iter().map(|v| v * cost_scale).collect(),
        dr,
        dc,
        cost_scale,
    };

    let Ok(mut kkt) = Kkt::new(&blocks, &sc.e, st.static_reg, st.refine_steps) else {
        return SolveReport::failed(SolveStatus::NumericalFailure, n, m, st.tol);
    };
    let nu = cones::degree(&blocks) as f64;
    let e_id = cones::identity(&blocks, n);
    let is_free: Vec<bool> = {
        let mut f = vec![false; n];
        for b in &blocks {
            if let Block::Free { .. } = b {
                f[b.range()].iter_mut().for_each(|v| *v = true);
            }
        }
        f
    };

    // starting point from two least-squares solves
    let mut ident = Vec::new();
    for b in &blocks {
        match *b {
            Block::Soc { len, .. } => {
                for j in 0..len {
                    for i in 0..=j {
                        ident.push(if i == j { 1.0 } else { 0.0 });
                    }
                }
            }
            _ => ident.extend(std::iter::repeat_n(1.0, b.range().len())),
        }
    }
    if kkt.factor(&ident).is_err() {
        return SolveReport::failed(SolveStatus::NumericalFailure, n, m, st.tol);
    }
    let mut rhs = vec![0.0; n + m];
    rhs[n..].copy_from_slice(&sc.r);
    let sol = kkt.solve(&rhs);
    let mut x = sol[..n].to_vec();
    rhs[..n].copy_from_slice(&sc.c);
    rhs[n..].iter_mut().for_each(|v| *v = 0.0);
    let sol = kkt.solve(&rhs);
    let mut y = sol[n..].to_vec();
    let mut z = sol[..n].to_vec();
    for j in 0..n {
        if is_free[j] {
            z[j] = 0.0;
        }
    }
    shift_interior(&blocks, &mut x);
    shift_interior(&blocks, &mut z);
    let (mut tau, mut kappa) = (1.0f64, 1.0f64);

    let mut cone_vals = Vec::new();
    let mut best: Option<(f64, Vec<f64>, Vec<f64>, Vec<f64>, f64)> = None;
    let mut iterations = 0;
    let mut status = SolveStatus::MaxIter;
    let mut quality = evaluate(prog, &sc, &c_min, &x, &y, &z, tau);
    let mut converged_at: Option<usize> = None;
    let mut accepted: Option<(Vec<f64>, Vec<f64>, Vec<f64>, f64)> = None;

    for iter in 0..=st.max_iter {
        iterations = iter;
        quality = evaluate(prog, &sc, &c_min, &x, &y, &z, tau);
        if !(quality.pres.is_finite() && quality.dres.is_finite() && quality.gap.is_finite()) {
            status = SolveStatus::NumericalFailure;
            break;
        }
        let merit = quality.pres.max(quality.dres).max(quality.gap);
        if merit <= st.tol {
            // a few more steps to bound the objective error, when they help
            let since = *converged_at.get_or_insert(iter);
            if quality.objective_error <= st.tol || iter - since >= EXTRA_ITERATIONS {
                status = SolveStatus::Optimal;
                break;
            }
            accepted = Some((x.clone(), y.clone(), z.clone(), tau));
        }
        if best.as_ref().is_none_or(|b| merit < b.0) {
            best = Some((merit, x.clone(), y.clone(), z.clone(), tau));
        }
        if let Some(s) = infeasibility(prog, &sc, &x, &y, &z, st.tol_infeasible) {
            status = s;
            break;
        }
        if iter == st.max_iter {
            break;
        }

        // residuals of the embedding
        let ex = sc.e.mul_vec(&x);
        let rp: Vec<f64> = ex.iter().zip(&sc.r).map(|(a, r)| a - r * tau).collect();
        let ety = sc.e.tmul_vec(&y);
        let rd: Vec<f64> = (0..n).map(|j| sc.c[j] * tau - ety[j] - z[j]).collect();
        let rg = linalg::dot(&sc.r, &y) - linalg::dot(&sc.c, &x) - kappa;
        let mu = (cones::cone_dot(&blocks, &x, &z) + tau * kappa) / (nu + 1.0);

        let Some((nt, lambda)) = NtScaling::compute(&blocks, &x, &z) else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        nt.winv2_values(&mut cone_vals);
        if kkt.factor(&cone_vals).is_err() {
            status = SolveStatus::NumericalFailure;
            break;
        }
        rhs[..n].iter_mut().zip(&sc.c).for_each(|(v, c)| *v = -c);
        rhs[n..].copy_from_slice(&sc.r);
        let sol1 = kkt.solve(&rhs);
        let (x1, y1) = sol1.split_at(n);

        let direction = |dx_target: &[f64], dtau_target: f64, eta: f64, rhs: &mut Vec<f64>| {
            let lam_div = cones::jordan_div(&blocks, &lambda, dx_target);
            let w_term = nt.apply_winv(&lam_div);
            for j in 0..n {
                rhs[j] = -eta * rd[j] + w_term[j];
            }
            for i in 0..m {
                rhs[n + i] = -eta * rp[i];
            }
            let sol2 = kkt.solve(rhs);
            let (x2, y2) = sol2.split_at(n);
            let num = linalg::dot(&sc.r, y2) + linalg::dot(&sc.c, x2) - eta * rg + dtau_target / tau;
            let den = kappa / tau - linalg::dot(&sc.r, y1) - linalg::dot(&sc.c, x1);
            let dtau = num / den;
            let dx: Vec<f64> = (0..n).map(|j| x2[j] + dtau * x1[j]).collect();
            let dy: Vec<f64> = (0..m).map(|i| -(y2[i] + dtau * y1[i])).collect();
            let winv2_dx = nt.apply_winv(&nt.apply_winv(&dx));
            let dz: Vec<f64> = (0..n).map(|j| w_term[j] - winv2_dx[j]).collect();
            let dkappa = (dtau_target - kappa * dtau) / tau;
            (dx, dy, dz, dtau, dkappa)
        };

        let step_len = |dx: &[f64], dz: &[f64], dtau: f64, dkappa: f64| {
            let mut a = cones::max_step(&blocks, &x, dx).min(cones::max_step(&blocks, &z, dz));
            if dtau < 0.0 {
                a = a.min(-tau / dtau);
            }
            if dkappa < 0.0 {
                a = a.min(-kappa / dkappa);
            }
            a
        };

        // predictor
        let lam_sq = cones::jordan(&blocks, &lambda, &lambda);
        let aff_target: Vec<f64> = lam_sq.iter().map(|v| -v).collect();
        let (dxa, _dya, dza, dtaua, dkappaa) = direction(&aff_target, -tau * kappa, 1.0, &mut rhs);
        let alpha_aff = step_len(&dxa, &dza, dtaua, dkappaa).min(1.0);
        let sigma = (1.0 - alpha_aff).powi(3);

        // corrector
        let cross = cones::jordan(&blocks, &nt.apply_winv(&dxa), &nt.apply_w(&dza));
        let target: Vec<f64> = (0..n)
            .map(|j| -lam_sq[j] - cross[j] + sigma * mu * e_id[j])
            .collect();
        let dtau_target = -tau * kappa - dtaua * dkappaa + sigma * mu;
        let (dx, dy, dz, dtau, dkappa) = direction(&target, dtau_target, 1.0 - sigma, &mut rhs);
        let alpha = (st.step_fraction * step_len(&dx, &dz, dtau, dkappa)).min(1.0);
        if !(alpha > 1e-10) || !alpha.is_finite() {
            status = SolveStatus::NumericalFailure;
            break;
        }
        linalg::axpy(alpha, &dx, &mut x);
        linalg::axpy(alpha, &dy, &mut y);
        linalg::axpy(alpha, &dz, &mut z);
        tau += alpha * dtau;
        kappa += alpha * dkappa;
        for j in 0..n {
            if is_free[j] {
                z[j] = 0.0;
            }
        }
        // keep the iterates proportionate to the embedding
        let scale = tau.max(kappa);
        if scale > 1e8 {
            for v in x.iter_mut().chain(y.iter_mut()).chain(z.iter_mut()) {
                *v /= scale;
            }
            tau /= scale;
            kappa /= scale;
        }
    }

    match status {
        SolveStatus::PrimalInfeasible | SolveStatus::DualInfeasible => {
            certificate_report(prog, &sc, status, &x, &y, &z, iterations, st.tol)
        }
        _ => {
            if status != SolveStatus::Optimal {
                if let Some((ax, ay, az, at)) = accepted {
                    status = SolveStatus::Optimal;
                    quality = evaluate(prog, &sc, &c_min, &ax, &ay, &az, at);
                    x = ax;
                    y = ay;
                    z = az;
                    tau = at;
                } else if let Some((_, bx, by, bz, bt)) = best {
                    quality = evaluate(prog, &sc, &c_min, &bx, &by, &bz, bt);
                    x = bx;
                    y = by;
                    z = bz;
                    tau = bt;
                }
            }
            let (xo, yo, zo) = unscale(&sc, &x, &y, &z, tau);
            SolveReport {
                status,
                x: xo,
                // reported duals follow the maximization convention
                y: yo.iter().map(|v| -v).collect(),
                z: zo,
                objective_value: -quality.pobj + prog.offset,
                dual_objective: -quality.dobj + prog.offset,
                iterations,
                residuals: Residuals {
                    primal: quality.pres,
                    dual: quality.dres,
                    gap: quality.gap,
                },
                tolerance: st.tol,
            }
        }
    }
}

fn shift_interior(blocks: &[Block], v: &mut [f64]) {
    let a = cones::max_neg_eig(blocks, v);
    if a >= -1e-8 {
        cones::add_identity(blocks, v, 1.0 + a.max(0.0));
    }
}

fn unscale(sc: &Scaled, x: &[f64], y: &[f64], z: &[f64], tau: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let xo = x.iter().zip(&sc.dc).map(|(v, d)| v * d / tau).collect();
    let yo = y.iter().zip(&sc.dr).map(|(v, d)| v * d / (sc.cost_scale * tau)).collect();
    let zo = z.iter().zip(&sc.dc).map(|(v, d)| v / (d * sc.cost_scale * tau)).collect();
    (xo, yo, zo)
}

/// Residuals of the current iterate measured on the original program.
fn evaluate(prog: &ConeProgram, sc: &Scaled, c_min: &[f64], x: &[f64], y: &[f64], z: &[f64], tau: f64) -> Quality {
    let (xo, yo, zo) = unscale(sc, x, y, z, tau);
    let r = &prog.eq_rhs;
    let ex = prog.eq_matrix.mul_vec(&xo);
    let rp = linalg::sub(&ex, r);
    let pres = linalg::norm_inf(&rp) / (1.0 + linalg::norm_inf(r).max(linalg::norm_inf(&xo)));
    let ety = prog.eq_matrix.tmul_vec(&yo);
    let rd: Vec<f64> = (0..xo.len()).map(|j| ety[j] + zo[j] - c_min[j]).collect();
    let dres = linalg::norm_inf(&rd) / (1.0 + linalg::norm_inf(c_min).max(linalg::norm_inf(&zo)));
    let pobj = linalg::dot(c_min, &xo);
    let dobj = linalg::dot(r, &yo);
    let denom = 1.0 + pobj.abs().min(dobj.abs());
    let gap = (pobj - dobj).abs() / denom;
    // many small dual residuals add up in the objective
    let objective_error = (xo.iter().zip(&rd).map(|(x, d)| (x * d).abs()).sum::<f64>()
        + yo.iter().zip(&rp).map(|(y, p)| (y * p).abs()).sum::<f64>())
        / denom;
    Quality {
        pres,
        dres,
        gap,
        objective_error,
        pobj,
        dobj,
    }
}

fn infeasibility(prog: &ConeProgram, sc: &Scaled, x: &[f64], y: &[f64], z: &[f64], tol: f64) -> Option<SolveStatus> {
    let yc: Vec<f64> = y.iter().zip(&sc.dr).map(|(v, d)| v * d).collect();
    let ry = linalg::dot(&prog.eq_rhs, &yc);
    if ry > 0.0 {
        let ety = prog.eq_matrix.tmul_vec(&yc);
        let res = (0..x.len())
            .map(|j| (ety[j] + z[j] / sc.dc[j]).abs())
            .fold(0.0, f64::max);
        if res <= tol * ry {
            return Some(SolveStatus::PrimalInfeasible);
        }
    }
    let xc: Vec<f64> = x.iter().zip(&sc.dc).map(|(v, d)| v * d).collect();
    let cx = linalg::dot(&prog.objective, &xc);
    if cx > 0.0 {
        let res = linalg::norm_inf(&prog.eq_matrix.mul_vec(&xc));
        if res <= tol * cx {
            return Some(SolveStatus::DualInfeasible);
        }
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn certificate_report(
    prog: &ConeProgram,
    sc: &Scaled,
    status: SolveStatus,
    x: &[f64],
    y: &[f64],
    z: &[f64],
    iterations: usize,
    tol: f64,
) -> SolveReport {
    let mut r = SolveReport::failed(status, prog.num_vars(), prog.num_rows(), tol);
    r.iterations = iterations;
    match status {
        SolveStatus::PrimalInfeasible => {
            // y with rᵀy = 1 and -(Eᵀy) ∈ K*, reported with the sign that
            // makes rᵀy negative in the maximization convention
            let yc: Vec<f64> = y.iter().zip(&sc.dr).map(|(v, d)| v * d).collect();
            let s = linalg::dot(&prog.eq_rhs, &yc);
            r.y = yc.iter().map(|v| -v / s).collect();
            r.z = z.iter().zip(&sc.dc).map(|(v, d)| v / (d * s)).collect();
        }
        SolveStatus::DualInfeasible => {
            let xc: Vec<f64> = x.iter().zip(&sc.dc).map(|(v, d)| v * d).collect();
            let s = linalg::dot(&prog.objective, &xc);
            r.x = xc.iter().map(|v| v / s).collect();
        }
        _ => {}
    }
    r
}
