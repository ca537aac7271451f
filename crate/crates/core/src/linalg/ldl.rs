//! LDLᵀ factorization of symmetric quasi-definite matrices.
//!
//! The matrix is supplied as a fixed upper-triangular sparsity pattern whose
//! values can be refreshed between factorizations. Small systems are handled
//! densely; larger ones use a fill-reducing AMD ordering followed by an
//! up-looking sparse factorization driven by the elimination tree.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LdlError {
    #[error("pattern entry ({0}, {1}) is below the diagonal or out of range")]
    BadPattern(usize, usize),
    #[error("missing diagonal entry in column {0}")]
    MissingDiagonal(usize),
    #[error("ordering failed: {0}")]
    Ordering(String),
    #[error("non-finite pivot in column {0}")]
    NonFinite(usize),
}

/// Dynamic pivot regularization: a pivot whose value times the expected sign
/// falls below `eps` is replaced by `sign * delta`.
#[derive(Debug, Clone, Copy)]
pub struct PivotRegularization {
    pub eps: f64,
    pub delta: f64,
}

impl Default for PivotRegularization {
    fn default() -> Self {
        Self {
            eps: 1e-13,
            delta: 2e-7,
        }
    }
}

/// Matrices whose dense storage would stay below this many entries are
/// factored densely.
pub const DENSE_ENTRY_LIMIT: usize = 50_000;

pub struct QuasiDefiniteLdl {
    n: usize,
    signs: Vec<f64>,
    backend: Backend,
}

enum Backend {
    Dense(DenseLdl),
    Sparse(Box<SparseLdl>),
}

impl QuasiDefiniteLdl {
    /// `pattern` lists upper-triangular coordinates `(row, col)` with
    /// `row <= col`, each at most once, including every diagonal entry.
    /// `signs[k]` is the expected sign of pivot `k`.
    pub fn new(n: usize, pattern: &[(usize, usize)], signs: &[f64]) -> Result<Self, LdlError> {
        Self::with_dense_limit(n, pattern, signs, DENSE_ENTRY_LIMIT)
    }

    pub fn with_dense_limit(
        n: usize,
        pattern: &[(usize, usize)],
        signs: &[f64],
        dense_limit: usize,
    ) -> Result<Self, LdlError> {
        assert_eq!(signs.len(), n);
        let mut has_diag = vec![false; n];
        for &(i, j) in pattern {
            if i > j || j >= n {
                return Err(LdlError::BadPattern(i, j));
            }
            if i == j {
                has_diag[i] = true;
            }
        }
        if let Some(k) = has_diag.iter().position(|d| !d) {
            return Err(LdlError::MissingDiagonal(k));
        }
        let backend = if n.saturating_mul(n) <= dense_limit {
            Backend::Dense(DenseLdl::new(n, pattern))
        } else {
            Backend::Sparse(Box::new(SparseLdl::new(n, pattern)?))
        };
        Ok(Self {
            n,
            signs: signs.to_vec(),
            backend,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.backend, Backend::Dense(_))
    }

    /// Factors with `values` given in pattern order. Returns the number of
    /// regularized pivots.
    pub fn factor(&mut self, values: &[f64], reg: PivotRegularization) -> Result<usize, LdlError> {
        match &mut self.backend {
            Backend::Dense(d) => d.factor(values, &self.signs, reg),
            Backend::Sparse(s) => s.factor(values, &self.signs, reg),
        }
    }

    /// Solves in place using the most recent factorization.
    pub fn solve(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        match &self.backend {
            Backend::Dense(d) => d.solve(b),
            Backend::Sparse(s) => s.solve(b),
        }
    }
}

fn regularize(k: usize, d: f64, sign: f64, reg: PivotRegularization, count: &mut usize) -> Result<f64, LdlError> {
    if !d.is_finite() {
        return Err(LdlError::NonFinite(k));
    }
    if d * sign < reg.eps {
        *count += 1;
        Ok(sign * reg.delta)
    } else {
        Ok(d)
    }
}

struct DenseLdl {
    n: usize,
    pattern: Vec<(usize, usize)>,
    // Row-major lower triangle holding L below the diagonal and D on it.
    a: Vec<f64>,
}

impl DenseLdl {
    fn new(n: usize, pattern: &[(usize, usize)]) -> Self {
        Self {
            n,
            pattern: pattern.to_vec(),
            a: vec![0.0; n * n],
        }
    }

    fn factor(&mut self, values: &[f64], signs: &[f64], reg: PivotRegularization) -> Result<usize, LdlError> {
        let n = self.n;
        self.a.iter_mut().for_each(|v| *v = 0.0);
        for (&(i, j), v) in self.pattern.iter().zip(values) {
            // store the symmetric entry in the lower triangle (row j, col i)
            self.a[j * n + i] += *v;
        }
        let mut count = 0;
        let mut w = vec![0.0; n];
        for j in 0..n {
            // w_k = L_jk d_k
            for k in 0..j {
                w[k] = self.a[j * n + k] * self.a[k * n + k];
            }
            let mut d = self.a[j * n + j];
            for k in 0..j {
                d -= self.a[j * n + k] * w[k];
            }
            let d = regularize(j, d, signs[j], reg, &mut count)?;
            self.a[j * n + j] = d;
            for i in j + 1..n {
                let row = &self.a[i * n..i * n + j];
                let mut s = self.a[i * n + j];
                for k in 0..j {
                    s -= row[k] * w[k];
                }
                self.a[i * n + j] = s / d;
            }
        }
        Ok(count)
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.a[i * n..i * n + i];
            let mut s = b[i];
            for k in 0..i {
                s -= row[k] * b[k];
            }
            b[i] = s;
        }
        for i in 0..n {
            b[i] /= self.a[i * n + i];
        }
        for i in (0..n).rev() {
            let bi = b[i];
            for k in 0..i {
                b[k] -= self.a[i * n + k] * bi;
            }
        }
    }
}

const NONE: usize = usize::MAX;

struct SparseLdl {
    n: usize,
    perm: Vec<usize>,
    // permuted upper-triangular CSC
    ap: Vec<usize>,
    ai: Vec<usize>,
    ax: Vec<f64>,
    // pattern entry -> slot in ax
    slot: Vec<usize>,
    etree: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
    d: Vec<f64>,
    dinv: Vec<f64>,
}

impl SparseLdl {
    fn new(n: usize, pattern: &[(usize, usize)]) -> Result<Self, LdlError> {
        // AMD on the upper pattern (it symmetrizes internally).
        let mut cols: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(i, j) in pattern {
            cols[j].push(i);
        }
        let mut cp = vec![0usize; n + 1];
        let mut ci = Vec::with_capacity(pattern.len());
        for j in 0..n {
            cols[j].sort_unstable();
            cols[j].dedup();
            ci.extend_from_slice(&cols[j]);
            cp[j + 1] = ci.len();
        }
        let ctrl = amd::Control::default();
        let (perm, pinv, _info) =
            amd::order::<usize>(n, &cp, &ci, &ctrl).map_err(|s| LdlError::Ordering(format!("{s:?}")))?;

        // Permuted upper pattern.
        let mut pcols: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (e, &(i, j)) in pattern.iter().enumerate() {
            let (pi, pj) = (pinv[i], pinv[j]);
            let (r, c) = if pi <= pj { (pi, pj) } else { (pj, pi) };
            pcols[c].push((r, e));
        }
        let mut ap = vec![0usize; n + 1];
        let mut ai = Vec::with_capacity(pattern.len());
        let mut slot = vec![0usize; pattern.len()];
        for c in 0..n {
            pcols[c].sort_unstable();
            for &(r, e) in &pcols[c] {
                slot[e] = ai.len();
                ai.push(r);
            }
            ap[c + 1] = ai.len();
        }

        // Elimination tree and column counts.
        let mut work = vec![0usize; n];
        let mut lnz = vec![0usize; n];
        let mut etree = vec![NONE; n];
        for j in 0..n {
            work[j] = j;
            for &i0 in &ai[ap[j]..ap[j + 1]] {
                let mut i = i0;
                while work[i] != j {
                    if etree[i] == NONE {
                        etree[i] = j;
                    }
                    lnz[i] += 1;
                    work[i] = j;
                    i = etree[i];
                }
            }
        }
        let mut lp = vec![0usize; n + 1];
        for i in 0..n {
            lp[i + 1] = lp[i] + lnz[i];
        }
        let nnz_l = lp[n];
        Ok(Self {
            n,
            perm,
            ax: vec![0.0; ai.len()],
            ap,
            ai,
            slot,
            etree,
            lp,
            li: vec![0; nnz_l],
            lx: vec![0.0; nnz_l],
            d: vec![0.0; n],
            dinv: vec![0.0; n],
        })
    }

    fn factor(&mut self, values: &[f64], signs: &[f64], reg: PivotRegularization) -> Result<usize, LdlError> {
        let n = self.n;
        self.ax.iter_mut().for_each(|v| *v = 0.0);
        for (e, v) in values.iter().enumerate() {
            self.ax[self.slot[e]] += *v;
        }
        let mut y_vals = vec![0.0; n];
        let mut y_mark = vec![false; n];
        let mut y_idx = vec![0usize; n];
        let mut elim = vec![0usize; n];
        let mut next_space: Vec<usize> = self.lp[..n].to_vec();
        let mut count = 0;
        for k in 0..n {
            let sign = signs[self.perm[k]];
            let mut nnz_y = 0;
            let mut dk = 0.0;
            for p in self.ap[k]..self.ap[k + 1] {
                let b = self.ai[p];
                if b == k {
                    dk = self.ax[p];
                    continue;
                }
                y_vals[b] = self.ax[p];
                if !y_mark[b] {
                    y_mark[b] = true;
                    elim[0] = b;
                    let mut ne = 1;
                    let mut next = self.etree[b];
                    while next != NONE && next < k {
                        if y_mark[next] {
                            break;
                        }
                        y_mark[next] = true;
                        elim[ne] = next;
                        ne += 1;
                        next = self.etree[next];
                    }
                    while ne > 0 {
                        ne -= 1;
                        y_idx[nnz_y] = elim[ne];
                        nnz_y += 1;
                    }
                }
            }
            for i in (0..nnz_y).rev() {
                let c = y_idx[i];
                let slot = next_space[c];
                let yc = y_vals[c];
                for j in self.lp[c]..slot {
                    y_vals[self.li[j]] -= self.lx[j] * yc;
                }
                self.li[slot] = k;
                let l = yc * self.dinv[c];
                self.lx[slot] = l;
                dk -= yc * l;
                next_space[c] += 1;
                y_vals[c] = 0.0;
                y_mark[c] = false;
            }
            let dk = regularize(k, dk, sign, reg, &mut count)?;
            self.d[k] = dk;
            self.dinv[k] = 1.0 / dk;
        }
        Ok(count)
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for j in 0..n {
            let xj = x[j];
            if xj != 0.0 {
                for p in self.lp[j]..self.lp[j + 1] {
                    x[self.li[p]] -= self.lx[p] * xj;
                }
            }
        }
        for j in 0..n {
            x[j] *= self.dinv[j];
        }
        for j in (0..n).rev() {
            let mut s = x[j];
            for p in self.lp[j]..self.lp[j + 1] {
                s -= self.lx[p] * x[self.li[p]];
            }
            x[j] = s;
        }
        for (k, &p) in self.perm.iter().enumerate() {
            b[p] = x[k];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Random quasi-definite matrix [P A^T; A -Q] with P, Q positive definite.
    fn random_qd(n1: usize, n2: usize, seed: u64) -> (Vec<(usize, usize)>, Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = n1 + n2;
        let mut pattern = Vec::new();
        let mut values = Vec::new();
        for j in 0..n {
            for i in 0..j {
                let same_block = (i < n1) == (j < n1);
                let p = if same_block { 0.1 } else { 0.3 };
                if rng.random::<f64>() < p {
                    pattern.push((i, j));
                    values.push(rng.random_range(-1.0..1.0) * if same_block { 0.1 } else { 1.0 });
                }
            }
            pattern.push((j, j));
            values.push(if j < n1 { 2.0 } else { -2.0 } + rng.random_range(0.0..1.0) * if j < n1 { 1.0 } else { -1.0 });
        }
        let signs = (0..n).map(|k| if k < n1 { 1.0 } else { -1.0 }).collect();
        (pattern, values, signs)
    }

    fn mul_sym(n: usize, pattern: &[(usize, usize)], values: &[f64], x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; n];
        for (&(i, j), v) in pattern.iter().zip(values) {
            y[i] += v * x[j];
            if i != j {
                y[j] += v * x[i];
            }
        }
        y
    }

    #[test]
    fn dense_and_sparse_agree() {
        for seed in 0..5 {
            let (n1, n2) = (30, 20);
            let n = n1 + n2;
            let (pattern, values, signs) = random_qd(n1, n2, seed);
            let mut dense = QuasiDefiniteLdl::with_dense_limit(n, &pattern, &signs, usize::MAX).unwrap();
            let mut sparse = QuasiDefiniteLdl::with_dense_limit(n, &pattern, &signs, 0).unwrap();
            assert!(dense.is_dense() && !sparse.is_dense());
            dense.factor(&values, PivotRegularization::default()).unwrap();
            sparse.factor(&values, PivotRegularization::default()).unwrap();
            let x_true: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
            let b = mul_sym(n, &pattern, &values, &x_true);
            let mut xd = b.clone();
            let mut xs = b.clone();
            dense.solve(&mut xd);
            sparse.solve(&mut xs);
            for i in 0..n {
                assert!((xd[i] - x_true[i]).abs() < 1e-9, "dense {i}");
                assert!((xs[i] - x_true[i]).abs() < 1e-9, "sparse {i}");
            }
        }
    }

    #[test]
    fn zero_pivot_is_regularized() {
        // [0 1; 1 0] with signs (+, -): first pivot is zero.
        let pattern = [(0, 0), (0, 1), (1, 1)];
        let mut f = QuasiDefiniteLdl::new(2, &pattern, &[1.0, -1.0]).unwrap();
        let count = f.factor(&[0.0, 1.0, 0.0], PivotRegularization::default()).unwrap();
        assert_eq!(count, 1);
    }

    #[test]
    fn rejects_lower_entries() {
        assert!(QuasiDefiniteLdl::new(2, &[(1, 0), (0, 0), (1, 1)], &[1.0, 1.0]).is_err());
        assert!(QuasiDefiniteLdl::new(2, &[(0, 0)], &[1.0, 1.0]).is_err());
    }
}
