use serde::{Deserialize, Serialize};

/// Compressed sparse row matrix with sorted, duplicate-free column indices.
///
/// Serialized as coordinate triplets in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Triplets", into = "Triplets")]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Coordinate form used for (de)serialization and assembly.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Triplets {
    pub nrows: usize,
    pub ncols: usize,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl Triplets {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            ..Default::default()
        }
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        self.rows.push(i);
        self.cols.push(j);
        self.vals.push(v);
    }
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Assembles from coordinates, summing duplicates and dropping exact zeros.
    pub fn from_triplets(t: &Triplets) -> Result<Self, String> {
        if t.rows.len() != t.cols.len() || t.rows.len() != t.vals.len() {
            return Err("triplet arrays have different lengths".into());
        }
        let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(t.vals.len());
        for k in 0..t.vals.len() {
            let (i, j) = (t.rows[k], t.cols[k]);
            if i >= t.nrows || j >= t.ncols {
                return Err(format!(
                    "entry ({i}, {j}) outside a {}x{} matrix",
                    t.nrows, t.ncols
                ));
            }
            if !t.vals[k].is_finite() {
                return Err(format!("entry ({i}, {j}) is not finite"));
            }
            entries.push((i, j, t.vals[k]));
        }
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0; t.nrows + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in entries {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..t.nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut m = Self {
            nrows: t.nrows,
            ncols: t.ncols,
            row_ptr,
            col_idx,
            values,
        };
        m.drop_zeros();
        Ok(m)
    }

    pub fn from_dense(d: &super::DenseMatrix) -> Self {
        let mut t = Triplets::new(d.nrows(), d.ncols());
        for i in 0..d.nrows() {
            for (j, v) in d.row(i).iter().enumerate() {
                if *v != 0.0 {
                    t.push(i, j, *v);
                }
            }
        }
        Self::from_triplets(&t).expect("dense input is well formed")
    }

    fn drop_zeros(&mut self) {
        if self.values.iter().all(|v| *v != 0.0) {
            return;
        }
        let mut row_ptr = vec![0; self.nrows + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for i in 0..self.nrows {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.values[p] != 0.0 {
                    col_idx.push(self.col_idx[p]);
                    values.push(self.values[p]);
                }
            }
            row_ptr[i + 1] = col_idx.len();
        }
        self.row_ptr = row_ptr;
        self.col_idx = col_idx;
        self.values = values;
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn to_triplets(&self) -> Triplets {
        let mut t = Triplets::new(self.nrows, self.ncols);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (j, v) in cols.iter().zip(vals) {
                t.push(i, *j, *v);
            }
        }
        t
    }

    pub fn to_dense(&self) -> super::DenseMatrix {
        let mut d = super::DenseMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (j, v) in cols.iter().zip(vals) {
                d[(i, *j)] = *v;
            }
        }
        d
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols, "dimension mismatch in A x");
        (0..self.nrows)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(|(j, v)| v * x[*j]).sum()
            })
            .collect()
    }

    pub fn tmul_vec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.nrows, "dimension mismatch in A^T y");
        let mut out = vec![0.0; self.ncols];
        for (i, yi) in y.iter().enumerate() {
            if *yi == 0.0 {
                continue;
            }
            let (cols, vals) = self.row(i);
            for (j, v) in cols.iter().zip(vals) {
                out[*j] += v * yi;
            }
        }
        out
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut t = Triplets::new(self.ncols, self.nrows);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (j, v) in cols.iter().zip(vals) {
                t.push(*j, i, *v);
            }
        }
        Self::from_triplets(&t).expect("transpose of valid matrix")
    }

    /// Returns `diag(r) * A * diag(c)`.
    pub fn scale(&self, r: &[f64], c: &[f64]) -> SparseMatrix {
        let mut out = self.clone();
        for i in 0..self.nrows {
            for p in out.row_ptr[i]..out.row_ptr[i + 1] {
                out.values[p] *= r[i] * c[out.col_idx[p]];
            }
        }
        out
    }

    /// Keeps the listed rows and columns (in the given order).
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> SparseMatrix {
        let mut col_map = vec![usize::MAX; self.ncols];
        for (new, old) in cols.iter().enumerate() {
            col_map[*old] = new;
        }
        let mut t = Triplets::new(rows.len(), cols.len());
        for (ni, oi) in rows.iter().enumerate() {
            let (cs, vs) = self.row(*oi);
            for (j, v) in cs.iter().zip(vs) {
                if col_map[*j] != usize::MAX {
                    t.push(ni, col_map[*j], *v);
                }
            }
        }
        Self::from_triplets(&t).expect("selection of valid matrix")
    }

    /// Per-row maximum absolute value.
    pub fn row_inf_norms(&self) -> Vec<f64> {
        (0..self.nrows)
            .map(|i| self.row(i).1.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .collect()
    }

    /// Per-column maximum absolute value.
    pub fn col_inf_norms(&self) -> Vec<f64> {
        let mut out = vec![0.0f64; self.ncols];
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (j, v) in cols.iter().zip(vals) {
                out[*j] = out[*j].max(v.abs());
            }
        }
        out
    }
}

impl TryFrom<Triplets> for SparseMatrix {
    type Error = String;
    fn try_from(t: Triplets) -> Result<Self, String> {
        Self::from_triplets(&t)
    }
}

impl From<SparseMatrix> for Triplets {
    fn from(m: SparseMatrix) -> Self {
        m.to_triplets()
    }
}
