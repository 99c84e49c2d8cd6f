//! Dense vector/matrix kernels, absolute-correlation scans and an
//! incrementally extendable QR factorization.
//!
//! Every recovery algorithm in this crate funnels its numeric work through
//! the three primitives here: [`correlate_abs`] for atom selection,
//! [`QrState::append`] for support growth and [`QrState::project`] for the
//! least-squares coefficients and residue of a selected support.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Relative threshold below which an appended column is considered to add no
/// numerically meaningful direction.
pub const DEGENERATE_REL_THRESHOLD: f64 = 1e-12;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for i in 0..a.len() {
        acc += a[i] * b[i];
    }
    acc
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Real vector with construction-time finiteness validation.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "vector entry" });
        }
        Ok(Self { data })
    }

    pub fn zeros(len: usize) -> Self {
        Self { data: vec![0.0; len] }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn norm(&self) -> f64 {
        norm(&self.data)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

/// Dense real matrix in column-major storage; a column is a contiguous slice.
#[derive(Debug)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    col_norms: OnceLock<Vec<f64>>,
}

impl Clone for Matrix {
    fn clone(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.clone(),
            col_norms: OnceLock::new(),
        }
    }
}

impl Matrix {
    /// Builds from column-major entries (`data[j * rows + i]` is row `i`,
    /// column `j`).
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParams("matrix must have rows >= 1 and cols >= 1".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
                what: "matrix storage",
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "matrix entry" });
        }
        Ok(Self { rows, cols, data, col_norms: OnceLock::new() })
    }

    pub fn from_row_major(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows.saturating_mul(cols) {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
                what: "matrix storage",
            });
        }
        let mut cm = vec![0.0; data.len()];
        for i in 0..rows {
            for j in 0..cols {
                cm[j * rows + i] = data[i * cols + j];
            }
        }
        Self::from_col_major(rows, cols, cm)
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self::from_col_major(n, n, data).expect("identity is well formed")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Column l2 norms, computed once and cached.
    pub fn column_norms(&self) -> &[f64] {
        self.col_norms
            .get_or_init(|| (0..self.cols).map(|j| norm(self.col(j))).collect())
    }

    /// `A * x` for a dense vector of length `cols`.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: x.len(),
                what: "matrix-vector product",
            });
        }
        let mut y = vec![0.0; self.rows];
        for j in 0..self.cols {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            let col = self.col(j);
            for i in 0..self.rows {
                y[i] += col[i] * xj;
            }
        }
        Ok(y)
    }

    /// `A * B`, used to form composite dictionaries.
    pub fn mul_mat(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: other.rows,
                what: "matrix-matrix product",
            });
        }
        let mut data = vec![0.0; self.rows * other.cols];
        for j in 0..other.cols {
            let out = self.mul_vec(other.col(j))?;
            data[j * self.rows..(j + 1) * self.rows].copy_from_slice(&out);
        }
        Matrix::from_col_major(self.rows, other.cols, data)
    }
}

/// Scans `|<r, v_n>|` over all dictionary columns not in `excluded` and
/// returns `(column index, absolute inner product)` sorted descending, ties
/// broken by ascending index.
///
/// The per-column accumulation order is fixed (ascending row index) so the
/// result is bit-reproducible against a naive double-loop evaluation.
pub fn correlate_abs(
    dict: &Matrix,
    r: &[f64],
    excluded: &[usize],
) -> Result<Vec<(usize, f64)>> {
    if r.len() != dict.rows() {
        return Err(Error::DimensionMismatch {
            expected: dict.rows(),
            got: r.len(),
            what: "correlation scan",
        });
    }
    if let Some(&bad) = excluded.iter().find(|&&j| j >= dict.cols()) {
        return Err(Error::InvalidParams(format!(
            "excluded index {bad} out of range for {} columns",
            dict.cols()
        )));
    }
    let mut out = Vec::with_capacity(dict.cols() - excluded.len().min(dict.cols()));
    for j in 0..dict.cols() {
        if excluded.contains(&j) {
            continue;
        }
        out.push((j, dot(dict.col(j), r).abs()));
    }
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(out)
}

/// Incrementally built QR factorization of the selected atoms.
///
/// Columns are appended one at a time by modified Gram-Schmidt with one
/// re-orthogonalization pass, which keeps `Q^T Q` at machine-precision
/// identity over the path depths used here.
#[derive(Debug, Clone)]
pub struct QrState {
    m: usize,
    // Orthonormal columns of Q, each of length m.
    q: Vec<Vec<f64>>,
    // Column j of R holds entries R[0..=j, j].
    r: Vec<Vec<f64>>,
}

impl QrState {
    pub fn new(m: usize) -> Self {
        Self { m, q: Vec::new(), r: Vec::new() }
    }

    /// Number of appended atoms.
    pub fn count(&self) -> usize {
        self.q.len()
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn q_col(&self, j: usize) -> &[f64] {
        &self.q[j]
    }

    pub fn r_entry(&self, i: usize, j: usize) -> f64 {
        if i <= j {
            self.r[j][i]
        } else {
            0.0
        }
    }

    /// Appends one column, orthogonalizing it against the current factor.
    ///
    /// Fails with [`Error::DegenerateAtom`] when the column is numerically in
    /// the span of the already-appended atoms (residual norm at most
    /// `1e-12 * ||column||`); the caller is expected to skip that candidate.
    pub fn append(&mut self, column: &[f64]) -> Result<()> {
        if column.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: column.len(),
                what: "qr append",
            });
        }
        let col_norm = norm(column);
        let l = self.q.len();
        let mut v = column.to_vec();
        let mut rcol = vec![0.0; l + 1];
        // Two MGS sweeps; the second removes the orthogonality loss of the first.
        for _ in 0..2 {
            for j in 0..l {
                let h = dot(&self.q[j], &v);
                rcol[j] += h;
                for i in 0..self.m {
                    v[i] -= h * self.q[j][i];
                }
            }
        }
        let vnorm = norm(&v);
        if vnorm <= DEGENERATE_REL_THRESHOLD * col_norm {
            return Err(Error::DegenerateAtom { index: l });
        }
        for x in v.iter_mut() {
            *x /= vnorm;
        }
        rcol[l] = vnorm;
        self.q.push(v);
        self.r.push(rcol);
        Ok(())
    }

    /// Functional variant of [`QrState::append`].
    pub fn appended(&self, column: &[f64]) -> Result<QrState> {
        let mut next = self.clone();
        next.append(column)?;
        Ok(next)
    }

    /// Least-squares coefficients of `y` over the appended atoms and the
    /// corresponding residue `y - S c`.
    ///
    /// The residue is orthogonal to the span of the appended atoms by
    /// construction (`r = y - Q Q^T y`).
    pub fn project(&self, y: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        if y.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: y.len(),
                what: "projection",
            });
        }
        let l = self.q.len();
        if l == 0 {
            return Err(Error::InvalidParams("projection requires at least one appended atom".into()));
        }
        let z: Vec<f64> = (0..l).map(|j| dot(&self.q[j], y)).collect();
        let mut residue = y.to_vec();
        for j in 0..l {
            let zj = z[j];
            for i in 0..self.m {
                residue[i] -= zj * self.q[j][i];
            }
        }
        // Back-substitution of R c = z.
        let mut coeffs = vec![0.0; l];
        for j in (0..l).rev() {
            let mut acc = z[j];
            for k in (j + 1)..l {
                acc -= self.r[k][j] * coeffs[k];
            }
            coeffs[j] = acc / self.r[j][j];
        }
        #[cfg(debug_assertions)]
        {
            let tol = 1e-9 * norm(y);
            for j in 0..l {
                debug_assert!(
                    dot(&self.q[j], &residue).abs() <= tol,
                    "residue lost orthogonality against factor column {j}"
                );
            }
        }
        Ok((coeffs, residue))
    }
}
