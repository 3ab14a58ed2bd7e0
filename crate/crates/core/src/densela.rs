//! Small dense real linear algebra: column-major matrices, Gram products,
//! Cholesky solves and index-set slicing.
//!
//! The dictionaries handled here have at most a few dozen columns, so
//! everything is straightforward O(r³) code with no blocking.

use std::fmt;
use std::ops::Index;

use crate::error::{Error, Result};

/// Relative pivot floor for [`Cholesky::factor`].
pub const PIVOT_FLOOR: f64 = 1e-12;

/// Column-major dense matrix of finite reals.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from column-major data, rejecting wrong lengths and
    /// non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteEntry {
                row: pos % rows.max(1),
                col: pos / rows.max(1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from row-major data.
    pub fn from_row_major(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        let mut out = Vec::with_capacity(data.len());
        for j in 0..cols {
            for i in 0..rows {
                out.push(data[i * cols + j]);
            }
        }
        Self::new(rows, cols, out)
    }

    /// Builds a matrix from a slice of equal-length rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut flat = Vec::with_capacity(nrows * ncols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != ncols {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {ncols}",
                    row.len()
                )));
            }
            flat.extend_from_slice(row);
        }
        Self::from_row_major(nrows, ncols, &flat)
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns<C: AsRef<[f64]>>(rows: usize, columns: &[C]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * columns.len());
        for (j, c) in columns.iter().enumerate() {
            let c = c.as_ref();
            if c.len() != rows {
                return Err(Error::DimensionMismatch(format!(
                    "column {j} has {} entries, expected {rows}",
                    c.len()
                )));
            }
            data.extend_from_slice(c);
        }
        Self::new(rows, columns.len(), data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Column-major backing storage.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[j * self.rows + i] = v;
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact panics on a zero chunk size
        let step = self.rows.max(1);
        self.data.chunks_exact(step).take(self.cols)
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols).map(|j| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// `self * x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "mul_vec: length mismatch");
        let mut y = vec![0.0; self.rows];
        for (c, &xj) in self.columns().zip(x) {
            if xj != 0.0 {
                axpy(xj, c, &mut y);
            }
        }
        y
    }

    /// `selfᵀ * b`.
    pub fn tr_mul_vec(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.rows, "tr_mul_vec: length mismatch");
        self.columns().map(|c| dot(c, b)).collect()
    }

    /// Matrix product `self * rhs`.
    pub fn matmul(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for (k, &v) in rhs.col(j).iter().enumerate() {
                if v != 0.0 {
                    axpy(v, self.col(k), dst);
                }
            }
        }
        Ok(out)
    }

    /// Entrywise difference `self - rhs`.
    pub fn sub(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if self.shape() != rhs.shape() {
            return Err(Error::DimensionMismatch(format!(
                "cannot subtract {}x{} and {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[j * self.rows + i]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{:>10.4} ", self.get(i, j))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Strictly increasing list of 0-based indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// `{0, 1, .., n-1}`.
    pub fn full(n: usize) -> Self {
        Self((0..n).collect())
    }

    /// Sorts and deduplicates arbitrary indices.
    pub fn from_unsorted(mut idx: Vec<usize>) -> Self {
        idx.sort_unstable();
        idx.dedup();
        Self(idx)
    }

    /// Wraps indices that are already strictly increasing.
    pub fn from_sorted(idx: Vec<usize>) -> Result<Self> {
        if idx.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "index set must be strictly increasing".into(),
            ));
        }
        Ok(Self(idx))
    }

    /// Indices of strictly positive entries of `x`.
    pub fn positive_entries(x: &[f64]) -> Self {
        Self(
            x.iter()
                .enumerate()
                .filter(|(_, &v)| v > 0.0)
                .map(|(i, _)| i)
                .collect(),
        )
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    /// Inserts `i`, returning false if it was already present.
    pub fn insert(&mut self, i: usize) -> bool {
        match self.0.binary_search(&i) {
            Ok(_) => false,
            Err(pos) => {
                self.0.insert(pos, i);
                true
            }
        }
    }

    /// Removes `i`, returning false if it was absent.
    pub fn remove(&mut self, i: usize) -> bool {
        match self.0.binary_search(&i) {
            Ok(pos) => {
                self.0.remove(pos);
                true
            }
            Err(_) => false,
        }
    }

    /// Indices of `0..dim` not in the set.
    pub fn complement(&self, dim: usize) -> Self {
        let mut out = Vec::with_capacity(dim.saturating_sub(self.len()));
        let mut it = self.0.iter().peekable();
        for i in 0..dim {
            if it.peek() == Some(&&i) {
                it.next();
            } else {
                out.push(i);
            }
        }
        Self(out)
    }

    /// Symmetric difference size.
    pub fn symmetric_difference_len(&self, other: &IndexSet) -> usize {
        let common = self.iter().filter(|&i| other.contains(i)).count();
        self.len() + other.len() - 2 * common
    }

    pub fn check_bounds(&self, dim: usize) -> Result<()> {
        match self.0.last() {
            Some(&last) if last >= dim => Err(Error::IndexOutOfRange { index: last, dim }),
            _ => Ok(()),
        }
    }

    /// Gathers `v[i]` for every index in the set.
    pub fn gather(&self, v: &[f64]) -> Vec<f64> {
        self.0.iter().map(|&i| v[i]).collect()
    }

    /// Writes `vals` at the set's positions of a zero vector of length `dim`.
    pub fn scatter(&self, vals: &[f64], dim: usize) -> Vec<f64> {
        debug_assert_eq!(vals.len(), self.len());
        let mut out = vec![0.0; dim];
        for (&i, &v) in self.0.iter().zip(vals) {
            out[i] = v;
        }
        out
    }
}

impl From<IndexSet> for Vec<usize> {
    fn from(s: IndexSet) -> Self {
        s.0
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn norm_sq(v: &[f64]) -> f64 {
    dot(v, v)
}

/// `‖A x − b‖²` evaluated directly against the original data.
pub fn residual_sq(a: &DenseMatrix, x: &[f64], b: &[f64]) -> f64 {
    let mut r: Vec<f64> = b.iter().map(|v| -v).collect();
    for (c, &xj) in a.columns().zip(x) {
        if xj != 0.0 {
            axpy(xj, c, &mut r);
        }
    }
    norm_sq(&r)
}

/// `AᵀA`. Each off-diagonal dot product is computed once and mirrored, so
/// the result is exactly symmetric.
pub fn gram(a: &DenseMatrix) -> DenseMatrix {
    let r = a.cols();
    let mut p = DenseMatrix::zeros(r, r);
    for i in 0..r {
        for j in 0..=i {
            let v = dot(a.col(i), a.col(j));
            p.set(i, j, v);
            p.set(j, i, v);
        }
    }
    p
}

/// Extracts `S(rows, cols)`.
pub fn submatrix(s: &DenseMatrix, rows: &IndexSet, cols: &IndexSet) -> Result<DenseMatrix> {
    rows.check_bounds(s.rows())?;
    cols.check_bounds(s.cols())?;
    let mut data = Vec::with_capacity(rows.len() * cols.len());
    for j in cols.iter() {
        let c = s.col(j);
        data.extend(rows.iter().map(|i| c[i]));
    }
    Ok(DenseMatrix {
        rows: rows.len(),
        cols: cols.len(),
        data,
    })
}

pub fn frob_norm(a: &DenseMatrix) -> f64 {
    norm_sq(a.as_slice()).sqrt()
}

/// Lower-triangular Cholesky factor `S = L Lᵀ`, stored row-major packed.
#[derive(Clone, Debug)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Unpivoted factorization of a symmetric matrix. Fails with
    /// [`Error::SingularSystem`] when a pivot drops below
    /// `PIVOT_FLOOR * max_diag`.
    pub fn factor(s: &DenseMatrix) -> Result<Self> {
        let n = s.rows();
        if s.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "Cholesky of non-square {}x{}",
                s.rows(),
                s.cols()
            )));
        }
        let max_diag = (0..n).map(|i| s.get(i, i)).fold(0.0, f64::max);
        let floor = PIVOT_FLOOR * max_diag;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = s.get(j, j);
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > floor) {
                return Err(Error::SingularSystem {
                    position: j,
                    pivot: d,
                    floor,
                });
            }
            let djj = d.sqrt();
            l[j * n + j] = djj;
            for i in j + 1..n {
                let mut v = s.get(i, j);
                for k in 0..j {
                    v -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = v / djj;
            }
        }
        Ok(Self { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `L Lᵀ x = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(rhs.len(), n, "Cholesky::solve: length mismatch");
        let mut y = rhs.to_vec();
        for i in 0..n {
            let mut v = y[i];
            for k in 0..i {
                v -= self.l[i * n + k] * y[k];
            }
            y[i] = v / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut v = y[i];
            for k in i + 1..n {
                v -= self.l[k * n + i] * y[k];
            }
            y[i] = v / self.l[i * n + i];
        }
        y
    }
}

/// Solves `S x = rhs` for symmetric positive-definite `S`.
pub fn solve_spd(s: &DenseMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != s.rows() {
        return Err(Error::DimensionMismatch(format!(
            "rhs of length {} for a {}x{} system",
            rhs.len(),
            s.rows(),
            s.cols()
        )));
    }
    Ok(Cholesky::factor(s)?.solve(rhs))
}
