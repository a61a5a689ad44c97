//! Dense real matrices and vectors, plus the small set of decompositions the
//! rest of the crate needs.
//!
//! Everything here is sized for brute-force work: matrices up to a few
//! hundred rows and columns, stored row-major in a flat `Vec<f64>`. Values
//! are immutable once built except through explicit `&mut` setters, and all
//! constructors reject empty shapes and non-finite entries.

mod io;
mod linalg;
mod random;

use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{
    parse_matrix_csv, parse_vector_csv, read_matrix_csv, read_vector_csv, write_matrix_csv,
    write_vector_csv,
};
pub use linalg::{
    determinant, extreme_eigenvalues, null_space, rank, solve_least_squares, svd, Svd,
    DEFAULT_RANK_TOL,
};
pub use random::{gaussian_matrix, random_sparse_signal, Seed};
pub(crate) use random::{nonzero_normal as random_nonzero_normal, splitmix64 as random_splitmix};

fn check_finite(data: &[f64]) -> Result<()> {
    match data.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

/// A real vector with at least one entry, all finite.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DenseVector {
    data: Vec<f64>,
}

impl DenseVector {
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::Empty("vector"));
        }
        check_finite(&data)?;
        Ok(Self { data })
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(vec![0.0; dim])
    }

    /// Unit basis vector `e_index` scaled by `value`.
    pub fn basis(dim: usize, index: usize, value: f64) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut data = vec![0.0; dim];
        data[index] = value;
        Self::new(data)
    }

    pub(crate) fn from_vec_unchecked(data: Vec<f64>) -> Self {
        debug_assert!(!data.is_empty());
        Self { data }
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.data.iter()
    }

    pub fn norm2(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn norm1(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).sum()
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    /// Indices of exactly nonzero entries, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    /// Indices whose magnitude exceeds `rel_tol` times the largest magnitude.
    pub fn support_with_tol(&self, rel_tol: f64) -> Vec<usize> {
        let cutoff = rel_tol * self.norm_inf();
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0 && v.abs() > cutoff)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn count_nonzero(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0.0).count()
    }

    pub fn scale(&self, factor: f64) -> DenseVector {
        Self::from_vec_unchecked(self.data.iter().map(|v| v * factor).collect())
    }

    pub fn sub(&self, other: &DenseVector) -> Result<DenseVector> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                context: "vector subtraction",
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(Self::from_vec_unchecked(
            self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        ))
    }

    pub fn dot(&self, other: &DenseVector) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                context: "dot product",
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(dot(&self.data, &other.data))
    }
}

impl TryFrom<Vec<f64>> for DenseVector {
    type Error = Error;

    fn try_from(data: Vec<f64>) -> Result<Self> {
        Self::new(data)
    }
}

impl From<DenseVector> for Vec<f64> {
    fn from(v: DenseVector) -> Self {
        v.data
    }
}

impl Index<usize> for DenseVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

impl fmt::Debug for DenseVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.data).finish()
    }
}

/// A real `rows x cols` matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Empty("matrix"));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "matrix entries",
                expected: rows * cols,
                actual: data.len(),
            });
        }
        check_finite(&data)?;
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != ncols {
                return Err(Error::DimensionMismatch {
                    context: "matrix row length",
                    expected: ncols,
                    actual: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(nrows, ncols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        Ok(m)
    }

    pub fn diag(entries: &[f64]) -> Result<Self> {
        let n = entries.len();
        let mut m = Self::zeros(n, n)?;
        for (i, &v) in entries.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        check_finite(&m.data)?;
        Ok(m)
    }

    pub(crate) fn from_vec_unchecked(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::NonFinite {
                index: i * self.cols + j,
            });
        }
        self.data[i * self.cols + j] = value;
        Ok(())
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j));
            }
        }
        Self::from_vec_unchecked(self.cols, self.rows, data)
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                context: "matrix product",
                expected: self.cols,
                actual: other.rows,
            });
        }
        let mut data = vec![0.0; self.rows * other.cols];
        for i in 0..self.rows {
            let out = &mut data[i * other.cols..(i + 1) * other.cols];
            for (l, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out.iter_mut().zip(other.row(l)) {
                    *o += a * b;
                }
            }
        }
        Self::new(self.rows, other.cols, data)
    }

    pub fn mul_vec(&self, v: &DenseVector) -> Result<DenseVector> {
        if self.cols != v.dim() {
            return Err(Error::DimensionMismatch {
                context: "matrix-vector product",
                expected: self.cols,
                actual: v.dim(),
            });
        }
        let out: Vec<f64> = (0..self.rows).map(|i| dot(self.row(i), v.as_slice())).collect();
        DenseVector::new(out)
    }

    /// `Mᵀ v`.
    pub fn tr_mul_vec(&self, v: &DenseVector) -> Result<DenseVector> {
        if self.rows != v.dim() {
            return Err(Error::DimensionMismatch {
                context: "transposed matrix-vector product",
                expected: self.rows,
                actual: v.dim(),
            });
        }
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let vi = v[i];
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * vi;
            }
        }
        DenseVector::new(out)
    }

    pub fn scale(&self, factor: f64) -> Result<DenseMatrix> {
        Self::new(
            self.rows,
            self.cols,
            self.data.iter().map(|v| v * factor).collect(),
        )
    }

    /// Submatrix made of the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<DenseMatrix> {
        if cols.is_empty() {
            return Err(Error::Empty("column selection"));
        }
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.cols) {
            return Err(Error::InvalidArgument(format!(
                "column index {bad} out of range for {} columns",
                self.cols
            )));
        }
        let mut data = Vec::with_capacity(self.rows * cols.len());
        for i in 0..self.rows {
            let row = self.row(i);
            data.extend(cols.iter().map(|&c| row[c]));
        }
        Ok(Self::from_vec_unchecked(self.rows, cols.len(), data))
    }

    /// `MᵀM`, computed so that the result is exactly symmetric.
    pub fn gram(&self) -> DenseMatrix {
        let n = self.cols;
        let cols: Vec<Vec<f64>> = (0..n).map(|j| self.column(j)).collect();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let g = dot(&cols[i], &cols[j]);
                data[i * n + j] = g;
                data[j * n + i] = g;
            }
        }
        Self::from_vec_unchecked(n, n, data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Exactly one nonzero entry in every row and every column.
    pub fn is_monomial(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        let n = self.rows;
        let mut col_hits = vec![0usize; n];
        for i in 0..n {
            let mut hits = 0;
            for (j, &v) in self.row(i).iter().enumerate() {
                if v != 0.0 {
                    hits += 1;
                    col_hits[j] += 1;
                }
            }
            if hits != 1 {
                return false;
            }
        }
        col_hits.iter().all(|&h| h == 1)
    }

    /// Square with every off-diagonal entry exactly zero.
    pub fn is_diagonal(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                self.row(i)
                    .iter()
                    .enumerate()
                    .all(|(j, &v)| i == j || v == 0.0)
            })
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    // Scaled to avoid overflow for large entries.
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * a.iter().map(|v| (v / scale).powi(2)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes_and_values() {
        assert_eq!(DenseMatrix::new(0, 3, vec![]), Err(Error::Empty("matrix")));
        assert!(matches!(
            DenseMatrix::new(2, 2, vec![1.0; 3]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert_eq!(
            DenseMatrix::new(1, 2, vec![1.0, f64::NAN]),
            Err(Error::NonFinite { index: 1 })
        );
        assert_eq!(DenseVector::new(vec![]), Err(Error::Empty("vector")));
    }

    #[test]
    fn products() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]).unwrap();
        let v = DenseVector::new(vec![1.0, -1.0]).unwrap();
        assert_eq!(a.mul_vec(&v).unwrap().as_slice(), &[-1.0, -1.0, -1.0]);
        let w = DenseVector::new(vec![1.0, 0.0, 1.0]).unwrap();
        assert_eq!(a.tr_mul_vec(&w).unwrap().as_slice(), &[6.0, 8.0]);
        let g = a.gram();
        assert_eq!(g, a.transpose().matmul(&a).unwrap());
        assert_eq!(a.select_columns(&[1]).unwrap().as_slice(), &[2.0, 4.0, 6.0]);
    }

    #[test]
    fn monomial_detection() {
        let p = DenseMatrix::from_rows(&[[0.0, 2.0], [-1.0, 0.0]]).unwrap();
        assert!(p.is_monomial());
        assert!(!p.is_diagonal());
        let z = DenseMatrix::from_rows(&[[0.0, 2.0], [0.0, 1.0]]).unwrap();
        assert!(!z.is_monomial());
        assert!(DenseMatrix::diag(&[1.0, 3.0]).unwrap().is_diagonal());
    }

    #[test]
    fn vector_norms_and_support() {
        let v = DenseVector::new(vec![3.0, 0.0, -4.0]).unwrap();
        assert_eq!(v.norm2(), 5.0);
        assert_eq!(v.norm1(), 7.0);
        assert_eq!(v.norm_inf(), 4.0);
        assert_eq!(v.support(), vec![0, 2]);
        let w = DenseVector::new(vec![1.0, 1e-12, 0.0]).unwrap();
        assert_eq!(w.support_with_tol(1e-6), vec![0]);
    }
}
