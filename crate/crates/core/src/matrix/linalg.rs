use super::{dot, norm2, DenseMatrix, DenseVector};
use crate::error::{Error, Result};

/// Relative singular-value cutoff used for rank decisions throughout the crate.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

const JACOBI_EPS: f64 = 1e-15;
const MAX_SWEEPS: usize = 80;

/// Singular value decomposition from one-sided (Hestenes) Jacobi rotations.
///
/// For an `m x n` input the rotations orthogonalize its `n` columns, giving
/// `M V = W` with `V` orthogonal (`n x n`) and the columns of `W` mutually
/// orthogonal. The singular values are the column norms of `W`; for `n > m`
/// at least `n - m` of them are (numerically) zero and the matching columns of
/// `V` span the null space.
#[derive(Clone, Debug)]
pub struct Svd {
    sigma: Vec<f64>,
    w: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Svd {
    /// Singular values in input column order (not sorted).
    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma.iter().fold(0.0, |m, &s| m.max(s))
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma.iter().fold(f64::INFINITY, |m, &s| m.min(s))
    }

    /// Descending singular values.
    pub fn sorted_sigma(&self) -> Vec<f64> {
        let mut s = self.sigma.clone();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    /// Right singular vector `j` (column `j` of `V`).
    pub fn right_vector(&self, j: usize) -> &[f64] {
        &self.v[j]
    }

    /// `sigma_j * u_j`, column `j` of `M V`.
    pub fn scaled_left_vector(&self, j: usize) -> &[f64] {
        &self.w[j]
    }

    pub fn rank(&self, tol: f64) -> usize {
        let cutoff = tol * self.sigma_max();
        if self.sigma_max() == 0.0 {
            return 0;
        }
        self.sigma.iter().filter(|&&s| s > cutoff).count()
    }
}

pub fn svd(m: &DenseMatrix) -> Svd {
    let (rows, cols) = m.shape();
    let mut w: Vec<Vec<f64>> = (0..cols).map(|j| m.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..cols)
        .map(|j| {
            let mut e = vec![0.0; cols];
            e[j] = 1.0;
            e
        })
        .collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..cols {
            for j in (i + 1)..cols {
                let alpha = dot(&w[i], &w[i]);
                let beta = dot(&w[j], &w[j]);
                let gamma = dot(&w[i], &w[j]);
                if gamma == 0.0 || gamma.abs() <= JACOBI_EPS * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut w, i, j, c, s, rows);
                rotate_pair(&mut v, i, j, c, s, cols);
            }
        }
        if !rotated {
            break;
        }
    }

    let sigma = w.iter().map(|col| norm2(col)).collect();
    Svd { sigma, w, v }
}

fn rotate_pair(cols: &mut [Vec<f64>], i: usize, j: usize, c: f64, s: f64, len: usize) {
    let (left, right) = cols.split_at_mut(j);
    let (ci, cj) = (&mut left[i], &mut right[0]);
    for k in 0..len {
        let a = ci[k];
        let b = cj[k];
        ci[k] = c * a - s * b;
        cj[k] = s * a + c * b;
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be finite and nonnegative, got {tol}"
        )));
    }
    Ok(())
}

/// Number of singular values strictly above `tol` times the largest one.
pub fn rank(m: &DenseMatrix, tol: f64) -> Result<usize> {
    check_tol(tol)?;
    // Fewer columns means fewer rotations; rank is transpose-invariant.
    let d = if m.cols() > m.rows() {
        svd(&m.transpose())
    } else {
        svd(m)
    };
    Ok(d.rank(tol))
}

/// Orthonormal basis of the null space: right singular vectors whose singular
/// value is at most `tol` times the largest.
pub fn null_space(m: &DenseMatrix, tol: f64) -> Result<Vec<DenseVector>> {
    check_tol(tol)?;
    let d = svd(m);
    let cutoff = tol * d.sigma_max();
    Ok((0..m.cols())
        .filter(|&j| d.sigma[j] <= cutoff)
        .map(|j| DenseVector::from_vec_unchecked(d.v[j].clone()))
        .collect())
}

/// Minimum-norm minimizer of `‖M u − b‖₂`.
pub fn solve_least_squares(m: &DenseMatrix, b: &DenseVector) -> Result<DenseVector> {
    if m.rows() != b.dim() {
        return Err(Error::DimensionMismatch {
            context: "least squares right-hand side",
            expected: m.rows(),
            actual: b.dim(),
        });
    }
    let d = svd(m);
    let cutoff = (m.rows().max(m.cols()) as f64) * f64::EPSILON * d.sigma_max();
    let mut u = vec![0.0; m.cols()];
    for j in 0..m.cols() {
        let s = d.sigma[j];
        if s <= cutoff || s == 0.0 {
            continue;
        }
        let coeff = dot(&d.w[j], b.as_slice()) / (s * s);
        for (ui, vi) in u.iter_mut().zip(&d.v[j]) {
            *ui += coeff * vi;
        }
    }
    DenseVector::new(u)
}

/// Smallest and largest eigenvalue of a symmetric matrix, by cyclic Jacobi.
pub fn extreme_eigenvalues(s: &DenseMatrix) -> Result<(f64, f64)> {
    if !s.is_square() {
        return Err(Error::NotSquare {
            rows: s.rows(),
            cols: s.cols(),
        });
    }
    let n = s.rows();
    let scale = s.max_abs();
    let mut asymmetry = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            asymmetry = asymmetry.max((s.get(i, j) - s.get(j, i)).abs());
        }
    }
    if asymmetry > 1e-12 * scale {
        return Err(Error::NotSymmetric { asymmetry });
    }

    let mut a: Vec<f64> = s.as_slice().to_vec();
    // Symmetrize the tolerated asymmetry away.
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (a[i * n + j] + a[j * n + i]);
            a[i * n + j] = avg;
            a[j * n + i] = avg;
        }
    }
    let frob2: f64 = a.iter().map(|v| v * v).sum();

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].powi(2))
            .sum();
        if off <= 1e-32 * frob2 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let sgn = if theta >= 0.0 { 1.0 } else { -1.0 };
                let t = sgn / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[r * n + p];
                    let arq = a[r * n + q];
                    let new_rp = c * arp - sn * arq;
                    let new_rq = c * arq + sn * arp;
                    a[r * n + p] = new_rp;
                    a[p * n + r] = new_rp;
                    a[r * n + q] = new_rq;
                    a[q * n + r] = new_rq;
                }
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
            }
        }
    }

    let diag = (0..n).map(|i| a[i * n + i]);
    let (lo, hi) = diag.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), d| {
        (lo.min(d), hi.max(d))
    });
    Ok((lo, hi))
}

/// Determinant by LU factorization with partial pivoting.
pub fn determinant(m: &DenseMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    let mut a = m.as_slice().to_vec();
    let mut det = 1.0;
    for k in 0..n {
        let pivot_row = (k..n)
            .max_by(|&i, &j| a[i * n + k].abs().total_cmp(&a[j * n + k].abs()))
            .unwrap_or(k);
        let pivot = a[pivot_row * n + k];
        if pivot == 0.0 {
            return Ok(0.0);
        }
        if pivot_row != k {
            for j in 0..n {
                a.swap(k * n + j, pivot_row * n + j);
            }
            det = -det;
        }
        det *= pivot;
        for i in (k + 1)..n {
            let factor = a[i * n + k] / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in k..n {
                a[i * n + j] -= factor * a[k * n + j];
            }
        }
    }
    Ok(det)
}
