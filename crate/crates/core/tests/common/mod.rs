//! Independent reference computations for the integration tests. Nothing here
//! goes through the library's SVD, so agreement is a genuine second route.
#![allow(dead_code, clippy::needless_range_loop)]

use nlcs_core::matrix::{gaussian_matrix, DenseMatrix, DenseVector, Seed};
use rand::seq::SliceRandom;
use rand::Rng;

/// Rank by Gaussian elimination with full pivoting, relative tolerance on
/// the largest pivot.
pub fn rank_by_elimination(m: &DenseMatrix, rel_tol: f64) -> usize {
    let (rows, cols) = m.shape();
    let mut a: Vec<Vec<f64>> = (0..rows).map(|i| m.row(i).to_vec()).collect();
    let scale = m.max_abs();
    if scale == 0.0 {
        return 0;
    }
    let mut rank = 0;
    let mut used_cols = vec![false; cols];
    for r in 0..rows.min(cols) {
        let mut best = (0.0, 0, 0);
        for (i, row) in a.iter().enumerate().skip(r) {
            for (j, &v) in row.iter().enumerate() {
                if !used_cols[j] && v.abs() > best.0 {
                    best = (v.abs(), i, j);
                }
            }
        }
        if best.0 <= rel_tol * scale {
            break;
        }
        let (_, pi, pj) = best;
        a.swap(r, pi);
        used_cols[pj] = true;
        for i in (r + 1)..rows {
            let f = a[i][pj] / a[r][pj];
            if f != 0.0 {
                for j in 0..cols {
                    a[i][j] -= f * a[r][j];
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Spark by elimination-based rank on every column subset.
pub fn spark_by_elimination(m: &DenseMatrix, rel_tol: f64) -> usize {
    let n = m.cols();
    for r in 1..=n {
        let mut found = false;
        for_each_subset(n, r, |s| {
            if !found && rank_by_elimination(&m.select_columns(s).unwrap(), rel_tol) < r {
                found = true;
            }
        });
        if found {
            return r;
        }
    }
    n + 1
}

pub fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::new(), &mut f);
}

/// Extreme eigenvalues of a small symmetric matrix by bisection on Sturm
/// sequence counts after Householder tridiagonalization.
pub fn sym_extreme_eigs(s: &DenseMatrix) -> (f64, f64) {
    let n = s.rows();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| s.row(i).to_vec()).collect();
    // Householder reduction to tridiagonal form.
    for k in 0..n.saturating_sub(2) {
        let x: Vec<f64> = (k + 1..n).map(|i| a[i][k]).collect();
        let alpha = -x[0].signum() * x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if alpha == 0.0 {
            continue;
        }
        let mut v = x.clone();
        v[0] -= alpha;
        let vn = v.iter().map(|t| t * t).sum::<f64>();
        if vn == 0.0 {
            continue;
        }
        // A <- H A H with H = I - 2 v vᵀ / vᵀv on the trailing block.
        let idx: Vec<usize> = (k + 1..n).collect();
        for j in 0..n {
            let d: f64 = idx.iter().zip(&v).map(|(&i, vi)| vi * a[i][j]).sum::<f64>() * 2.0 / vn;
            for (&i, vi) in idx.iter().zip(&v) {
                a[i][j] -= d * vi;
            }
        }
        for row in a.iter_mut() {
            let d: f64 = idx.iter().zip(&v).map(|(&j, vj)| vj * row[j]).sum::<f64>() * 2.0 / vn;
            for (&j, vj) in idx.iter().zip(&v) {
                row[j] -= d * vj;
            }
        }
    }
    let diag: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    let off: Vec<f64> = (1..n).map(|i| a[i][i - 1]).collect();
    let bound = (0..n)
        .map(|i| {
            diag[i].abs()
                + if i > 0 { off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { off[i].abs() } else { 0.0 }
        })
        .fold(0.0, f64::max);
    // Number of eigenvalues below x.
    let count_below = |x: f64| -> usize {
        let mut c = 0;
        let mut q = 1.0;
        for i in 0..n {
            let b2 = if i > 0 { off[i - 1] * off[i - 1] } else { 0.0 };
            q = diag[i] - x - if i > 0 { b2 / q } else { 0.0 };
            if q == 0.0 {
                q = -f64::EPSILON * (bound + 1.0);
            }
            if q < 0.0 {
                c += 1;
            }
        }
        c
    };
    let kth = |k: usize| -> f64 {
        let (mut lo, mut hi) = (-bound - 1.0, bound + 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    };
    (kth(0), kth(n - 1))
}

/// Random `n x n` matrix with `|det| ≥ 1e-6`, from a Gaussian draw.
pub fn random_invertible(n: usize, seed: Seed) -> DenseMatrix {
    for attempt in 0.. {
        let m = gaussian_matrix(n, n, seed.derive(attempt)).unwrap();
        if nlcs_core::matrix::determinant(&m).unwrap().abs() >= 1e-6 {
            return m;
        }
    }
    unreachable!()
}

/// Random permutation matrix times an invertible diagonal.
pub fn random_monomial(n: usize, seed: Seed) -> DenseMatrix {
    let mut rng = seed.rng();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let mut m = DenseMatrix::zeros(n, n).unwrap();
    for (i, &j) in perm.iter().enumerate() {
        let mag: f64 = rng.random_range(0.2..3.0);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        m.set(i, j, sign * mag).unwrap();
    }
    m
}

/// `‖Y z − F(z)‖_∞` computed entrywise.
pub fn certificate_residual(y: &DenseMatrix, z: &DenseVector, fz: &DenseVector) -> f64 {
    (0..y.rows())
        .map(|i| {
            let yz: f64 = (0..y.cols()).map(|j| y.get(i, j) * z[j]).sum();
            (yz - fz[i]).abs()
        })
        .fold(0.0, f64::max)
}

/// Exactly one nonzero per row and per column.
pub fn is_monomial(y: &DenseMatrix) -> bool {
    let n = y.rows();
    y.is_square()
        && (0..n).all(|i| (0..n).filter(|&j| y.get(i, j) != 0.0).count() == 1)
        && (0..n).all(|j| (0..n).filter(|&i| y.get(i, j) != 0.0).count() == 1)
}

pub fn is_strict_diagonal(y: &DenseMatrix) -> bool {
    let n = y.rows();
    y.is_square()
        && (0..n).all(|i| (0..n).all(|j| (i == j) == (y.get(i, j) != 0.0)))
}

/// Minimum ℓ1 norm over all basic solutions of `B u = y`: the LP optimum is
/// attained at one of them.
pub fn min_l1_over_vertices(b: &DenseMatrix, y: &DenseVector) -> Option<f64> {
    let (m, n) = b.shape();
    let mut best: Option<f64> = None;
    for k in 1..=m.min(n) {
        for_each_subset(n, k, |s| {
            let sub = b.select_columns(s).unwrap();
            if rank_by_elimination(&sub, 1e-12) < k {
                return;
            }
            if let Some(c) = solve_normal_equations(&sub, y) {
                let mut u = vec![0.0; n];
                for (&i, &v) in s.iter().zip(&c) {
                    u[i] = v;
                }
                let res: f64 = (0..m)
                    .map(|i| {
                        let r: f64 = (0..n).map(|j| b.get(i, j) * u[j]).sum::<f64>() - y[i];
                        r * r
                    })
                    .sum::<f64>()
                    .sqrt();
                if res <= 1e-9 * (1.0 + y.norm2()) {
                    let l1: f64 = u.iter().map(|v| v.abs()).sum();
                    best = Some(best.map_or(l1, |b: f64| b.min(l1)));
                }
            }
        });
    }
    best
}

/// Least squares through `SᵀS c = Sᵀy` with Gauss-Jordan elimination.
fn solve_normal_equations(s: &DenseMatrix, y: &DenseVector) -> Option<Vec<f64>> {
    let k = s.cols();
    let mut a = vec![vec![0.0; k + 1]; k];
    for i in 0..k {
        for j in 0..k {
            a[i][j] = (0..s.rows()).map(|r| s.get(r, i) * s.get(r, j)).sum();
        }
        a[i][k] = (0..s.rows()).map(|r| s.get(r, i) * y[r]).sum();
    }
    for c in 0..k {
        let p = (c..k).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-14 {
            return None;
        }
        a.swap(c, p);
        for i in 0..k {
            if i != c {
                let f = a[i][c] / a[c][c];
                for j in c..=k {
                    a[i][j] -= f * a[c][j];
                }
            }
        }
    }
    Some((0..k).map(|i| a[i][k] / a[i][i]).collect())
}
