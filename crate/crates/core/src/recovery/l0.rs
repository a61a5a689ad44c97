use itertools::Itertools;

use super::{check_system, residual_norm, RecoveryReport, SolverStatus};
use crate::error::{Error, Result};
use crate::matrix::{solve_least_squares, DenseMatrix, DenseVector};
use crate::properties::binomial;

/// Largest `C(cols, k_max)` the exhaustive search accepts.
pub const L0_MAX_SUPPORTS: u128 = 100_000;

/// Relative residual accepted as an exact fit.
const FIT_TOL: f64 = 1e-8;

/// Sparsest `u` with `B u = y`, by trying every support of size `0..=k_max`
/// in lexicographic order and fitting each by least squares.
pub fn l0_oracle(b: &DenseMatrix, y: &DenseVector, k_max: usize) -> Result<RecoveryReport> {
    check_system(b, y)?;
    let n = b.cols();
    if k_max > n {
        return Err(Error::InvalidArgument(format!(
            "k_max = {k_max} exceeds the {n} columns"
        )));
    }
    let supports = binomial(n, k_max);
    if supports > L0_MAX_SUPPORTS {
        return Err(Error::Guard {
            what: "supports for l0 search",
            limit: L0_MAX_SUPPORTS,
            actual: supports,
        });
    }
    let bound = FIT_TOL * (1.0 + y.norm2());
    if y.norm2() <= bound {
        return RecoveryReport::new(b, y, DenseVector::zeros(n)?, SolverStatus::Converged, 0);
    }
    let mut tried = 0;
    for k in 1..=k_max {
        for support in (0..n).combinations(k) {
            tried += 1;
            let coeffs = solve_least_squares(&b.select_columns(&support)?, y)?;
            let mut u = vec![0.0; n];
            for (&i, &c) in support.iter().zip(coeffs.iter()) {
                u[i] = c;
            }
            let u = DenseVector::new(u)?;
            if residual_norm(b, &u, y)? <= bound {
                return RecoveryReport::new(b, y, u, SolverStatus::Converged, tried);
            }
        }
    }
    Err(Error::NotFound { k_max })
}
