//! Sparse recovery from linear equations `B u = y`: ℓ1 basis pursuit, an
//! exhaustive ℓ0 search, and recovery through a linearized composite map.

mod basis_pursuit;
mod l0;
pub mod pipeline;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, DenseVector};

pub use basis_pursuit::basis_pursuit;
pub use l0::{l0_oracle, L0_MAX_SUPPORTS};
pub use pipeline::{certificate_type, recover_via_linearization, LinearizedRecovery, PipelineOptions};

/// Relative magnitude below which a recovered entry counts as zero when
/// comparing supports.
pub const SUPPORT_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSettings {
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub max_iterations: usize,
}

impl Default for LpSettings {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-8,
            optimality_tol: 1e-8,
            max_iterations: 200,
        }
    }
}

impl LpSettings {
    pub fn validate(&self) -> Result<()> {
        let ok = |t: f64| t > 0.0 && t.is_finite();
        if !ok(self.feasibility_tol) || !ok(self.optimality_tol) || self.max_iterations == 0 {
            return Err(Error::InvalidArgument(format!(
                "LP settings must be positive, got {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverStatus {
    Converged,
    MaxIter,
    Infeasible,
}

impl SolverStatus {
    pub fn name(self) -> &'static str {
        match self {
            SolverStatus::Converged => "converged",
            SolverStatus::MaxIter => "max_iter",
            SolverStatus::Infeasible => "infeasible",
        }
    }
}

impl fmt::Display for SolverStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    L1,
    L0,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::L1 => "l1",
            Method::L0 => "l0",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "l1" => Ok(Method::L1),
            "l0" => Ok(Method::L0),
            other => Err(Error::Parse(format!("unknown method '{other}', expected l1 or l0"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub x_hat: DenseVector,
    /// `‖B x_hat − y‖₂` for the system that was solved.
    pub residual: f64,
    pub l1_norm: f64,
    /// `None` until compared against a ground truth.
    pub support_exact: Option<bool>,
    pub rel_error: Option<f64>,
    pub solver_status: SolverStatus,
    #[serde(skip)]
    pub iterations: usize,
}

impl RecoveryReport {
    pub(crate) fn new(
        b: &DenseMatrix,
        y: &DenseVector,
        x_hat: DenseVector,
        solver_status: SolverStatus,
        iterations: usize,
    ) -> Result<Self> {
        let residual = residual_norm(b, &x_hat, y)?;
        Ok(Self {
            l1_norm: x_hat.norm1(),
            x_hat,
            residual,
            support_exact: None,
            rel_error: None,
            solver_status,
            iterations,
        })
    }

    /// Fills `support_exact` and `rel_error` against `truth`.
    pub fn compare_with(mut self, truth: &DenseVector) -> Result<Self> {
        let diff = self.x_hat.sub(truth)?.norm2();
        let scale = truth.norm2();
        self.rel_error = Some(if scale > 0.0 { diff / scale } else { diff });
        self.support_exact =
            Some(self.x_hat.support_with_tol(SUPPORT_TOL) == truth.support());
        Ok(self)
    }

    pub fn support(&self) -> Vec<usize> {
        self.x_hat.support_with_tol(SUPPORT_TOL)
    }
}

pub fn residual_norm(b: &DenseMatrix, x: &DenseVector, y: &DenseVector) -> Result<f64> {
    Ok(b.mul_vec(x)?.sub(y)?.norm2())
}

pub(crate) fn check_system(b: &DenseMatrix, y: &DenseVector) -> Result<()> {
    if b.rows() != y.dim() {
        return Err(Error::DimensionMismatch {
            context: "measurement vector",
            expected: b.rows(),
            actual: y.dim(),
        });
    }
    Ok(())
}
