//! ℓ1 minimization as the linear program
//! `min 1ᵀ(p + q)  s.t.  B(p − q) = y,  p, q ≥ 0`,
//! solved by a Mehrotra predictor-corrector interior point method.
//!
//! The equality constraints are first replaced by an equivalent system with
//! orthonormal rows (`Q u = b`, from an SVD of `B`), which fixes the
//! conditioning of the constraint matrix and exposes inconsistent `y` before
//! any iteration. A converged iterate is then projected back onto `Q u = b`
//! and, when it is numerically sparse, refit by least squares on its support.

use super::{check_system, residual_norm, LpSettings, RecoveryReport, SolverStatus};
use crate::error::Result;
use crate::matrix::{dot, solve_least_squares, svd, DenseMatrix, DenseVector, DEFAULT_RANK_TOL};

/// Fraction of the distance to the boundary taken per step.
const STEP_DAMPING: f64 = 0.995;
/// Support thresholds (relative to the largest entry) tried by the refit.
const REFIT_THRESHOLDS: [f64; 2] = [1e-6, 1e-9];

/// Orthonormal-row form of `B u = y`.
struct Reduced {
    /// Rows of `Q`, each of length `n`.
    q: Vec<Vec<f64>>,
    b: Vec<f64>,
    /// `‖y − P y‖₂`, the part of `y` outside the column space of `B`.
    inconsistency: f64,
}

fn reduce(b_mat: &DenseMatrix, y: &DenseVector) -> Reduced {
    // Bᵀ V = W with W = [σ_j u_j]; so B = V Wᵀ and B u = y  <=>  Wᵀ u = Vᵀ y.
    let d = svd(&b_mat.transpose());
    let cutoff = DEFAULT_RANK_TOL * d.sigma_max();
    let mut q = Vec::new();
    let mut rhs = Vec::new();
    let mut in_range = vec![0.0; y.dim()];
    for (j, &s) in d.sigma().iter().enumerate() {
        if s == 0.0 || s <= cutoff {
            continue;
        }
        let v = d.right_vector(j);
        let coeff = dot(v, y.as_slice());
        for (p, vi) in in_range.iter_mut().zip(v) {
            *p += coeff * vi;
        }
        q.push(d.scaled_left_vector(j).iter().map(|w| w / s).collect());
        rhs.push(coeff / s);
    }
    let inconsistency = y
        .iter()
        .zip(&in_range)
        .map(|(a, p)| (a - p) * (a - p))
        .sum::<f64>()
        .sqrt();
    Reduced {
        q,
        b: rhs,
        inconsistency,
    }
}

impl Reduced {
    fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.q.iter().map(|row| dot(row, u)).collect()
    }

    fn apply_tr(&self, lambda: &[f64], n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (row, &l) in self.q.iter().zip(lambda) {
            for (o, r) in out.iter_mut().zip(row) {
                *o += l * r;
            }
        }
        out
    }

    /// Minimum-norm correction of `u` onto `Q u = b`.
    fn project(&self, u: &mut [f64]) {
        let r: Vec<f64> = self
            .b
            .iter()
            .zip(self.apply(u))
            .map(|(b, qu)| b - qu)
            .collect();
        let n = u.len();
        for (ui, c) in u.iter_mut().zip(self.apply_tr(&r, n)) {
            *ui += c;
        }
    }

    /// `Q diag(d) Qᵀ`.
    fn weighted_gram(&self, d: &[f64]) -> Vec<Vec<f64>> {
        let r = self.q.len();
        let mut m = vec![vec![0.0; r]; r];
        for i in 0..r {
            let qi: Vec<f64> = self.q[i].iter().zip(d).map(|(a, b)| a * b).collect();
            for j in 0..=i {
                let v = dot(&qi, &self.q[j]);
                m[i][j] = v;
                m[j][i] = v;
            }
        }
        m
    }
}

/// In-place Cholesky factor (lower) with a tiny diagonal shift for the
/// near-singular systems that appear close to the optimum.
fn cholesky(mut m: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let r = m.len();
    let max_diag = (0..r).fold(0.0f64, |a, i| a.max(m[i][i]));
    let shift = 1e-14 * max_diag.max(f64::MIN_POSITIVE);
    for i in 0..r {
        m[i][i] += shift;
    }
    for j in 0..r {
        let mut d = m[j][j] - (0..j).map(|k| m[j][k] * m[j][k]).sum::<f64>();
        if d <= shift {
            d = shift;
        }
        let d = d.sqrt();
        m[j][j] = d;
        for i in (j + 1)..r {
            let s = m[i][j] - (0..j).map(|k| m[i][k] * m[j][k]).sum::<f64>();
            m[i][j] = s / d;
        }
    }
    m
}

fn cholesky_solve(l: &[Vec<f64>], rhs: &[f64]) -> Vec<f64> {
    let r = rhs.len();
    let mut x = rhs.to_vec();
    for i in 0..r {
        let s: f64 = (0..i).map(|k| l[i][k] * x[k]).sum();
        x[i] = (x[i] - s) / l[i][i];
    }
    for i in (0..r).rev() {
        let s: f64 = ((i + 1)..r).map(|k| l[k][i] * x[k]).sum();
        x[i] = (x[i] - s) / l[i][i];
    }
    x
}

fn max_step(w: &[f64], dw: &[f64]) -> f64 {
    w.iter()
        .zip(dw)
        .filter(|(_, &d)| d < 0.0)
        .fold(1.0f64, |a, (&wi, &di)| a.min(-wi / di))
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Primal-dual state with `w = [p; q]`, slacks `s` and multipliers `λ`.
struct Ipm<'a> {
    sys: &'a Reduced,
    n: usize,
    w: Vec<f64>,
    s: Vec<f64>,
    lambda: Vec<f64>,
}

struct Residuals {
    primal: Vec<f64>,
    dual: Vec<f64>,
}

struct Direction {
    dw: Vec<f64>,
    ds: Vec<f64>,
    dlambda: Vec<f64>,
}

impl<'a> Ipm<'a> {
    fn start(sys: &'a Reduced, n: usize) -> Self {
        // Least-norm primal point, zero multipliers, unit slacks, then shifted
        // into the interior.
        let qb = sys.apply_tr(&sys.b, n);
        let mut w: Vec<f64> = qb.iter().map(|v| 0.5 * v).chain(qb.iter().map(|v| -0.5 * v)).collect();
        let mut s = vec![1.0; 2 * n];
        let min_w = w.iter().cloned().fold(f64::INFINITY, f64::min);
        let shift = (-1.5 * min_w).max(0.0);
        w.iter_mut().for_each(|v| *v += shift);
        let ws = dot(&w, &s);
        if ws <= 0.0 {
            w.iter_mut().for_each(|v| *v = 1.0);
        } else {
            let dw = 0.5 * ws / s.iter().sum::<f64>();
            let ds = 0.5 * ws / w.iter().sum::<f64>();
            w.iter_mut().for_each(|v| *v += dw);
            s.iter_mut().for_each(|v| *v += ds);
        }
        Self {
            sys,
            n,
            w,
            s,
            lambda: vec![0.0; sys.q.len()],
        }
    }

    fn u(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.w[i] - self.w[self.n + i]).collect()
    }

    fn residuals(&self) -> Residuals {
        let qu = self.sys.apply(&self.u());
        let primal = self.sys.b.iter().zip(qu).map(|(b, v)| b - v).collect();
        let ql = self.sys.apply_tr(&self.lambda, self.n);
        let dual = (0..2 * self.n)
            .map(|i| {
                let el = if i < self.n { ql[i] } else { -ql[i - self.n] };
                1.0 - el - self.s[i]
            })
            .collect();
        Residuals { primal, dual }
    }

    fn mu(&self) -> f64 {
        dot(&self.w, &self.s) / self.w.len() as f64
    }

    /// `E x` for `E = [Q, −Q]`.
    fn e_apply(&self, x: &[f64]) -> Vec<f64> {
        let d: Vec<f64> = (0..self.n).map(|i| x[i] - x[self.n + i]).collect();
        self.sys.apply(&d)
    }

    fn et_apply(&self, l: &[f64]) -> Vec<f64> {
        let ql = self.sys.apply_tr(l, self.n);
        ql.iter().cloned().chain(ql.iter().map(|v| -v)).collect()
    }

    /// Newton direction for complementarity target `rc` (so that
    /// `S dw + W ds = rc`).
    fn direction(&self, chol: &[Vec<f64>], res: &Residuals, rc: &[f64]) -> Direction {
        let d: Vec<f64> = self.w.iter().zip(&self.s).map(|(w, s)| w / s).collect();
        let t: Vec<f64> = (0..d.len())
            .map(|i| d[i] * res.dual[i] - rc[i] / self.s[i])
            .collect();
        let et = self.e_apply(&t);
        let rhs: Vec<f64> = res.primal.iter().zip(et).map(|(p, v)| p + v).collect();
        let dlambda = cholesky_solve(chol, &rhs);
        let etl = self.et_apply(&dlambda);
        let ds: Vec<f64> = res.dual.iter().zip(etl).map(|(r, v)| r - v).collect();
        let dw = (0..d.len())
            .map(|i| (rc[i] - self.w[i] * ds[i]) / self.s[i])
            .collect();
        Direction { dw, ds, dlambda }
    }
}

struct IpmOutcome {
    u: Vec<f64>,
    converged: bool,
    iterations: usize,
}

fn interior_point(sys: &Reduced, n: usize, settings: &LpSettings) -> IpmOutcome {
    let mut st = Ipm::start(sys, n);
    let b_norm = norm(&sys.b);
    let mut best = (f64::INFINITY, st.u());
    for iter in 0..settings.max_iterations {
        let res = st.residuals();
        let objective: f64 = st.w.iter().sum();
        let dual_obj = dot(&sys.b, &st.lambda);
        let p_err = norm(&res.primal) / (1.0 + b_norm);
        let d_err = res.dual.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let gap = (objective - dual_obj).abs() / (1.0 + objective.abs());
        let merit = (p_err / settings.feasibility_tol)
            .max(d_err / settings.optimality_tol)
            .max(gap / settings.optimality_tol);
        if merit < best.0 {
            best = (merit, st.u());
        }
        if merit <= 1.0 {
            return IpmOutcome {
                u: st.u(),
                converged: true,
                iterations: iter,
            };
        }

        let d: Vec<f64> = (0..n)
            .map(|i| st.w[i] / st.s[i] + st.w[n + i] / st.s[n + i])
            .collect();
        let chol = cholesky(sys.weighted_gram(&d));
        let mu = st.mu();

        let rc_aff: Vec<f64> = st.w.iter().zip(&st.s).map(|(w, s)| -w * s).collect();
        let aff = st.direction(&chol, &res, &rc_aff);
        let ap = max_step(&st.w, &aff.dw);
        let ad = max_step(&st.s, &aff.ds);
        let mu_aff = (0..st.w.len())
            .map(|i| (st.w[i] + ap * aff.dw[i]) * (st.s[i] + ad * aff.ds[i]))
            .sum::<f64>()
            / st.w.len() as f64;
        let sigma = (mu_aff / mu).powi(3).min(1.0);

        let rc: Vec<f64> = (0..st.w.len())
            .map(|i| sigma * mu - st.w[i] * st.s[i] - aff.dw[i] * aff.ds[i])
            .collect();
        let dir = st.direction(&chol, &res, &rc);
        let ap = (STEP_DAMPING * max_step(&st.w, &dir.dw)).min(1.0);
        let ad = (STEP_DAMPING * max_step(&st.s, &dir.ds)).min(1.0);
        for (w, dw) in st.w.iter_mut().zip(&dir.dw) {
            *w += ap * dw;
        }
        for (s, ds) in st.s.iter_mut().zip(&dir.ds) {
            *s += ad * ds;
        }
        for (l, dl) in st.lambda.iter_mut().zip(&dir.dlambda) {
            *l += ad * dl;
        }
        if st.w.iter().chain(&st.s).any(|v| !v.is_finite()) {
            break;
        }
    }
    IpmOutcome {
        u: best.1,
        converged: false,
        iterations: settings.max_iterations,
    }
}

/// Least-squares refit on the numerical support of `u`; kept only if it is
/// feasible and no worse in ℓ1.
fn refit(
    b_mat: &DenseMatrix,
    y: &DenseVector,
    u: &DenseVector,
    feas_bound: f64,
    settings: &LpSettings,
) -> Result<Option<DenseVector>> {
    let l1 = u.norm1();
    let rank_cap = b_mat.rows().min(b_mat.cols());
    let mut last: Option<Vec<usize>> = None;
    for tol in REFIT_THRESHOLDS {
        let support = u.support_with_tol(tol);
        if support.is_empty() || support.len() > rank_cap || last.as_ref() == Some(&support) {
            continue;
        }
        let sub = b_mat.select_columns(&support)?;
        let coeffs = solve_least_squares(&sub, y)?;
        let mut full = vec![0.0; u.dim()];
        for (&i, &c) in support.iter().zip(coeffs.iter()) {
            full[i] = c;
        }
        let cand = DenseVector::new(full)?;
        if residual_norm(b_mat, &cand, y)? <= feas_bound
            && cand.norm1() <= l1 + settings.optimality_tol * (1.0 + l1)
        {
            return Ok(Some(cand));
        }
        last = Some(support);
    }
    Ok(None)
}

/// `argmin ‖u‖₁` subject to `‖B u − y‖₂ ≤ feasibility_tol · (1 + ‖y‖₂)`.
pub fn basis_pursuit(b_mat: &DenseMatrix, y: &DenseVector, settings: &LpSettings) -> Result<RecoveryReport> {
    check_system(b_mat, y)?;
    settings.validate()?;
    let n = b_mat.cols();
    let feas_bound = settings.feasibility_tol * (1.0 + y.norm2());
    if y.is_zero() {
        return RecoveryReport::new(b_mat, y, DenseVector::zeros(n)?, SolverStatus::Converged, 0);
    }

    let sys = reduce(b_mat, y);
    if sys.q.is_empty() || sys.inconsistency > feas_bound {
        let x = solve_least_squares(b_mat, y)?;
        return RecoveryReport::new(b_mat, y, x, SolverStatus::Infeasible, 0);
    }

    let outcome = interior_point(&sys, n, settings);
    let mut u = outcome.u;
    sys.project(&mut u);
    let mut x = DenseVector::new(u)?;
    if let Some(polished) = refit(b_mat, y, &x, feas_bound, settings)? {
        x = polished;
    }
    let status = if outcome.converged && residual_norm(b_mat, &x, y)? <= feas_bound {
        SolverStatus::Converged
    } else {
        SolverStatus::MaxIter
    };
    RecoveryReport::new(b_mat, y, x, status, outcome.iterations)
}
