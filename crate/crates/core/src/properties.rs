//! Brute-force and sampled certification of sparse-recovery properties:
//! spark, restricted isometry constants, a sampled lower bound on the null
//! space constant, and the invariance of these under products with invertible
//! and permuted-diagonal matrices.

use itertools::Itertools;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::composite::Measurement;
use crate::error::{Error, Result};
use crate::matrix::{
    null_space, rank, random_nonzero_normal, svd, DenseMatrix, DenseVector, Seed,
    DEFAULT_RANK_TOL,
};

/// Limits on brute-force enumeration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Guards {
    pub max_spark_cols: usize,
    pub max_rip_supports: u128,
    pub rank_tol: f64,
}

impl Default for Guards {
    fn default() -> Self {
        Self {
            max_spark_cols: 24,
            max_rip_supports: 200_000,
            rank_tol: DEFAULT_RANK_TOL,
        }
    }
}

/// `C(n, k)`, saturating.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparkReport {
    pub spark: usize,
    /// A dependent column subset of size `spark`; empty when every subset is
    /// independent (`spark = cols + 1`).
    pub witness: Vec<usize>,
}

pub fn spark(a: &DenseMatrix) -> Result<SparkReport> {
    spark_with(a, &Guards::default())
}

pub fn spark_with(a: &DenseMatrix, guards: &Guards) -> Result<SparkReport> {
    let n = a.cols();
    if n > guards.max_spark_cols {
        return Err(Error::Guard {
            what: "columns for spark",
            limit: guards.max_spark_cols as u128,
            actual: n as u128,
        });
    }
    let max_r = (a.rows() + 1).min(n);
    for r in 1..=max_r {
        for subset in (0..n).combinations(r) {
            let sub = a.select_columns(&subset)?;
            if rank(&sub, guards.rank_tol)? < r {
                return Ok(SparkReport {
                    spark: r,
                    witness: subset,
                });
            }
        }
    }
    Ok(SparkReport {
        spark: n + 1,
        witness: Vec::new(),
    })
}

/// Asymmetric restricted isometry bounds `α‖x‖² ≤ ‖Ax‖² ≤ β‖x‖²` over all
/// `order`-sparse `x`, with the rescaling `λ = sqrt(2/(α+β))` that makes the
/// bounds symmetric about 1 with constant `δ = (β−α)/(β+α)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RipReport {
    pub order: usize,
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub lambda: f64,
}

impl RipReport {
    pub fn from_bounds(order: usize, alpha: f64, beta: f64) -> Self {
        Self {
            order,
            alpha,
            beta,
            delta: (beta - alpha) / (beta + alpha),
            lambda: (2.0 / (beta + alpha)).sqrt(),
        }
    }
}

fn check_order(a: &DenseMatrix, k: usize) -> Result<()> {
    if k == 0 || k > a.cols() {
        return Err(Error::InvalidArgument(format!(
            "order k = {k} must satisfy 1 <= k <= {} columns",
            a.cols()
        )));
    }
    Ok(())
}

pub fn rip_constants(a: &DenseMatrix, k: usize) -> Result<RipReport> {
    rip_constants_with(a, k, &Guards::default())
}

/// Brute force over all size-`k` supports `T`: `α = min σ_min(A_T)²`,
/// `β = max σ_max(A_T)²`. Fails when some `A_T` is rank deficient at the
/// guard's rank tolerance.
pub fn rip_constants_with(a: &DenseMatrix, k: usize, guards: &Guards) -> Result<RipReport> {
    check_order(a, k)?;
    let supports = binomial(a.cols(), k);
    if supports > guards.max_rip_supports {
        return Err(Error::Guard {
            what: "supports for RIP",
            limit: guards.max_rip_supports,
            actual: supports,
        });
    }
    if k > a.rows() {
        return Err(Error::RipFails { order: k });
    }
    let mut alpha = f64::INFINITY;
    let mut beta = 0.0f64;
    for subset in (0..a.cols()).combinations(k) {
        let d = svd(&a.select_columns(&subset)?);
        let (lo, hi) = (d.sigma_min(), d.sigma_max());
        if hi == 0.0 || lo <= guards.rank_tol * hi {
            return Err(Error::RipFails { order: k });
        }
        alpha = alpha.min(lo * lo);
        beta = beta.max(hi * hi);
    }
    Ok(RipReport::from_bounds(k, alpha, beta))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NspEstimate {
    pub order: usize,
    /// Largest `√k ‖h_Λ‖₂ / ‖h_Λᶜ‖₁` seen over the sampled null vectors.
    pub c_lower: f64,
    pub samples: usize,
}

/// `√k ‖h_Λ‖₂ / ‖h_Λᶜ‖₁` for the `k` largest-magnitude entries Λ of `h`,
/// which is the largest value over all `|Λ| ≤ k`. `None` when `h` is
/// (numerically) `k`-sparse.
pub fn nsp_ratio(h: &DenseVector, k: usize) -> Option<f64> {
    let mut idx: Vec<usize> = (0..h.dim()).collect();
    idx.sort_by(|&i, &j| h[j].abs().total_cmp(&h[i].abs()).then(i.cmp(&j)));
    let k = k.min(h.dim());
    let head: f64 = idx[..k].iter().map(|&i| h[i] * h[i]).sum::<f64>().sqrt();
    let tail: f64 = idx[k..].iter().map(|&i| h[i].abs()).sum();
    if tail <= 1e-12 * h.norm1() {
        return None;
    }
    Some((k as f64).sqrt() * head / tail)
}

/// Random unit vectors of the null space of `A` (empty if it is trivial).
pub fn nsp_samples(a: &DenseMatrix, samples: usize, seed: Seed) -> Result<Vec<DenseVector>> {
    let basis = null_space(a, DEFAULT_RANK_TOL)?;
    if basis.is_empty() {
        return Ok(Vec::new());
    }
    let mut rng = seed.rng();
    let n = a.cols();
    let mut out = Vec::with_capacity(samples);
    while out.len() < samples {
        let mut h = vec![0.0; n];
        for b in &basis {
            let g = random_nonzero_normal(&mut rng, 0.0);
            for (hi, bi) in h.iter_mut().zip(b.iter()) {
                *hi += g * bi;
            }
        }
        let h = DenseVector::new(h)?;
        let norm = h.norm2();
        if norm > 0.0 {
            out.push(h.scale(1.0 / norm));
        }
    }
    Ok(out)
}

pub fn nsp_estimate(a: &DenseMatrix, k: usize, samples: usize, seed: Seed) -> Result<NspEstimate> {
    check_order(a, k)?;
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    let hs = nsp_samples(a, samples, seed)?;
    let mut c_lower = 0.0f64;
    for h in &hs {
        let r = nsp_ratio(h, k).ok_or(Error::NspFails { order: k })?;
        c_lower = c_lower.max(r);
    }
    Ok(NspEstimate {
        order: k,
        c_lower,
        samples: hs.len(),
    })
}

fn validate_invertible(a: &DenseMatrix, m_i: &DenseMatrix, tol: f64) -> Result<()> {
    if !m_i.is_square() {
        return Err(Error::NotSquare {
            rows: m_i.rows(),
            cols: m_i.cols(),
        });
    }
    if m_i.rows() != a.rows() {
        return Err(Error::DimensionMismatch {
            context: "invertible left factor",
            expected: a.rows(),
            actual: m_i.rows(),
        });
    }
    let r = rank(m_i, tol)?;
    if r != m_i.rows() {
        return Err(Error::NotInvertible {
            rank: r,
            size: m_i.rows(),
        });
    }
    Ok(())
}

fn validate_monomial(a: &DenseMatrix, m_d: &DenseMatrix) -> Result<()> {
    if !m_d.is_square() {
        return Err(Error::NotSquare {
            rows: m_d.rows(),
            cols: m_d.cols(),
        });
    }
    if m_d.rows() != a.cols() {
        return Err(Error::DimensionMismatch {
            context: "permuted diagonal right factor",
            expected: a.cols(),
            actual: m_d.rows(),
        });
    }
    if !m_d.is_monomial() {
        return Err(Error::NotMonomial);
    }
    Ok(())
}

/// `spark(M_I A) = spark(A)` and `spark(A M_D) = spark(A)`.
pub fn check_invariance_spark(
    a: &DenseMatrix,
    m_i: &DenseMatrix,
    m_d: &DenseMatrix,
) -> Result<bool> {
    let guards = Guards::default();
    validate_invertible(a, m_i, guards.rank_tol)?;
    validate_monomial(a, m_d)?;
    let base = spark_with(a, &guards)?.spark;
    let left = spark_with(&m_i.matmul(a)?, &guards)?.spark;
    let right = spark_with(&a.matmul(m_d)?, &guards)?.spark;
    Ok(left == base && right == base)
}

/// Whether `M_I A` and `A M_D` keep a RIP of order `k` that `A` has.
pub fn check_invariance_rip_order(
    a: &DenseMatrix,
    k: usize,
    m_i: &DenseMatrix,
    m_d: &DenseMatrix,
) -> Result<bool> {
    let guards = Guards::default();
    validate_invertible(a, m_i, guards.rank_tol)?;
    validate_monomial(a, m_d)?;
    rip_constants_with(a, k, &guards)?;
    for product in [m_i.matmul(a)?, a.matmul(m_d)?] {
        match rip_constants_with(&product, k, &guards) {
            Ok(r) if r.alpha > 0.0 => {}
            Ok(_) | Err(Error::RipFails { .. }) => return Ok(false),
            Err(e) => return Err(e),
        }
    }
    Ok(true)
}

/// Sampled distortion of a (possibly nonlinear) measurement map on pairs of
/// sparse signals.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompositeRipEstimate {
    /// `min ‖Φ(x1)−Φ(x2)‖² / ‖x1−x2‖²` over the sampled pairs.
    pub lower: f64,
    pub upper: f64,
    pub pairs: usize,
    /// First sampled pair with `Φ(x1) = Φ(x2)`, if any.
    pub witness: Option<(DenseVector, DenseVector)>,
}

/// Amplitude cap for sampled signal entries; keeps the pairs inside the sine
/// domain.
const PAIR_AMPLITUDE: f64 = 3.0;

fn sparse_on(n: usize, support: &[usize], rng: &mut impl Rng) -> DenseVector {
    let mut x = vec![0.0; n];
    for &i in support {
        x[i] = loop {
            let v = random_nonzero_normal(rng, 1e-6);
            if v.abs() < PAIR_AMPLITUDE {
                break v;
            }
        };
    }
    DenseVector::from_vec_unchecked(x)
}

/// Pairs `x1, x2 ∈ Σ_k` for the composite estimator. Even-indexed pairs share
/// a support; odd-indexed pairs use disjoint supports when `2k ≤ n`.
pub fn sample_sparse_pairs(
    n: usize,
    k: usize,
    pairs: usize,
    seed: Seed,
) -> Result<Vec<(DenseVector, DenseVector)>> {
    if n == 0 || k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= k <= n, got k = {k}, n = {n}"
        )));
    }
    let mut rng = seed.rng();
    let mut out = Vec::with_capacity(pairs);
    while out.len() < pairs {
        let mut t1 = rand::seq::index::sample(&mut rng, n, k).into_vec();
        t1.sort_unstable();
        let t2 = if out.len() % 2 == 1 && 2 * k <= n {
            let rest: Vec<usize> = (0..n).filter(|i| !t1.contains(i)).collect();
            let mut t2: Vec<usize> = rand::seq::index::sample(&mut rng, rest.len(), k)
                .into_iter()
                .map(|j| rest[j])
                .collect();
            t2.sort_unstable();
            t2
        } else {
            t1.clone()
        };
        let x1 = sparse_on(n, &t1, &mut rng);
        let x2 = sparse_on(n, &t2, &mut rng);
        if x1 != x2 {
            out.push((x1, x2));
        }
    }
    Ok(out)
}

pub fn composite_rip_estimate<M: Measurement + ?Sized>(
    phi: &M,
    n: usize,
    k: usize,
    pairs: usize,
    seed: Seed,
) -> Result<CompositeRipEstimate> {
    if pairs == 0 {
        return Err(Error::InvalidArgument("pairs must be at least 1".into()));
    }
    let mut lower = f64::INFINITY;
    let mut upper = 0.0f64;
    let mut witness = None;
    for (x1, x2) in sample_sparse_pairs(n, k, pairs, seed)? {
        let dy = phi.measure(&x1)?.sub(&phi.measure(&x2)?)?.norm2();
        let dx = x1.sub(&x2)?.norm2();
        let ratio = (dy / dx).powi(2);
        if dy == 0.0 && witness.is_none() {
            witness = Some((x1.clone(), x2.clone()));
        }
        lower = lower.min(ratio);
        upper = upper.max(ratio);
    }
    Ok(CompositeRipEstimate {
        lower,
        upper,
        pairs,
        witness,
    })
}
