use super::{basis_pursuit, l0_oracle, LpSettings, Method, RecoveryReport};
use crate::composite::CompositeMap;
use crate::error::{Error, Result};
use crate::linearize::{
    classify, linearize, Composition, FreeEntry, LinearizationCertificate, LinearizationType,
};
use crate::maps::NonlinearMap;
use crate::matrix::{DenseMatrix, DenseVector, Seed};
use crate::properties::{binomial, rip_constants_with, Guards, RipReport};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PipelineOptions {
    pub method: Method,
    pub settings: LpSettings,
    pub guards: Guards,
    /// Certificate type to build. `None` classifies the map on sampled
    /// points and uses the strongest type it supports everywhere, so a map
    /// that only happens to preserve zeros at one anchor is not promoted.
    pub certificate: Option<LinearizationType>,
    pub classify_samples: usize,
    pub classify_seed: Seed,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            method: Method::L1,
            settings: LpSettings::default(),
            guards: Guards::default(),
            certificate: None,
            classify_samples: 200,
            classify_seed: Seed(0),
        }
    }
}

impl PipelineOptions {
    pub fn with_method(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }
}

/// Outcome of linearize-then-recover, with the intermediate linear problem.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearizedRecovery {
    /// Solution of `(λB) u = λz`, compared against the true signal.
    pub report: RecoveryReport,
    pub certificate: LinearizationCertificate,
    /// `B = Y A` (pre) or `B = A Y` (post).
    pub effective: DenseMatrix,
    pub measurements: DenseVector,
    /// Restricted isometry bounds of `B` at order `2k`, when within guards.
    pub rip: Option<RipReport>,
    pub lambda: f64,
}

/// Certificate type used for `map` under `composition`.
pub fn certificate_type(
    map: &NonlinearMap,
    composition: Composition,
    opts: &PipelineOptions,
) -> Result<LinearizationType> {
    let ty = match opts.certificate {
        Some(ty) => Some(ty),
        None => classify(map, composition, opts.classify_samples, opts.classify_seed)?.best,
    };
    match ty {
        Some(ty) if composition.accepts(ty) => Ok(ty),
        other => Err(Error::NotQualified {
            composition: composition.name(),
            best: other.map_or_else(|| "none".to_string(), |t| t.to_string()),
        }),
    }
}

/// Measures `x_true` through the composite map, replaces the map by a
/// certificate at the anchor, and recovers `x_true` from the resulting
/// linear system.
pub fn recover_via_linearization(
    a: &DenseMatrix,
    map: &NonlinearMap,
    composition: Composition,
    x_true: &DenseVector,
    opts: &PipelineOptions,
) -> Result<LinearizedRecovery> {
    let phi = CompositeMap::from_map(a.clone(), map.clone(), composition)?;
    let ty = certificate_type(map, composition, opts)?;
    let anchor = phi.anchor(x_true)?;
    // Post-composition free entries scale columns of A that the signal does
    // not touch; matching them to the support keeps B well balanced.
    let free = match composition {
        Composition::Pre => FreeEntry::Unit,
        Composition::Post => FreeEntry::SupportMin,
    };
    let certificate = linearize(map, ty, &anchor, free)?;
    let measurements = phi.apply(x_true)?;
    let effective = match composition {
        Composition::Pre => certificate.matrix().matmul(a)?,
        Composition::Post => a.matmul(certificate.matrix())?,
    };

    let k = x_true.count_nonzero();
    let order = 2 * k;
    let rip = if k > 0
        && order <= effective.cols()
        && binomial(effective.cols(), order) <= opts.guards.max_rip_supports
    {
        Some(rip_constants_with(&effective, order, &opts.guards)?)
    } else {
        None
    };
    let lambda = rip.map_or(1.0, |r| r.lambda);

    let b = effective.scale(lambda)?;
    let z = measurements.scale(lambda);
    let report = match opts.method {
        Method::L1 => basis_pursuit(&b, &z, &opts.settings)?,
        Method::L0 => l0_oracle(&b, &z, k)?,
    }
    .compare_with(x_true)?;

    Ok(LinearizedRecovery {
        report,
        certificate,
        effective,
        measurements,
        rip,
        lambda,
    })
}
