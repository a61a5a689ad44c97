//! Nonlinear sensor maps `F(z) = (f_1(z), ..., f_n(z))` and the pointwise
//! requirement predicates that decide which kind of matrix `Y` with
//! `F(z) = Y z` exists at a point.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linearize::LinearizationType;
use crate::matrix::{DenseVector, Seed};

/// Values at or below this magnitude count as zero for analytic maps.
pub const ANALYTIC_ZERO_TOL: f64 = 1e-12;

/// Smallest magnitude `NonzeroRandom` will emit.
pub const NONZERO_RANDOM_FLOOR: f64 = 1e-6;

pub type ComponentFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// User-supplied map given as one function per output component.
#[derive(Clone)]
pub struct CustomMap {
    components: Arc<[ComponentFn]>,
    elementwise: bool,
}

impl CustomMap {
    pub fn new(components: Vec<ComponentFn>, elementwise: bool) -> Self {
        Self {
            components: components.into(),
            elementwise,
        }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

impl fmt::Debug for CustomMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomMap")
            .field("components", &self.components.len())
            .field("elementwise", &self.elementwise)
            .finish()
    }
}

/// Which nonlinearity a map applies. Serializes as
/// `{"kind": "abs" | "sign" | ..., "step": .., "seed": ..}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum MapKind {
    #[serde(rename = "identity")]
    Identity,
    #[serde(rename = "abs")]
    AbsValue,
    #[serde(rename = "sign")]
    Sign,
    #[serde(rename = "quantize_afz")]
    QuantizeAwayFromZero { step: f64 },
    #[serde(rename = "quantize_floor")]
    QuantizeFloor { step: f64 },
    #[serde(rename = "sine")]
    Sine,
    #[serde(rename = "square")]
    Square,
    #[serde(rename = "nonzero_random")]
    NonzeroRandom { seed: Seed },
    #[serde(skip)]
    Custom(CustomMap),
}

impl PartialEq for MapKind {
    fn eq(&self, other: &Self) -> bool {
        use MapKind::*;
        match (self, other) {
            (Identity, Identity) | (AbsValue, AbsValue) | (Sign, Sign) => true,
            (Sine, Sine) | (Square, Square) => true,
            (QuantizeAwayFromZero { step: a }, QuantizeAwayFromZero { step: b }) => a == b,
            (QuantizeFloor { step: a }, QuantizeFloor { step: b }) => a == b,
            (NonzeroRandom { seed: a }, NonzeroRandom { seed: b }) => a == b,
            (Custom(a), Custom(b)) => Arc::ptr_eq(&a.components, &b.components),
            _ => false,
        }
    }
}

impl MapKind {
    /// Parses either a JSON object (`{"kind": "quantize_floor", "step": 1}`)
    /// or a short form `kind[:param]`, e.g. `abs`, `quantize_afz:0.5`,
    /// `nonzero_random:7`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text.starts_with('{') {
            let kind: MapKind = serde_json::from_str(text)?;
            kind.validate()?;
            return Ok(kind);
        }
        let (name, param) = match text.split_once(':') {
            Some((n, p)) => (n.trim(), Some(p.trim())),
            None => (text, None),
        };
        let step = || -> Result<f64> {
            param
                .unwrap_or("1")
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("step {param:?}: {e}")))
        };
        let kind = match name {
            "identity" => MapKind::Identity,
            "abs" => MapKind::AbsValue,
            "sign" => MapKind::Sign,
            "sine" => MapKind::Sine,
            "square" => MapKind::Square,
            "quantize_afz" => MapKind::QuantizeAwayFromZero { step: step()? },
            "quantize_floor" => MapKind::QuantizeFloor { step: step()? },
            "nonzero_random" => MapKind::NonzeroRandom {
                seed: Seed(
                    param
                        .unwrap_or("0")
                        .parse::<u64>()
                        .map_err(|e| Error::Parse(format!("seed {param:?}: {e}")))?,
                ),
            },
            other => return Err(Error::Parse(format!("unknown map kind {other:?}"))),
        };
        kind.validate()?;
        Ok(kind)
    }

    pub fn name(&self) -> &'static str {
        match self {
            MapKind::Identity => "identity",
            MapKind::AbsValue => "abs",
            MapKind::Sign => "sign",
            MapKind::QuantizeAwayFromZero { .. } => "quantize_afz",
            MapKind::QuantizeFloor { .. } => "quantize_floor",
            MapKind::Sine => "sine",
            MapKind::Square => "square",
            MapKind::NonzeroRandom { .. } => "nonzero_random",
            MapKind::Custom(_) => "custom",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MapKind::QuantizeAwayFromZero { step } | MapKind::QuantizeFloor { step }
                if !(step.is_finite() && *step > 0.0) =>
            {
                Err(Error::InvalidArgument(format!(
                    "quantizer step must be positive and finite, got {step}"
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn is_elementwise(&self) -> bool {
        match self {
            MapKind::NonzeroRandom { .. } => false,
            MapKind::Custom(c) => c.elementwise,
            _ => true,
        }
    }

    /// Whether zero tests on outputs use exact comparison (discrete-valued or
    /// exactly zero-preserving maps) rather than [`ANALYTIC_ZERO_TOL`].
    fn exact_zero(&self) -> bool {
        !matches!(self, MapKind::Sine | MapKind::Square | MapKind::Custom(_))
    }

    /// Step used by the domain sampler for sub-step entries.
    fn sub_step(&self) -> f64 {
        match self {
            MapKind::QuantizeAwayFromZero { step } | MapKind::QuantizeFloor { step } => *step,
            _ => 1.0,
        }
    }
}

/// A map `R^dim -> R^dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct NonlinearMap {
    dim: usize,
    kind: MapKind,
}

impl NonlinearMap {
    pub fn new(dim: usize, kind: MapKind) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Empty("map"));
        }
        kind.validate()?;
        if let MapKind::Custom(c) = &kind {
            if c.len() != dim {
                return Err(Error::DimensionMismatch {
                    context: "custom map components",
                    expected: dim,
                    actual: c.len(),
                });
            }
        }
        Ok(Self { dim, kind })
    }

    /// Map with one component function per output entry.
    pub fn custom(components: Vec<ComponentFn>, elementwise: bool) -> Result<Self> {
        let dim = components.len();
        Self::new(dim, MapKind::Custom(CustomMap::new(components, elementwise)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        Self::new(dim, self.kind.clone())
    }

    pub fn is_elementwise(&self) -> bool {
        self.kind.is_elementwise()
    }

    /// Zero test for an output value of this map.
    pub fn is_zero_output(&self, v: f64) -> bool {
        if self.kind.exact_zero() {
            v == 0.0
        } else {
            v.abs() <= ANALYTIC_ZERO_TOL
        }
    }

    pub fn is_zero_output_vector(&self, fz: &DenseVector) -> bool {
        fz.iter().all(|&v| self.is_zero_output(v))
    }

    pub fn check_domain(&self, z: &DenseVector) -> Result<()> {
        if z.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                context: "map input",
                expected: self.dim,
                actual: z.dim(),
            });
        }
        if matches!(self.kind, MapKind::Sine) {
            if let Some((index, &value)) = z.iter().enumerate().find(|(_, v)| v.abs() >= PI) {
                return Err(Error::Domain { index, value });
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, z: &DenseVector) -> Result<DenseVector> {
        self.check_domain(z)?;
        self.evaluate_unguarded(z)
    }

    /// Evaluation without the sine domain restriction (dimension still
    /// checked). Lets callers probe the closed interval `[-pi, pi]`.
    pub fn evaluate_unguarded(&self, z: &DenseVector) -> Result<DenseVector> {
        if z.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                context: "map input",
                expected: self.dim,
                actual: z.dim(),
            });
        }
        let x = z.as_slice();
        let out: Vec<f64> = match &self.kind {
            MapKind::Identity => x.to_vec(),
            MapKind::AbsValue => x.iter().map(|v| v.abs()).collect(),
            MapKind::Sign => x.iter().map(|&v| sign(v)).collect(),
            MapKind::QuantizeAwayFromZero { step } => x
                .iter()
                .map(|&v| sign(v) * step * (v.abs() / step).ceil())
                .collect(),
            MapKind::QuantizeFloor { step } => {
                x.iter().map(|&v| step * (v / step).floor()).collect()
            }
            MapKind::Sine => x.iter().map(|v| v.sin()).collect(),
            MapKind::Square => x.iter().map(|v| v * v).collect(),
            MapKind::NonzeroRandom { seed } => nonzero_random(*seed, x),
            MapKind::Custom(c) => c.components.iter().map(|f| f(x)).collect(),
        };
        DenseVector::new(out)
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn nonzero_random(seed: Seed, x: &[f64]) -> Vec<f64> {
    if x.iter().all(|&v| v == 0.0) {
        return vec![0.0; x.len()];
    }
    // Key the stream on the point itself so the map is a function of z.
    let key = x.iter().fold(seed.0, |h, &v| {
        let bits = if v == 0.0 { 0u64 } else { v.to_bits() };
        crate::matrix::random_splitmix(h ^ bits)
    });
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    (0..x.len())
        .map(|_| crate::matrix::random_nonzero_normal(&mut rng, NONZERO_RANDOM_FLOOR))
        .collect()
}

/// Outcome of testing one linearization requirement.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RequirementCheck {
    pub linearization_type: LinearizationType,
    pub holds: bool,
    /// Input at which the requirement failed.
    pub witness: Option<DenseVector>,
}

/// Index of the first `i` where exactly one of `f_i(z)`, `z_i` is zero.
pub(crate) fn first_zero_mismatch(
    map: &NonlinearMap,
    z: &DenseVector,
    fz: &DenseVector,
) -> Option<usize> {
    z.iter()
        .zip(fz.iter())
        .position(|(&zi, &fi)| (zi == 0.0) != map.is_zero_output(fi))
}

/// The requirement predicate for linearization type `ty`, given `z` and a
/// precomputed `F(z)`.
pub fn requirement_holds(
    map: &NonlinearMap,
    ty: LinearizationType,
    z: &DenseVector,
    fz: &DenseVector,
) -> bool {
    let z_zero = z.is_zero();
    let f_zero = map.is_zero_output_vector(fz);
    match ty {
        LinearizationType::General => !z_zero || f_zero,
        LinearizationType::Invertible => z_zero == f_zero,
        LinearizationType::Diagonal => first_zero_mismatch(map, z, fz).is_none(),
        LinearizationType::PermutedDiagonal => {
            let z_zeros = z.iter().filter(|&&v| v == 0.0).count();
            let f_zeros = fz.iter().filter(|&&v| map.is_zero_output(v)).count();
            z_zeros == f_zeros
        }
    }
}

pub fn check_requirement(
    map: &NonlinearMap,
    ty: LinearizationType,
    z: &DenseVector,
) -> Result<RequirementCheck> {
    let fz = map.evaluate(z)?;
    Ok(check_with_value(map, ty, z, &fz))
}

/// Same as [`check_requirement`] but evaluates `F` without the sine domain
/// guard.
pub fn check_requirement_unguarded(
    map: &NonlinearMap,
    ty: LinearizationType,
    z: &DenseVector,
) -> Result<RequirementCheck> {
    let fz = map.evaluate_unguarded(z)?;
    Ok(check_with_value(map, ty, z, &fz))
}

fn check_with_value(
    map: &NonlinearMap,
    ty: LinearizationType,
    z: &DenseVector,
    fz: &DenseVector,
) -> RequirementCheck {
    let holds = requirement_holds(map, ty, z, fz);
    RequirementCheck {
        linearization_type: ty,
        holds,
        witness: (!holds).then(|| z.clone()),
    }
}

/// Random points of the map's domain. The first is always `0`; the rest
/// cycle through dense points, points with planted zeros, sparse points with
/// sub-step entries, and fully sub-step points.
pub fn sample_domain(map: &NonlinearMap, samples: usize, seed: Seed) -> Vec<DenseVector> {
    let mut rng = seed.rng();
    let n = map.dim();
    let s = map.kind.sub_step();
    let is_sine = matches!(map.kind, MapKind::Sine);

    let dense = |rng: &mut ChaCha8Rng| -> f64 {
        if is_sine {
            loop {
                let v: f64 = rng.random_range(-PI..PI);
                if v.abs() < PI && v != 0.0 {
                    return v;
                }
            }
        }
        crate::matrix::random_nonzero_normal(rng, 1e-9)
    };
    let sub_step = |rng: &mut ChaCha8Rng| -> f64 {
        loop {
            let v: f64 = rng.random_range(0.0..s);
            if v > 0.0 {
                return v;
            }
        }
    };
    let plant_zeros = |rng: &mut ChaCha8Rng, x: &mut [f64]| {
        let zeros = if n >= 2 { rng.random_range(1..n) } else { 1 };
        for i in rand::seq::index::sample(rng, n, zeros) {
            x[i] = 0.0;
        }
    };

    (0..samples)
        .map(|i| {
            let mut x = vec![0.0; n];
            if i > 0 {
                match (i - 1) % 4 {
                    0 => x.iter_mut().for_each(|v| *v = dense(&mut rng)),
                    1 => {
                        x.iter_mut().for_each(|v| *v = dense(&mut rng));
                        plant_zeros(&mut rng, &mut x);
                    }
                    2 => {
                        x.iter_mut().for_each(|v| *v = sub_step(&mut rng));
                        plant_zeros(&mut rng, &mut x);
                    }
                    _ => x.iter_mut().for_each(|v| *v = sub_step(&mut rng)),
                }
            }
            DenseVector::from_vec_unchecked(x)
        })
        .collect()
}

/// Checks the requirement at `samples` domain points; the first failure is
/// returned as witness.
pub fn check_requirement_sampled(
    map: &NonlinearMap,
    ty: LinearizationType,
    samples: usize,
    seed: Seed,
) -> Result<RequirementCheck> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    for z in sample_domain(map, samples, seed) {
        let check = check_requirement(map, ty, &z)?;
        if !check.holds {
            return Ok(check);
        }
    }
    Ok(RequirementCheck {
        linearization_type: ty,
        holds: true,
        witness: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DenseVector {
        DenseVector::new(x.to_vec()).unwrap()
    }

    fn map(dim: usize, kind: MapKind) -> NonlinearMap {
        NonlinearMap::new(dim, kind).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let abs = map(3, MapKind::AbsValue);
        assert_eq!(abs.evaluate(&v(&[1.0, -2.0, 0.0])).unwrap(), v(&[1.0, 2.0, 0.0]));
        let sgn = map(2, MapKind::Sign);
        assert_eq!(sgn.evaluate(&v(&[2.0, -3.0])).unwrap(), v(&[1.0, -1.0]));
        let afz = map(3, MapKind::QuantizeAwayFromZero { step: 0.5 });
        assert_eq!(afz.evaluate(&v(&[0.1, -0.7, 0.0])).unwrap(), v(&[0.5, -1.0, 0.0]));
        let floor = map(3, MapKind::QuantizeFloor { step: 1.0 });
        assert_eq!(floor.evaluate(&v(&[0.5, -0.5, 2.0])).unwrap(), v(&[0.0, -1.0, 2.0]));
        let sq = map(2, MapKind::Square);
        assert_eq!(sq.evaluate(&v(&[2.0, -3.0])).unwrap(), v(&[4.0, 9.0]));
    }

    #[test]
    fn nonzero_random_contract() {
        let f = map(5, MapKind::NonzeroRandom { seed: Seed(3) });
        assert!(f.evaluate(&DenseVector::zeros(5).unwrap()).unwrap().is_zero());
        let z = v(&[0.0, 1.0, 0.0, -2.0, 0.5]);
        let fz = f.evaluate(&z).unwrap();
        assert!(fz.iter().all(|x| x.abs() >= NONZERO_RANDOM_FLOOR));
        assert_eq!(fz, f.evaluate(&z).unwrap());
        // -0.0 and 0.0 are the same point
        let z_neg = v(&[-0.0, 1.0, 0.0, -2.0, 0.5]);
        assert_eq!(fz, f.evaluate(&z_neg).unwrap());
        let g = map(5, MapKind::NonzeroRandom { seed: Seed(4) });
        assert_ne!(fz, g.evaluate(&z).unwrap());
    }

    #[test]
    fn sine_domain_is_open() {
        let f = map(1, MapKind::Sine);
        assert!(matches!(f.evaluate(&v(&[PI])), Err(Error::Domain { index: 0, .. })));
        assert!(f.evaluate(&v(&[PI - 1e-9])).is_ok());
        assert!(f.evaluate_unguarded(&v(&[PI])).is_ok());
        assert!(matches!(
            f.evaluate(&v(&[0.0, 1.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn requirement_examples() {
        let abs = map(3, MapKind::AbsValue);
        let c = check_requirement(&abs, LinearizationType::Diagonal, &v(&[1.0, -2.0, 0.0])).unwrap();
        assert!(c.holds && c.witness.is_none());

        let floor = map(1, MapKind::QuantizeFloor { step: 1.0 });
        let c = check_requirement(&floor, LinearizationType::Diagonal, &v(&[0.5])).unwrap();
        assert!(!c.holds);
        assert_eq!(c.witness, Some(v(&[0.5])));

        let sine = map(1, MapKind::Sine);
        assert!(check_requirement(&sine, LinearizationType::Diagonal, &v(&[PI])).is_err());
        let c = check_requirement_unguarded(&sine, LinearizationType::Diagonal, &v(&[PI])).unwrap();
        assert!(!c.holds);

        let sq = map(4, MapKind::Square);
        for z in sample_domain(&sq, 50, Seed(9)) {
            assert!(check_requirement(&sq, LinearizationType::Diagonal, &z).unwrap().holds);
        }
    }

    #[test]
    fn requirement_type_semantics() {
        // F(0) != 0 breaks type 1.
        let shifted: Vec<ComponentFn> = vec![Arc::new(|x: &[f64]| x[0] + 1.0)];
        let f = NonlinearMap::custom(shifted, true).unwrap();
        let c = check_requirement(&f, LinearizationType::General, &v(&[0.0])).unwrap();
        assert!(!c.holds);
        // Zero count matches but positions differ: type 4 only.
        let swap: Vec<ComponentFn> = vec![Arc::new(|x: &[f64]| x[1]), Arc::new(|x: &[f64]| x[0])];
        let f = NonlinearMap::custom(swap, false).unwrap();
        let z = v(&[3.0, 0.0]);
        assert!(!check_requirement(&f, LinearizationType::Diagonal, &z).unwrap().holds);
        assert!(check_requirement(&f, LinearizationType::PermutedDiagonal, &z).unwrap().holds);
        assert!(check_requirement(&f, LinearizationType::Invertible, &z).unwrap().holds);
    }

    #[test]
    fn sampled_checks() {
        let abs = map(6, MapKind::AbsValue);
        assert!(check_requirement_sampled(&abs, LinearizationType::Diagonal, 100, Seed(1)).unwrap().holds);

        let floor = map(6, MapKind::QuantizeFloor { step: 1.0 });
        let c = check_requirement_sampled(&floor, LinearizationType::Diagonal, 100, Seed(1)).unwrap();
        assert!(!c.holds);
        let w = c.witness.unwrap();
        assert!(w.iter().any(|&x| x > 0.0 && x < 1.0));

        let rnd = map(6, MapKind::NonzeroRandom { seed: Seed(2) });
        assert!(check_requirement_sampled(&rnd, LinearizationType::Invertible, 100, Seed(1)).unwrap().holds);
        assert!(check_requirement_sampled(&abs, LinearizationType::Diagonal, 0, Seed(1)).is_err());
    }

    #[test]
    fn parse_specs() {
        assert_eq!(MapKind::parse("abs").unwrap(), MapKind::AbsValue);
        assert_eq!(
            MapKind::parse(r#"{"kind": "quantize_floor", "step": 0.25}"#).unwrap(),
            MapKind::QuantizeFloor { step: 0.25 }
        );
        assert_eq!(
            MapKind::parse("nonzero_random:9").unwrap(),
            MapKind::NonzeroRandom { seed: Seed(9) }
        );
        assert!(MapKind::parse("quantize_afz:-1").is_err());
        assert!(MapKind::parse("tanh").is_err());
        let json = serde_json::to_string(&MapKind::QuantizeAwayFromZero { step: 2.0 }).unwrap();
        assert_eq!(json, r#"{"kind":"quantize_afz","step":2.0}"#);
    }
}
