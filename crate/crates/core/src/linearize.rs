//! Pointwise linearization: for a map `F` and a point `z`, build a matrix `Y`
//! with `F(z) = Y z` of one of four structural types.
//!
//! | type | structure of `Y`                       | requirement on `F` at `z`               |
//! |------|----------------------------------------|-----------------------------------------|
//! | 1    | any                                    | `z = 0` implies `F(z) = 0`              |
//! | 2    | invertible                             | `z = 0` iff `F(z) = 0`                  |
//! | 3    | invertible diagonal                    | `f_i(z) = 0` iff `z_i = 0` for every i  |
//! | 4    | permuted invertible diagonal (monomial)| `F(z)` and `z` have equally many zeros  |
//!
//! Every constructor returns a [`LinearizationCertificate`] that records
//! `F(z)` so it can be re-verified without evaluating `F` again.

use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::maps::{
    check_requirement_sampled, first_zero_mismatch, requirement_holds, NonlinearMap,
};
use crate::matrix::{rank, DenseMatrix, DenseVector, Seed, DEFAULT_RANK_TOL};

/// Relative residual bound every certificate must meet.
pub const CERTIFICATE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum LinearizationType {
    General = 1,
    Invertible = 2,
    Diagonal = 3,
    PermutedDiagonal = 4,
}

impl LinearizationType {
    pub const ALL: [LinearizationType; 4] = [
        LinearizationType::General,
        LinearizationType::Invertible,
        LinearizationType::Diagonal,
        LinearizationType::PermutedDiagonal,
    ];

    /// Strongest first: diagonal, permuted diagonal, invertible, general.
    pub const BY_STRENGTH: [LinearizationType; 4] = [
        LinearizationType::Diagonal,
        LinearizationType::PermutedDiagonal,
        LinearizationType::Invertible,
        LinearizationType::General,
    ];

    pub fn number(self) -> u8 {
        self as u8
    }

    /// Position in [`Self::BY_STRENGTH`]; lower is stronger.
    fn strength_rank(self) -> usize {
        match self {
            LinearizationType::Diagonal => 0,
            LinearizationType::PermutedDiagonal => 1,
            LinearizationType::Invertible => 2,
            LinearizationType::General => 3,
        }
    }

    /// Whether a certificate of this type is at least as strong as `other`
    /// (diagonal ⊂ monomial ⊂ invertible ⊂ general).
    pub fn implies(self, other: LinearizationType) -> bool {
        self.strength_rank() <= other.strength_rank()
    }

    pub fn is_invertible(self) -> bool {
        self != LinearizationType::General
    }
}

impl TryFrom<u8> for LinearizationType {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(LinearizationType::General),
            2 => Ok(LinearizationType::Invertible),
            3 => Ok(LinearizationType::Diagonal),
            4 => Ok(LinearizationType::PermutedDiagonal),
            _ => Err(Error::InvalidArgument(format!(
                "linearization type must be 1..4, got {v}"
            ))),
        }
    }
}

impl From<LinearizationType> for u8 {
    fn from(t: LinearizationType) -> u8 {
        t.number()
    }
}

impl fmt::Display for LinearizationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// How the nonlinearity is composed with the linear sensing map `A`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Composition {
    /// `F ∘ A`: measurements `F(Ax)`.
    Pre,
    /// `A ∘ F`: measurements `A F(x)`.
    Post,
}

impl Composition {
    pub fn name(self) -> &'static str {
        match self {
            Composition::Pre => "pre",
            Composition::Post => "post",
        }
    }

    /// Whether a map whose strongest pointwise type is `ty` keeps the spark,
    /// NSP order and RIP order of `A` under this composition.
    pub fn accepts(self, ty: LinearizationType) -> bool {
        match self {
            Composition::Pre => ty.is_invertible(),
            Composition::Post => matches!(
                ty,
                LinearizationType::Diagonal | LinearizationType::PermutedDiagonal
            ),
        }
    }
}

impl std::str::FromStr for Composition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "pre" => Ok(Composition::Pre),
            "post" => Ok(Composition::Post),
            other => Err(Error::Parse(format!(
                "composition must be \"pre\" or \"post\", got {other:?}"
            ))),
        }
    }
}

/// Value placed on diagonal (or monomial) positions where `z` has a zero and
/// any nonzero entry satisfies `F(z) = Y z`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum FreeEntry {
    #[default]
    Unit,
    /// Smallest magnitude among the determined entries (`f_i(z) / z_j`), or 1
    /// when there are none.
    SupportMin,
    Value(f64),
}

impl FreeEntry {
    fn resolve(self, determined: impl Iterator<Item = f64>) -> Result<f64> {
        match self {
            FreeEntry::Unit => Ok(1.0),
            FreeEntry::SupportMin => {
                let m = determined.fold(f64::INFINITY, |m, v| m.min(v.abs()));
                Ok(if m.is_finite() && m > 0.0 { m } else { 1.0 })
            }
            FreeEntry::Value(v) if v.is_finite() && v != 0.0 => Ok(v),
            FreeEntry::Value(v) => Err(Error::InvalidArgument(format!(
                "free diagonal value must be finite and nonzero, got {v}"
            ))),
        }
    }
}

/// A matrix `Y` of a declared type together with the anchor `z` and the
/// recorded value `F(z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearizationCertificate {
    ty: LinearizationType,
    y: DenseMatrix,
    z: DenseVector,
    fz: DenseVector,
}

impl LinearizationCertificate {
    /// Assembles a certificate from parts and checks it with [`Self::verify`].
    pub fn new(
        ty: LinearizationType,
        y: DenseMatrix,
        z: DenseVector,
        fz: DenseVector,
    ) -> Result<Self> {
        let cert = Self { ty, y, z, fz };
        cert.verify()?;
        Ok(cert)
    }

    pub fn linearization_type(&self) -> LinearizationType {
        self.ty
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.y
    }

    pub fn anchor(&self) -> &DenseVector {
        &self.z
    }

    pub fn value(&self) -> &DenseVector {
        &self.fz
    }

    pub fn dim(&self) -> usize {
        self.z.dim()
    }

    /// `‖Y z − F(z)‖_∞`.
    pub fn residual(&self) -> Result<f64> {
        Ok(self.y.mul_vec(&self.z)?.sub(&self.fz)?.norm_inf())
    }

    /// Residual bound and the structural contract of the declared type.
    pub fn verify(&self) -> Result<()> {
        let n = self.z.dim();
        if self.y.shape() != (n, n) || self.fz.dim() != n {
            return Err(Error::DimensionMismatch {
                context: "certificate",
                expected: n,
                actual: self.y.rows(),
            });
        }
        let res = self.residual()?;
        if res > CERTIFICATE_TOL * (1.0 + self.fz.norm_inf()) {
            return Err(Error::InvalidArgument(format!(
                "certificate residual {res:e} exceeds tolerance"
            )));
        }
        match self.ty {
            LinearizationType::General => {}
            LinearizationType::Invertible => {
                let r = rank(&self.y, DEFAULT_RANK_TOL)?;
                if r != n {
                    return Err(Error::NotInvertible { rank: r, size: n });
                }
            }
            LinearizationType::Diagonal => {
                if !self.y.is_diagonal() || (0..n).any(|i| self.y.get(i, i) == 0.0) {
                    return Err(Error::InvalidArgument(
                        "type-3 certificate is not an invertible diagonal matrix".into(),
                    ));
                }
            }
            LinearizationType::PermutedDiagonal => {
                if !self.y.is_monomial() {
                    return Err(Error::NotMonomial);
                }
            }
        }
        Ok(())
    }
}

impl Serialize for LinearizationCertificate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("LinearizationCertificate", 5)?;
        st.serialize_field("type", &self.ty)?;
        st.serialize_field("dim", &self.dim())?;
        st.serialize_field("Y", self.y.as_slice())?;
        st.serialize_field("z", &self.z)?;
        st.serialize_field("Fz", &self.fz)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for LinearizationCertificate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            #[serde(rename = "type")]
            ty: LinearizationType,
            dim: usize,
            #[serde(rename = "Y")]
            y: Vec<f64>,
            z: DenseVector,
            #[serde(rename = "Fz")]
            fz: DenseVector,
        }
        let raw = Raw::deserialize(d)?;
        let y = DenseMatrix::new(raw.dim, raw.dim, raw.y).map_err(serde::de::Error::custom)?;
        LinearizationCertificate::new(raw.ty, y, raw.z, raw.fz).map_err(serde::de::Error::custom)
    }
}

fn evaluate_checked(
    map: &NonlinearMap,
    ty: LinearizationType,
    z: &DenseVector,
) -> Result<DenseVector> {
    let fz = map.evaluate(z)?;
    if !requirement_holds(map, ty, z, &fz) {
        let index = match ty {
            LinearizationType::Diagonal => first_zero_mismatch(map, z, &fz),
            _ => None,
        };
        return Err(Error::Requirement { ty, index });
    }
    Ok(fz)
}

fn first_nonzero(v: &DenseVector, is_zero: impl Fn(f64) -> bool) -> Option<usize> {
    v.iter().position(|&x| !is_zero(x))
}

/// Type 1: row `i` of `Y` holds `f_i(z) / z_q` in column `q`, the first
/// nonzero position of `z`. `Y = 0` when `z = 0`.
pub fn linearize_general(map: &NonlinearMap, z: &DenseVector) -> Result<LinearizationCertificate> {
    let ty = LinearizationType::General;
    let fz = evaluate_checked(map, ty, z)?;
    let n = z.dim();
    let mut y = vec![0.0; n * n];
    if let Some(q) = first_nonzero(z, |x| x == 0.0) {
        for i in 0..n {
            y[i * n + q] = fz[i] / z[q];
        }
    }
    LinearizationCertificate::new(ty, DenseMatrix::new(n, n, y)?, z.clone(), fz)
}

/// Type 2: an invertible `Y` built from one pivot row `p` (`f_p(z) ≠ 0`) and
/// one pivot column `q` (`z_q ≠ 0`). A shared index is used for both when one
/// exists; otherwise `p` and `q` are the first nonzero positions of `F(z)` and
/// `z`. `Y = I` when `z = 0`.
pub fn linearize_invertible(
    map: &NonlinearMap,
    z: &DenseVector,
) -> Result<LinearizationCertificate> {
    let ty = LinearizationType::Invertible;
    let fz = evaluate_checked(map, ty, z)?;
    let n = z.dim();
    if z.is_zero() {
        return LinearizationCertificate::new(ty, DenseMatrix::identity(n)?, z.clone(), fz);
    }
    let f_nonzero = |i: usize| !map.is_zero_output(fz[i]);
    let common = (0..n).find(|&i| z[i] != 0.0 && f_nonzero(i));
    let (p, q) = match common {
        Some(i) => (i, i),
        None => {
            // Requirement 2 guarantees both exist.
            let p = (0..n).find(|&i| f_nonzero(i)).ok_or(Error::Requirement {
                ty,
                index: None,
            })?;
            let q = first_nonzero(z, |x| x == 0.0).ok_or(Error::Requirement { ty, index: None })?;
            (p, q)
        }
    };

    let mut y = vec![0.0; n * n];
    let zq = z[q];
    if p == q {
        y[p * n + p] = fz[p] / zq;
        for i in (0..n).filter(|&i| i != p) {
            y[i * n + i] = 1.0;
            y[i * n + p] = (fz[i] - z[i]) / zq;
        }
    } else {
        y[p * n + q] = fz[p] / zq;
        y[q * n + p] = 1.0;
        y[q * n + q] = (fz[q] - z[p]) / zq;
        for i in (0..n).filter(|&i| i != p && i != q) {
            y[i * n + i] = 1.0;
            y[i * n + q] = (fz[i] - z[i]) / zq;
        }
    }
    LinearizationCertificate::new(ty, DenseMatrix::new(n, n, y)?, z.clone(), fz)
}

/// Type 3 with unit free entries.
pub fn linearize_diagonal(map: &NonlinearMap, z: &DenseVector) -> Result<LinearizationCertificate> {
    linearize_diagonal_with(map, z, FreeEntry::Unit)
}

/// Type 3: `Y = diag(c)` with `c_i = f_i(z) / z_i` where `z_i ≠ 0`, and the
/// free value elsewhere.
pub fn linearize_diagonal_with(
    map: &NonlinearMap,
    z: &DenseVector,
    free: FreeEntry,
) -> Result<LinearizationCertificate> {
    let ty = LinearizationType::Diagonal;
    let fz = evaluate_checked(map, ty, z)?;
    let ratio = |i: usize| (z[i] != 0.0).then(|| fz[i] / z[i]);
    let fill = free.resolve((0..z.dim()).filter_map(ratio))?;
    let c: Vec<f64> = (0..z.dim()).map(|i| ratio(i).unwrap_or(fill)).collect();
    LinearizationCertificate::new(ty, DenseMatrix::diag(&c)?, z.clone(), fz)
}

/// Type 4 with unit free entries.
pub fn linearize_permuted_diagonal(
    map: &NonlinearMap,
    z: &DenseVector,
) -> Result<LinearizationCertificate> {
    linearize_permuted_diagonal_with(map, z, FreeEntry::Unit)
}

/// Type 4: a monomial `Y` with `y[i][σ(i)] = f_i(z) / z_σ(i)`.
///
/// σ pairs the ascending nonzero positions of `F(z)` with the ascending
/// nonzero positions of `z`, and likewise the zero positions. When the zero
/// patterns already agree σ is the identity and `Y` is the type-3 diagonal.
pub fn linearize_permuted_diagonal_with(
    map: &NonlinearMap,
    z: &DenseVector,
    free: FreeEntry,
) -> Result<LinearizationCertificate> {
    let ty = LinearizationType::PermutedDiagonal;
    let fz = evaluate_checked(map, ty, z)?;
    let n = z.dim();
    let sigma = pairing(map, z, &fz);
    let ratio = |i: usize| {
        let j = sigma[i];
        (z[j] != 0.0).then(|| fz[i] / z[j])
    };
    let fill = free.resolve((0..n).filter_map(ratio))?;
    let mut y = vec![0.0; n * n];
    for i in 0..n {
        y[i * n + sigma[i]] = ratio(i).unwrap_or(fill);
    }
    LinearizationCertificate::new(ty, DenseMatrix::new(n, n, y)?, z.clone(), fz)
}

/// Order-preserving bijection from output positions to input positions that
/// maps nonzeros to nonzeros and zeros to zeros. Assumes equal zero counts.
fn pairing(map: &NonlinearMap, z: &DenseVector, fz: &DenseVector) -> Vec<usize> {
    let n = z.dim();
    let (f_nz, f_zero): (Vec<usize>, Vec<usize>) =
        (0..n).partition(|&i| !map.is_zero_output(fz[i]));
    let (z_nz, z_zero): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| z[i] != 0.0);
    let mut sigma = vec![0; n];
    for (&i, &j) in f_nz.iter().zip(&z_nz).chain(f_zero.iter().zip(&z_zero)) {
        sigma[i] = j;
    }
    sigma
}

/// Builds the certificate of type `ty` at `z`.
pub fn linearize(
    map: &NonlinearMap,
    ty: LinearizationType,
    z: &DenseVector,
    free: FreeEntry,
) -> Result<LinearizationCertificate> {
    match ty {
        LinearizationType::General => linearize_general(map, z),
        LinearizationType::Invertible => linearize_invertible(map, z),
        LinearizationType::Diagonal => linearize_diagonal_with(map, z, free),
        LinearizationType::PermutedDiagonal => linearize_permuted_diagonal_with(map, z, free),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    /// Strongest type whose requirement held at every sampled point.
    pub best: Option<LinearizationType>,
    pub composition: Composition,
    /// Whether the map keeps the spark/NSP/RIP order of `A` under
    /// `composition`.
    pub qualifies: bool,
}

/// Strongest linearization type the map supports on sampled domain points.
pub fn classify(
    map: &NonlinearMap,
    composition: Composition,
    samples: usize,
    seed: Seed,
) -> Result<Classification> {
    let mut best = None;
    for ty in LinearizationType::BY_STRENGTH {
        if check_requirement_sampled(map, ty, samples, seed)?.holds {
            best = Some(ty);
            break;
        }
    }
    Ok(Classification {
        best,
        composition,
        qualifies: best.is_some_and(|t| composition.accepts(t)),
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::maps::{ComponentFn, MapKind};

    fn v(x: &[f64]) -> DenseVector {
        DenseVector::new(x.to_vec()).unwrap()
    }

    fn map(dim: usize, kind: MapKind) -> NonlinearMap {
        NonlinearMap::new(dim, kind).unwrap()
    }

    /// Map returning fixed values regardless of input, except 0 -> 0.
    fn table(values: &[f64]) -> NonlinearMap {
        let comps: Vec<ComponentFn> = values
            .iter()
            .map(|&c| {
                Arc::new(move |x: &[f64]| if x.iter().all(|&v| v == 0.0) { 0.0 } else { c })
                    as ComponentFn
            })
            .collect();
        NonlinearMap::custom(comps, false).unwrap()
    }

    #[test]
    fn general_examples() {
        let c = linearize_general(&map(2, MapKind::Square), &v(&[2.0, 3.0])).unwrap();
        assert_eq!(c.matrix().as_slice(), &[2.0, 0.0, 4.5, 0.0]);
        let c = linearize_general(&map(3, MapKind::Sign), &DenseVector::zeros(3).unwrap()).unwrap();
        assert!(c.matrix().as_slice().iter().all(|&x| x == 0.0));
        let c = linearize_general(&map(2, MapKind::AbsValue), &v(&[-1.0, 0.0])).unwrap();
        assert_eq!(c.matrix().as_slice(), &[-1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn general_rejects_nonzero_at_origin() {
        let shifted: Vec<ComponentFn> = vec![Arc::new(|x: &[f64]| x[0] + 1.0)];
        let f = NonlinearMap::custom(shifted, true).unwrap();
        assert!(matches!(
            linearize_general(&f, &v(&[0.0])),
            Err(Error::Requirement { ty: LinearizationType::General, .. })
        ));
    }

    #[test]
    fn invertible_pattern_with_distinct_pivots() {
        // z nonzero only at index 3, F(z) nonzero only at index 1: p = 1, q = 3
        // (0-based), the 5x5 layout with p = 2, q = 4 counted from one.
        let f = table(&[0.0, 2.0, 0.0, 0.0, 0.0]);
        let z = v(&[0.0, 0.0, 0.0, 1.5, 0.0]);
        let c = linearize_invertible(&f, &z).unwrap();
        let pattern = [
            (1, 1), (1, 4), (2, 4), (3, 3), (3, 4), (4, 2), (4, 4), (5, 4), (5, 5),
        ];
        let y = c.matrix();
        for i in 0..5 {
            for j in 0..5 {
                if !pattern.contains(&(i + 1, j + 1)) {
                    assert_eq!(y.get(i, j), 0.0, "entry ({i},{j}) outside pattern");
                }
            }
        }
        // Entries the construction fixes independently of F.
        for (i, j) in [(0, 0), (2, 2), (4, 4), (3, 1)] {
            assert_eq!(y.get(i, j), 1.0);
        }
        assert!((y.get(1, 3) - 2.0 / 1.5).abs() < 1e-15);
        assert_eq!(rank(y, DEFAULT_RANK_TOL).unwrap(), 5);
    }

    #[test]
    fn invertible_dense_pattern() {
        // Dense z and F(z) where only the pivots differ in zero-ness: choose
        // values so every pattern entry is nonzero.
        let f = table(&[1.0, 2.0, 3.0, 0.5, 4.0]);
        let z = v(&[0.0, 0.0, 0.0, 1.0, 0.0]);
        // Common index 3 exists (z_3 and f_3 nonzero), so p = q = 3.
        let c = linearize_invertible(&f, &z).unwrap();
        let y = c.matrix();
        assert!((y.get(3, 3) - 0.5).abs() < 1e-15);
        for i in [0, 1, 2, 4] {
            assert_eq!(y.get(i, i), 1.0);
            assert!((y.get(i, 3) - f.evaluate(&z).unwrap()[i]).abs() < 1e-15);
        }
        assert_eq!(rank(y, DEFAULT_RANK_TOL).unwrap(), 5);
    }

    #[test]
    fn invertible_edge_cases() {
        let f = map(3, MapKind::NonzeroRandom { seed: Seed(1) });
        let c = linearize_invertible(&f, &DenseVector::zeros(3).unwrap()).unwrap();
        assert_eq!(c.matrix(), &DenseMatrix::identity(3).unwrap());
        let c = linearize_invertible(&f, &v(&[0.0, -0.3, 2.0])).unwrap();
        assert_eq!(rank(c.matrix(), DEFAULT_RANK_TOL).unwrap(), 3);
        let floor = map(2, MapKind::QuantizeFloor { step: 1.0 });
        assert!(matches!(
            linearize_invertible(&floor, &v(&[0.5, 0.25])),
            Err(Error::Requirement { ty: LinearizationType::Invertible, .. })
        ));
    }

    #[test]
    fn diagonal_examples() {
        let c = linearize_diagonal(&map(3, MapKind::AbsValue), &v(&[1.0, -2.0, 0.0])).unwrap();
        assert_eq!(c.matrix(), &DenseMatrix::diag(&[1.0, -1.0, 1.0]).unwrap());
        let c = linearize_diagonal(&map(2, MapKind::Sign), &v(&[2.0, -3.0])).unwrap();
        assert_eq!(c.matrix(), &DenseMatrix::diag(&[0.5, 1.0 / 3.0]).unwrap());
        let c = linearize_diagonal(&map(2, MapKind::Square), &v(&[2.0, -3.0])).unwrap();
        assert_eq!(c.matrix(), &DenseMatrix::diag(&[2.0, -3.0]).unwrap());
    }

    #[test]
    fn diagonal_reports_violating_index() {
        let floor = map(3, MapKind::QuantizeFloor { step: 1.0 });
        assert_eq!(
            linearize_diagonal(&floor, &v(&[2.0, 0.5, 0.0])),
            Err(Error::Requirement {
                ty: LinearizationType::Diagonal,
                index: Some(1)
            })
        );
    }

    #[test]
    fn free_entry_policies() {
        let sq = map(3, MapKind::Square);
        let z = v(&[0.5, 0.0, -2.0]);
        let c = linearize_diagonal_with(&sq, &z, FreeEntry::SupportMin).unwrap();
        assert_eq!(c.matrix(), &DenseMatrix::diag(&[0.5, 0.5, -2.0]).unwrap());
        let c = linearize_diagonal_with(&sq, &z, FreeEntry::Value(-7.0)).unwrap();
        assert_eq!(c.matrix().get(1, 1), -7.0);
        assert!(linearize_diagonal_with(&sq, &z, FreeEntry::Value(0.0)).is_err());
        let c = linearize_diagonal_with(&sq, &DenseVector::zeros(3).unwrap(), FreeEntry::SupportMin)
            .unwrap();
        assert_eq!(c.matrix(), &DenseMatrix::identity(3).unwrap());
    }

    #[test]
    fn permuted_examples() {
        // Zero patterns agree: identity pairing, same as the diagonal.
        let abs = map(3, MapKind::AbsValue);
        let z = v(&[1.0, -2.0, 0.0]);
        assert_eq!(
            linearize_permuted_diagonal(&abs, &z).unwrap().matrix(),
            linearize_diagonal(&abs, &z).unwrap().matrix()
        );

        // F(z) = (0, 5) at z = (3, 0).
        let f = table(&[0.0, 5.0]);
        let c = linearize_permuted_diagonal(&f, &v(&[3.0, 0.0])).unwrap();
        assert_eq!(c.matrix().as_slice(), &[0.0, 1.0, 5.0 / 3.0, 0.0]);

        // Reversal with no zeros: order-preserving pairing is the identity.
        let rev: Vec<ComponentFn> = vec![Arc::new(|x: &[f64]| x[1]), Arc::new(|x: &[f64]| x[0])];
        let f = NonlinearMap::custom(rev, false).unwrap();
        let c = linearize_permuted_diagonal(&f, &v(&[1.0, 2.0])).unwrap();
        assert_eq!(c.matrix(), &DenseMatrix::diag(&[2.0, 0.5]).unwrap());

        let g = table(&[0.0, 0.0]);
        assert!(matches!(
            linearize_permuted_diagonal(&g, &v(&[3.0, 0.0])),
            Err(Error::Requirement { ty: LinearizationType::PermutedDiagonal, .. })
        ));
    }

    #[test]
    fn certificate_json_shape() {
        let c = linearize_diagonal(&map(2, MapKind::Sign), &v(&[2.0, -4.0])).unwrap();
        let json = serde_json::to_value(&c).unwrap();
        assert_eq!(json["type"], 3);
        assert_eq!(json["dim"], 2);
        assert_eq!(json["Y"], serde_json::json!([0.5, 0.0, 0.0, 0.25]));
        assert_eq!(json["z"], serde_json::json!([2.0, -4.0]));
        assert_eq!(json["Fz"], serde_json::json!([1.0, -1.0]));
        let back: LinearizationCertificate = serde_json::from_value(json).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn forged_certificate_is_rejected() {
        let y = DenseMatrix::diag(&[1.0, 1.0]).unwrap();
        let bad = LinearizationCertificate::new(
            LinearizationType::Diagonal,
            y,
            v(&[1.0, 2.0]),
            v(&[1.0, 3.0]),
        );
        assert!(bad.is_err());
    }

    #[test]
    fn classify_examples() {
        let seed = Seed(17);
        let abs = map(6, MapKind::AbsValue);
        for comp in [Composition::Pre, Composition::Post] {
            let c = classify(&abs, comp, 100, seed).unwrap();
            assert_eq!(c.best, Some(LinearizationType::Diagonal));
            assert!(c.qualifies);
        }
        let rnd = map(6, MapKind::NonzeroRandom { seed: Seed(3) });
        let pre = classify(&rnd, Composition::Pre, 100, seed).unwrap();
        assert_eq!(pre.best, Some(LinearizationType::Invertible));
        assert!(pre.qualifies);
        assert!(!classify(&rnd, Composition::Post, 100, seed).unwrap().qualifies);

        let floor = map(6, MapKind::QuantizeFloor { step: 1.0 });
        for comp in [Composition::Pre, Composition::Post] {
            let c = classify(&floor, comp, 100, seed).unwrap();
            assert_eq!(c.best, Some(LinearizationType::General));
            assert!(!c.qualifies);
        }
    }
}
