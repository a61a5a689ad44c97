mod common;

use nlcs_core::linearize::{linearize, FreeEntry, LinearizationType};
use nlcs_core::maps::{check_requirement, MapKind, NonlinearMap};
use nlcs_core::matrix::{gaussian_matrix, DenseVector, Seed};
use nlcs_core::properties::spark;
use nlcs_core::Error;
use proptest::prelude::*;

fn kinds() -> Vec<MapKind> {
    vec![
        MapKind::Identity,
        MapKind::AbsValue,
        MapKind::Sign,
        MapKind::QuantizeAwayFromZero { step: 0.5 },
        MapKind::QuantizeFloor { step: 1.0 },
        MapKind::Sine,
        MapKind::Square,
        MapKind::NonzeroRandom { seed: Seed(42) },
    ]
}

/// Entries in (−3, 3) with planted zeros; small magnitudes are common so
/// quantizers see sub-step inputs.
fn point(max_dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(
        prop_oneof![
            2 => Just(0.0),
            3 => -3.0f64..3.0,
            2 => -0.99f64..0.99,
        ],
        1..=max_dim,
    )
}

fn sound(map: &NonlinearMap, ty: LinearizationType, z: &DenseVector) -> Result<(), TestCaseError> {
    let cert = linearize(map, ty, z, FreeEntry::Unit).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let y = cert.matrix();
    let fz = map.evaluate(z).unwrap();
    let res = common::certificate_residual(y, z, &fz);
    prop_assert!(res <= 1e-9 * (1.0 + fz.norm_inf()), "{ty}: residual {res}");
    match ty {
        LinearizationType::General => {}
        LinearizationType::Invertible => {
            prop_assert_eq!(common::rank_by_elimination(y, 1e-12), z.dim());
        }
        LinearizationType::Diagonal => prop_assert!(common::is_strict_diagonal(y)),
        LinearizationType::PermutedDiagonal => prop_assert!(common::is_monomial(y)),
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn certificates_sound_and_requirements_respected(kind in 0usize..8, z in point(7)) {
        let map = NonlinearMap::new(z.len(), kinds()[kind].clone()).unwrap();
        let z = DenseVector::new(z).unwrap();
        for ty in LinearizationType::ALL {
            let holds = check_requirement(&map, ty, &z).unwrap().holds;
            if holds {
                sound(&map, ty, &z)?;
            } else {
                let err = linearize(&map, ty, &z, FreeEntry::Unit).unwrap_err();
                let is_requirement_error = matches!(err, Error::Requirement { .. });
                prop_assert!(is_requirement_error);
            }
        }
    }

    #[test]
    fn implication_chain(kind in 0usize..8, z in point(7)) {
        let map = NonlinearMap::new(z.len(), kinds()[kind].clone()).unwrap();
        let z = DenseVector::new(z).unwrap();
        let holds = |ty| check_requirement(&map, ty, &z).unwrap().holds;
        use LinearizationType::*;
        if holds(Diagonal) { prop_assert!(holds(PermutedDiagonal)); }
        if holds(PermutedDiagonal) { prop_assert!(holds(Invertible)); }
        if holds(Invertible) { prop_assert!(holds(General)); }
    }

    #[test]
    fn downgrade_consistency(kind in 0usize..8, z in point(7)) {
        let map = NonlinearMap::new(z.len(), kinds()[kind].clone()).unwrap();
        let z = DenseVector::new(z).unwrap();
        if linearize(&map, LinearizationType::Diagonal, &z, FreeEntry::Unit).is_ok() {
            sound(&map, LinearizationType::PermutedDiagonal, &z)?;
            sound(&map, LinearizationType::Invertible, &z)?;
        }
    }

    #[test]
    fn type3_kinds_hold_everywhere(kind in 1usize..7, z in point(7)) {
        // Abs, sign, away-from-zero quantizer, sine, square (floor excluded).
        prop_assume!(kind != 4);
        let map = NonlinearMap::new(z.len(), kinds()[kind].clone()).unwrap();
        let z = DenseVector::new(z).unwrap();
        prop_assert!(check_requirement(&map, LinearizationType::Diagonal, &z).unwrap().holds);
    }

    #[test]
    fn elementwise_kinds_commute_with_permutation(kind in 0usize..7, z in point(7), rot in 0usize..7) {
        let map = NonlinearMap::new(z.len(), kinds()[kind].clone()).unwrap();
        prop_assert!(map.is_elementwise());
        let n = z.len();
        let perm: Vec<usize> = (0..n).map(|i| (i + rot) % n).collect();
        let zp = DenseVector::new(perm.iter().map(|&i| z[i]).collect()).unwrap();
        let fz = map.evaluate(&DenseVector::new(z).unwrap()).unwrap();
        let fzp = map.evaluate(&zp).unwrap();
        for (j, &i) in perm.iter().enumerate() {
            prop_assert_eq!(fzp[j].to_bits(), fz[i].to_bits());
        }
    }

    #[test]
    fn zero_preserved_except_floor(kind in 0usize..8, dim in 1usize..8) {
        let map = NonlinearMap::new(dim, kinds()[kind].clone()).unwrap();
        let f0 = map.evaluate(&DenseVector::zeros(dim).unwrap()).unwrap();
        if kind != 4 {
            prop_assert!(f0.is_zero());
        }
    }

    #[test]
    fn nonzero_random_is_deterministic(seed: u64, z in point(6)) {
        let map = NonlinearMap::new(z.len(), MapKind::NonzeroRandom { seed: Seed(seed) }).unwrap();
        let z = DenseVector::new(z).unwrap();
        let a = map.evaluate(&z).unwrap();
        let b = map.evaluate(&z).unwrap();
        prop_assert!(a.iter().zip(b.iter()).all(|(p, q)| p.to_bits() == q.to_bits()));
        prop_assert_eq!(a.is_zero(), z.is_zero());
        if !z.is_zero() {
            prop_assert!(a.iter().all(|&v| v != 0.0));
        }
    }

    #[test]
    fn certificates_preserve_spark(kind in 0usize..8, z in point(6), seed: u64) {
        let dim = z.len();
        let map = NonlinearMap::new(dim, kinds()[kind].clone()).unwrap();
        let z = DenseVector::new(z).unwrap();
        if let Ok(cert) = linearize(&map, LinearizationType::Invertible, &z, FreeEntry::Unit) {
            let a = gaussian_matrix(dim, dim + 3, Seed(seed)).unwrap();
            let ya = cert.matrix().matmul(&a).unwrap();
            prop_assert_eq!(spark(&ya).unwrap().spark, spark(&a).unwrap().spark);
        }
        if let Ok(cert) = linearize(&map, LinearizationType::PermutedDiagonal, &z, FreeEntry::Unit) {
            let a = gaussian_matrix(dim.saturating_sub(2).max(1), dim, Seed(seed ^ 1)).unwrap();
            let ay = a.matmul(cert.matrix()).unwrap();
            prop_assert_eq!(spark(&ay).unwrap().spark, spark(&a).unwrap().spark);
        }
    }
}
