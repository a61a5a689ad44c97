use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{DenseMatrix, DenseVector};
use crate::error::{Error, Result};

/// Seed for every random draw in the crate.
///
/// Generators are ChaCha8 streams keyed by `seed_from_u64`; normal variates
/// come from `rand_distr::StandardNormal` (ziggurat). Same seed, same bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Seed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Independent child seed for sub-stream `stream`.
    pub fn derive(self, stream: u64) -> Seed {
        Seed(splitmix64(self.0 ^ splitmix64(stream.wrapping_add(0x9E37_79B9_7F4A_7C15))))
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Standard normal draw with magnitude at least `min_abs`.
pub(crate) fn nonzero_normal<R: Rng>(rng: &mut R, min_abs: f64) -> f64 {
    loop {
        let v: f64 = rng.sample(StandardNormal);
        if v.abs() >= min_abs {
            return v;
        }
    }
}

/// `rows x cols` matrix with i.i.d. `N(0, 1/rows)` entries, filled row-major.
pub fn gaussian_matrix(rows: usize, cols: usize, seed: Seed) -> Result<DenseMatrix> {
    if rows == 0 || cols == 0 {
        return Err(Error::Empty("matrix"));
    }
    let mut rng = seed.rng();
    let sd = 1.0 / (rows as f64).sqrt();
    let data = (0..rows * cols)
        .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
        .collect();
    DenseMatrix::new(rows, cols, data)
}

/// Exactly `k`-sparse vector with uniform random support and standard normal
/// values (magnitudes below 1e-6 are redrawn).
pub fn random_sparse_signal(n: usize, k: usize, seed: Seed) -> Result<DenseVector> {
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "sparsity k = {k} must satisfy 1 <= k <= n = {n}"
        )));
    }
    let mut rng = seed.rng();
    let mut support = index::sample(&mut rng, n, k).into_vec();
    support.sort_unstable();
    let mut data = vec![0.0; n];
    for i in support {
        data[i] = nonzero_normal(&mut rng, 1e-6);
    }
    DenseVector::new(data)
}
