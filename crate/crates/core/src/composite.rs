use crate::error::{Error, Result};
use crate::linearize::Composition;
use crate::maps::{MapKind, NonlinearMap};
use crate::matrix::{DenseMatrix, DenseVector};

/// Anything that turns a signal into measurements.
pub trait Measurement {
    fn measure(&self, x: &DenseVector) -> Result<DenseVector>;
}

impl<F> Measurement for F
where
    F: Fn(&DenseVector) -> Result<DenseVector>,
{
    fn measure(&self, x: &DenseVector) -> Result<DenseVector> {
        self(x)
    }
}

/// `Φ = F ∘ A` (pre) or `Φ = A ∘ F` (post).
#[derive(Clone, Debug)]
pub struct CompositeMap {
    a: DenseMatrix,
    map: NonlinearMap,
    composition: Composition,
}

impl CompositeMap {
    /// Sizes the map to `A`: `rows` for pre-composition, `cols` for post.
    pub fn new(a: DenseMatrix, kind: MapKind, composition: Composition) -> Result<Self> {
        let dim = match composition {
            Composition::Pre => a.rows(),
            Composition::Post => a.cols(),
        };
        let map = NonlinearMap::new(dim, kind)?;
        Self::from_map(a, map, composition)
    }

    pub fn from_map(a: DenseMatrix, map: NonlinearMap, composition: Composition) -> Result<Self> {
        let expected = match composition {
            Composition::Pre => a.rows(),
            Composition::Post => a.cols(),
        };
        if map.dim() != expected {
            return Err(Error::DimensionMismatch {
                context: "composite map dimension",
                expected,
                actual: map.dim(),
            });
        }
        Ok(Self { a, map, composition })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn map(&self) -> &NonlinearMap {
        &self.map
    }

    pub fn composition(&self) -> Composition {
        self.composition
    }

    pub fn input_dim(&self) -> usize {
        self.a.cols()
    }

    /// Point at which `F` is evaluated for signal `x`.
    pub fn anchor(&self, x: &DenseVector) -> Result<DenseVector> {
        match self.composition {
            Composition::Pre => self.a.mul_vec(x),
            Composition::Post => {
                if x.dim() != self.a.cols() {
                    return Err(Error::DimensionMismatch {
                        context: "signal dimension",
                        expected: self.a.cols(),
                        actual: x.dim(),
                    });
                }
                Ok(x.clone())
            }
        }
    }

    pub fn apply(&self, x: &DenseVector) -> Result<DenseVector> {
        match self.composition {
            Composition::Pre => self.map.evaluate(&self.a.mul_vec(x)?),
            Composition::Post => self.a.mul_vec(&self.map.evaluate(x)?),
        }
    }
}

impl Measurement for CompositeMap {
    fn measure(&self, x: &DenseVector) -> Result<DenseVector> {
        self.apply(x)
    }
}
