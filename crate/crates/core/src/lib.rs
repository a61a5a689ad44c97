//! Compressed sensing through nonlinear measurement maps, reduced to linear
//! problems by pointwise linearization.

// Dense kernels read more clearly with explicit indices.
#![allow(clippy::needless_range_loop)]

pub mod composite;
pub mod experiment;
pub mod error;
pub mod linearize;
pub mod maps;
pub mod matrix;
pub mod properties;
pub mod recovery;

pub use composite::{CompositeMap, Measurement};
pub use error::{Error, Result};
pub use linearize::{Composition, FreeEntry, LinearizationCertificate, LinearizationType};
pub use maps::{MapKind, NonlinearMap};
pub use matrix::{DenseMatrix, DenseVector, Seed};
pub use recovery::{LpSettings, Method, RecoveryReport, SolverStatus};
