//! Browser bindings. Every entry point returns a JSON string; failures come
//! back as `{"error": "..."}` so the page needs no exception handling and
//! the functions can be tested natively.

use nlcs_core::experiment::{run_experiment, ExperimentConfig};
use nlcs_core::linearize::{linearize, FreeEntry, LinearizationType};
use nlcs_core::maps::{MapKind, NonlinearMap};
use nlcs_core::matrix::{parse_matrix_csv, parse_vector_csv, Seed};
use nlcs_core::properties::{rip_constants, spark};
use nlcs_core::recovery::Method;
use nlcs_core::Result;
use serde::Serialize;
use wasm_bindgen::prelude::wasm_bindgen;

/// Largest demo problem; keeps a single recovery well under a second.
pub const MAX_DEMO_N: usize = 256;

fn respond<T: Serialize>(result: Result<T>) -> String {
    match result {
        Ok(value) => serde_json::to_string(&value).expect("demo types serialize"),
        Err(e) => serde_json::json!({ "error": e.to_string() }).to_string(),
    }
}

#[derive(Serialize)]
struct RecoveryView {
    truth: Vec<f64>,
    recovered: Vec<f64>,
    rel_error: f64,
    support_exact: bool,
    solver_status: String,
    certificate_type: u8,
    delta_2k: Option<f64>,
}

/// One random trial: Gaussian `m x n` sensing matrix, `k`-sparse signal,
/// measurements through `map`, recovery by `method` ("l1" or "l0").
#[wasm_bindgen]
pub fn recover_demo(
    m: usize,
    n: usize,
    k: usize,
    map: &str,
    composition: &str,
    method: &str,
    seed: u32,
) -> String {
    respond((|| {
        if n > MAX_DEMO_N {
            return Err(nlcs_core::Error::InvalidArgument(format!(
                "n = {n} exceeds the demo limit {MAX_DEMO_N}"
            )));
        }
        let config = ExperimentConfig {
            m,
            n,
            k,
            map: MapKind::parse(map)?,
            composition: composition.parse()?,
            trials: 1,
            seed: Seed(u64::from(seed)),
            method: method.parse::<Method>()?,
            output_dir: None,
        };
        let mut result = run_experiment(&config)?;
        let record = result.records.remove(0);
        let signal = result.signals.remove(0);
        Ok(RecoveryView {
            truth: signal.truth.into_vec(),
            recovered: signal.recovered.into_vec(),
            rel_error: record.rel_error,
            support_exact: record.support_exact,
            solver_status: record.solver_status.to_string(),
            certificate_type: record.certificate_type.number(),
            delta_2k: record.delta_2k,
        })
    })())
}

#[derive(Serialize)]
struct CertificateView {
    #[serde(rename = "type")]
    ty: u8,
    /// Rows of `Y`.
    y: Vec<Vec<f64>>,
    z: Vec<f64>,
    fz: Vec<f64>,
    residual: f64,
}

/// Certificate of type `ty` (1 to 4) for `map` at the comma-separated point.
#[wasm_bindgen]
pub fn linearize_point(map: &str, point: &str, ty: u8) -> String {
    respond((|| {
        let z = parse_vector_csv(point)?;
        let map = NonlinearMap::new(z.dim(), MapKind::parse(map)?)?;
        let cert = linearize(&map, LinearizationType::try_from(ty)?, &z, FreeEntry::Unit)?;
        let y = cert.matrix();
        Ok(CertificateView {
            ty,
            y: (0..y.rows()).map(|i| y.row(i).to_vec()).collect(),
            z: z.into_vec(),
            fz: cert.value().as_slice().to_vec(),
            residual: cert.residual()?,
        })
    })())
}

#[derive(Serialize)]
struct PropertiesView {
    rows: usize,
    cols: usize,
    spark: usize,
    witness: Vec<usize>,
    /// `None` when some `k` columns are dependent.
    rip: Option<nlcs_core::properties::RipReport>,
    rip_error: Option<String>,
}

/// Spark and order-`k` restricted isometry bounds of a CSV matrix.
#[wasm_bindgen]
pub fn matrix_properties(matrix: &str, k: usize) -> String {
    respond((|| {
        let a = parse_matrix_csv(matrix)?;
        let s = spark(&a)?;
        let (rip, rip_error) = match rip_constants(&a, k) {
            Ok(r) => (Some(r), None),
            Err(e) if e.is_solver_failure() => (None, Some(e.to_string())),
            Err(e) => return Err(e),
        };
        Ok(PropertiesView {
            rows: a.rows(),
            cols: a.cols(),
            spark: s.spark,
            witness: s.witness,
            rip,
            rip_error,
        })
    })())
}
