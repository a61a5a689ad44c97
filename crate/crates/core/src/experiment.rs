//! Batch recovery trials over random Gaussian sensing matrices and sparse
//! signals, with CSV/JSON report emission.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::linearize::{Composition, LinearizationType};
use crate::maps::{MapKind, NonlinearMap};
use crate::matrix::{gaussian_matrix, random_sparse_signal, DenseVector, Seed};
use crate::recovery::{
    certificate_type, recover_via_linearization, Method, PipelineOptions, SolverStatus,
};

/// Relative error below which a trial counts as a success.
pub const SUCCESS_THRESHOLD: f64 = 1e-3;

/// Largest entry magnitude of signals fed to the sine map, inside its
/// `(−π, π)` domain.
pub const SINE_AMPLITUDE: f64 = 3.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    /// Either a short spec string (`"abs"`, `"quantize_afz:0.5"`) or an
    /// object (`{"kind": "abs"}`).
    #[serde(deserialize_with = "map_spec")]
    pub map: MapKind,
    pub composition: Composition,
    pub trials: usize,
    pub seed: Seed,
    pub method: Method,
    pub output_dir: Option<PathBuf>,
}

fn map_spec<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<MapKind, D::Error> {
    let value = serde_json::Value::deserialize(d)?;
    let text = match value {
        serde_json::Value::String(s) => s,
        other => other.to_string(),
    };
    MapKind::parse(&text).map_err(serde::de::Error::custom)
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            m: 64,
            n: 128,
            k: 10,
            map: MapKind::Identity,
            composition: Composition::Pre,
            trials: 100,
            seed: Seed(0),
            method: Method::L1,
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    /// 160 x 512 with 25-sparse signals; slow, not part of the automated
    /// checks.
    pub fn large_scale() -> Self {
        Self {
            m: 160,
            n: 512,
            k: 25,
            ..Self::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidArgument(msg));
        if self.m == 0 || self.n == 0 {
            return fail(format!("m and n must be positive, got m = {}, n = {}", self.m, self.n));
        }
        if self.k > self.n || self.m > self.n {
            return fail(format!(
                "need k <= n and m <= n, got m = {}, n = {}, k = {}",
                self.m, self.n, self.k
            ));
        }
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        self.map.validate()
    }

    /// The configured map sized for the composition.
    pub fn nonlinear_map(&self) -> Result<NonlinearMap> {
        let dim = match self.composition {
            Composition::Pre => self.m,
            Composition::Post => self.n,
        };
        NonlinearMap::new(dim, self.map.clone())
    }

    fn rescales_signal(&self) -> bool {
        matches!(self.map, MapKind::Sine) && self.composition == Composition::Post
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub rel_error: f64,
    pub support_exact: bool,
    pub solver_status: SolverStatus,
    pub certificate_type: LinearizationType,
    pub delta_2k: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub success_rate: f64,
    pub median_rel_error: f64,
    pub trials: usize,
    pub successes: usize,
    /// Wall-clock mean per trial. Left out of the JSON so that reruns
    /// produce identical files.
    #[serde(skip)]
    pub mean_runtime_ms: f64,
}

/// True and recovered signal of one trial.
#[derive(Clone, Debug, PartialEq)]
pub struct SignalPair {
    pub truth: DenseVector,
    pub recovered: DenseVector,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub records: Vec<TrialRecord>,
    pub signals: Vec<SignalPair>,
    pub summary: Summary,
}

/// Seeds of trial `index`: one stream for the sensing matrix, one for the
/// signal. Independent of the map, so different maps see the same `A, x`.
pub fn trial_seeds(config_seed: Seed, index: usize) -> (Seed, Seed) {
    let trial = config_seed.derive(index as u64);
    (trial.derive(0), trial.derive(1))
}

struct Trial {
    record: TrialRecord,
    signal: SignalPair,
    runtime_ms: f64,
}

fn run_trial(
    config: &ExperimentConfig,
    map: &NonlinearMap,
    opts: &PipelineOptions,
    ty: LinearizationType,
    index: usize,
) -> Result<Trial> {
    let clock = Clock::start();
    let (a_seed, x_seed) = trial_seeds(config.seed, index);
    let a = gaussian_matrix(config.m, config.n, a_seed)?;
    let mut x = if config.k == 0 {
        DenseVector::zeros(config.n)?
    } else {
        random_sparse_signal(config.n, config.k, x_seed)?
    };
    if config.rescales_signal() && !x.is_zero() {
        x = x.scale(SINE_AMPLITUDE / x.norm_inf());
    }
    let (record, recovered) = match recover_via_linearization(&a, map, config.composition, &x, opts) {
        Ok(out) => {
            let r = out.report;
            let record = TrialRecord {
                trial_index: index,
                rel_error: r.rel_error.unwrap_or(0.0),
                support_exact: r.support_exact.unwrap_or(false),
                solver_status: r.solver_status,
                certificate_type: out.certificate.linearization_type(),
                delta_2k: out.rip.map(|rip| rip.delta),
            };
            (record, r.x_hat)
        }
        // A trial whose solver finds nothing counts as recovering zero.
        Err(e) if e.is_solver_failure() => {
            let record = TrialRecord {
                trial_index: index,
                rel_error: if x.is_zero() { 0.0 } else { 1.0 },
                support_exact: x.is_zero(),
                solver_status: SolverStatus::Infeasible,
                certificate_type: ty,
                delta_2k: None,
            };
            (record, DenseVector::zeros(config.n)?)
        }
        Err(e) => return Err(e),
    };
    Ok(Trial {
        record,
        signal: SignalPair {
            truth: x,
            recovered,
        },
        runtime_ms: clock.elapsed_ms(),
    })
}

/// Runs `config.trials` independent trials; results are ordered by trial
/// index whatever the scheduling.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let map = config.nonlinear_map()?;
    let mut opts = PipelineOptions::with_method(config.method);
    let ty = certificate_type(&map, config.composition, &opts)?;
    opts.certificate = Some(ty);

    let run = |i: usize| run_trial(config, &map, &opts, ty, i);
    #[cfg(feature = "parallel")]
    let trials: Vec<Result<Trial>> = {
        use rayon::prelude::*;
        (0..config.trials).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let trials: Vec<Result<Trial>> = (0..config.trials).map(run).collect();
    let trials = trials.into_iter().collect::<Result<Vec<_>>>()?;

    let errors: Vec<f64> = trials.iter().map(|t| t.record.rel_error).collect();
    let successes = errors.iter().filter(|&&e| e < SUCCESS_THRESHOLD).count();
    let summary = Summary {
        success_rate: successes as f64 / trials.len() as f64,
        median_rel_error: median(&errors),
        trials: trials.len(),
        successes,
        mean_runtime_ms: trials.iter().map(|t| t.runtime_ms).sum::<f64>() / trials.len() as f64,
    };
    let (records, signals) = trials.into_iter().map(|t| (t.record, t.signal)).unzip();
    Ok(ExperimentResult {
        records,
        signals,
        summary,
    })
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

/// Writes `trials.csv`, `summary.json` and one `signal_<i>.csv` per trial.
pub fn emit_reports(result: &ExperimentResult, dir: impl AsRef<Path>) -> Result<()> {
    if result.records.is_empty() {
        return Err(Error::Empty("trial records"));
    }
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;

    let mut w = csv::Writer::from_path(dir.join("trials.csv"))?;
    for record in &result.records {
        w.serialize(record)?;
    }
    w.flush()?;

    let mut json = serde_json::to_string_pretty(&result.summary)?;
    json.push('\n');
    fs::write(dir.join("summary.json"), json)?;

    for (i, pair) in result.signals.iter().enumerate() {
        let mut w = csv::Writer::from_path(dir.join(format!("signal_{i}.csv")))?;
        w.write_record(["index", "true_value", "recovered_value"])?;
        for (j, (t, r)) in pair.truth.iter().zip(pair.recovered.iter()).enumerate() {
            w.serialize((j, t, r))?;
        }
        w.flush()?;
    }
    Ok(())
}

/// Wall clock that degrades to zero where no clock is available (wasm).
struct Clock {
    #[cfg(not(target_arch = "wasm32"))]
    start: std::time::Instant,
}

impl Clock {
    fn start() -> Self {
        Self {
            #[cfg(not(target_arch = "wasm32"))]
            start: std::time::Instant::now(),
        }
    }

    fn elapsed_ms(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        return self.start.elapsed().as_secs_f64() * 1e3;
        #[cfg(target_arch = "wasm32")]
        return 0.0;
    }
}
