//! Experiment orchestration, persistence and reporting.

mod config;
mod record;
mod selftest;
mod summary;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::circuit::{
    gate_counts, generate_mirror_circuit, generate_rb_circuit, BenchmarkInstance, BenchmarkKind, CircuitError,
    Connectivity, DEFAULT_BARRIER_ANGLE,
};
use crate::engine::{EngineError, Executor, SimulatorExecutor};
use crate::metrics::MetricsError;
use crate::noise::{NoiseError, NoiseModel};
use crate::pec::{execute_pec, NoiseSource, PecConfig, PecError};
use crate::rng::StreamSeed;
use crate::zne::{execute_zne, Extrapolator, ZneConfig, ZneError};

pub use config::{ExperimentConfig, NoiseSpec, Technique, PEC_SAMPLES, ZNE_SCALE_FACTORS};
pub use record::{
    load_record, load_record_variant, load_records, persist_record, variants_in, ExperimentRecord, CNOT_COUNTS,
    EXPERIMENT_TYPE, MITIGATED_VALUES, NOISE_SCALED, NOISY_VALUES, ONEQ_COUNTS, TRUE_VALUES,
};
pub use selftest::{
    brute_force_one_norm, representation_deviation, richardson_nodal_residual, selftest, Check, PTM_PROBABILITIES,
};
pub use summary::{summarize, DepthSummary, Summary, SUMMARY_CSV_HEADER};

/// Failure inside one (depth, instance, trial) task.
#[derive(Debug, Error)]
pub enum TaskError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Zne(#[from] ZneError),
    #[error(transparent)]
    Pec(#[from] PecError),
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("noise model: {0}")]
    Noise(#[from] NoiseError),
    #[error("depth {depth}, circuit {instance}, trial {trial}: {source}")]
    Task {
        depth: usize,
        instance: usize,
        trial: usize,
        #[source]
        source: TaskError,
    },
    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Coarse error classes, used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Backend,
    Io,
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Config => 2,
            ErrorCategory::Backend => 3,
            ErrorCategory::Io => 4,
        }
    }
}

impl HarnessError {
    pub fn category(&self) -> ErrorCategory {
        match self {
            HarnessError::Config(_) | HarnessError::Noise(_) => ErrorCategory::Config,
            HarnessError::Task { .. } | HarnessError::Metrics(_) => ErrorCategory::Backend,
            HarnessError::Io { .. } | HarnessError::Format { .. } => ErrorCategory::Io,
        }
    }
}

struct Cell {
    noisy: f64,
    mitigated: f64,
    scaled: Option<Vec<f64>>,
}

fn generate(config: &ExperimentConfig, depth: usize, seed: StreamSeed) -> Result<BenchmarkInstance, CircuitError> {
    let mut rng = seed.rng();
    match config.circuit {
        BenchmarkKind::Rb => generate_rb_circuit(config.n_qubits, depth, &mut rng),
        BenchmarkKind::Mirror => {
            generate_mirror_circuit(config.n_qubits, depth, &Connectivity::line(config.n_qubits), &mut rng)
        }
    }
}

fn run_cell(
    config: &ExperimentConfig,
    model: &NoiseModel,
    instance: &BenchmarkInstance,
    seed: StreamSeed,
) -> Result<Cell, TaskError> {
    let mut executor = SimulatorExecutor::new(config.backend, model.clone(), instance.target);
    executor.optimize = config.optimize;
    let noisy = executor.execute(&instance.circuit, config.shots, seed.derive(0))?.value;
    let zne = |extrapolator| -> Result<Cell, TaskError> {
        let zc = ZneConfig {
            scale_factors: ZNE_SCALE_FACTORS.to_vec(),
            extrapolator,
            shots: config.shots,
            barrier_angle: config.optimize.then_some(DEFAULT_BARRIER_ANGLE),
        };
        let out = execute_zne(&instance.circuit, &executor, &zc, seed.derive(1))?;
        Ok(Cell { noisy, mitigated: out.value, scaled: Some(out.estimates.iter().map(|e| e.value).collect()) })
    };
    match config.technique {
        Technique::None => Ok(Cell { noisy, mitigated: noisy, scaled: None }),
        Technique::ZneLinear => zne(Extrapolator::Linear),
        Technique::ZneRichardson => zne(Extrapolator::Richardson),
        Technique::Pec => {
            let pc = PecConfig { samples: PEC_SAMPLES, shots: config.shots, noise_source: NoiseSource::Matched };
            let out = execute_pec(&instance.circuit, &executor, model, &pc, seed.derive(1))?;
            Ok(Cell { noisy, mitigated: out.value, scaled: None })
        }
    }
}

/// Generates `instances` circuits per depth and estimates each `trials`
/// times, unmitigated and mitigated. Deterministic in `config.seed`
/// regardless of thread count.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentRecord, HarnessError> {
    config.validate()?;
    let model = config.noise.build(config.n_qubits)?;
    let platform = config.noise.platform()?;
    let master = StreamSeed::new(config.seed);
    let rows = config.depths.len();
    let cols = config.columns();

    let instances: Vec<(usize, usize, BenchmarkInstance)> = config
        .depths
        .par_iter()
        .enumerate()
        .flat_map_iter(|(row, &depth)| (0..config.instances).map(move |i| (row, depth, i)))
        .map(|(row, depth, i)| {
            let seed = master.derive_path(&[0, depth as u64, i as u64]);
            generate(config, depth, seed)
                .map(|inst| (row, i, inst))
                .map_err(|e| HarnessError::Task { depth, instance: i, trial: 0, source: e.into() })
        })
        .collect::<Result<_, _>>()?;

    let cells: Vec<(usize, usize, Cell)> = instances
        .par_iter()
        .flat_map_iter(|(row, i, inst)| (0..config.trials).map(move |t| (*row, *i, t, inst)))
        .map(|(row, i, t, inst)| {
            let depth = config.depths[row];
            log::debug!("depth {depth} circuit {i} trial {t}");
            let seed = master.derive_path(&[1, depth as u64, i as u64, t as u64]);
            run_cell(config, &model, inst, seed)
                .map(|cell| (row, i * config.trials + t, cell))
                .map_err(|source| HarnessError::Task { depth, instance: i, trial: t, source })
        })
        .collect::<Result<_, _>>()?;

    let mut record = ExperimentRecord {
        platform,
        technique: config.technique,
        circuit: config.circuit,
        n_qubits: config.n_qubits,
        depths: config.depths.clone(),
        shots: config.shots,
        true_values: vec![vec![1.0; cols]; rows],
        noisy_values: vec![vec![0.0; cols]; rows],
        mitigated_values: vec![vec![0.0; cols]; rows],
        noise_scaled_values: config.technique.is_zne().then(|| vec![vec![Vec::new(); cols]; rows]),
        cnot_counts: vec![vec![0; cols]; rows],
        oneq_counts: vec![vec![0; cols]; rows],
    };
    for (row, i, inst) in &instances {
        let counts = gate_counts(&inst.circuit);
        for t in 0..config.trials {
            record.cnot_counts[*row][i * config.trials + t] = counts.two_qubit as u64;
            record.oneq_counts[*row][i * config.trials + t] = counts.one_qubit as u64;
        }
    }
    for (row, col, cell) in cells {
        record.noisy_values[row][col] = cell.noisy;
        record.mitigated_values[row][col] = cell.mitigated;
        if let (Some(m), Some(s)) = (record.noise_scaled_values.as_mut(), cell.scaled) {
            m[row][col] = s;
        }
    }
    Ok(record)
}

/// Runs an experiment and persists it under `root`.
pub fn run_and_persist(config: &ExperimentConfig, root: impl AsRef<Path>) -> Result<(ExperimentRecord, PathBuf), HarnessError> {
    let record = run_experiment(config)?;
    let dir = persist_record(&record, root)?;
    Ok((record, dir))
}

/// Structural checks of a persisted directory beyond what loading enforces.
pub fn validate_dir(dir: impl AsRef<Path>) -> Result<Vec<ExperimentRecord>, HarnessError> {
    let dir = dir.as_ref();
    let records = load_records(dir)?;
    for r in &records {
        let bad = |m: String| Err(HarnessError::Format { path: dir.to_path_buf(), message: format!("{}: {m}", r.technique) });
        if r.true_values.iter().flatten().any(|&v| v != 1.0) {
            return bad("true values must all be 1".into());
        }
        let values = r.noisy_values.iter().chain(&r.mitigated_values).flatten();
        if let Some(v) = values.clone().find(|v| !v.is_finite()) {
            return bad(format!("non-finite value {v}"));
        }
        if r.noisy_values.iter().flatten().any(|v| !(0.0..=1.0).contains(v)) {
            return bad("unmitigated values must be probabilities".into());
        }
    }
    Ok(records)
}
