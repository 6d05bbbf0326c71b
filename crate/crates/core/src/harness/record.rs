use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circuit::BenchmarkKind;

use super::{HarnessError, Technique};

/// Simulated runs live under the `software` experiment type.
pub const EXPERIMENT_TYPE: &str = "software";

pub const CNOT_COUNTS: &str = "cnot_counts";
pub const NOISE_SCALED: &str = "noise_scaled_expectation_values";
pub const NOISY_VALUES: &str = "noisy_values";
pub const ONEQ_COUNTS: &str = "oneq_counts";
pub const TRUE_VALUES: &str = "true_values";
pub const MITIGATED_VALUES: &str = "mitigated_values";

/// Results of one experiment. Every matrix has one row per depth and one
/// column per (instance, trial) pair, column `instance * trials + trial`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub platform: String,
    pub technique: Technique,
    pub circuit: BenchmarkKind,
    pub n_qubits: usize,
    pub depths: Vec<usize>,
    /// Shot budget N of each estimate.
    pub shots: u64,
    pub true_values: Vec<Vec<f64>>,
    pub noisy_values: Vec<Vec<f64>>,
    pub mitigated_values: Vec<Vec<f64>>,
    /// ZNE only: per cell, one value per scale factor.
    pub noise_scaled_values: Option<Vec<Vec<Vec<f64>>>>,
    pub cnot_counts: Vec<Vec<u64>>,
    pub oneq_counts: Vec<Vec<u64>>,
}

impl ExperimentRecord {
    pub fn columns(&self) -> usize {
        self.true_values.first().map_or(0, Vec::len)
    }

    /// Shots spent on each mitigated value.
    pub fn mitigated_shots(&self) -> u64 {
        self.technique.mitigated_shots(self.shots)
    }

    /// `PLATFORM_QEM_CIRCUIT_QUBITS_MIN_MAX_SHOTS_TRIALS`.
    pub fn directory_name(&self) -> String {
        format!(
            "{}_{}_{}_{}_{}_{}_{}_{}",
            self.platform,
            self.technique.qem_dir(),
            self.circuit.name(),
            self.n_qubits,
            self.depths.first().copied().unwrap_or(0),
            self.depths.last().copied().unwrap_or(0),
            self.shots,
            self.columns()
        )
    }

    /// `TYPE/QEM/CIRCUIT/PLATFORM/<directory_name>` relative to a data root.
    pub fn relative_dir(&self) -> PathBuf {
        [EXPERIMENT_TYPE, self.technique.qem_dir(), self.circuit.name(), &self.platform]
            .iter()
            .collect::<PathBuf>()
            .join(self.directory_name())
    }

    pub fn file_name(&self, prefix: &str) -> String {
        format!("{prefix}_{}.csv", self.technique.variant())
    }

    /// Checks matrix shapes and the depth list.
    pub fn validate(&self) -> Result<(), String> {
        let rows = self.depths.len();
        if rows == 0 {
            return Err("no depths".into());
        }
        if self.depths.windows(2).any(|w| w[0] >= w[1]) {
            return Err(format!("depths not increasing: {:?}", self.depths));
        }
        if self.platform.is_empty() || self.platform.contains(['/', '\\']) {
            return Err(format!("bad platform name `{}`", self.platform));
        }
        let cols = self.columns();
        if cols == 0 {
            return Err("no value columns".into());
        }
        let shape = |name: &str, r: usize, c: Vec<usize>| {
            if r != rows || c.iter().any(|&x| x != cols) {
                Err(format!("{name} is not {rows} x {cols}"))
            } else {
                Ok(())
            }
        };
        let widths = |m: &Vec<Vec<f64>>| m.iter().map(Vec::len).collect();
        let count_widths = |m: &Vec<Vec<u64>>| m.iter().map(Vec::len).collect();
        shape(TRUE_VALUES, self.true_values.len(), widths(&self.true_values))?;
        shape(NOISY_VALUES, self.noisy_values.len(), widths(&self.noisy_values))?;
        shape(MITIGATED_VALUES, self.mitigated_values.len(), widths(&self.mitigated_values))?;
        shape(CNOT_COUNTS, self.cnot_counts.len(), count_widths(&self.cnot_counts))?;
        shape(ONEQ_COUNTS, self.oneq_counts.len(), count_widths(&self.oneq_counts))?;
        match (&self.noise_scaled_values, self.technique.is_zne()) {
            (Some(m), true) => {
                shape(NOISE_SCALED, m.len(), m.iter().map(Vec::len).collect())?;
                let k = m[0][0].len();
                if k == 0 || m.iter().flatten().any(|cell| cell.len() != k) {
                    return Err(format!("{NOISE_SCALED} cells have uneven widths"));
                }
            }
            (None, false) => {}
            (Some(_), false) => return Err(format!("{NOISE_SCALED} present for {}", self.technique)),
            (None, true) => return Err(format!("{NOISE_SCALED} missing for {}", self.technique)),
        }
        Ok(())
    }
}

fn evenly_spaced(depths: &[usize]) -> bool {
    depths.windows(3).all(|w| w[1] - w[0] == w[2] - w[1])
}

fn io_error(path: &Path, e: impl ToString) -> HarnessError {
    HarnessError::Io { path: path.to_path_buf(), message: e.to_string() }
}

fn format_error(path: &Path, message: impl Into<String>) -> HarnessError {
    HarnessError::Format { path: path.to_path_buf(), message: message.into() }
}

fn write_csv<T: ToString>(path: &Path, rows: impl Iterator<Item = Vec<T>>) -> Result<(), HarnessError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(|e| io_error(path, e))?;
    for row in rows {
        w.write_record(row.iter().map(ToString::to_string)).map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

fn read_csv<T: FromStr>(path: &Path) -> Result<Vec<Vec<T>>, HarnessError> {
    if !path.is_file() {
        return Err(format_error(path, "missing file"));
    }
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_path(path).map_err(|e| io_error(path, e))?;
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| format_error(path, e.to_string()))?;
        let row = rec
            .iter()
            .map(|f| f.trim().parse::<T>().map_err(|_| format_error(path, format!("row {}: bad value `{f}`", i + 1))))
            .collect::<Result<Vec<T>, _>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Writes the record's CSV files under `root` and returns their directory.
/// Files are named `<prefix>_<variant>.csv` so both ZNE extrapolators can
/// share one directory.
pub fn persist_record(record: &ExperimentRecord, root: impl AsRef<Path>) -> Result<PathBuf, HarnessError> {
    let dir = root.as_ref().join(record.relative_dir());
    record.validate().map_err(|m| format_error(&dir, m))?;
    if !evenly_spaced(&record.depths) {
        return Err(format_error(
            &dir,
            format!("depths {:?} are not evenly spaced and cannot be recovered from the layout", record.depths),
        ));
    }
    fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
    let file = |prefix| dir.join(record.file_name(prefix));
    write_csv(&file(CNOT_COUNTS), record.cnot_counts.iter().cloned())?;
    if let Some(scaled) = &record.noise_scaled_values {
        write_csv(&file(NOISE_SCALED), scaled.iter().map(|row| row.concat()))?;
    }
    write_csv(&file(NOISY_VALUES), record.noisy_values.iter().cloned())?;
    write_csv(&file(ONEQ_COUNTS), record.oneq_counts.iter().cloned())?;
    write_csv(&file(TRUE_VALUES), record.true_values.iter().cloned())?;
    write_csv(&file(MITIGATED_VALUES), record.mitigated_values.iter().cloned())?;
    Ok(dir)
}

struct DirName {
    platform: String,
    qem: String,
    circuit: BenchmarkKind,
    n_qubits: usize,
    min: usize,
    max: usize,
    shots: u64,
    columns: usize,
}

fn parse_dir_name(dir: &Path) -> Result<DirName, HarnessError> {
    let name = dir.file_name().and_then(|n| n.to_str()).ok_or_else(|| format_error(dir, "unreadable directory name"))?;
    let parts: Vec<&str> = name.rsplitn(8, '_').collect();
    let bad = || format_error(dir, "directory name is not PLATFORM_QEM_CIRCUIT_QUBITS_MIN_MAX_SHOTS_TRIALS");
    if parts.len() != 8 || parts[7].is_empty() {
        return Err(bad());
    }
    let num = |s: &str| s.parse::<u64>().map_err(|_| bad());
    Ok(DirName {
        platform: parts[7].to_string(),
        qem: parts[6].to_string(),
        circuit: parts[5].parse().map_err(|_| bad())?,
        n_qubits: num(parts[4])? as usize,
        min: num(parts[3])? as usize,
        max: num(parts[2])? as usize,
        shots: num(parts[1])?,
        columns: num(parts[0])? as usize,
    })
}

fn infer_depths(dir: &Path, min: usize, max: usize, rows: usize) -> Result<Vec<usize>, HarnessError> {
    match rows {
        0 => Err(format_error(dir, "no rows")),
        1 if min == max => Ok(vec![min]),
        r if r > 1 && max > min && (max - min).is_multiple_of(r - 1) => {
            let step = (max - min) / (r - 1);
            Ok((0..r).map(|i| min + i * step).collect())
        }
        r => Err(format_error(dir, format!("{r} rows do not fit depths {min}..={max}"))),
    }
}

/// Techniques with files in a persisted directory, in a fixed order.
pub fn variants_in(dir: impl AsRef<Path>) -> Result<Vec<Technique>, HarnessError> {
    let dir = dir.as_ref();
    let meta = parse_dir_name(dir)?;
    let entries = fs::read_dir(dir).map_err(|e| io_error(dir, e))?;
    let mut found = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| io_error(dir, e))?;
        let name = entry.file_name();
        let Some(variant) = name.to_str().and_then(|n| n.strip_prefix("noisy_values_")).and_then(|n| n.strip_suffix(".csv"))
        else {
            continue;
        };
        match Technique::from_layout(&meta.qem, variant) {
            Some(t) => found.push(t),
            None => return Err(format_error(dir, format!("unknown variant `{variant}` for QEM `{}`", meta.qem))),
        }
    }
    found.sort();
    Ok(found)
}

/// Loads one technique's record from a persisted directory.
pub fn load_record_variant(dir: impl AsRef<Path>, technique: Technique) -> Result<ExperimentRecord, HarnessError> {
    let dir = dir.as_ref();
    let meta = parse_dir_name(dir)?;
    if meta.qem != technique.qem_dir() {
        return Err(format_error(dir, format!("directory holds {} results, not {technique}", meta.qem)));
    }
    let file = |prefix: &str| dir.join(format!("{prefix}_{}.csv", technique.variant()));
    let true_values: Vec<Vec<f64>> = read_csv(&file(TRUE_VALUES))?;
    let depths = infer_depths(dir, meta.min, meta.max, true_values.len())?;
    let noise_scaled_values = if technique.is_zne() {
        let flat: Vec<Vec<f64>> = read_csv(&file(NOISE_SCALED))?;
        let mut rows = Vec::with_capacity(flat.len());
        for row in flat {
            if meta.columns == 0 || row.is_empty() || row.len() % meta.columns != 0 {
                return Err(format_error(&file(NOISE_SCALED), format!("row width {} does not split into {} cells", row.len(), meta.columns)));
            }
            let k = row.len() / meta.columns;
            rows.push(row.chunks(k).map(<[f64]>::to_vec).collect());
        }
        Some(rows)
    } else {
        if file(NOISE_SCALED).exists() {
            return Err(format_error(&file(NOISE_SCALED), format!("unexpected file for {technique}")));
        }
        None
    };
    let record = ExperimentRecord {
        platform: meta.platform,
        technique,
        circuit: meta.circuit,
        n_qubits: meta.n_qubits,
        depths,
        shots: meta.shots,
        true_values,
        noisy_values: read_csv(&file(NOISY_VALUES))?,
        mitigated_values: read_csv(&file(MITIGATED_VALUES))?,
        noise_scaled_values,
        cnot_counts: read_csv(&file(CNOT_COUNTS))?,
        oneq_counts: read_csv(&file(ONEQ_COUNTS))?,
    };
    record.validate().map_err(|m| format_error(dir, m))?;
    if record.columns() != meta.columns {
        return Err(format_error(dir, format!("name says {} columns, files have {}", meta.columns, record.columns())));
    }
    Ok(record)
}

/// Loads every technique found in a persisted directory.
pub fn load_records(dir: impl AsRef<Path>) -> Result<Vec<ExperimentRecord>, HarnessError> {
    let dir = dir.as_ref();
    let variants = variants_in(dir)?;
    if variants.is_empty() {
        return Err(format_error(dir, "no result files"));
    }
    variants.into_iter().map(|t| load_record_variant(dir, t)).collect()
}

/// Loads the single record of a persisted directory.
pub fn load_record(dir: impl AsRef<Path>) -> Result<ExperimentRecord, HarnessError> {
    let dir = dir.as_ref();
    let mut records = load_records(dir)?;
    if records.len() > 1 {
        let names: Vec<&str> = records.iter().map(|r| r.technique.name()).collect();
        return Err(format_error(dir, format!("several techniques present ({}); load one by name", names.join(", "))));
    }
    Ok(records.remove(0))
}
