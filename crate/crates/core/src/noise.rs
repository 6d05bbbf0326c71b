//! Noise models: stochastic Pauli channels after gates plus readout bit flips.
//!
//! Two families are provided. [`build_depolarizing_model`] puts a local
//! depolarizing channel `D_p ⊗ D_p` after every two-qubit gate and nothing
//! else. [`build_calibration_model`] derives inhomogeneous per-qubit and
//! per-edge channels from a device calibration table.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::engine::tableau::Pauli;

const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("probability {value} for {what} is outside [0, 1)")]
    InvalidProbability { what: String, value: f64 },
    #[error("two-qubit error rate {0} must lie in [0, 1)")]
    Domain(f64),
    #[error("depolarizing parameter {0} >= 3/4 gives a non-invertible channel")]
    NonInvertible(f64),
    #[error("incomplete calibration: no data for {0}")]
    IncompleteCalibration(String),
    #[error("{source_name}:{line}: {message}")]
    Parse { source_name: String, line: usize, message: String },
    #[error("reading {path}: {message}")]
    Io { path: String, message: String },
    #[error("circuit uses {circuit} qubits but the noise model covers {model}")]
    QubitCount { circuit: usize, model: usize },
}

/// Single-qubit stochastic Pauli channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliChannel {
    p_i: f64,
    p_x: f64,
    p_y: f64,
    p_z: f64,
}

impl PauliChannel {
    pub fn new(p_x: f64, p_y: f64, p_z: f64) -> Result<Self, NoiseError> {
        for (what, v) in [("p_X", p_x), ("p_Y", p_y), ("p_Z", p_z)] {
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                return Err(NoiseError::InvalidProbability { what: what.into(), value: v });
            }
        }
        let total = p_x + p_y + p_z;
        if total > 1.0 + NORMALIZATION_TOL {
            return Err(NoiseError::InvalidProbability { what: "total Pauli error".into(), value: total });
        }
        Ok(Self { p_i: (1.0 - total).max(0.0), p_x, p_y, p_z })
    }

    pub fn identity() -> Self {
        Self { p_i: 1.0, p_x: 0.0, p_y: 0.0, p_z: 0.0 }
    }

    /// `D_p(ρ) = (1 - p) ρ + p/3 (XρX + YρY + ZρZ)`.
    pub fn depolarizing(p: f64) -> Result<Self, NoiseError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(NoiseError::InvalidProbability { what: "depolarizing p".into(), value: p });
        }
        Self::new(p / 3.0, p / 3.0, p / 3.0)
    }

    pub fn probabilities(&self) -> [f64; 4] {
        [self.p_i, self.p_x, self.p_y, self.p_z]
    }

    pub fn error_probability(&self) -> f64 {
        self.p_x + self.p_y + self.p_z
    }

    pub fn is_identity(&self) -> bool {
        self.error_probability() == 0.0
    }

    /// `Some(p)` when the channel is local depolarizing.
    pub fn depolarizing_parameter(&self) -> Option<f64> {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-15;
        (close(self.p_x, self.p_y) && close(self.p_y, self.p_z)).then_some(self.error_probability())
    }

    /// Maps a uniform draw `u ∈ [0, 1)` to a Pauli.
    pub fn sample(&self, u: f64) -> Pauli {
        if u < self.p_x {
            Pauli::X
        } else if u < self.p_x + self.p_y {
            Pauli::Y
        } else if u < self.p_x + self.p_y + self.p_z {
            Pauli::Z
        } else {
            Pauli::I
        }
    }
}

/// Local depolarizing parameter `p` such that `1 - (1 - p)^2 = p_2q`.
pub fn local_depol_param(p_2q: f64) -> Result<f64, NoiseError> {
    if !(0.0..1.0).contains(&p_2q) {
        return Err(NoiseError::Domain(p_2q));
    }
    Ok(1.0 - (1.0 - p_2q).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
enum TwoQubitNoise {
    Uniform(f64),
    PerEdge(BTreeMap<(usize, usize), f64>),
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Per-gate Pauli noise and per-qubit readout flips over logical qubits
/// `0..n_qubits`. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    n_qubits: usize,
    after_1q: Vec<PauliChannel>,
    after_2q: TwoQubitNoise,
    readout_flip: Vec<f64>,
    labels: Vec<u32>,
}

impl NoiseModel {
    pub fn noiseless(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            after_1q: vec![PauliChannel::identity(); n_qubits],
            after_2q: TwoQubitNoise::Uniform(0.0),
            readout_flip: vec![0.0; n_qubits],
            labels: (0..n_qubits as u32).collect(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Physical label of logical qubit `q` (identity for synthetic models).
    pub fn label(&self, q: usize) -> u32 {
        self.labels[q]
    }

    pub fn one_qubit_channel(&self, q: usize) -> &PauliChannel {
        &self.after_1q[q]
    }

    pub fn readout_flip(&self, q: usize) -> f64 {
        self.readout_flip[q]
    }

    /// Local depolarizing parameter `p` of the channel after a two-qubit gate
    /// on `(a, b)`.
    pub fn two_qubit_param(&self, a: usize, b: usize) -> Result<f64, NoiseError> {
        match &self.after_2q {
            TwoQubitNoise::Uniform(p) => Ok(*p),
            TwoQubitNoise::PerEdge(map) => map.get(&edge_key(a, b)).copied().ok_or_else(|| {
                NoiseError::IncompleteCalibration(format!(
                    "edge {}-{}",
                    self.labels[a.min(b)],
                    self.labels[a.max(b)]
                ))
            }),
        }
    }

    pub fn two_qubit_channels(&self, a: usize, b: usize) -> Result<[PauliChannel; 2], NoiseError> {
        let ch = PauliChannel::depolarizing(self.two_qubit_param(a, b)?)?;
        Ok([ch, ch])
    }

    /// Mean two-qubit error rate `p_2q` over the model's edges.
    pub fn average_two_qubit_error_rate(&self) -> f64 {
        let rate = |p: f64| 1.0 - (1.0 - p) * (1.0 - p);
        match &self.after_2q {
            TwoQubitNoise::Uniform(p) => rate(*p),
            TwoQubitNoise::PerEdge(map) if map.is_empty() => 0.0,
            TwoQubitNoise::PerEdge(map) => map.values().map(|&p| rate(p)).sum::<f64>() / map.len() as f64,
        }
    }

    pub fn is_noiseless(&self) -> bool {
        let two_q_clean = match &self.after_2q {
            TwoQubitNoise::Uniform(p) => *p == 0.0,
            TwoQubitNoise::PerEdge(map) => map.values().all(|&p| p == 0.0),
        };
        two_q_clean
            && self.after_1q.iter().all(PauliChannel::is_identity)
            && self.readout_flip.iter().all(|&f| f == 0.0)
    }

    pub fn check_width(&self, n_qubits: usize) -> Result<(), NoiseError> {
        if n_qubits > self.n_qubits {
            return Err(NoiseError::QubitCount { circuit: n_qubits, model: self.n_qubits });
        }
        Ok(())
    }
}

/// Uniform local depolarizing noise `D_p ⊗ D_p` after every two-qubit gate;
/// single-qubit gates and readout are ideal.
pub fn build_depolarizing_model(p: f64, n_qubits: usize) -> Result<NoiseModel, NoiseError> {
    if !p.is_finite() || p < 0.0 {
        return Err(NoiseError::InvalidProbability { what: "depolarizing p".into(), value: p });
    }
    if p >= 0.75 {
        return Err(NoiseError::NonInvertible(p));
    }
    let mut model = NoiseModel::noiseless(n_qubits);
    model.after_2q = TwoQubitNoise::Uniform(p);
    Ok(model)
}

/// Noise model from calibration data. Logical qubit `i` is the `i`-th qubit
/// listed in the calibration.
pub fn build_calibration_model(cal: &CalibrationData) -> Result<NoiseModel, NoiseError> {
    let index: BTreeMap<u32, usize> =
        cal.qubits.iter().enumerate().map(|(i, q)| (q.label, i)).collect();
    let after_1q = cal
        .qubits
        .iter()
        .map(|q| PauliChannel::depolarizing(q.one_qubit_error))
        .collect::<Result<Vec<_>, _>>()?;
    let mut edges = BTreeMap::new();
    for e in &cal.edges {
        let lookup = |l: u32| {
            index
                .get(&l)
                .copied()
                .ok_or_else(|| NoiseError::IncompleteCalibration(format!("qubit {l}")))
        };
        let (a, b) = (lookup(e.a)?, lookup(e.b)?);
        edges.insert(edge_key(a, b), local_depol_param(e.cx_error)?);
    }
    Ok(NoiseModel {
        n_qubits: cal.qubits.len(),
        after_1q,
        after_2q: TwoQubitNoise::PerEdge(edges),
        readout_flip: cal.qubits.iter().map(|q| q.readout_error).collect(),
        labels: cal.qubits.iter().map(|q| q.label).collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct QubitCalibration {
    pub label: u32,
    /// Single-qubit gate error ε_1Q.
    pub one_qubit_error: f64,
    /// Readout assignment error ε_M.
    pub readout_error: f64,
    /// Per-qubit CNOT error as reported by the vendor, when the table lists one.
    pub reported_cx_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeCalibration {
    pub a: u32,
    pub b: u32,
    pub cx_error: f64,
}

/// Device error rates: per-qubit ε_1Q and ε_M, per-edge ε_CX.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationData {
    pub name: String,
    pub qubits: Vec<QubitCalibration>,
    pub edges: Vec<EdgeCalibration>,
}

const BUNDLED: [(&str, &str); 3] = [
    ("lima", include_str!("../data/lima.cal")),
    ("kolkata12", include_str!("../data/kolkata12.cal")),
    ("aspen_m2", include_str!("../data/aspen_m2.cal")),
];

impl CalibrationData {
    pub fn qubit(&self, label: u32) -> Option<&QubitCalibration> {
        self.qubits.iter().find(|q| q.label == label)
    }

    pub fn edge(&self, a: u32, b: u32) -> Option<&EdgeCalibration> {
        self.edges.iter().find(|e| (e.a, e.b) == (a, b) || (e.a, e.b) == (b, a))
    }

    /// Names of the calibration tables shipped with the crate.
    pub fn bundled_names() -> impl Iterator<Item = &'static str> {
        BUNDLED.iter().map(|(n, _)| *n)
    }

    pub fn bundled(name: &str) -> Option<CalibrationData> {
        BUNDLED
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(n, text)| parse_calibration(n, text).expect("bundled calibration parses"))
    }

    fn validate(&self) -> Result<(), String> {
        let mut seen = BTreeSet::new();
        for q in &self.qubits {
            if !seen.insert(q.label) {
                return Err(format!("duplicate qubit {}", q.label));
            }
        }
        let mut edges = BTreeSet::new();
        for e in &self.edges {
            for l in [e.a, e.b] {
                if !seen.contains(&l) {
                    return Err(format!("edge {}-{} references unknown qubit {l}", e.a, e.b));
                }
            }
            if !edges.insert((e.a.min(e.b), e.a.max(e.b))) {
                return Err(format!("duplicate edge {}-{}", e.a, e.b));
            }
        }
        Ok(())
    }
}

impl fmt::Display for CalibrationData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[qubits]")?;
        for q in &self.qubits {
            write!(f, "{} {} {}", q.label, q.one_qubit_error, q.readout_error)?;
            if let Some(cx) = q.reported_cx_error {
                write!(f, " {cx}")?;
            }
            writeln!(f)?;
        }
        writeln!(f, "[edges]")?;
        for e in &self.edges {
            writeln!(f, "{}-{} {}", e.a, e.b, e.cx_error)?;
        }
        Ok(())
    }
}

fn parse_probability(s: &str, what: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("bad {what} `{s}`: {e}"))?;
    if !(0.0..1.0).contains(&v) {
        return Err(format!("{what} {v} outside [0, 1)"));
    }
    Ok(v)
}

/// Parses the calibration text format:
///
/// ```text
/// [qubits]
/// # label eps_1q eps_m [eps_cx as reported per qubit]
/// 0 9.028e-4 2.740e-2 1.026e-2
/// [edges]
/// 0-1 1.026e-2
/// ```
pub fn parse_calibration(name: &str, text: &str) -> Result<CalibrationData, NoiseError> {
    #[derive(PartialEq)]
    enum Section {
        None,
        Qubits,
        Edges,
    }
    let mut section = Section::None;
    let mut cal = CalibrationData { name: name.to_string(), qubits: Vec::new(), edges: Vec::new() };
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |message: String| NoiseError::Parse { source_name: name.to_string(), line, message };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        match content {
            "[qubits]" => {
                section = Section::Qubits;
                continue;
            }
            "[edges]" => {
                section = Section::Edges;
                continue;
            }
            s if s.starts_with('[') => return Err(err(format!("unknown section {s}"))),
            _ => {}
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        match section {
            Section::None => return Err(err("data before any section header".into())),
            Section::Qubits => {
                if !(3..=4).contains(&fields.len()) {
                    return Err(err(format!("expected `label eps_1q eps_m [eps_cx]`, got `{content}`")));
                }
                let label = fields[0].parse::<u32>().map_err(|e| err(format!("bad label: {e}")))?;
                let one_qubit_error = parse_probability(fields[1], "eps_1q").map_err(err)?;
                let readout_error = parse_probability(fields[2], "eps_m").map_err(err)?;
                let reported_cx_error = fields
                    .get(3)
                    .map(|s| parse_probability(s, "eps_cx"))
                    .transpose()
                    .map_err(err)?;
                cal.qubits.push(QubitCalibration { label, one_qubit_error, readout_error, reported_cx_error });
            }
            Section::Edges => {
                if fields.len() != 2 {
                    return Err(err(format!("expected `a-b eps_cx`, got `{content}`")));
                }
                let (a, b) = fields[0]
                    .split_once('-')
                    .ok_or_else(|| err(format!("bad edge `{}`", fields[0])))?;
                let a = a.parse::<u32>().map_err(|e| err(format!("bad edge endpoint: {e}")))?;
                let b = b.parse::<u32>().map_err(|e| err(format!("bad edge endpoint: {e}")))?;
                if a == b {
                    return Err(err(format!("self-loop edge {a}-{b}")));
                }
                let cx_error = parse_probability(fields[1], "eps_cx").map_err(err)?;
                cal.edges.push(EdgeCalibration { a, b, cx_error });
            }
        }
    }
    if cal.qubits.is_empty() {
        return Err(NoiseError::Parse { source_name: name.into(), line: 0, message: "no qubits".into() });
    }
    cal.validate()
        .map_err(|message| NoiseError::Parse { source_name: name.into(), line: 0, message })?;
    Ok(cal)
}

/// Reads a calibration file; the data set is named after the file stem.
pub fn load_calibration(path: impl AsRef<Path>) -> Result<CalibrationData, NoiseError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| NoiseError::Io { path: path.display().to_string(), message: e.to_string() })?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("calibration");
    parse_calibration(name, &text)
}
