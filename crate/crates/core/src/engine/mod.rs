//! Shot-based simulation of circuits under a [`NoiseModel`].
//!
//! The tableau backend handles Clifford circuits up to 64 qubits; rotations
//! with `|angle| <= ANGLE_CLIP` are run as identity. The statevector backend
//! is exact for any gate but limited to 10 qubits and is mainly a test oracle.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::circuit::{cancel_inverses, Circuit, CircuitError, Gate, GateKind};
use crate::noise::{NoiseError, NoiseModel, PauliChannel};
use crate::rng::StreamSeed;

pub mod statevector;
pub mod tableau;

use tableau::Tableau;

/// Largest rotation angle the tableau backend accepts (treated as identity).
pub const ANGLE_CLIP: f64 = 1e-3;
pub const MAX_TABLEAU_QUBITS: usize = 64;
pub const MAX_STATEVECTOR_QUBITS: usize = 10;

const SHOT_BLOCK: u64 = 256;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("{n_qubits} qubits exceeds the backend limit of {limit}")]
    SizeLimit { n_qubits: usize, limit: usize },
    #[error("non-Clifford gate `{gate}` (tableau backend accepts rotations up to {clip} rad)")]
    NonClifford { gate: String, clip: f64 },
    #[error("measurement inside the unitary part of a circuit")]
    UnexpectedMeasurement,
    #[error("ideal output of qubit {qubit} is not deterministic")]
    NonDeterministic { qubit: usize },
    #[error("no shots were taken")]
    EmptyResult,
    #[error("target bitstring has {target} bits but the circuit measures {measured}")]
    TargetWidth { target: usize, measured: usize },
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Tableau,
    Statevector,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Tableau => "tableau",
            Backend::Statevector => "statevector",
        }
    }

    pub fn max_qubits(self) -> usize {
        match self {
            Backend::Tableau => MAX_TABLEAU_QUBITS,
            Backend::Statevector => MAX_STATEVECTOR_QUBITS,
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tableau" => Ok(Backend::Tableau),
            "statevector" => Ok(Backend::Statevector),
            other => Err(format!("unknown backend `{other}` (expected tableau or statevector)")),
        }
    }
}

/// Measurement record. Character `i` of the text form is the `i`-th measured
/// qubit, so `X` on qubit 1 of three prints as `010`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bitstring {
    len: u8,
    bits: u64,
}

impl Bitstring {
    pub fn zeros(len: usize) -> Self {
        assert!(len <= 64, "bitstrings hold at most 64 bits");
        Self { len: len as u8, bits: 0 }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut b = Self::zeros(bits.len());
        for (i, &v) in bits.iter().enumerate() {
            b.set(i, v);
        }
        b
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bit(&self, i: usize) -> bool {
        (self.bits >> i) & 1 == 1
    }

    pub fn set(&mut self, i: usize, v: bool) {
        assert!(i < self.len(), "bit index out of range");
        if v {
            self.bits |= 1 << i;
        } else {
            self.bits &= !(1 << i);
        }
    }

    pub fn count_ones(&self) -> u32 {
        self.bits.count_ones()
    }
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            f.write_str(if self.bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Bitstring {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.len() > 64 {
            return Err(format!("bitstring longer than 64 bits: {}", s.len()));
        }
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(format!("invalid bit `{other}`")),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_bools(&bits))
    }
}

impl Serialize for Bitstring {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Bitstring {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Outcome counts of a shot batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotResult {
    pub counts: BTreeMap<Bitstring, u64>,
    pub shots: u64,
    pub backend: Backend,
    pub seed: u64,
}

impl ShotResult {
    pub fn count(&self, b: &Bitstring) -> u64 {
        self.counts.get(b).copied().unwrap_or(0)
    }

    pub fn probability(&self, b: &Bitstring) -> f64 {
        if self.shots == 0 {
            return 0.0;
        }
        self.count(b) as f64 / self.shots as f64
    }
}

/// Sample-mean estimate of an observable with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectationEstimate {
    pub value: f64,
    pub std_error: f64,
    pub shots: u64,
}

/// Probability of observing `target`, estimated from counts.
pub fn estimate_expectation(
    result: &ShotResult,
    target: &Bitstring,
) -> Result<ExpectationEstimate, EngineError> {
    if result.shots == 0 {
        return Err(EngineError::EmptyResult);
    }
    let v = result.probability(target);
    Ok(ExpectationEstimate {
        value: v,
        std_error: (v * (1.0 - v) / result.shots as f64).sqrt(),
        shots: result.shots,
    })
}

// A unitary gate with the Pauli channels that follow it.
#[derive(Debug, Clone)]
pub(crate) struct NoisyOp {
    pub gate: Gate,
    pub noise: Vec<(usize, PauliChannel)>,
}

#[derive(Debug, Clone)]
pub(crate) struct Program {
    pub n_qubits: usize,
    pub ops: Vec<NoisyOp>,
    pub measured: Vec<usize>,
    pub readout: Vec<f64>,
}

impl Program {
    pub fn compile(circuit: &Circuit, model: &NoiseModel) -> Result<Self, EngineError> {
        model.check_width(circuit.n_qubits())?;
        let (body, _) = circuit.split_measurements();
        let mut ops = Vec::with_capacity(body.len());
        for gate in body.gates() {
            let t = gate.targets();
            let noise = match gate.kind() {
                GateKind::I => Vec::new(),
                k if k.is_two_qubit() => {
                    let [a, b] = model.two_qubit_channels(t[0], t[1])?;
                    vec![(t[0], a), (t[1], b)]
                }
                _ => vec![(t[0], *model.one_qubit_channel(t[0]))],
            };
            let noise = noise.into_iter().filter(|(_, ch)| !ch.is_identity()).collect();
            ops.push(NoisyOp { gate: *gate, noise });
        }
        let measured = circuit.measured_qubits();
        let readout = measured.iter().map(|&q| model.readout_flip(q)).collect();
        Ok(Self { n_qubits: circuit.n_qubits(), ops, measured, readout })
    }

    fn apply_readout<R: Rng>(&self, outcome: &mut Bitstring, rng: &mut R) {
        for (i, &f) in self.readout.iter().enumerate() {
            if f > 0.0 && rng.gen::<f64>() < f {
                outcome.set(i, !outcome.bit(i));
            }
        }
    }
}

fn check_tableau_gates(circuit: &Circuit) -> Result<(), EngineError> {
    for g in circuit.gates() {
        if let Some(a) = g.kind().angle() {
            if a.abs() > ANGLE_CLIP {
                return Err(EngineError::NonClifford { gate: g.to_string(), clip: ANGLE_CLIP });
            }
        }
    }
    Ok(())
}

fn run_tableau_block(
    program: &Program,
    start: &Tableau,
    shots: u64,
    rng: &mut impl Rng,
    counts: &mut BTreeMap<Bitstring, u64>,
) {
    for _ in 0..shots {
        let mut t = start.clone();
        for op in &program.ops {
            t.apply_gate(&op.gate).expect("gates validated before sampling");
            for (q, ch) in &op.noise {
                t.apply_pauli(*q, ch.sample(rng.gen()));
            }
        }
        debug_assert!(t.is_valid());
        let mut out = Bitstring::zeros(program.measured.len());
        for (i, &q) in program.measured.iter().enumerate() {
            out.set(i, t.measure(q, rng));
        }
        program.apply_readout(&mut out, rng);
        *counts.entry(out).or_insert(0) += 1;
    }
}

fn merge(mut a: BTreeMap<Bitstring, u64>, b: BTreeMap<Bitstring, u64>) -> BTreeMap<Bitstring, u64> {
    for (k, v) in b {
        *a.entry(k).or_insert(0) += v;
    }
    a
}

/// Runs `shots` noisy trajectories and tallies the measured bitstrings.
///
/// Shots are split into fixed blocks, each with its own ChaCha stream, so the
/// result depends only on `seed` and not on the thread count.
pub fn run_shots(
    circuit: &Circuit,
    model: &NoiseModel,
    shots: u64,
    backend: Backend,
    seed: StreamSeed,
) -> Result<ShotResult, EngineError> {
    let n = circuit.n_qubits();
    if n > backend.max_qubits() {
        return Err(EngineError::SizeLimit { n_qubits: n, limit: backend.max_qubits() });
    }
    let program = Program::compile(circuit, model)?;
    let blocks = shots.div_ceil(SHOT_BLOCK);
    let block_len = |b: u64| SHOT_BLOCK.min(shots - b * SHOT_BLOCK);
    let counts = match backend {
        Backend::Tableau => {
            check_tableau_gates(circuit)?;
            let start = Tableau::new(n)?;
            (0..blocks)
                .into_par_iter()
                .map(|b| {
                    let mut rng = seed.shot_rng(b);
                    let mut counts = BTreeMap::new();
                    run_tableau_block(&program, &start, block_len(b), &mut rng, &mut counts);
                    counts
                })
                .reduce(BTreeMap::new, merge)
        }
        Backend::Statevector => {
            let sim = statevector::TrajectorySampler::new(&program)?;
            (0..blocks)
                .into_par_iter()
                .map(|b| {
                    let mut rng = seed.shot_rng(b);
                    let mut counts = BTreeMap::new();
                    for _ in 0..block_len(b) {
                        let out = sim.sample(&mut rng);
                        *counts.entry(out).or_insert(0) += 1;
                    }
                    counts
                })
                .reduce(BTreeMap::new, merge)
        }
    };
    Ok(ShotResult { counts, shots, backend, seed: seed.value() })
}

/// Noise-free output of a circuit whose measured qubits are all deterministic.
pub fn ideal_bitstring(circuit: &Circuit) -> Result<Bitstring, EngineError> {
    check_tableau_gates(circuit)?;
    let (body, _) = circuit.split_measurements();
    let mut t = Tableau::new(circuit.n_qubits())?;
    for g in body.gates() {
        t.apply_gate(g)?;
    }
    let measured = circuit.measured_qubits();
    let mut out = Bitstring::zeros(measured.len());
    for (i, &q) in measured.iter().enumerate() {
        out.set(i, t.deterministic_outcome(q).ok_or(EngineError::NonDeterministic { qubit: q })?);
    }
    Ok(out)
}

/// Anything that turns a circuit into an estimate of its target observable.
pub trait Executor: Sync {
    fn execute(
        &self,
        circuit: &Circuit,
        shots: u64,
        seed: StreamSeed,
    ) -> Result<ExpectationEstimate, EngineError>;
}

/// Simulator execution of the probability of a fixed target bitstring.
#[derive(Debug, Clone)]
pub struct SimulatorExecutor {
    pub backend: Backend,
    pub model: NoiseModel,
    pub target: Bitstring,
    /// Run adjacent-inverse cancellation before simulation.
    pub optimize: bool,
}

impl SimulatorExecutor {
    pub fn new(backend: Backend, model: NoiseModel, target: Bitstring) -> Self {
        Self { backend, model, target, optimize: false }
    }
}

impl Executor for SimulatorExecutor {
    fn execute(
        &self,
        circuit: &Circuit,
        shots: u64,
        seed: StreamSeed,
    ) -> Result<ExpectationEstimate, EngineError> {
        let measured = circuit.measured_qubits().len();
        if measured != self.target.len() {
            return Err(EngineError::TargetWidth { target: self.target.len(), measured });
        }
        let result = if self.optimize {
            run_shots(&cancel_inverses(circuit), &self.model, shots, self.backend, seed)?
        } else {
            run_shots(circuit, &self.model, shots, self.backend, seed)?
        };
        estimate_expectation(&result, &self.target)
    }
}
