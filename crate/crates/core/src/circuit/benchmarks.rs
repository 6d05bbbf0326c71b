//! Randomized-benchmarking and mirror circuit generators.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{ideal_bitstring, Bitstring};

use super::clifford::clifford_group;
use super::transform::cancel_inverses;
use super::{Circuit, CircuitError, Gate, GateKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchmarkKind {
    Rb,
    Mirror,
}

impl BenchmarkKind {
    pub fn name(self) -> &'static str {
        match self {
            BenchmarkKind::Rb => "rb",
            BenchmarkKind::Mirror => "mirror",
        }
    }
}

impl fmt::Display for BenchmarkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchmarkKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rb" => Ok(BenchmarkKind::Rb),
            "mirror" => Ok(BenchmarkKind::Mirror),
            other => Err(format!("unknown circuit family `{other}` (expected rb or mirror)")),
        }
    }
}

/// A benchmark circuit with its noiseless output.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkInstance {
    pub circuit: Circuit,
    pub target: Bitstring,
    /// Number of random Clifford elements (RB) or Clifford layers (mirror).
    pub depth: usize,
    pub kind: BenchmarkKind,
}

/// Undirected coupling graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Connectivity {
    n_qubits: usize,
    edges: Vec<(usize, usize)>,
}

impl Connectivity {
    pub fn new(n_qubits: usize, edges: &[(usize, usize)]) -> Result<Self, CircuitError> {
        let mut norm = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a == b || a >= n_qubits || b >= n_qubits {
                return Err(CircuitError::InvalidTopology(format!(
                    "edge ({a}, {b}) invalid on {n_qubits} qubits"
                )));
            }
            let e = (a.min(b), a.max(b));
            if !norm.contains(&e) {
                norm.push(e);
            }
        }
        Ok(Self { n_qubits, edges: norm })
    }

    pub fn line(n_qubits: usize) -> Self {
        Self { n_qubits, edges: (1..n_qubits).map(|q| (q - 1, q)).collect() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    fn check_line(&self, n: usize) -> Result<(), CircuitError> {
        if self.n_qubits != n {
            return Err(CircuitError::InvalidTopology(format!(
                "connectivity covers {} qubits, circuit has {n}",
                self.n_qubits
            )));
        }
        let line = (1..n).filter(|&q| self.edges.contains(&(q - 1, q))).count();
        if line < n - 1 {
            return Err(CircuitError::InvalidTopology(format!(
                "only {line} of the {} line edges are present",
                n - 1
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MirrorOptions {
    /// Chance that an edge still free in the greedy matching receives a CNOT.
    pub edge_probability: f64,
}

impl Default for MirrorOptions {
    fn default() -> Self {
        Self { edge_probability: 1.0 }
    }
}

fn push_element(circuit: &mut Circuit, word: &[Gate], qubits: &[usize]) {
    for g in word {
        circuit.push_unchecked(g.remapped(qubits));
    }
}

/// Parallel RB: 2-qubit sequences on pairs `(0,1), (2,3), …` and a 1-qubit
/// sequence on the last qubit when `n` is odd. Each register gets `d` random
/// Cliffords and their inverse. Adjacent inverse pairs are cancelled so the
/// output is a fixed point of [`cancel_inverses`].
pub fn generate_rb_circuit<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    rng: &mut R,
) -> Result<BenchmarkInstance, CircuitError> {
    if n == 0 || d == 0 {
        return Err(CircuitError::InvalidParameters(format!("RB needs n >= 1 and d >= 1, got n={n}, d={d}")));
    }
    let mut registers: Vec<Vec<usize>> = (0..n / 2).map(|k| vec![2 * k, 2 * k + 1]).collect();
    if n % 2 == 1 {
        registers.push(vec![n - 1]);
    }
    let mut circuit = Circuit::new(n)?;
    let mut words: Vec<Vec<Gate>> = vec![Vec::new(); registers.len()];
    for _ in 0..d {
        for (reg, word) in registers.iter().zip(words.iter_mut()) {
            let element = clifford_group(reg.len())?.sample(rng);
            push_element(&mut circuit, element.gates(), reg);
            word.extend_from_slice(element.gates());
        }
    }
    for (reg, word) in registers.iter().zip(&words) {
        let inverse = clifford_group(reg.len())?
            .inverse_of(word)
            .expect("Clifford words are invertible");
        push_element(&mut circuit, inverse.gates(), reg);
    }
    Ok(BenchmarkInstance {
        circuit: cancel_inverses(&circuit),
        target: Bitstring::zeros(n),
        depth: d,
        kind: BenchmarkKind::Rb,
    })
}

fn one_qubit_layer<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Vec<Vec<Gate>>, CircuitError> {
    let group = clifford_group(1)?;
    Ok((0..n)
        .map(|q| group.sample(rng).gates().iter().map(|g| g.remapped(&[q])).collect())
        .collect())
}

fn pauli_layer<R: Rng + ?Sized>(circuit: &mut Circuit, n: usize, rng: &mut R) {
    for q in 0..n {
        let kind = [None, Some(GateKind::X), Some(GateKind::Y), Some(GateKind::Z)][rng.gen_range(0..4)];
        if let Some(k) = kind {
            circuit.push_unchecked(Gate::single(k, q));
        }
    }
}

fn random_matching<R: Rng + ?Sized>(
    connectivity: &Connectivity,
    p: f64,
    rng: &mut R,
) -> Vec<Gate> {
    let mut edges = connectivity.edges().to_vec();
    edges.shuffle(rng);
    let mut used = vec![false; connectivity.n_qubits()];
    let mut gates = Vec::new();
    for (a, b) in edges {
        if used[a] || used[b] || rng.gen::<f64>() >= p {
            continue;
        }
        used[a] = true;
        used[b] = true;
        gates.push(if rng.gen() { Gate::cnot(a, b) } else { Gate::cnot(b, a) });
    }
    gates
}

fn inverse_gates(gates: &[Gate]) -> impl Iterator<Item = Gate> + '_ {
    gates.iter().rev().map(|g| g.inverse().expect("unitary gate"))
}

pub fn generate_mirror_circuit<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    connectivity: &Connectivity,
    rng: &mut R,
) -> Result<BenchmarkInstance, CircuitError> {
    generate_mirror_circuit_with(n, d, connectivity, &MirrorOptions::default(), rng)
}

/// Mirror circuit: a random 1-qubit Clifford layer, `d` (Pauli, Clifford)
/// layer pairs, a central Pauli layer, the `d` Clifford layers inverted in
/// reverse order each followed by a fresh Pauli layer, and finally the
/// inverse of the first layer. The net operation is a Pauli, so the ideal
/// output is a single random bitstring.
pub fn generate_mirror_circuit_with<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    connectivity: &Connectivity,
    options: &MirrorOptions,
    rng: &mut R,
) -> Result<BenchmarkInstance, CircuitError> {
    if n < 2 || d == 0 {
        return Err(CircuitError::InvalidParameters(format!(
            "mirror circuits need n >= 2 and d >= 1, got n={n}, d={d}"
        )));
    }
    if !(0.0..=1.0).contains(&options.edge_probability) {
        return Err(CircuitError::InvalidParameters(format!(
            "edge probability {} outside [0, 1]",
            options.edge_probability
        )));
    }
    connectivity.check_line(n)?;

    let mut circuit = Circuit::new(n)?;
    let initial: Vec<Gate> = one_qubit_layer(n, rng)?.concat();
    circuit.extend(initial.iter().copied())?;
    let mut layers: Vec<Vec<Gate>> = Vec::with_capacity(d);
    for _ in 0..d {
        pauli_layer(&mut circuit, n, rng);
        let mut layer = one_qubit_layer(n, rng)?.concat();
        layer.extend(random_matching(connectivity, options.edge_probability, rng));
        circuit.extend(layer.iter().copied())?;
        layers.push(layer);
    }
    pauli_layer(&mut circuit, n, rng);
    for layer in layers.iter().rev() {
        circuit.extend(inverse_gates(layer))?;
        pauli_layer(&mut circuit, n, rng);
    }
    circuit.extend(inverse_gates(&initial))?;

    let target = ideal_bitstring(&circuit).expect("mirror circuits end in a basis state");
    Ok(BenchmarkInstance { circuit, target, depth: d, kind: BenchmarkKind::Mirror })
}
