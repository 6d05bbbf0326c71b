//! Dense statevector simulation. Basis index bit `q` is qubit `q`.

use num_complex::Complex64;
use rand::Rng;

use crate::circuit::{Circuit, Gate, GateKind};

use super::tableau::Pauli;
use super::{Bitstring, EngineError, Program, MAX_STATEVECTOR_QUBITS};

type Mat2 = [[Complex64; 2]; 2];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn matrix(kind: GateKind) -> Option<Mat2> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (zero, one, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
    Some(match kind {
        GateKind::I => [[one, zero], [zero, one]],
        GateKind::H => [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]],
        GateKind::S => [[one, zero], [zero, i]],
        GateKind::Sdg => [[one, zero], [zero, -i]],
        GateKind::X => [[zero, one], [one, zero]],
        GateKind::Y => [[zero, -i], [i, zero]],
        GateKind::Z => [[one, zero], [zero, -one]],
        GateKind::SqrtX => [[c(0.5, 0.5), c(0.5, -0.5)], [c(0.5, -0.5), c(0.5, 0.5)]],
        GateKind::SqrtXdg => [[c(0.5, -0.5), c(0.5, 0.5)], [c(0.5, 0.5), c(0.5, -0.5)]],
        GateKind::Rx(a) => {
            let (s, co) = (a / 2.0).sin_cos();
            [[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]]
        }
        GateKind::Ry(a) => {
            let (s, co) = (a / 2.0).sin_cos();
            [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]
        }
        GateKind::Rz(a) => {
            let (s, co) = (a / 2.0).sin_cos();
            [[c(co, -s), zero], [zero, c(co, s)]]
        }
        GateKind::Cnot | GateKind::Cz | GateKind::Measure => return None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// |0…0⟩ on `n` qubits.
    pub fn new(n: usize) -> Result<Self, EngineError> {
        if n == 0 || n > MAX_STATEVECTOR_QUBITS {
            return Err(EngineError::SizeLimit { n_qubits: n, limit: MAX_STATEVECTOR_QUBITS });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    fn apply_1q(&mut self, q: usize, m: &Mat2) {
        let bit = 1 << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a, b) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a + m[0][1] * b;
                self.amps[i | bit] = m[1][0] * a + m[1][1] * b;
            }
        }
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<(), EngineError> {
        let t = gate.targets();
        match gate.kind() {
            GateKind::Cnot => {
                let (cb, tb) = (1 << t[0], 1 << t[1]);
                for i in 0..self.amps.len() {
                    if i & cb != 0 && i & tb == 0 {
                        self.amps.swap(i, i | tb);
                    }
                }
            }
            GateKind::Cz => {
                let mask = (1 << t[0]) | (1 << t[1]);
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & mask == mask {
                        *a = -*a;
                    }
                }
            }
            GateKind::Measure => return Err(EngineError::UnexpectedMeasurement),
            k => self.apply_1q(t[0], &matrix(k).expect("single-qubit kind")),
        }
        Ok(())
    }

    pub fn apply_pauli(&mut self, q: usize, p: Pauli) {
        let kind = match p {
            Pauli::I => return,
            Pauli::X => GateKind::X,
            Pauli::Y => GateKind::Y,
            Pauli::Z => GateKind::Z,
        };
        self.apply_1q(q, &matrix(kind).expect("Pauli matrix"));
    }

    /// Outcome distribution of measuring `qubits`, indexed by the bitstring
    /// whose bit `i` is qubit `qubits[i]`.
    pub fn marginal_probabilities(&self, qubits: &[usize]) -> Vec<f64> {
        let mut probs = vec![0.0; 1 << qubits.len()];
        for (idx, a) in self.amps.iter().enumerate() {
            let mut k = 0usize;
            for (i, &q) in qubits.iter().enumerate() {
                k |= ((idx >> q) & 1) << i;
            }
            probs[k] += a.norm_sqr();
        }
        probs
    }
}

/// Exact noiseless output distribution over the measured qubits.
pub fn ideal_distribution(circuit: &Circuit) -> Result<Vec<f64>, EngineError> {
    let (body, _) = circuit.split_measurements();
    let mut sv = StateVector::new(circuit.n_qubits())?;
    for g in body.gates() {
        sv.apply_gate(g)?;
    }
    Ok(sv.marginal_probabilities(&circuit.measured_qubits()))
}

fn sample_index<R: Rng>(cumulative: &[f64], rng: &mut R) -> usize {
    let u = rng.gen::<f64>() * cumulative.last().copied().unwrap_or(1.0);
    cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1)
}

fn cumulative(probs: &[f64]) -> Vec<f64> {
    probs
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p;
            Some(*acc)
        })
        .collect()
}

/// Pauli-trajectory sampler. Trajectories without any sampled error reuse
/// the precomputed noiseless distribution.
pub(crate) struct TrajectorySampler<'a> {
    program: &'a Program,
    ideal: Vec<f64>,
}

impl<'a> TrajectorySampler<'a> {
    pub fn new(program: &'a Program) -> Result<Self, EngineError> {
        let mut sv = StateVector::new(program.n_qubits)?;
        for op in &program.ops {
            sv.apply_gate(&op.gate)?;
        }
        let ideal = cumulative(&sv.marginal_probabilities(&program.measured));
        Ok(Self { program, ideal })
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Bitstring {
        let mut errors: Vec<(usize, usize, Pauli)> = Vec::new();
        for (k, op) in self.program.ops.iter().enumerate() {
            for (q, ch) in &op.noise {
                let p = ch.sample(rng.gen());
                if p != Pauli::I {
                    errors.push((k, *q, p));
                }
            }
        }
        let index = if errors.is_empty() {
            sample_index(&self.ideal, rng)
        } else {
            let mut sv = StateVector::new(self.program.n_qubits).expect("size checked");
            let mut pending = errors.iter().peekable();
            for (k, op) in self.program.ops.iter().enumerate() {
                sv.apply_gate(&op.gate).expect("gates checked");
                while let Some((_, q, p)) = pending.next_if(|e| e.0 == k) {
                    sv.apply_pauli(*q, *p);
                }
            }
            sample_index(&cumulative(&sv.marginal_probabilities(&self.program.measured)), rng)
        };
        let mut out = Bitstring::zeros(self.program.measured.len());
        for i in 0..out.len() {
            out.set(i, (index >> i) & 1 == 1);
        }
        self.program.apply_readout(&mut out, rng);
        out
    }
}
