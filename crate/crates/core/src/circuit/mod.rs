//! Gate-list circuit IR and the transformations built on it.

use std::fmt;

use thiserror::Error;

mod benchmarks;
mod clifford;
mod text;
mod transform;

pub use benchmarks::{
    generate_mirror_circuit, generate_mirror_circuit_with, generate_rb_circuit, BenchmarkInstance, BenchmarkKind, Connectivity,
    MirrorOptions,
};
pub use clifford::{clifford_group, sample_clifford, CliffordElement, CliffordGroup};
pub use text::{parse_circuit, write_circuit};
pub use transform::{
    cancel_inverses, fold_global, gate_counts, insert_rotation_barriers, realized_scale,
    BarrierStatus, GateCounts, DEFAULT_BARRIER_ANGLE,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("circuit must act on at least one qubit")]
    NoQubits,
    #[error("qubit {qubit} out of range for a {n_qubits}-qubit circuit")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("{kind} expects {expected} target(s), got {got}")]
    WrongArity { kind: &'static str, expected: usize, got: usize },
    #[error("two-qubit gate {kind} needs distinct targets, got {qubit} twice")]
    RepeatedTarget { kind: &'static str, qubit: usize },
    #[error("rotation angle must be finite, got {0}")]
    NonFiniteAngle(f64),
    #[error("gate {0} follows a measurement; measurements must form a trailing layer")]
    MeasurementNotTrailing(String),
    #[error("circuit containing measurements cannot be inverted")]
    NotInvertible,
    #[error("unsupported Clifford width {0} (only 1 and 2 qubits)")]
    UnsupportedWidth(usize),
    #[error("invalid benchmark parameters: {0}")]
    InvalidParameters(String),
    #[error("invalid scale factor {0}: must be a finite value >= 1")]
    InvalidScaleFactor(f64),
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Gate kinds understood by the IR.
///
/// `I` is an explicit idle marker; it is never noisy. Rotation angles are in
/// radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateKind {
    I,
    H,
    S,
    Sdg,
    X,
    Y,
    Z,
    SqrtX,
    SqrtXdg,
    Rx(f64),
    Ry(f64),
    Rz(f64),
    Cnot,
    Cz,
    Measure,
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::I => "I",
            GateKind::H => "H",
            GateKind::S => "S",
            GateKind::Sdg => "SDG",
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::SqrtX => "SX",
            GateKind::SqrtXdg => "SXDG",
            GateKind::Rx(_) => "RX",
            GateKind::Ry(_) => "RY",
            GateKind::Rz(_) => "RZ",
            GateKind::Cnot => "CNOT",
            GateKind::Cz => "CZ",
            GateKind::Measure => "MEASURE",
        }
    }

    pub fn arity(&self) -> usize {
        if self.is_two_qubit() {
            2
        } else {
            1
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, GateKind::Cnot | GateKind::Cz)
    }

    pub fn is_rotation(&self) -> bool {
        matches!(self, GateKind::Rx(_) | GateKind::Ry(_) | GateKind::Rz(_))
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            GateKind::Rx(a) | GateKind::Ry(a) | GateKind::Rz(a) => Some(a),
            _ => None,
        }
    }

    /// The adjoint gate, `None` for measurements.
    pub fn inverse(&self) -> Option<GateKind> {
        Some(match *self {
            GateKind::S => GateKind::Sdg,
            GateKind::Sdg => GateKind::S,
            GateKind::SqrtX => GateKind::SqrtXdg,
            GateKind::SqrtXdg => GateKind::SqrtX,
            GateKind::Rx(a) => GateKind::Rx(-a),
            GateKind::Ry(a) => GateKind::Ry(-a),
            GateKind::Rz(a) => GateKind::Rz(-a),
            GateKind::Measure => return None,
            k => k,
        })
    }
}

/// A gate applied to one or two qubits. For single-qubit kinds both target
/// slots hold the same index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gate {
    kind: GateKind,
    targets: [usize; 2],
}

impl Gate {
    pub fn new(kind: GateKind, targets: &[usize]) -> Result<Self, CircuitError> {
        if targets.len() != kind.arity() {
            return Err(CircuitError::WrongArity {
                kind: kind.name(),
                expected: kind.arity(),
                got: targets.len(),
            });
        }
        if let Some(a) = kind.angle() {
            if !a.is_finite() {
                return Err(CircuitError::NonFiniteAngle(a));
            }
        }
        if kind.arity() == 2 && targets[0] == targets[1] {
            return Err(CircuitError::RepeatedTarget { kind: kind.name(), qubit: targets[0] });
        }
        let second = if targets.len() == 2 { targets[1] } else { targets[0] };
        Ok(Self { kind, targets: [targets[0], second] })
    }

    /// Single-qubit gate. Panics on two-qubit kinds or non-finite angles.
    pub fn single(kind: GateKind, q: usize) -> Self {
        Self::new(kind, &[q]).expect("invalid single-qubit gate")
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self::new(GateKind::Cnot, &[control, target]).expect("invalid CNOT")
    }

    pub fn cz(a: usize, b: usize) -> Self {
        Self::new(GateKind::Cz, &[a, b]).expect("invalid CZ")
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets[..self.kind.arity()]
    }

    pub fn is_two_qubit(&self) -> bool {
        self.kind.is_two_qubit()
    }

    pub fn inverse(&self) -> Option<Gate> {
        self.kind.inverse().map(|kind| Gate { kind, targets: self.targets })
    }

    /// Same gate with targets renamed through `map` (local index -> qubit).
    pub fn remapped(&self, map: &[usize]) -> Gate {
        let t: Vec<usize> = self.targets().iter().map(|&q| map[q]).collect();
        Gate::new(self.kind, &t).expect("remapping preserves validity")
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.name())?;
        for q in self.targets() {
            write!(f, " {q}")?;
        }
        if let Some(a) = self.kind.angle() {
            write!(f, " {a}")?;
        }
        Ok(())
    }
}

/// Ordered gate list over `n_qubits` qubits.
///
/// `barriers` holds gate positions (index of the first gate after the
/// boundary) that separate fold blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    barriers: Vec<usize>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Self, CircuitError> {
        if n_qubits == 0 {
            return Err(CircuitError::NoQubits);
        }
        Ok(Self { n_qubits, gates: Vec::new(), barriers: Vec::new() })
    }

    pub fn from_gates(
        n_qubits: usize,
        gates: impl IntoIterator<Item = Gate>,
    ) -> Result<Self, CircuitError> {
        let mut c = Self::new(n_qubits)?;
        c.extend(gates)?;
        Ok(c)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn barriers(&self) -> &[usize] {
        &self.barriers
    }

    pub fn push(&mut self, gate: Gate) -> Result<(), CircuitError> {
        for &q in gate.targets() {
            if q >= self.n_qubits {
                return Err(CircuitError::QubitOutOfRange { qubit: q, n_qubits: self.n_qubits });
            }
        }
        if gate.kind != GateKind::Measure
            && self.gates.last().is_some_and(|g| g.kind == GateKind::Measure)
        {
            return Err(CircuitError::MeasurementNotTrailing(gate.to_string()));
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<(), CircuitError> {
        for g in gates {
            self.push(g)?;
        }
        Ok(())
    }

    /// Marks a fold-block boundary before the next gate to be pushed.
    pub fn mark_barrier(&mut self) {
        let pos = self.gates.len();
        if self.barriers.last() != Some(&pos) {
            self.barriers.push(pos);
        }
    }

    pub fn clear_barriers(&mut self) {
        self.barriers.clear();
    }

    pub fn has_measurements(&self) -> bool {
        self.gates.iter().any(|g| g.kind == GateKind::Measure)
    }

    /// Splits off the trailing measurement layer.
    pub fn split_measurements(&self) -> (Circuit, Vec<Gate>) {
        let cut = self
            .gates
            .iter()
            .position(|g| g.kind == GateKind::Measure)
            .unwrap_or(self.gates.len());
        let body = Circuit {
            n_qubits: self.n_qubits,
            gates: self.gates[..cut].to_vec(),
            barriers: self.barriers.iter().copied().filter(|&b| b <= cut).collect(),
        };
        (body, self.gates[cut..].to_vec())
    }

    /// C†: reversed order, each gate replaced by its adjoint.
    pub fn inverse(&self) -> Result<Circuit, CircuitError> {
        let gates = self
            .gates
            .iter()
            .rev()
            .map(|g| g.inverse().ok_or(CircuitError::NotInvertible))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Circuit { n_qubits: self.n_qubits, gates, barriers: Vec::new() })
    }

    /// Qubits read out at the end, in output bit order: the explicit
    /// measurement layer if present, otherwise every qubit.
    pub fn measured_qubits(&self) -> Vec<usize> {
        let explicit: Vec<usize> = self
            .gates
            .iter()
            .filter(|g| g.kind == GateKind::Measure)
            .map(|g| g.targets[0])
            .collect();
        if explicit.is_empty() {
            (0..self.n_qubits).collect()
        } else {
            explicit
        }
    }

    pub(crate) fn push_unchecked(&mut self, gate: Gate) {
        debug_assert!(gate.targets().iter().all(|&q| q < self.n_qubits));
        self.gates.push(gate);
    }

    pub(crate) fn set_barriers(&mut self, barriers: Vec<usize>) {
        self.barriers = barriers;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_validation() {
        assert!(matches!(
            Gate::new(GateKind::Cnot, &[1, 1]),
            Err(CircuitError::RepeatedTarget { .. })
        ));
        assert!(matches!(Gate::new(GateKind::H, &[0, 1]), Err(CircuitError::WrongArity { .. })));
        assert!(matches!(
            Gate::new(GateKind::Rx(f64::NAN), &[0]),
            Err(CircuitError::NonFiniteAngle(_))
        ));
        assert_eq!(Gate::cnot(2, 0).targets(), &[2, 0]);
        assert_eq!(Gate::single(GateKind::H, 3).targets(), &[3]);
    }

    #[test]
    fn circuit_rejects_bad_targets_and_interior_measurement() {
        let mut c = Circuit::new(2).unwrap();
        assert!(matches!(
            c.push(Gate::single(GateKind::X, 2)),
            Err(CircuitError::QubitOutOfRange { qubit: 2, n_qubits: 2 })
        ));
        c.push(Gate::single(GateKind::Measure, 0)).unwrap();
        c.push(Gate::single(GateKind::Measure, 1)).unwrap();
        assert!(matches!(
            c.push(Gate::single(GateKind::H, 0)),
            Err(CircuitError::MeasurementNotTrailing(_))
        ));
        assert!(Circuit::new(0).is_err());
    }

    #[test]
    fn inverse_reverses_and_adjoints() {
        let c = Circuit::from_gates(
            2,
            [Gate::single(GateKind::S, 0), Gate::cnot(0, 1), Gate::single(GateKind::Rz(0.3), 1)],
        )
        .unwrap();
        let inv = c.inverse().unwrap();
        assert_eq!(
            inv.gates(),
            &[Gate::single(GateKind::Rz(-0.3), 1), Gate::cnot(0, 1), Gate::single(GateKind::Sdg, 0)]
        );
        let mut m = c.clone();
        m.push(Gate::single(GateKind::Measure, 0)).unwrap();
        assert_eq!(m.inverse(), Err(CircuitError::NotInvertible));
        assert_eq!(m.measured_qubits(), vec![0]);
        assert_eq!(c.measured_qubits(), vec![0, 1]);
    }
}
