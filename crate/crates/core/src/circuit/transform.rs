//! Noise scaling by unitary folding, rotation barriers, and a peephole pass.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Circuit, CircuitError, Gate, GateKind};

/// Magnitude of the rotations inserted at fold boundaries.
pub const DEFAULT_BARRIER_ANGLE: f64 = 1e-4;

/// Global folding `C (C† C)^m` followed by a partial fold of the last `s`
/// gates, with `m = floor((λ - 1) / 2)` and
/// `s = round((λ - 2m - 1) / 2 · |C|)`.
///
/// Trailing measurements are moved to the end of the folded circuit. Block
/// boundaries are recorded as barriers.
pub fn fold_global(circuit: &Circuit, scale: f64) -> Result<Circuit, CircuitError> {
    if !scale.is_finite() || scale < 1.0 {
        return Err(CircuitError::InvalidScaleFactor(scale));
    }
    let (body, measurements) = circuit.split_measurements();
    let d = body.len();
    let m = ((scale - 1.0) / 2.0).floor() as usize;
    let s = ((scale - (2 * m + 1) as f64) / 2.0 * d as f64).round() as usize;
    let s = s.min(d);

    let inverse = body.inverse()?;
    let tail = Circuit::from_gates(body.n_qubits(), body.gates()[d - s..].iter().copied())?;
    let tail_inverse = tail.inverse()?;

    let mut out = Circuit::new(body.n_qubits())?;
    let mut barriers = Vec::new();
    let mut append = |out: &mut Circuit, block: &Circuit| {
        if !out.is_empty() && !block.is_empty() {
            barriers.push(out.len());
        }
        for g in block.gates() {
            out.push_unchecked(*g);
        }
    };
    append(&mut out, &body);
    for _ in 0..m {
        append(&mut out, &inverse);
        append(&mut out, &body);
    }
    if s > 0 {
        append(&mut out, &tail_inverse);
        append(&mut out, &tail);
    }
    out.set_barriers(barriers);
    for g in measurements {
        out.push_unchecked(g);
    }
    Ok(out)
}

/// Scale factor actually realized by [`fold_global`] on a body of `len` gates.
pub fn realized_scale(len: usize, scale: f64) -> f64 {
    if len == 0 {
        return 1.0;
    }
    let m = ((scale - 1.0) / 2.0).floor();
    let s = ((scale - (2.0 * m + 1.0)) / 2.0 * len as f64).round().min(len as f64);
    (len as f64 * (2.0 * m + 1.0) + 2.0 * s) / len as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BarrierStatus {
    /// Rotation layers were inserted at this many boundaries.
    Inserted(usize),
    /// The circuit had no recorded boundaries; nothing was inserted.
    NoBoundaries,
}

/// Inserts `RZ(±θ) RY(±θ) RX(±θ)` on every qubit at each recorded boundary,
/// with independently random signs. Barriers are consumed.
pub fn insert_rotation_barriers<R: Rng + ?Sized>(
    circuit: &Circuit,
    angle: f64,
    rng: &mut R,
) -> Result<(Circuit, BarrierStatus), CircuitError> {
    if !angle.is_finite() {
        return Err(CircuitError::NonFiniteAngle(angle));
    }
    let boundaries = circuit.barriers();
    if boundaries.is_empty() {
        log::warn!("no fold boundaries recorded; rotation barriers not inserted");
        let mut out = circuit.clone();
        out.clear_barriers();
        return Ok((out, BarrierStatus::NoBoundaries));
    }
    let n = circuit.n_qubits();
    let mut out = Circuit::new(n)?;
    let mut next = boundaries.iter().peekable();
    let layer = |out: &mut Circuit, rng: &mut R| {
        for q in 0..n {
            for make in [GateKind::Rz, GateKind::Ry, GateKind::Rx] {
                let a = if rng.gen::<bool>() { angle } else { -angle };
                out.push_unchecked(Gate::single(make(a), q));
            }
        }
    };
    for (i, g) in circuit.gates().iter().enumerate() {
        while next.next_if(|&&b| b == i).is_some() {
            layer(&mut out, rng);
        }
        out.push_unchecked(*g);
    }
    if next.next().is_some() {
        layer(&mut out, rng);
    }
    Ok((out, BarrierStatus::Inserted(boundaries.len())))
}

fn cancel_pass(circuit: &Circuit) -> (Circuit, bool) {
    let n = circuit.n_qubits();
    let mut slots: Vec<Option<Gate>> = Vec::with_capacity(circuit.len());
    let mut wires: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut changed = false;
    for g in circuit.gates() {
        let t = g.targets();
        let top = wires[t[0]].last().copied();
        let cancels = g.kind() != GateKind::Measure
            && top.is_some_and(|j| {
                t.iter().all(|&q| wires[q].last() == Some(&j))
                    && slots[j].and_then(|prev| prev.inverse()) == Some(*g)
            });
        if cancels {
            let j = top.expect("checked above");
            slots[j] = None;
            for &q in t {
                wires[q].pop();
            }
            changed = true;
        } else {
            for &q in t {
                wires[q].push(slots.len());
            }
            slots.push(Some(*g));
        }
    }
    let mut out = Circuit::new(n).expect("n > 0");
    for g in slots.into_iter().flatten() {
        out.push_unchecked(g);
    }
    (out, changed)
}

/// Removes wire-adjacent gate/inverse pairs on identical ordered targets
/// until none remain. Rotations only cancel against their exact negation.
/// Barriers are dropped.
pub fn cancel_inverses(circuit: &Circuit) -> Circuit {
    let (mut out, mut changed) = cancel_pass(circuit);
    while changed {
        (out, changed) = cancel_pass(&out);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GateCounts {
    pub one_qubit: usize,
    pub two_qubit: usize,
}

/// Gate counts excluding measurements.
pub fn gate_counts(circuit: &Circuit) -> GateCounts {
    let mut c = GateCounts::default();
    for g in circuit.gates() {
        match g.kind() {
            GateKind::Measure => {}
            k if k.is_two_qubit() => c.two_qubit += 1,
            _ => c.one_qubit += 1,
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::statevector::ideal_distribution;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample_circuit() -> Circuit {
        Circuit::from_gates(
            2,
            [
                Gate::single(GateKind::H, 0),
                Gate::cnot(0, 1),
                Gate::single(GateKind::S, 1),
                Gate::single(GateKind::SqrtX, 0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn folding_lengths() {
        let c = sample_circuit();
        assert_eq!(fold_global(&c, 1.0).unwrap(), c);
        assert_eq!(fold_global(&c, 3.0).unwrap().len(), 12);
        assert_eq!(fold_global(&c, 5.0).unwrap().len(), 20);
        // λ = 2 folds the last half: 4 + 2 * 2
        let two = fold_global(&c, 2.0).unwrap();
        assert_eq!(two.len(), 8);
        assert_eq!(two.barriers(), &[4, 6]);
        assert_eq!(two.gates()[4], Gate::single(GateKind::SqrtXdg, 0));
        assert_eq!(realized_scale(4, 2.0), 2.0);
        assert_eq!(realized_scale(5, 2.0), 2.2);
        assert!(matches!(fold_global(&c, 0.5), Err(CircuitError::InvalidScaleFactor(_))));
        assert!(fold_global(&c, f64::NAN).is_err());
    }

    #[test]
    fn folding_keeps_measurements_last() {
        let mut c = sample_circuit();
        c.push(Gate::single(GateKind::Measure, 1)).unwrap();
        let f = fold_global(&c, 3.0).unwrap();
        assert_eq!(f.len(), 13);
        assert_eq!(f.gates().last().unwrap().kind(), GateKind::Measure);
        assert_eq!(f.measured_qubits(), vec![1]);
    }

    #[test]
    fn barriers_inserted_at_each_boundary() {
        let c = sample_circuit();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let f = fold_global(&c, 3.0).unwrap();
        assert_eq!(f.barriers(), &[4, 8]);
        let (b, status) = insert_rotation_barriers(&f, DEFAULT_BARRIER_ANGLE, &mut rng).unwrap();
        assert_eq!(status, BarrierStatus::Inserted(2));
        assert_eq!(b.len(), 12 + 2 * 6);
        assert!(b.barriers().is_empty());
        assert!(b.gates()[4..10].iter().all(|g| g.kind().angle().unwrap().abs() == 1e-4));
        let (same, status) = insert_rotation_barriers(&c, 1e-4, &mut rng).unwrap();
        assert_eq!(status, BarrierStatus::NoBoundaries);
        assert_eq!(same, c);
    }

    #[test]
    fn cancellation_examples() {
        let c = Circuit::from_gates(
            2,
            [
                Gate::cnot(0, 1),
                Gate::single(GateKind::S, 1),
                Gate::single(GateKind::H, 0),
                Gate::single(GateKind::Sdg, 1),
                Gate::cnot(0, 1),
            ],
        )
        .unwrap();
        // H on qubit 0 blocks the CNOT pair
        assert_eq!(cancel_inverses(&c).len(), 3);
        let c = Circuit::from_gates(
            2,
            [Gate::cnot(0, 1), Gate::single(GateKind::S, 1), Gate::single(GateKind::Sdg, 1), Gate::cnot(0, 1)],
        )
        .unwrap();
        assert!(cancel_inverses(&c).is_empty());
        // reversed control/target is a different gate
        let c = Circuit::from_gates(2, [Gate::cnot(0, 1), Gate::cnot(1, 0)]).unwrap();
        assert_eq!(cancel_inverses(&c).len(), 2);
        let c = Circuit::from_gates(
            1,
            [Gate::single(GateKind::Rz(1e-4), 0), Gate::single(GateKind::Rz(1e-4), 0)],
        )
        .unwrap();
        assert_eq!(cancel_inverses(&c).len(), 2);
    }

    #[test]
    fn gate_count_classes() {
        let mut c = sample_circuit();
        c.push(Gate::cz(0, 1)).unwrap();
        c.push(Gate::single(GateKind::Measure, 0)).unwrap();
        assert_eq!(gate_counts(&c), GateCounts { one_qubit: 3, two_qubit: 2 });
    }

    fn arb_circuit() -> impl Strategy<Value = Circuit> {
        let gate = (0usize..6, 0usize..3, 1usize..3).prop_map(|(k, a, off)| {
            let b = (a + off) % 3;
            match k {
                0 => Gate::single(GateKind::H, a),
                1 => Gate::single(GateKind::S, a),
                2 => Gate::single(GateKind::Sdg, a),
                3 => Gate::single(GateKind::SqrtX, a),
                4 => Gate::single(GateKind::Ry(0.3), a),
                _ => Gate::cnot(a, b),
            }
        });
        proptest::collection::vec(gate, 1..25).prop_map(|g| Circuit::from_gates(3, g).unwrap())
    }

    proptest! {
        #[test]
        fn folding_preserves_the_output_distribution(c in arb_circuit(), scale in 1.0f64..6.0) {
            let f = fold_global(&c, scale).unwrap();
            let (p, q) = (ideal_distribution(&c).unwrap(), ideal_distribution(&f).unwrap());
            for (a, b) in p.iter().zip(&q) {
                prop_assert!((a - b).abs() < 1e-9);
            }
            prop_assert!((f.len() as f64 / c.len() as f64 - realized_scale(c.len(), scale)).abs() < 1e-12);
        }

        #[test]
        fn cancellation_preserves_semantics_and_is_idempotent(c in arb_circuit()) {
            let once = cancel_inverses(&c);
            prop_assert_eq!(cancel_inverses(&once), once.clone());
            let (p, q) = (ideal_distribution(&c).unwrap(), ideal_distribution(&once).unwrap());
            for (a, b) in p.iter().zip(&q) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }

        #[test]
        fn folded_circuits_cancel_to_the_original(c in arb_circuit()) {
            let base = cancel_inverses(&c);
            let folded = fold_global(&base, 3.0).unwrap();
            prop_assert_eq!(cancel_inverses(&folded), cancel_inverses(&base));
        }
    }
}
