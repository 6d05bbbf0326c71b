//! Line-oriented circuit format.
//!
//! ```text
//! QUBITS 3
//! H 0
//! CNOT 0 1
//! BARRIER
//! RZ 2 0.0001
//! MEASURE 0
//! ```
//!
//! One gate per line as `GATE q0 [q1] [angle]`. `BARRIER` records a fold-block
//! boundary before the next gate. Blank lines and `#` comments are ignored.

use std::fmt::Write as _;

use super::{Circuit, CircuitError, Gate, GateKind};

pub fn write_circuit(circuit: &Circuit) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "QUBITS {}", circuit.n_qubits());
    let mut barriers = circuit.barriers().iter().peekable();
    for (i, gate) in circuit.gates().iter().enumerate() {
        while barriers.next_if(|&&b| b == i).is_some() {
            out.push_str("BARRIER\n");
        }
        let _ = writeln!(out, "{gate}");
    }
    if barriers.next().is_some() {
        out.push_str("BARRIER\n");
    }
    out
}

pub fn parse_circuit(input: &str) -> Result<Circuit, CircuitError> {
    let mut circuit: Option<Circuit> = None;
    for (idx, raw) in input.lines().enumerate() {
        let line = idx + 1;
        let err = |message: String| CircuitError::Parse { line, message };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut fields = content.split_whitespace();
        let head = fields.next().unwrap_or_default();
        let rest: Vec<&str> = fields.collect();

        let Some(c) = circuit.as_mut() else {
            if head != "QUBITS" || rest.len() != 1 {
                return Err(err("expected header `QUBITS n`".into()));
            }
            let n = rest[0].parse::<usize>().map_err(|e| err(format!("bad qubit count: {e}")))?;
            circuit = Some(Circuit::new(n).map_err(|e| err(e.to_string()))?);
            continue;
        };

        if head == "BARRIER" {
            if !rest.is_empty() {
                return Err(err("BARRIER takes no arguments".into()));
            }
            c.mark_barrier();
            continue;
        }

        let (kind, arity, has_angle) = match head {
            "I" => (GateKind::I, 1, false),
            "H" => (GateKind::H, 1, false),
            "S" => (GateKind::S, 1, false),
            "SDG" => (GateKind::Sdg, 1, false),
            "X" => (GateKind::X, 1, false),
            "Y" => (GateKind::Y, 1, false),
            "Z" => (GateKind::Z, 1, false),
            "SX" => (GateKind::SqrtX, 1, false),
            "SXDG" => (GateKind::SqrtXdg, 1, false),
            "RX" => (GateKind::Rx(0.0), 1, true),
            "RY" => (GateKind::Ry(0.0), 1, true),
            "RZ" => (GateKind::Rz(0.0), 1, true),
            "CNOT" => (GateKind::Cnot, 2, false),
            "CZ" => (GateKind::Cz, 2, false),
            "MEASURE" => (GateKind::Measure, 1, false),
            "QUBITS" => return Err(err("duplicate QUBITS header".into())),
            other => return Err(err(format!("unknown gate `{other}`"))),
        };
        let expected = arity + usize::from(has_angle);
        if rest.len() != expected {
            return Err(err(format!("{head} expects {expected} argument(s), got {}", rest.len())));
        }
        let targets = rest[..arity]
            .iter()
            .map(|s| s.parse::<usize>().map_err(|e| err(format!("bad qubit `{s}`: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let kind = if has_angle {
            let a = rest[arity]
                .parse::<f64>()
                .map_err(|e| err(format!("bad angle `{}`: {e}", rest[arity])))?;
            match kind {
                GateKind::Rx(_) => GateKind::Rx(a),
                GateKind::Ry(_) => GateKind::Ry(a),
                _ => GateKind::Rz(a),
            }
        } else {
            kind
        };
        let gate = Gate::new(kind, &targets).map_err(|e| err(e.to_string()))?;
        c.push(gate).map_err(|e| err(e.to_string()))?;
    }
    circuit.ok_or(CircuitError::Parse { line: 0, message: "missing QUBITS header".into() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_gate(n: usize) -> impl Strategy<Value = Gate> {
        let one = (0..n, 0..10usize, -3.0f64..3.0).prop_map(|(q, k, a)| {
            let kind = [
                GateKind::I,
                GateKind::H,
                GateKind::S,
                GateKind::Sdg,
                GateKind::X,
                GateKind::Y,
                GateKind::Z,
                GateKind::SqrtX,
                GateKind::Rx(a),
                GateKind::Rz(a),
            ][k];
            Gate::single(kind, q)
        });
        let two = (0..n, 1..n, any::<bool>()).prop_map(move |(a, off, cz)| {
            let b = (a + off) % n;
            if cz {
                Gate::cz(a, b)
            } else {
                Gate::cnot(a, b)
            }
        });
        prop_oneof![3 => one, 1 => two]
    }

    proptest! {
        #[test]
        fn text_round_trip(gates in proptest::collection::vec(arb_gate(4), 0..40),
                           cuts in proptest::collection::btree_set(0usize..40, 0..4)) {
            let mut c = Circuit::new(4).unwrap();
            for (i, g) in gates.iter().enumerate() {
                if cuts.contains(&i) { c.mark_barrier(); }
                c.push(*g).unwrap();
            }
            let parsed = parse_circuit(&write_circuit(&c)).unwrap();
            prop_assert_eq!(parsed, c);
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = parse_circuit("QUBITS 2\nH 0\nFOO 1\n").unwrap_err();
        assert_eq!(e, CircuitError::Parse { line: 3, message: "unknown gate `FOO`".into() });
        let e = parse_circuit("# comment\nQUBITS 2\nCNOT 0 2\n").unwrap_err();
        assert!(matches!(e, CircuitError::Parse { line: 3, .. }));
        assert!(parse_circuit("H 0\n").is_err());
        assert!(parse_circuit("").is_err());
    }

    #[test]
    fn format_example() {
        let c = parse_circuit("QUBITS 2\nH 0\nCNOT 0 1\nBARRIER\nRZ 1 0.0001\nMEASURE 0\n").unwrap();
        assert_eq!(c.len(), 4);
        assert_eq!(c.barriers(), &[2]);
        assert_eq!(
            write_circuit(&c),
            "QUBITS 2\nH 0\nCNOT 0 1\nBARRIER\nRZ 1 0.0001\nMEASURE 0\n"
        );
    }
}
