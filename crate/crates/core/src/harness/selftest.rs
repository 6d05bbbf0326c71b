use rand::seq::index::sample;

use crate::circuit::{Gate, GateKind};
use crate::pec::ptm::{gate_unitary, invert_pauli_channel, local_depolarizing_ptm, representation_ptm, unitary_ptm};
use crate::pec::{one_norm_closed_form, represent_2q_gate};
use crate::rng::StreamSeed;
use crate::zne::richardson_coefficients;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: impl Into<String>, passed: bool, detail: String) -> Check {
    Check { name: name.into(), passed, detail }
}

pub const PTM_PROBABILITIES: [f64; 4] = [0.001, 0.01, 0.05, 0.1];

/// Largest entrywise deviation between the PTM reconstructed from a
/// gate's representation and the ideal gate PTM.
pub fn representation_deviation(kind: GateKind, p: f64) -> f64 {
    let gate = Gate::new(kind, &[0, 1]).expect("two-qubit gate");
    let rep = represent_2q_gate(&gate, p).expect("invertible noise");
    let ideal = unitary_ptm(&gate_unitary(kind).expect("two-qubit gate"));
    (representation_ptm(&rep) - ideal).abs().max()
}

/// One-norm of the inverse of `D_p ⊗ D_p` found by numerical inversion.
pub fn brute_force_one_norm(p: f64) -> Option<f64> {
    invert_pauli_channel(&local_depolarizing_ptm(p)).map(|q| q.iter().map(|x| x.abs()).sum())
}

/// Worst relative residual of `Σ η_i λ_i^m = δ_{m0}` over `sets` random
/// node sets.
pub fn richardson_nodal_residual(sets: usize, seed: u64) -> f64 {
    let mut rng = StreamSeed::new(seed).rng();
    let mut worst: f64 = 0.0;
    for s in 0..sets {
        let k = 2 + s % 4;
        let nodes: Vec<f64> = sample(&mut rng, 400, k).into_iter().map(|v| 1.0 + v as f64 / 40.0).collect();
        let eta = richardson_coefficients(&nodes).expect("distinct nodes");
        for m in 0..k as i32 {
            let sum: f64 = eta.iter().zip(&nodes).map(|(e, l)| e * l.powi(m)).sum();
            let scale: f64 = eta.iter().zip(&nodes).map(|(e, l)| (e * l.powi(m)).abs()).sum();
            let want = if m == 0 { 1.0 } else { 0.0 };
            worst = worst.max((sum - want).abs() / scale.max(1.0));
        }
    }
    worst
}

/// Checks the PEC representations and extrapolation coefficients against
/// independent computations.
pub fn selftest() -> Vec<Check> {
    let mut out = Vec::new();
    for kind in [GateKind::Cnot, GateKind::Cz] {
        for p in PTM_PROBABILITIES {
            let dev = representation_deviation(kind, p);
            out.push(check(
                format!("ptm {} p={p}", kind.name()),
                dev < 1e-10,
                format!("max deviation {dev:.3e}"),
            ));
        }
    }
    for p in PTM_PROBABILITIES {
        let closed = one_norm_closed_form(p);
        let brute = brute_force_one_norm(p);
        let passed = brute.is_some_and(|b| (b - closed).abs() < 1e-10);
        out.push(check(
            format!("one-norm p={p}"),
            passed,
            format!("closed form {closed:.10}, inversion {}", brute.map_or("singular".into(), |b| format!("{b:.10}"))),
        ));
    }
    let eta = richardson_coefficients(&[1.0, 2.0, 3.0]).expect("distinct nodes");
    out.push(check("richardson {1,2,3}", eta == [3.0, -3.0, 1.0], format!("{eta:?}")));
    let residual = richardson_nodal_residual(100, 7);
    out.push(check("richardson nodal identities", residual < 1e-10, format!("worst residual {residual:.3e}")));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for c in selftest() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
