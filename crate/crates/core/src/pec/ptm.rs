//! Pauli transfer matrices of two-qubit channels.
//!
//! `R[i][j] = Tr(P_i Λ(P_j)) / 4` over the basis `P_{4a+b} = σ_a ⊗ σ_b`
//! with `σ = (I, X, Y, Z)`. The first tensor factor is the gate's first
//! target. Used to check quasi-probability representations independently of
//! the closed-form coefficients.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4, SMatrix};
use num_complex::Complex64;

use crate::circuit::GateKind;
use crate::engine::tableau::Pauli;

use super::OperationRepresentation;

pub type Ptm = SMatrix<f64, 16, 16>;
type Op = Matrix4<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn sigma(k: usize) -> Matrix2<Complex64> {
    let (o, l, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
    match k {
        0 => Matrix2::new(l, o, o, l),
        1 => Matrix2::new(o, l, l, o),
        2 => Matrix2::new(o, -i, i, o),
        _ => Matrix2::new(l, o, o, -l),
    }
}

pub fn pauli_index(p: Pauli) -> usize {
    match p {
        Pauli::I => 0,
        Pauli::X => 1,
        Pauli::Y => 2,
        Pauli::Z => 3,
    }
}

/// `σ_a ⊗ σ_b` at index `4a + b`.
pub fn pauli_basis() -> Vec<Op> {
    (0..16).map(|k| sigma(k / 4).kronecker(&sigma(k % 4))).collect()
}

/// Unitary of a two-qubit gate kind, first target as first tensor factor.
pub fn gate_unitary(kind: GateKind) -> Option<Op> {
    let (o, l) = (c(0.0, 0.0), c(1.0, 0.0));
    match kind {
        GateKind::Cnot => Some(Matrix4::new(l, o, o, o, o, l, o, o, o, o, o, l, o, o, l, o)),
        GateKind::Cz => Some(Matrix4::from_diagonal(&nalgebra::Vector4::new(l, l, l, -l))),
        _ => None,
    }
}

fn ptm_of(map: impl Fn(&Op) -> Op) -> Ptm {
    let basis = pauli_basis();
    Ptm::from_fn(|i, j| (basis[i] * map(&basis[j])).trace().re / 4.0)
}

pub fn unitary_ptm(u: &Op) -> Ptm {
    let ud = u.adjoint();
    ptm_of(|rho| u * rho * ud)
}

/// `Σ_k q_k P_k ρ P_k`; the weights may be negative.
pub fn pauli_channel_ptm(weights: &[f64; 16]) -> Ptm {
    let basis = pauli_basis();
    ptm_of(|rho| {
        basis
            .iter()
            .zip(weights)
            .fold(Op::zeros(), |acc, (p, &w)| acc + (p * rho * p).scale(w))
    })
}

/// `D_p ⊗ D_p`.
pub fn local_depolarizing_ptm(p: f64) -> Ptm {
    let d = [1.0 - p, p / 3.0, p / 3.0, p / 3.0];
    let mut w = [0.0; 16];
    for (k, wk) in w.iter_mut().enumerate() {
        *wk = d[k / 4] * d[k % 4];
    }
    pauli_channel_ptm(&w)
}

fn pauli_pair_weights(a: usize, b: usize) -> [f64; 16] {
    let mut w = [0.0; 16];
    w[4 * a + b] = 1.0;
    w
}

/// `Σ_α η_α PTM(P_α ∘ (D_p ⊗ D_p) ∘ G)` for a representation.
pub fn representation_ptm(rep: &OperationRepresentation) -> Ptm {
    let gate = unitary_ptm(&gate_unitary(rep.gate().kind()).expect("two-qubit gate"));
    let noisy = local_depolarizing_ptm(rep.p()) * gate;
    rep.terms().iter().fold(Ptm::zeros(), |acc, t| {
        let [a, b] = t.paulis.map(pauli_index);
        acc + (pauli_channel_ptm(&pauli_pair_weights(a, b)) * noisy).scale(t.coefficient)
    })
}

/// Quasi-probabilities `q` with `Σ_k q_k PTM(P_k · P_k) = channel⁻¹`, found by
/// numerically inverting the PTM and least-squares fitting over all 256
/// entries. `None` if the channel is singular.
pub fn invert_pauli_channel(channel: &Ptm) -> Option<[f64; 16]> {
    let inverse = channel.try_inverse()?;
    let columns: Vec<Ptm> = (0..16).map(|k| pauli_channel_ptm(&pauli_pair_weights(k / 4, k % 4))).collect();
    let a = DMatrix::from_fn(256, 16, |r, k| columns[k][(r / 16, r % 16)]);
    let b = DVector::from_fn(256, |r, _| inverse[(r / 16, r % 16)]);
    let q = a.svd(true, true).solve(&b, 1e-14).ok()?;
    let mut out = [0.0; 16];
    out.copy_from_slice(q.as_slice());
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_pauli_ptms() {
        let id = unitary_ptm(&Op::identity());
        assert!((id - Ptm::identity()).abs().max() < 1e-15);
        // X ⊗ I flips the sign of the Y and Z components on the first qubit
        let x = pauli_channel_ptm(&pauli_pair_weights(1, 0));
        assert_eq!(x[(4 * 3, 4 * 3)], -1.0);
        assert_eq!(x[(4, 4)], 1.0);
    }

    #[test]
    fn cnot_conjugation_table() {
        let r = unitary_ptm(&gate_unitary(GateKind::Cnot).unwrap());
        // X⊗I -> X⊗X, I⊗Z -> Z⊗Z
        assert!((r[(4 + 1, 4)] - 1.0).abs() < 1e-12);
        assert!((r[(12 + 3, 3)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn depolarizing_diagonal() {
        let p = 0.03;
        let d = local_depolarizing_ptm(p);
        let f = 1.0 - 4.0 * p / 3.0;
        assert!((d[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((d[(1, 1)] - f).abs() < 1e-15);
        assert!((d[(5, 5)] - f * f).abs() < 1e-15);
        assert!((d - Ptm::from_diagonal(&d.diagonal())).abs().max() < 1e-15);
    }
}
