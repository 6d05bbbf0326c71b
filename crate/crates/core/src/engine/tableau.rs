//! Stabilizer tableau with destabilizers, stored column-major.
//!
//! Row `i < n` is destabilizer `i`, row `n + i` is stabilizer `i`. For each
//! qubit we keep one `u128` of X bits and one of Z bits across all `2n` rows,
//! so every Clifford gate is a handful of word operations.

use rand::Rng;

use crate::circuit::{Gate, GateKind};

use super::{EngineError, ANGLE_CLIP, MAX_TABLEAU_QUBITS};

/// A signed Pauli string over at most 64 qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliRow {
    pub x: u64,
    pub z: u64,
    pub negative: bool,
}

impl PauliRow {
    fn commutes_with(&self, other: &PauliRow) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tableau {
    n: usize,
    xs: Vec<u128>,
    zs: Vec<u128>,
    signs: u128,
}

// Phase exponent contribution (mod 4) of multiplying single-qubit Paulis.
fn g(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
    match (x1, z1) {
        (false, false) => 0,
        (true, true) => z2 as i32 - x2 as i32,
        (true, false) => z2 as i32 * (2 * x2 as i32 - 1),
        (false, true) => x2 as i32 * (1 - 2 * z2 as i32),
    }
}

impl Tableau {
    /// Tableau of |0…0⟩ (equivalently, of the identity Clifford).
    pub fn new(n: usize) -> Result<Self, EngineError> {
        if n == 0 || n > MAX_TABLEAU_QUBITS {
            return Err(EngineError::SizeLimit { n_qubits: n, limit: MAX_TABLEAU_QUBITS });
        }
        let mut xs = vec![0u128; n];
        let mut zs = vec![0u128; n];
        for q in 0..n {
            xs[q] = 1u128 << q;
            zs[q] = 1u128 << (n + q);
        }
        Ok(Self { n, xs, zs, signs: 0 })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn h(&mut self, q: usize) {
        self.signs ^= self.xs[q] & self.zs[q];
        std::mem::swap(&mut self.xs[q], &mut self.zs[q]);
    }

    pub fn s(&mut self, q: usize) {
        self.signs ^= self.xs[q] & self.zs[q];
        self.zs[q] ^= self.xs[q];
    }

    pub fn sdg(&mut self, q: usize) {
        self.signs ^= self.xs[q] & !self.zs[q];
        self.zs[q] ^= self.xs[q];
    }

    pub fn x(&mut self, q: usize) {
        self.signs ^= self.zs[q];
    }

    pub fn y(&mut self, q: usize) {
        self.signs ^= self.xs[q] ^ self.zs[q];
    }

    pub fn z(&mut self, q: usize) {
        self.signs ^= self.xs[q];
    }

    pub fn sqrt_x(&mut self, q: usize) {
        self.h(q);
        self.s(q);
        self.h(q);
    }

    pub fn sqrt_xdg(&mut self, q: usize) {
        self.h(q);
        self.sdg(q);
        self.h(q);
    }

    pub fn cnot(&mut self, c: usize, t: usize) {
        let (xc, zc, xt, zt) = (self.xs[c], self.zs[c], self.xs[t], self.zs[t]);
        self.signs ^= xc & zt & !(xt ^ zc);
        self.xs[t] = xt ^ xc;
        self.zs[c] = zc ^ zt;
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        self.h(b);
        self.cnot(a, b);
        self.h(b);
    }

    pub fn apply_pauli(&mut self, q: usize, p: Pauli) {
        match p {
            Pauli::I => {}
            Pauli::X => self.x(q),
            Pauli::Y => self.y(q),
            Pauli::Z => self.z(q),
        }
    }

    /// Applies a unitary gate. Rotations with `|angle| <= ANGLE_CLIP` are
    /// treated as identity; larger ones are rejected.
    pub fn apply_gate(&mut self, gate: &Gate) -> Result<(), EngineError> {
        let t = gate.targets();
        match gate.kind() {
            GateKind::I => {}
            GateKind::H => self.h(t[0]),
            GateKind::S => self.s(t[0]),
            GateKind::Sdg => self.sdg(t[0]),
            GateKind::X => self.x(t[0]),
            GateKind::Y => self.y(t[0]),
            GateKind::Z => self.z(t[0]),
            GateKind::SqrtX => self.sqrt_x(t[0]),
            GateKind::SqrtXdg => self.sqrt_xdg(t[0]),
            GateKind::Cnot => self.cnot(t[0], t[1]),
            GateKind::Cz => self.cz(t[0], t[1]),
            GateKind::Rx(a) | GateKind::Ry(a) | GateKind::Rz(a) => {
                if a.abs() > ANGLE_CLIP {
                    return Err(EngineError::NonClifford { gate: gate.to_string(), clip: ANGLE_CLIP });
                }
            }
            GateKind::Measure => {
                return Err(EngineError::UnexpectedMeasurement);
            }
        }
        Ok(())
    }

    pub fn row(&self, i: usize) -> PauliRow {
        let mut x = 0u64;
        let mut z = 0u64;
        for q in 0..self.n {
            x |= (((self.xs[q] >> i) & 1) as u64) << q;
            z |= (((self.zs[q] >> i) & 1) as u64) << q;
        }
        PauliRow { x, z, negative: (self.signs >> i) & 1 == 1 }
    }

    /// Image of X_q under the tableau's Clifford (destabilizer row).
    pub fn x_image(&self, q: usize) -> PauliRow {
        self.row(q)
    }

    /// Image of Z_q (stabilizer row).
    pub fn z_image(&self, q: usize) -> PauliRow {
        self.row(self.n + q)
    }

    /// All rows packed into one integer; identifies the Clifford up to global
    /// phase. Only for `n <= 3`.
    pub(crate) fn small_key(&self) -> u64 {
        assert!(self.n <= 3, "small_key supports at most 3 qubits");
        let w = 2 * self.n + 1;
        (0..2 * self.n).fold(0u64, |key, i| {
            let r = self.row(i);
            (key << w) | (r.x << (self.n + 1)) | (r.z << 1) | r.negative as u64
        })
    }

    /// Symplectic relations between all rows.
    pub fn is_valid(&self) -> bool {
        let rows: Vec<PauliRow> = (0..2 * self.n).map(|i| self.row(i)).collect();
        for i in 0..2 * self.n {
            for j in (i + 1)..2 * self.n {
                let paired = j == i + self.n;
                if rows[i].commutes_with(&rows[j]) == paired {
                    return false;
                }
            }
        }
        true
    }

    /// Outcome of measuring qubit `q` in the Z basis if it is deterministic.
    pub fn deterministic_outcome(&self, q: usize) -> Option<bool> {
        let stab_mask = self.stabilizer_mask();
        if self.xs[q] & stab_mask != 0 {
            return None;
        }
        let mut acc = PauliRow { x: 0, z: 0, negative: false };
        for i in 0..self.n {
            if (self.xs[q] >> i) & 1 == 1 {
                acc = self.multiply_into(acc, self.n + i);
            }
        }
        Some(acc.negative)
    }

    /// Z-basis measurement of qubit `q`, collapsing the state.
    pub fn measure<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> bool {
        if let Some(outcome) = self.deterministic_outcome(q) {
            return outcome;
        }
        let n = self.n;
        let stab_mask = self.stabilizer_mask();
        let p = (self.xs[q] & stab_mask).trailing_zeros() as usize;
        let targets = self.xs[q] & !(1u128 << p) & self.row_mask();
        self.rowsum_many(targets, p);

        // destabilizer (p - n) <- old stabilizer p
        let d = p - n;
        for j in 0..n {
            copy_bit(&mut self.xs[j], p, d);
            copy_bit(&mut self.zs[j], p, d);
        }
        copy_bit(&mut self.signs, p, d);

        let outcome: bool = rng.gen();
        for j in 0..n {
            self.xs[j] &= !(1u128 << p);
            self.zs[j] &= !(1u128 << p);
        }
        self.zs[q] |= 1u128 << p;
        set_bit(&mut self.signs, p, outcome);
        outcome
    }

    fn row_mask(&self) -> u128 {
        if 2 * self.n == 128 {
            u128::MAX
        } else {
            (1u128 << (2 * self.n)) - 1
        }
    }

    fn stabilizer_mask(&self) -> u128 {
        self.row_mask() & !((1u128 << self.n) - 1)
    }

    // acc * row(src), tracking the sign.
    fn multiply_into(&self, acc: PauliRow, src: usize) -> PauliRow {
        let r = self.row(src);
        let mut phase = 2 * (acc.negative as i32) + 2 * (r.negative as i32);
        for q in 0..self.n {
            phase += g(
                (r.x >> q) & 1 == 1,
                (r.z >> q) & 1 == 1,
                (acc.x >> q) & 1 == 1,
                (acc.z >> q) & 1 == 1,
            );
        }
        PauliRow { x: acc.x ^ r.x, z: acc.z ^ r.z, negative: phase.rem_euclid(4) == 2 }
    }

    // For every row h in `targets`: row h <- row h * row src. Bit-sliced over
    // rows with a two-plane mod-4 phase counter.
    fn rowsum_many(&mut self, targets: u128, src: usize) {
        let mut lo = 0u128;
        let mut hi = 0u128;
        for j in 0..self.n {
            let x1 = (self.xs[j] >> src) & 1 == 1;
            let z1 = (self.zs[j] >> src) & 1 == 1;
            if !x1 && !z1 {
                continue;
            }
            let x2 = self.xs[j] & targets;
            let z2 = self.zs[j] & targets;
            let (plus, minus) = match (x1, z1) {
                (true, true) => (z2 & !x2, x2 & !z2),
                (true, false) => (z2 & x2, z2 & !x2),
                _ => (x2 & !z2, x2 & z2),
            };
            let carry = lo & plus;
            lo ^= plus;
            hi ^= carry;
            let borrow = !lo & minus;
            lo ^= minus;
            hi ^= borrow;
            if x1 {
                self.xs[j] ^= targets;
            }
            if z1 {
                self.zs[j] ^= targets;
            }
        }
        let src_sign = if (self.signs >> src) & 1 == 1 { targets } else { 0 };
        self.signs ^= (hi ^ src_sign) & targets;
    }
}

fn copy_bit(word: &mut u128, from: usize, to: usize) {
    let bit = (*word >> from) & 1 == 1;
    set_bit(word, to, bit);
}

fn set_bit(word: &mut u128, at: usize, value: bool) {
    if value {
        *word |= 1u128 << at;
    } else {
        *word &= !(1u128 << at);
    }
}
