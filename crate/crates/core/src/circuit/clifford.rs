//! The one- and two-qubit Clifford groups (modulo global phase).
//!
//! Elements are enumerated once by a shortest-path search over tableaus,
//! where a CNOT costs 1000 and any single-qubit generator costs 1. Each
//! element therefore carries a word with the minimum number of CNOTs.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::sync::OnceLock;

use rand::Rng;

use crate::engine::tableau::Tableau;

use super::{CircuitError, Gate, GateKind};

const CNOT_COST: u32 = 1000;
const ONE_QUBIT_COST: u32 = 1;

const ONE_QUBIT_GENERATORS: [GateKind; 8] = [
    GateKind::H,
    GateKind::S,
    GateKind::Sdg,
    GateKind::X,
    GateKind::Y,
    GateKind::Z,
    GateKind::SqrtX,
    GateKind::SqrtXdg,
];

#[derive(Debug, Clone, PartialEq)]
pub struct CliffordElement {
    word: Vec<Gate>,
    key: u64,
    cnot_count: usize,
}

impl CliffordElement {
    /// Gate word on local qubits `0..width`.
    pub fn gates(&self) -> &[Gate] {
        &self.word
    }

    pub fn cnot_count(&self) -> usize {
        self.cnot_count
    }
}

#[derive(Debug)]
pub struct CliffordGroup {
    width: usize,
    elements: Vec<CliffordElement>,
    index: HashMap<u64, usize>,
}

fn tableau_of<'a>(width: usize, gates: impl IntoIterator<Item = &'a Gate>) -> Tableau {
    let mut t = Tableau::new(width).expect("width 1 or 2");
    for g in gates {
        t.apply_gate(g).expect("Clifford word");
    }
    t
}

impl CliffordGroup {
    fn enumerate(width: usize) -> Self {
        let mut generators: Vec<(Gate, u32)> = Vec::new();
        for q in 0..width {
            for k in ONE_QUBIT_GENERATORS {
                generators.push((Gate::single(k, q), ONE_QUBIT_COST));
            }
        }
        if width == 2 {
            generators.push((Gate::cnot(0, 1), CNOT_COST));
            generators.push((Gate::cnot(1, 0), CNOT_COST));
        }

        // Dijkstra; ties broken by discovery order so the result is fixed.
        let start = Tableau::new(width).expect("width 1 or 2");
        let mut states: Vec<(Tableau, Option<(usize, Gate)>)> = vec![(start.clone(), None)];
        let mut best: HashMap<u64, (u32, usize)> = HashMap::from([(start.small_key(), (0, 0))]);
        let mut heap = BinaryHeap::from([Reverse((0u32, 0usize))]);
        let mut done = vec![false];
        let mut order = Vec::new();
        while let Some(Reverse((cost, id))) = heap.pop() {
            if done[id] {
                continue;
            }
            done[id] = true;
            order.push(id);
            for (g, w) in &generators {
                let mut t = states[id].0.clone();
                t.apply_gate(g).expect("generator is Clifford");
                let key = t.small_key();
                let next_cost = cost + w;
                match best.get(&key) {
                    Some(&(c, _)) if c <= next_cost => {}
                    Some(&(_, existing)) => {
                        best.insert(key, (next_cost, existing));
                        states[existing] = (t, Some((id, *g)));
                        heap.push(Reverse((next_cost, existing)));
                    }
                    None => {
                        let new_id = states.len();
                        best.insert(key, (next_cost, new_id));
                        states.push((t, Some((id, *g))));
                        done.push(false);
                        heap.push(Reverse((next_cost, new_id)));
                    }
                }
            }
        }

        let mut elements = Vec::with_capacity(order.len());
        let mut index = HashMap::with_capacity(order.len());
        for id in order {
            let mut word = Vec::new();
            let mut cur = id;
            while let Some((parent, g)) = states[cur].1 {
                word.push(g);
                cur = parent;
            }
            word.reverse();
            let key = states[id].0.small_key();
            let cnot_count = word.iter().filter(|g| g.is_two_qubit()).count();
            index.insert(key, elements.len());
            elements.push(CliffordElement { word, key, cnot_count });
        }
        Self { width, elements, index }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[CliffordElement] {
        &self.elements
    }

    /// Uniformly random element.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &CliffordElement {
        &self.elements[rng.gen_range(0..self.elements.len())]
    }

    /// The element equal to the product of `gates` (applied in order).
    pub fn identify<'a>(&self, gates: impl IntoIterator<Item = &'a Gate>) -> Option<&CliffordElement> {
        let key = tableau_of(self.width, gates).small_key();
        self.index.get(&key).map(|&i| &self.elements[i])
    }

    /// The element undoing the product of `gates`.
    pub fn inverse_of<'a>(&self, gates: impl IntoIterator<Item = &'a Gate>) -> Option<&CliffordElement> {
        let gates: Vec<&Gate> = gates.into_iter().collect();
        let inverted: Vec<Gate> = gates.iter().rev().filter_map(|g| g.inverse()).collect();
        if inverted.len() != gates.len() {
            return None;
        }
        self.identify(&inverted)
    }
}

/// The Clifford group on `width` qubits (1 or 2), built on first use.
pub fn clifford_group(width: usize) -> Result<&'static CliffordGroup, CircuitError> {
    static ONE: OnceLock<CliffordGroup> = OnceLock::new();
    static TWO: OnceLock<CliffordGroup> = OnceLock::new();
    match width {
        1 => Ok(ONE.get_or_init(|| CliffordGroup::enumerate(1))),
        2 => Ok(TWO.get_or_init(|| CliffordGroup::enumerate(2))),
        w => Err(CircuitError::UnsupportedWidth(w)),
    }
}

pub fn sample_clifford<R: Rng + ?Sized>(
    width: usize,
    rng: &mut R,
) -> Result<&'static CliffordElement, CircuitError> {
    Ok(clifford_group(width)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    // Number of 4x4 binary symplectic matrices, by brute force over rows.
    fn count_symplectic_2q() -> usize {
        let omega = |a: u8, b: u8| {
            // a, b = x0 x1 z0 z1 packed as bits 0..4
            let (ax, az, bx, bz) = (a & 3, a >> 2, b & 3, b >> 2);
            ((ax & bz).count_ones() + (az & bx).count_ones()) % 2
        };
        let mut count = 0;
        for r0 in 1..16u8 {
            for r1 in 1..16u8 {
                for r2 in 1..16u8 {
                    for r3 in 1..16u8 {
                        let rows = [r0, r1, r2, r3];
                        let ok = (0..4).all(|i| {
                            (i + 1..4).all(|j| omega(rows[i], rows[j]) == u32::from(j == i + 2))
                        });
                        count += usize::from(ok);
                    }
                }
            }
        }
        count
    }

    #[test]
    fn group_orders() {
        assert_eq!(count_symplectic_2q(), 720);
        assert_eq!(clifford_group(1).unwrap().len(), 6 * 4);
        assert_eq!(clifford_group(2).unwrap().len(), 720 * 16);
        assert!(clifford_group(3).is_err());
    }

    #[test]
    fn cnot_count_classes() {
        let g = clifford_group(2).unwrap();
        let mut classes = [0usize; 4];
        for e in g.elements() {
            classes[e.cnot_count()] += 1;
        }
        assert_eq!(classes, [576, 5184, 5184, 576]);
        let mean = g.elements().iter().map(|e| e.cnot_count()).sum::<usize>() as f64 / g.len() as f64;
        assert_eq!(mean, 1.5);
    }

    #[test]
    fn words_reproduce_their_elements() {
        for width in [1, 2] {
            let g = clifford_group(width).unwrap();
            for e in g.elements() {
                assert_eq!(g.identify(e.gates()).unwrap(), e);
                let inv = g.inverse_of(e.gates()).unwrap();
                let mut both = e.gates().to_vec();
                both.extend_from_slice(inv.gates());
                assert!(g.identify(&both).unwrap().gates().is_empty());
            }
        }
    }

    #[test]
    fn sampling_covers_the_group() {
        let g = clifford_group(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..2000 {
            seen.insert(g.sample(&mut rng).key);
        }
        assert_eq!(seen.len(), 24);
    }
}
