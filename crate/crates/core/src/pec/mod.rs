//! Probabilistic error cancellation under local depolarizing noise.
//!
//! Each noisy two-qubit gate `(D_p ⊗ D_p) ∘ G` is inverted by following it
//! with a random Pauli pair drawn from the quasi-probability expansion of
//! `D_p⁻¹ ⊗ D_p⁻¹`. Single-qubit gates are left alone.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, CircuitError, Gate, GateKind};
use crate::engine::tableau::Pauli;
use crate::engine::{EngineError, Executor};
use crate::noise::{local_depol_param, NoiseError, NoiseModel};
use crate::rng::StreamSeed;

pub mod ptm;

pub const DEFAULT_SAMPLES: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PecError {
    #[error("depolarizing parameter {0} >= 3/4 gives a non-invertible channel")]
    NonInvertible(f64),
    #[error("depolarizing parameter {0} must be finite and non-negative")]
    InvalidParameter(f64),
    #[error("`{0}` is not a two-qubit gate")]
    NotTwoQubit(String),
    #[error("no representation for two-qubit gate at position {0}")]
    MissingRepresentation(usize),
    #[error("{shots} shots cannot be split across {samples} samples")]
    TooFewShots { shots: u64, samples: usize },
    #[error("no samples to combine")]
    EmptySamples,
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("execution of sample {sample} failed: {source}")]
    Executor { sample: usize, source: EngineError },
}

/// The noisy gate followed by `paulis[0] ⊗ paulis[1]` on its targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PecTerm {
    pub coefficient: f64,
    pub paulis: [Pauli; 2],
}

fn pauli_gate(p: Pauli, q: usize) -> Option<Gate> {
    let kind = match p {
        Pauli::I => return None,
        Pauli::X => GateKind::X,
        Pauli::Y => GateKind::Y,
        Pauli::Z => GateKind::Z,
    };
    Some(Gate::single(kind, q))
}

/// Quasi-probability representation of one ideal two-qubit gate.
#[derive(Debug, Clone, PartialEq)]
pub struct OperationRepresentation {
    gate: Gate,
    p: f64,
    terms: Vec<PecTerm>,
    one_norm: f64,
}

impl OperationRepresentation {
    pub fn gate(&self) -> &Gate {
        &self.gate
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn terms(&self) -> &[PecTerm] {
        &self.terms
    }

    /// γ = Σ |η_α|.
    pub fn one_norm(&self) -> f64 {
        self.one_norm
    }

    pub fn fragment(&self, term: &PecTerm) -> Vec<Gate> {
        let t = self.gate.targets();
        std::iter::once(self.gate)
            .chain(pauli_gate(term.paulis[0], t[0]))
            .chain(pauli_gate(term.paulis[1], t[1]))
            .collect()
    }

    /// Draws a term with probability `|η_α| / γ`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &PecTerm {
        let mut u = rng.gen::<f64>() * self.one_norm;
        for t in &self.terms {
            u -= t.coefficient.abs();
            if u < 0.0 {
                return t;
            }
        }
        self.terms.last().expect("at least one term")
    }
}

/// Single-qubit inverse-depolarizing coefficients `(η_I, η_X = η_Y = η_Z)`.
pub fn inverse_depolarizing_coefficients(p: f64) -> Result<(f64, f64), PecError> {
    if !p.is_finite() || p < 0.0 {
        return Err(PecError::InvalidParameter(p));
    }
    if p >= 0.75 {
        return Err(PecError::NonInvertible(p));
    }
    let f = 1.0 - 4.0 * p / 3.0;
    Ok(((1.0 - p / 3.0) / f, -(p / 3.0) / f))
}

/// `γ = ((1 + 2p/3) / (1 − 4p/3))²`.
pub fn one_norm_closed_form(p: f64) -> f64 {
    ((1.0 + 2.0 * p / 3.0) / (1.0 - 4.0 * p / 3.0)).powi(2)
}

pub fn represent_2q_gate(gate: &Gate, p: f64) -> Result<OperationRepresentation, PecError> {
    if !gate.is_two_qubit() {
        return Err(PecError::NotTwoQubit(gate.to_string()));
    }
    let (eta_i, eta_p) = inverse_depolarizing_coefficients(p)?;
    let single = [(Pauli::I, eta_i), (Pauli::X, eta_p), (Pauli::Y, eta_p), (Pauli::Z, eta_p)];
    let mut terms = Vec::with_capacity(16);
    for &(a, ea) in &single {
        for &(b, eb) in &single {
            let coefficient = ea * eb;
            if coefficient != 0.0 {
                terms.push(PecTerm { coefficient, paulis: [a, b] });
            }
        }
    }
    let one_norm = terms.iter().map(|t| t.coefficient.abs()).sum();
    Ok(OperationRepresentation { gate: *gate, p, terms, one_norm })
}

/// Where the depolarizing parameter of each representation comes from.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseSource {
    /// The model's own parameter for the gate's edge.
    #[default]
    Matched,
    /// One parameter from the model's average two-qubit error rate.
    UniformAverage,
    /// A fixed parameter regardless of the model.
    Fixed(f64),
}

/// Representations for every two-qubit gate of a circuit, by gate position.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitRepresentations {
    reps: Vec<Option<OperationRepresentation>>,
}

impl CircuitRepresentations {
    pub fn get(&self, position: usize) -> Option<&OperationRepresentation> {
        self.reps.get(position).and_then(Option::as_ref)
    }

    pub fn len(&self) -> usize {
        self.reps.iter().flatten().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Product of the per-gate one-norms.
    pub fn gamma_total(&self) -> f64 {
        self.reps.iter().flatten().map(|r| r.one_norm).product()
    }
}

pub fn build_representations(
    circuit: &Circuit,
    model: &NoiseModel,
    source: NoiseSource,
) -> Result<CircuitRepresentations, PecError> {
    let uniform = match source {
        NoiseSource::Matched => None,
        NoiseSource::UniformAverage => Some(local_depol_param(model.average_two_qubit_error_rate())?),
        NoiseSource::Fixed(p) => Some(p),
    };
    let reps = circuit
        .gates()
        .iter()
        .map(|g| {
            if !g.is_two_qubit() {
                return Ok(None);
            }
            let t = g.targets();
            let p = match uniform {
                Some(p) => p,
                None => model.two_qubit_param(t[0], t[1])?,
            };
            represent_2q_gate(g, p).map(Some)
        })
        .collect::<Result<Vec<_>, PecError>>()?;
    Ok(CircuitRepresentations { reps })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PecSample {
    pub circuit: Circuit,
    pub sign: i8,
}

/// Draws `k` circuits, sampling a term independently for every two-qubit
/// gate of every sample. Returns the samples and `γ_total`.
pub fn sample_pec_circuits<R: Rng + ?Sized>(
    circuit: &Circuit,
    reps: &CircuitRepresentations,
    k: usize,
    rng: &mut R,
) -> Result<(Vec<PecSample>, f64), PecError> {
    for (i, g) in circuit.gates().iter().enumerate() {
        if g.is_two_qubit() && reps.get(i).is_none() {
            return Err(PecError::MissingRepresentation(i));
        }
    }
    let mut samples = Vec::with_capacity(k);
    for _ in 0..k {
        let mut out = Circuit::new(circuit.n_qubits())?;
        let mut sign = 1i8;
        for (i, g) in circuit.gates().iter().enumerate() {
            match reps.get(i) {
                Some(rep) if g.is_two_qubit() => {
                    let term = rep.sample(rng);
                    if term.coefficient < 0.0 {
                        sign = -sign;
                    }
                    out.extend(rep.fragment(term))?;
                }
                _ => out.push(*g)?,
            }
        }
        samples.push(PecSample { circuit: out, sign });
    }
    Ok((samples, reps.gamma_total()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PecOutcome {
    /// `γ_total · mean(sign_i · A′_i)`. Not clipped to [0, 1].
    pub value: f64,
    pub gamma: f64,
    pub samples: usize,
    pub signed_estimates: Vec<f64>,
    pub shots_per_sample: u64,
    pub total_shots: u64,
    pub out_of_range: bool,
}

pub fn pec_estimate(signed_estimates: &[f64], gamma: f64, shots_per_sample: u64) -> Result<PecOutcome, PecError> {
    if signed_estimates.is_empty() {
        return Err(PecError::EmptySamples);
    }
    let k = signed_estimates.len();
    let value = gamma * signed_estimates.iter().sum::<f64>() / k as f64;
    Ok(PecOutcome {
        value,
        gamma,
        samples: k,
        signed_estimates: signed_estimates.to_vec(),
        shots_per_sample,
        total_shots: shots_per_sample * k as u64,
        out_of_range: !(0.0..=1.0).contains(&value),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PecConfig {
    pub samples: usize,
    /// Total shot budget N; each sample runs `⌊N/k⌋` shots.
    pub shots: u64,
    pub noise_source: NoiseSource,
}

impl Default for PecConfig {
    fn default() -> Self {
        Self { samples: DEFAULT_SAMPLES, shots: 10_000, noise_source: NoiseSource::Matched }
    }
}

/// Samples, executes and combines `k` PEC circuits.
pub fn execute_pec<E: Executor + ?Sized>(
    circuit: &Circuit,
    executor: &E,
    model: &NoiseModel,
    config: &PecConfig,
    seed: StreamSeed,
) -> Result<PecOutcome, PecError> {
    if config.samples == 0 {
        return Err(PecError::EmptySamples);
    }
    let per_sample = config.shots / config.samples as u64;
    if per_sample == 0 {
        return Err(PecError::TooFewShots { shots: config.shots, samples: config.samples });
    }
    let reps = build_representations(circuit, model, config.noise_source)?;
    let (samples, gamma) = sample_pec_circuits(circuit, &reps, config.samples, &mut seed.derive(0).rng())?;
    let signed = samples
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            executor
                .execute(&s.circuit, per_sample, seed.derive_path(&[1, i as u64]))
                .map(|e| f64::from(s.sign) * e.value)
                .map_err(|source| PecError::Executor { sample: i, source })
        })
        .collect::<Result<Vec<f64>, PecError>>()?;
    pec_estimate(&signed, gamma, per_sample)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::build_depolarizing_model;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn noiseless_representation_is_trivial() {
        let rep = represent_2q_gate(&Gate::cnot(0, 1), 0.0).unwrap();
        assert_eq!(rep.terms().len(), 1);
        assert_eq!(rep.terms()[0].coefficient, 1.0);
        assert_eq!(rep.fragment(&rep.terms()[0]), vec![Gate::cnot(0, 1)]);
        assert_eq!(rep.one_norm(), 1.0);
    }

    #[test]
    fn one_norm_at_one_percent() {
        let rep = represent_2q_gate(&Gate::cnot(0, 1), 0.01).unwrap();
        assert_eq!(rep.terms().len(), 16);
        assert_relative_eq!(rep.one_norm(), one_norm_closed_form(0.01), epsilon = 1e-14);
        assert_relative_eq!(rep.one_norm(), 1.040_95, epsilon = 1e-5);
        let sum: f64 = rep.terms().iter().map(|t| t.coefficient).sum();
        assert_relative_eq!(sum, 1.0, epsilon = 1e-12);
        let ii = rep.terms()[0].coefficient;
        // identity pair is drawn with probability (|η_I| / γ_1)², γ_1 the single-qubit norm
        let (eta_i, eta_p) = inverse_depolarizing_coefficients(0.01).unwrap();
        let single = eta_i / (eta_i + 3.0 * eta_p.abs());
        assert_relative_eq!(ii.abs() / rep.one_norm(), single * single, epsilon = 1e-14);
        assert_relative_eq!(ii.abs() / rep.one_norm(), 0.980_231, epsilon = 1e-6);
        assert_eq!(represent_2q_gate(&Gate::cnot(0, 1), 0.75), Err(PecError::NonInvertible(0.75)));
        assert!(represent_2q_gate(&Gate::single(GateKind::H, 0), 0.01).is_err());
    }

    proptest! {
        #[test]
        fn coefficients_normalized_and_one_norm_increasing(p in 0.0f64..0.74, dp in 1e-6f64..0.01) {
            let rep = represent_2q_gate(&Gate::cz(1, 0), p).unwrap();
            let sum: f64 = rep.terms().iter().map(|t| t.coefficient).sum();
            prop_assert!((sum - 1.0).abs() < 1e-12 * rep.one_norm());
            prop_assert!(rep.one_norm() >= 1.0);
            let q = (p + dp).min(0.7499);
            if q > p {
                prop_assert!(one_norm_closed_form(q) > one_norm_closed_form(p));
            }
        }
    }

    #[test]
    fn three_cnot_gamma_total() {
        let c = Circuit::from_gates(
            3,
            [Gate::cnot(0, 1), Gate::single(GateKind::H, 2), Gate::cnot(1, 2), Gate::cnot(0, 2)],
        )
        .unwrap();
        let reps = build_representations(&c, &build_depolarizing_model(0.01, 3).unwrap(), NoiseSource::Matched)
            .unwrap();
        assert_eq!(reps.len(), 3);
        assert_relative_eq!(reps.gamma_total(), one_norm_closed_form(0.01).powi(3), epsilon = 1e-14);
        assert_relative_eq!(reps.gamma_total(), 1.1280, epsilon = 1e-4);
        let trivial =
            build_representations(&c, &NoiseModel::noiseless(3), NoiseSource::Matched).unwrap();
        assert_eq!(trivial.gamma_total(), 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (samples, gamma) = sample_pec_circuits(&c, &trivial, 5, &mut rng).unwrap();
        assert_eq!(gamma, 1.0);
        assert!(samples.iter().all(|s| s.sign == 1 && s.circuit == c));
    }

    #[test]
    fn negative_sign_fraction() {
        let c = Circuit::from_gates(2, [Gate::cnot(0, 1), Gate::cnot(1, 0)]).unwrap();
        let reps = build_representations(&c, &build_depolarizing_model(0.05, 2).unwrap(), NoiseSource::Matched)
            .unwrap();
        let k = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (samples, gamma) = sample_pec_circuits(&c, &reps, k, &mut rng).unwrap();
        let negative = samples.iter().filter(|s| s.sign < 0).count() as f64 / k as f64;
        let expected = (1.0 - 1.0 / gamma) / 2.0;
        let sigma = (expected * (1.0 - expected) / k as f64).sqrt();
        assert!((negative - expected).abs() < 5.0 * sigma, "{negative} vs {expected}");
    }

    #[test]
    fn estimator_examples() {
        let out = pec_estimate(&[1.0; 4], 1.0, 100).unwrap();
        assert_eq!(out.value, 1.0);
        assert_eq!(out.total_shots, 400);
        let out = pec_estimate(&[0.8643], 1.1280, 100).unwrap();
        assert_relative_eq!(out.value, 0.9749, epsilon = 1e-4);
        assert_eq!(pec_estimate(&[], 1.0, 1), Err(PecError::EmptySamples));
    }

    #[test]
    fn noise_sources() {
        let cal = crate::noise::CalibrationData::bundled("lima").unwrap();
        let model = crate::noise::build_calibration_model(&cal).unwrap();
        let c = Circuit::from_gates(5, [Gate::cnot(0, 1), Gate::cnot(3, 4)]).unwrap();
        let matched = build_representations(&c, &model, NoiseSource::Matched).unwrap();
        assert_relative_eq!(matched.get(0).unwrap().p(), local_depol_param(1.026e-2).unwrap());
        assert_relative_eq!(matched.get(1).unwrap().p(), local_depol_param(1.570e-2).unwrap());
        let avg = build_representations(&c, &model, NoiseSource::UniformAverage).unwrap();
        assert_eq!(avg.get(0).unwrap().p(), avg.get(1).unwrap().p());
        let fixed = build_representations(&c, &model, NoiseSource::Fixed(0.02)).unwrap();
        assert_eq!(fixed.get(1).unwrap().p(), 0.02);
        let bad = Circuit::from_gates(5, [Gate::cnot(2, 3)]).unwrap();
        assert!(matches!(
            build_representations(&bad, &model, NoiseSource::Matched),
            Err(PecError::Noise(NoiseError::IncompleteCalibration(_)))
        ));
    }
}
