//! Zero-noise extrapolation: run folded copies of a circuit at several noise
//! scale factors and combine the results linearly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{fold_global, insert_rotation_barriers, BarrierStatus, Circuit, CircuitError};
use crate::engine::{EngineError, ExpectationEstimate, Executor};
use crate::rng::StreamSeed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZneError {
    #[error("scale factors must be distinct, {0} appears twice")]
    DegenerateNodes(f64),
    #[error("need at least two scale factors, got {0}")]
    TooFewNodes(usize),
    #[error("{nodes} scale factors but {values} values")]
    LengthMismatch { nodes: usize, values: usize },
    #[error("{0} shots cannot be split across {1} scale factors")]
    TooFewShots(u64, usize),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("execution at scale factor {scale} failed: {source}")]
    Executor { scale: f64, source: EngineError },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extrapolator {
    Linear,
    Richardson,
}

impl Extrapolator {
    pub fn name(self) -> &'static str {
        match self {
            Extrapolator::Linear => "linear",
            Extrapolator::Richardson => "richardson",
        }
    }

    pub fn coefficients(self, scale_factors: &[f64]) -> Result<Vec<f64>, ZneError> {
        match self {
            Extrapolator::Linear => linear_coefficients(scale_factors),
            Extrapolator::Richardson => richardson_coefficients(scale_factors),
        }
    }
}

fn check_nodes(nodes: &[f64]) -> Result<(), ZneError> {
    if nodes.len() < 2 {
        return Err(ZneError::TooFewNodes(nodes.len()));
    }
    for (i, a) in nodes.iter().enumerate() {
        if nodes[..i].contains(a) {
            return Err(ZneError::DegenerateNodes(*a));
        }
    }
    Ok(())
}

/// `η_i = Π_{j≠i} λ_j / (λ_j − λ_i)`: Lagrange interpolation evaluated at 0.
pub fn richardson_coefficients(nodes: &[f64]) -> Result<Vec<f64>, ZneError> {
    check_nodes(nodes)?;
    Ok(nodes
        .iter()
        .enumerate()
        .map(|(i, &li)| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &lj)| lj / (lj - li))
                .product()
        })
        .collect())
}

/// Weights giving the intercept of the least-squares line:
/// `η_i = 1/k − λ̄ (λ_i − λ̄) / Σ_j (λ_j − λ̄)²`.
pub fn linear_coefficients(nodes: &[f64]) -> Result<Vec<f64>, ZneError> {
    check_nodes(nodes)?;
    let k = nodes.len() as f64;
    let mean = nodes.iter().sum::<f64>() / k;
    let mut dev: Vec<f64> = nodes.iter().map(|l| l - mean).collect();
    let drift = dev.iter().sum::<f64>() / k;
    dev.iter_mut().for_each(|d| *d -= drift);
    let s: f64 = dev.iter().map(|d| d * d).sum();
    Ok(dev.iter().map(|d| 1.0 / k - mean * d / s).collect())
}

pub fn linear_intercept(nodes: &[f64], values: &[f64]) -> Result<f64, ZneError> {
    combine(&linear_coefficients(nodes)?, values)
}

pub fn richardson_extrapolate(nodes: &[f64], values: &[f64]) -> Result<f64, ZneError> {
    combine(&richardson_coefficients(nodes)?, values)
}

fn combine(coefficients: &[f64], values: &[f64]) -> Result<f64, ZneError> {
    if coefficients.len() != values.len() {
        return Err(ZneError::LengthMismatch { nodes: coefficients.len(), values: values.len() });
    }
    Ok(coefficients.iter().zip(values).map(|(e, v)| e * v).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZneConfig {
    pub scale_factors: Vec<f64>,
    pub extrapolator: Extrapolator,
    /// Total shot budget N, split evenly across scale factors.
    pub shots: u64,
    /// Rotation-barrier magnitude; `None` disables barriers.
    pub barrier_angle: Option<f64>,
}

impl ZneConfig {
    pub fn new(extrapolator: Extrapolator) -> Self {
        Self { scale_factors: vec![1.0, 2.0, 3.0], extrapolator, shots: 10_000, barrier_angle: None }
    }

    pub fn shots_per_scale(&self) -> u64 {
        self.shots / self.scale_factors.len() as u64
    }

    pub fn validate(&self) -> Result<(), ZneError> {
        check_nodes(&self.scale_factors)?;
        if let Some(&bad) = self.scale_factors.iter().find(|l| !l.is_finite() || **l < 1.0) {
            return Err(CircuitError::InvalidScaleFactor(bad).into());
        }
        if self.shots_per_scale() == 0 {
            return Err(ZneError::TooFewShots(self.shots, self.scale_factors.len()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZneOutcome {
    /// Extrapolated value `Σ η_i A′(λ_i)`. Not clipped to [0, 1].
    pub value: f64,
    pub estimates: Vec<ExpectationEstimate>,
    pub coefficients: Vec<f64>,
    pub shots_per_scale: u64,
    /// Shots actually consumed, `k ⌊N/k⌋`.
    pub total_shots: u64,
    pub barriers: Vec<BarrierStatus>,
    pub out_of_range: bool,
}

/// The circuit executed at scale factor `scale`.
pub fn scaled_circuit(
    circuit: &Circuit,
    scale: f64,
    barrier_angle: Option<f64>,
    seed: StreamSeed,
) -> Result<(Circuit, Option<BarrierStatus>), CircuitError> {
    let folded = fold_global(circuit, scale)?;
    match barrier_angle {
        Some(_) if folded.barriers().is_empty() => Ok((folded, Some(BarrierStatus::Inserted(0)))),
        Some(angle) => {
            let (c, status) = insert_rotation_barriers(&folded, angle, &mut seed.rng())?;
            Ok((c, Some(status)))
        }
        None => Ok((folded, None)),
    }
}

/// Runs every scale factor with `⌊N/k⌋` shots and extrapolates.
pub fn execute_zne<E: Executor + ?Sized>(
    circuit: &Circuit,
    executor: &E,
    config: &ZneConfig,
    seed: StreamSeed,
) -> Result<ZneOutcome, ZneError> {
    config.validate()?;
    let coefficients = config.extrapolator.coefficients(&config.scale_factors)?;
    let per_scale = config.shots_per_scale();
    let runs = config
        .scale_factors
        .par_iter()
        .enumerate()
        .map(|(i, &scale)| {
            let (c, status) = scaled_circuit(circuit, scale, config.barrier_angle, seed.derive_path(&[i as u64, 1]))?;
            let est = executor
                .execute(&c, per_scale, seed.derive_path(&[i as u64, 0]))
                .map_err(|source| ZneError::Executor { scale, source })?;
            Ok((est, status))
        })
        .collect::<Result<Vec<_>, ZneError>>()?;
    let (estimates, barriers): (Vec<_>, Vec<_>) = runs.into_iter().unzip();
    let values: Vec<f64> = estimates.iter().map(|e| e.value).collect();
    let value = combine(&coefficients, &values)?;
    Ok(ZneOutcome {
        value,
        estimates,
        coefficients,
        shots_per_scale: per_scale,
        total_shots: per_scale * config.scale_factors.len() as u64,
        barriers: barriers.into_iter().flatten().collect(),
        out_of_range: !(0.0..=1.0).contains(&value),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;

    #[test]
    fn richardson_examples() {
        assert_eq!(richardson_coefficients(&[1.0, 2.0, 3.0]).unwrap(), vec![3.0, -3.0, 1.0]);
        assert_eq!(richardson_coefficients(&[1.0, 2.0]).unwrap(), vec![2.0, -1.0]);
        assert_eq!(richardson_coefficients(&[1.0, 2.0, 1.0]), Err(ZneError::DegenerateNodes(1.0)));
        assert_eq!(richardson_coefficients(&[1.0]), Err(ZneError::TooFewNodes(1)));
    }

    #[test]
    fn linear_examples() {
        let l = [1.0, 2.0, 3.0];
        let eta = linear_coefficients(&l).unwrap();
        assert_relative_eq!(eta[0], 4.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(eta[1], 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(eta[2], -2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(linear_intercept(&l, &[0.9, 0.8, 0.7]).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(linear_intercept(&l, &[0.4, 0.4, 0.4]).unwrap(), 0.4, epsilon = 1e-12);
        assert_relative_eq!(linear_intercept(&l, &[0.95, 0.80, 0.71]).unwrap(), 1.06, epsilon = 1e-12);
        assert_eq!(
            linear_intercept(&l, &[1.0, 2.0]),
            Err(ZneError::LengthMismatch { nodes: 3, values: 2 })
        );
    }

    // Intercept of the least-squares line solved directly with an SVD.
    fn lstsq_intercept(nodes: &[f64], values: &[f64]) -> f64 {
        let a = DMatrix::from_fn(nodes.len(), 2, |r, c| if c == 0 { 1.0 } else { nodes[r] });
        let b = DVector::from_column_slice(values);
        a.svd(true, true).solve(&b, 1e-14).unwrap()[0]
    }

    fn distinct_nodes() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::btree_set(1u32..400, 2..6)
            .prop_map(|s| s.into_iter().map(|v| 1.0 + v as f64 / 40.0).collect())
    }

    proptest! {
        #[test]
        fn richardson_nodal_identities(nodes in distinct_nodes()) {
            let eta = richardson_coefficients(&nodes).unwrap();
            for m in 0..nodes.len() as i32 {
                let s: f64 = eta.iter().zip(&nodes).map(|(e, l)| e * l.powi(m)).sum();
                let want = if m == 0 { 1.0 } else { 0.0 };
                let scale: f64 = eta.iter().zip(&nodes).map(|(e, l)| (e * l.powi(m)).abs()).sum();
                prop_assert!((s - want).abs() <= 1e-10 * scale.max(1.0), "m={} s={}", m, s);
            }
        }

        #[test]
        fn linear_matches_least_squares(nodes in distinct_nodes(), seed in any::<u64>()) {
            let values: Vec<f64> = nodes.iter().enumerate()
                .map(|(i, _)| ((seed >> (i * 8)) & 0xff) as f64 / 255.0).collect();
            let mine = linear_intercept(&nodes, &values).unwrap();
            prop_assert!((mine - lstsq_intercept(&nodes, &values)).abs() < 1e-8);
            let eta = linear_coefficients(&nodes).unwrap();
            let scale: f64 = eta.iter().map(|e| e.abs()).sum();
            prop_assert!((eta.iter().sum::<f64>() - 1.0).abs() < 1e-14 * scale.max(1.0) * nodes.len() as f64);
        }
    }

    struct Polynomial(f64, f64, f64);

    impl Executor for Polynomial {
        fn execute(&self, c: &Circuit, shots: u64, _: StreamSeed) -> Result<ExpectationEstimate, EngineError> {
            // the fold ratio recovers λ exactly for these circuit lengths
            let base = 6.0;
            let l = c.len() as f64 / base;
            Ok(ExpectationEstimate { value: self.0 + self.1 * l + self.2 * l * l, std_error: 0.0, shots })
        }
    }

    fn six_gate_circuit() -> Circuit {
        use crate::circuit::{Gate, GateKind};
        Circuit::from_gates(2, (0..6).map(|i| Gate::single(GateKind::H, i % 2))).unwrap()
    }

    #[test]
    fn extrapolation_on_synthetic_executor() {
        let c = six_gate_circuit();
        let mut cfg = ZneConfig::new(Extrapolator::Richardson);
        let out = execute_zne(&c, &Polynomial(0.9, -0.07, 0.004), &cfg, StreamSeed::new(1)).unwrap();
        assert!((out.value - 0.9).abs() < 1e-9);
        assert_eq!(out.shots_per_scale, 3333);
        assert_eq!(out.total_shots, 9999);
        let recombined: f64 = out.coefficients.iter().zip(&out.estimates).map(|(e, a)| e * a.value).sum();
        assert!((recombined - out.value).abs() < 1e-12);

        cfg.extrapolator = Extrapolator::Linear;
        let out = execute_zne(&c, &Polynomial(0.8, -0.1, 0.0), &cfg, StreamSeed::new(1)).unwrap();
        assert!((out.value - 0.8).abs() < 1e-12);
        assert!(!out.out_of_range);
    }

    #[test]
    fn barriers_are_reported() {
        let c = six_gate_circuit();
        let mut cfg = ZneConfig::new(Extrapolator::Linear);
        cfg.barrier_angle = Some(1e-4);
        cfg.shots = 30;
        let out = execute_zne(&c, &Polynomial(1.0, 0.0, 0.0), &cfg, StreamSeed::new(2)).unwrap();
        assert_eq!(
            out.barriers,
            vec![BarrierStatus::Inserted(0), BarrierStatus::Inserted(2), BarrierStatus::Inserted(2)]
        );
        cfg.shots = 2;
        assert_eq!(
            execute_zne(&c, &Polynomial(1.0, 0.0, 0.0), &cfg, StreamSeed::new(2)),
            Err(ZneError::TooFewShots(2, 3))
        );
    }
}
