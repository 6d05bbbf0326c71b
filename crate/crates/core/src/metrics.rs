//! Error metrics comparing unmitigated and mitigated estimates.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("no values")]
    Empty,
    #[error("{noisy} noisy trials but {mitigated} mitigated trials")]
    TrialMismatch { noisy: usize, mitigated: usize },
    #[error("shot counts must be positive")]
    ZeroShots,
    #[error("pooled problems use different shot budgets ({0} vs {1})")]
    InconsistentShots(String, String),
    #[error("unmitigated value equals the ideal value; relative error undefined")]
    ZeroDenominator,
}

/// Ideal value plus `t` unmitigated and `t` mitigated trials of one problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemResult {
    pub ideal: f64,
    pub noisy: Vec<f64>,
    pub mitigated: Vec<f64>,
    pub shots: u64,
    pub mitigated_shots: u64,
}

impl ProblemResult {
    pub fn new(
        ideal: f64,
        noisy: Vec<f64>,
        mitigated: Vec<f64>,
        shots: u64,
        mitigated_shots: u64,
    ) -> Result<Self, MetricsError> {
        let r = Self { ideal, noisy, mitigated, shots, mitigated_shots };
        r.validate()?;
        Ok(r)
    }

    fn validate(&self) -> Result<(), MetricsError> {
        if self.noisy.is_empty() {
            return Err(MetricsError::Empty);
        }
        if self.noisy.len() != self.mitigated.len() {
            return Err(MetricsError::TrialMismatch { noisy: self.noisy.len(), mitigated: self.mitigated.len() });
        }
        if self.shots == 0 || self.mitigated_shots == 0 {
            return Err(MetricsError::ZeroShots);
        }
        Ok(())
    }

    fn squared_errors(&self) -> (f64, f64) {
        let sq = |v: &[f64]| v.iter().map(|x| (x - self.ideal).powi(2)).sum::<f64>();
        (sq(&self.noisy), sq(&self.mitigated))
    }
}

/// Shot-normalized RMSE ratio. The ratio has no finite value when the
/// mitigated error vanishes; those cases are kept distinct from numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ImprovementFactor {
    Finite(f64),
    /// Mitigated error is zero while the unmitigated error is not.
    Unbounded,
    /// Both errors are zero.
    Indeterminate,
}

impl ImprovementFactor {
    pub fn value(self) -> Option<f64> {
        match self {
            ImprovementFactor::Finite(v) => Some(v),
            _ => None,
        }
    }

    fn from_ratio(num: f64, den: f64) -> Self {
        match (num == 0.0, den == 0.0) {
            (_, false) => ImprovementFactor::Finite(num / den),
            (false, true) => ImprovementFactor::Unbounded,
            (true, true) => ImprovementFactor::Indeterminate,
        }
    }
}

impl fmt::Display for ImprovementFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ImprovementFactor::Finite(v) => write!(f, "{v}"),
            ImprovementFactor::Unbounded => f.write_str("unbounded"),
            ImprovementFactor::Indeterminate => f.write_str("indeterminate"),
        }
    }
}

impl Serialize for ImprovementFactor {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ImprovementFactor::Finite(v) => s.serialize_f64(*v),
            other => s.collect_str(other),
        }
    }
}

impl<'de> Deserialize<'de> for ImprovementFactor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => Ok(ImprovementFactor::Finite(v)),
            Raw::Text(t) if t == "unbounded" => Ok(ImprovementFactor::Unbounded),
            Raw::Text(t) if t == "indeterminate" => Ok(ImprovementFactor::Indeterminate),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("bad improvement factor `{t}`"))),
        }
    }
}

/// `sqrt(mean((v - ideal)^2))`.
pub fn rmse(values: &[f64], ideal: f64) -> Result<f64, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::Empty);
    }
    Ok((values.iter().map(|v| (v - ideal).powi(2)).sum::<f64>() / values.len() as f64).sqrt())
}

pub fn improvement_factor_problem(r: &ProblemResult) -> Result<ImprovementFactor, MetricsError> {
    improvement_factor_aggregate(std::slice::from_ref(r))
}

/// Pooled improvement factor over several problems sharing one shot budget.
pub fn improvement_factor_aggregate(results: &[ProblemResult]) -> Result<ImprovementFactor, MetricsError> {
    let first = results.first().ok_or(MetricsError::Empty)?;
    let (mut noisy, mut mitigated) = (0.0, 0.0);
    for r in results {
        r.validate()?;
        if (r.shots, r.mitigated_shots) != (first.shots, first.mitigated_shots) {
            return Err(MetricsError::InconsistentShots(
                format!("N={}, N_QEM={}", first.shots, first.mitigated_shots),
                format!("N={}, N_QEM={}", r.shots, r.mitigated_shots),
            ));
        }
        let (n, m) = r.squared_errors();
        noisy += n;
        mitigated += m;
    }
    Ok(ImprovementFactor::from_ratio(
        (first.shots as f64 * noisy).sqrt(),
        (first.mitigated_shots as f64 * mitigated).sqrt(),
    ))
}

/// `|A_QEM − A| / |A′ − A|`.
pub fn relative_mitigation_error(mitigated: f64, noisy: f64, ideal: f64) -> Result<f64, MetricsError> {
    let den = (noisy - ideal).abs();
    if den == 0.0 {
        return Err(MetricsError::ZeroDenominator);
    }
    Ok((mitigated - ideal).abs() / den)
}
