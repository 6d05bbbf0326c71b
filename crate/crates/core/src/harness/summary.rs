use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::circuit::BenchmarkKind;
use crate::metrics::{improvement_factor_aggregate, rmse, ImprovementFactor, MetricsError, ProblemResult};

use super::{ExperimentRecord, Technique};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthSummary {
    pub depth: usize,
    pub noisy_mean: f64,
    pub mitigated_mean: f64,
    pub noisy_rmse: f64,
    pub mitigated_rmse: f64,
    pub mean_cnot_count: f64,
    pub improvement_factor: ImprovementFactor,
}

/// Per-depth and pooled improvement factors of one record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub platform: String,
    pub technique: Technique,
    pub circuit: BenchmarkKind,
    pub n_qubits: usize,
    pub shots: u64,
    pub mitigated_shots: u64,
    pub columns: usize,
    pub depths: Vec<DepthSummary>,
    /// Pooled over every depth and column.
    pub aggregate: ImprovementFactor,
    /// Depths whose improvement factor has no finite value.
    pub flagged_depths: Vec<usize>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn problems(record: &ExperimentRecord, row: usize) -> Result<Vec<ProblemResult>, MetricsError> {
    (0..record.columns())
        .map(|c| {
            ProblemResult::new(
                record.true_values[row][c],
                vec![record.noisy_values[row][c]],
                vec![record.mitigated_values[row][c]],
                record.shots,
                record.mitigated_shots(),
            )
        })
        .collect()
}

pub fn summarize(record: &ExperimentRecord) -> Result<Summary, MetricsError> {
    let mut depths = Vec::with_capacity(record.depths.len());
    let mut pooled = Vec::new();
    for (row, &depth) in record.depths.iter().enumerate() {
        let ps = problems(record, row)?;
        let ideal = mean(&record.true_values[row]);
        let counts: Vec<f64> = record.cnot_counts[row].iter().map(|&c| c as f64).collect();
        depths.push(DepthSummary {
            depth,
            noisy_mean: mean(&record.noisy_values[row]),
            mitigated_mean: mean(&record.mitigated_values[row]),
            noisy_rmse: rmse(&record.noisy_values[row], ideal)?,
            mitigated_rmse: rmse(&record.mitigated_values[row], ideal)?,
            mean_cnot_count: mean(&counts),
            improvement_factor: improvement_factor_aggregate(&ps)?,
        });
        pooled.extend(ps);
    }
    let flagged_depths =
        depths.iter().filter(|d| d.improvement_factor.value().is_none()).map(|d| d.depth).collect();
    Ok(Summary {
        platform: record.platform.clone(),
        technique: record.technique,
        circuit: record.circuit,
        n_qubits: record.n_qubits,
        shots: record.shots,
        mitigated_shots: record.mitigated_shots(),
        columns: record.columns(),
        depths,
        aggregate: improvement_factor_aggregate(&pooled)?,
        flagged_depths,
    })
}

pub const SUMMARY_CSV_HEADER: &str =
    "depth,noisy_mean,mitigated_mean,noisy_rmse,mitigated_rmse,mean_cnot_count,improvement_factor";

impl Summary {
    /// One row per depth; non-finite improvement factors are written as
    /// `unbounded` or `indeterminate`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(SUMMARY_CSV_HEADER);
        out.push('\n');
        for d in &self.depths {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                d.depth,
                d.noisy_mean,
                d.mitigated_mean,
                d.noisy_rmse,
                d.mitigated_rmse,
                d.mean_cnot_count,
                d.improvement_factor
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }

    pub fn render_table(&self) -> String {
        let mut out = format!(
            "{} {} on {} ({} qubits, N={}, N_QEM={}, {} columns)\n",
            self.technique, self.circuit.name(), self.platform, self.n_qubits, self.shots, self.mitigated_shots, self.columns
        );
        let _ = writeln!(out, "{:>6} {:>10} {:>10} {:>8} {:>14}", "depth", "noisy", "mitigated", "cnots", "mu");
        for d in &self.depths {
            let mu = match d.improvement_factor {
                ImprovementFactor::Finite(v) => format!("{v:.4}"),
                other => format!("{other} !"),
            };
            let _ = writeln!(
                out,
                "{:>6} {:>10.5} {:>10.5} {:>8.1} {:>14}",
                d.depth, d.noisy_mean, d.mitigated_mean, d.mean_cnot_count, mu
            );
        }
        let agg = match self.aggregate {
            ImprovementFactor::Finite(v) => format!("{v:.4}"),
            other => other.to_string(),
        };
        let _ = writeln!(out, "{:>6} {:>41}", "all", agg);
        if !self.flagged_depths.is_empty() {
            let _ = writeln!(out, "! improvement factor not finite at depths {:?}", self.flagged_depths);
        }
        out
    }
}
