use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circuit::BenchmarkKind;
use crate::engine::Backend;
use crate::noise::{build_calibration_model, build_depolarizing_model, load_calibration, CalibrationData, NoiseError, NoiseModel};

use super::HarnessError;

/// Scale factors used by both ZNE variants.
pub const ZNE_SCALE_FACTORS: [f64; 3] = [1.0, 2.0, 3.0];
/// Number of sampled circuits per PEC estimate.
pub const PEC_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Technique {
    None,
    ZneLinear,
    ZneRichardson,
    Pec,
}

impl Technique {
    pub const ALL: [Technique; 4] = [Technique::None, Technique::ZneLinear, Technique::ZneRichardson, Technique::Pec];

    pub fn name(self) -> &'static str {
        match self {
            Technique::None => "none",
            Technique::ZneLinear => "zne-linear",
            Technique::ZneRichardson => "zne-richardson",
            Technique::Pec => "pec",
        }
    }

    /// The QEM component of the data directory layout.
    pub fn qem_dir(self) -> &'static str {
        match self {
            Technique::None => "none",
            Technique::ZneLinear | Technique::ZneRichardson => "zne",
            Technique::Pec => "pec",
        }
    }

    /// File-name suffix separating techniques that share a directory.
    pub fn variant(self) -> &'static str {
        match self {
            Technique::None => "none",
            Technique::ZneLinear => "linear",
            Technique::ZneRichardson => "richardson",
            Technique::Pec => "pec",
        }
    }

    pub fn from_layout(qem: &str, variant: &str) -> Option<Self> {
        Technique::ALL.into_iter().find(|t| t.qem_dir() == qem && t.variant() == variant)
    }

    pub fn is_zne(self) -> bool {
        matches!(self, Technique::ZneLinear | Technique::ZneRichardson)
    }

    /// Number of executions the shot budget is split across.
    pub fn executions(self) -> u64 {
        match self {
            Technique::None => 1,
            Technique::ZneLinear | Technique::ZneRichardson => ZNE_SCALE_FACTORS.len() as u64,
            Technique::Pec => PEC_SAMPLES as u64,
        }
    }

    /// Shots actually spent on one mitigated estimate, `k ⌊N/k⌋`.
    pub fn mitigated_shots(self, shots: u64) -> u64 {
        let k = self.executions();
        k * (shots / k)
    }
}

impl fmt::Display for Technique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Technique {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Technique::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown technique `{s}` (expected none, zne-linear, zne-richardson or pec)"))
    }
}

/// Noise model selection. Text form: `noiseless`, `depolarizing`,
/// `depolarizing:P`, `calibration:NAME` for a bundled table or
/// `calibration:PATH` for a file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum NoiseSpec {
    Noiseless,
    Depolarizing(f64),
    Calibration(String),
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec::Depolarizing(0.01)
    }
}

impl NoiseSpec {
    fn calibration(source: &str) -> Result<CalibrationData, NoiseError> {
        match CalibrationData::bundled(source) {
            Some(cal) => Ok(cal),
            None => load_calibration(PathBuf::from(source)),
        }
    }

    pub fn build(&self, n_qubits: usize) -> Result<NoiseModel, NoiseError> {
        let model = match self {
            NoiseSpec::Noiseless => NoiseModel::noiseless(n_qubits),
            NoiseSpec::Depolarizing(p) => build_depolarizing_model(*p, n_qubits)?,
            NoiseSpec::Calibration(source) => build_calibration_model(&Self::calibration(source)?)?,
        };
        model.check_width(n_qubits)?;
        Ok(model)
    }

    /// PLATFORM component of the data directory layout.
    pub fn platform(&self) -> Result<String, NoiseError> {
        Ok(match self {
            NoiseSpec::Noiseless => "noiseless".into(),
            NoiseSpec::Depolarizing(_) => "depolarizing".into(),
            NoiseSpec::Calibration(source) => {
                let name = Self::calibration(source)?.name;
                match name.as_str() {
                    "kolkata12" => "fake_kolkata".into(),
                    other => format!("fake_{other}"),
                }
            }
        })
    }
}

impl fmt::Display for NoiseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseSpec::Noiseless => f.write_str("noiseless"),
            NoiseSpec::Depolarizing(p) => write!(f, "depolarizing:{p}"),
            NoiseSpec::Calibration(s) => write!(f, "calibration:{s}"),
        }
    }
}

impl FromStr for NoiseSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        match (kind, arg) {
            ("noiseless", None) => Ok(NoiseSpec::Noiseless),
            ("depolarizing", None) => Ok(NoiseSpec::default()),
            ("depolarizing", Some(p)) => p
                .parse::<f64>()
                .map(NoiseSpec::Depolarizing)
                .map_err(|_| format!("bad depolarizing probability `{p}`")),
            ("calibration", Some(src)) if !src.is_empty() => Ok(NoiseSpec::Calibration(src.to_string())),
            _ => Err(format!(
                "bad noise spec `{s}` (expected noiseless, depolarizing[:P] or calibration:NAME|PATH)"
            )),
        }
    }
}

impl TryFrom<String> for NoiseSpec {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<NoiseSpec> for String {
    fn from(n: NoiseSpec) -> String {
        n.to_string()
    }
}

/// Everything needed to reproduce one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub circuit: BenchmarkKind,
    pub technique: Technique,
    pub n_qubits: usize,
    pub depths: Vec<usize>,
    /// Random circuit instances per depth.
    pub instances: usize,
    /// Trials per instance.
    pub trials: usize,
    /// Shot budget N of one unmitigated or mitigated estimate.
    pub shots: u64,
    pub noise: NoiseSpec,
    pub backend: Backend,
    pub seed: u64,
    /// Let the executor cancel adjacent inverse gates, and protect ZNE folds
    /// with rotation barriers.
    pub optimize: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            circuit: BenchmarkKind::Rb,
            technique: Technique::ZneRichardson,
            n_qubits: 3,
            depths: vec![1, 3, 5, 7, 9],
            instances: 4,
            trials: 1,
            shots: 10_000,
            noise: NoiseSpec::default(),
            backend: Backend::Tableau,
            seed: 0,
            optimize: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.depths.is_empty() {
            return bad("no depths given".into());
        }
        if self.depths[0] == 0 || self.depths.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("depths must be positive and strictly increasing, got {:?}", self.depths));
        }
        if self.instances == 0 || self.trials == 0 {
            return bad("instances and trials must be at least 1".into());
        }
        if self.n_qubits == 0 || (self.circuit == BenchmarkKind::Mirror && self.n_qubits < 2) {
            return bad(format!("{} circuits cannot use {} qubits", self.circuit.name(), self.n_qubits));
        }
        if self.n_qubits > self.backend.max_qubits() {
            return bad(format!(
                "{} backend supports at most {} qubits, asked for {}",
                self.backend.name(),
                self.backend.max_qubits(),
                self.n_qubits
            ));
        }
        if self.shots < self.technique.executions() {
            return bad(format!(
                "{} needs at least {} shots, got {}",
                self.technique,
                self.technique.executions(),
                self.shots
            ));
        }
        Ok(())
    }

    /// Total number of value columns per depth.
    pub fn columns(&self) -> usize {
        self.instances * self.trials
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn technique_names_round_trip() {
        for t in Technique::ALL {
            assert_eq!(t.name().parse::<Technique>().unwrap(), t);
            assert_eq!(Technique::from_layout(t.qem_dir(), t.variant()), Some(t));
        }
        assert!("zne".parse::<Technique>().is_err());
    }

    #[test]
    fn shot_accounting() {
        assert_eq!(Technique::ZneRichardson.mitigated_shots(10_000), 9_999);
        assert_eq!(Technique::Pec.mitigated_shots(10_000), 10_000);
        assert_eq!(Technique::None.mitigated_shots(10_000), 10_000);
    }

    #[test]
    fn noise_spec_text() {
        assert_eq!("depolarizing".parse::<NoiseSpec>().unwrap(), NoiseSpec::Depolarizing(0.01));
        assert_eq!("depolarizing:0.02".parse::<NoiseSpec>().unwrap(), NoiseSpec::Depolarizing(0.02));
        assert_eq!("calibration:lima".parse::<NoiseSpec>().unwrap(), NoiseSpec::Calibration("lima".into()));
        assert!("calibration".parse::<NoiseSpec>().is_err());
        assert!("depolarizing:x".parse::<NoiseSpec>().is_err());
        for s in ["noiseless", "depolarizing:0.01", "calibration:kolkata12"] {
            assert_eq!(s.parse::<NoiseSpec>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn platform_names() {
        let p = |s: &str| s.parse::<NoiseSpec>().unwrap().platform().unwrap();
        assert_eq!(p("depolarizing"), "depolarizing");
        assert_eq!(p("calibration:lima"), "fake_lima");
        assert_eq!(p("calibration:kolkata12"), "fake_kolkata");
        assert_eq!(p("calibration:aspen_m2"), "fake_aspen_m2");
    }

    #[test]
    fn validation() {
        assert!(ExperimentConfig::default().validate().is_ok());
        let with = |f: fn(&mut ExperimentConfig)| {
            let mut c = ExperimentConfig::default();
            f(&mut c);
            c.validate()
        };
        assert!(with(|c| c.depths = vec![3, 1]).is_err());
        assert!(with(|c| c.depths = vec![0, 1]).is_err());
        assert!(with(|c| c.depths.clear()).is_err());
        assert!(with(|c| c.instances = 0).is_err());
        assert!(with(|c| c.trials = 0).is_err());
        assert!(with(|c| {
            c.backend = Backend::Statevector;
            c.n_qubits = 12;
        })
        .is_err());
        assert!(with(|c| {
            c.technique = Technique::Pec;
            c.shots = 50;
        })
        .is_err());
    }

    #[test]
    fn toml_config() {
        let c = ExperimentConfig::from_toml(
            "circuit = \"mirror\"\ntechnique = \"pec\"\nn_qubits = 2\ndepths = [2, 4]\nnoise = \"calibration:lima\"\n",
        )
        .unwrap();
        assert_eq!(c.circuit, BenchmarkKind::Mirror);
        assert_eq!(c.technique, Technique::Pec);
        assert_eq!(c.depths, vec![2, 4]);
        assert_eq!(c.instances, 4);
        assert_eq!(c.noise, NoiseSpec::Calibration("lima".into()));
        assert!(ExperimentConfig::from_toml("colour = 1").is_err());
        let back = ExperimentConfig::from_toml(&toml::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
