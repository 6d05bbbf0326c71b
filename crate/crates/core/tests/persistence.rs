use std::fs;

use proptest::prelude::*;
use qem_core::harness::{
    load_record, load_record_variant, load_records, persist_record, summarize, validate_dir, ExperimentRecord,
    HarnessError, Summary, Technique, SUMMARY_CSV_HEADER,
};
use qem_core::metrics::ImprovementFactor;
use qem_core::BenchmarkKind;

fn synthetic(technique: Technique, noisy: f64, mitigated: f64, depths: Vec<usize>, cols: usize) -> ExperimentRecord {
    let rows = depths.len();
    ExperimentRecord {
        platform: "depolarizing".into(),
        technique,
        circuit: BenchmarkKind::Rb,
        n_qubits: 3,
        depths,
        shots: 10_000,
        true_values: vec![vec![1.0; cols]; rows],
        noisy_values: vec![vec![noisy; cols]; rows],
        mitigated_values: vec![vec![mitigated; cols]; rows],
        noise_scaled_values: technique.is_zne().then(|| vec![vec![vec![noisy, noisy - 0.1, noisy - 0.2]; cols]; rows]),
        cnot_counts: vec![vec![3; cols]; rows],
        oneq_counts: vec![vec![20; cols]; rows],
    }
}

#[test]
fn summary_of_identical_values_is_one() {
    let s = summarize(&synthetic(Technique::None, 0.8, 0.8, vec![1, 3], 4)).unwrap();
    assert!(s.depths.iter().all(|d| d.improvement_factor == ImprovementFactor::Finite(1.0)));
    assert_eq!(s.aggregate, ImprovementFactor::Finite(1.0));
    assert!(s.flagged_depths.is_empty());
}

#[test]
fn summary_of_quarter_error_is_four() {
    let s = summarize(&synthetic(Technique::Pec, 0.8, 0.95, vec![1, 3, 5], 4)).unwrap();
    assert_eq!(s.mitigated_shots, 10_000);
    for d in &s.depths {
        assert!((d.improvement_factor.value().unwrap() - 4.0).abs() < 1e-12);
        assert!((d.noisy_rmse - 0.2).abs() < 1e-12);
    }
}

#[test]
fn zne_summary_normalizes_by_used_shots() {
    let s = summarize(&synthetic(Technique::ZneRichardson, 0.8, 0.9, vec![2], 4)).unwrap();
    assert_eq!(s.mitigated_shots, 9_999);
    assert!((s.aggregate.value().unwrap() - 2.0 * (10_000f64 / 9_999.0).sqrt()).abs() < 1e-12);
}

#[test]
fn exact_mitigation_is_flagged() {
    let s = summarize(&synthetic(Technique::Pec, 0.8, 1.0, vec![1, 2], 2)).unwrap();
    assert_eq!(s.flagged_depths, vec![1, 2]);
    assert_eq!(s.aggregate, ImprovementFactor::Unbounded);
    assert!(s.render_table().contains("unbounded !"));
    let csv = s.to_csv();
    assert!(csv.lines().nth(1).unwrap().ends_with(",unbounded"));
}

#[test]
fn summary_machine_formats() {
    let s = summarize(&synthetic(Technique::ZneLinear, 0.8, 0.95, vec![1, 3], 2)).unwrap();
    let json: serde_json::Value = serde_json::from_str(&s.to_json()).unwrap();
    assert_eq!(json["technique"], "zne-linear");
    assert_eq!(json["circuit"], "rb");
    assert_eq!(json["platform"], "depolarizing");
    assert_eq!(json["depths"][1]["depth"], 3);
    assert!(json["depths"][0]["improvement_factor"].is_number());
    let back: Summary = serde_json::from_str(&s.to_json()).unwrap();
    assert_eq!(back, s);

    let csv = s.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(SUMMARY_CSV_HEADER));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), SUMMARY_CSV_HEADER.split(',').count());
    assert_eq!(row[0], "1");
    assert_eq!(row[6].parse::<f64>().unwrap(), s.depths[0].improvement_factor.value().unwrap());
}

#[test]
fn both_extrapolators_share_a_directory() {
    let root = tempfile::tempdir().unwrap();
    let lin = synthetic(Technique::ZneLinear, 0.8, 0.9, vec![1, 5, 9], 4);
    let rich = synthetic(Technique::ZneRichardson, 0.8, 0.95, vec![1, 5, 9], 4);
    let a = persist_record(&lin, root.path()).unwrap();
    let b = persist_record(&rich, root.path()).unwrap();
    assert_eq!(a, b);
    assert_eq!(fs::read_dir(&a).unwrap().count(), 12);
    assert_eq!(load_records(&a).unwrap(), vec![lin.clone(), rich.clone()]);
    assert_eq!(load_record_variant(&a, Technique::ZneLinear).unwrap(), lin);
    assert!(matches!(load_record(&a), Err(HarnessError::Format { .. })));
    assert_eq!(validate_dir(&a).unwrap().len(), 2);
}

#[test]
fn load_errors() {
    let root = tempfile::tempdir().unwrap();
    let rec = synthetic(Technique::Pec, 0.8, 0.9, vec![1, 2, 3], 2);
    let dir = persist_record(&rec, root.path()).unwrap();

    fs::write(dir.join("noisy_values_pec.csv"), "0.8,0.8\n0.8,0.8\n").unwrap();
    let err = load_record(&dir).unwrap_err().to_string();
    assert!(err.contains("noisy_values"), "{err}");

    fs::write(dir.join("noisy_values_pec.csv"), "0.8,0.8\n0.8,x\n0.8,0.8\n").unwrap();
    assert!(load_record(&dir).unwrap_err().to_string().contains("bad value"));

    fs::write(dir.join("noisy_values_pec.csv"), "0.8,0.8\n0.8,0.8\n0.8,0.8\n").unwrap();
    fs::remove_file(dir.join("oneq_counts_pec.csv")).unwrap();
    let err = load_record(&dir).unwrap_err().to_string();
    assert!(err.contains("oneq_counts_pec.csv") && err.contains("missing"), "{err}");

    assert!(load_record(root.path().join("not_a_layout")).is_err());
}

#[test]
fn persist_rejects_uneven_depths() {
    let root = tempfile::tempdir().unwrap();
    let rec = synthetic(Technique::None, 0.8, 0.8, vec![1, 2, 4], 1);
    assert!(persist_record(&rec, root.path()).is_err());
}

#[test]
fn validate_flags_bad_true_values() {
    let root = tempfile::tempdir().unwrap();
    let mut rec = synthetic(Technique::Pec, 0.8, 0.9, vec![1], 2);
    rec.true_values[0][1] = 0.5;
    let dir = persist_record(&rec, root.path()).unwrap();
    assert!(load_record(&dir).is_ok());
    assert!(validate_dir(&dir).is_err());
}

fn arb_record() -> impl Strategy<Value = ExperimentRecord> {
    let techniques = prop::sample::select(Technique::ALL.to_vec());
    (techniques, 1usize..4, 1usize..4, 1usize..5, 1usize..4, any::<u64>()).prop_flat_map(|(t, rows, cols, start, step, shots)| {
        let depths: Vec<usize> = (0..rows).map(|i| start + i * step).collect();
        let values = prop::collection::vec(prop::collection::vec(-2.0f64..2.0, cols), rows);
        let counts = prop::collection::vec(prop::collection::vec(0u64..500, cols), rows);
        let scaled = prop::collection::vec(prop::collection::vec(prop::collection::vec(0.0f64..1.0, 3), cols), rows);
        (values.clone(), values, counts.clone(), counts, scaled).prop_map(move |(noisy, mitigated, cnot, oneq, scaled)| {
            ExperimentRecord {
                platform: "fake_kolkata".into(),
                technique: t,
                circuit: BenchmarkKind::Mirror,
                n_qubits: 12,
                depths: depths.clone(),
                shots: shots % 1_000_000 + 100,
                true_values: vec![vec![1.0; cols]; rows],
                noisy_values: noisy,
                mitigated_values: mitigated,
                noise_scaled_values: t.is_zne().then_some(scaled),
                cnot_counts: cnot,
                oneq_counts: oneq,
            }
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn round_trip_is_exact(rec in arb_record()) {
        let root = tempfile::tempdir().unwrap();
        let dir = persist_record(&rec, root.path()).unwrap();
        prop_assert_eq!(dir.file_name().unwrap().to_str().unwrap(), rec.directory_name());
        prop_assert_eq!(load_record(&dir).unwrap(), rec);
    }
}
