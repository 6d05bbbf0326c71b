use std::path::Path;
use std::process::{Command, Output};

fn qem_bench(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qem-bench")).args(args).current_dir(cwd).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const RUN: &[&str] = &[
    "run", "--circuit", "rb", "--qem", "zne-linear", "--qubits", "2", "--depths", "1,2,3", "--shots", "600",
    "--instances", "2", "--seed", "4",
];

#[test]
fn run_summarize_validate() {
    let tmp = tempfile::tempdir().unwrap();
    let out = qem_bench(RUN, tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("data/software/zne/rb/depolarizing/depolarizing_zne_rb_2_1_3_600_2");
    assert!(stdout(&out).contains("wrote data/software/zne/rb/depolarizing/depolarizing_zne_rb_2_1_3_600_2"));
    assert_eq!(std::fs::read_dir(&dir).unwrap().count(), 6);

    let dir_s = dir.to_str().unwrap();
    let json = qem_bench(&["summarize", dir_s, "--format", "json"], tmp.path());
    assert!(json.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    assert_eq!(v[0]["technique"], "zne-linear");
    assert_eq!(v[0]["depths"].as_array().unwrap().len(), 3);
    assert_eq!(v[0]["mitigated_shots"], 600);

    let csv = qem_bench(&["summarize", dir_s, "--format", "csv"], tmp.path());
    assert_eq!(stdout(&csv).lines().count(), 4);

    let val = qem_bench(&["validate", dir_s], tmp.path());
    assert!(val.status.success());
    assert!(stdout(&val).contains("ok zne-linear 3 rows x 2 columns"));
}

#[test]
fn identical_runs_write_identical_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(qem_bench(RUN, a.path()).status.success());
    assert!(qem_bench(RUN, b.path()).status.success());
    let rel = "data/software/zne/rb/depolarizing/depolarizing_zne_rb_2_1_3_600_2/mitigated_values_linear.csv";
    assert_eq!(std::fs::read(a.path().join(rel)).unwrap(), std::fs::read(b.path().join(rel)).unwrap());
}

#[test]
fn config_file_with_flag_override() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("exp.toml"),
        "circuit = \"mirror\"\ntechnique = \"pec\"\nn_qubits = 2\ndepths = [1, 2]\ninstances = 1\nshots = 1000\n",
    )
    .unwrap();
    let out = qem_bench(&["run", "--config", "exp.toml", "--calibration", "lima", "--out", "results"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("results/software/pec/mirror/fake_lima/fake_lima_pec_mirror_2_1_2_1000_1");
    assert_eq!(std::fs::read_dir(dir).unwrap().count(), 5);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let bad_depths = qem_bench(&["run", "--depths", "3,1"], tmp.path());
    assert_eq!(bad_depths.status.code(), Some(2));
    let bad_flag = qem_bench(&["run", "--qem", "magic"], tmp.path());
    assert_eq!(bad_flag.status.code(), Some(2));
    let too_wide = qem_bench(&["run", "--backend", "statevector", "--qubits", "11"], tmp.path());
    assert_eq!(too_wide.status.code(), Some(2));
    // RB pairs qubits 2 and 3, which are not coupled on this device
    let uncoupled = qem_bench(
        &["run", "--qem", "none", "--qubits", "4", "--depths", "1", "--calibration", "lima", "--shots", "10"],
        tmp.path(),
    );
    assert_eq!(uncoupled.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&uncoupled.stderr).contains("depth 1"));
    let missing = qem_bench(&["summarize", "nowhere/depolarizing_zne_rb_3_1_9_10000_4"], tmp.path());
    assert_eq!(missing.status.code(), Some(4));
}

#[test]
fn selftest_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = qem_bench(&["selftest"], tmp.path());
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.lines().count() >= 14);
    assert!(text.lines().all(|l| l.starts_with("PASS ")));
}
