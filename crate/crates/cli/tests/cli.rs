//! End-to-end runs of the installed binary: exit codes, file outputs and
//! agreement between command output and the library it fronts.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

use qweight_core::data::{bundled_state, expected_table, STATE_NAMES};
use qweight_core::enumerators::EnumeratorProfile;
use qweight_core::multiset::DimensionMultiset;
use qweight_core::rational::rational_from_str;

fn workdir(test: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(test);
    if dir.exists() {
        fs::remove_dir_all(&dir).expect("stale test directory is removable");
    }
    fs::create_dir_all(&dir).expect("test directory is creatable");
    dir
}

fn qweight(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qweight"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn assert_exit(output: &Output, want: i32, context: &str) {
    let got = output.status.code().expect("no signal");
    assert_eq!(
        got,
        want,
        "{context}: exit {got}, want {want}\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

#[test]
fn construct_verify_enumerate_pipeline() {
    let dir = workdir("pipeline");
    let built = qweight(&dir, &["ame", "construct", "--d", "2,3,4", "--out", "state.json"]);
    assert_exit(&built, 0, "construct");
    let verified = qweight(&dir, &["ame", "verify", "state.json"]);
    assert_exit(&verified, 0, "verify");
    let report: Value =
        serde_json::from_slice(&verified.stdout).expect("verify prints one JSON object");
    assert_eq!(report["is_ame"], Value::Bool(true));
    assert_eq!(report["failing_subsets"], Value::Array(vec![]));

    let enumerated = qweight(&dir, &["enumerate", "state.json", "--out-dir", "profiles"]);
    assert_exit(&enumerated, 0, "enumerate");
    for tag in ["a", "b", "a_prime", "b_prime", "shadow", "calligraphic"] {
        assert!(dir.join(format!("profiles/state.{tag}.json")).exists(), "missing {tag} file");
    }
}

#[test]
fn profile_files_round_trip_to_identical_json() {
    let dir = workdir("round_trip");
    qweight(&dir, &["ame", "construct", "--d", "2,3,3", "--out", "state.json"]);
    let enumerated = qweight(&dir, &["enumerate", "state.json"]);
    assert_exit(&enumerated, 0, "enumerate");
    for tag in ["a", "b", "a_prime", "b_prime", "shadow"] {
        let text = fs::read_to_string(dir.join(format!("state.{tag}.json"))).unwrap();
        let on_disk: Value = serde_json::from_str(&text).unwrap();
        let parsed = EnumeratorProfile::from_json_value(&on_disk).expect("profile file parses");
        assert_eq!(parsed.to_json_value(), on_disk, "{tag} file is not byte-stable");
    }
}

#[test]
fn transform_command_matches_enumerated_shadow() {
    let dir = workdir("transform");
    qweight(&dir, &["ame", "construct", "--d", "2,2,3", "--out", "state.json"]);
    qweight(&dir, &["enumerate", "state.json"]);
    let transformed = qweight(
        &dir,
        &["transform", "state.a.json", "--into", "S", "--out", "derived.json"],
    );
    assert_exit(&transformed, 0, "transform");
    let direct = fs::read_to_string(dir.join("state.shadow.json")).unwrap();
    let derived = fs::read_to_string(dir.join("derived.json")).unwrap();
    let direct: Value = serde_json::from_str(&direct).unwrap();
    let derived: Value = serde_json::from_str(&derived).unwrap();
    assert_eq!(direct, derived);
}

#[test]
fn bundled_states_enumerate_to_their_tables() {
    let dir = workdir("bundled_tables");
    for name in STATE_NAMES {
        let state = bundled_state(name).unwrap();
        let file = format!("{name}.json");
        fs::write(dir.join(&file), state.to_json_string()).unwrap();
        let run = qweight(&dir, &["enumerate", &file, "--families", "A,B,S,A',B'"]);
        assert_exit(&run, 0, name);
        let expected = expected_table(name).unwrap();
        for (tag, pick) in [
            ("a", 0usize),
            ("b", 1),
            ("shadow", 2),
            ("a_prime", 3),
            ("b_prime", 4),
        ] {
            let text = fs::read_to_string(dir.join(format!("{name}.{tag}.json"))).unwrap();
            let profile =
                EnumeratorProfile::from_json_value(&serde_json::from_str(&text).unwrap()).unwrap();
            for row in &expected {
                let want = [&row.a, &row.b, &row.shadow, &row.a_prime, &row.b_prime][pick];
                assert_eq!(
                    profile.value(&row.multiset).unwrap(),
                    want,
                    "{name} {tag} at {}",
                    row.multiset.to_elements_string()
                );
            }
        }
    }
}

#[test]
fn lp_exit_codes_separate_verdicts_from_errors() {
    let dir = workdir("lp_exits");
    let pure = qweight(
        &dir,
        &["lp", "--dims", "2,2,5", "--k", "2", "--distance", "5", "--pure"],
    );
    assert_exit(&pure, 2, "pure infeasible");
    let verdict: Value = serde_json::from_slice(&pure.stdout).unwrap();
    assert_eq!(verdict["feasible"], Value::Bool(false));
    assert!(verdict["witness"].is_object());

    let impure = qweight(&dir, &["lp", "--dims", "2,2,5", "--k", "2", "--distance", "5"]);
    assert_exit(&impure, 0, "impure feasible");
    let verdict: Value = serde_json::from_slice(&impure.stdout).unwrap();
    assert_eq!(verdict["feasible"], Value::Bool(true));
    let point = verdict["point"].as_object().expect("point is an object");
    assert!(rational_from_str(point["A[∅]"].as_str().unwrap()).is_ok());

    let tableau = qweight(
        &dir,
        &["lp", "--dims", "2,2,5", "--k", "2", "--distance", "5", "--emit-lp"],
    );
    assert_exit(&tableau, 0, "tableau dump");
    let text = String::from_utf8_lossy(&tableau.stdout);
    assert!(text.starts_with("variables (6), all >= 0:"), "unexpected tableau: {text}");
    assert!(text.contains("eq   norm:"));

    let broken = qweight(&dir, &["lp", "--dims", "2,x", "--k", "2", "--distance", "5"]);
    assert_exit(&broken, 1, "malformed dims");

    let sweep = qweight(&dir, &["lp", "--dims", "2,2,5", "--distance", "5", "--sweep-k", "6"]);
    assert_exit(&sweep, 0, "sweep is informational");
    let lines: Vec<Value> = String::from_utf8_lossy(&sweep.stdout)
        .lines()
        .map(|line| serde_json::from_str(line).unwrap())
        .collect();
    assert_eq!(lines.len(), 6);
    assert!(lines.iter().any(|v| v["k"] == "2" && v["feasible"] == Value::Bool(true)));
}

#[test]
fn verify_flags_product_states() {
    let dir = workdir("verify_product");
    fs::write(
        dir.join("product.json"),
        r#"{"dims":[2,2,2],"terms":[{"ket":"000","amp_re":1.0,"amp_im":0.0}]}"#,
    )
    .unwrap();
    let run = qweight(&dir, &["ame", "verify", "product.json"]);
    assert_exit(&run, 2, "product state is not maximally entangled");
    let report: Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(report["is_ame"], Value::Bool(false));
    assert!(!report["failing_subsets"].as_array().unwrap().is_empty());
}

#[test]
fn construct_reports_hypothesis_violations_as_errors() {
    let dir = workdir("construct_errors");
    let run = qweight(&dir, &["ame", "construct", "--d", "2,5,2"]);
    assert_exit(&run, 1, "hypothesis violation");
    assert!(String::from_utf8_lossy(&run.stderr).contains("hypothesis"));
}

#[test]
fn scan_writes_the_documented_csv() {
    let dir = workdir("scan_csv");
    let run = qweight(
        &dir,
        &["--threads", "2", "ame", "scan", "--dims", "2,3", "--max-parties", "13", "--out", "heatmap.csv"],
    );
    assert_exit(&run, 0, "scan");
    let text = fs::read_to_string(dir.join("heatmap.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n_small,n_large,status,witness"));
    for n_small in 0..=8u32 {
        let n_large = 8 - n_small;
        assert!(
            text.lines().any(|line| {
                line.starts_with(&format!("{n_small},{n_large},forbidden,"))
            }),
            "cell ({n_small}, {n_large}) is not forbidden:\n{text}"
        );
    }
}

#[test]
fn reproduce_registry_is_clean() {
    let dir = workdir("reproduce_all");
    let run = qweight(&dir, &["reproduce", "all", "--out-dir", "artifacts"]);
    assert_exit(&run, 0, "reproduce all");
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert_eq!(stdout.matches(": OK").count(), 12, "stdout: {stdout}");
    assert!(!stdout.contains("MISMATCH"));
    assert!(dir.join("artifacts/tab_AME2333.csv").exists());
    assert!(dir.join("artifacts/fig_heatmap23.csv").exists());
    assert!(dir.join("artifacts/ex_shadow_empty.json").exists());
    assert!(stdout.contains("-1/6"), "shadow example did not print its value");

    let unknown = qweight(&dir, &["reproduce", "tab:missing"]);
    assert_exit(&unknown, 1, "unknown target");
}

#[test]
fn snap_bound_env_var_is_honored() {
    let dir = workdir("snap_env");
    qweight(&dir, &["ame", "construct", "--d", "2,3,4", "--out", "state.json"]);
    let strict = Command::new(env!("CARGO_BIN_EXE_qweight"))
        .args(["enumerate", "state.json", "--families", "calligraphic"])
        .env("QWEIGHT_MAX_DENOM", "5")
        .current_dir(&dir)
        .output()
        .expect("binary runs");
    assert_exit(&strict, 1, "denominator 12 cannot snap under a bound of 5");
    let junk = Command::new(env!("CARGO_BIN_EXE_qweight"))
        .args(["enumerate", "state.json"])
        .env("QWEIGHT_MAX_DENOM", "many")
        .current_dir(&dir)
        .output()
        .expect("binary runs");
    assert_exit(&junk, 1, "non-numeric override is rejected");
}

#[test]
fn bounds_exit_code_follows_the_verdicts() {
    let dir = workdir("bounds_exits");
    let fits = qweight(&dir, &["bounds", "--dims", "2,2,5", "--distance", "5", "--k", "2"]);
    assert_exit(&fits, 0, "K = 2 fits every bound");
    let too_big = qweight(&dir, &["bounds", "--dims", "2,2,5", "--distance", "5", "--k", "21"]);
    assert_exit(&too_big, 2, "K = 21 violates the packing bound");
    let lines: Vec<Value> = String::from_utf8_lossy(&too_big.stdout)
        .lines()
        .map(|line| serde_json::from_str(line).expect("one JSON object per line"))
        .collect();
    assert!(lines.iter().any(|v| v["bound"] == "hamming" && v["holds"] == Value::Bool(false)));

    let scott_no = qweight(&dir, &["bounds", "--dims", "2,2,2,2,2,2,2,3", "--distance", "2"]);
    assert_exit(&scott_no, 2, "seven qubits and a qutrit fail the trace bound");
    let summary: Value = String::from_utf8_lossy(&scott_no.stdout)
        .lines()
        .last()
        .map(|line| serde_json::from_str(line).unwrap())
        .unwrap();
    assert_eq!(summary["bound"], "scott");
    assert_eq!(summary["holds"], Value::Bool(false));
    let failures = summary["failures"].as_array().unwrap();
    assert!(!failures.is_empty());
    let inner = DimensionMultiset::from_elements(&[2, 2, 2, 2, 2]);
    assert!(failures
        .iter()
        .any(|f| f["witness"]["nested_pair"][0] == inner.to_json()));
}
