use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "corpus", name]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polarity-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(args: &[&str]) -> (i32, serde_json::Value) {
    let mut all = vec!["--format", "json"];
    all.extend_from_slice(args);
    let o = lab(&all);
    (
        o.status.code().unwrap(),
        serde_json::from_slice(&o.stdout).expect("json output"),
    )
}

#[test]
fn check_accepts_mall_proof() {
    let (code, v) = json(&["check", &corpus("pi1.llp")]);
    assert_eq!(code, 0);
    assert_eq!(v["artifacts"]["system"], "mall");
    assert_eq!(v["artifacts"]["endsequent"], "|- (~a + ~a), (a + a)");
}

#[test]
fn check_accepts_focussed_proof() {
    let (code, v) = json(&["check", "--system", "foc", &corpus("pi1p.llp")]);
    assert_eq!(code, 0);
    assert_eq!(v["artifacts"]["system"], "foc");
}

#[test]
fn check_rejects_bad_stoup() {
    let (code, v) = json(&["check", &corpus("bad_last_plusR.llp")]);
    assert_eq!(code, 1);
    assert_eq!(v["verdicts"][0]["pass"], false);
}

#[test]
fn system_mismatch_is_an_error() {
    let o = lab(&["check", "--system", "foc", &corpus("pi1.llp")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("MALL proof"));
}

#[test]
fn missing_file_is_an_error() {
    let o = lab(&["check", "no/such/file.llp"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn table1_marks_row_five() {
    let (code, v) = json(&["table1"]);
    assert_eq!(code, 0);
    let rows = v["artifacts"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 16);
    assert_eq!(rows[5]["initial_move"], "?");
    assert_eq!(rows[5]["polarities"], serde_json::json!(["O", "P", "O", "P"]));
    assert_eq!(rows[7]["initial_move"], "sigma");
}

#[test]
fn counterexample_passes() {
    let o = lab(&["counterexample"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("opens D-side"));
    assert!(out.contains("opens A-side"));
    assert!(!out.contains("FAIL"));
}

#[test]
fn blass_rejects_tensor() {
    let o = lab(&["interp", "--model", "blass", &corpus("tensor_context.llp")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("tensorR"));
}

#[test]
fn concurrent_interprets_tensor() {
    let (code, v) = json(&["interp", &corpus("tensor_context.llp")]);
    assert_eq!(code, 0);
    assert_eq!(v["artifacts"]["closure"]["table"].as_array().unwrap().len(), 81);
}

#[test]
fn compose_is_stable_under_cut_elimination() {
    let (code, v) = json(&["compose", &corpus("pi1.llp"), &corpus("pi2.llp")]);
    assert_eq!(code, 0);
    assert!(v["artifacts"]["cut_free"].as_str().unwrap().contains("withR"));
}

#[test]
fn goi_exec_twist_twist_is_identity() {
    let (code, v) = json(&["goi", "exec", &corpus("goi_twist_cut_twist.llp")]);
    assert_eq!(code, 0);
    assert_eq!(
        v["artifacts"]["executed"]["axioms"],
        serde_json::json!([[0, 2], [1, 3]])
    );
    assert_eq!(v["artifacts"]["executed"]["cuts"], serde_json::json!([]));
}

#[test]
fn proc_run_prints_board() {
    let o = lab(&["proc", "run", &corpus("copycat1.proc"), "--input", "l0=1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), r#"{"l0":1,"r0":1}"#);
    let o = lab(&["proc", "run", &corpus("clash.proc")]);
    assert_eq!(stdout(&o).trim(), "TOP");
}

#[test]
fn proc_run_rejects_bad_board() {
    let o = lab(&["proc", "run", &corpus("copycat1.proc"), "--input", "l0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn selftest_is_deterministic() {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_polarity-lab"))
            .args(["--format", "json", "selftest", "--cases", "10"])
            .env("POLARITY_LAB_SEED", "7")
            .output()
            .unwrap()
    };
    let (a, b) = (run(), run());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["artifacts"]["seed"], 7);
}

#[test]
fn counterexample_traces_open_on_different_sides() {
    let (code, v) = json(&["counterexample"]);
    assert_eq!(code, 0);
    let t = &v["artifacts"]["blass_traces"];
    assert_eq!(t["left"][0], "R.inr");
    assert_eq!(t["right"][0], "L.inr");
    assert_eq!(t["left"].as_array().unwrap().len(), 4);
}
