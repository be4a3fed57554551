use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn asw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asw")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn standard(dir: &Path, extra: &str) -> String {
    let out = dir.join("out");
    write_config(dir, "std.json", &format!(r#"{{"p": 3, "a": 2, "ell": 2, "fbar": [0, 1, 1], "out": {:?}{extra}}}"#, out))
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn minimal_lfunction_writes_three_files() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(
        tmp.path(),
        "min.json",
        &format!(r#"{{"p": 3, "a": 1, "ell": 1, "fbar": [0, 1, 1], "characters": [{{"m": 1, "b": [1]}}], "out": {out:?}}}"#),
    );
    let o = asw(&["lfunction", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut names: Vec<String> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, ["lfunctions.txt", "polygons.csv", "slopes.csv"]);
    let slopes = fs::read_to_string(out.join("slopes.csv")).unwrap();
    assert!(slopes.lines().any(|l| l == "m=1 b=1,1,2,1"), "{slopes}");
    for n in names {
        assert!(fs::read_to_string(out.join(n)).unwrap().starts_with("# config-sha256 "));
    }
}

#[test]
fn missing_characters_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    let o = asw(&["lfunction", &standard(tmp.path(), "")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("characters"));
}

#[test]
fn d_divisible_by_p_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "bad.json", r#"{"p": 3, "a": 1, "ell": 1, "fbar": [0, 0, 0, 1]}"#);
    let o = asw(&["dwork", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("d must be prime to p"));
}

#[test]
fn unknown_config_field_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "bad.json", r#"{"p": 3, "a": 1, "ell": 1, "fbar": [0, 1, 1], "precison": 3}"#);
    let o = asw(&["dwork", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("precison"));
}

#[test]
fn dwork_kmax_zero_is_the_series_one() {
    let tmp = TempDir::new().unwrap();
    let o = asw(&["dwork", &standard(tmp.path(), ""), "--kmax", "0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(tmp.path().join("out/series.txt")).unwrap();
    let terms: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(terms, ["0 0 : 1"]);
}

#[test]
fn manifest_records_policy_k() {
    let tmp = TempDir::new().unwrap();
    let o = asw(&["dwork", &standard(tmp.path(), ""), "-D", "12", "--kmax", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("out/manifest.json")).unwrap()).unwrap();
    // d = 2, D = 12, a = 2, p = 3: ceil(24/4) + 3 + 1 = 10 and floor(24 * 3 / 8) + 1 = 10
    assert_eq!(m["k"], 10);
    assert_eq!(m["maxdeg"], 12);
    assert_eq!(m["precision"], 4);
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn repeated_runs_are_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = standard(tmp.path(), "");
    let read = || fs::read(tmp.path().join("out/series.txt")).unwrap();
    assert!(asw(&["dwork", &cfg, "-D", "10"]).status.success());
    let first = read();
    assert!(asw(&["dwork", &cfg, "-D", "10"]).status.success());
    assert_eq!(first, read());
    assert!(asw(&["dwork", &cfg, "-D", "11"]).status.success());
    assert_ne!(first.split(|&b| b == b'\n').next(), read().split(|&b| b == b'\n').next());
}

#[test]
fn default_suite_passes() {
    let tmp = TempDir::new().unwrap();
    let o = asw(&["verify", &standard(tmp.path(), "")]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let reports = fs::read_dir(tmp.path().join("out/reports")).unwrap().count();
    assert_eq!(reports, 14);
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("out/reports/hodge-bound.json")).unwrap()).unwrap();
    assert_eq!(r["verdict"], "pass");
    assert!(r.get("config_sha256").is_some());
}

#[test]
fn corrupted_series_fails_with_witness() {
    let tmp = TempDir::new().unwrap();
    let cfg = standard(tmp.path(), "");
    assert!(asw(&["dwork", &cfg, "-D", "10", "--kmax", "3"]).status.success());
    let text = fs::read_to_string(tmp.path().join("out/series.txt")).unwrap();
    let at = text.find("## w_2\n").unwrap();
    let header_end = at + text[at..].find("modulus=").unwrap();
    let line_end = header_end + text[header_end..].find('\n').unwrap() + 1;
    let bad = format!("{}0 1 : 5\n{}", &text[..line_end], &text[line_end..]);
    let fixture = tmp.path().join("fixture");
    fs::create_dir_all(&fixture).unwrap();
    fs::write(fixture.join("series.txt"), bad).unwrap();
    let out = tmp.path().join("checked");
    let o = asw(&["verify", &cfg, "--input", fixture.to_str().unwrap(), "--claim", "hodge-bound", "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("FAIL") && stdout.contains("k=2"), "{stdout}");
}

#[test]
fn unknown_claim_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    let o = asw(&["verify", &standard(tmp.path(), ""), "--claim", "no-such-claim"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown claim id"));
}

#[test]
fn zeta_and_optional_timing() {
    let tmp = TempDir::new().unwrap();
    let cfg = standard(tmp.path(), r#", "level": 1"#);
    let o = asw(&["zeta", &cfg, "--kmax", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let z = fs::read_to_string(tmp.path().join("out/zeta.txt")).unwrap();
    assert!(z.contains("## numerator\n0 : 1\n"));
    assert!(!tmp.path().join("out/timing.json").exists());
    assert!(asw(&["zeta", &cfg, "--kmax", "2", "--timing"]).status.success());
    assert!(tmp.path().join("out/timing.json").exists());
}

#[test]
fn bad_thread_count_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_asw"))
        .args(["dwork", &standard(tmp.path(), ""), "--kmax", "1"])
        .env("ASW_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ASW_THREADS"));
}
