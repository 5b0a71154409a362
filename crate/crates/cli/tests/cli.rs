use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const MINIMAL: &str = r#"
master_seed = 11
lattice = { kind = "triangular_site", d = 2 }
p = 0.5
sizes = [6]
samples = 300
"#;

fn percolab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_percolab")).args(args).output().expect("binary runs")
}

fn write_spec(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("spec.toml");
    fs::write(&p, body).unwrap();
    p
}

fn files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

fn error_kind(o: &Output) -> String {
    let v: serde_json::Value = serde_json::from_slice(&o.stderr).expect("stderr is a JSON error report");
    v["error"]["kind"].as_str().unwrap().to_string()
}

#[test]
fn minimal_spec_writes_one_row() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(tmp.path(), MINIMAL);
    let out = tmp.path().join("out");
    let o = percolab(&["pi", "--spec", spec.to_str().unwrap(), "--out", out.to_str().unwrap(), "--format", "csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let fs_ = files(&out);
    assert_eq!(fs_.len(), 1);
    let text = fs::read_to_string(&fs_[0]).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# spec_hash=") && lines[0].contains("version="));
    assert_eq!(lines.len(), 3, "comment, header, one row");
    assert!(lines[2].starts_with("triangular_site,0.5,1,6,300,"));
}

#[test]
fn same_spec_twice_is_byte_identical_across_workers() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(tmp.path(), &format!("{MINIMAL}u_grid = [1.0, 2.0]\nk_grid = [1, 2]\n"));
    let mut runs = Vec::new();
    for (i, w) in ["1", "4"].iter().enumerate() {
        let out = tmp.path().join(format!("run{i}"));
        for cmd in ["pi", "tail", "crossing"] {
            let o = percolab(&[cmd, "--spec", spec.to_str().unwrap(), "--out", out.to_str().unwrap(), "--workers", w]);
            assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        }
        runs.push(out);
    }
    let (a, b) = (files(&runs[0]), files(&runs[1]));
    assert_eq!(a.len(), 8);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.file_name(), y.file_name());
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{}", x.display());
    }
}

#[test]
fn invalid_probability_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(tmp.path(), &MINIMAL.replace("p = 0.5", "p = 1.5"));
    let o = percolab(&["pi", "--spec", spec.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_kind(&o), "invalid_spec");
    assert!(!tmp.path().join("o").exists());
}

#[test]
fn unwritable_output_is_an_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(tmp.path(), MINIMAL);
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let o = percolab(&["pi", "--spec", spec.to_str().unwrap(), "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_kind(&o), "io");
}

#[test]
fn seed_override_changes_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(tmp.path(), MINIMAL);
    let hash = |seed: &str| {
        let o = percolab(&["pi", "--spec", spec.to_str().unwrap(), "--out", tmp.path().join(seed).to_str().unwrap(), "--seed", seed]);
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        v["spec_hash"].as_str().unwrap().to_string()
    };
    assert_ne!(hash("1"), hash("2"));
}

#[test]
fn blob_subcommand_emits_json() {
    let o = percolab(&["blob", "--points", "[[0,0],[4,0],[4,3]]", "--n", "6"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["blobs"].as_array().unwrap().len(), 5);
    assert_eq!(v["record"]["edges"][0]["r2"], 3);
    assert!(v["bounds"]["prob_upper_bound"].as_f64().unwrap() > 0.0);

    let bad = percolab(&["blob", "--points", "[[0,0],[9,0]]", "--n", "3"]);
    assert_eq!(bad.status.code(), Some(2));
    assert_eq!(error_kind(&bad), "invalid_parameter");
}

#[test]
fn missing_spec_is_a_usage_error() {
    let o = percolab(&["pi"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_kind(&o), "usage");
}

#[test]
fn bounds_subcommand() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(
        tmp.path(),
        &format!("{MINIMAL}u_grid = [1.0, 2.0, 3.0]\n[bounds]\nconstants = {{ C2 = 1.0 }}\nk_max = 100\n"),
    );
    let out = tmp.path().join("o");
    let o = percolab(&["bounds", "--spec", spec.to_str().unwrap(), "--out", out.to_str().unwrap(), "--format", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let f = &files(&out)[0];
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(f).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    assert!(v["detail"]["c9_fit"].as_f64().unwrap().is_finite());
}
