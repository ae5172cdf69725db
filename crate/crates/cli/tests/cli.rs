use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const SMALL: &str = r#"
[model]
n = 2
radius = 6.0

[warp]
family = "hyperbolic"
params = [1.0]

[weight]
family = "log_poly"
params = [1.0]

[run]
suites = ["comparison", "curvature"]
grid = 200
"#;

fn driftlab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_driftlab"))
        .args(args)
        .current_dir(cwd)
        .env_remove("DRIFTLAB_OUT")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn files(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path
                    .strip_prefix(root)
                    .unwrap()
                    .to_string_lossy()
                    .into_owned();
                out.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn passing_run_exits_zero_and_writes_bundle() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = driftlab(&["run", "--config", &cfg, "--out", "bundle"], tmp.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("curvature") && stdout.contains("comparison"));

    let bundle = tmp.path().join("bundle");
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(bundle.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["exit_code"], 0);
    assert_eq!(summary["suites"].as_array().unwrap().len(), 2);
    // the resolved config in the header parses back to the same config
    let header = summary["config"].as_str().unwrap();
    let reparsed = driftlab::config::RunConfig::parse(header).unwrap();
    assert_eq!(reparsed.to_toml(), header);
    assert!(bundle.join("metadata.json").exists());
    assert!(bundle.join("suites/curvature.json").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    for dir in ["a", "b"] {
        let out = driftlab(&["run", "--config", &cfg, "--out", dir], tmp.path());
        assert_eq!(out.status.code(), Some(0));
    }
    let strip = |v: Vec<(String, Vec<u8>)>| -> Vec<(String, Vec<u8>)> {
        v.into_iter()
            .filter(|(name, _)| name != "metadata.json")
            .collect()
    };
    let a = strip(files(&tmp.path().join("a")));
    let b = strip(files(&tmp.path().join("b")));
    assert!(a.len() > 3);
    assert_eq!(a, b);
}

#[test]
fn config_errors_exit_two_with_location() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "[model]\nradius = 6.0\n");
    let out = driftlab(&["run", "--config", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("line") && stderr.contains("`n`"),
        "{stderr}"
    );

    let cfg = write_config(
        tmp.path(),
        &SMALL.replace("grid = 200", "grid = 200\ncolour = 1"),
    );
    let out = driftlab(&["run", "--config", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(2));

    let out = driftlab(&["run", "--suite", "nope"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!tmp.path().join("driftlab-report").exists());
}

#[test]
fn unwritable_output_exits_one() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    std::fs::write(tmp.path().join("taken"), b"not a directory").unwrap();
    let out = driftlab(&["run", "--config", &cfg, "--out", "taken"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(
        std::fs::read(tmp.path().join("taken")).unwrap(),
        b"not a directory"
    );
}

#[test]
fn output_directory_from_environment() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = Command::new(env!("CARGO_BIN_EXE_driftlab"))
        .args(["run", "--config", &cfg])
        .current_dir(tmp.path())
        .env("DRIFTLAB_OUT", "from-env")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(tmp.path().join("from-env/summary.json").exists());
}

#[test]
fn list_models_text_json_and_filter() {
    let tmp = TempDir::new().unwrap();
    let out = driftlab(&["list-models"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("families:") && text.contains("hyperbolic"));

    let out = driftlab(&["list-models", "--json"], tmp.path());
    let cat: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(cat["models"].as_array().unwrap().len() >= 5);
    assert!(cat["families"].as_array().unwrap().len() >= 8);

    let out = driftlab(
        &["list-models", "--json", "--property", "exponential"],
        tmp.path(),
    );
    let cat: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let names: Vec<&str> = cat["models"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["hyperbolic"]);

    let out = driftlab(&["list-models", "--property", "bogus"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn schema_is_json() {
    let tmp = TempDir::new().unwrap();
    let out = driftlab(&["schema"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let schema: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(schema["properties"]["model"].is_object());
}
