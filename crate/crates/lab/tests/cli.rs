use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use indep_lab::{validate, ExperimentConfig};

fn lab() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lab"));
    cmd.env_remove("LAB_THREADS");
    cmd
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run_to(config: &Path, out: &Path) -> Output {
    lab().arg("run").arg(config).arg("--out").arg(out).output().unwrap()
}

fn codes(text: &str) -> Vec<String> {
    validate(&ExperimentConfig::from_json(text).unwrap())
        .into_iter()
        .map(|d| d.code)
        .collect()
}

const CONSTANT_IP: &str = r#"{"experiment":"ip-estimate","seed":1,"samples":5000,"output_dir":"o",
  "params":{"grid":{"kind":"constant","d":2,"side":1.0,"n":16,"value":1.0},"points":[[0,0],[0.1,0.1]]}}"#;

#[test]
fn constant_grid_counts_every_copy() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", CONSTANT_IP);
    let out = run_to(&cfg, &dir.path().join("out"));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("out/results.csv")).unwrap();
    assert_eq!(csv, "value,std_error,samples\n1,0,5000\n");
}

#[test]
fn repeated_runs_have_identical_checksums() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", CONSTANT_IP);
    let sums: Vec<serde_json::Value> = ["a", "b"]
        .iter()
        .map(|name| {
            let out = dir.path().join(name);
            assert!(run_to(&cfg, &out).status.success());
            let manifest: serde_json::Value =
                serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
            manifest["outputs"].clone()
        })
        .collect();
    assert_eq!(sums[0], sums[1]);
}

#[test]
fn seed_override_changes_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "r.json",
        r#"{"experiment":"ip-estimate","seed":1,"samples":5000,"output_dir":"o",
            "params":{"grid":{"kind":"random_binary","d":2,"side":1.0,"n":32,"p":0.5},"points":[[0,0],[0.1,0]]}}"#,
    );
    let read = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let result = lab()
            .args(["run"])
            .arg(&cfg)
            .args(["--seed", seed, "--out"])
            .arg(&out)
            .output()
            .unwrap();
        assert!(result.status.success());
        std::fs::read(out.join("results.csv")).unwrap()
    };
    assert_eq!(read("a", "5"), read("b", "5"));
    assert_ne!(read("a", "5"), read("c", "6"));
}

#[test]
fn counting_probe_on_constant_grid_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"experiment":"counting-probe","seed":2,"samples":4000,"output_dir":"o",
            "params":{"grid":{"kind":"constant","d":2,"side":1.0,"n":32,"value":0.5},
                      "points":[[0,0],[0.2,0]],"deltas":[0.2,0.1,0.05]}}"#,
    );
    let out = run_to(&cfg, &dir.path().join("out"));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("out/results.csv")).unwrap();
    for line in csv.lines().skip(1) {
        assert_eq!(line.split(',').nth(1), Some("0"), "{line}");
    }
}

#[test]
fn diagnostics() {
    assert!(codes(CONSTANT_IP).is_empty());
    let thin = r#"{"experiment":"counting-probe","seed":2,"samples":4000,"output_dir":"o",
        "params":{"grid":{"kind":"constant","d":2,"side":1.0,"n":32,"value":0.5},
                  "points":[[0,0],[0.2,0]],"deltas":[0.2,0.01]}}"#;
    assert_eq!(codes(thin), vec!["DegenerateBlur"]);
    let scan = r#"{"experiment":"scale-scan","seed":1,"samples":4000,"output_dir":"o",
        "params":{"points":[[1,0,0],[0,1,0]],"t_list":[1.0,1.5]}}"#;
    assert_eq!(codes(scan), vec!["BadScale"]);
    let wide = r#"{"experiment":"ip-estimate","seed":1,"samples":5000,"output_dir":"o",
        "params":{"grid":{"kind":"constant","d":2,"side":1.0,"n":16,"value":1.0},"points":[[0,0],[0.6,0]]}}"#;
    assert_eq!(codes(wide), vec!["DiameterTooLarge"]);
    let small = CONSTANT_IP.replace("5000", "10");
    assert_eq!(codes(&small), vec!["SampleBudget"]);
    let missing = r#"{"experiment":"ip-estimate","seed":1,"samples":5000,"output_dir":"o",
        "params":{"grid":{"kind":"file","path":"/nonexistent/g.tgrd"},"points":[[0,0],[0.1,0]]}}"#;
    assert_eq!(codes(missing), vec!["MissingInput"]);
    let unknown_param = CONSTANT_IP.replace("\"points\"", "\"colour\":1,\"points\"");
    assert_eq!(codes(&unknown_param), vec!["Schema"]);
}

#[test]
fn unknown_top_level_key_is_rejected() {
    let text = CONSTANT_IP.replace("\"seed\"", "\"sede\":0,\"seed\"");
    assert!(ExperimentConfig::from_json(&text).is_err());
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", &text);
    assert_eq!(lab().arg("validate").arg(&cfg).output().unwrap().status.code(), Some(2));
    assert_eq!(run_to(&cfg, &dir.path().join("out")).status.code(), Some(2));
}

#[test]
fn validate_command_reports() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_config(dir.path(), "good.json", CONSTANT_IP);
    let out = lab().arg("validate").arg(&good).output().unwrap();
    assert!(out.status.success());
    let bad = write_config(
        dir.path(),
        "bad.json",
        r#"{"experiment":"cap-avoider","seed":1,"samples":4000,"output_dir":"o",
            "params":{"points":[[1,0,0],[0,1,0]],"t":1.5}}"#,
    );
    let out = lab().arg("validate").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("BadScale"));
    assert_eq!(run_to(&bad, &dir.path().join("out")).status.code(), Some(2));
}

#[test]
fn inconsistent_bound_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "b.json",
        r#"{"experiment":"bound-report","seed":1,"samples":4000,"output_dir":"o",
            "params":{"points":[[0,0],[0.1,0]],"side":1.0,"n":128,"ceilings":[0.01]}}"#,
    );
    let out = run_to(&cfg, &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("inconsistent"));
}

#[test]
fn grid_gen_and_info_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("g.tgrd");
    let out = lab()
        .args(["grid", "gen"])
        .arg(&file)
        .args([
            "--kind",
            "random-binary",
            "--n",
            "32",
            "--p",
            "0.25",
            "--seed",
            "4",
            "--label",
            "demo",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(indep_core::euclidean::sidecar_path(&file).exists());
    let info = lab().args(["grid", "info"]).arg(&file).output().unwrap();
    let meta: serde_json::Value = serde_json::from_slice(&info.stdout).unwrap();
    assert_eq!(meta["cells_per_axis"], 32);
    assert_eq!(meta["d"], 2);

    let cfg = write_config(
        dir.path(),
        "f.json",
        r#"{"experiment":"ip-estimate","seed":1,"samples":5000,"output_dir":"o",
            "params":{"grid":{"kind":"file","path":"g.tgrd"},"points":[[0,0],[0.1,0]]}}"#,
    );
    assert!(run_to(&cfg, &dir.path().join("out")).status.success());
}

#[test]
fn shipped_configs_validate_and_run() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    let out_root = tempfile::tempdir().unwrap();
    for entry in std::fs::read_dir(&root).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        seen += 1;
        let config = ExperimentConfig::load(&path).unwrap();
        assert!(
            validate(&config).is_empty(),
            "{}: {:?}",
            path.display(),
            validate(&config)
        );
        let out = out_root.path().join(path.file_stem().unwrap());
        let result = run_to(&path, &out);
        assert!(
            result.status.success(),
            "{}: {}",
            path.display(),
            String::from_utf8_lossy(&result.stderr)
        );
        for name in ["results.csv", "results.json", "manifest.json"] {
            assert!(out.join(name).exists(), "{} missing {name}", path.display());
        }
    }
    assert!(seen >= 10);
}
