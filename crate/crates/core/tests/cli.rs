use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn pmbfuse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pmbfuse")).args(args).output().unwrap()
}

fn manifest(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_dir_sorted(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            let bytes = std::fs::read(&p).unwrap();
            (PathBuf::from(p.file_name().unwrap()), bytes)
        })
        .collect();
    files.sort();
    files
}

const SHORT: [&str; 4] = ["--override", "n_runs=1", "--override", "steps=8"];

#[test]
fn simulate_is_reproducible() {
    let cfg = manifest("configs/table1_nf5.cfg");
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for dir in [&a, &b] {
        let out_dir = dir.path().display().to_string();
        let mut args = vec!["simulate", cfg.as_str(), "-o", out_dir.as_str(), "--seed", "7"];
        args.extend(SHORT);
        let o = pmbfuse(&args);
        assert!(o.status.success(), "{}", stderr(&o));
        let table = stdout(&o);
        for v in ["DPMB-TO-GCI", "DPMB-GNN-GCI", "DPMB-TO-AA", "DPMB-GNN-AA", "CPMBM"] {
            assert!(table.contains(v), "{v} missing from\n{table}");
        }
    }
    let (fa, fb) = (read_dir_sorted(a.path()), read_dir_sorted(b.path()));
    assert_eq!(fa.len(), 8);
    assert_eq!(fa, fb);
}

#[test]
fn thread_count_does_not_change_output() {
    let cfg = manifest("configs/table1_nf5.cfg");
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for (dir, threads) in [(&a, "1"), (&b, "4")] {
        let out_dir = dir.path().display().to_string();
        let mut args = vec!["simulate", cfg.as_str(), "-o", out_dir.as_str(), "--threads", threads];
        args.extend(["--override", "n_runs=3", "--override", "steps=6"]);
        assert!(pmbfuse(&args).status.success());
    }
    assert_eq!(read_dir_sorted(a.path()), read_dir_sorted(b.path()));
}

#[test]
fn missing_config_is_reported() {
    let o = pmbfuse(&["simulate", "/no/such/scenario.cfg"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/no/such/scenario.cfg"));
}

#[test]
fn unknown_override_key_is_rejected() {
    let cfg = manifest("configs/table1_nf5.cfg");
    let o = pmbfuse(&["simulate", &cfg, "--override", "no_such_key=3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no_such_key"));
}

#[test]
fn fuse_demo_example_one() {
    let (a, b) = (manifest("data/example1_a.json"), manifest("data/example1_b.json"));
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("fused.json");
    for pw in ["exact", "published"] {
        let o = pmbfuse(&[
            "fuse-demo", &a, &b, "--no-gate", "--k", "34", "--pair-weight", pw, "-o", &out.display().to_string(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let text = stdout(&o);
        assert!(text.starts_with("34 global hypotheses"), "{text}");
        let top: Vec<&str> = text.lines().nth(2).unwrap().split_whitespace().collect();
        assert_eq!(top[0], "1");
        assert_eq!(top[2], "{(1,1),(2,2)}");
        assert_eq!(top[3], "4");
        let fused = pmbfusion::format::pmbm_from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
        assert_eq!(fused.globals.len(), 34);
    }
}

#[test]
fn fuse_demo_rejects_bad_input() {
    let (a, b) = (manifest("data/example1_a.json"), manifest("data/example1_b.json"));
    let o = pmbfuse(&["fuse-demo", &a, &b, "--omega", "1.0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("omega"), "{}", stderr(&o));
    assert!(!pmbfuse(&["fuse-demo", &a, &b, "--pair-weight", "other"]).status.success());

    let dir = TempDir::new().unwrap();
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{ not json").unwrap();
    let o = pmbfuse(&["fuse-demo", &a, &broken.display().to_string()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("broken.json"));
}

#[test]
fn gospa_command() {
    let dir = TempDir::new().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p.display().to_string()
    };
    let truth = write("truth.csv", "step,x,y\n1,0,0\n1,10,10\n2,5,5\n");
    let same = pmbfuse(&["gospa", &truth, &truth]);
    assert!(same.status.success());
    let text = stdout(&same);
    assert_eq!(text.lines().nth(1).unwrap(), "1,0,0,0,0");
    assert_eq!(text.lines().nth(2).unwrap(), "2,0,0,0,0");

    let one = write("one.csv", "x,y\n0,0\n");
    let none = write("none.csv", "x,y\n");
    let o = pmbfuse(&["gospa", &one, &none, "--c", "10", "--p", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let fields: Vec<f64> = stdout(&o).lines().nth(1).unwrap().split(',').map(|f| f.parse().unwrap()).collect();
    assert!((fields[1] - 7.0711).abs() < 1e-4);
    assert_eq!(&fields[2..], &[0.0, 50.0, 0.0]);

    let bad = write("bad.csv", "x,y\n1,abc\n");
    let o = pmbfuse(&["gospa", &one, &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bad.csv"));
}

#[test]
fn sweep_command() {
    let cfg = manifest("configs/table1_nf5.cfg");
    let o = pmbfuse(&["sweep", &cfg, "--nf", ""]);
    assert!(!o.status.success());
    let o = pmbfuse(&["sweep", &cfg]);
    assert!(!o.status.success());

    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().display().to_string();
    let mut args = vec!["sweep", cfg.as_str(), "-o", out_dir.as_str(), "--nf", "1,5,10"];
    args.extend(["--override", "n_runs=1", "--override", "steps=6"]);
    args.extend(["--override", r#"variants=["DPMB-TO-GCI","CPMBM"]"#]);
    let o = pmbfuse(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let header = stdout(&o).lines().next().unwrap().to_string();
    for nf in ["N_f=1", "N_f=5", "N_f=10"] {
        assert!(header.contains(nf), "{header}");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["rows"].as_array().unwrap().len(), 6);
}

#[test]
fn single_period_sweep_equals_simulate() {
    let cfg = manifest("configs/table1_nf5.cfg");
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let (da, db) = (a.path().display().to_string(), b.path().display().to_string());
    let mut sim = vec!["simulate", cfg.as_str(), "-o", da.as_str()];
    sim.extend(SHORT);
    let mut sweep = vec!["sweep", cfg.as_str(), "-o", db.as_str(), "--nf", "5"];
    sweep.extend(SHORT);
    let (s1, s2) = (pmbfuse(&sim), pmbfuse(&sweep));
    assert!(s1.status.success() && s2.status.success());
    assert_eq!(read_dir_sorted(a.path()), read_dir_sorted(b.path()));
}
