use std::path::Path;
use std::process::Command;

use layerscat::{phase_shifts, LayeredPotential, Verdict};
use layerscat_cli::{cmd_forward, cmd_invert, parse_config_str, RunConfig};

fn config(src: &str) -> RunConfig {
    parse_config_str(src, Path::new("test.toml")).unwrap()
}

fn column(table: &str, col: usize) -> Vec<String> {
    table
        .lines()
        .skip(1)
        .map(|l| l.split('\t').nth(col).unwrap().to_string())
        .collect()
}

#[test]
fn forward_table_reproduces_reference_entries() {
    let dir = tempfile::tempdir().unwrap();
    let out = cmd_forward(&config("k = [1.0, 4.0]"), dir.path()).unwrap();
    assert_eq!(out.sets.len(), 2);
    let table = std::fs::read_to_string(dir.path().join("phase_shifts.tsv")).unwrap();
    assert_eq!(table.lines().next().unwrap(), "l\tk=1\tk=4");
    assert_eq!(table.lines().count(), 32);
    let k1 = column(&table, 1);
    let k4 = column(&table, 2);
    for (got, want) in [
        (&k1[0], -0.66496),
        (&k1[6], 1.54292),
        (&k4[17], 1.56437),
        (&k4[30], -1.25626),
    ] {
        let v: f64 = got.parse().unwrap();
        assert!((v - want).abs() <= 5e-4, "{got} vs {want}");
    }
    // The table holds the machine values rounded.
    for (l, s) in k4.iter().enumerate() {
        assert_eq!(*s, layerscat_cli::output::fixed(out.sets[1].shifts[l], 5));
    }
}

#[test]
fn forward_zero_potential_gives_zero_table() {
    let dir = tempfile::tempdir().unwrap();
    cmd_forward(
        &config("k = [2.0]\n[potential]\nbreakpoints = []\nvalues = []\n"),
        dir.path(),
    )
    .unwrap();
    let table = std::fs::read_to_string(dir.path().join("phase_shifts.tsv")).unwrap();
    assert!(column(&table, 1).iter().all(|s| s == "0.00000"));
}

#[test]
fn forward_json_is_the_library_output() {
    let dir = tempfile::tempdir().unwrap();
    cmd_forward(
        &config("k = [2.0]\n[potential]\nbreakpoints = [8.0]\nvalues = [-4.0]\n"),
        dir.path(),
    )
    .unwrap();
    let json = std::fs::read_to_string(dir.path().join("phase_shifts.json")).unwrap();
    let parsed: layerscat_cli::ForwardOutput = serde_json::from_str(&json).unwrap();
    let direct = phase_shifts(&LayeredPotential::step(8.0, -4.0).unwrap(), 2.0, 30).unwrap();
    assert_eq!(parsed.schema_version, 1);
    assert_eq!(parsed.sets[0], direct);
}

#[test]
fn singleton_set_inversion_stops_at_once() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("seed = 4\nk = [2.0]\n[irrs]\nbatch_size = 200\ngamma = 0.01\nnu = 0.5\n");
    let out = cmd_invert(&cfg, dir.path(), Some(1)).unwrap();
    let r = &out.runs[0].report;
    assert_eq!(
        (r.verdict, r.iterations(), r.final_index()),
        (Verdict::Stable, 1, 0.0)
    );
    let table = std::fs::read_to_string(dir.path().join("stability_indices.tsv")).unwrap();
    assert_eq!(table, "k\titeration\th=0\n2.00\t1\t0.000000\n");
    let recovered = std::fs::read_to_string(dir.path().join("recovered.tsv")).unwrap();
    assert_eq!(recovered.lines().count(), 2);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["seed"], 4);
    assert_eq!(report["runs"][0]["report"]["verdict"], "stable");
    assert_eq!(report["merge_rule"], "previous-minimizing-set");
}

#[test]
fn shallow_well_is_stable_after_one_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let cfg =
        config("k = [2.0]\n[potential]\nbreakpoints = [8.0]\nvalues = [-0.6666666666666666]\n");
    let out = cmd_invert(&cfg, dir.path(), None).unwrap();
    let r = &out.runs[0].report;
    assert_eq!(r.verdict, Verdict::Stable);
    assert_eq!(r.iterations(), 1);
}

#[test]
fn binary_reports_every_config_problem_with_lines() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "k = [1.0]\n[irrs]\ngamma = 1.5\nnu = 2.0\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_layerscat"))
        .args(["invert", "--config"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("bad.toml:3: irrs.gamma"), "{err}");
    assert!(err.contains("0 < gamma < 1"), "{err}");
    assert!(err.contains("bad.toml:4: irrs.nu"), "{err}");
}

#[test]
fn binary_forward_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("tables");
    let status = Command::new(env!("CARGO_BIN_EXE_layerscat"))
        .args(["forward", "--seed", "3", "--out"])
        .arg(&out_dir)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out_dir.join("phase_shifts.tsv").exists());
    assert!(out_dir.join("phase_shifts.json").exists());
}

#[test]
fn binary_exit_code_reflects_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(
        &path,
        "k = [2.0]\n[irrs]\nbatch_size = 200\nnu = 0.5\ngamma = 0.01\n",
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_layerscat"))
        .args(["invert", "--workers", "2", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("stable"));
}
