mod common;

use common::{body, run_ok, run_raw, write_raw_csv};
use frl_core::synth::planted_bias_network;

fn setup(dir: &std::path::Path, extra: &str) -> String {
    let csv = dir.join("raw.csv");
    write_raw_csv(&planted_bias_network(), 1500, 11, &csv);
    let cfg = dir.join("cfg.toml");
    std::fs::write(
        &cfg,
        format!(
            "input = {csv:?}\nout = {:?}\n[ingest]\ntarget_column = \"income\"\nprivate_columns = [\"sex\", \"race\"]\nn_folds = 4\n{extra}",
            dir.join("out")
        ),
    )
    .unwrap();
    cfg.to_str().unwrap().to_string()
}

#[test]
fn run_writes_every_output_with_headers() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = setup(tmp.path(), "[experiment]\noracle = true\n");
    let dir = run_ok(&["run", "--config", &cfg]);
    assert_eq!(dir.file_name().unwrap(), "run-001");
    for f in [
        "records.csv",
        "summary.txt",
        "deciles.csv",
        "scatter.csv",
        "brier_bins.csv",
        "config.toml",
    ] {
        let text = std::fs::read_to_string(dir.join(f)).unwrap();
        assert!(text.starts_with("# frl "), "{f} lacks a header");
        assert!(text.contains("# config {"), "{f} lacks the config");
    }
    for k in 0..4 {
        let net = std::fs::read_to_string(dir.join(format!("networks/fold-{k:02}.json"))).unwrap();
        frl_core::learning::read_network(&net).unwrap();
    }
    let records = body(&dir.join("records.csv"));
    assert_eq!(records.lines().count(), 1501);
    let summary = std::fs::read_to_string(dir.join("summary.txt")).unwrap();
    assert!(summary.contains("mismatches = 0"));
    assert!(summary.contains("bound_violations = 0"));
}

#[test]
fn identical_runs_are_byte_identical_and_timings_only_add_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = setup(tmp.path(), "");
    let a = run_ok(&["run", "--config", &cfg, "--jobs", "2"]);
    let b = run_ok(&["run", "--config", &cfg, "--jobs", "2"]);
    assert_ne!(a, b);
    assert_eq!(
        std::fs::read(a.join("records.csv")).unwrap(),
        std::fs::read(b.join("records.csv")).unwrap()
    );
    let c = run_ok(&["run", "--config", &cfg, "--oracle", "--timings"]);
    let strip = |text: String| -> Vec<String> {
        text.lines()
            .map(|l| l.split(',').take(8).collect::<Vec<_>>().join(","))
            .collect()
    };
    assert_eq!(
        strip(body(&a.join("records.csv"))),
        strip(body(&c.join("records.csv")))
    );
    let summary = std::fs::read_to_string(c.join("summary.txt")).unwrap();
    assert!(!summary.contains("unavailable"));
}

#[test]
fn discretised_input_is_reused_and_refolded_on_request() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = setup(tmp.path(), "");
    let d = run_ok(&["discretise", "--config", &cfg]);
    let disc = d.join("discretised.csv");
    assert!(d.join("discretised.meta.json").exists());
    let from_raw = run_ok(&["run", "--config", &cfg]);
    let from_disc = run_ok(&["run", "--config", &cfg, "--input", disc.to_str().unwrap()]);
    assert_eq!(
        body(&from_raw.join("records.csv")),
        body(&from_disc.join("records.csv"))
    );
    let refolded = run_ok(&[
        "run",
        "--config",
        &cfg,
        "--input",
        disc.to_str().unwrap(),
        "--folds",
        "3",
    ]);
    let folds: std::collections::BTreeSet<String> = body(&refolded.join("records.csv"))
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().to_string())
        .collect();
    assert_eq!(folds.into_iter().collect::<Vec<_>>(), ["0", "1", "2"]);
}

#[test]
fn summarise_reads_records_back() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = setup(tmp.path(), "");
    let dir = run_ok(&["run", "--config", &cfg]);
    let out = run_raw(&[
        "summarise",
        dir.join("records.csv").to_str().unwrap(),
        "--deciles",
        "5",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("instances = 1500"));
    assert!(text.contains("brier_violations = 0"));
    assert!(text.contains("\n4,false,"));
}

#[test]
fn sweep_grows_the_private_set() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = setup(
        tmp.path(),
        "[sweep]\nmin_private = 1\nmax_private = 4\ninstances = 30\n",
    );
    let dir = run_ok(&["oracle-sweep", "--config", &cfg, "--force-target-arcs"]);
    let table = body(&dir.join("sweep.csv"));
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    for (k, row) in rows.iter().enumerate() {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells[0], (k + 1).to_string());
        assert_eq!(cells[8], "0", "mismatches in {row}");
    }
}

#[test]
fn failures_map_to_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = setup(tmp.path(), "");
    assert_eq!(run_raw(&["run", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(run_raw(&["run"]).status.code(), Some(2));
    let bad = tmp.path().join("bad.toml");
    std::fs::write(&bad, "sead = 1\n").unwrap();
    assert_eq!(
        run_raw(&["run", "--config", bad.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    let wrong_target = tmp.path().join("wrong.toml");
    let text = std::fs::read_to_string(&cfg)
        .unwrap()
        .replace("\"income\"", "\"salary\"");
    std::fs::write(&wrong_target, text).unwrap();
    assert_eq!(
        run_raw(&["run", "--config", wrong_target.to_str().unwrap()])
            .status
            .code(),
        Some(3)
    );
    let ess = run_raw(&["run", "--config", &cfg, "--ess", "0"]);
    assert_eq!(ess.status.code(), Some(4));
}
