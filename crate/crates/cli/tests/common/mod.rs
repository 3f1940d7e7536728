#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use frl_core::model::BayesianNetwork;
use frl_core::synth::sample_rows;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Writes `n_rows` forward samples of `bn` as a raw CSV with the variable
/// names as header and `<name><state>` labels as cells.
pub fn write_raw_csv(bn: &BayesianNetwork, n_rows: usize, seed: u64, path: &Path) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = sample_rows(bn, n_rows, &mut rng);
    let names: Vec<&str> = bn.variables().values().map(|v| v.name.as_str()).collect();
    let mut text = names.join(",");
    text.push('\n');
    for row in rows {
        let cells: Vec<String> = bn
            .variables()
            .values()
            .map(|v| format!("{}{}", &v.name[..1], row[v.id.index()]))
            .collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    std::fs::write(path, text).unwrap();
}

pub fn frl() -> Command {
    Command::new(env!("CARGO_BIN_EXE_frl"))
}

pub fn run_ok(args: &[&str]) -> PathBuf {
    let out = frl().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "frl {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    PathBuf::from(String::from_utf8(out.stdout).unwrap().trim())
}

pub fn run_raw(args: &[&str]) -> Output {
    frl().args(args).output().unwrap()
}

/// Body of a file written by the binary, without its `#` header.
pub fn body(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect()
}
