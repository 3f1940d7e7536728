//! Front end of the `frl` binary: configuration, run directories, file
//! headers and the commands themselves.

pub mod commands;
pub mod config;

use std::path::{Path, PathBuf};

use anyhow::Context;
use frl_core::error::Category;

pub use config::{Overrides, RunConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Bad flags, configuration or missing inputs.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

/// The two FRL paths disagreed on at least one instance.
#[derive(Debug, thiserror::Error)]
#[error("{count} oracle mismatches; see {}", dir.display())]
pub struct OracleMismatchError {
    pub count: usize,
    pub dir: PathBuf,
}

pub mod exit {
    pub const OK: u8 = 0;
    pub const OTHER: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const INGEST: u8 = 3;
    pub const LEARNING: u8 = 4;
    pub const INFERENCE: u8 = 5;
    pub const ORACLE_MISMATCH: u8 = 6;
}

/// Process exit status for a failed command.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return exit::USAGE;
        }
        if cause.is::<OracleMismatchError>() {
            return exit::ORACLE_MISMATCH;
        }
        if let Some(e) = cause.downcast_ref::<frl_core::Error>() {
            return match e.category() {
                Category::Ingest => exit::INGEST,
                Category::Learning => exit::LEARNING,
                Category::Model | Category::Inference | Category::Fairness => exit::INFERENCE,
                Category::Evaluation | Category::Io => exit::OTHER,
            };
        }
    }
    exit::OTHER
}

/// Creates `<out>/run-NNN` with the first unused number.
pub fn create_run_dir(out: &Path) -> anyhow::Result<PathBuf> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    for n in 1..=99_999 {
        let dir = out.join(format!("run-{n:03}"));
        match std::fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e).with_context(|| format!("creating {}", dir.display())),
        }
    }
    anyhow::bail!("no free run directory under {}", out.display())
}

/// Provenance lines written at the top of every output file.
pub fn header_lines(command: &str, config: &RunConfig, dataset_seed: Option<u64>) -> Vec<String> {
    let seed = |s: Option<u64>| s.map_or("none".to_string(), |s| s.to_string());
    vec![
        format!("frl {VERSION}"),
        format!("command {command}"),
        format!(
            "seeds run={} dataset={}",
            seed(config.seed),
            seed(dataset_seed)
        ),
        format!(
            "config {}",
            serde_json::to_string(config).expect("config serialises")
        ),
    ]
}

/// `lines` as `# ` comments followed by `body`.
pub fn with_header(lines: &[String], body: &str) -> String {
    let mut s: String = lines.iter().map(|l| format!("# {l}\n")).collect();
    s.push_str(body);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_directories_count_up() {
        let tmp = tempfile::tempdir().unwrap();
        let a = create_run_dir(tmp.path()).unwrap();
        let b = create_run_dir(tmp.path()).unwrap();
        assert_eq!(a.file_name().unwrap(), "run-001");
        assert_eq!(b.file_name().unwrap(), "run-002");
        std::fs::remove_dir(&a).unwrap();
        assert_eq!(
            create_run_dir(tmp.path()).unwrap().file_name().unwrap(),
            "run-001"
        );
    }

    #[test]
    fn exit_codes_follow_error_kinds() {
        let e: anyhow::Error = frl_core::Error::NoRows.into();
        assert_eq!(exit_code(&e), exit::INGEST);
        let e: anyhow::Error = frl_core::Error::CyclicForcedArcs.into();
        assert_eq!(exit_code(&e.context("learning")), exit::LEARNING);
        let e: anyhow::Error = frl_core::Error::ZeroEvidence.into();
        assert_eq!(exit_code(&e), exit::INFERENCE);
        let e: anyhow::Error = UsageError("x".into()).into();
        assert_eq!(exit_code(&e), exit::USAGE);
        let e: anyhow::Error = OracleMismatchError {
            count: 1,
            dir: "d".into(),
        }
        .into();
        assert_eq!(exit_code(&e), exit::ORACLE_MISMATCH);
        assert_eq!(exit_code(&anyhow::anyhow!("other")), exit::OTHER);
    }

    #[test]
    fn headers_carry_version_and_config() {
        let cfg = RunConfig {
            seed: Some(4),
            ..Default::default()
        };
        let lines = header_lines("run", &cfg, Some(4));
        assert!(lines[0].ends_with(VERSION));
        assert_eq!(lines[2], "seeds run=4 dataset=4");
        assert!(with_header(&lines, "a,b\n")
            .lines()
            .take(4)
            .all(|l| l.starts_with("# ")));
    }
}
