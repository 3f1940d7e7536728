use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::Context;
use frl_core::evaluation::{
    all_records, brier_bins, brier_bins_table, check_integrity, dataset_summary, decile_summary,
    decile_table, format_five_number, instance, learn_fold, oracle_sweep, read_records_csv,
    run_experiment, scatter_table, summary_text, sweep_table, timing_ratios, write_records_csv,
    FiveNumber, FoldResult, ZERO_FRL,
};
use frl_core::fairness::FrlRecord;
use frl_core::ingest::{load_csv, sidecar_path, Dataset};
use frl_core::learning::write_network_with_header;
use frl_core::model::Role;
use frl_core::par::Execution;

use crate::{
    create_run_dir, header_lines, with_header, OracleMismatchError, RunConfig, UsageError,
};

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_config(dir: &Path, header: &[String], config: &RunConfig) -> anyhow::Result<()> {
    let body = toml::to_string(config).context("serialising the configuration")?;
    write(&dir.join("config.toml"), &with_header(header, &body))
}

/// Reads the input as a discretised dataset when it has a metadata sidecar,
/// otherwise ingests it as raw CSV using the `[ingest]` section. A
/// discretised input is re-stratified when `folds` or `seed` is set.
pub fn load_dataset(config: &RunConfig) -> anyhow::Result<Dataset> {
    let input = config.input()?;
    if sidecar_path(input).exists() {
        let ds = Dataset::read_discretised(input)
            .with_context(|| format!("reading {}", input.display()))?;
        if config.folds.is_some() || config.seed.is_some() {
            let n_folds = config.folds.unwrap_or(ds.n_folds());
            let seed = config.seed.unwrap_or(ds.seed());
            if (n_folds, seed) != (ds.n_folds(), ds.seed()) {
                log::info!("re-stratifying into {n_folds} folds with seed {seed}");
                return Ok(ds.refold(n_folds, seed)?);
            }
        }
        Ok(ds)
    } else {
        let ingest = config.ingest()?;
        Ok(load_csv(input, ingest).with_context(|| format!("ingesting {}", input.display()))?)
    }
}

/// Ingests the raw input and writes `discretised.csv` with its sidecar.
pub fn discretise(config: &RunConfig) -> anyhow::Result<PathBuf> {
    let input = config.input()?;
    let ingest = config.ingest()?;
    let dataset =
        load_csv(input, ingest).with_context(|| format!("ingesting {}", input.display()))?;
    let dir = create_run_dir(&config.out)?;
    let header = header_lines("discretise", config, Some(dataset.seed()));
    write_config(&dir, &header, config)?;
    let path = dir.join("discretised.csv");
    dataset.write_discretised(&path, &header)?;
    log::info!(
        "{} rows, {} variables written to {}",
        dataset.n_rows(),
        dataset.n_vars(),
        path.display()
    );
    Ok(dir)
}

pub struct RunOutcome {
    pub dir: PathBuf,
    pub folds: Vec<FoldResult>,
}

/// Cross-validated FRL experiment. Fails with [`OracleMismatchError`] after
/// writing every output if the oracle disagreed anywhere.
pub fn run(config: &RunConfig) -> anyhow::Result<RunOutcome> {
    let dataset = load_dataset(config)?;
    let exp = config.experiment_config(&dataset)?;
    let dir = create_run_dir(&config.out)?;
    let header = header_lines("run", config, Some(dataset.seed()));
    write_config(&dir, &header, config)?;

    let folds = run_experiment(&dataset, &exp)?;

    let path = dir.join("records.csv");
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    write_records_csv(BufWriter::new(file), &header, dataset.variables(), &folds)?;

    let records: Vec<&FrlRecord> = all_records(&folds).into_iter().map(|(_, r)| r).collect();
    let deciles = decile_summary(records.iter().copied(), config.experiment.decile_bins)?;
    let timings = if exp.oracle && exp.timings {
        Some(timing_ratios(records.iter().copied())?)
    } else {
        None
    };
    let integrity = check_integrity(&folds);
    let mismatches: usize = folds.iter().map(|f| f.mismatches.len()).sum();
    let mut summary = summary_text(
        &dataset_summary(&dataset, &folds),
        &deciles,
        timings.as_ref(),
        &integrity,
    );
    if exp.oracle {
        let skipped: usize = folds.iter().map(|f| f.oracle_skipped).sum();
        let _ = writeln!(
            summary,
            "\n[oracle]\nmismatches = {mismatches}\nskipped = {skipped}"
        );
    }
    write(&dir.join("summary.txt"), &with_header(&header, &summary))?;
    write(
        &dir.join("deciles.csv"),
        &with_header(&header, &decile_table(&deciles)),
    )?;
    write(
        &dir.join("scatter.csv"),
        &with_header(&header, &scatter_table(records.iter().copied())),
    )?;
    let bins = brier_bins(records.iter().copied(), config.experiment.brier_bins)?;
    write(
        &dir.join("brier_bins.csv"),
        &with_header(&header, &brier_bins_table(&bins)),
    )?;

    let net_dir = dir.join("networks");
    std::fs::create_dir(&net_dir).with_context(|| format!("creating {}", net_dir.display()))?;
    for f in &folds {
        let text = write_network_with_header(&f.network, &header)?;
        write(&net_dir.join(format!("fold-{:02}.json", f.fold)), &text)?;
    }
    if !integrity.is_clean() {
        log::warn!(
            "integrity checks failed; see {}",
            dir.join("summary.txt").display()
        );
    }
    if mismatches > 0 {
        return Err(OracleMismatchError {
            count: mismatches,
            dir,
        }
        .into());
    }
    Ok(RunOutcome { dir, folds })
}

/// Learns on the training rows of fold 0, then grows the private set one
/// feature at a time (configured private features first, then public ones in
/// column order) and times both FRL paths on test rows of fold 0.
pub fn sweep(config: &RunConfig) -> anyhow::Result<PathBuf> {
    let dataset = load_dataset(config)?;
    let exp = config.experiment_config(&dataset)?;
    let s = &config.sweep;
    if s.min_private == 0 || s.min_private > s.max_private {
        return Err(UsageError(format!(
            "bad sweep range {}..={}",
            s.min_private, s.max_private
        ))
        .into());
    }
    let network = learn_fold(&dataset, &exp, 0)?;
    let mut candidates = dataset.with_role(Role::Private);
    candidates.extend(dataset.with_role(Role::Public));
    let instances: Vec<_> = dataset
        .rows_in_fold(0)
        .into_iter()
        .take(s.instances)
        .map(|r| instance(&dataset, r))
        .collect();
    let dir = create_run_dir(&config.out)?;
    let header = header_lines("oracle-sweep", config, Some(dataset.seed()));
    write_config(&dir, &header, config)?;
    let rows = oracle_sweep(
        &network,
        &instances,
        &candidates,
        s.min_private..=s.max_private,
        exp.brute_force_cap,
        Execution::Sequential,
    )?;
    write(
        &dir.join("sweep.csv"),
        &with_header(&header, &sweep_table(&rows)),
    )?;
    write(
        &dir.join("network.json"),
        &write_network_with_header(&network, &header)?,
    )?;
    let mismatches: usize = rows.iter().map(|r| r.mismatches).sum();
    if mismatches > 0 {
        return Err(OracleMismatchError {
            count: mismatches,
            dir,
        }
        .into());
    }
    Ok(dir)
}

/// Summary of a per-instance CSV written by `run`.
pub fn summarise(path: &Path, decile_bins: usize, brier_bins_n: usize) -> anyhow::Result<String> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let rows = read_records_csv(file)?;
    let records: Vec<FrlRecord> = rows.iter().map(|r| r.to_record()).collect();
    let deciles = decile_summary(&records, decile_bins)?;
    let mut s = String::new();
    let zero = records.iter().filter(|r| r.frl.abs() <= ZERO_FRL).count();
    let _ = writeln!(
        s,
        "[records]\ninstances = {}\nzero_frl = {zero}",
        records.len()
    );
    let _ = writeln!(s, "\n[deciles]\n{}", decile_table(&deciles).trim_end());
    let bins = brier_bins(&records, brier_bins_n)?;
    let _ = writeln!(s, "\n[brier_bins]\n{}", brier_bins_table(&bins).trim_end());
    let _ = writeln!(s, "\n[timing_ratio_bruteforce_over_mrf]");
    match timing_ratios(&records) {
        Ok(f) => {
            let _ = writeln!(s, "{}", format_five_number(&f));
        }
        Err(_) => {
            let _ = writeln!(s, "unavailable");
        }
    }
    let frl =
        FiveNumber::of(&records.iter().map(|r| r.frl).collect::<Vec<_>>()).expect("non-empty");
    let _ = writeln!(s, "\n[frl]\n{}", format_five_number(&frl));
    let brier_off = records
        .iter()
        .filter(|r| {
            let p_true = if r.true_class == 0 {
                r.posterior_y0
            } else {
                1.0 - r.posterior_y0
            };
            (r.brier - (1.0 - p_true).powi(2)).abs() > 1e-12
        })
        .count();
    let _ = writeln!(s, "\n[integrity]\nbrier_violations = {brier_off}");
    Ok(s)
}
