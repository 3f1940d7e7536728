//! Text and CSV renderings of experiment results. Every function returns or
//! writes a body; callers prepend their own `# ` header lines.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::Deserialize;

use super::{DatasetSummary, DecileSummary, FiveNumber, FoldResult, IntegrityReport, SweepRow};
use crate::error::{Error, Result};
use crate::fairness::FrlRecord;
use crate::model::{Assignment, DiscreteVariable, VarId};

pub fn records_header() -> [&'static str; 10] {
    [
        "fold",
        "instance_id",
        "true_class",
        "predicted_class",
        "posterior_y0",
        "brier",
        "frl",
        "x_star",
        "time_bn_ns",
        "time_mrf_ns",
    ]
}

/// `name=label` pairs of `a` in id order, joined by semicolons.
fn labels(a: &Assignment, variables: &BTreeMap<VarId, &DiscreteVariable>) -> String {
    a.iter()
        .map(|(v, s)| match variables.get(&v) {
            Some(d) => format!("{}={}", d.name, d.states.get(s).map_or("?", |l| l.as_str())),
            None => format!("{v}={s}"),
        })
        .collect::<Vec<_>>()
        .join(";")
}

fn opt(v: Option<u64>) -> String {
    v.map_or(String::new(), |t| t.to_string())
}

/// Per-instance CSV of all folds, rows sorted by instance id.
pub fn write_records_csv<W: Write>(
    mut out: W,
    header: &[String],
    variables: &[DiscreteVariable],
    folds: &[FoldResult],
) -> Result<()> {
    for line in header {
        writeln!(out, "# {line}").map_err(|e| Error::io("<records>", e))?;
    }
    let by_id: BTreeMap<VarId, &DiscreteVariable> = variables.iter().map(|v| (v.id, v)).collect();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(records_header())?;
    for (fold, r) in super::all_records(folds) {
        w.write_record([
            fold.to_string(),
            r.instance_id.to_string(),
            r.true_class.to_string(),
            r.predicted_class.to_string(),
            r.posterior_y0.to_string(),
            r.brier.to_string(),
            r.frl.to_string(),
            labels(&r.x_star, &by_id),
            opt(r.time_bn_ns),
            opt(r.time_mrf_ns),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<records>", e))?;
    Ok(())
}

/// Row of a per-instance CSV read back for summarising.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct RecordRow {
    pub fold: usize,
    pub instance_id: usize,
    pub true_class: usize,
    pub predicted_class: usize,
    pub posterior_y0: f64,
    pub brier: f64,
    pub frl: f64,
    pub x_star: String,
    pub time_bn_ns: Option<u64>,
    pub time_mrf_ns: Option<u64>,
}

impl RecordRow {
    /// Record with empty assignments; the labels stay in `x_star`.
    pub fn to_record(&self) -> FrlRecord {
        FrlRecord {
            instance_id: self.instance_id,
            true_class: self.true_class,
            predicted_class: self.predicted_class,
            posterior_y0: self.posterior_y0,
            brier: self.brier,
            frl: self.frl,
            x_star: Assignment::new(),
            x_max: Assignment::new(),
            x_min: Assignment::new(),
            time_bn_ns: self.time_bn_ns,
            time_mrf_ns: self.time_mrf_ns,
        }
    }
}

/// Reads a per-instance CSV, skipping `#` comment lines.
pub fn read_records_csv(input: impl Read) -> Result<Vec<RecordRow>> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input);
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

pub fn decile_table(summary: &DecileSummary) -> String {
    let mut s = String::from("bin,zero,frl_lower,frl_upper,count,accuracy,mean_brier\n");
    for (i, b) in summary.bins.iter().enumerate() {
        let _ = writeln!(
            s,
            "{i},{},{},{},{},{},{}",
            b.zero, b.lower, b.upper, b.count, b.accuracy, b.mean_brier
        );
    }
    s
}

pub fn scatter_table<'a>(records: impl IntoIterator<Item = &'a FrlRecord>) -> String {
    let mut s = String::from("instance_id,frl,brier\n");
    for r in records {
        let _ = writeln!(s, "{},{},{}", r.instance_id, r.frl, r.brier);
    }
    s
}

/// Equal-frequency Brier bin with the spread of FRL inside it.
#[derive(Debug, Clone, PartialEq)]
pub struct BrierBin {
    pub brier_lower: f64,
    pub brier_upper: f64,
    pub count: usize,
    pub frl: FiveNumber,
}

pub fn brier_bins_table(bins: &[BrierBin]) -> String {
    let mut s = String::from(
        "bin,brier_lower,brier_upper,count,frl_min,frl_q1,frl_median,frl_q3,frl_max\n",
    );
    for (i, b) in bins.iter().enumerate() {
        let f = &b.frl;
        let _ = writeln!(
            s,
            "{i},{},{},{},{},{},{},{},{}",
            b.brier_lower, b.brier_upper, b.count, f.min, f.q1, f.median, f.q3, f.max
        );
    }
    s
}

pub fn format_five_number(f: &FiveNumber) -> String {
    format!(
        "min {:.4}  q1 {:.4}  median {:.4}  q3 {:.4}  max {:.4}",
        f.min, f.q1, f.median, f.q3, f.max
    )
}

/// Human-readable summary: dataset row, decile table, timing ratios and
/// integrity checks.
pub fn summary_text(
    dataset: &DatasetSummary,
    deciles: &DecileSummary,
    timings: Option<&FiveNumber>,
    integrity: &IntegrityReport,
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "[dataset]");
    let _ = writeln!(s, "private_features = {}", dataset.n_private);
    let _ = writeln!(s, "public_features = {}", dataset.n_public);
    let _ = writeln!(s, "rows = {}", dataset.n_rows);
    let _ = writeln!(s, "imbalance = {:.4}", dataset.imbalance);
    let _ = writeln!(
        s,
        "fair_by_design_folds = {} of {}",
        dataset.fair_folds, dataset.n_folds
    );
    let _ = writeln!(s, "\n[deciles]");
    let _ = writeln!(
        s,
        "{:>4} {:>5} {:>10} {:>10} {:>7} {:>9} {:>10}",
        "bin", "zero", "frl_lo", "frl_hi", "count", "accuracy", "brier"
    );
    for (i, b) in deciles.bins.iter().enumerate() {
        let _ = writeln!(
            s,
            "{i:>4} {:>5} {:>10.6} {:>10.6} {:>7} {:>9.4} {:>10.4}",
            b.zero, b.lower, b.upper, b.count, b.accuracy, b.mean_brier
        );
    }
    let _ = writeln!(s, "\n[timing_ratio_bruteforce_over_mrf]");
    match timings {
        Some(f) => {
            let _ = writeln!(s, "{}", format_five_number(f));
        }
        None => {
            let _ = writeln!(s, "unavailable");
        }
    }
    let _ = writeln!(s, "\n[integrity]");
    let _ = writeln!(s, "bound_violations = {}", integrity.bound_violations.len());
    let _ = writeln!(s, "brier_violations = {}", integrity.brier_violations.len());
    let _ = writeln!(s, "exact_ties = {}", integrity.ties.len());
    let _ = writeln!(
        s,
        "fair_fold_violations = {}",
        integrity.fair_fold_violations.len()
    );
    s
}

pub fn sweep_table(rows: &[SweepRow]) -> String {
    let mut s = String::from(
        "n_private,n_private_in_blanket,instances,ratio_min,ratio_q1,ratio_median,ratio_q3,ratio_max,mismatches,status\n",
    );
    for r in rows {
        let status = if r.capped {
            "capped"
        } else if r.degenerate {
            "degenerate"
        } else {
            "ok"
        };
        let ratio = match &r.ratio {
            Some(f) => format!("{},{},{},{},{}", f.min, f.q1, f.median, f.q3, f.max),
            None => ",,,,".to_string(),
        };
        let _ = writeln!(
            s,
            "{},{},{},{ratio},{},{status}",
            r.n_private, r.n_private_in_blanket, r.instances, r.mismatches
        );
    }
    s
}
