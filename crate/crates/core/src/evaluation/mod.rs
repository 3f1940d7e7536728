//! Cross-validated experiments and their aggregates: Brier scores, FRL
//! decile tables, timing ratios and dataset summaries.

mod report;

use log::{debug, warn};

pub use report::{
    brier_bins_table, decile_table, format_five_number, read_records_csv, records_header,
    scatter_table, summary_text, sweep_table, write_records_csv, BrierBin, RecordRow,
};

use crate::error::{Error, Result};
use crate::fairness::{
    frl, frl_bruteforce, FairnessModel, FrlRecord, Instance, DEFAULT_BRUTE_FORCE_CAP,
};
use crate::ingest::Dataset;
use crate::learning::{learn_structure, StructureSearchConfig};
use crate::model::{BayesianNetwork, Role};
use crate::par::{self, Execution};

/// FRL values below this count as zero.
pub const ZERO_FRL: f64 = 1e-12;
/// Largest tolerated gap between the ratio-field and brute-force FRL.
pub const ORACLE_TOLERANCE: f64 = 1e-9;

/// `(1 - posterior of the true class)^2`.
pub fn brier(posterior: &[f64], true_class: usize) -> f64 {
    (1.0 - posterior[true_class]).powi(2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub search: StructureSearchConfig,
    /// Force an arc from the target to every feature.
    pub force_target_arcs: bool,
    /// Run the brute-force oracle next to the ratio-field path.
    pub oracle: bool,
    pub brute_force_cap: u64,
    /// Keep wall-clock timings in the records. Without them records are
    /// fully reproducible.
    pub timings: bool,
    pub execution: Execution,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            search: StructureSearchConfig::default(),
            force_target_arcs: false,
            oracle: false,
            brute_force_cap: DEFAULT_BRUTE_FORCE_CAP,
            timings: true,
            execution: Execution::default(),
        }
    }
}

/// Instance where the two FRL paths disagree.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleMismatch {
    pub instance_id: usize,
    pub frl_mrf: f64,
    pub frl_bruteforce: f64,
}

#[derive(Debug, Clone)]
pub struct FoldResult {
    pub fold: usize,
    pub network: BayesianNetwork,
    pub fair_by_design: bool,
    /// Sorted by instance id.
    pub records: Vec<FrlRecord>,
    pub mismatches: Vec<OracleMismatch>,
    /// Instances for which the oracle was skipped because of its cap.
    pub oracle_skipped: usize,
}

pub fn instance(dataset: &Dataset, row: usize) -> Instance {
    Instance {
        id: row,
        features: dataset.instance(row),
        true_class: dataset.value(row, dataset.target()),
    }
}

/// Network learned on every row outside `fold`, with the experiment's arc
/// constraints.
pub fn learn_fold(
    dataset: &Dataset,
    config: &ExperimentConfig,
    fold: usize,
) -> Result<BayesianNetwork> {
    let train = dataset.rows_outside_fold(fold);
    let y = dataset.target();
    let card = dataset.variable(y)?.cardinality();
    for class in 0..card {
        if !train.iter().any(|&r| dataset.value(r, y) == class) {
            return Err(Error::MissingClass { fold, class });
        }
    }
    let mut search = config.search.clone();
    search.execution = config.execution;
    if config.force_target_arcs {
        for v in dataset.variables() {
            if v.id != y && !search.forced_arcs.contains(&(y, v.id)) {
                search.forced_arcs.push((y, v.id));
            }
        }
    }
    learn_structure(dataset, &search, &train)
}

fn run_fold(dataset: &Dataset, config: &ExperimentConfig, fold: usize) -> Result<FoldResult> {
    let network = learn_fold(dataset, config, fold)?;
    let model = FairnessModel::new(&network)?;
    debug!(
        "fold {fold}: {} private and {} public features in the blanket",
        model.private_in_blanket().len(),
        model.public_in_blanket().len()
    );
    let test = dataset.rows_in_fold(fold);
    let outcomes = par::try_map(config.execution, &test, |&row| {
        let inst = instance(dataset, row);
        let mut rec = frl(&model, &inst)?;
        let mut mismatch = None;
        let mut skipped = false;
        if config.oracle {
            match frl_bruteforce(&model, &inst, config.brute_force_cap) {
                Ok(o) => {
                    rec.time_bn_ns = o.time_bn_ns;
                    if (o.frl - rec.frl).abs() > ORACLE_TOLERANCE {
                        mismatch = Some(OracleMismatch {
                            instance_id: row,
                            frl_mrf: rec.frl,
                            frl_bruteforce: o.frl,
                        });
                    }
                }
                Err(Error::CapExceeded { .. }) => skipped = true,
                Err(e) => return Err(e),
            }
        }
        if !config.timings {
            rec.time_bn_ns = None;
            rec.time_mrf_ns = None;
        }
        Ok((rec, mismatch, skipped))
    })
    .map_err(|e| Error::InFold {
        fold,
        source: Box::new(e),
    })?;
    let oracle_skipped = outcomes.iter().filter(|o| o.2).count();
    if oracle_skipped > 0 {
        warn!(
            "fold {fold}: oracle skipped on {oracle_skipped} instances (cap {})",
            config.brute_force_cap
        );
    }
    let mismatches: Vec<OracleMismatch> = outcomes.iter().filter_map(|o| o.1.clone()).collect();
    let mut records: Vec<FrlRecord> = outcomes.into_iter().map(|o| o.0).collect();
    records.sort_by_key(|r| r.instance_id);
    Ok(FoldResult {
        fold,
        network,
        fair_by_design: model.fair_by_design(),
        records,
        mismatches,
        oracle_skipped,
    })
}

/// Learns a network on all folds but one and scores every held-out instance,
/// for each fold in turn. Results are in fold order.
pub fn run_experiment(dataset: &Dataset, config: &ExperimentConfig) -> Result<Vec<FoldResult>> {
    let folds: Vec<usize> = (0..dataset.n_folds()).collect();
    par::try_map(config.execution, &folds, |&f| run_fold(dataset, config, f))
}

/// Records of all folds, sorted by instance id.
pub fn all_records(folds: &[FoldResult]) -> Vec<(usize, &FrlRecord)> {
    let mut out: Vec<(usize, &FrlRecord)> = folds
        .iter()
        .flat_map(|f| f.records.iter().map(move |r| (f.fold, r)))
        .collect();
    out.sort_by_key(|(_, r)| r.instance_id);
    out
}

/// Outcome of one step of a private-feature sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n_private: usize,
    pub n_private_in_blanket: usize,
    pub instances: usize,
    /// Brute-force over ratio-field time; absent when the oracle was capped.
    pub ratio: Option<FiveNumber>,
    pub mismatches: usize,
    /// No private feature reaches the blanket, so both paths are trivial.
    pub degenerate: bool,
    pub capped: bool,
}

/// For each size `k` in `sizes`, marks the first `k` of `candidates` private
/// (all others public) and times both FRL paths on every instance, one
/// instance at a time. Timings are only comparable when `execution` is
/// sequential.
pub fn oracle_sweep(
    network: &BayesianNetwork,
    instances: &[Instance],
    candidates: &[crate::model::VarId],
    sizes: std::ops::RangeInclusive<usize>,
    cap: u64,
    execution: Execution,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for k in sizes {
        if k > candidates.len() {
            warn!(
                "only {} candidate features, stopping the sweep at {}",
                candidates.len(),
                k - 1
            );
            break;
        }
        let roles = network
            .variables()
            .keys()
            .filter(|&&v| Some(v) != network.target())
            .map(|&v| {
                (
                    v,
                    if candidates[..k].contains(&v) {
                        Role::Private
                    } else {
                        Role::Public
                    },
                )
            })
            .collect();
        let model = FairnessModel::new(&network.with_roles(&roles)?)?;
        let capped = crate::fairness::private_configurations(&model) > cap as u128;
        let timed = par::try_map(execution, instances, |inst| {
            let rec = frl(&model, inst)?;
            if capped {
                return Ok::<_, Error>((rec.time_mrf_ns.unwrap_or(0), None, false));
            }
            let oracle = frl_bruteforce(&model, inst, cap)?;
            let mismatch = (oracle.frl - rec.frl).abs() > ORACLE_TOLERANCE;
            Ok((rec.time_mrf_ns.unwrap_or(0), oracle.time_bn_ns, mismatch))
        })?;
        let ratios: Vec<f64> = timed
            .iter()
            .filter_map(|(mrf, bn, _)| bn.map(|b| b as f64 / (*mrf).max(1) as f64))
            .collect();
        rows.push(SweepRow {
            n_private: k,
            n_private_in_blanket: model.private_in_blanket().len(),
            instances: instances.len(),
            ratio: FiveNumber::of(&ratios),
            mismatches: timed.iter().filter(|t| t.2).count(),
            degenerate: model.fair_by_design(),
            capped,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecileBin {
    /// Holds exactly the zero-FRL records.
    pub zero: bool,
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    pub accuracy: f64,
    pub mean_brier: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecileSummary {
    pub bins: Vec<DecileBin>,
}

impl DecileSummary {
    /// Bins over positive FRL values.
    pub fn positive_bins(&self) -> impl Iterator<Item = &DecileBin> {
        self.bins.iter().filter(|b| !b.zero)
    }
}

fn bin_of(records: &[&FrlRecord], zero: bool) -> DecileBin {
    let n = records.len();
    DecileBin {
        zero,
        lower: records.first().map_or(0.0, |r| r.frl),
        upper: records.last().map_or(0.0, |r| r.frl),
        count: n,
        accuracy: records
            .iter()
            .filter(|r| r.predicted_class == r.true_class)
            .count() as f64
            / n as f64,
        mean_brier: records.iter().map(|r| r.brier).sum::<f64>() / n as f64,
    }
}

/// Splits `sorted` into `n_bins` consecutive chunks whose sizes differ by at
/// most one.
fn equal_frequency<T>(sorted: &[T], n_bins: usize) -> Vec<&[T]> {
    let n = sorted.len();
    (0..n_bins)
        .map(|i| &sorted[i * n / n_bins..(i + 1) * n / n_bins])
        .collect()
}

/// Zero-FRL bin (when any) followed by equal-frequency bins over the
/// positive FRL values. Records with equal FRL are ordered by instance id.
pub fn decile_summary<'a>(
    records: impl IntoIterator<Item = &'a FrlRecord>,
    n_bins: usize,
) -> Result<DecileSummary> {
    let records: Vec<&FrlRecord> = records.into_iter().collect();
    if records.is_empty() {
        return Err(Error::NoRecords);
    }
    let (zero, mut positive): (Vec<&FrlRecord>, Vec<&FrlRecord>) =
        records.into_iter().partition(|r| r.frl < ZERO_FRL);
    positive.sort_by(|a, b| {
        a.frl
            .total_cmp(&b.frl)
            .then(a.instance_id.cmp(&b.instance_id))
    });
    let mut bins = Vec::new();
    if !zero.is_empty() {
        bins.push(bin_of(&zero, true));
    }
    let n_bins = n_bins.max(1);
    if !positive.is_empty() {
        let k = n_bins.min(positive.len());
        if k < n_bins {
            warn!(
                "only {} positive FRL records, using {k} bins instead of {n_bins}",
                positive.len()
            );
        }
        bins.extend(
            equal_frequency(&positive, k)
                .into_iter()
                .map(|chunk| bin_of(chunk, false)),
        );
    }
    Ok(DecileSummary { bins })
}

/// Minimum, quartiles and maximum, with linearly interpolated quantiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl FiveNumber {
    pub fn of(values: &[f64]) -> Option<FiveNumber> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let h = p * (v.len() - 1) as f64;
            let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
            v[lo] + (h - lo as f64) * (v[hi] - v[lo])
        };
        Some(FiveNumber {
            min: v[0],
            q1: q(0.25),
            median: q(0.5),
            q3: q(0.75),
            max: v[v.len() - 1],
        })
    }
}

/// Per-record ratio of brute-force to ratio-field time, summarised.
pub fn timing_ratios<'a>(records: impl IntoIterator<Item = &'a FrlRecord>) -> Result<FiveNumber> {
    let mut ratios = Vec::new();
    for r in records {
        match (r.time_bn_ns, r.time_mrf_ns) {
            (Some(bn), Some(mrf)) => ratios.push(bn as f64 / mrf.max(1) as f64),
            _ => return Err(Error::MissingTimings(r.instance_id)),
        }
    }
    FiveNumber::of(&ratios).ok_or(Error::NoRecords)
}

/// Equal-frequency bins by Brier score with the FRL spread of each.
pub fn brier_bins<'a>(
    records: impl IntoIterator<Item = &'a FrlRecord>,
    n_bins: usize,
) -> Result<Vec<BrierBin>> {
    let mut records: Vec<&FrlRecord> = records.into_iter().collect();
    if records.is_empty() {
        return Err(Error::NoRecords);
    }
    records.sort_by(|a, b| {
        a.brier
            .total_cmp(&b.brier)
            .then(a.instance_id.cmp(&b.instance_id))
    });
    let k = n_bins.max(1).min(records.len());
    Ok(equal_frequency(&records, k)
        .into_iter()
        .map(|chunk| BrierBin {
            brier_lower: chunk[0].brier,
            brier_upper: chunk[chunk.len() - 1].brier,
            count: chunk.len(),
            frl: FiveNumber::of(&chunk.iter().map(|r| r.frl).collect::<Vec<_>>())
                .expect("non-empty chunk"),
        })
        .collect())
}

/// One row of the dataset table: feature counts, size, imbalance and the
/// number of folds fair by design.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSummary {
    pub n_private: usize,
    pub n_public: usize,
    pub n_rows: usize,
    /// Relative frequency of the rarest class.
    pub imbalance: f64,
    pub fair_folds: usize,
    pub n_folds: usize,
}

pub fn dataset_summary(dataset: &Dataset, folds: &[FoldResult]) -> DatasetSummary {
    DatasetSummary {
        n_private: dataset.with_role(Role::Private).len(),
        n_public: dataset.with_role(Role::Public).len(),
        n_rows: dataset.n_rows(),
        imbalance: dataset.imbalance(),
        fair_folds: folds.iter().filter(|f| f.fair_by_design).count(),
        n_folds: folds.len(),
    }
}

/// Records breaking an invariant every experiment must satisfy.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IntegrityReport {
    /// FRL above the larger of the two class posteriors.
    pub bound_violations: Vec<usize>,
    /// Correctness disagreeing with `brier < 0.25`, exact ties excluded.
    pub brier_violations: Vec<usize>,
    /// Records with both posteriors at exactly one half. They are predicted
    /// as the first class, so they are correct iff that is the true class,
    /// while their Brier score is exactly 0.25.
    pub ties: Vec<usize>,
    /// Records of fair-by-design folds with non-zero FRL.
    pub fair_fold_violations: Vec<usize>,
}

impl IntegrityReport {
    pub fn is_clean(&self) -> bool {
        self.bound_violations.is_empty()
            && self.brier_violations.is_empty()
            && self.fair_fold_violations.is_empty()
    }
}

pub fn check_integrity(folds: &[FoldResult]) -> IntegrityReport {
    let mut out = IntegrityReport::default();
    for fold in folds {
        for r in &fold.records {
            let p = r.posterior_y0;
            if r.frl > p.max(1.0 - p) + ORACLE_TOLERANCE {
                out.bound_violations.push(r.instance_id);
            }
            if p == 0.5 {
                out.ties.push(r.instance_id);
            } else if (r.predicted_class == r.true_class) != (r.brier < 0.25) {
                out.brier_violations.push(r.instance_id);
            }
            if fold.fair_by_design && r.frl != 0.0 {
                out.fair_fold_violations.push(r.instance_id);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Assignment;

    fn rec(id: usize, frl: f64, correct: bool, brier: f64) -> FrlRecord {
        FrlRecord {
            instance_id: id,
            true_class: 0,
            predicted_class: if correct { 0 } else { 1 },
            posterior_y0: 1.0 - brier.sqrt(),
            brier,
            frl,
            x_star: Assignment::new(),
            x_max: Assignment::new(),
            x_min: Assignment::new(),
            time_bn_ns: Some(10),
            time_mrf_ns: Some(10),
        }
    }

    #[test]
    fn brier_examples() {
        assert_eq!(brier(&[1.0, 0.0], 0), 0.0);
        assert_eq!(brier(&[0.5, 0.5], 1), 0.25);
        assert!((brier(&[0.1, 0.9], 1) - 0.01).abs() < 1e-15);
    }

    #[test]
    fn hundred_distinct_values_make_ten_bins_of_ten() {
        let records: Vec<FrlRecord> = (0..100)
            .map(|i| rec(i, 0.001 * (100 - i) as f64, true, 0.1))
            .collect();
        let s = decile_summary(&records, 10).unwrap();
        assert_eq!(s.bins.len(), 10);
        assert!(s.bins.iter().all(|b| b.count == 10 && !b.zero));
        for w in s.bins.windows(2) {
            assert!(w[0].upper < w[1].lower);
        }
    }

    #[test]
    fn zero_bin_comes_first() {
        let records: Vec<FrlRecord> = (0..5).map(|i| rec(i, 0.0, i % 2 == 0, 0.1)).collect();
        let s = decile_summary(&records, 10).unwrap();
        assert_eq!(s.bins.len(), 1);
        assert!(s.bins[0].zero);
        assert!((s.bins[0].accuracy - 0.6).abs() < 1e-12);

        let mut mixed = records.clone();
        mixed.extend((5..28).map(|i| rec(i, 0.01 * i as f64, true, 0.1)));
        let s = decile_summary(&mixed, 10).unwrap();
        assert!(s.bins[0].zero && s.bins[0].count == 5);
        let counts: Vec<usize> = s.positive_bins().map(|b| b.count).collect();
        assert_eq!(counts.iter().sum::<usize>(), 23);
        assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
        assert!(decile_summary(std::iter::empty(), 10).is_err());
    }

    #[test]
    fn few_positive_records_get_fewer_bins() {
        let records: Vec<FrlRecord> = (0..3).map(|i| rec(i, 0.1, true, 0.1)).collect();
        let s = decile_summary(&records, 10).unwrap();
        assert_eq!(s.bins.len(), 3);
    }

    #[test]
    fn five_number_summary() {
        let f = FiveNumber::of(&[4.0, 1.0, 3.0, 2.0, 5.0]).unwrap();
        assert_eq!(
            (f.min, f.q1, f.median, f.q3, f.max),
            (1.0, 2.0, 3.0, 4.0, 5.0)
        );
        let f = FiveNumber::of(&[1.0, 2.0]).unwrap();
        assert_eq!(f.median, 1.5);
        assert!(FiveNumber::of(&[]).is_none());
    }

    #[test]
    fn identical_timings_give_unit_ratio() {
        let records: Vec<FrlRecord> = (0..4).map(|i| rec(i, 0.1, true, 0.1)).collect();
        let t = timing_ratios(&records).unwrap();
        assert_eq!((t.min, t.max), (1.0, 1.0));
        let mut missing = records.clone();
        missing[2].time_bn_ns = None;
        assert!(matches!(
            timing_ratios(&missing),
            Err(Error::MissingTimings(2))
        ));
    }

    #[test]
    fn brier_bins_partition() {
        let records: Vec<FrlRecord> = (0..25)
            .map(|i| rec(i, 0.01 * i as f64, true, 0.004 * i as f64))
            .collect();
        let bins = brier_bins(&records, 10).unwrap();
        assert_eq!(bins.iter().map(|b| b.count).sum::<usize>(), 25);
        assert!(bins
            .windows(2)
            .all(|w| w[0].brier_upper <= w[1].brier_lower));
    }
}
