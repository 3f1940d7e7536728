//! CSV ingestion: missing-row filtering, discretisation, stratified folds,
//! and the discretised dataset format.

mod discretise;
mod folds;

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use discretise::{bin_labels, binarise_target_by_median, discretise_quantile};
pub use folds::stratified_folds;

use crate::error::{Error, Result};
use crate::model::{Assignment, DiscreteVariable, Role, VarId};

fn default_bins() -> usize {
    4
}
fn default_folds() -> usize {
    10
}
fn default_missing() -> Vec<String> {
    vec![String::new(), "NA".to_string()]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngestConfig {
    pub target_column: String,
    #[serde(default)]
    pub private_columns: Vec<String>,
    #[serde(default)]
    pub continuous_columns: Vec<String>,
    /// Columns dropped before anything else (identifiers, leakage).
    #[serde(default)]
    pub ignore_columns: Vec<String>,
    #[serde(default = "default_bins")]
    pub n_bins: usize,
    #[serde(default = "default_folds")]
    pub n_folds: usize,
    #[serde(default)]
    pub seed: u64,
    /// Split a numeric target at its sample median.
    #[serde(default)]
    pub target_binarisation: bool,
    /// Cell contents (after trimming) treated as missing.
    #[serde(default = "default_missing")]
    pub missing_tokens: Vec<String>,
}

impl IngestConfig {
    pub fn new(target_column: impl Into<String>) -> Self {
        IngestConfig {
            target_column: target_column.into(),
            private_columns: Vec::new(),
            continuous_columns: Vec::new(),
            ignore_columns: Vec::new(),
            n_bins: default_bins(),
            n_folds: default_folds(),
            seed: 0,
            target_binarisation: false,
            missing_tokens: default_missing(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.private_columns.contains(&self.target_column) {
            return Err(Error::Config(format!(
                "target {:?} is also listed as private",
                self.target_column
            )));
        }
        if self.n_folds < 2 {
            return Err(Error::Config(format!(
                "need at least 2 folds, got {}",
                self.n_folds
            )));
        }
        if self.n_bins < 2 {
            return Err(Error::Config(format!(
                "n_bins must be at least 2, got {}",
                self.n_bins
            )));
        }
        Ok(())
    }
}

/// Discretised, fold-annotated instance table. Variable `i` has id `i` and
/// is column `i` of every row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    variables: Vec<DiscreteVariable>,
    data: Vec<u32>,
    fold_of: Vec<usize>,
    n_folds: usize,
    discretisation_edges: BTreeMap<String, Vec<f64>>,
    target_median: Option<f64>,
    seed: u64,
}

impl Dataset {
    /// Assembles a dataset from discretised rows, checking ranges, roles and
    /// fold indices.
    pub fn from_rows(
        variables: Vec<DiscreteVariable>,
        rows: &[Vec<usize>],
        fold_of: Vec<usize>,
        n_folds: usize,
        seed: u64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * variables.len());
        for (r, row) in rows.iter().enumerate() {
            if row.len() != variables.len() {
                return Err(Error::MalformedDataset(format!(
                    "row {r} has {} cells",
                    row.len()
                )));
            }
            for (v, &s) in variables.iter().zip(row) {
                if s >= v.cardinality() {
                    return Err(Error::StateOutOfRange {
                        var: v.id,
                        state: s,
                        cardinality: v.cardinality(),
                    });
                }
                data.push(s as u32);
            }
        }
        let ds = Dataset {
            variables,
            data,
            fold_of,
            n_folds,
            discretisation_edges: BTreeMap::new(),
            target_median: None,
            seed,
        };
        ds.check()?;
        Ok(ds)
    }

    fn check(&self) -> Result<()> {
        for (i, v) in self.variables.iter().enumerate() {
            if v.id != VarId::from(i) {
                return Err(Error::MalformedDataset(format!(
                    "variable {} has id {}",
                    i, v.id
                )));
            }
        }
        let targets = self
            .variables
            .iter()
            .filter(|v| v.role == Role::Target)
            .count();
        if targets != 1 {
            return Err(Error::TargetCount(targets));
        }
        if self.fold_of.len() != self.n_rows() {
            return Err(Error::MalformedDataset(
                "fold assignment length differs from row count".into(),
            ));
        }
        if let Some(&f) = self.fold_of.iter().find(|&&f| f >= self.n_folds) {
            return Err(Error::MalformedDataset(format!(
                "fold index {f} out of range"
            )));
        }
        Ok(())
    }

    pub fn variables(&self) -> &[DiscreteVariable] {
        &self.variables
    }

    pub fn variable(&self, id: VarId) -> Result<&DiscreteVariable> {
        self.variables
            .get(id.index())
            .ok_or(Error::UnknownVariable(id))
    }

    pub fn n_rows(&self) -> usize {
        if self.variables.is_empty() {
            0
        } else {
            self.data.len() / self.variables.len()
        }
    }

    pub fn n_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn row(&self, r: usize) -> &[u32] {
        let n = self.variables.len();
        &self.data[r * n..(r + 1) * n]
    }

    pub fn value(&self, r: usize, var: VarId) -> usize {
        self.data[r * self.variables.len() + var.index()] as usize
    }

    pub fn target(&self) -> VarId {
        self.variables
            .iter()
            .find(|v| v.role == Role::Target)
            .map(|v| v.id)
            .expect("checked on construction")
    }

    pub fn with_role(&self, role: Role) -> Vec<VarId> {
        self.variables
            .iter()
            .filter(|v| v.role == role)
            .map(|v| v.id)
            .collect()
    }

    /// Copy with roles reassigned; the target cannot move.
    pub fn with_roles(&self, roles: &BTreeMap<VarId, Role>) -> Result<Dataset> {
        let mut out = self.clone();
        for (&id, &role) in roles {
            let var = out
                .variables
                .get_mut(id.index())
                .ok_or(Error::UnknownVariable(id))?;
            if (var.role == Role::Target) != (role == Role::Target) {
                return Err(Error::Config(format!(
                    "cannot change the target role of {:?}",
                    var.name
                )));
            }
            var.role = role;
        }
        Ok(out)
    }

    pub fn fold_of(&self) -> &[usize] {
        &self.fold_of
    }

    pub fn n_folds(&self) -> usize {
        self.n_folds
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn discretisation_edges(&self) -> &BTreeMap<String, Vec<f64>> {
        &self.discretisation_edges
    }

    pub fn target_median(&self) -> Option<f64> {
        self.target_median
    }

    /// Same rows with a fresh stratified assignment to `n_folds` folds.
    pub fn refold(&self, n_folds: usize, seed: u64) -> Result<Dataset> {
        let y = self.target();
        let targets: Vec<usize> = (0..self.n_rows()).map(|r| self.value(r, y)).collect();
        let mut out = self.clone();
        out.fold_of = stratified_folds(&targets, n_folds, seed)?;
        out.n_folds = n_folds;
        out.seed = seed;
        Ok(out)
    }

    pub fn rows_in_fold(&self, fold: usize) -> Vec<usize> {
        (0..self.n_rows())
            .filter(|&r| self.fold_of[r] == fold)
            .collect()
    }

    pub fn rows_outside_fold(&self, fold: usize) -> Vec<usize> {
        (0..self.n_rows())
            .filter(|&r| self.fold_of[r] != fold)
            .collect()
    }

    /// Feature values of row `r` (everything except the target).
    pub fn instance(&self, r: usize) -> Assignment {
        let target = self.target();
        self.variables
            .iter()
            .filter(|v| v.id != target)
            .map(|v| (v.id, self.value(r, v.id)))
            .collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let t = self.target();
        let mut counts = vec![0; self.variable(t).map(|v| v.cardinality()).unwrap_or(0)];
        for r in 0..self.n_rows() {
            counts[self.value(r, t)] += 1;
        }
        counts
    }

    /// Relative frequency of the least frequent target class.
    pub fn imbalance(&self) -> f64 {
        let counts = self.class_counts();
        let n = self.n_rows();
        if n == 0 {
            return 0.0;
        }
        *counts.iter().min().unwrap_or(&0) as f64 / n as f64
    }

    /// Writes the discretised CSV (state indices) to `path` and the metadata
    /// sidecar next to it. `header` lines are written as `#` comments at the
    /// top of both files.
    pub fn write_discretised(&self, path: &Path, header: &[String]) -> Result<PathBuf> {
        let mut buf = Vec::new();
        for line in header {
            writeln!(buf, "# {line}").expect("write to vec");
        }
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(self.variables.iter().map(|v| v.name.as_str()))?;
            for r in 0..self.n_rows() {
                w.write_record(self.row(r).iter().map(|s| s.to_string()))?;
            }
            w.flush().map_err(|e| Error::io(path, e))?;
        }
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))?;

        let meta = Metadata {
            format: METADATA_FORMAT.to_string(),
            header: header.to_vec(),
            seed: self.seed,
            n_folds: self.n_folds,
            variables: self
                .variables
                .iter()
                .map(|v| VariableMeta {
                    name: v.name.clone(),
                    role: v.role,
                    states: v.states.clone(),
                })
                .collect(),
            discretisation_edges: self.discretisation_edges.clone(),
            target_median: self.target_median,
            folds: self.fold_of.clone(),
        };
        let sidecar = sidecar_path(path);
        let mut text = serde_json::to_string_pretty(&meta)?;
        text.push('\n');
        std::fs::write(&sidecar, text).map_err(|e| Error::io(&sidecar, e))?;
        Ok(sidecar)
    }

    /// Reads a dataset written by [`Dataset::write_discretised`].
    pub fn read_discretised(path: &Path) -> Result<Dataset> {
        let sidecar = sidecar_path(path);
        let meta_text = std::fs::read_to_string(&sidecar).map_err(|e| Error::io(&sidecar, e))?;
        let meta: Metadata = serde_json::from_str(&meta_text)?;
        if meta.format != METADATA_FORMAT {
            return Err(Error::MalformedDataset(format!(
                "unsupported metadata format {:?}",
                meta.format
            )));
        }
        let variables = meta
            .variables
            .into_iter()
            .enumerate()
            .map(|(i, v)| DiscreteVariable::new(VarId::from(i), v.name, v.states, v.role))
            .collect::<Result<Vec<_>>>()?;
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(file);
        let names: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        if names.len() != variables.len() || names.iter().zip(&variables).any(|(n, v)| *n != v.name)
        {
            return Err(Error::MalformedDataset(
                "CSV header does not match the metadata".into(),
            ));
        }
        let mut rows = Vec::new();
        for (r, rec) in reader.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|c| {
                    c.parse::<usize>()
                        .map_err(|_| Error::MalformedDataset(format!("row {r}: bad state {c:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        let mut ds = Dataset::from_rows(variables, &rows, meta.folds, meta.n_folds, meta.seed)?;
        ds.discretisation_edges = meta.discretisation_edges;
        ds.target_median = meta.target_median;
        Ok(ds)
    }
}

const METADATA_FORMAT: &str = "frl-dataset/1";

/// `data.csv` -> `data.meta.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta.json")
}

#[derive(Debug, Serialize, Deserialize)]
struct VariableMeta {
    name: String,
    role: Role,
    states: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Metadata {
    format: String,
    header: Vec<String>,
    seed: u64,
    n_folds: usize,
    variables: Vec<VariableMeta>,
    discretisation_edges: BTreeMap<String, Vec<f64>>,
    target_median: Option<f64>,
    folds: Vec<usize>,
}

/// Loads a raw CSV file. See [`load_csv_reader`].
pub fn load_csv(path: &Path, config: &IngestConfig) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    load_csv_reader(file, config)
}

/// Parses a raw CSV with a header row, drops rows holding a missing cell,
/// discretises continuous columns, orders categorical states by first
/// appearance, and assigns stratified folds.
pub fn load_csv_reader(input: impl Read, config: &IngestConfig) -> Result<Dataset> {
    config.validate()?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let position: HashMap<&str, usize> = header
        .iter()
        .enumerate()
        .map(|(i, h)| (h.as_str(), i))
        .collect();
    let named = |c: &String| {
        position
            .get(c.as_str())
            .copied()
            .ok_or_else(|| Error::MissingColumn(c.clone()))
    };
    named(&config.target_column)?;
    for c in config
        .private_columns
        .iter()
        .chain(&config.continuous_columns)
        .chain(&config.ignore_columns)
    {
        named(c)?;
    }
    let kept: Vec<usize> = (0..header.len())
        .filter(|&i| !config.ignore_columns.contains(&header[i]))
        .collect();

    let mut cells: Vec<Vec<String>> = vec![Vec::new(); kept.len()];
    let mut source_rows = Vec::new();
    for (r, rec) in reader.records().enumerate() {
        let rec = rec?;
        if kept
            .iter()
            .any(|&i| config.missing_tokens.iter().any(|t| t == &rec[i]))
        {
            continue;
        }
        for (col, &i) in kept.iter().enumerate() {
            cells[col].push(rec[i].to_string());
        }
        // 1-based, counting the header line
        source_rows.push(r + 2);
    }
    if source_rows.is_empty() {
        return Err(Error::NoRows);
    }

    let mut variables = Vec::with_capacity(kept.len());
    let mut columns: Vec<Vec<usize>> = Vec::with_capacity(kept.len());
    let mut edges_by_column = BTreeMap::new();
    let mut target_median = None;
    for (col, &i) in kept.iter().enumerate() {
        let name = &header[i];
        let role = if *name == config.target_column {
            Role::Target
        } else if config.private_columns.contains(name) {
            Role::Private
        } else {
            Role::Public
        };
        let is_target = role == Role::Target;
        let numeric =
            (is_target && config.target_binarisation) || config.continuous_columns.contains(name);
        let (states, labels) = if numeric {
            let values = cells[col]
                .iter()
                .zip(&source_rows)
                .map(|(c, &row)| match c.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(Error::NonNumeric {
                        column: name.clone(),
                        row,
                        value: c.clone(),
                    }),
                })
                .collect::<Result<Vec<f64>>>()?;
            if is_target && config.target_binarisation {
                let (states, median) = binarise_target_by_median(&values)?;
                target_median = Some(median);
                (states, vec![format!("<={median}"), format!(">{median}")])
            } else {
                let (states, edges) = discretise_quantile(&values, config.n_bins)?;
                let labels = bin_labels(&edges);
                edges_by_column.insert(name.clone(), edges);
                (states, labels)
            }
        } else {
            let mut labels: Vec<String> = Vec::new();
            let mut index: HashMap<&str, usize> = HashMap::new();
            let states = cells[col]
                .iter()
                .map(|c| {
                    *index.entry(c.as_str()).or_insert_with(|| {
                        labels.push(c.clone());
                        labels.len() - 1
                    })
                })
                .collect();
            (states, labels)
        };
        if is_target && labels.len() < 2 {
            return Err(Error::InvalidVariable {
                name: name.clone(),
                reason: "target has a single class".into(),
            });
        }
        variables.push(DiscreteVariable::new(
            VarId::from(col),
            name.clone(),
            labels,
            role,
        )?);
        columns.push(states);
    }

    let n = source_rows.len();
    let rows: Vec<Vec<usize>> = (0..n)
        .map(|r| columns.iter().map(|c| c[r]).collect())
        .collect();
    let target_col = kept
        .iter()
        .position(|&i| header[i] == config.target_column)
        .expect("target kept");
    let folds = stratified_folds(&columns[target_col], config.n_folds, config.seed)?;
    let mut ds = Dataset::from_rows(variables, &rows, folds, config.n_folds, config.seed)?;
    ds.discretisation_edges = edges_by_column;
    ds.target_median = target_median;
    Ok(ds)
}
