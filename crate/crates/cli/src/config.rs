use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use frl_core::evaluation::ExperimentConfig;
use frl_core::fairness::DEFAULT_BRUTE_FORCE_CAP;
use frl_core::ingest::{Dataset, IngestConfig};
use frl_core::learning::StructureSearchConfig;
use frl_core::model::VarId;
use frl_core::par::Execution;
use serde::{Deserialize, Serialize};

use crate::UsageError;

fn default_out() -> PathBuf {
    PathBuf::from("frl-out")
}

/// Everything a command needs, read from one TOML file and then overridden
/// by command-line flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Raw CSV for `discretise`; raw or discretised CSV for `run` and
    /// `oracle-sweep`; per-instance CSV for `summarise`.
    #[serde(default)]
    pub input: Option<PathBuf>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Overrides the ingest seed and, for an already discretised input,
    /// re-stratifies its folds.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub folds: Option<usize>,
    /// Worker threads; machine parallelism when absent.
    #[serde(default)]
    pub jobs: Option<usize>,
    #[serde(default)]
    pub ingest: Option<IngestConfig>,
    #[serde(default)]
    pub search: SearchSettings,
    #[serde(default)]
    pub experiment: ExperimentSettings,
    #[serde(default)]
    pub sweep: SweepSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            out: default_out(),
            seed: None,
            folds: None,
            jobs: None,
            ingest: None,
            search: SearchSettings::default(),
            experiment: ExperimentSettings::default(),
            sweep: SweepSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSettings {
    pub tabu_list_size: usize,
    pub max_iterations: usize,
    /// Equivalent sample size of the smoothing prior.
    pub ess: f64,
    pub max_parents: Option<usize>,
    /// `[parent, child]` column names.
    pub forced_arcs: Vec<[String; 2]>,
    pub forbidden_arcs: Vec<[String; 2]>,
}

impl Default for SearchSettings {
    fn default() -> Self {
        let d = StructureSearchConfig::default();
        SearchSettings {
            tabu_list_size: d.tabu_list_size,
            max_iterations: d.max_iterations,
            ess: d.ess,
            max_parents: d.max_parents,
            forced_arcs: Vec::new(),
            forbidden_arcs: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSettings {
    pub oracle: bool,
    pub force_target_arcs: bool,
    pub brute_force_cap: u64,
    /// Wall-clock columns in the per-instance CSV. Off by default so that
    /// equal configurations give byte-identical files.
    pub timings: bool,
    pub decile_bins: usize,
    pub brier_bins: usize,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        ExperimentSettings {
            oracle: false,
            force_target_arcs: false,
            brute_force_cap: DEFAULT_BRUTE_FORCE_CAP,
            timings: false,
            decile_bins: 10,
            brier_bins: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSettings {
    pub min_private: usize,
    pub max_private: usize,
    /// Test instances timed per step, taken from fold 0.
    pub instances: usize,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            min_private: 2,
            max_private: 11,
            instances: 200,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub folds: Option<usize>,
    pub ess: Option<f64>,
    pub bins: Option<usize>,
    pub jobs: Option<usize>,
    pub deciles: Option<usize>,
    pub force_target_arcs: bool,
    pub oracle: bool,
    pub timings: bool,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> anyhow::Result<RunConfig> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())).into())
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(p) = &o.input {
            self.input = Some(p.clone());
        }
        if let Some(p) = &o.out {
            self.out = p.clone();
        }
        self.seed = o.seed.or(self.seed);
        self.folds = o.folds.or(self.folds);
        self.jobs = o.jobs.or(self.jobs);
        if let Some(s) = o.ess {
            self.search.ess = s;
        }
        if let Some(d) = o.deciles {
            self.experiment.decile_bins = d;
        }
        if let Some(ingest) = &mut self.ingest {
            if let Some(b) = o.bins {
                ingest.n_bins = b;
            }
            if let Some(s) = self.seed {
                ingest.seed = s;
            }
            if let Some(f) = self.folds {
                ingest.n_folds = f;
            }
        } else if o.bins.is_some() {
            log::warn!("--bins has no effect without an [ingest] section");
        }
        self.experiment.force_target_arcs |= o.force_target_arcs;
        self.experiment.oracle |= o.oracle;
        self.experiment.timings |= o.timings;
    }

    pub fn input(&self) -> anyhow::Result<&Path> {
        self.input.as_deref().ok_or_else(|| {
            UsageError("no input file given (--input or `input` in the config)".into()).into()
        })
    }

    pub fn ingest(&self) -> anyhow::Result<&IngestConfig> {
        self.ingest
            .as_ref()
            .ok_or_else(|| UsageError("the config has no [ingest] section".into()).into())
    }

    pub fn execution(&self) -> Execution {
        if self.jobs == Some(1) {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }

    /// Core settings, with arc names resolved against `dataset`.
    pub fn experiment_config(&self, dataset: &Dataset) -> anyhow::Result<ExperimentConfig> {
        let resolve = |arcs: &[[String; 2]]| -> anyhow::Result<Vec<(VarId, VarId)>> {
            arcs.iter()
                .map(|[p, c]| {
                    let find = |name: &String| {
                        dataset
                            .variables()
                            .iter()
                            .find(|v| &v.name == name)
                            .map(|v| v.id)
                            .ok_or_else(|| UsageError(format!("arc names unknown column {name:?}")))
                    };
                    Ok((find(p)?, find(c)?))
                })
                .collect()
        };
        if self.experiment.decile_bins == 0 || self.experiment.brier_bins == 0 {
            bail!(UsageError("bin counts must be positive".into()));
        }
        Ok(ExperimentConfig {
            search: StructureSearchConfig {
                tabu_list_size: self.search.tabu_list_size,
                max_iterations: self.search.max_iterations,
                ess: self.search.ess,
                forced_arcs: resolve(&self.search.forced_arcs)?,
                forbidden_arcs: resolve(&self.search.forbidden_arcs)?,
                max_parents: self.search.max_parents,
                execution: self.execution(),
            },
            force_target_arcs: self.experiment.force_target_arcs,
            oracle: self.experiment.oracle,
            brute_force_cap: self.experiment.brute_force_cap,
            timings: self.experiment.timings,
            execution: self.execution(),
        })
    }
}
