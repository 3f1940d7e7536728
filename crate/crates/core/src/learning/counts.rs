use crate::error::{Error, Result};
use crate::ingest::Dataset;
use crate::model::{Cpt, Factor, Repr, VarId};

/// Joint counts of a child and its parents over a set of rows, laid out
/// row-major over the parents followed by the child.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    pub child: (VarId, usize),
    pub parents: Vec<(VarId, usize)>,
    pub counts: Vec<u64>,
}

impl CountTable {
    pub fn n_configs(&self) -> usize {
        self.parents.iter().map(|&(_, c)| c).product()
    }

    /// Counts for parent configuration `config`, one per child state.
    pub fn row(&self, config: usize) -> &[u64] {
        let k = self.child.1;
        &self.counts[config * k..(config + 1) * k]
    }
}

/// Counts each `(child, parents)` configuration over `rows`.
pub fn count(
    dataset: &Dataset,
    child: VarId,
    parents: &[VarId],
    rows: &[usize],
) -> Result<CountTable> {
    if parents.contains(&child) {
        return Err(Error::CptScope { child });
    }
    let k = dataset.variable(child)?.cardinality();
    let parents: Vec<(VarId, usize)> = parents
        .iter()
        .map(|&p| Ok((p, dataset.variable(p)?.cardinality())))
        .collect::<Result<_>>()?;
    let n_configs: usize = parents.iter().map(|&(_, c)| c).product();
    let mut counts = vec![0u64; n_configs * k];
    for &r in rows {
        let row = dataset.row(r);
        let mut config = 0;
        for &(p, c) in &parents {
            config = config * c + row[p.index()] as usize;
        }
        counts[config * k + row[child.index()] as usize] += 1;
    }
    Ok(CountTable {
        child: (child, k),
        parents,
        counts,
    })
}

/// Laplace-smoothed estimate
/// `P(v | pa) = (n(v, pa) + s / |Ω_V|) / (Σ_v n(v, pa) + s)`.
///
/// Evaluated as `(|Ω_V| n(v, pa) + s) / (|Ω_V| (n(pa) + s))`, which is the
/// same quantity with a single rounding when numerator and denominator are
/// exact in binary floating point.
pub fn estimate_cpt(counts: &CountTable, s: f64) -> Result<Cpt> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::NonPositiveEss(s));
    }
    let k = counts.child.1 as f64;
    let mut values = Vec::with_capacity(counts.counts.len());
    for config in 0..counts.n_configs() {
        let row = counts.row(config);
        let total: u64 = row.iter().sum();
        let denom = k * (total as f64 + s);
        values.extend(row.iter().map(|&n| (k * n as f64 + s) / denom));
    }
    let mut vars = counts.parents.clone();
    vars.push(counts.child);
    let factor = Factor::new(&vars, values, Repr::Linear)?;
    Cpt::new(
        counts.child.0,
        counts.parents.iter().map(|p| p.0).collect(),
        factor,
    )
}

/// Decomposable BIC term of one family: maximum-likelihood log-likelihood
/// minus `ln(N) / 2` per free parameter.
pub fn bic_family(counts: &CountTable, n_rows: usize) -> f64 {
    let k = counts.child.1;
    let mut ll = 0.0;
    for config in 0..counts.n_configs() {
        let row = counts.row(config);
        let total: u64 = row.iter().sum();
        if total == 0 {
            continue;
        }
        let t = total as f64;
        for &n in row {
            if n > 0 {
                ll += n as f64 * (n as f64 / t).ln();
            }
        }
    }
    let params = (k.saturating_sub(1) * counts.n_configs()) as f64;
    ll - 0.5 * (n_rows.max(1) as f64).ln() * params
}
