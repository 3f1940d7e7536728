use crate::error::{Error, Result};

/// Equal-frequency discretisation with nearest-rank quantile edges.
///
/// Edge `i` is the `ceil(i * n / n_bins)`-th smallest value, `i = 1..n_bins`.
/// Duplicate edges are merged and edges with no value above them dropped, so
/// every resulting state is populated. A value maps to the number of edges
/// strictly below it.
pub fn discretise_quantile(values: &[f64], n_bins: usize) -> Result<(Vec<usize>, Vec<f64>)> {
    if n_bins < 2 {
        return Err(Error::Config(format!(
            "n_bins must be at least 2, got {n_bins}"
        )));
    }
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let max = sorted[n - 1];
    let mut edges: Vec<f64> = Vec::with_capacity(n_bins - 1);
    for i in 1..n_bins {
        let rank = (i * n).div_ceil(n_bins);
        let e = sorted[rank.max(1) - 1];
        if e < max && edges.last().is_none_or(|&last| last < e) {
            edges.push(e);
        }
    }
    let states = values
        .iter()
        .map(|&v| edges.partition_point(|&e| e < v))
        .collect();
    Ok((states, edges))
}

/// Human-readable labels for the bins delimited by `edges`.
pub fn bin_labels(edges: &[f64]) -> Vec<String> {
    if edges.is_empty() {
        return vec!["all".to_string()];
    }
    let mut labels = Vec::with_capacity(edges.len() + 1);
    labels.push(format!("<={}", edges[0]));
    for w in edges.windows(2) {
        labels.push(format!("({},{}]", w[0], w[1]));
    }
    labels.push(format!(">{}", edges[edges.len() - 1]));
    labels
}

/// Splits at the sample median; values equal to the median go to state 0.
pub fn binarise_target_by_median(values: &[f64]) -> Result<(Vec<usize>, f64)> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    Ok((
        values.iter().map(|&v| usize::from(v > median)).collect(),
        median,
    ))
}
