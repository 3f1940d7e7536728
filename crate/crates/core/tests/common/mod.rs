#![allow(dead_code)]

use std::collections::BTreeSet;

use frl_core::model::{joint_states, Assignment, BayesianNetwork, MarkovRandomField, VarId};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn domain(bn: &BayesianNetwork, vars: impl IntoIterator<Item = VarId>) -> Vec<(VarId, usize)> {
    vars.into_iter()
        .map(|v| (v, bn.cardinality(v).unwrap()))
        .collect()
}

/// `P(query | evidence)` by summing the full joint.
pub fn enumerate_posterior(bn: &BayesianNetwork, query: VarId, evidence: &Assignment) -> Vec<f64> {
    let hidden: Vec<VarId> = bn
        .variables()
        .keys()
        .copied()
        .filter(|&v| v != query && !evidence.contains(v))
        .collect();
    let card = bn.cardinality(query).unwrap();
    let mut mass = vec![0.0; card];
    for h in joint_states(&domain(bn, hidden)) {
        for (q, m) in mass.iter_mut().enumerate() {
            *m += bn
                .joint_probability(&h.merged(evidence).with(query, q))
                .unwrap();
        }
    }
    let z: f64 = mass.iter().sum();
    mass.into_iter().map(|m| m / z).collect()
}

/// Best log score over the free variables and every assignment reaching it
/// within `tol`.
pub fn enumerate_mpe(
    mrf: &MarkovRandomField,
    free: &BTreeSet<VarId>,
    evidence: &Assignment,
    maximise: bool,
    tol: f64,
) -> (f64, Vec<Assignment>) {
    let dom: Vec<(VarId, usize)> = free
        .iter()
        .map(|&v| (v, mrf.variables()[&v].cardinality()))
        .collect();
    let scored: Vec<(Assignment, f64)> = joint_states(&dom)
        .map(|a| {
            let s = mrf.log_score(&a.merged(evidence)).unwrap();
            (a, s)
        })
        .collect();
    let best = scored
        .iter()
        .map(|(_, s)| if maximise { *s } else { -*s })
        .fold(f64::NEG_INFINITY, f64::max);
    let best = if maximise { best } else { -best };
    let winners = scored
        .into_iter()
        .filter(|(_, s)| (s - best).abs() <= tol)
        .map(|(a, _)| a)
        .collect();
    (best, winners)
}

/// Random evidence on a random subset of `vars`.
pub fn random_evidence(
    rng: &mut impl Rng,
    bn: &BayesianNetwork,
    vars: &[VarId],
    max: usize,
) -> Assignment {
    let mut pool = vars.to_vec();
    pool.shuffle(rng);
    let k = rng.gen_range(0..=max.min(pool.len()));
    pool.into_iter()
        .take(k)
        .map(|v| (v, rng.gen_range(0..bn.cardinality(v).unwrap())))
        .collect()
}
