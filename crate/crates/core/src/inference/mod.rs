//! Exact variable elimination: sum-product updating and max/min-product
//! most probable explanation, all in log space.

mod order;

use std::collections::BTreeSet;

pub use order::{induced_width, min_fill_order, EliminationOrder};

use crate::error::{Error, Result};
use crate::model::{
    Assignment, BayesianNetwork, Cpt, Factor, MarkovRandomField, Reduction, Repr, VarId,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpeMode {
    Max,
    Min,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpeResult {
    /// Optimal states of the free variables.
    pub assignment: Assignment,
    /// Log of the optimal product of potentials.
    pub score: f64,
}

fn multiply_all<'a>(factors: impl IntoIterator<Item = &'a Factor>) -> Result<Factor> {
    factors
        .into_iter()
        .try_fold(Factor::unit(Repr::Log), |acc, f| acc.product(f))
}

/// Splits `factors` into those mentioning `var` (multiplied together) and the rest.
fn gather(factors: &mut Vec<Factor>, var: VarId) -> Result<Factor> {
    let (touching, rest): (Vec<Factor>, Vec<Factor>) = std::mem::take(factors)
        .into_iter()
        .partition(|f| f.contains(var));
    *factors = rest;
    multiply_all(&touching)
}

/// CPTs needed for `P(query | evidence)`: the query's own CPT and its
/// children's when the evidence covers the Markov blanket, otherwise the
/// ancestral closure of the query and evidence.
fn relevant_cpts<'a>(
    bn: &'a BayesianNetwork,
    query: VarId,
    evidence: &Assignment,
) -> Result<Vec<&'a Cpt>> {
    let children = bn.children(query)?;
    let mut blanket: BTreeSet<VarId> = bn.parents(query)?.iter().copied().collect();
    for &c in &children {
        blanket.insert(c);
        blanket.extend(bn.parents(c)?.iter().copied().filter(|&p| p != query));
    }
    if blanket.iter().all(|&v| evidence.contains(v)) {
        let mut cpts = vec![bn.cpt(query)?];
        for c in children {
            cpts.push(bn.cpt(c)?);
        }
        return Ok(cpts);
    }
    let mut keep: BTreeSet<VarId> = BTreeSet::new();
    let mut stack: Vec<VarId> = evidence
        .vars()
        .filter(|v| bn.variables().contains_key(v))
        .chain([query])
        .collect();
    while let Some(v) = stack.pop() {
        if keep.insert(v) {
            stack.extend(bn.parents(v)?.iter().copied());
        }
    }
    keep.iter().map(|&v| bn.cpt(v)).collect()
}

/// Posterior distribution of `query` given `evidence`, by sum-product
/// variable elimination under a min-fill order.
pub fn posterior(bn: &BayesianNetwork, query: VarId, evidence: &Assignment) -> Result<Vec<f64>> {
    bn.variable(query)?;
    if evidence.contains(query) {
        return Err(Error::QueryObserved(query));
    }
    let evidence = evidence.filtered(|v| bn.variables().contains_key(&v));
    evidence.validate(bn.variables())?;
    let mut factors = Vec::new();
    for cpt in relevant_cpts(bn, query, &evidence)? {
        factors.push(cpt.factor().to_log().restrict(&evidence)?);
    }
    let hidden: BTreeSet<VarId> = factors
        .iter()
        .flat_map(|f| f.scope().iter().copied())
        .filter(|&v| v != query)
        .collect();
    let order = order::min_fill(order::graph_of(factors.iter().map(|f| f.scope())), &hidden);
    for &v in order.as_slice() {
        let joint = gather(&mut factors, v)?;
        factors.push(joint.reduce(v, Reduction::Sum)?);
    }
    let joint = multiply_all(&factors)?;
    let log_z = joint
        .reduce(query, Reduction::Sum)?
        .as_scalar()
        .expect("scalar after reduction");
    if log_z == f64::NEG_INFINITY || log_z.is_nan() {
        return Err(Error::ZeroEvidence);
    }
    Ok(joint.values().iter().map(|&v| (v - log_z).exp()).collect())
}

struct Trace {
    var: VarId,
    scope: Vec<(VarId, usize)>,
    argmax: Vec<usize>,
}

/// Most probable explanation of `free` given `evidence`.
///
/// `Max` maximises the product of potentials, `Min` minimises it (as a
/// maximisation over negated log potentials). Every variable of `mrf` must be
/// free or observed; evidence on variables outside `mrf` is ignored. With an
/// empty free set the result carries the scalar score of the evidence and an
/// empty assignment. Ties resolve to the lowest state of each variable during
/// traceback.
pub fn mpe(
    mrf: &MarkovRandomField,
    free: &BTreeSet<VarId>,
    evidence: &Assignment,
    mode: MpeMode,
) -> Result<MpeResult> {
    for &v in free {
        if !mrf.variables().contains_key(&v) {
            return Err(Error::UnknownVariable(v));
        }
        if evidence.contains(v) {
            return Err(Error::FreeAndObserved(v));
        }
    }
    let evidence = evidence.filtered(|v| mrf.variables().contains_key(&v));
    evidence.validate(mrf.variables())?;
    if let Some(&v) = mrf
        .variables()
        .keys()
        .find(|v| !free.contains(v) && !evidence.contains(**v))
    {
        return Err(Error::Uncovered(v));
    }
    let mut factors = Vec::with_capacity(mrf.potentials().len());
    for p in mrf.potentials() {
        let f = p.to_log().restrict(&evidence)?;
        factors.push(match mode {
            MpeMode::Max => f,
            MpeMode::Min => f.negated_log(),
        });
    }
    let order = order::min_fill(order::graph_of(factors.iter().map(|f| f.scope())), free);
    let mut traces = Vec::with_capacity(free.len());
    for &v in order.as_slice() {
        let joint = gather(&mut factors, v)?;
        let (reduced, argmax) = joint.reduce_max_with_argmax(v)?;
        traces.push(Trace {
            var: v,
            scope: reduced.vars(),
            argmax,
        });
        factors.push(reduced);
    }
    let best = multiply_all(&factors)?
        .as_scalar()
        .expect("all free variables eliminated");
    let mut assignment = Assignment::new();
    for t in traces.iter().rev() {
        let mut idx = 0;
        for &(v, card) in &t.scope {
            idx = idx * card + assignment.get(v).expect("later variables already decoded");
        }
        assignment.insert(t.var, t.argmax[idx]);
    }
    let score = match mode {
        MpeMode::Max => best,
        MpeMode::Min => -best,
    };
    Ok(MpeResult { assignment, score })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{variable_map, DiscreteVariable, Role};

    fn single(values: &[f64]) -> MarkovRandomField {
        let a =
            DiscreteVariable::with_cardinality(VarId(0), "A", values.len(), Role::Public).unwrap();
        let phi = Factor::new(&[(VarId(0), values.len())], values.to_vec(), Repr::Linear).unwrap();
        MarkovRandomField::new(variable_map([a]).unwrap(), vec![phi]).unwrap()
    }

    #[test]
    fn single_potential_modes() {
        let m = single(&[0.2, 0.8]);
        let free: BTreeSet<VarId> = [VarId(0)].into();
        let hi = mpe(&m, &free, &Assignment::new(), MpeMode::Max).unwrap();
        assert_eq!(hi.assignment.get(VarId(0)), Some(1));
        assert!((hi.score - 0.8f64.ln()).abs() < 1e-12);
        let lo = mpe(&m, &free, &Assignment::new(), MpeMode::Min).unwrap();
        assert_eq!(lo.assignment.get(VarId(0)), Some(0));
        assert!((lo.score - 0.2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn mpe_contract_errors() {
        let m = single(&[0.2, 0.8]);
        let a: BTreeSet<VarId> = [VarId(0)].into();
        let ev = Assignment::new().with(VarId(0), 1);
        assert!(matches!(
            mpe(&m, &a, &ev, MpeMode::Max),
            Err(Error::FreeAndObserved(_))
        ));
        assert!(matches!(
            mpe(&m, &BTreeSet::new(), &Assignment::new(), MpeMode::Max),
            Err(Error::Uncovered(_))
        ));
        let empty = mpe(&m, &BTreeSet::new(), &ev, MpeMode::Max).unwrap();
        assert!(empty.assignment.is_empty());
        assert!((empty.score - 0.8f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn mpe_ties_take_lowest_state() {
        let m = single(&[0.5, 0.5, 0.1]);
        let free: BTreeSet<VarId> = [VarId(0)].into();
        assert_eq!(
            mpe(&m, &free, &Assignment::new(), MpeMode::Max)
                .unwrap()
                .assignment
                .get(VarId(0)),
            Some(0)
        );
    }

    fn chain() -> BayesianNetwork {
        let (z, y) = (VarId(0), VarId(1));
        let vars = variable_map([
            DiscreteVariable::with_cardinality(z, "Z", 2, Role::Public).unwrap(),
            DiscreteVariable::with_cardinality(y, "Y", 2, Role::Target).unwrap(),
        ])
        .unwrap();
        BayesianNetwork::new(
            vars,
            [
                Cpt::from_rows((z, 2), &[], &[vec![0.5, 0.5]]).unwrap(),
                Cpt::from_rows((y, 2), &[(z, 2)], &[vec![0.8, 0.2], vec![0.2, 0.8]]).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn chain_posteriors() {
        let bn = chain();
        let p = posterior(&bn, VarId(1), &Assignment::new().with(VarId(0), 0)).unwrap();
        assert!((p[0] - 0.8).abs() < 1e-12 && (p[1] - 0.2).abs() < 1e-12);
        let prior = posterior(&bn, VarId(0), &Assignment::new()).unwrap();
        assert!((prior[0] - 0.5).abs() < 1e-12);
        assert!(matches!(
            posterior(&bn, VarId(1), &Assignment::new().with(VarId(1), 0)),
            Err(Error::QueryObserved(_))
        ));
    }

    #[test]
    fn zero_evidence_is_reported() {
        let (a, b) = (VarId(0), VarId(1));
        let vars = variable_map([
            DiscreteVariable::with_cardinality(a, "A", 2, Role::Public).unwrap(),
            DiscreteVariable::with_cardinality(b, "B", 2, Role::Public).unwrap(),
        ])
        .unwrap();
        let bn = BayesianNetwork::new(
            vars,
            [
                Cpt::from_rows((a, 2), &[], &[vec![0.3, 0.7]]).unwrap(),
                Cpt::from_rows((b, 2), &[(a, 2)], &[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap(),
            ],
        )
        .unwrap();
        assert!(matches!(
            posterior(&bn, a, &Assignment::new().with(b, 1)),
            Err(Error::ZeroEvidence)
        ));
    }
}
