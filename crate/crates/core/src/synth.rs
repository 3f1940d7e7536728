//! Generators of random and planted networks, and sampling from them.
//! Used by tests, benchmarks and the acceptance suite.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::ingest::{stratified_folds, Dataset};
use crate::model::{variable_map, BayesianNetwork, Cpt, DiscreteVariable, Role, VarId};

/// Strictly positive random distribution over `k` states.
fn random_row(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

fn softmax(scores: &[f64]) -> Vec<f64> {
    let m = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = scores.iter().map(|s| (s - m).exp()).collect();
    let t: f64 = e.iter().sum();
    e.into_iter().map(|v| v / t).collect()
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Random DAG over `n_vars` variables with strictly positive CPTs.
///
/// Cardinalities are drawn from `2..=max_card`, each variable takes up to
/// `max_parents` parents among lower ids, and one randomly chosen variable is
/// a binary target. All other variables are public.
pub fn random_network(
    rng: &mut impl Rng,
    n_vars: usize,
    max_card: usize,
    max_parents: usize,
) -> BayesianNetwork {
    let target = rng.gen_range(0..n_vars);
    let cards: Vec<usize> = (0..n_vars)
        .map(|i| {
            if i == target {
                2
            } else {
                rng.gen_range(2..=max_card)
            }
        })
        .collect();
    let vars = variable_map((0..n_vars).map(|i| {
        let role = if i == target {
            Role::Target
        } else {
            Role::Public
        };
        DiscreteVariable::with_cardinality(VarId::from(i), format!("v{i}"), cards[i], role)
            .expect("valid variable")
    }))
    .expect("distinct ids");
    let mut cpts = Vec::with_capacity(n_vars);
    for i in 0..n_vars {
        let mut pool: Vec<usize> = (0..i).collect();
        pool.shuffle(rng);
        let n_parents = rng.gen_range(0..=max_parents.min(i));
        let mut parents: Vec<usize> = pool.into_iter().take(n_parents).collect();
        parents.sort();
        let pv: Vec<(VarId, usize)> = parents
            .iter()
            .map(|&p| (VarId::from(p), cards[p]))
            .collect();
        let n_configs: usize = pv.iter().map(|&(_, c)| c).product();
        let rows: Vec<Vec<f64>> = (0..n_configs).map(|_| random_row(rng, cards[i])).collect();
        cpts.push(Cpt::from_rows((VarId::from(i), cards[i]), &pv, &rows).expect("normalised rows"));
    }
    BayesianNetwork::new(vars, cpts).expect("acyclic by construction")
}

/// Marks up to `max_private` randomly chosen non-target variables private.
pub fn with_random_private(
    rng: &mut impl Rng,
    bn: &BayesianNetwork,
    max_private: usize,
) -> BayesianNetwork {
    let mut pool = bn.with_role(Role::Public);
    pool.shuffle(rng);
    let k = rng.gen_range(0..=max_private.min(pool.len()));
    let roles: BTreeMap<VarId, Role> = pool
        .into_iter()
        .take(k)
        .map(|v| (v, Role::Private))
        .collect();
    bn.with_roles(&roles).expect("known variables")
}

/// Forward sampling of `n` full rows, indexed by variable id.
pub fn sample_rows(bn: &BayesianNetwork, n: usize, rng: &mut impl Rng) -> Vec<Vec<usize>> {
    let order = bn.topological_order().expect("acyclic");
    let width = bn
        .variables()
        .keys()
        .map(|v| v.index() + 1)
        .max()
        .unwrap_or(0);
    let tables: Vec<(VarId, Vec<VarId>, usize)> = order
        .iter()
        .map(|&v| {
            (
                v,
                bn.parents(v).expect("known").to_vec(),
                bn.cardinality(v).expect("known"),
            )
        })
        .collect();
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let mut row = vec![0usize; width];
        let mut partial = crate::model::Assignment::new();
        for (v, _, card) in &tables {
            let cpt = bn.cpt(*v).expect("known");
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut state = card - 1;
            for s in 0..*card {
                partial.insert(*v, s);
                acc += cpt.probability(&partial).expect("parents sampled first");
                if u < acc {
                    state = s;
                    break;
                }
            }
            partial.insert(*v, state);
            row[v.index()] = state;
        }
        rows.push(row);
    }
    rows
}

/// Samples `n_rows` rows from `bn` (whose ids must be `0..n`) into a dataset
/// with stratified folds.
pub fn sample_dataset(
    bn: &BayesianNetwork,
    n_rows: usize,
    n_folds: usize,
    seed: u64,
) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = sample_rows(bn, n_rows, &mut rng);
    let variables: Vec<DiscreteVariable> = bn.variables().values().cloned().collect();
    let target = bn.target().ok_or(crate::error::Error::NoTarget)?;
    let targets: Vec<usize> = rows.iter().map(|r| r[target.index()]).collect();
    let folds = stratified_folds(&targets, n_folds, seed)?;
    Dataset::from_rows(variables, &rows, folds, n_folds, seed)
}

/// Census-shaped network whose target depends moderately on two private
/// features (`sex`, `race`) and more strongly on public evidence.
///
/// Variables: 0 `income` (target), 1 `sex`, 2 `race`, 3 `age`,
/// 4 `education`, 5 `hours`, 6 `occupation`, 7 `capital`, 8 `marital`.
pub fn planted_bias_network() -> BayesianNetwork {
    let spec: [(&str, usize, Role); 9] = [
        ("income", 2, Role::Target),
        ("sex", 2, Role::Private),
        ("race", 3, Role::Private),
        ("age", 4, Role::Public),
        ("education", 4, Role::Public),
        ("hours", 4, Role::Public),
        ("occupation", 4, Role::Public),
        ("capital", 2, Role::Public),
        ("marital", 3, Role::Public),
    ];
    let id = |i: usize| VarId::from(i);
    let vars = variable_map(spec.iter().enumerate().map(|(i, &(name, card, role))| {
        DiscreteVariable::with_cardinality(id(i), name, card, role).expect("valid")
    }))
    .expect("distinct");
    let (income, sex, race, age, edu, hours, occ, cap, mar) = (
        id(0),
        id(1),
        id(2),
        id(3),
        id(4),
        id(5),
        id(6),
        id(7),
        id(8),
    );
    let mut cpts = vec![
        Cpt::from_rows((sex, 2), &[], &[vec![0.6, 0.4]]).unwrap(),
        Cpt::from_rows((race, 3), &[], &[vec![0.7, 0.2, 0.1]]).unwrap(),
        Cpt::from_rows((age, 4), &[], &[vec![0.25; 4]]).unwrap(),
    ];
    // P(income = high | sex, race, age): private features shift the log-odds
    let mut rows = Vec::new();
    for s in 0..2 {
        for r in 0..3 {
            for a in 0..4 {
                let logit = -0.4 - 1.0 * s as f64 - 0.5 * r as f64 + 0.45 * a as f64;
                let p = sigmoid(logit);
                rows.push(vec![1.0 - p, p]);
            }
        }
    }
    cpts.push(Cpt::from_rows((income, 2), &[(sex, 2), (race, 3), (age, 4)], &rows).unwrap());
    // children of income with different strengths
    let ordinal =
        |k: usize, slope: f64| softmax(&(0..k).map(|i| slope * i as f64).collect::<Vec<_>>());
    cpts.push(
        Cpt::from_rows(
            (edu, 4),
            &[(income, 2)],
            &[ordinal(4, -0.8), ordinal(4, 0.8)],
        )
        .unwrap(),
    );
    cpts.push(
        Cpt::from_rows(
            (hours, 4),
            &[(income, 2)],
            &[ordinal(4, -0.4), ordinal(4, 0.5)],
        )
        .unwrap(),
    );
    let mut occ_rows = Vec::new();
    for y in 0..2 {
        for e in 0..4 {
            let slope = if y == 0 { -0.3 } else { 0.4 } + 0.15 * e as f64;
            occ_rows.push(ordinal(4, slope));
        }
    }
    cpts.push(Cpt::from_rows((occ, 4), &[(income, 2), (edu, 4)], &occ_rows).unwrap());
    cpts.push(
        Cpt::from_rows(
            (cap, 2),
            &[(income, 2)],
            &[vec![0.95, 0.05], vec![0.6, 0.4]],
        )
        .unwrap(),
    );
    let mut mar_rows = Vec::new();
    for y in 0..2 {
        for a in 0..4 {
            let married = sigmoid(-0.8 + 0.5 * a as f64 + if y == 1 { 1.5 } else { 0.0 });
            mar_rows.push(vec![married, (1.0 - married) * 0.7, (1.0 - married) * 0.3]);
        }
    }
    cpts.push(Cpt::from_rows((mar, 3), &[(income, 2), (age, 4)], &mar_rows).unwrap());
    BayesianNetwork::new(vars, cpts).expect("valid planted network")
}

/// Binary target (id 0, uniform prior) with `n_children` binary children
/// (ids `1..=n_children`) and no co-parents. The first `n_private` children
/// are private, the rest public. CPTs are drawn from `seed`.
pub fn target_with_children(n_children: usize, n_private: usize, seed: u64) -> BayesianNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vars =
        vec![DiscreteVariable::with_cardinality(VarId(0), "y", 2, Role::Target).unwrap()];
    let mut cpts = vec![Cpt::from_rows((VarId(0), 2), &[], &[vec![0.5, 0.5]]).unwrap()];
    for i in 1..=n_children {
        let role = if i <= n_private {
            Role::Private
        } else {
            Role::Public
        };
        vars.push(
            DiscreteVariable::with_cardinality(VarId::from(i), format!("c{i}"), 2, role).unwrap(),
        );
        let p0 = rng.gen_range(0.15..0.85);
        let p1 = rng.gen_range(0.15..0.85);
        cpts.push(
            Cpt::from_rows(
                (VarId::from(i), 2),
                &[(VarId(0), 2)],
                &[vec![p0, 1.0 - p0], vec![p1, 1.0 - p1]],
            )
            .unwrap(),
        );
    }
    BayesianNetwork::new(variable_map(vars).unwrap(), cpts).expect("valid star network")
}
