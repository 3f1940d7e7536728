use std::collections::BTreeSet;

use crate::error::Result;
use crate::model::{BayesianNetwork, Cpt, VarId};

/// `{w} ∪ parents(w) ∪ children(w) ∪ parents(children(w))`.
pub fn markov_blanket(bn: &BayesianNetwork, w: VarId) -> Result<BTreeSet<VarId>> {
    let mut out: BTreeSet<VarId> = [w].into();
    out.extend(bn.parents(w)?.iter().copied());
    for c in bn.children(w)? {
        out.insert(c);
        out.extend(bn.parents(c)?.iter().copied());
    }
    Ok(out)
}

/// Network over the Markov blanket of `w`: the CPTs of `w` and its children
/// are kept verbatim, every other blanket variable becomes a uniform root.
pub fn blanket_subnetwork(bn: &BayesianNetwork, w: VarId) -> Result<BayesianNetwork> {
    let blanket = markov_blanket(bn, w)?;
    let keep: BTreeSet<VarId> = [w].into_iter().chain(bn.children(w)?).collect();
    let variables = bn
        .variables()
        .iter()
        .filter(|(v, _)| blanket.contains(v))
        .map(|(&v, d)| (v, d.clone()))
        .collect();
    let mut cpts = Vec::with_capacity(blanket.len());
    for &v in &blanket {
        if keep.contains(&v) {
            cpts.push(bn.cpt(v)?.clone());
        } else {
            cpts.push(Cpt::uniform(v, bn.cardinality(v)?));
        }
    }
    BayesianNetwork::new(variables, cpts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{variable_map, DiscreteVariable, Role};

    /// The income example: Age, Gender, Occupation -> Income; Income, Age,
    /// Taxes -> Capital; Race -> Education -> Occupation.
    fn income_network() -> (BayesianNetwork, [VarId; 8]) {
        let names = [
            "Income",
            "Age",
            "Taxes",
            "Race",
            "Gender",
            "Capital",
            "Education",
            "Occupation",
        ];
        let ids: Vec<VarId> = (0..8u32).map(VarId).collect();
        let vars = variable_map(names.iter().enumerate().map(|(i, n)| {
            let role = if i == 0 { Role::Target } else { Role::Public };
            DiscreteVariable::with_cardinality(ids[i], *n, 2, role).unwrap()
        }))
        .unwrap();
        let [inc, age, tax, race, gen, cap, edu, occ] = [0, 1, 2, 3, 4, 5, 6, 7].map(|i| ids[i]);
        let parents: Vec<(VarId, Vec<VarId>)> = vec![
            (inc, vec![age, gen, occ]),
            (age, vec![]),
            (tax, vec![]),
            (race, vec![]),
            (gen, vec![]),
            (cap, vec![inc, age, tax]),
            (edu, vec![race]),
            (occ, vec![edu]),
        ];
        let cpts = parents.into_iter().map(|(child, ps)| {
            let pv: Vec<(VarId, usize)> = ps.iter().map(|&p| (p, 2)).collect();
            let rows: Vec<Vec<f64>> = (0..1usize << ps.len())
                .map(|i| {
                    let p = 0.2 + 0.6 * (i as f64 + 1.0) / ((1 << ps.len()) as f64 + 1.0);
                    vec![p, 1.0 - p]
                })
                .collect();
            Cpt::from_rows((child, 2), &pv, &rows).unwrap()
        });
        (
            BayesianNetwork::new(vars, cpts).unwrap(),
            [inc, age, tax, race, gen, cap, edu, occ],
        )
    }

    #[test]
    fn income_blanket() {
        let (bn, [inc, age, tax, race, gen, cap, edu, occ]) = income_network();
        let mb = markov_blanket(&bn, inc).unwrap();
        assert_eq!(mb, [inc, age, gen, occ, cap, tax].into_iter().collect());
        assert!(!mb.contains(&race) && !mb.contains(&edu));

        let sub = blanket_subnetwork(&bn, inc).unwrap();
        assert_eq!(sub.cpt(inc).unwrap(), bn.cpt(inc).unwrap());
        assert_eq!(sub.cpt(cap).unwrap(), bn.cpt(cap).unwrap());
        for v in [age, gen, occ, tax] {
            assert!(sub.parents(v).unwrap().is_empty());
            assert_eq!(sub.cpt(v).unwrap().factor().values(), &[0.5, 0.5]);
        }
        assert_eq!(sub.variables().len(), 6);
    }

    #[test]
    fn leaf_and_isolated_nodes() {
        let (bn, [.., cap, _, _]) = income_network();
        // Capital has no children: only its own CPT is kept
        let sub = blanket_subnetwork(&bn, cap).unwrap();
        assert_eq!(sub.cpt(cap).unwrap(), bn.cpt(cap).unwrap());
        assert_eq!(sub.cpts().filter(|c| !c.parents().is_empty()).count(), 1);

        let vars =
            variable_map([
                DiscreteVariable::with_cardinality(VarId(0), "x", 2, Role::Public).unwrap(),
            ])
            .unwrap();
        let lone = BayesianNetwork::new(vars, [Cpt::uniform(VarId(0), 2)]).unwrap();
        assert_eq!(markov_blanket(&lone, VarId(0)).unwrap(), [VarId(0)].into());
        assert!(markov_blanket(&bn, VarId(42)).is_err());
    }

    #[test]
    fn saturated_dag() {
        let ids: Vec<VarId> = (0..4u32).map(VarId).collect();
        let vars = variable_map(
            ids.iter()
                .map(|&v| DiscreteVariable::with_cardinality(v, "v", 2, Role::Public).unwrap()),
        )
        .unwrap();
        let cpts = ids.iter().enumerate().map(|(i, &v)| {
            let ps: Vec<(VarId, usize)> = ids[..i].iter().map(|&p| (p, 2)).collect();
            Cpt::from_rows((v, 2), &ps, &vec![vec![0.3, 0.7]; 1 << i]).unwrap()
        });
        let bn = BayesianNetwork::new(vars, cpts).unwrap();
        for &w in &ids {
            assert_eq!(markov_blanket(&bn, w).unwrap().len(), 4);
        }
    }
}
