use std::collections::{BTreeMap, BTreeSet};

use super::{Assignment, DiscreteVariable, Factor, Reduction, Repr, Role, VarId, VariableMap};
use crate::error::{Error, Result};

/// Normalisation and equality tolerance used throughout.
pub const TOLERANCE: f64 = 1e-9;

/// Conditional probability table `P(child | parents)`, stored as a linear
/// factor over `{child} ∪ parents`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    child: VarId,
    parents: Vec<VarId>,
    factor: Factor,
}

impl Cpt {
    pub fn new(child: VarId, parents: Vec<VarId>, factor: Factor) -> Result<Self> {
        let mut expected: Vec<VarId> = parents.iter().copied().chain([child]).collect();
        expected.sort();
        if factor.scope() != expected.as_slice() || parents.contains(&child) {
            return Err(Error::CptScope { child });
        }
        let factor = factor.to_linear();
        let sums = factor.reduce(child, Reduction::Sum)?;
        for (config, &sum) in sums.values().iter().enumerate() {
            if (sum - 1.0).abs() > TOLERANCE {
                return Err(Error::NotNormalised { child, config, sum });
            }
        }
        Ok(Cpt {
            child,
            parents,
            factor,
        })
    }

    /// Builds a CPT from rows of child distributions, one row per parent
    /// configuration in row-major order over `parents`.
    pub fn from_rows(
        child: (VarId, usize),
        parents: &[(VarId, usize)],
        rows: &[Vec<f64>],
    ) -> Result<Self> {
        let mut vars: Vec<(VarId, usize)> = parents.to_vec();
        vars.push(child);
        let values: Vec<f64> = rows.iter().flatten().copied().collect();
        let factor = Factor::new(&vars, values, Repr::Linear)?;
        Cpt::new(child.0, parents.iter().map(|p| p.0).collect(), factor)
    }

    /// Uniform parentless CPT.
    pub fn uniform(var: VarId, cardinality: usize) -> Self {
        let factor = Factor::new(
            &[(var, cardinality)],
            vec![1.0 / cardinality as f64; cardinality],
            Repr::Linear,
        )
        .expect("uniform table is valid");
        Cpt {
            child: var,
            parents: Vec::new(),
            factor,
        }
    }

    pub fn child(&self) -> VarId {
        self.child
    }

    pub fn parents(&self) -> &[VarId] {
        &self.parents
    }

    pub fn factor(&self) -> &Factor {
        &self.factor
    }

    /// `P(child = state | parents)` at the states bound in `assignment`.
    pub fn probability(&self, assignment: &Assignment) -> Result<f64> {
        self.factor.value(assignment)
    }
}

/// Directed acyclic model with one CPT per variable.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesianNetwork {
    variables: VariableMap,
    cpts: BTreeMap<VarId, Cpt>,
}

impl BayesianNetwork {
    pub fn new(variables: VariableMap, cpts: impl IntoIterator<Item = Cpt>) -> Result<Self> {
        let mut by_child = BTreeMap::new();
        for cpt in cpts {
            let child = cpt.child;
            for (v, c) in cpt.factor.vars() {
                let var = variables.get(&v).ok_or(Error::UnknownVariable(v))?;
                if var.cardinality() != c {
                    return Err(Error::CardinalityMismatch {
                        var: v,
                        left: var.cardinality(),
                        right: c,
                    });
                }
            }
            if by_child.insert(child, cpt).is_some() {
                return Err(Error::CptScope { child });
            }
        }
        if let Some(v) = variables.keys().find(|v| !by_child.contains_key(v)) {
            return Err(Error::MissingCpt(*v));
        }
        let targets = variables
            .values()
            .filter(|v| v.role == Role::Target)
            .count();
        if targets > 1 {
            return Err(Error::TargetCount(targets));
        }
        let bn = BayesianNetwork {
            variables,
            cpts: by_child,
        };
        bn.topological_order()?;
        Ok(bn)
    }

    pub fn variables(&self) -> &VariableMap {
        &self.variables
    }

    pub fn variable(&self, id: VarId) -> Result<&DiscreteVariable> {
        self.variables.get(&id).ok_or(Error::UnknownVariable(id))
    }

    pub fn cardinality(&self, id: VarId) -> Result<usize> {
        Ok(self.variable(id)?.cardinality())
    }

    pub fn cpt(&self, id: VarId) -> Result<&Cpt> {
        self.cpts.get(&id).ok_or(Error::UnknownVariable(id))
    }

    pub fn cpts(&self) -> impl Iterator<Item = &Cpt> {
        self.cpts.values()
    }

    pub fn parents(&self, id: VarId) -> Result<&[VarId]> {
        Ok(self.cpt(id)?.parents())
    }

    /// Children of `id`, in id order.
    pub fn children(&self, id: VarId) -> Result<Vec<VarId>> {
        self.variable(id)?;
        Ok(self
            .cpts
            .values()
            .filter(|c| c.parents.contains(&id))
            .map(|c| c.child)
            .collect())
    }

    pub fn target(&self) -> Option<VarId> {
        self.variables
            .values()
            .find(|v| v.role == Role::Target)
            .map(|v| v.id)
    }

    pub fn with_role(&self, role: Role) -> Vec<VarId> {
        self.variables
            .values()
            .filter(|v| v.role == role)
            .map(|v| v.id)
            .collect()
    }

    /// Copy of the network with variable roles replaced. CPTs are shared.
    pub fn with_roles(&self, roles: &BTreeMap<VarId, Role>) -> Result<Self> {
        let mut variables = self.variables.clone();
        for (id, role) in roles {
            variables
                .get_mut(id)
                .ok_or(Error::UnknownVariable(*id))?
                .role = *role;
        }
        BayesianNetwork::new(variables, self.cpts.values().cloned())
    }

    /// Kahn ordering with id-order tie-break; fails on a directed cycle.
    pub fn topological_order(&self) -> Result<Vec<VarId>> {
        let mut indegree: BTreeMap<VarId, usize> = self
            .cpts
            .iter()
            .map(|(&v, c)| (v, c.parents.len()))
            .collect();
        let mut ready: BTreeSet<VarId> = indegree
            .iter()
            .filter(|(_, &d)| d == 0)
            .map(|(&v, _)| v)
            .collect();
        let mut order = Vec::with_capacity(indegree.len());
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for c in self.cpts.values().filter(|c| c.parents.contains(&v)) {
                let d = indegree.get_mut(&c.child).expect("child registered");
                *d -= 1;
                if *d == 0 {
                    ready.insert(c.child);
                }
            }
        }
        if order.len() != self.cpts.len() {
            let stuck = indegree
                .iter()
                .find(|(v, _)| !order.contains(v))
                .map(|(&v, _)| v)
                .unwrap();
            return Err(Error::Cyclic(stuck));
        }
        Ok(order)
    }

    pub fn log_joint(&self, full: &Assignment) -> Result<f64> {
        full.validate(&self.variables)?;
        let mut total = 0.0;
        for cpt in self.cpts.values() {
            total += cpt.probability(full)?.ln();
        }
        Ok(total)
    }

    /// `P(v) = Π P(v | pa_V)`, accumulated in log space.
    pub fn joint_probability(&self, full: &Assignment) -> Result<f64> {
        Ok(self.log_joint(full)?.exp())
    }

    /// The CPTs viewed as undirected potentials.
    pub fn to_mrf(&self) -> MarkovRandomField {
        MarkovRandomField {
            variables: self.variables.clone(),
            potentials: self.cpts.values().map(|c| c.factor.clone()).collect(),
        }
    }
}

/// Undirected model: a bag of potentials whose product is an unnormalised
/// joint distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovRandomField {
    variables: VariableMap,
    potentials: Vec<Factor>,
}

impl MarkovRandomField {
    pub fn new(variables: VariableMap, potentials: Vec<Factor>) -> Result<Self> {
        let mut covered = BTreeSet::new();
        for p in &potentials {
            for (v, c) in p.vars() {
                let var = variables.get(&v).ok_or(Error::UnknownVariable(v))?;
                if var.cardinality() != c {
                    return Err(Error::CardinalityMismatch {
                        var: v,
                        left: var.cardinality(),
                        right: c,
                    });
                }
                covered.insert(v);
            }
        }
        if let Some(v) = variables.keys().find(|v| !covered.contains(v)) {
            return Err(Error::Uncovered(*v));
        }
        Ok(MarkovRandomField {
            variables,
            potentials,
        })
    }

    pub fn variables(&self) -> &VariableMap {
        &self.variables
    }

    pub fn potentials(&self) -> &[Factor] {
        &self.potentials
    }

    /// Unnormalised log density `Σ log φ_i(v_i)` at a full assignment.
    pub fn log_score(&self, full: &Assignment) -> Result<f64> {
        let mut total = 0.0;
        for p in &self.potentials {
            let v = p.value(full)?;
            total += match p.repr() {
                Repr::Log => v,
                Repr::Linear => v.ln(),
            };
        }
        Ok(total)
    }

    /// Adjacency of the interaction graph: variables sharing a potential.
    pub fn interaction_graph(&self) -> BTreeMap<VarId, BTreeSet<VarId>> {
        let mut adj: BTreeMap<VarId, BTreeSet<VarId>> = self
            .variables
            .keys()
            .map(|&v| (v, BTreeSet::new()))
            .collect();
        for p in &self.potentials {
            for &a in p.scope() {
                for &b in p.scope() {
                    if a != b {
                        adj.entry(a).or_default().insert(b);
                    }
                }
            }
        }
        adj
    }
}
