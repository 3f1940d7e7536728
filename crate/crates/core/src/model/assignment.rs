use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{VarId, VariableMap};
use crate::error::{Error, Result};

/// Partial or full binding of variables to state indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment(BTreeMap<VarId, usize>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, var: VarId) -> Option<usize> {
        self.0.get(&var).copied()
    }

    pub fn insert(&mut self, var: VarId, state: usize) -> Option<usize> {
        self.0.insert(var, state)
    }

    pub fn remove(&mut self, var: VarId) -> Option<usize> {
        self.0.remove(&var)
    }

    pub fn with(mut self, var: VarId, state: usize) -> Self {
        self.0.insert(var, state);
        self
    }

    pub fn contains(&self, var: VarId) -> bool {
        self.0.contains_key(&var)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, usize)> + '_ {
        self.0.iter().map(|(&v, &s)| (v, s))
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.0.keys().copied()
    }

    /// Keeps only the bindings whose variable satisfies `keep`.
    pub fn filtered(&self, mut keep: impl FnMut(VarId) -> bool) -> Assignment {
        Assignment(
            self.0
                .iter()
                .filter(|(v, _)| keep(**v))
                .map(|(&v, &s)| (v, s))
                .collect(),
        )
    }

    /// Overwrites bindings with those of `other`.
    pub fn merged(&self, other: &Assignment) -> Assignment {
        let mut out = self.clone();
        out.0.extend(other.0.iter().map(|(&v, &s)| (v, s)));
        out
    }

    /// Checks every bound variable exists and every state is in range.
    pub fn validate(&self, vars: &VariableMap) -> Result<()> {
        for (v, s) in self.iter() {
            let var = vars.get(&v).ok_or(Error::UnknownVariable(v))?;
            if s >= var.cardinality() {
                return Err(Error::StateOutOfRange {
                    var: v,
                    state: s,
                    cardinality: var.cardinality(),
                });
            }
        }
        Ok(())
    }
}

impl FromIterator<(VarId, usize)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (VarId, usize)>>(iter: I) -> Self {
        Assignment(iter.into_iter().collect())
    }
}

/// Enumerates every joint state of `vars` (given as `(id, cardinality)`),
/// last variable varying fastest.
pub fn joint_states(vars: &[(VarId, usize)]) -> impl Iterator<Item = Assignment> + '_ {
    let total: usize = vars.iter().map(|&(_, c)| c).product();
    let mut digits = vec![0usize; vars.len()];
    let mut first = true;
    (0..total).map(move |_| {
        if !first {
            for i in (0..vars.len()).rev() {
                digits[i] += 1;
                if digits[i] < vars[i].1 {
                    break;
                }
                digits[i] = 0;
            }
        }
        first = false;
        vars.iter()
            .zip(&digits)
            .map(|(&(v, _), &d)| (v, d))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn joint_states_row_major() {
        let vars = [(VarId(0), 2), (VarId(1), 3)];
        let all: Vec<_> = joint_states(&vars).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(
            all[1],
            Assignment::new().with(VarId(0), 0).with(VarId(1), 1)
        );
        assert_eq!(
            all[3],
            Assignment::new().with(VarId(0), 1).with(VarId(1), 0)
        );
    }

    #[test]
    fn empty_scope_has_one_state() {
        assert_eq!(joint_states(&[]).count(), 1);
    }
}
