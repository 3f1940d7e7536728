use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Opaque variable identifier. Factor scopes are kept sorted by it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VarId(pub u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

impl From<usize> for VarId {
    fn from(i: usize) -> Self {
        VarId(i as u32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Target,
    Private,
    Public,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Target => "target",
            Role::Private => "private",
            Role::Public => "public",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteVariable {
    pub id: VarId,
    pub name: String,
    pub states: Vec<String>,
    pub role: Role,
}

impl DiscreteVariable {
    /// Builds a variable after checking its labels.
    ///
    /// A single state is accepted: quantile discretisation can collapse a
    /// column to one bin, and such a variable is harmless in every model.
    pub fn new(
        id: VarId,
        name: impl Into<String>,
        states: Vec<String>,
        role: Role,
    ) -> Result<Self> {
        let name = name.into();
        if states.is_empty() {
            return Err(Error::InvalidVariable {
                name,
                reason: "no states".into(),
            });
        }
        let mut seen = HashSet::new();
        for s in &states {
            if !seen.insert(s.as_str()) {
                return Err(Error::InvalidVariable {
                    name,
                    reason: format!("duplicate state label {s:?}"),
                });
            }
        }
        if role == Role::Target && states.len() < 2 {
            return Err(Error::InvalidVariable {
                name,
                reason: "target needs at least two states".into(),
            });
        }
        Ok(DiscreteVariable {
            id,
            name,
            states,
            role,
        })
    }

    /// Variable with states labelled `0..cardinality`.
    pub fn with_cardinality(
        id: VarId,
        name: impl Into<String>,
        cardinality: usize,
        role: Role,
    ) -> Result<Self> {
        Self::new(
            id,
            name,
            (0..cardinality).map(|s| s.to_string()).collect(),
            role,
        )
    }

    pub fn cardinality(&self) -> usize {
        self.states.len()
    }
}

/// Variables keyed by id, iterated in id order.
pub type VariableMap = BTreeMap<VarId, DiscreteVariable>;

/// Builds a [`VariableMap`], rejecting duplicated ids or more than one target.
pub fn variable_map(vars: impl IntoIterator<Item = DiscreteVariable>) -> Result<VariableMap> {
    let mut map = VariableMap::new();
    for v in vars {
        let id = v.id;
        if map.insert(id, v).is_some() {
            return Err(Error::DuplicateScopeVariable(id));
        }
    }
    let targets = map.values().filter(|v| v.role == Role::Target).count();
    if targets > 1 {
        return Err(Error::TargetCount(targets));
    }
    Ok(map)
}
