//! Text serialisation of Bayesian networks.
//!
//! The format is a JSON document:
//!
//! ```text
//! {
//!   "format": "frl-bn/1",
//!   "variables": [ { "id": 0, "name": "income", "role": "target", "states": ["<=50K", ">50K"] }, ... ],
//!   "cpts": [ { "child": 0, "parents": [3, 5], "table": [ ... ] }, ... ]
//! }
//! ```
//!
//! `table` is row-major over the CPT scope (child and parents) sorted by
//! variable id, last variable fastest. Variables and CPTs are listed in id
//! order, and floats are written in shortest round-trip form. An optional
//! `"header"` array of strings carries provenance lines and is ignored on
//! reading.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    variable_map, BayesianNetwork, Cpt, DiscreteVariable, Factor, Repr, Role, VarId,
};

const FORMAT: &str = "frl-bn/1";

#[derive(Serialize, Deserialize)]
struct VariableEntry {
    id: VarId,
    name: String,
    role: Role,
    states: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct CptEntry {
    child: VarId,
    parents: Vec<VarId>,
    table: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Document {
    format: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    header: Vec<String>,
    variables: Vec<VariableEntry>,
    cpts: Vec<CptEntry>,
}

pub fn write_network(bn: &BayesianNetwork) -> Result<String> {
    write_network_with_header(bn, &[])
}

pub fn write_network_with_header(bn: &BayesianNetwork, header: &[String]) -> Result<String> {
    let doc = Document {
        format: FORMAT.into(),
        header: header.to_vec(),
        variables: bn
            .variables()
            .values()
            .map(|v| VariableEntry {
                id: v.id,
                name: v.name.clone(),
                role: v.role,
                states: v.states.clone(),
            })
            .collect(),
        cpts: bn
            .cpts()
            .map(|c| CptEntry {
                child: c.child(),
                parents: c.parents().to_vec(),
                table: c.factor().values().to_vec(),
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    Ok(text)
}

pub fn read_network(text: &str) -> Result<BayesianNetwork> {
    let doc: Document = serde_json::from_str(text)?;
    if doc.format != FORMAT {
        return Err(Error::NetworkFormat(format!(
            "unsupported format {:?}",
            doc.format
        )));
    }
    let variables = variable_map(
        doc.variables
            .into_iter()
            .map(|v| DiscreteVariable::new(v.id, v.name, v.states, v.role))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let mut cpts = Vec::with_capacity(doc.cpts.len());
    for entry in doc.cpts {
        let mut scope: Vec<VarId> = entry.parents.iter().copied().chain([entry.child]).collect();
        scope.sort();
        let vars = scope
            .iter()
            .map(|&v| {
                Ok((
                    v,
                    variables
                        .get(&v)
                        .ok_or(Error::UnknownVariable(v))?
                        .cardinality(),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let factor = Factor::new(&vars, entry.table, Repr::Linear)?;
        cpts.push(Cpt::new(entry.child, entry.parents, factor)?);
    }
    BayesianNetwork::new(variables, cpts)
}
