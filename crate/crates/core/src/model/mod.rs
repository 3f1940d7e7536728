//! Variables, assignments, factors and the two graphical models built on them.

mod assignment;
mod factor;
mod network;
mod variable;

pub use assignment::{joint_states, Assignment};
pub use factor::{Factor, Reduction, Repr};
pub use network::{BayesianNetwork, Cpt, MarkovRandomField, TOLERANCE};
pub use variable::{variable_map, DiscreteVariable, Role, VarId, VariableMap};
