//! Parameter and structure learning, plus Markov-blanket utilities.

mod blanket;
mod counts;
mod format;
mod search;

pub use blanket::{blanket_subnetwork, markov_blanket};
pub use counts::{bic_family, count, estimate_cpt, CountTable};
pub use format::{read_network, write_network, write_network_with_header};
pub use search::{bic_score, learn_structure, Move, MoveKind, StructureSearchConfig};
