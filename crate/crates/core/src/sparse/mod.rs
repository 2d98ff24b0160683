//! Sparse families, sparse operators, the domination recursion and stopping cubes.

mod domination;
mod family;
mod stopping;

pub use domination::{dominate_cube, sparse_domination, DominationConfig, DominationResult, NodeRecord, Selection};
pub(crate) use family::scatter;
pub use family::{general_sparse_apply, sparse_apply, verify_sparseness, SparseFamily};
pub use stopping::{stopping_family, StoppingFamily};
