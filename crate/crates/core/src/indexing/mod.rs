//! Encrypted patient indices: flat generation, hierarchical clustering and
//! cross-hospital merging.

mod gen;
mod mds;
mod merge;
mod node;
mod tree;
mod ward;

pub use gen::{index_gen, index_gen_with_salt, position_token, salt_message, EncryptedIndex};
pub use mds::classical_mds;
pub use merge::{index_merge_fast, index_merge_full, merge_heuristic, MergedIndex};
pub use node::{CbfDictionary, IndexSalt, NodeId};
pub use tree::{hc, hierarchical_index_gen, similarity_matrix, Dendrogram, DendrogramNode, HierarchicalIndex};
pub use ward::{ward_cluster, Merge};
