use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::node::{CbfDictionary, IndexSalt, NodeId};
use super::tree::{cluster, Dendrogram, DendrogramNode, HierarchicalIndex};
use crate::error::{Error, Result};
use crate::filters::CustomizedBloomFilter;
use crate::primitives::VerifyingKey;

/// Single tree over the patients of several hospitals. Leaves are keyed by
/// pseudonym and owning salt.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergedIndex {
    pub upsilon: Vec<(VerifyingKey, IndexSalt)>,
    tree: Dendrogram,
    dict: CbfDictionary,
}

impl MergedIndex {
    pub fn new(upsilon: Vec<(VerifyingKey, IndexSalt)>, tree: Dendrogram, dict: CbfDictionary) -> Result<Self> {
        tree.check_dictionary(&dict)?;
        let salts: BTreeSet<&IndexSalt> = upsilon.iter().map(|(_, r)| r).collect();
        if salts.len() != upsilon.len() {
            return Err(Error::CorruptIndex("duplicate salt in merged index"));
        }
        for id in tree.leaves() {
            let (_, r) = id.split_composite()?;
            if !salts.contains(&r) {
                return Err(Error::CorruptIndex("leaf salt not listed in merged index"));
            }
        }
        Ok(Self { upsilon, tree, dict })
    }

    pub fn tree(&self) -> &Dendrogram {
        &self.tree
    }

    pub fn dict(&self) -> &CbfDictionary {
        &self.dict
    }
}

fn upsilon_of(indices: &[HierarchicalIndex]) -> Result<Vec<(VerifyingKey, IndexSalt)>> {
    if indices.is_empty() {
        return Err(Error::EmptyInput("no indices to merge"));
    }
    let ups: Vec<_> = indices.iter().map(|ix| (ix.pk, ix.r.clone())).collect();
    if ups.iter().map(|(_, r)| r).collect::<BTreeSet<_>>().len() != ups.len() {
        return Err(Error::InvalidParameter("indices share a salt"));
    }
    Ok(ups)
}

/// Re-clusters every leaf of every index from scratch.
pub fn index_merge_full(indices: &[HierarchicalIndex], mds_dim: usize) -> Result<MergedIndex> {
    let upsilon = upsilon_of(indices)?;
    let mut leaves = Vec::new();
    for ix in indices {
        for id in ix.tree().leaves() {
            let f = ix.dict().get(id).ok_or(Error::CorruptIndex("leaf without filter"))?;
            leaves.push((NodeId::composite(&id.pseudonym()?, &ix.r), f.clone()));
        }
    }
    leaves.sort_by(|a, b| a.0.cmp(&b.0));
    let (tree, dict) = cluster(leaves, mds_dim)?;
    MergedIndex::new(upsilon, tree, dict)
}

/// Placeholder leaf id for the `i`-th input root; sorts in input order.
fn slot_id(i: usize) -> NodeId {
    let mut b = [0u8; 16];
    b[..4].copy_from_slice(&(i as u32).to_be_bytes());
    NodeId::leaf(&crate::hospital::Pseudonym(b))
}

/// Clusters only the roots and grafts each input tree beneath its root.
/// (id once assigned, children, filter).
type ArenaNode = (Option<NodeId>, Option<(usize, usize)>, CustomizedBloomFilter);

pub fn index_merge_fast(indices: &[HierarchicalIndex], mds_dim: usize) -> Result<MergedIndex> {
    let upsilon = upsilon_of(indices)?;
    let roots = indices
        .iter()
        .enumerate()
        .map(|(i, ix)| {
            let root = &ix.tree().node(ix.tree().root()).id;
            let f = ix.dict().get(root).ok_or(Error::CorruptIndex("root without filter"))?;
            Ok((slot_id(i), f.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    let (top, top_dict) = cluster(roots, mds_dim)?;

    // Arena copy; internal ids are assigned afterwards.
    let mut nodes: Vec<ArenaNode> = Vec::new();
    let mut placed = Vec::with_capacity(top.len());
    for tn in top.nodes() {
        match tn.children {
            None => {
                let which = u32::from_be_bytes(tn.id.as_bytes()[..4].try_into().unwrap()) as usize;
                let ix = &indices[which];
                let base = nodes.len();
                for n in ix.tree().nodes() {
                    let f = ix.dict().get(&n.id).ok_or(Error::CorruptIndex("node without filter"))?.clone();
                    match n.children {
                        None => nodes.push((Some(NodeId::composite(&n.id.pseudonym()?, &ix.r)), None, f)),
                        Some((l, r)) => nodes.push((None, Some((base + l, base + r)), f)),
                    }
                }
                placed.push(nodes.len() - 1);
            }
            Some((l, r)) => {
                let f = top_dict.get(&tn.id).expect("cluster fills every node").clone();
                nodes.push((None, Some((placed[l], placed[r])), f));
                placed.push(nodes.len() - 1);
            }
        }
    }

    let mut arena = Vec::with_capacity(nodes.len());
    let mut dict = CbfDictionary::new();
    let mut counter = 0u32;
    for (id, children, f) in nodes {
        let id = id.unwrap_or_else(|| {
            counter += 1;
            NodeId::internal(counter - 1)
        });
        dict.insert(id.clone(), f)?;
        arena.push(DendrogramNode { id, children });
    }
    MergedIndex::new(upsilon, Dendrogram::new(arena)?, dict)
}

/// Merge once the number of collected indices reaches the threshold.
pub fn merge_heuristic(count: usize, threshold: usize) -> bool {
    count >= threshold
}
