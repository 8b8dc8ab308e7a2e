use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use super::gen::EncryptedIndex;
use super::mds::classical_mds;
use super::node::{CbfDictionary, IndexSalt, NodeId};
use super::ward::ward_cluster;
use crate::error::{Error, Result};
use crate::filters::{cosine, CustomizedBloomFilter};
use crate::primitives::VerifyingKey;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DendrogramNode {
    pub id: NodeId,
    /// Arena indices of the two children; `None` for a leaf.
    pub children: Option<(usize, usize)>,
}

/// Full binary tree stored as an arena. Children precede their parent and
/// the root is the last node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dendrogram {
    nodes: Vec<DendrogramNode>,
}

impl Dendrogram {
    pub fn new(nodes: Vec<DendrogramNode>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::CorruptIndex("empty tree"));
        }
        let mut parents = vec![0u8; nodes.len()];
        let mut ids = BTreeSet::new();
        for (i, node) in nodes.iter().enumerate() {
            if !ids.insert(&node.id) {
                return Err(Error::CorruptIndex("duplicate node id"));
            }
            if node.id.is_internal() != node.children.is_some() {
                return Err(Error::CorruptIndex("node kind does not match its id"));
            }
            if let Some((l, r)) = node.children {
                if l >= i || r >= i || l == r {
                    return Err(Error::CorruptIndex("child does not precede its parent"));
                }
                parents[l] += 1;
                parents[r] += 1;
            }
        }
        let root = nodes.len() - 1;
        if parents[root] != 0 || parents[..root].iter().any(|&p| p != 1) {
            return Err(Error::CorruptIndex("arena is not a single tree"));
        }
        Ok(Self { nodes })
    }

    pub fn single(id: NodeId) -> Self {
        Self { nodes: vec![DendrogramNode { id, children: None }] }
    }

    pub fn root(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn node(&self, i: usize) -> &DendrogramNode {
        &self.nodes[i]
    }

    pub fn nodes(&self) -> &[DendrogramNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn leaves(&self) -> impl Iterator<Item = &NodeId> {
        self.nodes.iter().filter(|n| n.children.is_none()).map(|n| &n.id)
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves().count()
    }

    /// Edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        let mut d = vec![0usize; self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            if let Some((l, r)) = n.children {
                d[i] = 1 + d[l].max(d[r]);
            }
        }
        d[self.root()]
    }

    /// Breadth-first order from the root.
    pub fn bfs(&self) -> impl Iterator<Item = usize> + '_ {
        let mut queue = VecDeque::from([self.root()]);
        core::iter::from_fn(move || {
            let i = queue.pop_front()?;
            if let Some((l, r)) = self.nodes[i].children {
                queue.push_back(l);
                queue.push_back(r);
            }
            Some(i)
        })
    }

    /// Checks that `dict` holds exactly the tree's nodes.
    pub fn check_dictionary(&self, dict: &CbfDictionary) -> Result<()> {
        if dict.len() != self.nodes.len() || self.nodes.iter().any(|n| !dict.contains(&n.id)) {
            return Err(Error::CorruptIndex("dictionary does not match tree"));
        }
        Ok(())
    }

    /// True when every internal filter is the OR of its children.
    pub fn is_or_closed(&self, dict: &CbfDictionary) -> Result<bool> {
        self.check_dictionary(dict)?;
        for n in &self.nodes {
            if let Some((l, r)) = n.children {
                let want = dict.get(&self.nodes[l].id).unwrap().or(dict.get(&self.nodes[r].id).unwrap())?;
                if dict.get(&n.id).unwrap() != &want {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Pairwise cosine similarity. Diagonal entries are 1; a pair involving an
/// all-zero filter scores 0.
pub fn similarity_matrix(filters: &[&CustomizedBloomFilter]) -> Result<Vec<Vec<f64>>> {
    let n = filters.len();
    let mut s = vec![vec![0.0; n]; n];
    for i in 0..n {
        s[i][i] = 1.0;
        for j in (i + 1)..n {
            let v = if filters[i].is_empty() || filters[j].is_empty() {
                0.0
            } else {
                cosine(filters[i], filters[j])?.clamp(0.0, 1.0)
            };
            s[i][j] = v;
            s[j][i] = v;
        }
    }
    Ok(s)
}

/// Clusters the given filters into a tree whose internal nodes carry the OR
/// of their children. Leaves keep the caller's order; internal ids count up
/// from zero in merge order.
pub(crate) fn cluster(leaves: Vec<(NodeId, CustomizedBloomFilter)>, mds_dim: usize) -> Result<(Dendrogram, CbfDictionary)> {
    let n = leaves.len();
    if n == 0 {
        return Err(Error::EmptyInput("no filters to cluster"));
    }
    if mds_dim == 0 {
        return Err(Error::InvalidParameter("mds_dim must be positive"));
    }
    let mut dict = CbfDictionary::new();
    if n == 1 {
        let (id, f) = leaves.into_iter().next().unwrap();
        dict.insert(id.clone(), f)?;
        return Ok((Dendrogram::single(id), dict));
    }
    let refs: Vec<&CustomizedBloomFilter> = leaves.iter().map(|(_, f)| f).collect();
    let sim = similarity_matrix(&refs)?;
    let dist: Vec<Vec<f64>> = sim.iter().map(|row| row.iter().map(|s| 1.0 - s).collect()).collect();
    let coords = classical_mds(&dist, mds_dim.min(n - 1))?;
    let merges = ward_cluster(&coords);

    let mut filters: Vec<CustomizedBloomFilter> = Vec::with_capacity(2 * n - 1);
    let mut nodes = Vec::with_capacity(2 * n - 1);
    for (id, f) in leaves {
        nodes.push(DendrogramNode { id, children: None });
        filters.push(f);
    }
    for (t, m) in merges.iter().enumerate() {
        let f = filters[m.left].or(&filters[m.right])?;
        nodes.push(DendrogramNode { id: NodeId::internal(t as u32), children: Some((m.left, m.right)) });
        filters.push(f);
    }
    for (node, f) in nodes.iter().zip(filters) {
        dict.insert(node.id.clone(), f)?;
    }
    Ok((Dendrogram::new(nodes)?, dict))
}

/// Hierarchical clustering of a flat dictionary.
pub fn hc(dict: &CbfDictionary, mds_dim: usize) -> Result<(Dendrogram, CbfDictionary)> {
    cluster(dict.iter().map(|(k, v)| (k.clone(), v.clone())).collect(), mds_dim)
}

/// Tree-structured index held by the CSP for one hospital.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HierarchicalIndex {
    tree: Dendrogram,
    dict: CbfDictionary,
    pub pk: VerifyingKey,
    pub r: IndexSalt,
}

impl HierarchicalIndex {
    pub fn new(tree: Dendrogram, dict: CbfDictionary, pk: VerifyingKey, r: IndexSalt) -> Result<Self> {
        tree.check_dictionary(&dict)?;
        for id in tree.leaves() {
            id.pseudonym()?;
        }
        Ok(Self { tree, dict, pk, r })
    }

    pub fn tree(&self) -> &Dendrogram {
        &self.tree
    }

    pub fn dict(&self) -> &CbfDictionary {
        &self.dict
    }
}

pub fn hierarchical_index_gen(index: &EncryptedIndex, mds_dim: usize) -> Result<HierarchicalIndex> {
    for id in index.dict.keys() {
        id.pseudonym()?;
    }
    let (tree, dict) = hc(&index.dict, mds_dim)?;
    HierarchicalIndex::new(tree, dict, index.pk, index.r.clone())
}
