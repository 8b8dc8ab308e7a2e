use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use super::result::ResultDict;
use crate::client::Query;
use crate::error::{Error, Result};
use crate::filters::{cosine, dot_count, CbfParams, CustomizedBloomFilter};
use crate::indexing::{salt_message, CbfDictionary, Dendrogram, HierarchicalIndex, IndexSalt, MergedIndex, NodeId};
use crate::primitives::{verify, KeyedPrf, Signature, VerifyingKey};

/// How node eligibility is decided during traversal.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SearchMode {
    /// A node qualifies when it shares at least `epsilon_bits` set bits with
    /// the query, less the query tokens lost to collisions in the query
    /// filter. Sound for pruning because the count only grows towards the
    /// root.
    #[default]
    Default,
    /// A node qualifies when its cosine with the query reaches
    /// `epsilon_bits / |e_set|`. Not monotone, so subtrees may be lost.
    StrictPaper,
}

fn query_filter(query: &Query, r: &IndexSalt, params: CbfParams) -> CustomizedBloomFilter {
    let prf = KeyedPrf::new(r);
    let mut c = CustomizedBloomFilter::new(params);
    let tokens: alloc::vec::Vec<[u8; 32]> = query.e_set.iter().map(|z| prf.eval(z)).collect();
    c.add_all(tokens.iter().map(|t| &t[..]));
    c
}

fn cosine_or_zero(a: &CustomizedBloomFilter, b: &CustomizedBloomFilter) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Ok(0.0);
    }
    cosine(a, b)
}

struct Threshold {
    mode: SearchMode,
    bits: u64,
    tokens: u64,
    cosine: f64,
}

impl Threshold {
    fn new(mode: SearchMode, query: &Query) -> Self {
        let tokens = query.e_set.len() as u64;
        let cosine = if tokens == 0 { f64::INFINITY } else { query.epsilon_bits as f64 / tokens as f64 };
        Self { mode, bits: query.epsilon_bits, tokens, cosine }
    }

    /// Bit threshold for a query filter. Tokens that collide inside the
    /// filter can never be matched separately, so each collision lowers the
    /// bar by one; an exact match always reaches it.
    fn bits_for(&self, q: &CustomizedBloomFilter) -> u64 {
        self.bits.saturating_sub(self.tokens - q.count_ones() as u64)
    }

    fn passes(&self, q: &CustomizedBloomFilter, bits: u64, node: &CustomizedBloomFilter) -> Result<bool> {
        Ok(match self.mode {
            SearchMode::Default => dot_count(q, node)? as u64 >= bits,
            SearchMode::StrictPaper => cosine_or_zero(q, node)? >= self.cosine,
        })
    }
}

fn node_filter<'a>(dict: &'a CbfDictionary, id: &NodeId) -> Result<&'a CustomizedBloomFilter> {
    dict.get(id).ok_or(Error::CorruptIndex("tree node missing from dictionary"))
}

/// Breadth-first traversal; `leaf` is called for every leaf reached through
/// eligible ancestors.
fn traverse(
    tree: &Dendrogram,
    dict: &CbfDictionary,
    q: &CustomizedBloomFilter,
    th: &Threshold,
    bits: u64,
    mut leaf: impl FnMut(&NodeId, &CustomizedBloomFilter) -> Result<()>,
) -> Result<()> {
    let mut queue = alloc::collections::VecDeque::from([tree.root()]);
    while let Some(i) = queue.pop_front() {
        let node = tree.node(i);
        let f = node_filter(dict, &node.id)?;
        match node.children {
            Some((l, r)) => {
                if th.passes(q, bits, f)? {
                    queue.push_back(l);
                    queue.push_back(r);
                }
            }
            None => leaf(&node.id, f)?,
        }
    }
    Ok(())
}

fn salt_verifies(query: &Query, pk: &VerifyingKey, r: &IndexSalt) -> bool {
    let msg = salt_message(pk, r);
    query.sigmas.iter().any(|s| verify(pk, s, &msg))
}

/// Salts of `upsilon` that some query signature verifies against.
///
/// A signature binds one (pk, r) pair and the salts are distinct, so a
/// signature is retired once it matches. The scan resumes after the last
/// match, which makes signatures listed in index order cost one check each.
fn authorized_entries(query: &Query, upsilon: &[(VerifyingKey, IndexSalt)]) -> Vec<usize> {
    let mut pending: Vec<&Signature> = Vec::with_capacity(query.sigmas.len());
    for s in &query.sigmas {
        if !pending.contains(&s) {
            pending.push(s);
        }
    }
    let mut out = Vec::new();
    let mut cursor = 0;
    for (i, (pk, r)) in upsilon.iter().enumerate() {
        let n = pending.len();
        if n == 0 {
            break;
        }
        let msg = salt_message(pk, r);
        if let Some(j) = (0..n).map(|step| (cursor + step) % n).find(|&j| verify(pk, pending[j], &msg)) {
            pending.remove(j);
            cursor = j;
            out.push(i);
        }
    }
    out
}

fn params_of(dict: &CbfDictionary) -> Result<CbfParams> {
    dict.params().copied().ok_or(Error::CorruptIndex("empty dictionary"))
}

/// Top-`k_c` leaves of one hospital's index. `None` when no signature in the
/// query verifies against the index's salt.
pub fn search(index: &HierarchicalIndex, query: &Query, mode: SearchMode) -> Result<Option<ResultDict>> {
    if !salt_verifies(query, &index.pk, &index.r) {
        return Ok(None);
    }
    let q = query_filter(query, &index.r, params_of(index.dict())?);
    let th = Threshold::new(mode, query);
    let mut out = ResultDict::new(query.k_c);
    if q.is_empty() {
        return Ok(Some(out));
    }
    let bits = th.bits_for(&q);
    traverse(index.tree(), index.dict(), &q, &th, bits, |id, f| {
        if th.passes(&q, bits, f)? {
            out.insert(id.clone(), cosine_or_zero(&q, f)?);
        }
        Ok(())
    })?;
    Ok(Some(out))
}

/// Inserts a merged-index leaf only if its salt is authorized.
pub fn insert_conditionally(dict: &mut ResultDict, key: &NodeId, authorized: &BTreeSet<IndexSalt>, sim: f64) -> Result<bool> {
    let (_, r) = key.split_composite()?;
    if !authorized.contains(&r) {
        return Ok(false);
    }
    Ok(dict.insert(key.clone(), sim))
}

/// Search over a merged index. Internal nodes are pruned against the union
/// of the per-salt query filters; each leaf is scored with the query filter
/// of its own salt, which makes the result coincide with per-hospital search.
pub fn search_merged(merged: &MergedIndex, query: &Query, mode: SearchMode) -> Result<Option<ResultDict>> {
    let params = params_of(merged.dict())?;
    let mut per_salt: BTreeMap<IndexSalt, CustomizedBloomFilter> = BTreeMap::new();
    for i in authorized_entries(query, &merged.upsilon) {
        let r = &merged.upsilon[i].1;
        per_salt.insert(r.clone(), query_filter(query, r, params));
    }
    if per_salt.is_empty() {
        return Ok(None);
    }
    let mut union = CustomizedBloomFilter::new(params);
    for f in per_salt.values() {
        union = union.or(f)?;
    }
    let authorized: BTreeSet<IndexSalt> = per_salt.keys().cloned().collect();
    let th = Threshold::new(mode, query);
    let mut out = ResultDict::new(query.k_c);
    if union.is_empty() {
        return Ok(Some(out));
    }
    // Loosest per-salt bar, so no authorized leaf is pruned.
    let prune_bits = per_salt.values().map(|q| th.bits_for(q)).min().unwrap_or(0);
    traverse(merged.tree(), merged.dict(), &union, &th, prune_bits, |id, f| {
        let (_, r) = id.split_composite()?;
        let Some(q) = per_salt.get(&r) else { return Ok(()) };
        if th.passes(q, th.bits_for(q), f)? {
            insert_conditionally(&mut out, id, &authorized, cosine_or_zero(q, f)?)?;
        }
        Ok(())
    })?;
    Ok(Some(out))
}
