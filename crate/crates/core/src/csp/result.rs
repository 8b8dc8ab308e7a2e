use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::indexing::NodeId;

/// Bounded top-k map from result key to similarity.
///
/// Entries are ordered by score, higher first, then by key, lower first. The
/// dictionary always holds the best `capacity` entries offered so far, so its
/// content does not depend on insertion order.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultDict {
    capacity: usize,
    entries: BTreeMap<NodeId, f64>,
}

fn better(a: (&NodeId, f64), b: (&NodeId, f64)) -> bool {
    match a.1.total_cmp(&b.1) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => a.0 < b.0,
    }
}

impl ResultDict {
    pub fn new(capacity: usize) -> Self {
        Self { capacity, entries: BTreeMap::new() }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Adds the entry if there is room, otherwise replaces the current worst
    /// entry when the new one ranks strictly above it. Returns whether the
    /// dictionary changed.
    pub fn insert(&mut self, key: NodeId, sim: f64) -> bool {
        if let Some(old) = self.entries.get_mut(&key) {
            if sim > *old {
                *old = sim;
                return true;
            }
            return false;
        }
        if self.entries.len() < self.capacity {
            self.entries.insert(key, sim);
            return true;
        }
        let Some((worst_key, worst)) = self.worst() else { return false };
        if !better((&key, sim), (&worst_key, worst)) {
            return false;
        }
        self.entries.remove(&worst_key);
        self.entries.insert(key, sim);
        true
    }

    fn worst(&self) -> Option<(NodeId, f64)> {
        let mut it = self.entries.iter();
        let first = it.next()?;
        let w = it.fold(first, |w, e| if better((w.0, *w.1), (e.0, *e.1)) { e } else { w });
        Some((w.0.clone(), *w.1))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &NodeId) -> Option<f64> {
        self.entries.get(key).copied()
    }

    pub fn keys(&self) -> impl Iterator<Item = &NodeId> {
        self.entries.keys()
    }

    /// Entries best first.
    pub fn ranked(&self) -> Vec<(NodeId, f64)> {
        let mut v: Vec<_> = self.entries.iter().map(|(k, s)| (k.clone(), *s)).collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        v
    }
}
