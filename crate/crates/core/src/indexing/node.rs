use alloc::collections::btree_map::{self, BTreeMap};
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::filters::{CbfParams, CustomizedBloomFilter};
use crate::hospital::Pseudonym;
use crate::primitives::PrfKey;

/// Per-index randomization key `r`. Also tags merged leaves with their origin.
pub type IndexSalt = PrfKey;

const INTERNAL_PREFIX: &[u8] = b"h:";
const COMPOSITE_LEN: usize = Pseudonym::LEN + 32;

/// Dictionary key of a tree node.
///
/// Leaves are a bare pseudonym (16 bytes) or, in merged indices, the
/// pseudonym followed by the owning index salt (48 bytes). Internal nodes are
/// `h:` followed by a big-endian counter.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(Vec<u8>);

impl NodeId {
    pub fn leaf(p: &Pseudonym) -> Self {
        Self(p.0.to_vec())
    }

    pub fn composite(p: &Pseudonym, salt: &IndexSalt) -> Self {
        let mut v = Vec::with_capacity(COMPOSITE_LEN);
        v.extend_from_slice(&p.0);
        v.extend_from_slice(salt.as_bytes());
        Self(v)
    }

    pub fn internal(n: u32) -> Self {
        let mut v = INTERNAL_PREFIX.to_vec();
        v.extend_from_slice(&n.to_be_bytes());
        Self(v)
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self> {
        let ok = b.len() == Pseudonym::LEN
            || b.len() == COMPOSITE_LEN
            || (b.len() == INTERNAL_PREFIX.len() + 4 && b.starts_with(INTERNAL_PREFIX));
        if !ok {
            return Err(Error::Decode("malformed node id"));
        }
        Ok(Self(b.to_vec()))
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn is_internal(&self) -> bool {
        self.0.len() == INTERNAL_PREFIX.len() + 4 && self.0.starts_with(INTERNAL_PREFIX)
    }

    /// Pseudonym of a plain leaf.
    pub fn pseudonym(&self) -> Result<Pseudonym> {
        if self.0.len() != Pseudonym::LEN {
            return Err(Error::CorruptIndex("expected a plain leaf id"));
        }
        Pseudonym::from_slice(&self.0)
    }

    /// Splits a merged leaf id into pseudonym and salt.
    pub fn split_composite(&self) -> Result<(Pseudonym, IndexSalt)> {
        if self.0.len() != COMPOSITE_LEN {
            return Err(Error::CorruptIndex("expected a merged leaf id"));
        }
        let p = Pseudonym::from_slice(&self.0[..Pseudonym::LEN])?;
        let r: [u8; 32] = self.0[Pseudonym::LEN..].try_into().expect("length checked");
        Ok((p, PrfKey::from_bytes(r)))
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_internal() {
            let n = u32::from_be_bytes(self.0[2..].try_into().unwrap());
            return write!(f, "h:{n}");
        }
        for b in &self.0[..Pseudonym::LEN.min(self.0.len())] {
            write!(f, "{b:02x}")?;
        }
        if self.0.len() > Pseudonym::LEN {
            f.write_str("@")?;
            for b in &self.0[Pseudonym::LEN..Pseudonym::LEN + 4] {
                write!(f, "{b:02x}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NodeId({self})")
    }
}

/// Node id to CBF map. Every filter shares one parameter set.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CbfDictionary {
    params: Option<CbfParams>,
    entries: BTreeMap<NodeId, CustomizedBloomFilter>,
}

impl CbfDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Replaces any previous entry under `id`.
    pub fn insert(&mut self, id: NodeId, cbf: CustomizedBloomFilter) -> Result<()> {
        match self.params {
            Some(p) if p.length_bits != cbf.len_bits() => {
                return Err(Error::LengthMismatch { left: p.length_bits.into(), right: cbf.len_bits().into() })
            }
            Some(p) if p != *cbf.params() => return Err(Error::InvalidParameter("CBF seed differs within dictionary")),
            _ => self.params = Some(*cbf.params()),
        }
        self.entries.insert(id, cbf);
        Ok(())
    }

    pub fn get(&self, id: &NodeId) -> Option<&CustomizedBloomFilter> {
        self.entries.get(id)
    }

    pub fn contains(&self, id: &NodeId) -> bool {
        self.entries.contains_key(id)
    }

    pub fn params(&self) -> Option<&CbfParams> {
        self.params.as_ref()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> btree_map::Iter<'_, NodeId, CustomizedBloomFilter> {
        self.entries.iter()
    }

    pub fn keys(&self) -> btree_map::Keys<'_, NodeId, CustomizedBloomFilter> {
        self.entries.keys()
    }
}

impl<'a> IntoIterator for &'a CbfDictionary {
    type Item = (&'a NodeId, &'a CustomizedBloomFilter);
    type IntoIter = btree_map::Iter<'a, NodeId, CustomizedBloomFilter>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn id_kinds_are_distinguished() {
        let p = Pseudonym([7; 16]);
        let r = PrfKey::from_bytes([9; 32]);
        let leaf = NodeId::leaf(&p);
        let comp = NodeId::composite(&p, &r);
        let h = NodeId::internal(3);
        assert!(!leaf.is_internal() && !comp.is_internal() && h.is_internal());
        assert_eq!(leaf.pseudonym().unwrap(), p);
        assert_eq!(comp.split_composite().unwrap(), (p, r));
        assert!(leaf.split_composite().is_err());
        assert!(h.pseudonym().is_err());
        assert_eq!(h.to_string(), "h:3");
        assert_eq!(NodeId::from_bytes(comp.as_bytes()).unwrap(), comp);
        assert!(NodeId::from_bytes(b"abc").is_err());
    }

    #[test]
    fn dictionary_rejects_mixed_shapes() {
        let a = CbfParams::new(64, 0).unwrap();
        let b = CbfParams::new(65, 0).unwrap();
        let c = CbfParams::new(64, 1).unwrap();
        let mut d = CbfDictionary::new();
        d.insert(NodeId::internal(0), CustomizedBloomFilter::new(a)).unwrap();
        assert!(matches!(d.insert(NodeId::internal(1), CustomizedBloomFilter::new(b)), Err(Error::LengthMismatch { .. })));
        assert!(d.insert(NodeId::internal(1), CustomizedBloomFilter::new(c)).is_err());
        assert_eq!(d.len(), 1);
    }
}
