//! Binary file formats for filters and indices.
//!
//! Every file starts with a 4-byte magic and a version byte. Integers are
//! little-endian; variable fields carry a 4-byte length prefix.

use std::collections::BTreeMap;

use privsnp_core::filters::{BitArray, BloomParams, CbfParams, CustomizedBloomFilter, StandardBloomFilter};
use privsnp_core::hospital::Pseudonym;
use privsnp_core::indexing::{
    CbfDictionary, Dendrogram, DendrogramNode, EncryptedIndex, HierarchicalIndex, MergedIndex, NodeId,
};
use privsnp_core::primitives::{PrfKey, Signature, VerifyingKey};
use privsnp_core::{Error, Reader, Result, Writer};

pub const FILTER_MAGIC: &[u8; 4] = b"PSBF";
pub const BUNDLE_MAGIC: &[u8; 4] = b"PSBB";
pub const INDEX_MAGIC: &[u8; 4] = b"PSIX";
const VERSION: u8 = 1;

const ENC_RAW: u8 = 0;
const ENC_SPARSE: u8 = 1;

const KIND_STANDARD: u8 = b'S';
const KIND_CUSTOM: u8 = b'C';
const KIND_FLAT: u8 = b'F';
const KIND_HIER: u8 = b'H';
const KIND_MERGED: u8 = b'M';

/// Bit payload: raw LSB-first bytes, or sorted u32 positions when that is
/// smaller.
fn put_bits(w: &mut Writer, bits: &BitArray) {
    let ones = bits.count_ones();
    let raw_len = (bits.len() as usize).div_ceil(8);
    if ones * 4 < raw_len {
        w.u8(ENC_SPARSE).u32(ones as u32);
        for p in bits.ones() {
            w.u32(p);
        }
    } else {
        w.u8(ENC_RAW).bytes(&bits.to_raw_bytes());
    }
}

fn get_bits(r: &mut Reader<'_>, len: u32) -> Result<BitArray> {
    match r.u8()? {
        ENC_RAW => BitArray::from_raw_bytes(len, r.bytes()?),
        ENC_SPARSE => {
            let n = r.u32()? as usize;
            if n > len as usize {
                return Err(Error::Decode("more set bits than filter length"));
            }
            let mut pos = Vec::with_capacity(n.min(r.remaining() / 4));
            for _ in 0..n {
                pos.push(r.u32()?);
            }
            if pos.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Decode("positions not strictly increasing"));
            }
            BitArray::from_sorted_positions(len, &pos)
        }
        _ => Err(Error::Decode("unknown bit encoding")),
    }
}

fn header(w: &mut Writer, magic: &[u8; 4], kind: u8) {
    w.raw(magic).u8(VERSION).u8(kind);
}

fn check_header(r: &mut Reader<'_>, magic: &[u8; 4]) -> Result<u8> {
    if r.raw(4)? != magic {
        return Err(Error::Decode("bad magic"));
    }
    if r.u8()? != VERSION {
        return Err(Error::Decode("unsupported version"));
    }
    r.u8()
}

fn put_bloom_params(w: &mut Writer, p: &BloomParams) {
    w.u64(p.capacity).u64(p.fp_target.to_bits()).u32(p.bits).u32(p.hashes);
}

fn get_bloom_params(r: &mut Reader<'_>) -> Result<BloomParams> {
    let capacity = r.u64()?;
    let fp = f64::from_bits(r.u64()?);
    BloomParams::from_parts(capacity, fp, r.u32()?, r.u32()?)
}

fn put_cbf_params(w: &mut Writer, p: &CbfParams) {
    w.u32(p.length_bits).u64(p.seed);
}

fn get_cbf_params(r: &mut Reader<'_>) -> Result<CbfParams> {
    let len = r.u32()?;
    CbfParams::new(len, r.u64()?)
}

pub fn encode_bloom(f: &StandardBloomFilter) -> Vec<u8> {
    let mut w = Writer::new();
    header(&mut w, FILTER_MAGIC, KIND_STANDARD);
    put_bloom_params(&mut w, f.params());
    put_bits(&mut w, f.bits());
    w.finish()
}

pub fn decode_bloom(bytes: &[u8]) -> Result<StandardBloomFilter> {
    let mut r = Reader::new(bytes);
    if check_header(&mut r, FILTER_MAGIC)? != KIND_STANDARD {
        return Err(Error::Decode("not a standard Bloom filter"));
    }
    let params = get_bloom_params(&mut r)?;
    let bits = get_bits(&mut r, params.bits)?;
    r.finish()?;
    StandardBloomFilter::from_bits(params, bits)
}

pub fn encode_cbf(f: &CustomizedBloomFilter) -> Vec<u8> {
    let mut w = Writer::new();
    header(&mut w, FILTER_MAGIC, KIND_CUSTOM);
    put_cbf_params(&mut w, f.params());
    put_bits(&mut w, f.bits());
    w.finish()
}

pub fn decode_cbf(bytes: &[u8]) -> Result<CustomizedBloomFilter> {
    let mut r = Reader::new(bytes);
    if check_header(&mut r, FILTER_MAGIC)? != KIND_CUSTOM {
        return Err(Error::Decode("not a customized Bloom filter"));
    }
    let params = get_cbf_params(&mut r)?;
    let bits = get_bits(&mut r, params.length_bits)?;
    r.finish()?;
    CustomizedBloomFilter::from_bits(params, bits)
}

/// Per-patient standard filters of one hospital.
pub fn encode_bloom_bundle(filters: &BTreeMap<Pseudonym, StandardBloomFilter>) -> Vec<u8> {
    let mut w = Writer::new();
    header(&mut w, BUNDLE_MAGIC, KIND_STANDARD);
    w.u32(filters.len() as u32);
    for (p, f) in filters {
        w.raw(&p.0).bytes(&encode_bloom(f));
    }
    w.finish()
}

pub fn decode_bloom_bundle(bytes: &[u8]) -> Result<BTreeMap<Pseudonym, StandardBloomFilter>> {
    let mut r = Reader::new(bytes);
    if check_header(&mut r, BUNDLE_MAGIC)? != KIND_STANDARD {
        return Err(Error::Decode("not a filter bundle"));
    }
    let n = r.u32()?;
    let mut out = BTreeMap::new();
    for _ in 0..n {
        let p = Pseudonym(r.array()?);
        if out.insert(p, decode_bloom(r.bytes()?)?).is_some() {
            return Err(Error::DuplicatePseudonym(p.to_string()));
        }
    }
    r.finish()?;
    Ok(out)
}

fn put_dict(w: &mut Writer, d: &CbfDictionary) -> Result<()> {
    let params = d.params().ok_or(Error::EmptyInput("dictionary"))?;
    put_cbf_params(w, params);
    w.u32(d.len() as u32);
    for (id, f) in d {
        w.bytes(id.as_bytes());
        put_bits(w, f.bits());
    }
    Ok(())
}

fn get_dict(r: &mut Reader<'_>) -> Result<CbfDictionary> {
    let params = get_cbf_params(r)?;
    let n = r.u32()?;
    let mut d = CbfDictionary::new();
    for _ in 0..n {
        let id = NodeId::from_bytes(r.bytes()?)?;
        if d.contains(&id) {
            return Err(Error::Decode("duplicate dictionary key"));
        }
        let bits = get_bits(r, params.length_bits)?;
        d.insert(id, CustomizedBloomFilter::from_bits(params, bits)?)?;
    }
    Ok(d)
}

fn put_tree(w: &mut Writer, t: &Dendrogram) {
    w.u32(t.len() as u32);
    for n in t.nodes() {
        w.bytes(n.id.as_bytes());
        match n.children {
            None => w.u8(0),
            Some((a, b)) => w.u8(1).u32(a as u32).u32(b as u32),
        };
    }
}

fn get_tree(r: &mut Reader<'_>) -> Result<Dendrogram> {
    let n = r.u32()? as usize;
    let mut nodes = Vec::with_capacity(n.min(1 << 20));
    for _ in 0..n {
        let id = NodeId::from_bytes(r.bytes()?)?;
        let children = match r.u8()? {
            0 => None,
            1 => Some((r.u32()? as usize, r.u32()? as usize)),
            _ => return Err(Error::Decode("bad node tag")),
        };
        nodes.push(DendrogramNode { id, children });
    }
    Dendrogram::new(nodes)
}

fn salt(r: &mut Reader<'_>) -> Result<PrfKey> {
    Ok(PrfKey::from_bytes(r.array()?))
}

pub fn encode_flat_index(ix: &EncryptedIndex) -> Result<Vec<u8>> {
    let mut w = Writer::new();
    header(&mut w, INDEX_MAGIC, KIND_FLAT);
    w.raw(&ix.pk.to_bytes()).raw(ix.r.as_bytes()).raw(&ix.sigma.to_bytes());
    put_dict(&mut w, &ix.dict)?;
    Ok(w.finish())
}

pub fn encode_hier_index(ix: &HierarchicalIndex) -> Result<Vec<u8>> {
    let mut w = Writer::new();
    header(&mut w, INDEX_MAGIC, KIND_HIER);
    w.raw(&ix.pk.to_bytes()).raw(ix.r.as_bytes());
    put_tree(&mut w, ix.tree());
    put_dict(&mut w, ix.dict())?;
    Ok(w.finish())
}

pub fn encode_merged_index(ix: &MergedIndex) -> Result<Vec<u8>> {
    let mut w = Writer::new();
    header(&mut w, INDEX_MAGIC, KIND_MERGED);
    w.u32(ix.upsilon.len() as u32);
    for (pk, r) in &ix.upsilon {
        w.raw(&pk.to_bytes()).raw(r.as_bytes());
    }
    put_tree(&mut w, ix.tree());
    put_dict(&mut w, ix.dict())?;
    Ok(w.finish())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IndexFile {
    Flat(EncryptedIndex),
    Hierarchical(HierarchicalIndex),
    Merged(MergedIndex),
}

pub fn decode_index(bytes: &[u8]) -> Result<IndexFile> {
    let mut r = Reader::new(bytes);
    let out = match check_header(&mut r, INDEX_MAGIC)? {
        KIND_FLAT => {
            let pk = VerifyingKey::from_bytes(r.raw(32)?)?;
            let s = salt(&mut r)?;
            let sigma = Signature::from_bytes(r.raw(64)?)?;
            let dict = get_dict(&mut r)?;
            if dict.keys().any(|k| k.pseudonym().is_err()) {
                return Err(Error::CorruptIndex("flat index holds a non-leaf key"));
            }
            IndexFile::Flat(EncryptedIndex { dict, pk, r: s, sigma })
        }
        KIND_HIER => {
            let pk = VerifyingKey::from_bytes(r.raw(32)?)?;
            let s = salt(&mut r)?;
            let tree = get_tree(&mut r)?;
            IndexFile::Hierarchical(HierarchicalIndex::new(tree, get_dict(&mut r)?, pk, s)?)
        }
        KIND_MERGED => {
            let n = r.u32()?;
            let mut ups = Vec::new();
            for _ in 0..n {
                let pk = VerifyingKey::from_bytes(r.raw(32)?)?;
                ups.push((pk, salt(&mut r)?));
            }
            let tree = get_tree(&mut r)?;
            IndexFile::Merged(MergedIndex::new(ups, tree, get_dict(&mut r)?)?)
        }
        _ => return Err(Error::Decode("unknown index kind")),
    };
    r.finish()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use privsnp_core::indexing::{hierarchical_index_gen, index_gen, index_merge_fast};
    use privsnp_core::primitives::SignatureKeyPair;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn sample_index(rng: &mut ChaCha20Rng, n: usize) -> EncryptedIndex {
        let bp = BloomParams::new(500, 0.01).unwrap();
        let mut filters = BTreeMap::new();
        for i in 0..n {
            let mut f = StandardBloomFilter::new(bp);
            for j in 0..20u32 {
                f.add(&(j * (i as u32 + 1)).to_le_bytes());
            }
            filters.insert(Pseudonym::random(rng), f);
        }
        let keys = SignatureKeyPair::generate(rng);
        index_gen(&PrfKey::random(rng), &filters, &keys, CbfParams::new(1 << 12, 3).unwrap(), rng).unwrap()
    }

    #[test]
    fn filters_round_trip_in_both_encodings() {
        let bp = BloomParams::new(100, 0.01).unwrap();
        let mut sparse = StandardBloomFilter::new(bp);
        sparse.add(b"x");
        let enc = encode_bloom(&sparse);
        assert_eq!(enc[6 + 24], ENC_SPARSE);
        assert_eq!(decode_bloom(&enc).unwrap(), sparse);
        let mut dense = StandardBloomFilter::new(bp);
        for i in 0..200u32 {
            dense.add(&i.to_le_bytes());
        }
        let enc = encode_bloom(&dense);
        assert_eq!(enc[6 + 24], ENC_RAW);
        assert_eq!(decode_bloom(&enc).unwrap(), dense);
    }

    #[test]
    fn corrupt_headers_are_rejected() {
        let f = CustomizedBloomFilter::new(CbfParams::new(64, 0).unwrap());
        let mut enc = encode_cbf(&f);
        assert_eq!(decode_cbf(&enc).unwrap(), f);
        assert!(decode_bloom(&enc).is_err());
        enc[0] = b'X';
        assert!(decode_cbf(&enc).is_err());
        let mut trailing = encode_cbf(&f);
        trailing.push(0);
        assert!(decode_cbf(&trailing).is_err());
    }

    #[test]
    fn indices_round_trip() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let flat = sample_index(&mut rng, 6);
        assert_eq!(decode_index(&encode_flat_index(&flat).unwrap()).unwrap(), IndexFile::Flat(flat.clone()));
        let hier = hierarchical_index_gen(&flat, 4).unwrap();
        assert_eq!(decode_index(&encode_hier_index(&hier).unwrap()).unwrap(), IndexFile::Hierarchical(hier.clone()));
        let other = hierarchical_index_gen(&sample_index(&mut rng, 3), 4).unwrap();
        let merged = index_merge_fast(&[hier, other], 4).unwrap();
        assert_eq!(decode_index(&encode_merged_index(&merged).unwrap()).unwrap(), IndexFile::Merged(merged));
    }

    #[test]
    fn bundle_round_trip() {
        let bp = BloomParams::new(100, 0.01).unwrap();
        let mut m = BTreeMap::new();
        for i in 0..3u8 {
            let mut f = StandardBloomFilter::new(bp);
            f.add(&[i]);
            m.insert(Pseudonym([i; 16]), f);
        }
        assert_eq!(decode_bloom_bundle(&encode_bloom_bundle(&m)).unwrap(), m);
    }

    proptest! {
        #[test]
        fn arbitrary_bytes_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..256)) {
            let _ = decode_index(&bytes);
            let _ = decode_cbf(&bytes);
            let _ = decode_bloom_bundle(&bytes);
        }

        #[test]
        fn cbf_round_trip(len in 1u32..2000, pos in prop::collection::btree_set(0u32..2000, 0..100)) {
            let p = CbfParams::new(len, 9).unwrap();
            let pos: Vec<u32> = pos.into_iter().filter(|&x| x < len).collect();
            let f = CustomizedBloomFilter::from_bits(p, BitArray::from_sorted_positions(len, &pos).unwrap()).unwrap();
            prop_assert_eq!(decode_cbf(&encode_cbf(&f)).unwrap(), f);
        }
    }
}
