use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use rand_core::{CryptoRng, RngCore};

use super::records::{decode_snp_list, encode_snp_list, AsiGroup, PatientRecord, Pseudonym, SnpPair};
use crate::abe::{abe_encrypt, AbeCiphertext, AbeKeys, AndPolicy, Attribute};
use crate::encoding::{Reader, Writer};
use crate::error::{Error, Result};
use crate::filters::{BloomParams, StandardBloomFilter};
use crate::primitives::{g2_generator, h1, h2, kdf, pair, sym_decrypt, sym_encrypt, GtElement, Scalar, SymKey};

/// One encrypted ASI as stored at the CSP.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AsiCiphertext {
    pub c3: AbeCiphertext,
    pub c2: Vec<u8>,
    pub tau: [u8; 32],
}

impl AsiCiphertext {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.bytes(&self.c3.to_bytes()).bytes(&self.c2).raw(&self.tau);
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let c3 = AbeCiphertext::from_bytes(r.bytes()?)?;
        let c2 = r.bytes()?.to_vec();
        let tau = r.array()?;
        r.finish()?;
        Ok(Self { c3, c2, tau })
    }
}

pub type BloomDictionary = BTreeMap<Pseudonym, StandardBloomFilter>;
pub type AsiDictionary = BTreeMap<Pseudonym, Vec<AsiGroup>>;

/// Builds one Bloom filter per patient and collects the ASI groups.
pub fn preprocess(records: &[PatientRecord], bf: BloomParams) -> Result<(BloomDictionary, AsiDictionary)> {
    let mut filters = BTreeMap::new();
    let mut asi = BTreeMap::new();
    for rec in records {
        rec.validate()?;
        if filters.contains_key(&rec.pseudonym) {
            return Err(Error::DuplicatePseudonym(alloc::format!("{}", rec.pseudonym)));
        }
        let mut f = StandardBloomFilter::new(bf);
        for s in &rec.snps {
            f.add(&s.encode());
        }
        filters.insert(rec.pseudonym, f);
        asi.insert(rec.pseudonym, rec.asi_groups.clone());
    }
    Ok((filters, asi))
}

pub fn snp_encrypt<R: RngCore + CryptoRng>(k_alpha: &SymKey, records: &[PatientRecord], rng: &mut R) -> Vec<Vec<u8>> {
    records.iter().map(|r| sym_encrypt(k_alpha, &encode_snp_list(&r.snps), rng)).collect()
}

pub fn snp_decrypt(k_alpha: &SymKey, ciphertext: &[u8]) -> Result<Vec<SnpPair>> {
    decode_snp_list(&sym_decrypt(k_alpha, ciphertext)?)
}

/// `e(h1(v), g2)^(1/k_i)`, the value an adjusted client token takes for `v`.
pub fn adjusted_point(k_i: &Scalar, snp: &SnpPair) -> Result<GtElement> {
    Ok(pair(&h1(&snp.encode()).mul(&k_i.inverse()?), &g2_generator()))
}

/// ABE attribute of one SNP under one ASI nonce.
pub fn asi_attribute(tau: &[u8; 32], adjusted: &GtElement) -> Attribute {
    h2(tau, adjusted)
}

pub fn asi_encrypt<R: RngCore + CryptoRng>(
    k_i: &Scalar,
    k_beta: &SymKey,
    abe: &AbeKeys,
    dict: &AsiDictionary,
    rng: &mut R,
) -> Result<BTreeMap<Pseudonym, Vec<AsiCiphertext>>> {
    // The pairing term depends only on the SNP, so it is shared across ASIs.
    let mut adjusted: BTreeMap<&SnpPair, GtElement> = BTreeMap::new();
    for groups in dict.values() {
        for g in groups {
            if g.snps.is_empty() {
                return Err(Error::EmptyInput("ASI SNP set"));
            }
            for s in &g.snps {
                if !adjusted.contains_key(s) {
                    adjusted.insert(s, adjusted_point(k_i, s)?);
                }
            }
        }
    }
    let mut out = BTreeMap::new();
    for (p, groups) in dict {
        let mut cts = Vec::with_capacity(groups.len());
        for g in groups {
            let mut tau = [0u8; 32];
            rng.fill_bytes(&mut tau);
            let theta: BTreeSet<Attribute> = g.snps.iter().map(|s| asi_attribute(&tau, &adjusted[s])).collect();
            let c1 = sym_encrypt(k_beta, &g.text, rng);
            let k_gamma = GtElement::random(rng);
            let c2 = sym_encrypt(&SymKey::from_bytes(kdf(&k_gamma)), &c1, rng);
            let c3 = abe_encrypt(&abe.pk, &k_gamma, &AndPolicy::new(theta)?, rng)?;
            cts.push(AsiCiphertext { c3, c2, tau });
        }
        out.insert(*p, cts);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abe::{abe_decrypt, abe_keygen};
    use crate::hospital::hospital_setup;
    use crate::primitives::GroupParams;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn snp(s: &str) -> SnpPair {
        s.parse().unwrap()
    }

    fn record(id: u8, snps: &[&str], asi: &[(&str, &[&str])]) -> PatientRecord {
        PatientRecord {
            pseudonym: Pseudonym([id; 16]),
            snps: snps.iter().map(|s| snp(s)).collect(),
            asi_groups: asi
                .iter()
                .map(|(t, ss)| AsiGroup { text: t.as_bytes().to_vec(), snps: ss.iter().map(|s| snp(s)).collect() })
                .collect(),
        }
    }

    #[test]
    fn preprocess_binds_values_and_rejects_duplicates() {
        let bp = BloomParams::new(1000, 0.001).unwrap();
        let recs = [record(1, &["rs1:0", "rs1:2"], &[]), record(2, &[], &[])];
        let (bfs, asi) = preprocess(&recs, bp).unwrap();
        let f = &bfs[&Pseudonym([1; 16])];
        assert!(f.contains(&snp("rs1:0").encode()) && f.contains(&snp("rs1:2").encode()));
        assert!(!f.contains(&snp("rs1:1").encode()));
        assert_eq!(bfs[&Pseudonym([2; 16])].count_ones(), 0);
        assert_eq!(asi.len(), 2);
        let dup = [record(1, &[], &[]), record(1, &[], &[])];
        assert!(matches!(preprocess(&dup, bp), Err(Error::DuplicatePseudonym(_))));
    }

    #[test]
    fn snp_ciphertexts_round_trip_under_k_alpha_only() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let keys = hospital_setup(&GroupParams::default(), &mut rng);
        let recs = [record(1, &["rs1:0", "rs9:1"], &[]), record(2, &["rs1:0", "rs9:1"], &[])];
        let cts = snp_encrypt(&keys.k_alpha, &recs, &mut rng);
        assert_eq!(snp_decrypt(&keys.k_alpha, &cts[0]).unwrap(), recs[0].snps);
        assert!(snp_decrypt(&keys.k_beta, &cts[0]).is_err());
        assert_ne!(cts[0], cts[1]);
    }

    #[test]
    fn asi_chain_opens_with_matching_attributes() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let keys = hospital_setup(&GroupParams::default(), &mut rng);
        let rec = record(1, &["rs1:1", "rs2:0"], &[("diabetes", &["rs1:1"]), ("diabetes", &["rs1:1", "rs2:0"])]);
        let dict = AsiDictionary::from([(rec.pseudonym, rec.asi_groups.clone())]);
        let enc = asi_encrypt(&keys.k_i, &keys.k_beta, &keys.abe_keys, &dict, &mut rng).unwrap();
        let cts = &enc[&rec.pseudonym];
        assert_eq!(cts[0].c3.policy_attributes().count(), 1);
        assert_eq!(cts[1].c3.policy_attributes().count(), 2);
        assert_ne!(cts[0].tau, cts[1].tau);
        assert!(cts[0].c3.policy_attributes().all(|a| !cts[1].c3.policy_attributes().any(|b| a == b)));

        for (ct, group) in cts.iter().zip(&rec.asi_groups) {
            let attrs: BTreeSet<_> =
                group.snps.iter().map(|s| asi_attribute(&ct.tau, &adjusted_point(&keys.k_i, s).unwrap())).collect();
            let sk = abe_keygen(&keys.abe_keys.mk, &attrs, &mut rng).unwrap();
            let k_gamma = abe_decrypt(&keys.abe_keys.pk, &sk, &ct.c3).unwrap();
            let c1 = sym_decrypt(&SymKey::from_bytes(kdf(&k_gamma)), &ct.c2).unwrap();
            assert_eq!(sym_decrypt(&keys.k_beta, &c1).unwrap(), b"diabetes");
        }
        assert_eq!(AsiCiphertext::from_bytes(&cts[1].to_bytes()).unwrap(), cts[1]);
    }

    #[test]
    fn empty_asi_snp_set_is_rejected() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let keys = hospital_setup(&GroupParams::default(), &mut rng);
        let dict = AsiDictionary::from([(Pseudonym([1; 16]), vec![AsiGroup { text: b"x".to_vec(), snps: vec![] }])]);
        assert!(asi_encrypt(&keys.k_i, &keys.k_beta, &keys.abe_keys, &dict, &mut rng).is_err());
    }

    #[test]
    fn snp_values_give_distinct_attributes() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let k = Scalar::random(&mut rng);
        let tau = [7u8; 32];
        let a: BTreeSet<_> =
            (0..3).map(|v| asi_attribute(&tau, &adjusted_point(&k, &SnpPair::new("rs5", v).unwrap()).unwrap())).collect();
        assert_eq!(a.len(), 3);
    }
}
