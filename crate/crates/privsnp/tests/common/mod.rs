#![allow(dead_code)]

use privsnp_core::client::{query_gen, Query};
use privsnp_core::hospital::{hospital_setup, preprocess, AsiGroup, HospitalKeyBundle, PatientRecord, Pseudonym, SnpPair};
use privsnp_core::indexing::{hierarchical_index_gen, index_gen, EncryptedIndex, HierarchicalIndex};
use privsnp_core::params::SystemParams;
use privsnp_core::primitives::{GroupParams, PrfKey};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub struct Hospital {
    pub id: String,
    pub keys: HospitalKeyBundle,
    pub records: Vec<PatientRecord>,
    pub flat: EncryptedIndex,
    pub hier: HierarchicalIndex,
}

pub struct World {
    pub rng: ChaCha20Rng,
    pub params: SystemParams,
    pub k: PrfKey,
    pub hospitals: Vec<Hospital>,
}

pub fn snp(i: usize, v: u8) -> SnpPair {
    SnpPair::new(format!("rs{i}"), v).unwrap()
}

/// `n` distinct SNPs drawn from `rs0..rs{universe}`; `asi` groups of the
/// given sizes carved from the front of the record.
pub fn random_record(rng: &mut ChaCha20Rng, universe: usize, n: usize, asi: &[usize]) -> PatientRecord {
    let mut ids: Vec<usize> = (0..universe).collect();
    ids.shuffle(rng);
    let snps: Vec<SnpPair> = ids[..n].iter().map(|&i| snp(i, rng.gen_range(0..3))).collect();
    let pseudonym = Pseudonym::random(rng);
    let asi_groups = asi
        .iter()
        .enumerate()
        .map(|(g, &size)| AsiGroup { text: format!("{pseudonym} condition {g}").into_bytes(), snps: snps[..size].to_vec() })
        .collect();
    PatientRecord { pseudonym, snps, asi_groups }
}

pub fn hospital(rng: &mut ChaCha20Rng, params: &SystemParams, k: &PrfKey, id: &str, records: Vec<PatientRecord>) -> Hospital {
    let keys = hospital_setup(&GroupParams::default(), rng);
    let (bfs, _) = preprocess(&records, params.bloom).unwrap();
    let flat = index_gen(k, &bfs, &keys.sig_keys, params.cbf, rng).unwrap();
    let hier = hierarchical_index_gen(&flat, params.mds_dim).unwrap();
    Hospital { id: id.into(), keys, records, flat, hier }
}

/// Hospitals `h0, h1, ...` with `sizes[i]` patients of 60 SNPs over 300 rsids.
pub fn world(seed: u64, sizes: &[usize]) -> World {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let params = SystemParams::new(2_000, 0.01, None, 7, 8).unwrap();
    let k = PrfKey::random(&mut rng);
    let hospitals = sizes
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let records = (0..n).map(|_| random_record(&mut rng, 300, 60, &[3, 5])).collect();
            hospital(&mut rng, &params, &k, &format!("h{i}"), records)
        })
        .collect();
    World { rng, params, k, hospitals }
}

impl World {
    pub fn query(&self, snps: &[SnpPair], eps: f64, k_c: usize, authorized: &[usize]) -> Query {
        let sigmas = authorized.iter().map(|&i| self.hospitals[i].flat.sigma).collect();
        query_gen(&self.k, snps, eps, k_c, sigmas, &self.params).unwrap()
    }

    /// A random subset of one stored patient's SNPs plus a little noise.
    pub fn noisy_snps(&mut self) -> Vec<SnpPair> {
        let h = self.rng.gen_range(0..self.hospitals.len());
        let p = self.rng.gen_range(0..self.hospitals[h].records.len());
        let mut s = self.hospitals[h].records[p].snps.clone();
        s.shuffle(&mut self.rng);
        let keep = self.rng.gen_range(1..=s.len());
        s.truncate(keep);
        for _ in 0..self.rng.gen_range(0..6) {
            s.push(snp(self.rng.gen_range(0..300), self.rng.gen_range(0..3)));
        }
        s
    }

    pub fn random_subset(&mut self) -> Vec<usize> {
        (0..self.hospitals.len()).filter(|_| self.rng.gen_bool(0.5)).collect()
    }
}
