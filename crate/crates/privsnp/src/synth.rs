//! Synthetic patient generation from population statistics.

use privsnp_core::hospital::{AsiGroup, PatientRecord, Pseudonym, SnpPair};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::stats::{SnpStat, SnpStats};

const CONDITIONS: &[&str] = &[
    "type 2 diabetes",
    "hypertension",
    "asthma",
    "coronary artery disease",
    "rheumatoid arthritis",
    "major depressive disorder",
    "breast cancer",
    "celiac disease",
    "hypothyroidism",
    "migraine",
];

#[derive(Clone, Debug)]
pub struct SynthOptions {
    /// Exact SNP count per patient, chosen uniformly among all rsids.
    /// When unset, each SNP is present with its own probability.
    pub snps_per_patient: Option<usize>,
    /// Inclusive range of ASI groups per patient.
    pub asi_per_patient: (usize, usize),
    /// Inclusive range of SNPs tied to one ASI, capped by the record size.
    pub asi_snps: (usize, usize),
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self { snps_per_patient: None, asi_per_patient: (1, 5), asi_snps: (20, 2000) }
    }
}

fn draw_value(rng: &mut ChaCha20Rng, s: &SnpStat) -> u8 {
    let u: f64 = rng.gen();
    if u < s.p[0] {
        0
    } else if u < s.p[0] + s.p[1] {
        1
    } else {
        2
    }
}

pub fn gen_synthetic(stats: &SnpStats, n: usize, seed: u64, opts: &SynthOptions) -> Vec<PatientRecord> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..n).map(|_| patient(stats, &mut rng, opts)).collect()
}

fn patient(stats: &SnpStats, rng: &mut ChaCha20Rng, opts: &SynthOptions) -> PatientRecord {
    let pseudonym = Pseudonym::random(rng);
    let chosen: Vec<&SnpStat> = match opts.snps_per_patient {
        Some(m) => {
            let mut idx = sample(rng, stats.rows.len(), m.min(stats.rows.len())).into_vec();
            idx.sort_unstable();
            idx.into_iter().map(|i| &stats.rows[i]).collect()
        }
        None => stats.rows.iter().filter(|s| rng.gen_bool(s.p_present)).collect(),
    };
    let snps: Vec<SnpPair> =
        chosen.iter().map(|s| SnpPair::new(s.rsid.clone(), draw_value(rng, s)).expect("stats rows are valid")).collect();

    let mut asi_groups = Vec::new();
    if !snps.is_empty() {
        let count = rng.gen_range(opts.asi_per_patient.0..=opts.asi_per_patient.1);
        for _ in 0..count {
            let lo = opts.asi_snps.0.clamp(1, snps.len());
            let hi = opts.asi_snps.1.clamp(lo, snps.len());
            let size = rng.gen_range(lo..=hi);
            let mut idx = sample(rng, snps.len(), size).into_vec();
            idx.sort_unstable();
            let cond = CONDITIONS[rng.gen_range(0..CONDITIONS.len())];
            let text = format!("{cond}; onset age {}", rng.gen_range(18..90)).into_bytes();
            asi_groups.push(AsiGroup { text, snps: idx.into_iter().map(|i| snps[i].clone()).collect() });
        }
    }
    PatientRecord { pseudonym, snps, asi_groups }
}
