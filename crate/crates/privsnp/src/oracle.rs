//! Plaintext ground truth for similarity search.
//!
//! Scores every patient directly with set arithmetic over the same
//! deterministic filter and PRF pipeline. No tree is involved.

use std::collections::BTreeSet;

use privsnp_core::hospital::{PatientRecord, Pseudonym, SnpPair};
use privsnp_core::params::SystemParams;
use privsnp_core::primitives::{prf, PrfKey};

/// Patients' final filter positions, computed once per salt.
pub struct PlainOracle<'a> {
    params: &'a SystemParams,
    k: &'a PrfKey,
    r: &'a PrfKey,
    patients: Vec<(Pseudonym, BTreeSet<u32>)>,
}

/// Returns (distinct first-stage bits, final positions).
fn positions(params: &SystemParams, k: &PrfKey, r: &PrfKey, snps: &[SnpPair]) -> (usize, BTreeSet<u32>) {
    let bits: BTreeSet<u32> = snps.iter().flat_map(|s| params.bloom.positions(&s.encode()).collect::<Vec<_>>()).collect();
    let cbf = bits.iter().map(|&p| params.cbf.position(&prf(r, &prf(k, &u64::from(p).to_le_bytes())))).collect();
    (bits.len(), cbf)
}

impl<'a> PlainOracle<'a> {
    pub fn new(records: &[PatientRecord], params: &'a SystemParams, k: &'a PrfKey, r: &'a PrfKey) -> Self {
        let patients = records.iter().map(|rec| (rec.pseudonym, positions(params, k, r, &rec.snps).1)).collect();
        Self { params, k, r, patients }
    }

    /// Top `k_c` patients, best first, with the same eligibility rule and
    /// tie order as the encrypted search.
    pub fn topk(&self, query: &[SnpPair], epsilon_frac: f64, k_c: usize) -> Vec<(Pseudonym, f64)> {
        let q: BTreeSet<SnpPair> = query.iter().cloned().collect();
        if q.is_empty() {
            return Vec::new();
        }
        let q: Vec<SnpPair> = q.into_iter().collect();
        let n = q.len() as u64;
        let (count, qc) = positions(self.params, self.k, self.r, &q);
        let eps_snps = ((epsilon_frac * n as f64 - 1e-9).ceil() as u64).clamp(1, n);
        let eps_bits = (2 * count as u64 * eps_snps + n) / (2 * n);
        // Query bits that collided in the final filter cannot be matched.
        let bar = eps_bits.saturating_sub((count - qc.len()) as u64) as usize;

        let mut scored: Vec<(Pseudonym, f64)> = self
            .patients
            .iter()
            .filter_map(|(p, pc)| {
                let dot = qc.intersection(pc).count();
                if dot < bar {
                    return None;
                }
                let cos = if pc.is_empty() { 0.0 } else { dot as f64 / ((qc.len() * pc.len()) as f64).sqrt() };
                Some((*p, cos.min(1.0)))
            })
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        scored.truncate(k_c);
        scored
    }
}

/// One-shot form of [`PlainOracle::topk`] for salt `r`.
pub fn oracle_topk(
    records: &[PatientRecord],
    query: &[SnpPair],
    epsilon_frac: f64,
    k_c: usize,
    params: &SystemParams,
    k: &PrfKey,
    r: &PrfKey,
) -> Vec<(Pseudonym, f64)> {
    PlainOracle::new(records, params, k, r).topk(query, epsilon_frac, k_c)
}
