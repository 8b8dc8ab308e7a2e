//! Scaling benchmark: per-hospital versus merged search.
//!
//! Reports trends only. Nothing here asserts on absolute time.

use std::collections::BTreeMap;
use std::fmt;
use std::time::{Duration, Instant};

use privsnp_core::client::query_gen;
use privsnp_core::csp::{prepare_index, search, search_merged, SearchMode};
use privsnp_core::hospital::{preprocess, PatientRecord, SnpPair};
use privsnp_core::indexing::{index_gen, index_merge_fast, index_merge_full, HierarchicalIndex};
use privsnp_core::params::SystemParams;
use privsnp_core::primitives::{PrfKey, SignatureKeyPair};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::stats::SnpStats;
use crate::synth::{gen_synthetic, SynthOptions};

/// Full merge re-clusters every leaf; skip it above this many.
const FULL_MERGE_LEAF_LIMIT: usize = 1500;

#[derive(Clone, Debug)]
pub struct BenchOptions {
    pub patients: usize,
    pub hospitals: usize,
    pub snps_per_patient: Option<usize>,
    pub queries: usize,
    pub epsilon: f64,
    pub k_c: usize,
    pub seed: u64,
    pub mode: SearchMode,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            patients: 100,
            hospitals: 10,
            snps_per_patient: None,
            queries: 20,
            epsilon: 0.9,
            k_c: 5,
            seed: 0,
            mode: SearchMode::Default,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Timing {
    pub operation: String,
    pub millis: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub hospitals: usize,
    pub patients_per_hospital: usize,
    pub mean_snps_per_patient: f64,
    pub queries: usize,
    pub mode: String,
    pub timings: Vec<Timing>,
    /// Mean per-query time over the per-hospital indices, in ms.
    pub sequential_query_ms: f64,
    /// Mean per-query time over the merged index, in ms.
    pub merged_query_ms: f64,
    pub merged_faster: bool,
    pub notes: Vec<String>,
}

impl BenchReport {
    fn push(&mut self, op: &str, d: Duration) {
        self.timings.push(Timing { operation: op.into(), millis: d.as_secs_f64() * 1e3 });
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "hospitals={} patients/hospital={} mean SNPs/patient={:.1} queries={} mode={}",
            self.hospitals, self.patients_per_hospital, self.mean_snps_per_patient, self.queries, self.mode
        )?;
        for t in &self.timings {
            writeln!(f, "  {:<28} {:>12.3} ms", t.operation, t.millis)?;
        }
        writeln!(f, "  {:<28} {:>12.3} ms", "query (sequential, mean)", self.sequential_query_ms)?;
        writeln!(f, "  {:<28} {:>12.3} ms", "query (merged, mean)", self.merged_query_ms)?;
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        Ok(())
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

/// Query drawn from a random stored patient: a random 90% of its SNPs.
fn sample_query(rng: &mut ChaCha20Rng, hospitals: &[Vec<PatientRecord>]) -> Vec<SnpPair> {
    loop {
        let h = &hospitals[rng.gen_range(0..hospitals.len())];
        let Some(p) = h.choose(rng) else { continue };
        if p.snps.is_empty() {
            continue;
        }
        let mut snps = p.snps.clone();
        snps.shuffle(rng);
        snps.truncate(((snps.len() * 9) / 10).max(1));
        return snps;
    }
}

pub fn run_bench(params: &SystemParams, stats: &SnpStats, opts: &BenchOptions) -> Result<BenchReport> {
    let mut rng = ChaCha20Rng::seed_from_u64(opts.seed);
    let k = PrfKey::random(&mut rng);
    let synth = SynthOptions { snps_per_patient: opts.snps_per_patient, asi_per_patient: (0, 0), ..Default::default() };
    let mut report = BenchReport {
        hospitals: opts.hospitals,
        patients_per_hospital: opts.patients,
        mean_snps_per_patient: 0.0,
        queries: opts.queries,
        mode: format!("{:?}", opts.mode),
        timings: Vec::new(),
        sequential_query_ms: 0.0,
        merged_query_ms: 0.0,
        merged_faster: false,
        notes: Vec::new(),
    };

    let (data, d) = timed(|| {
        (0..opts.hospitals)
            .map(|i| gen_synthetic(stats, opts.patients, opts.seed ^ ((i as u64 + 1) << 32), &synth))
            .collect::<Vec<_>>()
    });
    report.push("generate data", d);
    let total: usize = data.iter().flatten().map(|r| r.snps.len()).sum();
    report.mean_snps_per_patient = total as f64 / (opts.patients * opts.hospitals).max(1) as f64;

    let seeds: Vec<(SignatureKeyPair, PrfKey)> =
        (0..opts.hospitals).map(|_| (SignatureKeyPair::generate(&mut rng), PrfKey::random(&mut rng))).collect();

    let (filters, d) = timed(|| {
        data.par_iter().map(|recs| preprocess(recs, params.bloom).map(|(f, _)| f)).collect::<Result<Vec<_>, _>>()
    });
    let filters = filters?;
    report.push("preprocess (all hospitals)", d);

    let (flat, d) = timed(|| {
        filters
            .par_iter()
            .zip(&seeds)
            .map(|(f, (sig, salt))| {
                let mut r = ChaCha20Rng::from_seed(*salt.as_bytes());
                index_gen(&k, f, sig, params.cbf, &mut r)
            })
            .collect::<Result<Vec<_>, _>>()
    });
    let flat = flat?;
    report.push("index_gen (all hospitals)", d);

    let (hier, d) =
        timed(|| flat.par_iter().map(|ix| prepare_index(params, ix)).collect::<Result<Vec<HierarchicalIndex>, _>>());
    let hier = hier?;
    report.push("clustering (all hospitals)", d);

    let (merged, d) = timed(|| index_merge_fast(&hier, params.mds_dim));
    let merged = merged?;
    report.push("merge (fast)", d);
    let leaves = opts.patients * opts.hospitals;
    if leaves <= FULL_MERGE_LEAF_LIMIT {
        let (full, d) = timed(|| index_merge_full(&hier, params.mds_dim));
        full?;
        report.push("merge (full)", d);
    } else {
        report.notes.push(format!("full merge skipped above {FULL_MERGE_LEAF_LIMIT} leaves"));
    }

    let sigmas: Vec<_> = flat.iter().map(|ix| ix.sigma).collect();
    let mut queries = Vec::with_capacity(opts.queries);
    for _ in 0..opts.queries {
        let snps = sample_query(&mut rng, &data);
        queries.push(query_gen(&k, &snps, opts.epsilon, opts.k_c, sigmas.clone(), params)?);
    }

    let mut seq = Duration::ZERO;
    let mut mer = Duration::ZERO;
    let mut agree = 0usize;
    for q in &queries {
        let t = Instant::now();
        let mut per: BTreeMap<usize, usize> = BTreeMap::new();
        for (i, ix) in hier.iter().enumerate() {
            if let Some(d) = search(ix, q, opts.mode)? {
                per.insert(i, d.len());
            }
        }
        seq += t.elapsed();
        let t = Instant::now();
        let m = search_merged(&merged, q, opts.mode)?;
        mer += t.elapsed();
        agree += usize::from(m.is_some_and(|m| !m.is_empty()) == per.values().any(|&n| n > 0));
    }
    let nq = queries.len().max(1) as f64;
    report.sequential_query_ms = seq.as_secs_f64() * 1e3 / nq;
    report.merged_query_ms = mer.as_secs_f64() * 1e3 / nq;
    report.merged_faster = report.merged_query_ms < report.sequential_query_ms;
    report.notes.push(format!("{agree}/{} queries: merged and sequential agree on emptiness", queries.len()));
    let verdict = if report.merged_faster { "faster" } else { "not faster" };
    report.notes.push(format!(
        "merged search is {verdict} than sequential per-index search at {} indices ({:.2}x)",
        opts.hospitals,
        report.sequential_query_ms / report.merged_query_ms.max(f64::MIN_POSITIVE)
    ));
    Ok(report)
}
