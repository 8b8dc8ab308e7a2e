//! Per-SNP population statistics driving the synthetic generator.
//!
//! Text format, one row per SNP: `rsid p_present p0 p1 p2`. Lines starting
//! with `#` are comments.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct SnpStat {
    pub rsid: String,
    /// Probability that a patient record lists this SNP at all.
    pub p_present: f64,
    /// Distribution of the value over {0, 1, 2}.
    pub p: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct SnpStats {
    pub rows: Vec<SnpStat>,
}

impl SnpStats {
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse { line: i + 1, message };
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 5 {
                return Err(err(format!("expected 5 fields, found {}", f.len())));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| err(format!("{s}: {e}")));
            let row = SnpStat { rsid: f[0].to_string(), p_present: num(f[1])?, p: [num(f[2])?, num(f[3])?, num(f[4])?] };
            if !(0.0..=1.0).contains(&row.p_present) || row.p.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(err("probability outside [0, 1]".into()));
            }
            if (row.p.iter().sum::<f64>() - 1.0).abs() > SUM_TOL {
                return Err(err("value probabilities do not sum to 1".into()));
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Parse { line: 0, message: "no SNP rows".into() });
        }
        Ok(Self { rows })
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("# rsid p_present p0 p1 p2\n");
        for r in &self.rows {
            writeln!(s, "{} {:.6} {:.9} {:.9} {:.9}", r.rsid, r.p_present, r.p[0], r.p[1], r.p[2]).unwrap();
        }
        s
    }

    /// Hardy-Weinberg genotype frequencies for random minor-allele
    /// frequencies; presence probabilities are centred on `mean_present`.
    pub fn hardy_weinberg(n: usize, mean_present: f64, seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let rows = (0..n)
            .map(|i| {
                let q: f64 = rng.gen_range(0.01..0.5);
                let spread = mean_present.min(1.0 - mean_present) * 0.5;
                let p_present = (mean_present + rng.gen_range(-spread..=spread)).clamp(0.0, 1.0);
                let p0 = (1.0 - q) * (1.0 - q);
                let p2 = q * q;
                SnpStat { rsid: format!("rs{}", 1000 + i), p_present, p: [p0, 1.0 - p0 - p2, p2] }
            })
            .collect();
        Self { rows }
    }
}
