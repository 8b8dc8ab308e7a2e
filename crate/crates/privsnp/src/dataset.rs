//! Line-delimited JSON patient datasets.

use std::io::{BufRead, Write};

use privsnp_core::hospital::{AsiGroup, PatientRecord, Pseudonym, SnpPair};
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct SnpJson {
    id: String,
    val: u8,
}

#[derive(Serialize, Deserialize)]
struct AsiJson {
    text: String,
    snps: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pseudonym: Option<String>,
    snps: Vec<SnpJson>,
    #[serde(default)]
    asi: Vec<AsiJson>,
}

fn parse_record<R: RngCore + CryptoRng>(line: &str, rng: &mut R) -> Result<PatientRecord, String> {
    let j: RecordJson = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let pseudonym = match j.pseudonym {
        Some(h) => Pseudonym::from_hex(&h).map_err(|e| e.to_string())?,
        None => Pseudonym::random(rng),
    };
    let snps = j.snps.into_iter().map(|s| SnpPair::new(s.id, s.val)).collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
    let asi_groups = j
        .asi
        .into_iter()
        .map(|a| {
            let snps = a.snps.iter().map(|s| s.parse::<SnpPair>()).collect::<Result<Vec<_>, _>>()?;
            Ok(AsiGroup { text: a.text.into_bytes(), snps })
        })
        .collect::<Result<Vec<_>, privsnp_core::Error>>()
        .map_err(|e| e.to_string())?;
    let rec = PatientRecord { pseudonym, snps, asi_groups };
    rec.validate().map_err(|e| e.to_string())?;
    Ok(rec)
}

/// Reads one record per non-empty line, minting missing pseudonyms.
pub fn read_dataset<B: BufRead, R: RngCore + CryptoRng>(input: B, rng: &mut R) -> Result<Vec<PatientRecord>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_record(&line, rng).map_err(|message| Error::Parse { line: i + 1, message })?);
    }
    Ok(out)
}

pub fn write_dataset<W: Write>(records: &[PatientRecord], mut out: W) -> Result<()> {
    for r in records {
        let j = RecordJson {
            pseudonym: Some(r.pseudonym.to_string()),
            snps: r.snps.iter().map(|s| SnpJson { id: s.rsid().into(), val: s.value() }).collect(),
            asi: r
                .asi_groups
                .iter()
                .map(|a| AsiJson { text: String::from_utf8_lossy(&a.text).into_owned(), snps: a.snps.iter().map(|s| s.to_string()).collect() })
                .collect(),
        };
        serde_json::to_writer(&mut out, &j)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
