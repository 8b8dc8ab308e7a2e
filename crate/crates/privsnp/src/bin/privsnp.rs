use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use privsnp::bench::{run_bench, BenchOptions};
use privsnp::config::{Config, Mode};
use privsnp::dataset::{read_dataset, write_dataset};
use privsnp::formats::{decode_index, encode_bloom_bundle, encode_flat_index, IndexFile};
use privsnp::keys::{ClientKeyFile, GrantEntry, HospitalKeyFile, SystemKeyFile};
use privsnp::net::{serve_on, Client};
use privsnp::service::{CspService, ServiceOptions};
use privsnp::stats::SnpStats;
use privsnp::synth::{gen_synthetic, SynthOptions};
use privsnp::wire::{self, Request, Response};
use privsnp::workspace::{encode_snp_blob, read_allowlist, CiphertextFile, SharedKeyFile, Workspace};
use privsnp_core::client::{asi_decrypt, query_gen, token_gen};
use privsnp_core::csp::QueryRequest;
use privsnp_core::hospital::{
    asi_encrypt, authorize_client, hospital_setup, preprocess, snp_encrypt, AuthorizationDecision,
    AuthorizationRequest, PatientRecord, SnpPair,
};
use privsnp_core::primitives::{PrfKey, Scalar};
use rand::rngs::OsRng;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "privsnp", version, about = "Privacy-preserving similar-patient search over SNP data")]
struct Cli {
    /// TOML parameter file; defaults to <dir>/config.toml when present.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random choice; fresh OS randomness when absent.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    mode: Option<Mode>,
    #[arg(long, global = true)]
    merge_threshold: Option<usize>,
    #[arg(long, global = true)]
    fast_merge: Option<bool>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct DirArg {
    /// Deployment directory.
    #[arg(long, default_value = ".")]
    dir: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Mint the shared PRF key, hospital key bundles and client keys.
    Keygen {
        #[command(flatten)]
        d: DirArg,
        #[arg(long, value_delimiter = ',')]
        hospitals: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        clients: Vec<String>,
        /// Clients written to every new hospital's allow-list.
        #[arg(long, value_delimiter = ',')]
        allow: Vec<String>,
    },
    /// Generate a synthetic JSONL dataset.
    GenData {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        patients: usize,
        /// Statistics file; the bundled table when absent.
        #[arg(long)]
        stats: Option<PathBuf>,
        #[arg(long)]
        snps_per_patient: Option<usize>,
        #[arg(long, num_args = 2, value_names = ["MIN", "MAX"], default_values_t = [1, 5])]
        asi_per_patient: Vec<usize>,
        #[arg(long, num_args = 2, value_names = ["MIN", "MAX"], default_values_t = [20, 2000])]
        asi_snps: Vec<usize>,
    },
    /// Validate a dataset and store it as a hospital's records.
    Ingest {
        #[command(flatten)]
        d: DirArg,
        #[arg(long)]
        hospital: String,
        #[arg(long)]
        input: PathBuf,
    },
    /// Build the hospital's Bloom filters and encrypted index.
    Index {
        #[command(flatten)]
        d: DirArg,
        #[arg(long)]
        hospital: String,
    },
    /// Encrypt the hospital's genomes and ASIs for upload.
    Encrypt {
        #[command(flatten)]
        d: DirArg,
        #[arg(long)]
        hospital: String,
    },
    /// Run the CSP, loading every hospital's uploads from the directory.
    Serve {
        #[command(flatten)]
        d: DirArg,
        #[arg(long, default_value = "127.0.0.1:7878")]
        addr: String,
    },
    /// Decide a client's authorization request at a hospital.
    Authorize {
        #[command(flatten)]
        d: DirArg,
        #[arg(long)]
        hospital: String,
        #[arg(long)]
        client: String,
        /// Register the shared key with a running CSP.
        #[arg(long)]
        server: Option<String>,
    },
    /// Search for similar patients and fetch released ASIs.
    Query {
        #[command(flatten)]
        d: DirArg,
        #[arg(long)]
        client: String,
        #[arg(long)]
        server: String,
        /// Comma-separated `rsid:value` pairs.
        #[arg(long, value_delimiter = ',', conflicts_with = "snps_file")]
        snps: Vec<String>,
        /// One `rsid:value` pair per line.
        #[arg(long)]
        snps_file: Option<PathBuf>,
        /// Fraction of query SNPs that must match.
        #[arg(long, default_value_t = 0.9)]
        epsilon: f64,
        #[arg(long, default_value_t = 5)]
        k: usize,
    },
    /// Ask a running CSP to rebuild its merged index now.
    Merge {
        #[arg(long)]
        server: String,
    },
    /// Time index construction and merged versus sequential search.
    Bench {
        #[arg(long, default_value_t = 100)]
        patients: usize,
        #[arg(long, default_value_t = 10)]
        hospitals: usize,
        #[arg(long)]
        snps_per_patient: Option<usize>,
        #[arg(long, default_value_t = 20)]
        queries: usize,
        #[arg(long)]
        stats: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

struct Ctx {
    config: Config,
    seed: Option<u64>,
}

impl Ctx {
    fn rng(&self) -> ChaCha20Rng {
        match self.seed {
            Some(s) => ChaCha20Rng::seed_from_u64(s),
            None => ChaCha20Rng::from_seed({
                let mut b = [0u8; 32];
                OsRng.fill_bytes(&mut b);
                b
            }),
        }
    }
}

fn load_config(cli: &Cli, dir: Option<&Path>) -> Result<Config> {
    let mut c = match (&cli.config, dir.map(|d| Workspace::new(d).config())) {
        (Some(p), _) => Config::load(p)?,
        (None, Some(p)) if p.exists() => Config::load(&p)?,
        _ => Config::default(),
    };
    if let Some(m) = cli.mode {
        c.mode = m;
    }
    if let Some(t) = cli.merge_threshold {
        c.merge_threshold = t;
    }
    if let Some(f) = cli.fast_merge {
        c.fast_merge = f;
    }
    Ok(c)
}

fn load_records(ws: &Workspace, h: &str) -> Result<Vec<PatientRecord>> {
    let path = ws.records(h);
    let f = File::open(&path).with_context(|| format!("{} (run ingest first)", path.display()))?;
    Ok(read_dataset(BufReader::new(f), &mut OsRng)?)
}

fn load_stats(path: Option<&Path>) -> Result<SnpStats> {
    Ok(match path {
        Some(p) => SnpStats::parse(&std::fs::read_to_string(p).with_context(|| p.display().to_string())?)?,
        None => SnpStats::parse(privsnp::DEFAULT_STATS)?,
    })
}

fn flat_index(ws: &Workspace, h: &str) -> Result<privsnp_core::indexing::EncryptedIndex> {
    let path = ws.index(h);
    let bytes = std::fs::read(&path).with_context(|| format!("{} (run index first)", path.display()))?;
    match decode_index(&bytes)? {
        IndexFile::Flat(ix) => Ok(ix),
        _ => bail!("{} does not hold a flat index", path.display()),
    }
}

fn parse_snps(list: &[String], file: Option<&Path>) -> Result<Vec<SnpPair>> {
    let mut out = Vec::new();
    if let Some(f) = file {
        let text = std::fs::read_to_string(f).with_context(|| f.display().to_string())?;
        for l in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            out.push(l.parse::<SnpPair>().with_context(|| format!("bad SNP {l:?}"))?);
        }
    }
    for s in list {
        out.push(s.trim().parse::<SnpPair>().with_context(|| format!("bad SNP {s:?}"))?);
    }
    if out.is_empty() {
        bail!("no query SNPs given");
    }
    Ok(out)
}

fn keygen(ctx: &Ctx, ws: &Workspace, hospitals: &[String], clients: &[String], allow: &[String]) -> Result<()> {
    let mut rng = ctx.rng();
    if !ws.config().exists() {
        std::fs::create_dir_all(ws.root())?;
        std::fs::write(ws.config(), ctx.config.to_toml())?;
    }
    if !ws.system_keys().exists() {
        SystemKeyFile::new(&PrfKey::random(&mut rng)).save(&ws.system_keys())?;
    }
    let group = ctx.config.group()?;
    for h in hospitals {
        if ws.hospital_keys(h).exists() {
            bail!("hospital {h} already has keys");
        }
        HospitalKeyFile::new(h, &hospital_setup(&group, &mut rng)).save(&ws.hospital_keys(h))?;
        let mut list = String::new();
        for c in allow {
            list.push_str(c);
            list.push('\n');
        }
        std::fs::write(ws.allowlist(h), list)?;
    }
    for c in clients {
        if ws.client(c).exists() {
            bail!("client {c} already has keys");
        }
        ClientKeyFile::new(c, &Scalar::random(&mut rng)).save(&ws.client(c))?;
    }
    eprintln!("keys written under {}", ws.root().display());
    Ok(())
}

fn ingest(ws: &Workspace, h: &str, input: &Path) -> Result<()> {
    if !ws.hospital_keys(h).exists() {
        bail!("unknown hospital {h}");
    }
    let f = File::open(input).with_context(|| input.display().to_string())?;
    let records = read_dataset(BufReader::new(f), &mut OsRng)?;
    let mut seen = BTreeSet::new();
    for r in &records {
        if !seen.insert(r.pseudonym) {
            bail!("duplicate pseudonym {}", r.pseudonym);
        }
    }
    let out = File::create(ws.records(h))?;
    write_dataset(&records, std::io::BufWriter::new(out))?;
    eprintln!("{h}: {} records ingested", records.len());
    Ok(())
}

fn index(ctx: &Ctx, ws: &Workspace, h: &str) -> Result<()> {
    let params = ctx.config.system_params()?;
    let records = load_records(ws, h)?;
    let (filters, _) = preprocess(&records, params.bloom)?;
    std::fs::write(ws.filters(h), encode_bloom_bundle(&filters))?;
    let k = SystemKeyFile::load(&ws.system_keys())?.prf_key()?;
    let keys = HospitalKeyFile::load(&ws.hospital_keys(h))?.bundle()?;
    let ix = privsnp_core::indexing::index_gen(&k, &filters, &keys.sig_keys, params.cbf, &mut ctx.rng())?;
    std::fs::write(ws.index(h), encode_flat_index(&ix)?)?;
    eprintln!("{h}: index over {} patients written", filters.len());
    Ok(())
}

fn encrypt(ctx: &Ctx, ws: &Workspace, h: &str) -> Result<()> {
    let params = ctx.config.system_params()?;
    let records = load_records(ws, h)?;
    let keys = HospitalKeyFile::load(&ws.hospital_keys(h))?.bundle()?;
    let mut rng = ctx.rng();
    let snp = snp_encrypt(&keys.k_alpha, &records, &mut rng);
    let (_, asi) = preprocess(&records, params.bloom)?;
    let cts = asi_encrypt(&keys.k_i, &keys.k_beta, &keys.abe_keys, &asi, &mut rng)?;
    let file = CiphertextFile { snp_blob: encode_snp_blob(&snp), asi_entries: wire::asi_entries(&cts) };
    file.save(&ws.ciphertexts(h))?;
    eprintln!("{h}: {} ASI ciphertexts written", file.asi_entries.len());
    Ok(())
}

fn serve(ctx: &Ctx, ws: &Workspace, addr: &str) -> Result<()> {
    let opts = ServiceOptions {
        merge_threshold: ctx.config.merge_threshold,
        fast_merge: ctx.config.fast_merge,
        mode: ctx.config.mode.into(),
    };
    let service = CspService::new(ctx.config.system_params()?, opts);
    for h in ws.hospitals()? {
        if ws.index(&h).exists() {
            service.upload_index(&h, &flat_index(ws, &h)?).with_context(|| format!("index of {h}"))?;
        }
        if ws.ciphertexts(&h).exists() {
            let f = CiphertextFile::load(&ws.ciphertexts(&h))?;
            let abe = HospitalKeyFile::load(&ws.hospital_keys(&h))?.bundle()?.abe_keys;
            service.upload_ciphertexts(&h, f.snp_blob, wire::parse_asi_entries(&f.asi_entries)?, abe);
        }
        for c in ws.shared_keys(&h)? {
            service.register_shared_key(&h, &c, SharedKeyFile::load(&ws.shared_key(&h, &c))?.key()?);
        }
    }
    service.wait_for_merge();
    let listener = TcpListener::bind(addr).with_context(|| format!("bind {addr}"))?;
    println!("listening on {}", listener.local_addr()?);
    std::io::stdout().flush()?;
    serve_on(listener, service)?;
    Ok(())
}

fn authorize(ctx: &Ctx, ws: &Workspace, h: &str, c: &str, server: Option<&str>) -> Result<()> {
    let params = ctx.config.system_params()?;
    let policy = read_allowlist(&ws.allowlist(h))?;
    let keys = HospitalKeyFile::load(&ws.hospital_keys(h))?.bundle()?;
    let k = SystemKeyFile::load(&ws.system_keys())?.prf_key()?;
    let sigma = flat_index(ws, h)?.sigma;
    let mut client = ClientKeyFile::load(&ws.client(c)).with_context(|| format!("unknown client {c}"))?;
    let scope: BTreeSet<SnpPair> = load_records(ws, h)?.into_iter().flat_map(|r| r.snps).collect();
    let request = AuthorizationRequest { client_id: c.into(), k_c: client.k_c()?, snp_scope: scope.into_iter().collect() };
    match authorize_client(&keys, &k, &sigma, params.cbf, &policy, &request)? {
        AuthorizationDecision::Denied => bail!("{h} denied client {c}"),
        AuthorizationDecision::Approved { shared_key, grant } => {
            SharedKeyFile::new(&shared_key).save(&ws.shared_key(h, c))?;
            client.grants.insert(h.into(), GrantEntry::new(&grant));
            client.save(&ws.client(c))?;
            if let Some(addr) = server {
                Client::connect(addr)?.expect_ok(&Request::register_shared_key(h, c, &shared_key))?;
            }
            eprintln!("{h} approved client {c}");
        }
    }
    Ok(())
}

#[derive(Serialize, Default)]
struct QueryOutput {
    matches: Vec<wire::MatchMsg>,
    asi: Vec<AsiOut>,
}

#[derive(Serialize)]
struct AsiOut {
    hospital_id: String,
    pseudonym: String,
    text: String,
}

fn query(ctx: &Ctx, ws: &Workspace, c: &str, server: &str, snps: Vec<SnpPair>, eps: f64, k_c: usize) -> Result<()> {
    let params = ctx.config.system_params()?;
    let client = ClientKeyFile::load(&ws.client(c)).with_context(|| format!("unknown client {c}"))?;
    let mut out = QueryOutput::default();
    let Some(first) = client.grants.values().next() else {
        eprintln!("client {c} holds no grants");
        println!("{}", serde_json::to_string_pretty(&out)?);
        return Ok(());
    };
    let k = first.grant()?.prf_key;
    let sigmas = client.grants.values().map(|g| g.grant().map(|g| g.sigma)).collect::<Result<Vec<_>, _>>()?;
    let request = QueryRequest {
        query: query_gen(&k, &snps, eps, k_c, sigmas, &params)?,
        tokens: token_gen(&client.k_c()?, &snps)?,
    };
    match Client::connect(server)?.call(&Request::query(c, &request))? {
        Response::QueryResult { matches, asi_ciphertexts } => {
            out.matches = matches;
            for a in asi_ciphertexts {
                let Some(g) = client.grants.get(&a.hospital_id) else { continue };
                for text in asi_decrypt(&g.grant()?.k_beta, std::slice::from_ref(&a.c1)) {
                    let text = String::from_utf8_lossy(&text?).into_owned();
                    out.asi.push(AsiOut { hospital_id: a.hospital_id.clone(), pseudonym: a.pseudonym.clone(), text });
                }
            }
        }
        Response::Error { error_code, .. } if error_code == "unauthorized" => eprintln!("no hospital accepted the query"),
        Response::Error { error_code, message } => bail!("{error_code}: {message}"),
        Response::Ok => bail!("unexpected response"),
    }
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let dir = match &cli.cmd {
        Cmd::Keygen { d, .. }
        | Cmd::Ingest { d, .. }
        | Cmd::Index { d, .. }
        | Cmd::Encrypt { d, .. }
        | Cmd::Serve { d, .. }
        | Cmd::Authorize { d, .. }
        | Cmd::Query { d, .. } => Some(d.dir.clone()),
        _ => None,
    };
    let ctx = Ctx { config: load_config(&cli, dir.as_deref())?, seed: cli.seed };
    let ws = Workspace::new(dir.unwrap_or_default());
    match cli.cmd {
        Cmd::Keygen { hospitals, clients, allow, .. } => keygen(&ctx, &ws, &hospitals, &clients, &allow),
        Cmd::GenData { out, patients, stats, snps_per_patient, asi_per_patient, asi_snps } => {
            let stats = load_stats(stats.as_deref())?;
            let opts = SynthOptions {
                snps_per_patient,
                asi_per_patient: (asi_per_patient[0], asi_per_patient[1]),
                asi_snps: (asi_snps[0], asi_snps[1]),
            };
            if opts.asi_per_patient.0 > opts.asi_per_patient.1 || opts.asi_snps.0 > opts.asi_snps.1 {
                bail!("range minimum exceeds maximum");
            }
            let records = gen_synthetic(&stats, patients, ctx.seed.unwrap_or_else(|| OsRng.next_u64()), &opts);
            if let Some(d) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(d)?;
            }
            write_dataset(&records, std::io::BufWriter::new(File::create(&out)?))?;
            eprintln!("{} patients written to {}", records.len(), out.display());
            Ok(())
        }
        Cmd::Ingest { hospital, input, .. } => ingest(&ws, &hospital, &input),
        Cmd::Index { hospital, .. } => index(&ctx, &ws, &hospital),
        Cmd::Encrypt { hospital, .. } => encrypt(&ctx, &ws, &hospital),
        Cmd::Serve { addr, .. } => serve(&ctx, &ws, &addr),
        Cmd::Authorize { hospital, client, server, .. } => authorize(&ctx, &ws, &hospital, &client, server.as_deref()),
        Cmd::Query { client, server, snps, snps_file, epsilon, k, .. } => {
            let snps = parse_snps(&snps, snps_file.as_deref())?;
            query(&ctx, &ws, &client, &server, snps, epsilon, k)
        }
        Cmd::Merge { server } => Ok(Client::connect(&server)?.expect_ok(&Request::MergeNow)?),
        Cmd::Bench { patients, hospitals, snps_per_patient, queries, stats, json } => {
            let stats = load_stats(stats.as_deref())?;
            let opts = BenchOptions {
                patients,
                hospitals,
                snps_per_patient,
                queries,
                seed: ctx.seed.unwrap_or(0),
                mode: ctx.config.mode.into(),
                ..Default::default()
            };
            let report = run_bench(&ctx.config.system_params()?, &stats, &opts)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print!("{report}");
            }
            Ok(())
        }
    }
}
