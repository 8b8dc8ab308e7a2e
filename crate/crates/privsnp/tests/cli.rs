use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Child, Command, Output, Stdio};

const BIN: &str = env!("CARGO_BIN_EXE_privsnp");

fn run(dir: &Path, args: &[&str]) -> Output {
    let out = Command::new(BIN).current_dir(dir).args(args).output().unwrap();
    assert!(out.status.success(), "privsnp {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

struct Server(Child);

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn serve(dir: &Path) -> (Server, String) {
    let mut child = Command::new(BIN)
        .current_dir(dir)
        .args(["serve", "--dir", "D", "--addr", "127.0.0.1:0"])
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
    let addr = line.trim().strip_prefix("listening on ").expect("listening line").to_string();
    (Server(child), addr)
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn demo_script_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    std::fs::write(d.join("small.toml"), "bf_capacity = 50000\nmerge_threshold = 2\n").unwrap();
    run(d, &["--config", "small.toml", "--seed", "1", "keygen", "--dir", "D", "--hospitals", "h1,h2", "--clients", "alice,mallory", "--allow", "alice"]);
    for (i, h) in ["h1", "h2"].iter().enumerate() {
        let data = format!("{h}.jsonl");
        let seed = (10 + i).to_string();
        run(d, &["--seed", &seed, "gen-data", "--out", &data, "--patients", "8", "--snps-per-patient", "80", "--asi-snps", "4", "10"]);
        run(d, &["ingest", "--dir", "D", "--hospital", h, "--input", &data]);
        run(d, &["index", "--dir", "D", "--hospital", h]);
        run(d, &["encrypt", "--dir", "D", "--hospital", h]);
    }
    assert!(d.join("D/hospitals/h1/index.psix").exists());
    run(d, &["authorize", "--dir", "D", "--hospital", "h1", "--client", "alice"]);
    let denied = Command::new(BIN).current_dir(d).args(["authorize", "--dir", "D", "--hospital", "h1", "--client", "mallory"]).output().unwrap();
    assert!(!denied.status.success());

    // Query with exactly one stored ASI group's SNPs.
    let first = std::fs::read_to_string(d.join("D/hospitals/h1/records.jsonl")).unwrap();
    let rec: serde_json::Value = serde_json::from_str(first.lines().next().unwrap()).unwrap();
    let snps: Vec<&str> = rec["asi"][0]["snps"].as_array().unwrap().iter().map(|s| s.as_str().unwrap()).collect();
    std::fs::write(d.join("q.txt"), snps.join("\n")).unwrap();

    let (_server, addr) = serve(d);
    let out = json(&run(d, &["query", "--dir", "D", "--client", "alice", "--server", &addr, "--snps-file", "q.txt", "--epsilon", "1.0"]));
    assert_eq!(out["matches"][0]["pseudonym"], rec["pseudonym"]);
    let texts: Vec<&str> = out["asi"].as_array().unwrap().iter().map(|a| a["text"].as_str().unwrap()).collect();
    assert!(texts.contains(&rec["asi"][0]["text"].as_str().unwrap()), "{texts:?}");

    // Never authorized: empty match set, success exit.
    let none = json(&run(d, &["query", "--dir", "D", "--client", "mallory", "--server", &addr, "--snps-file", "q.txt"]));
    assert_eq!(none["matches"].as_array().unwrap().len(), 0);

    run(d, &["merge", "--server", &addr]);
    let again = json(&run(d, &["query", "--dir", "D", "--client", "alice", "--server", &addr, "--snps-file", "q.txt", "--epsilon", "1.0"]));
    assert_eq!(again["matches"], out["matches"]);
}

#[test]
fn bench_emits_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["--seed", "3", "bench", "--patients", "100", "--hospitals", "10", "--snps-per-patient", "40", "--queries", "5", "--json"]);
    let report = json(&out);
    assert_eq!(report["hospitals"], 10);
    assert!(report["timings"].as_array().unwrap().len() >= 5);
    assert!(report["notes"].as_array().unwrap().iter().any(|n| n.as_str().unwrap().contains("merged search")));
}

#[test]
fn usage_errors_exit_nonzero() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [&["frobnicate"][..], &["index", "--dir", "nowhere", "--hospital", "x"], &["--mode", "loose", "bench"]] {
        let out = Command::new(BIN).current_dir(tmp.path()).args(args).output().unwrap();
        assert!(!out.status.success(), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}
