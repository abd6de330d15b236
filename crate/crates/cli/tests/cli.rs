use std::path::Path;
use std::process::{Command, Output};

fn upw(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_upw")).current_dir(dir).env_remove("UPW_SEED").args(args).output().unwrap()
}

fn upw_env(dir: &Path, seed: &str, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_upw")).current_dir(dir).env("UPW_SEED", seed).args(args).output().unwrap()
}

fn ok(o: &Output) {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn encode_then_decode_is_identity() {
    let d = tempfile::tempdir().unwrap();
    let src: Vec<u8> = (0..2000u32).map(|i| (i * 7 % 256) as u8).collect();
    std::fs::write(d.path().join("f"), &src).unwrap();
    ok(&upw(d.path(), &["encode", "--input", "f", "--id", "41", "--difficulty", "8", "--out", "f.upw"]));
    ok(&upw(d.path(), &["decode", "--input", "f.upw", "--out", "g"]));
    assert_eq!(std::fs::read(d.path().join("g")).unwrap(), src);
    let cfg: serde_json::Value =
        serde_json::from_slice(&std::fs::read(d.path().join("f.upw.config.json")).unwrap()).unwrap();
    assert_eq!(cfg["subcommand"], "encode");
    assert_eq!(cfg["params"]["args"]["difficulty"], 8);
}

#[test]
fn bench_rows_grow_with_difficulty() {
    let d = tempfile::tempdir().unwrap();
    ok(&upw(d.path(), &["bench-encoding", "--difficulty", "1..8", "--size", "4096", "--out", "b.csv"]));
    let csv = std::fs::read_to_string(d.path().join("b.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 8);
    let per_byte: Vec<f64> = rows.iter().map(|r| r[5].parse::<f64>().unwrap() / r[1].parse::<f64>().unwrap()).collect();
    assert!(per_byte.windows(2).all(|w| w[1] > w[0]), "{per_byte:?}");
}

#[test]
fn usage_errors_exit_2_and_module_errors_exit_1() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(upw(d.path(), &["encode", "--bogus"]).status.code(), Some(2));
    assert_eq!(upw(d.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(upw_env(d.path(), "abc", &["chain-demo"]).status.code(), Some(2));
    std::fs::write(d.path().join("junk"), b"not a replica").unwrap();
    let o = upw(d.path(), &["decode", "--input", "junk", "--out", "x"]);
    assert_eq!(o.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "CorruptReplica");
    assert_eq!(err["module"], "useful-encoding");
}

#[test]
fn seed_env_overrides_flag_and_runs_replay() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    let args = |out: &'static str| vec!["--seed", "1", "storage-sim", "--out", out];
    ok(&upw(p, &args("a")));
    ok(&upw(p, &args("b")));
    ok(&upw_env(p, "99", &args("c")));
    let read = |dir: &str, f: &str| std::fs::read(p.join(dir).join(f)).unwrap();
    for f in ["events.log", "ledger.csv", "verdicts.csv"] {
        assert_eq!(read("a", f), read("b", f), "{f}");
    }
    assert_ne!(read("a", "events.log"), read("c", "events.log"));
    let cfg: serde_json::Value = serde_json::from_slice(&read("c", "config.json")).unwrap();
    assert_eq!(cfg["seed"], 99);
    assert_eq!(cfg["params"]["seed"], 99);
    // The recorded config replays the run.
    std::fs::write(p.join("replay.json"), cfg["params"].to_string()).unwrap();
    ok(&upw(p, &["storage-sim", "--config", "replay.json", "--out", "r"]));
    assert_eq!(read("c", "events.log"), read("r", "events.log"));
}

#[test]
fn pre_pipeline_through_files() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(&upw(p, &["--seed", "1", "pre", "keygen", "--out", "a.json"]));
    ok(&upw(p, &["--seed", "2", "pre", "keygen", "--out", "b.json"]));
    ok(&upw(p, &["pre", "enc", "--sk", "a.json", "--msg", "meet at noon", "--out", "c.hex"]));
    ok(&upw(p, &["pre", "rekey", "--sk", "a.json", "--to-pk", "b.json", "--ct", "c.hex", "--out", "rk.hex"]));
    ok(&upw(p, &["pre", "reenc", "--rk", "rk.hex", "--ct", "c.hex", "--out", "cb.hex"]));
    let o = upw(p, &["pre", "dec", "--sk", "b.json", "--ct", "cb.hex"]);
    ok(&o);
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "meet at noon");
    ok(&upw(p, &["--seed", "5", "pre", "enc", "--sk", "a.json", "--msg", "other", "--out", "c2.hex"]));
    let o = upw(p, &["pre", "reenc", "--rk", "rk.hex", "--ct", "c2.hex", "--out", "x.hex"]);
    assert_eq!(o.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "RandomnessMismatch");
}

#[test]
fn chain_commands_write_artifacts() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    let o = upw(p, &["chain-demo", "--out", "demo"]);
    ok(&o);
    let trace = String::from_utf8_lossy(&o.stdout);
    assert!(trace.contains("rejected Overspend"));
    assert!(trace.contains("rejected DuplicateClaim"));
    assert!(trace.contains("balances: A=40 B=35 C=25"));
    assert!(p.join("demo/snapshot.txt").exists());
    ok(&upw(p, &["chain-sim", "--width", "20", "--avg-txs", "3", "--block-size", "unlimited", "--interval", "15", "--duration", "45", "--out", "tps.csv"]));
    let csv = std::fs::read_to_string(p.join("tps.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("20,3,unlimited,15,3,180,180,0,4.000,"));
    assert!(p.join("tps.csv.config.json").exists());
}

#[test]
fn mine_persists_chain_and_seals_with_mining_work() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(&upw(p, &["mine", "--blocks", "3", "--target-bits", "6", "--out", "m"]));
    let r: serde_json::Value = serde_json::from_slice(&std::fs::read(p.join("m/report.json")).unwrap()).unwrap();
    assert_eq!(r["blocks"], 3);
    assert!(p.join("m/chain").is_dir());
    std::fs::write(p.join("f"), vec![9u8; 300]).unwrap();
    ok(&upw(p, &["mine", "--input", "f", "--encode-difficulty", "4", "--target-bits", "8", "--out", "m2"]));
    ok(&upw(p, &["decode", "--input", "m2/replica.upw", "--out", "g"]));
    assert_eq!(std::fs::read(p.join("g")).unwrap(), vec![9u8; 300]);
}
