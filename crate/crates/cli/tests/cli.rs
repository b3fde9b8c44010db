use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const TOY: &str = "1,40,2,4,65,7,2,2,MLC";

fn pamfec(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pamfec"))
        .current_dir(dir)
        .arg("--quiet")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = pamfec(dir, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn small_db(dir: &Path, out: &str, inner: &str, seed: &str) {
    ok(
        dir,
        &[
            "build-db", "--inner", inner, "--scheme", "MLC", "--snr", "14", "--min-frames", "400", "--max-frames", "400",
            "--batch", "50", "--seed", seed, "-o", out,
        ],
    );
}

#[test]
fn single_point_build_gives_one_entry() {
    let dir = TempDir::new().unwrap();
    small_db(dir.path(), "a.json", "ebch:65,7,2,2", "1");
    let db = json(dir.path().join("a.json"));
    let records = db["records"].as_array().unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0]["snr_db"], 14.0);
    assert_eq!(records[0]["trials"], 400);
    let m = json(dir.path().join("a.json.manifest.json"));
    assert_eq!(m["command"], "build-db");
    assert_eq!(m["config"]["seed"], 1);
    assert_eq!(m["database_out"]["schema_version"], 1);
}

#[test]
fn rebuild_with_same_seed_is_identical() {
    let dir = TempDir::new().unwrap();
    small_db(dir.path(), "a.json", "ebch:65,7,2,2", "5");
    small_db(dir.path(), "b.json", "ebch:65,7,2,2", "5");
    small_db(dir.path(), "c.json", "ebch:65,7,2,2", "6");
    let read = |n: &str| std::fs::read(dir.path().join(n)).unwrap();
    assert_eq!(read("a.json"), read("b.json"));
    assert_ne!(read("a.json"), read("c.json"));
}

#[test]
fn merging_disjoint_keys_gives_union() {
    let dir = TempDir::new().unwrap();
    small_db(dir.path(), "a.json", "ebch:65,7,2,2", "1");
    small_db(dir.path(), "b.json", "spc:21", "1");
    ok(dir.path(), &["merge-db", "a.json", "b.json", "-o", "m.json"]);
    let records = |n: &str| json(dir.path().join(n))["records"].as_array().unwrap().clone();
    let merged = records("m.json");
    assert_eq!(merged.len(), 2);
    for r in records("a.json").iter().chain(records("b.json").iter()) {
        assert!(merged.contains(r));
    }
    let inspect = ok(dir.path(), &["inspect-db", "m.json"]);
    assert!(String::from_utf8_lossy(&inspect.stdout).contains("2 entries"));
}

#[test]
fn noiseless_simulation_has_no_errors() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["simulate", "--system", TOY, "--snr", "40", "--min-frames", "300", "--max-frames", "300", "--batch", "30", "-o", "s.csv"]);
    let text = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "snr_db,frames,frame_errors,fer,bit_errors,ber,fer_estimate");
    let f: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(f[2], "0");
    assert_eq!(f[4], "0");
    assert!(dir.path().join("s.csv.manifest.json").exists());
}

#[test]
fn empty_subgrid_writes_header_only_front() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["search", "--rates", "0.88", "--caps", "10", "--fill-missing", "--out-dir", "out"]);
    let front = std::fs::read_to_string(dir.path().join("out/front.csv")).unwrap();
    assert_eq!(front.lines().count(), 1);
    assert!(front.starts_with("M,N,T,m,n,b,t,J,Lat.,Compl.,Gap,Type"));
    let cap = std::fs::read_to_string(dir.path().join("out/front_cap_10.csv")).unwrap();
    assert_eq!(cap, front);
    let report = json(dir.path().join("out/front.json"));
    assert_eq!(report["evaluated"], 0);
    assert_eq!(report["manifest"]["command"], "search");
}

const SMALL_SEARCH: &[&str] = &[
    "search", "--rates", "0.8", "--rate-tolerance", "0.01", "--caps", "3000", "--outer-t", "2-3", "--inner-b", "6",
    "--inner-t", "1", "--test-bits", "2", "--no-spc", "--scheme", "MLC", "--target-fer", "1e-4", "--fill-missing",
    "--grid-start", "13", "--grid-stop", "17", "--grid-step", "0.5", "--min-frames", "500", "--max-frames", "1000",
    "--batch", "125", "--include-low-confidence",
];

#[test]
fn search_reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let mut args = SMALL_SEARCH.to_vec();
    args.extend(["--out-dir", "out", "--db-out", "filled.json"]);
    ok(dir.path(), &args);
    let first: Vec<Vec<u8>> = ["front.csv", "front.json", "best_gap_by_rate.csv", "manifest.json"]
        .iter()
        .map(|f| std::fs::read(dir.path().join("out").join(f)).unwrap())
        .collect();
    let filled = std::fs::read(dir.path().join("filled.json")).unwrap();
    ok(dir.path(), &args);
    for (f, bytes) in ["front.csv", "front.json", "best_gap_by_rate.csv", "manifest.json"].iter().zip(&first) {
        assert_eq!(&std::fs::read(dir.path().join("out").join(f)).unwrap(), bytes, "{f} differs");
    }
    assert_eq!(std::fs::read(dir.path().join("filled.json")).unwrap(), filled);
    let front = std::fs::read_to_string(dir.path().join("out/front.csv")).unwrap();
    assert!(front.lines().count() > 1);

    let mut fixed = SMALL_SEARCH.iter().copied().filter(|a| *a != "--fill-missing").collect::<Vec<_>>();
    fixed.extend(["--db", "filled.json", "--out-dir", "again"]);
    ok(dir.path(), &fixed);
    assert_eq!(std::fs::read_to_string(dir.path().join("again/front.csv")).unwrap(), front);
}

#[test]
fn manifest_replays_estimate() {
    let dir = TempDir::new().unwrap();
    let args = [
        "estimate", "--system", TOY, "--fill-missing", "--grid-start", "13", "--grid-stop", "18", "--grid-step", "0.5",
        "--target-fer", "1e-4", "--min-frames", "1000", "--max-frames", "2000", "--batch", "125", "-o", "e.json",
    ];
    ok(dir.path(), &args);
    let first = json(dir.path().join("e.json"));
    std::fs::write(dir.path().join("m.json"), first["manifest"].to_string()).unwrap();
    ok(dir.path(), &["estimate", "--config", "m.json", "-o", "f.json"]);
    let second = json(dir.path().join("f.json"));
    assert_eq!(first["required_snr_db"], second["required_snr_db"]);
    assert_eq!(first["gap_db"], second["gap_db"]);
    assert_eq!(first["manifest"]["config"], second["manifest"]["config"]);
    let snr = first["required_snr_db"].as_f64().unwrap();
    assert!((13.0..18.0).contains(&snr));
}

#[test]
fn toml_config_supplies_defaults() {
    let dir = TempDir::new().unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        format!("seed = 3\nsystem = \"{TOY}\"\nsnr = [40.0]\n[chain]\nmin_frames = 20\nmax_frames = 20\nbatch = 10\n"),
    )
    .unwrap();
    ok(dir.path(), &["--config", "run.toml", "simulate", "-o", "s.csv"]);
    let m = json(dir.path().join("s.csv.manifest.json"));
    assert_eq!(m["config"]["seed"], 3);
    assert_eq!(m["config"]["chain"]["min_frames"], 20);
    let text = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("40,20,0,"));
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn exit_codes_follow_error_categories() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    small_db(d, "a.json", "ebch:65,7,2,2", "1");

    let bad_flag = pamfec(d, &["estimate", "--bogus"]);
    assert_eq!(code(&bad_flag), 2);
    let bad_system = pamfec(d, &["estimate", "--system", "1,2,3", "--db", "a.json"]);
    assert_eq!(code(&bad_system), 2);
    assert!(String::from_utf8_lossy(&bad_system.stderr).starts_with("error[invalid-input]"));

    let unbalanced = pamfec(d, &["simulate", "--system", "1,16,2,4,65,7,2,2,MLC", "--snr", "14", "-o", "s.csv"]);
    assert_eq!(code(&unbalanced), 3);

    let uncovered = pamfec(d, &["estimate", "--system", "10,544,15,544,57,6,1,2,MLC", "--db", "a.json"]);
    assert_eq!(code(&uncovered), 4);
    assert!(String::from_utf8_lossy(&uncovered.stderr).starts_with("error[coverage]"));

    let unreachable = pamfec(d, &["estimate", "--system", TOY, "--db", "a.json", "--target-fer", "1e-13"]);
    assert_eq!(code(&unreachable), 5);

    std::fs::write(d.join("junk.json"), "{\"format\": \"other\"}").unwrap();
    assert_eq!(code(&pamfec(d, &["inspect-db", "junk.json"])), 6);
    assert_eq!(code(&pamfec(d, &["inspect-db", "absent.json"])), 7);
}
