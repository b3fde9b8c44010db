use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use pamfec::chain::Chain;
use pamfec::dist_db::{estimate_u_dist, DistDatabase, DistSource, LazyDatabase};
use pamfec::fer_model::{FerModel, GridEvaluator};
use pamfec::search::{evaluate, run_search, write_csv, ParetoPoint, SearchReport};
use pamfec::{metrics, Error, Result};
use serde::Serialize;

use crate::manifest::{sidecar, write_json, DatabaseInfo, Manifest};
use crate::settings::RunConfig;

#[derive(Clone, Copy, Debug)]
pub struct Ui {
    pub quiet: bool,
}

impl Ui {
    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

pub fn build_db(cfg: &RunConfig, out: &Path, ui: Ui) -> Result<()> {
    let keys = cfg.inner_keys()?;
    let grid = cfg.grid.grid()?;
    cfg.budget.validate()?;
    let mut db = DistDatabase::new(grid);
    for key in &keys {
        for i in 0..grid.len() {
            let counts = estimate_u_dist(key, grid.snr_db(i), &cfg.budget, cfg.seed)?;
            ui.say(format!(
                "{key} @ {:.2} dB: {} frames, {} with errors",
                grid.snr_db(i),
                counts.trials(),
                counts.error_frames()
            ));
            db.insert(*key, i, counts)?;
        }
    }
    db.store(out)?;
    let mut m = Manifest::new("build-db", cfg);
    m.database_out = Some(DatabaseInfo::of(Some(out), &db));
    m.outputs.push(out.to_path_buf());
    m.write(&sidecar(out))
}

pub fn merge_db(cfg: &RunConfig, inputs: &[PathBuf], out: &Path, ui: Ui) -> Result<()> {
    let mut merged: Option<DistDatabase> = None;
    for path in inputs {
        let db = DistDatabase::load(path)?;
        ui.say(format!("{}: {} entries", path.display(), db.len()));
        match merged.as_mut() {
            None => merged = Some(db),
            Some(acc) => acc.merge(&db)?,
        }
    }
    let db = merged.ok_or_else(|| Error::InvalidParameter("nothing to merge".into()))?;
    db.store(out)?;
    let mut m = Manifest::new("merge-db", cfg);
    m.database_out = Some(DatabaseInfo::of(Some(out), &db));
    m.outputs.push(out.to_path_buf());
    m.write(&sidecar(out))
}

pub fn inspect_db(path: &Path, entries: bool) -> Result<()> {
    let db = DistDatabase::load(path)?;
    print!("{db}");
    println!("digest {}", db.digest());
    if entries {
        println!("key\tsnr_db\ttrials\terror_frames\tmean_u");
        for key in db.keys() {
            for i in db.indices(&key) {
                let c = db.counts(&key, i).expect("listed index");
                let d = c.distribution();
                println!("{key}\t{:.2}\t{}\t{}\t{:.6e}", db.grid().snr_db(i), c.trials(), c.error_frames(), d.mean());
            }
        }
    }
    Ok(())
}

pub fn simulate(cfg: &RunConfig, out: &Path, ui: Ui) -> Result<()> {
    let config = cfg.concat_config()?;
    if cfg.snr.is_empty() {
        return Err(Error::InvalidParameter("no SNR points given (--snr)".into()));
    }
    let chain = Chain::new(config)?;
    let db = cfg.database.as_deref().map(DistDatabase::load).transpose()?;
    let model = FerModel::new();
    let mut text = String::from("snr_db,frames,frame_errors,fer,bit_errors,ber,fer_estimate\n");
    for &snr in &cfg.snr {
        let s = chain.simulate(snr, &cfg.chain, cfg.seed)?;
        let estimate = match &db {
            Some(db) => match model.fer_at(&config, db, snr) {
                Ok(f) => format!("{:e}", f.value()),
                Err(e) => {
                    ui.say(format!("no estimate at {snr} dB: {e}"));
                    String::new()
                }
            },
            None => String::new(),
        };
        ui.say(format!("{snr} dB: {} frames, {} frame errors", s.frames, s.frame_errors));
        writeln!(
            text,
            "{snr},{},{},{:e},{},{:e},{estimate}",
            s.frames,
            s.frame_errors,
            s.fer(),
            s.bit_errors,
            s.ber()
        )
        .expect("writing to a string");
    }
    std::fs::write(out, text)?;
    let mut m = Manifest::new("simulate", cfg);
    m.database = db.as_ref().map(|d| DatabaseInfo::of(cfg.database.as_deref(), d));
    m.outputs.push(out.to_path_buf());
    m.write(&sidecar(out))
}

/// Distribution source selected by the configuration.
enum Source {
    Fixed(DistDatabase),
    Lazy(LazyDatabase),
}

impl Source {
    fn open(cfg: &RunConfig) -> Result<(Source, Option<DatabaseInfo>)> {
        let base = match &cfg.database {
            Some(path) => DistDatabase::load(path)?,
            None if cfg.fill_missing => DistDatabase::new(cfg.grid.grid()?),
            None => return Err(Error::InvalidParameter("no database given (--db or --fill-missing)".into())),
        };
        let info = cfg.database.as_deref().map(|p| DatabaseInfo::of(Some(p), &base));
        if cfg.fill_missing {
            cfg.budget.validate()?;
            Ok((Source::Lazy(LazyDatabase::new(base, cfg.budget, cfg.seed)), info))
        } else {
            Ok((Source::Fixed(base), info))
        }
    }

    fn get(&self) -> &dyn DistSource {
        match self {
            Source::Fixed(db) => db,
            Source::Lazy(db) => db,
        }
    }

    /// Stores a filled database and describes it.
    fn save(&self, path: Option<&Path>) -> Result<Option<DatabaseInfo>> {
        match (self, path) {
            (Source::Lazy(lazy), Some(path)) => {
                let db = lazy.snapshot();
                db.store(path)?;
                Ok(Some(DatabaseInfo::of(Some(path), &db)))
            }
            _ => Ok(None),
        }
    }
}

#[derive(Serialize)]
struct EstimateReport {
    manifest: Manifest,
    system: String,
    description: String,
    rate: f64,
    target_fer: f64,
    required_snr_db: f64,
    csl_snr_db: f64,
    gap_db: f64,
    complexity: f64,
    latency: u64,
    low_confidence: bool,
}

pub fn estimate(cfg: &RunConfig, db_out: Option<&Path>, out: Option<&Path>, ui: Ui) -> Result<()> {
    let config = cfg.concat_config()?;
    config.validate()?;
    let (src, info) = Source::open(cfg)?;
    let model = FerModel::new();
    let eval = GridEvaluator::new(&model, src.get());
    let p: ParetoPoint = evaluate(&config, &eval, cfg.options.target_fer)?;
    let mut manifest = Manifest::new("estimate", cfg);
    manifest.database = info;
    manifest.database_out = src.save(db_out)?;
    manifest.outputs.extend(db_out.map(Path::to_path_buf));
    manifest.outputs.extend(out.map(Path::to_path_buf));
    let report = EstimateReport {
        manifest,
        system: config.row(),
        description: config.to_string(),
        rate: p.rate,
        target_fer: cfg.options.target_fer,
        required_snr_db: p.required_snr_db,
        csl_snr_db: metrics::csl_snr(p.rate)?,
        gap_db: p.gap_db,
        complexity: p.complexity,
        latency: p.latency,
        low_confidence: p.low_confidence,
    };
    match out {
        Some(path) => {
            write_json(path, &report)?;
            ui.say(format!(
                "{}: rate {:.4}, required SNR {:.3} dB, gap {:.3} dB, complexity {:.2}, latency {}",
                report.description, report.rate, report.required_snr_db, report.gap_db, report.complexity, report.latency
            ));
        }
        None => println!("{}", serde_json::to_string_pretty(&report)?),
    }
    Ok(())
}

#[derive(Serialize)]
struct SearchFile<'a> {
    manifest: &'a Manifest,
    #[serde(flatten)]
    report: &'a SearchReport,
}

fn write_front(path: &Path, points: &[ParetoPoint]) -> Result<()> {
    write_csv(BufWriter::new(File::create(path)?), points)
}

pub fn search(cfg: &RunConfig, db_out: Option<&Path>, out_dir: &Path, ui: Ui) -> Result<()> {
    let (src, info) = Source::open(cfg)?;
    let families = cfg.search.families();
    let count: usize = families.iter().map(|f| f.multiples).sum();
    ui.say(format!("{count} configurations in {} families", families.len()));
    let model = FerModel::new();
    let report = run_search(&cfg.search, src.get(), &model, &cfg.options);
    ui.say(format!(
        "evaluated {}, low confidence {}, skipped {:?}, front {}",
        report.evaluated,
        report.low_confidence,
        report.skipped,
        report.front.len()
    ));

    std::fs::create_dir_all(out_dir)?;
    let mut manifest = Manifest::new("search", cfg);
    manifest.database = info;
    manifest.database_out = src.save(db_out)?;
    manifest.outputs.extend(db_out.map(Path::to_path_buf));

    let front = out_dir.join("front.csv");
    write_front(&front, &report.front)?;
    manifest.outputs.push(front);
    for (cap, points) in &report.cap_fronts {
        let path = out_dir.join(format!("front_cap_{cap}.csv"));
        write_front(&path, points)?;
        manifest.outputs.push(path);
    }
    let best = out_dir.join("best_gap_by_rate.csv");
    let mut text = String::from("rate,cap,gap_db,complexity\n");
    for p in &report.best_by_rate {
        writeln!(text, "{},{},{:.3},{:.2}", p.rate, p.cap, p.gap_db, p.complexity).expect("writing to a string");
    }
    std::fs::write(&best, text)?;
    manifest.outputs.push(best);
    let json = out_dir.join("front.json");
    manifest.outputs.push(json.clone());
    let manifest_path = out_dir.join("manifest.json");
    manifest.outputs.push(manifest_path.clone());
    write_json(&json, &SearchFile { manifest: &manifest, report: &report })?;
    manifest.write(&manifest_path)
}
