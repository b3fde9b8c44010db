//! Monte-Carlo estimation, storage and SNR interpolation of the inner
//! decoder's PAM4-symbol error-weight distribution.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::Mutex;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{InnerKey, Scheme};
use crate::error::{Error, Result};
use crate::link::InnerLink;
use crate::modem::ChannelModel;
use crate::seed;

pub const FORMAT: &str = "pamfec-distdb";
pub const SCHEMA_VERSION: u32 = 1;

/// Uniform SNR grid in hundredths of a dB.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SnrGrid {
    pub start_centi_db: i64,
    pub step_centi_db: i64,
    pub points: usize,
}

impl Default for SnrGrid {
    /// 12.00 to 18.00 dB in 0.05 dB steps.
    fn default() -> Self {
        SnrGrid { start_centi_db: 1200, step_centi_db: 5, points: 121 }
    }
}

impl SnrGrid {
    pub fn new(start_db: f64, stop_db: f64, step_db: f64) -> Result<SnrGrid> {
        let start = (start_db * 100.0).round() as i64;
        let stop = (stop_db * 100.0).round() as i64;
        let step = (step_db * 100.0).round() as i64;
        if step <= 0 || stop < start || (stop - start) % step != 0 {
            return Err(Error::InvalidParameter(format!(
                "grid {start_db}..{stop_db} step {step_db} is not a whole number of 0.01 dB steps"
            )));
        }
        Ok(SnrGrid { start_centi_db: start, step_centi_db: step, points: ((stop - start) / step) as usize + 1 })
    }

    pub fn len(&self) -> usize {
        self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points == 0
    }

    pub fn snr_db(&self, index: usize) -> f64 {
        (self.start_centi_db + self.step_centi_db * index as i64) as f64 / 100.0
    }

    pub fn min_db(&self) -> f64 {
        self.snr_db(0)
    }

    pub fn max_db(&self) -> f64 {
        self.snr_db(self.points - 1)
    }

    /// Index of a grid point given in dB (within 1e-9 dB).
    pub fn index_of(&self, snr_db: f64) -> Option<usize> {
        let x = (snr_db * 100.0 - self.start_centi_db as f64) / self.step_centi_db as f64;
        let i = x.round();
        ((x - i).abs() < 1e-7 && i >= 0.0 && (i as usize) < self.points).then_some(i as usize)
    }

    /// Bracketing indices and weight of the upper one.
    pub fn bracket(&self, snr_db: f64) -> Result<(usize, usize, f64)> {
        if let Some(i) = self.index_of(snr_db) {
            return Ok((i, i, 0.0));
        }
        if !(snr_db > self.min_db() && snr_db < self.max_db()) {
            return Err(Error::OutOfRange(format!(
                "SNR {snr_db} dB outside grid [{}, {}]",
                self.min_db(),
                self.max_db()
            )));
        }
        let x = (snr_db * 100.0 - self.start_centi_db as f64) / self.step_centi_db as f64;
        let lo = x.floor() as usize;
        Ok((lo, lo + 1, x - lo as f64))
    }
}

/// Largest possible error weight for a key.
pub fn u_max(key: &InnerKey) -> usize {
    match key.scheme {
        Scheme::Bicm => key.code.k() / 2,
        Scheme::Mlc => key.code.k(),
    }
}

/// Histogram of the error weight over simulated inner words.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightCounts {
    counts: Vec<u64>,
}

impl WeightCounts {
    pub fn zeros(u_max: usize) -> WeightCounts {
        WeightCounts { counts: vec![0; u_max + 1] }
    }

    pub fn from_counts(counts: Vec<u64>) -> WeightCounts {
        WeightCounts { counts }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn u_max(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn trials(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Frames with at least one symbol error.
    pub fn error_frames(&self) -> u64 {
        self.counts[1..].iter().sum()
    }

    pub fn record(&mut self, u: usize) {
        self.counts[u] += 1;
    }

    pub fn add(&mut self, other: &WeightCounts) -> Result<()> {
        if other.counts.len() != self.counts.len() {
            return Err(Error::Format(format!(
                "support mismatch: {} vs {}",
                self.counts.len(),
                other.counts.len()
            )));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(())
    }

    pub fn distribution(&self) -> WeightDistribution {
        let n = self.trials();
        let pmf = if n == 0 {
            let mut p = vec![0.0; self.counts.len()];
            p[0] = 1.0;
            p
        } else {
            self.counts.iter().map(|&c| c as f64 / n as f64).collect()
        };
        WeightDistribution { pmf, trials: n, low_confidence: self.error_frames() == 0 }
    }
}

/// PMF of the error weight `U` over `0..=u_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightDistribution {
    pmf: Vec<f64>,
    trials: u64,
    low_confidence: bool,
}

impl WeightDistribution {
    /// Validates and wraps a pmf (normalized to 1e-12).
    pub fn new(pmf: Vec<f64>, trials: u64) -> Result<WeightDistribution> {
        if pmf.is_empty() || pmf.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidParameter("pmf entries must be finite and nonnegative".into()));
        }
        let s: f64 = pmf.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("pmf sums to {s}")));
        }
        let low_confidence = pmf[1..].iter().all(|&p| p == 0.0);
        Ok(WeightDistribution { pmf, trials, low_confidence })
    }

    /// Point mass at zero.
    pub fn error_free(u_max: usize) -> WeightDistribution {
        let mut pmf = vec![0.0; u_max + 1];
        pmf[0] = 1.0;
        WeightDistribution { pmf, trials: 0, low_confidence: true }
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn u_max(&self) -> usize {
        self.pmf.len() - 1
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    /// No error event was observed.
    pub fn is_low_confidence(&self) -> bool {
        self.low_confidence
    }

    pub fn mean(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(u, p)| u as f64 * p).sum()
    }

    /// `(1 - w) a + w b`, renormalized.
    pub fn mix(a: &WeightDistribution, b: &WeightDistribution, w: f64) -> Result<WeightDistribution> {
        if a.pmf.len() != b.pmf.len() {
            return Err(Error::InvalidParameter("mixing distributions of different support".into()));
        }
        let mut pmf: Vec<f64> = a.pmf.iter().zip(&b.pmf).map(|(x, y)| (1.0 - w) * x + w * y).collect();
        let s: f64 = pmf.iter().sum();
        pmf.iter_mut().for_each(|p| *p /= s);
        Ok(WeightDistribution {
            pmf,
            trials: a.trials.min(b.trials),
            low_confidence: a.low_confidence || b.low_confidence,
        })
    }
}

/// Monte-Carlo stopping rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Budget {
    pub min_frames: u64,
    pub min_error_frames: u64,
    pub max_frames: u64,
    pub batch: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { min_frames: 100_000, min_error_frames: 100, max_frames: 2_000_000, batch: 1000 }
    }
}

impl Budget {
    pub fn validate(&self) -> Result<()> {
        if self.batch == 0 || self.max_frames == 0 || self.min_frames > self.max_frames {
            return Err(Error::InvalidParameter(format!("bad budget {self:?}")));
        }
        Ok(())
    }

    fn satisfied(&self, c: &WeightCounts) -> bool {
        let n = c.trials();
        n >= self.max_frames || (n >= self.min_frames && c.error_frames() >= self.min_error_frames)
    }
}

fn key_hash(key: &InnerKey) -> u64 {
    let s = serde_json::to_string(key).expect("keys serialize");
    let d = Sha256::digest(s.as_bytes());
    u64::from_le_bytes(d[..8].try_into().expect("digest is 32 bytes"))
}

/// Batches run between stopping checks.
const ROUND: u64 = 8;

/// Simulates inner words until the budget's stopping rule holds.
///
/// Batch `i` uses its own generator seeded from `(seed, key, snr, i)`, and
/// the stopping rule is checked after every batch in order, so the result
/// does not depend on the thread count.
pub fn estimate_u_dist(key: &InnerKey, snr_db: f64, budget: &Budget, seed: u64) -> Result<WeightCounts> {
    budget.validate()?;
    let link = InnerLink::new(*key)?;
    let ch = ChannelModel::from_snr_db(snr_db)?;
    let kh = key_hash(key);
    let snr_bits = ((snr_db * 100.0).round() as i64) as u64;
    let mut total = WeightCounts::zeros(u_max(key));
    let mut next = 0u64;
    while !budget.satisfied(&total) {
        let batches: Vec<u64> = (next..next + ROUND).collect();
        let results: Vec<Result<WeightCounts>> = batches
            .par_iter()
            .map(|&b| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(seed, &[kh, snr_bits, b]));
                let mut c = WeightCounts::zeros(u_max(key));
                for _ in 0..budget.batch {
                    c.record(link.sample_weight(&ch, &mut rng)?);
                }
                Ok(c)
            })
            .collect();
        for r in results {
            total.add(&r?)?;
            if budget.satisfied(&total) {
                break;
            }
        }
        next += ROUND;
    }
    Ok(total)
}

#[derive(Serialize, Deserialize)]
struct Record {
    key: InnerKey,
    snr_db: f64,
    trials: u64,
    counts: Vec<u64>,
    pmf: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct FileBody {
    format: String,
    schema_version: u32,
    grid: SnrGrid,
    records: Vec<Record>,
}

/// Error-weight histograms keyed by inner key and SNR grid index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistDatabase {
    grid: SnrGrid,
    entries: BTreeMap<(InnerKey, usize), WeightCounts>,
}

impl DistDatabase {
    pub fn new(grid: SnrGrid) -> DistDatabase {
        DistDatabase { grid, entries: BTreeMap::new() }
    }

    pub fn grid(&self) -> &SnrGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds counts, merging with any existing entry.
    pub fn insert(&mut self, key: InnerKey, index: usize, counts: WeightCounts) -> Result<()> {
        if index >= self.grid.len() {
            return Err(Error::OutOfRange(format!("grid index {index} >= {}", self.grid.len())));
        }
        if counts.u_max() != u_max(&key) {
            return Err(Error::Format(format!(
                "{key}: support {} but expected {}",
                counts.u_max(),
                u_max(&key)
            )));
        }
        match self.entries.get_mut(&(key, index)) {
            Some(c) => c.add(&counts),
            None => {
                self.entries.insert((key, index), counts);
                Ok(())
            }
        }
    }

    pub fn counts(&self, key: &InnerKey, index: usize) -> Option<&WeightCounts> {
        self.entries.get(&(*key, index))
    }

    pub fn get(&self, key: &InnerKey, index: usize) -> Option<WeightDistribution> {
        self.counts(key, index).map(WeightCounts::distribution)
    }

    pub fn keys(&self) -> Vec<InnerKey> {
        let mut k: Vec<InnerKey> = self.entries.keys().map(|(k, _)| *k).collect();
        k.dedup();
        k
    }

    /// Grid indices present for a key.
    pub fn indices(&self, key: &InnerKey) -> Vec<usize> {
        self.entries.range((*key, 0)..=(*key, usize::MAX)).map(|((_, i), _)| *i).collect()
    }

    /// Grid indices missing for a key.
    pub fn missing(&self, key: &InnerKey) -> Vec<usize> {
        (0..self.grid.len()).filter(|&i| !self.entries.contains_key(&(*key, i))).collect()
    }

    /// Sums counts of `other` into `self`; the grids must agree.
    pub fn merge(&mut self, other: &DistDatabase) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Format(format!("grid mismatch: {:?} vs {:?}", self.grid, other.grid)));
        }
        for ((key, i), c) in &other.entries {
            self.insert(*key, *i, c.clone())?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let records = self
            .entries
            .iter()
            .map(|((key, i), c)| {
                let d = c.distribution();
                let used = c.counts().iter().rposition(|&x| x > 0).map_or(1, |p| p + 1);
                Record {
                    key: *key,
                    snr_db: self.grid.snr_db(*i),
                    trials: c.trials(),
                    counts: c.counts()[..used].to_vec(),
                    pmf: d.pmf()[..used].to_vec(),
                }
            })
            .collect();
        let body = FileBody {
            format: FORMAT.into(),
            schema_version: SCHEMA_VERSION,
            grid: self.grid,
            records,
        };
        serde_json::to_string_pretty(&body).expect("database serializes")
    }

    pub fn from_json(text: &str) -> Result<DistDatabase> {
        let head: serde_json::Value = serde_json::from_str(text)?;
        if head.get("format").and_then(|v| v.as_str()) != Some(FORMAT) {
            return Err(Error::Format("not a distribution database".into()));
        }
        let version = head.get("schema_version").and_then(|v| v.as_u64());
        if version != Some(SCHEMA_VERSION as u64) {
            return Err(Error::Format(format!("unsupported schema version {version:?}")));
        }
        let body: FileBody = serde_json::from_value(head)?;
        let mut db = DistDatabase::new(body.grid);
        for r in body.records {
            let i = body
                .grid
                .index_of(r.snr_db)
                .ok_or_else(|| Error::Format(format!("{} dB is not a grid point", r.snr_db)))?;
            let size = u_max(&r.key) + 1;
            if r.counts.is_empty() || r.counts.len() > size {
                return Err(Error::Format(format!("{}: bad count vector", r.key)));
            }
            let mut counts = r.counts;
            counts.resize(size, 0);
            let c = WeightCounts::from_counts(counts);
            if c.trials() != r.trials {
                return Err(Error::Format(format!("{}: trial count mismatch", r.key)));
            }
            db.insert(r.key, i, c)?;
        }
        Ok(db)
    }

    pub fn store(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<DistDatabase> {
        DistDatabase::from_json(&std::fs::read_to_string(path)?)
    }

    /// SHA-256 of the canonical serialization; identifies a database version.
    pub fn digest(&self) -> String {
        let d = Sha256::digest(self.to_json().as_bytes());
        d.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Display for DistDatabase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "grid {:.2}..{:.2} dB, {} points; {} entries",
            self.grid.min_db(),
            self.grid.max_db(),
            self.grid.len(),
            self.len()
        )?;
        for key in self.keys() {
            let idx = self.indices(&key);
            let low = idx.iter().filter(|&&i| self.get(&key, i).is_some_and(|d| d.is_low_confidence())).count();
            writeln!(f, "{key}: {} grid points ({} without errors)", idx.len(), low)?;
        }
        Ok(())
    }
}

/// Anything that can supply error-weight distributions at grid points.
pub trait DistSource: Sync {
    fn grid(&self) -> SnrGrid;
    fn at(&self, key: &InnerKey, index: usize) -> Result<WeightDistribution>;
}

impl DistSource for DistDatabase {
    fn grid(&self) -> SnrGrid {
        self.grid
    }

    fn at(&self, key: &InnerKey, index: usize) -> Result<WeightDistribution> {
        self.get(key, index).ok_or_else(|| {
            Error::MissingEntry(format!("{key} at {:.2} dB", self.grid.snr_db(index)))
        })
    }
}

/// Database that estimates missing entries on first use.
pub struct LazyDatabase {
    db: Mutex<DistDatabase>,
    budget: Budget,
    seed: u64,
}

impl LazyDatabase {
    pub fn new(base: DistDatabase, budget: Budget, seed: u64) -> LazyDatabase {
        LazyDatabase { db: Mutex::new(base), budget, seed }
    }

    pub fn into_inner(self) -> DistDatabase {
        self.db.into_inner().expect("database lock poisoned")
    }

    pub fn snapshot(&self) -> DistDatabase {
        self.db.lock().expect("database lock poisoned").clone()
    }
}

impl DistSource for LazyDatabase {
    fn grid(&self) -> SnrGrid {
        self.db.lock().expect("database lock poisoned").grid
    }

    fn at(&self, key: &InnerKey, index: usize) -> Result<WeightDistribution> {
        let grid = {
            let db = self.db.lock().expect("database lock poisoned");
            if let Some(d) = db.get(key, index) {
                return Ok(d);
            }
            db.grid
        };
        if index >= grid.len() {
            return Err(Error::OutOfRange(format!("grid index {index}")));
        }
        let counts = estimate_u_dist(key, grid.snr_db(index), &self.budget, self.seed)?;
        let mut db = self.db.lock().expect("database lock poisoned");
        if db.counts(key, index).is_none() {
            db.insert(*key, index, counts)?;
        }
        Ok(db.get(key, index).expect("just inserted"))
    }
}

/// Distribution at an arbitrary SNR within the grid span, linearly
/// interpolated between the two bracketing grid points.
pub fn interpolate<S: DistSource + ?Sized>(src: &S, key: &InnerKey, snr_db: f64) -> Result<WeightDistribution> {
    let (lo, hi, w) = src.grid().bracket(snr_db)?;
    let a = src.at(key, lo)?;
    if lo == hi {
        return Ok(a);
    }
    let b = src.at(key, hi)?;
    WeightDistribution::mix(&a, &b, w)
}
