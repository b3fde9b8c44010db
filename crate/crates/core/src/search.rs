//! Enumeration of concatenated systems, their evaluation, and Pareto-front
//! extraction.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{inner_rate, ConcatConfig, InnerCode, OuterCode, Scheme};
use crate::dist_db::DistSource;
use crate::error::{Error, Result};
use crate::fer_model::{FerModel, GridEvaluator, TARGET_FER};
use crate::interleaver::slots_per_word;
use crate::metrics;

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// The parameter grid to sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchSpace {
    /// Outer correction radii.
    pub outer_t: Vec<usize>,
    /// Outer code lengths to keep; empty keeps every length.
    pub outer_n: Vec<usize>,
    /// Outer symbol size.
    pub outer_bits: u32,
    /// Parent-length exponents `b` of the eBCH inner codes.
    pub inner_b: Vec<u32>,
    pub inner_t: Vec<usize>,
    pub test_bits: Vec<usize>,
    pub include_ebch: bool,
    pub include_spc: bool,
    /// Shortest SPC length considered.
    pub spc_min_n: usize,
    /// Longest SPC length considered.
    pub spc_max_n: usize,
    /// Upper bound on the inner code rate `k/n`.
    pub max_inner_code_rate: f64,
    /// Target overall rates.
    pub rates: Vec<f64>,
    /// Half-width of every rate bucket.
    pub rate_tolerance: f64,
    /// Latency caps in bits.
    pub latency_caps: Vec<u64>,
    pub schemes: Vec<Scheme>,
}

impl Default for SearchSpace {
    fn default() -> Self {
        SearchSpace {
            outer_t: (1..=20).collect(),
            outer_n: Vec::new(),
            outer_bits: 10,
            inner_b: (5..=11).collect(),
            inner_t: vec![1, 2, 3],
            test_bits: (1..=6).collect(),
            include_ebch: true,
            include_spc: true,
            spc_min_n: 2,
            spc_max_n: 2048,
            max_inner_code_rate: 0.99,
            rates: (75..=93).map(|r| r as f64 / 100.0).collect(),
            rate_tolerance: 0.005,
            latency_caps: vec![20_000, 60_000, 200_000],
            schemes: vec![Scheme::Bicm, Scheme::Mlc],
        }
    }
}

impl SearchSpace {
    /// Sweep around a single rate with one latency cap.
    pub fn single_rate(rate: f64, cap: u64) -> SearchSpace {
        SearchSpace { rates: vec![rate], latency_caps: vec![cap], ..SearchSpace::default() }
    }

    pub fn max_latency(&self) -> u64 {
        self.latency_caps.iter().copied().max().unwrap_or(0)
    }

    /// Rate bucket containing `rate`, if any (closed intervals).
    pub fn bucket(&self, rate: f64) -> Option<f64> {
        self.rates
            .iter()
            .copied()
            .find(|&r| (rate - r).abs() <= self.rate_tolerance + 1e-12)
    }

    /// Inner codes of the sweep in a fixed order. eBCH codes are shortened
    /// from length `2^b` to lengths above `2^(b-1)`.
    pub fn inner_codes(&self) -> Vec<InnerCode> {
        let mut out = Vec::new();
        if self.include_ebch {
            for &b in &self.inner_b {
                for &t in &self.inner_t {
                    for n in (1usize << (b - 1)) + 1..=(1usize << b) {
                        for &j in &self.test_bits {
                            let code = InnerCode::ebch(n, b, t, j);
                            if code.validate().is_ok()
                                && (code.k() as f64 / n as f64) <= self.max_inner_code_rate + 1e-12
                            {
                                out.push(code);
                            }
                        }
                    }
                }
            }
        }
        if self.include_spc {
            for n in self.spc_min_n.max(2)..=self.spc_max_n {
                if ((n - 1) as f64 / n as f64) <= self.max_inner_code_rate + 1e-12 {
                    out.push(InnerCode::Spc { n });
                }
            }
        }
        out
    }

    /// Families of configurations meeting the balance conditions, a rate
    /// bucket and the largest latency cap.
    pub fn families(&self) -> Vec<Family> {
        let mut out = Vec::new();
        let cap = self.max_latency();
        let max_n = (1usize << self.outer_bits) - 1;
        for &scheme in &self.schemes {
            for inner in self.inner_codes() {
                let (n, k) = (inner.n(), inner.k());
                let Ok(slots) = slots_per_word(self.outer_bits, k, scheme) else {
                    continue;
                };
                let r_in = inner_rate(scheme, n, k);
                let per_word = metrics::latency(1, n, k, scheme);
                for &t in &self.outer_t {
                    for big_n in 2 * t + 1..=max_n {
                        if !self.outer_n.is_empty() && !self.outer_n.contains(&big_n) {
                            continue;
                        }
                        let outer = OuterCode { n: big_n, t, bits: self.outer_bits };
                        if self.bucket(outer.rate() * r_in).is_none() {
                            continue;
                        }
                        let g = gcd(slots, big_n);
                        let (m0, mm0) = (big_n / g, slots / g);
                        let multiples = (cap / (m0 as u64 * per_word)) as usize;
                        if multiples > 0 {
                            out.push(Family {
                                outer,
                                inner,
                                scheme,
                                base_outer_words: mm0,
                                base_inner_words: m0,
                                multiples,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    /// Every configuration of [`SearchSpace::families`], expanded.
    pub fn enumerate(&self) -> Vec<ConcatConfig> {
        self.families().iter().flat_map(Family::configs).collect()
    }
}

/// Configurations sharing outer code, inner code and scheme.
///
/// `M` and `m` run over the multiples `r (M0, m0)`, `r = 1..=multiples`, of
/// the smallest balanced pair; `multiples` is the largest `r` within the
/// latency cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Family {
    pub outer: OuterCode,
    pub inner: InnerCode,
    pub scheme: Scheme,
    pub base_outer_words: usize,
    pub base_inner_words: usize,
    pub multiples: usize,
}

impl Family {
    pub fn configs(&self) -> impl Iterator<Item = ConcatConfig> + '_ {
        (1..=self.multiples).map(move |r| ConcatConfig {
            outer: self.outer,
            outer_words: r * self.base_outer_words,
            inner: self.inner,
            inner_words: r * self.base_inner_words,
            scheme: self.scheme,
        })
    }
}

/// An evaluated configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub config: ConcatConfig,
    pub rate: f64,
    pub required_snr_db: f64,
    pub gap_db: f64,
    pub complexity: f64,
    pub latency: u64,
    /// The required SNR rests on a grid entry without observed errors.
    pub low_confidence: bool,
}

/// Evaluates one configuration.
pub fn evaluate<S: DistSource + ?Sized>(config: &ConcatConfig, eval: &GridEvaluator<'_, S>, target: f64) -> Result<ParetoPoint> {
    let complexity = metrics::complexity_score(config)?;
    let latency = config.latency();
    let rate = config.rate();
    let req = eval.required_snr(config, target)?;
    Ok(ParetoPoint {
        config: *config,
        rate,
        required_snr_db: req.snr_db,
        gap_db: metrics::csl_gap(req.snr_db, rate)?,
        complexity,
        latency,
        low_confidence: req.low_confidence,
    })
}

/// Evaluates every configuration in parallel; order follows the input.
pub fn evaluate_all<S: DistSource + ?Sized>(
    configs: &[ConcatConfig],
    src: &S,
    model: &FerModel,
) -> Vec<(ConcatConfig, Result<ParetoPoint>)> {
    let eval = GridEvaluator::new(model, src);
    configs.par_iter().map(|c| (*c, evaluate(c, &eval, TARGET_FER))).collect()
}

/// Sweep settings beyond the parameter grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchOptions {
    pub target_fer: f64,
    /// Keep points whose required SNR rests on an error-free grid entry.
    pub include_low_confidence: bool,
    /// Complexity ceiling for the best-gap-per-rate summary.
    pub summary_max_complexity: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { target_fer: TARGET_FER, include_low_confidence: false, summary_max_complexity: 40.0 }
    }
}

/// Fronts and summaries of a sweep.
#[derive(Clone, Debug, Default, Serialize)]
pub struct SearchReport {
    pub evaluated: usize,
    /// Points left out of the fronts for low confidence.
    pub low_confidence: usize,
    /// Configurations that could not be evaluated, by error category.
    pub skipped: BTreeMap<String, usize>,
    /// Front over (gap, complexity, latency).
    pub front: Vec<ParetoPoint>,
    /// Front over (gap, complexity) per latency cap.
    pub cap_fronts: Vec<(u64, Vec<ParetoPoint>)>,
    pub best_by_rate: Vec<RateGapPoint>,
}

impl SearchReport {
    pub fn front_for_cap(&self, cap: u64) -> Option<&[ParetoPoint]> {
        self.cap_fronts.iter().find(|(c, _)| *c == cap).map(|(_, f)| f.as_slice())
    }
}

struct Accumulator<'s> {
    space: &'s SearchSpace,
    opts: &'s SearchOptions,
    report: SearchReport,
    pending: Vec<ParetoPoint>,
    best: BTreeMap<(usize, u64), ParetoPoint>,
}

impl Accumulator<'_> {
    fn push(&mut self, config: ConcatConfig, r: Result<ParetoPoint>) {
        match r {
            Err(e) => *self.report.skipped.entry(e.category().to_string()).or_insert(0) += 1,
            Ok(p) => {
                self.report.evaluated += 1;
                if p.low_confidence && !self.opts.include_low_confidence {
                    self.report.low_confidence += 1;
                    return;
                }
                debug_assert_eq!(p.config, config);
                self.offer_best(&p);
                self.pending.push(p);
                if self.pending.len() >= 1 << 14 {
                    self.compact();
                }
            }
        }
    }

    fn offer_best(&mut self, p: &ParetoPoint) {
        if p.complexity > self.opts.summary_max_complexity {
            return;
        }
        let Some(rate_idx) = self.space.rates.iter().position(|&r| self.space.bucket(p.rate) == Some(r)) else {
            return;
        };
        for &cap in &self.space.latency_caps {
            if p.latency > cap {
                continue;
            }
            let slot = self.best.entry((rate_idx, cap)).or_insert(*p);
            if p.gap_db < slot.gap_db {
                *slot = *p;
            }
        }
    }

    fn compact(&mut self) {
        let pending = std::mem::take(&mut self.pending);
        let mut all = std::mem::take(&mut self.report.front);
        all.extend_from_slice(&pending);
        self.report.front = pareto_front(&all);
        for (cap, front) in self.report.cap_fronts.iter_mut() {
            let mut all = std::mem::take(front);
            all.extend(pending.iter().filter(|p| p.latency <= *cap));
            *front = front_under_cap(&all, *cap);
        }
    }

    fn finish(mut self) -> SearchReport {
        self.compact();
        self.report.front.sort_by(|a, b| a.complexity.total_cmp(&b.complexity).then(a.gap_db.total_cmp(&b.gap_db)));
        self.report.best_by_rate = self
            .best
            .iter()
            .map(|(&(ri, cap), p)| RateGapPoint { rate: self.space.rates[ri], cap, gap_db: p.gap_db, complexity: p.complexity })
            .collect();
        self.report
    }
}

/// Evaluates the whole space and extracts its fronts without keeping every
/// point in memory.
pub fn run_search<S: DistSource + ?Sized>(
    space: &SearchSpace,
    src: &S,
    model: &FerModel,
    opts: &SearchOptions,
) -> SearchReport {
    let eval = GridEvaluator::new(model, src);
    let mut caps = space.latency_caps.clone();
    caps.sort_unstable();
    caps.dedup();
    let mut acc = Accumulator {
        space,
        opts,
        report: SearchReport { cap_fronts: caps.into_iter().map(|c| (c, Vec::new())).collect(), ..Default::default() },
        pending: Vec::new(),
        best: BTreeMap::new(),
    };
    for chunk in space.families().chunks(256) {
        let results: Vec<Vec<(ConcatConfig, Result<ParetoPoint>)>> = chunk
            .par_iter()
            .map(|f| f.configs().map(|c| (c, evaluate(&c, &eval, opts.target_fer))).collect())
            .collect();
        for (c, r) in results.into_iter().flatten() {
            acc.push(c, r);
        }
    }
    acc.finish()
}

/// Indices of the points not dominated under minimization of every key.
pub fn pareto_indices(keys: &[Vec<f64>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| {
        keys[a]
            .iter()
            .zip(&keys[b])
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    // In lexicographic order a point can only be dominated by an earlier one,
    // and a dominated earlier point is itself dominated by a kept one.
    let mut kept: Vec<usize> = Vec::new();
    for &i in &order {
        let dominated = kept.iter().any(|&q| {
            keys[q].iter().zip(&keys[i]).all(|(a, b)| a <= b) && keys[q].iter().zip(&keys[i]).any(|(a, b)| a < b)
        });
        let duplicate = kept.iter().any(|&q| keys[q] == keys[i]);
        if !dominated && !duplicate {
            kept.push(i);
        }
    }
    kept.sort_unstable();
    kept
}

/// Front over (gap, complexity, latency).
pub fn pareto_front(points: &[ParetoPoint]) -> Vec<ParetoPoint> {
    let keys: Vec<Vec<f64>> = points.iter().map(|p| vec![p.gap_db, p.complexity, p.latency as f64]).collect();
    pareto_indices(&keys).into_iter().map(|i| points[i]).collect()
}

/// Front over (gap, complexity) among points within a latency cap.
pub fn front_under_cap(points: &[ParetoPoint], cap: u64) -> Vec<ParetoPoint> {
    let within: Vec<ParetoPoint> = points.iter().copied().filter(|p| p.latency <= cap).collect();
    let keys: Vec<Vec<f64>> = within.iter().map(|p| vec![p.gap_db, p.complexity]).collect();
    let mut front: Vec<ParetoPoint> = pareto_indices(&keys).into_iter().map(|i| within[i]).collect();
    front.sort_by(|a, b| a.complexity.total_cmp(&b.complexity).then(a.gap_db.total_cmp(&b.gap_db)));
    front
}

/// Best gap at complexity at most `max_complexity`, per rate bucket and cap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateGapPoint {
    pub rate: f64,
    pub cap: u64,
    pub gap_db: f64,
    pub complexity: f64,
}

pub fn best_gap_by_rate(space: &SearchSpace, points: &[ParetoPoint], max_complexity: f64) -> Vec<RateGapPoint> {
    let mut out = Vec::new();
    for &cap in &space.latency_caps {
        for &rate in &space.rates {
            let best = points
                .iter()
                .filter(|p| p.latency <= cap && p.complexity <= max_complexity)
                .filter(|p| space.bucket(p.rate) == Some(rate))
                .min_by(|a, b| a.gap_db.total_cmp(&b.gap_db));
            if let Some(p) = best {
                out.push(RateGapPoint { rate, cap, gap_db: p.gap_db, complexity: p.complexity });
            }
        }
    }
    out
}

pub const CSV_HEADER: [&str; 14] =
    ["M", "N", "T", "m", "n", "b", "t", "J", "Lat.", "Compl.", "Gap", "Type", "Rate", "ReqSNR"];

/// Writes points as CSV with the fixed column order of [`CSV_HEADER`].
pub fn write_csv<W: Write>(out: W, points: &[ParetoPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for p in points {
        let c = &p.config;
        let dash = || "-".to_string();
        w.write_record([
            c.outer_words.to_string(),
            c.outer.n.to_string(),
            c.outer.t.to_string(),
            c.inner_words.to_string(),
            c.inner.n().to_string(),
            c.inner.b().map_or_else(dash, |b| b.to_string()),
            c.inner.t().to_string(),
            c.inner.test_bits().map_or_else(dash, |j| j.to_string()),
            p.latency.to_string(),
            format!("{:.2}", p.complexity),
            format!("{:.3}", p.gap_db),
            c.scheme.to_string(),
            format!("{:.4}", p.rate),
            format!("{:.3}", p.required_snr_db),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}
