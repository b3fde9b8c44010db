//! End-to-end Monte-Carlo simulation of a concatenated system: RS encoding,
//! card-dealing interleaving, inner coded modulation over AWGN, inner soft
//! decoding, deinterleaving and RS decoding.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codecs::RsCode;
use crate::config::ConcatConfig;
use crate::dist_db::{u_max, WeightCounts};
use crate::error::{Error, Result};
use crate::gf::Element;
use crate::interleaver::AdjacencyMatrix;
use crate::link::InnerLink;
use crate::modem::ChannelModel;
use crate::seed;

/// Stopping rule for full-chain runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChainBudget {
    pub min_frames: u64,
    pub min_frame_errors: u64,
    pub max_frames: u64,
    pub batch: u64,
}

impl Default for ChainBudget {
    fn default() -> Self {
        ChainBudget { min_frames: 1000, min_frame_errors: 100, max_frames: 1_000_000, batch: 50 }
    }
}

/// Counters accumulated over simulated frames.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainStats {
    pub snr_db: f64,
    pub frames: u64,
    /// Frames with at least one RS word holding more than `T` symbol errors.
    pub frame_errors: u64,
    /// RS words that left the RS decoder wrong.
    pub word_errors: u64,
    pub bit_errors: u64,
    pub info_bits: u64,
    /// Inner error weights `U` of every inner word.
    pub u_counts: WeightCounts,
    /// Histograms of strip error counts `V`, by strip length.
    pub strip_counts: BTreeMap<usize, Vec<u64>>,
}

impl ChainStats {
    fn empty(config: &ConcatConfig, snr_db: f64) -> ChainStats {
        ChainStats {
            snr_db,
            frames: 0,
            frame_errors: 0,
            word_errors: 0,
            bit_errors: 0,
            info_bits: 0,
            u_counts: WeightCounts::zeros(u_max(&config.inner_key())),
            strip_counts: BTreeMap::new(),
        }
    }

    pub fn fer(&self) -> f64 {
        self.frame_errors as f64 / self.frames.max(1) as f64
    }

    pub fn ber(&self) -> f64 {
        self.bit_errors as f64 / self.info_bits.max(1) as f64
    }

    fn add(&mut self, o: &ChainStats) -> Result<()> {
        self.frames += o.frames;
        self.frame_errors += o.frame_errors;
        self.word_errors += o.word_errors;
        self.bit_errors += o.bit_errors;
        self.info_bits += o.info_bits;
        self.u_counts.add(&o.u_counts)?;
        for (l, h) in &o.strip_counts {
            let e = self.strip_counts.entry(*l).or_insert_with(|| vec![0; h.len()]);
            for (a, b) in e.iter_mut().zip(h) {
                *a += b;
            }
        }
        Ok(())
    }
}

/// Reusable simulator for one configuration.
pub struct Chain {
    config: ConcatConfig,
    rs: RsCode,
    adj: AdjacencyMatrix,
    link: InnerLink,
}

impl Chain {
    pub fn new(config: ConcatConfig) -> Result<Chain> {
        config.validate()?;
        let o = config.outer;
        Ok(Chain {
            config,
            rs: RsCode::with_radius(o.n, o.t, o.bits)?,
            adj: config.adjacency()?,
            link: InnerLink::new(config.inner_key())?,
        })
    }

    pub fn config(&self) -> &ConcatConfig {
        &self.config
    }

    /// Simulates one frame, adding its outcome to `stats`.
    pub fn run_frame<R: Rng + ?Sized>(&self, ch: &ChannelModel, rng: &mut R, stats: &mut ChainStats) -> Result<()> {
        let o = self.config.outer;
        let size = 1u32 << o.bits;
        let words: Vec<Vec<Element>> = (0..self.config.outer_words)
            .map(|_| {
                let info: Vec<Element> = (0..o.k()).map(|_| rng.random_range(0..size) as Element).collect();
                self.rs.encode(&info)
            })
            .collect::<Result<_>>()?;
        let sent = self.adj.interleave(&words)?;
        let mut got = Vec::with_capacity(sent.len());
        for p in &sent {
            let r = self.link.transmit(p, ch, rng)?;
            stats.u_counts.record(self.link.symbol_errors(p, &r));
            got.push(r);
        }
        let received = self.adj.deinterleave(&got)?;

        let mut strip_err = vec![0usize; self.config.outer_words * self.config.inner_words];
        let mut frame_error = false;
        for (i, (tx, rx)) in words.iter().zip(&received).enumerate() {
            let mut y = 0;
            for (j, (a, b)) in tx.iter().zip(rx).enumerate() {
                if a != b {
                    y += 1;
                    let (w, _) = self.adj.location(i, j);
                    strip_err[i * self.config.inner_words + w] += 1;
                }
            }
            if y > o.t {
                frame_error = true;
            }
            if y > 0 {
                let decoded = if y > o.t { self.rs.decode(rx)?.info } else { tx[..o.k()].to_vec() };
                let wrong: u32 = decoded.iter().zip(&tx[..o.k()]).map(|(a, b)| (a ^ b).count_ones()).sum();
                if wrong > 0 {
                    stats.word_errors += 1;
                    stats.bit_errors += wrong as u64;
                }
            }
        }
        for i in 0..self.config.outer_words {
            for w in 0..self.config.inner_words {
                let l = self.adj.get(i, w);
                if l > 0 {
                    let h = stats.strip_counts.entry(l).or_insert_with(|| vec![0; l + 1]);
                    h[strip_err[i * self.config.inner_words + w]] += 1;
                }
            }
        }
        stats.frames += 1;
        stats.frame_errors += frame_error as u64;
        stats.info_bits += (self.config.outer_words * o.k() * o.bits as usize) as u64;
        Ok(())
    }

    /// Runs batches until the budget is met. Batch `b` is seeded from
    /// `(seed, snr, b)`, so results do not depend on the thread count.
    pub fn simulate(&self, snr_db: f64, budget: &ChainBudget, seed: u64) -> Result<ChainStats> {
        if budget.batch == 0 || budget.max_frames == 0 {
            return Err(Error::InvalidParameter(format!("bad budget {budget:?}")));
        }
        let ch = ChannelModel::from_snr_db(snr_db)?;
        let snr_bits = (snr_db * 1000.0).round() as i64 as u64;
        let done = |s: &ChainStats| {
            s.frames >= budget.max_frames
                || (s.frames >= budget.min_frames && s.frame_errors >= budget.min_frame_errors)
        };
        let mut total = ChainStats::empty(&self.config, snr_db);
        let mut next = 0u64;
        let round = rayon::current_num_threads().max(1) as u64;
        while !done(&total) {
            let results: Vec<Result<ChainStats>> = (next..next + round)
                .into_par_iter()
                .map(|b| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(seed, &[snr_bits, b]));
                    let mut s = ChainStats::empty(&self.config, snr_db);
                    for _ in 0..budget.batch {
                        self.run_frame(&ch, &mut rng, &mut s)?;
                    }
                    Ok(s)
                })
                .collect();
            for r in results {
                total.add(&r?)?;
                if done(&total) {
                    break;
                }
            }
            next += round;
        }
        Ok(total)
    }
}
