//! Soft-decision inner decoding: Chase-II over (extended) BCH codes and
//! Wagner decoding of single-parity-check codes.
//!
//! LLR convention: `l = log P(bit = 0 | y) - log P(bit = 1 | y)`; the hard
//! decision is 1 iff `l < 0`, so `l = 0` decides 0.

use crate::codecs::{BchCode, SpcCode};
use crate::error::{check_len, Error, Result};

/// Per-bit LLRs of one inner codeword together with their hard decisions.
#[derive(Clone, Debug, PartialEq)]
pub struct LlrFrame {
    llrs: Vec<f64>,
    hard: Vec<u8>,
}

impl LlrFrame {
    pub fn new(llrs: Vec<f64>) -> LlrFrame {
        let hard = llrs.iter().map(|&l| (l < 0.0) as u8).collect();
        LlrFrame { llrs, hard }
    }

    pub fn len(&self) -> usize {
        self.llrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.llrs.is_empty()
    }

    pub fn llrs(&self) -> &[f64] {
        &self.llrs
    }

    pub fn hard(&self) -> &[u8] {
        &self.hard
    }

    /// Reliability `|l_i|`.
    #[inline]
    pub fn reliability(&self, i: usize) -> f64 {
        self.llrs[i].abs()
    }
}

/// Chase-II parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChaseConfig {
    pub test_bits: usize,
}

/// Positions of the `j` least reliable bits, ordered from least reliable;
/// ties go to the lower index.
pub fn least_reliable(frame: &LlrFrame, j: usize) -> Result<Vec<usize>> {
    if j > frame.len() {
        return Err(Error::InvalidParameter(format!(
            "{j} test positions requested from a {}-bit frame",
            frame.len()
        )));
    }
    // Running sorted list of the j smallest (reliability, index) pairs.
    let mut list: Vec<(f64, usize)> = Vec::with_capacity(j + 1);
    if j == 0 {
        return Ok(Vec::new());
    }
    for i in 0..frame.len() {
        let r = frame.reliability(i);
        if list.len() == j && r >= list[j - 1].0 {
            continue;
        }
        let at = list.partition_point(|&(lr, _)| lr <= r);
        list.insert(at, (r, i));
        list.truncate(j);
    }
    Ok(list.into_iter().map(|(_, i)| i).collect())
}

/// Result of a Chase decoding run.
#[derive(Clone, Debug, PartialEq)]
pub struct ChaseOutcome {
    /// Decoded information bits (or the hard-decision ones if every attempt
    /// failed).
    pub info: Vec<u8>,
    /// Analog weight of the selected codeword; `None` if every attempt failed.
    pub weight: Option<f64>,
    /// Number of hard-decision decoding attempts made (zero when the hard
    /// decisions already form a codeword).
    pub attempts: usize,
}

/// Chase-II decoder bound to one BCH code.
///
/// Test patterns are visited in Gray order so that consecutive syndromes
/// differ by a single precomputed column. For extended codes with `t = 1`,
/// only test inputs of odd overall parity are decoded: an even-parity input
/// is either a codeword (and then a neighbouring odd-parity input decodes to
/// the same codeword) or a detected double error.
#[derive(Clone, Debug)]
pub struct ChaseDecoder<'a> {
    code: &'a BchCode,
    test_bits: usize,
    odd_parity_only: bool,
}

impl<'a> ChaseDecoder<'a> {
    pub fn new(code: &'a BchCode, cfg: ChaseConfig) -> Result<ChaseDecoder<'a>> {
        if cfg.test_bits == 0 || cfg.test_bits > code.n() || cfg.test_bits > 16 {
            return Err(Error::InvalidParameter(format!(
                "Chase test bits {} unsupported for n = {}",
                cfg.test_bits,
                code.n()
            )));
        }
        Ok(ChaseDecoder {
            code,
            test_bits: cfg.test_bits,
            odd_parity_only: code.is_extended() && code.t() == 1,
        })
    }

    /// Decodes every test pattern, even when the odd-parity shortcut applies.
    pub fn without_parity_shortcut(mut self) -> Self {
        self.odd_parity_only = false;
        self
    }

    pub fn decode(&self, frame: &LlrFrame) -> Result<ChaseOutcome> {
        let code = self.code;
        check_len(code.n(), frame.len())?;
        let x = frame.hard();
        if code.is_codeword(x) {
            // No candidate can beat analog weight zero.
            return Ok(ChaseOutcome { info: x[..code.k()].to_vec(), weight: Some(0.0), attempts: 0 });
        }
        let positions = least_reliable(frame, self.test_bits)?;
        let columns: Vec<&[u16]> = positions.iter().map(|&p| code.syndrome_column(p)).collect();
        let mut synd = code.odd_syndromes(x);
        let mut parity = x.iter().fold(0u8, |a, &b| a ^ b);

        let mut gray = 0usize;
        let mut attempts = 0;
        let mut best: Option<(f64, usize, Vec<usize>)> = None;
        for step in 0..(1usize << self.test_bits) {
            if step > 0 {
                let bit = step.trailing_zeros() as usize;
                gray ^= 1 << bit;
                for (s, c) in synd.iter_mut().zip(columns[bit]) {
                    *s ^= c;
                }
                parity ^= 1;
            }
            if self.odd_parity_only && parity == 0 {
                continue;
            }
            attempts += 1;
            let Some(corr) = code.locate(&synd, parity) else {
                continue;
            };
            let mut w = 0.0;
            for (b, &p) in positions.iter().enumerate() {
                if gray >> b & 1 == 1 {
                    w += frame.reliability(p);
                }
            }
            for &p in &corr {
                let in_pattern = positions
                    .iter()
                    .position(|&q| q == p)
                    .is_some_and(|b| gray >> b & 1 == 1);
                if in_pattern {
                    w -= frame.reliability(p);
                } else {
                    w += frame.reliability(p);
                }
            }
            if best.as_ref().is_none_or(|(bw, _, _)| w < *bw) {
                best = Some((w, gray, corr));
            }
        }

        let k = code.k();
        let mut info = x[..k].to_vec();
        let weight = match best {
            None => None,
            Some((w, pattern, corr)) => {
                for (b, &p) in positions.iter().enumerate() {
                    if pattern >> b & 1 == 1 && p < k {
                        info[p] ^= 1;
                    }
                }
                for &p in &corr {
                    if p < k {
                        info[p] ^= 1;
                    }
                }
                Some(w.max(0.0))
            }
        };
        Ok(ChaseOutcome { info, weight, attempts })
    }
}

/// Chase-II decoding; returns the `k` decoded information bits.
pub fn chase_decode(frame: &LlrFrame, code: &BchCode, cfg: ChaseConfig) -> Result<Vec<u8>> {
    Ok(ChaseDecoder::new(code, cfg)?.decode(frame)?.info)
}

/// Wagner decoding of SPC(n, n-1); returns the `n - 1` information bits.
pub fn wagner_decode(frame: &LlrFrame, code: &SpcCode) -> Result<Vec<u8>> {
    let n = code.n();
    check_len(n, frame.len())?;
    let x = frame.hard();
    let mut info = x[..n - 1].to_vec();
    let parity = x.iter().fold(0u8, |a, &b| a ^ b);
    if parity == 1 {
        let mut q = 0;
        for i in 1..n {
            if frame.reliability(i) < frame.reliability(q) {
                q = i;
            }
        }
        if q != n - 1 {
            info[q] ^= 1;
        }
    }
    Ok(info)
}
