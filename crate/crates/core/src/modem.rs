//! PAM4 mapping and demapping for BICM and MLC frames, the AWGN channel, and
//! exact bit LLRs.
//!
//! Levels are `{-3, -1, +1, +3}` with average energy 5, and the SNR is
//! `10 log10(5 / sigma^2)`. Within a bit pair the first bit is the MSB.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::Scheme;
use crate::error::{check_len, Error, Result};
use crate::inner_sd::LlrFrame;

/// Average energy of a uniformly used PAM4 alphabet.
pub const SYMBOL_ENERGY: f64 = 5.0;

pub const LEVELS: [f64; 4] = [-3.0, -1.0, 1.0, 3.0];

/// Bit-pair to level labeling.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Labeling {
    /// 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3.
    Gray,
    /// 00 -> -3, 01 -> -1, 10 -> +1, 11 -> +3.
    Natural,
}

impl Labeling {
    /// Index into [`LEVELS`] of the pair `(msb, lsb)`.
    #[inline]
    pub fn index(self, msb: u8, lsb: u8) -> usize {
        let (msb, lsb) = ((msb & 1) as usize, (lsb & 1) as usize);
        match self {
            Labeling::Gray => 2 * msb + (msb ^ lsb),
            Labeling::Natural => 2 * msb + lsb,
        }
    }

    #[inline]
    pub fn level(self, msb: u8, lsb: u8) -> f64 {
        LEVELS[self.index(msb, lsb)]
    }

    /// `(msb, lsb)` carried by level index `a`.
    #[inline]
    pub fn bits(self, a: usize) -> (u8, u8) {
        let msb = (a >> 1) as u8;
        let low = (a & 1) as u8;
        match self {
            Labeling::Gray => (msb, msb ^ low),
            Labeling::Natural => (msb, low),
        }
    }
}

/// Real AWGN channel with per-sample noise standard deviation `sigma`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelModel {
    sigma: f64,
    snr_db: f64,
}

impl ChannelModel {
    pub fn from_snr_db(snr_db: f64) -> Result<ChannelModel> {
        if !snr_db.is_finite() {
            return Err(Error::InvalidParameter(format!("SNR {snr_db} dB")));
        }
        let sigma = (SYMBOL_ENERGY / 10f64.powf(snr_db / 10.0)).sqrt();
        Ok(ChannelModel { sigma, snr_db })
    }

    pub fn from_sigma(sigma: f64) -> Result<ChannelModel> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise deviation {sigma}")));
        }
        let snr_db = 10.0 * (SYMBOL_ENERGY / (sigma * sigma)).log10();
        Ok(ChannelModel { sigma, snr_db })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn variance(&self) -> f64 {
        self.sigma * self.sigma
    }

    pub fn snr_db(&self) -> f64 {
        self.snr_db
    }
}

/// Where one bit of a PAM4 pair comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BitSource {
    /// Inner codeword bit at this position.
    Coded(usize),
    /// Unprotected (MLC upper level) bit at this position.
    Unprotected(usize),
    /// Frozen zero pad.
    Zero,
}

/// One PAM4 symbol of a frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SymbolSlot {
    pub msb: BitSource,
    pub lsb: BitSource,
    pub labeling: Labeling,
}

/// Bit-to-symbol layout of one inner codeword (plus its unprotected bits in
/// MLC).
///
/// BICM pairs consecutive codeword bits `(c[2s], c[2s+1])`, Gray labeled.
/// MLC pairs unprotected bit `s` (MSB) with information bit `s` (LSB) under
/// the natural labeling, then Gray-maps the parity bits pairwise. An odd
/// leftover parity bit is paired with a frozen zero LSB.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameLayout {
    scheme: Scheme,
    n: usize,
    k: usize,
    slots: Vec<SymbolSlot>,
}

fn gray_pairs(slots: &mut Vec<SymbolSlot>, from: usize, n: usize) {
    let mut i = from;
    while i < n {
        let lsb = if i + 1 < n { BitSource::Coded(i + 1) } else { BitSource::Zero };
        slots.push(SymbolSlot { msb: BitSource::Coded(i), lsb, labeling: Labeling::Gray });
        i += 2;
    }
}

impl FrameLayout {
    pub fn new(scheme: Scheme, n: usize, k: usize) -> Result<FrameLayout> {
        if k == 0 || k > n {
            return Err(Error::InvalidParameter(format!("inner dimensions n={n}, k={k}")));
        }
        let mut slots = Vec::new();
        match scheme {
            Scheme::Bicm => {
                if k % 2 != 0 {
                    return Err(Error::InvalidParameter(format!("BICM needs even k, got {k}")));
                }
                gray_pairs(&mut slots, 0, n);
            }
            Scheme::Mlc => {
                slots.extend((0..k).map(|s| SymbolSlot {
                    msb: BitSource::Unprotected(s),
                    lsb: BitSource::Coded(s),
                    labeling: Labeling::Natural,
                }));
                gray_pairs(&mut slots, k, n);
            }
        }
        Ok(FrameLayout { scheme, n, k, slots })
    }

    pub fn bicm(n: usize, k: usize) -> Result<FrameLayout> {
        FrameLayout::new(Scheme::Bicm, n, k)
    }

    pub fn mlc(n: usize, k: usize) -> Result<FrameLayout> {
        FrameLayout::new(Scheme::Mlc, n, k)
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn slots(&self) -> &[SymbolSlot] {
        &self.slots
    }

    pub fn num_symbols(&self) -> usize {
        self.slots.len()
    }

    /// Number of unprotected bits carried (k for MLC, 0 for BICM).
    pub fn unprotected_len(&self) -> usize {
        match self.scheme {
            Scheme::Bicm => 0,
            Scheme::Mlc => self.k,
        }
    }

    /// Symbol index of the zero pad, if any.
    pub fn zero_pad(&self) -> Option<usize> {
        self.slots.iter().position(|s| s.lsb == BitSource::Zero)
    }
}

#[inline]
fn pick(src: BitSource, coded: &[u8], unprotected: &[u8]) -> u8 {
    match src {
        BitSource::Coded(i) => coded[i],
        BitSource::Unprotected(i) => unprotected[i],
        BitSource::Zero => 0,
    }
}

fn map_into(layout: &FrameLayout, coded: &[u8], unprotected: &[u8], out: &mut Vec<f64>) {
    out.extend(layout.slots.iter().map(|s| {
        s.labeling.level(pick(s.msb, coded, unprotected), pick(s.lsb, coded, unprotected))
    }));
}

/// Maps a BICM inner codeword to `ceil(n/2)` levels.
pub fn map_bicm(codeword: &[u8], layout: &FrameLayout) -> Result<Vec<f64>> {
    if layout.scheme != Scheme::Bicm {
        return Err(Error::InvalidParameter("map_bicm needs a BICM layout".into()));
    }
    check_len(layout.n, codeword.len())?;
    let mut out = Vec::with_capacity(layout.num_symbols());
    map_into(layout, codeword, &[], &mut out);
    Ok(out)
}

/// Maps an MLC inner codeword and its `k` unprotected bits to
/// `k + ceil((n-k)/2)` levels.
pub fn map_mlc(inner_cw: &[u8], unprotected: &[u8], layout: &FrameLayout) -> Result<Vec<f64>> {
    if layout.scheme != Scheme::Mlc {
        return Err(Error::InvalidParameter("map_mlc needs an MLC layout".into()));
    }
    check_len(layout.n, inner_cw.len())?;
    check_len(layout.k, unprotected.len())?;
    let mut out = Vec::with_capacity(layout.num_symbols());
    map_into(layout, inner_cw, unprotected, &mut out);
    Ok(out)
}

/// Adds seeded white Gaussian noise.
pub fn awgn(symbols: &[f64], ch: &ChannelModel, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = symbols.to_vec();
    add_noise(&mut out, ch, &mut rng);
    out
}

/// Adds noise in place from a caller-owned generator.
pub fn add_noise<R: Rng + ?Sized>(samples: &mut [f64], ch: &ChannelModel, rng: &mut R) {
    for y in samples {
        let z: f64 = rng.sample(StandardNormal);
        *y += ch.sigma * z;
    }
}

#[inline]
fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Exact LLR of one bit of the pair at level metrics `metric[a] = -(y-a)^2/2s^2`.
/// `which` selects the MSB (true) or LSB; `other_zero` restricts the partner
/// bit to 0.
#[inline]
fn pair_llr(metric: &[f64; 4], labeling: Labeling, msb: bool, other_zero: bool) -> f64 {
    let mut num = f64::NEG_INFINITY;
    let mut den = f64::NEG_INFINITY;
    for (a, &m) in metric.iter().enumerate() {
        let (hi, lo) = labeling.bits(a);
        let (bit, other) = if msb { (hi, lo) } else { (lo, hi) };
        if other_zero && other != 0 {
            continue;
        }
        if bit == 0 {
            num = log_add(num, m);
        } else {
            den = log_add(den, m);
        }
    }
    num - den
}

/// Exact LLRs of the `n` inner-codeword bits of one frame.
///
/// Each bit marginalizes over its partner bit, except that a partner known
/// to be the zero pad is conditioned on.
pub fn bit_llrs(samples: &[f64], layout: &FrameLayout, ch: &ChannelModel) -> Result<LlrFrame> {
    check_len(layout.num_symbols(), samples.len())?;
    let mut llrs = vec![0.0; layout.n];
    let inv = 1.0 / (2.0 * ch.variance());
    for (slot, &y) in layout.slots.iter().zip(samples) {
        let metric = LEVELS.map(|a| -(y - a) * (y - a) * inv);
        if let BitSource::Coded(i) = slot.msb {
            llrs[i] = pair_llr(&metric, slot.labeling, true, slot.lsb == BitSource::Zero);
        }
        if let BitSource::Coded(i) = slot.lsb {
            llrs[i] = pair_llr(&metric, slot.labeling, false, slot.msb == BitSource::Zero);
        }
    }
    Ok(LlrFrame::new(llrs))
}

/// Conditional MSB decision under the natural labeling given the LSB:
/// LSB 0 selects `{-3, +1}` (threshold -1), LSB 1 selects `{-1, +3}`
/// (threshold +1). A sample on the threshold decides 0.
#[inline]
pub fn msd_bit(y: f64, lsb: u8) -> u8 {
    let threshold = if lsb & 1 == 0 { -1.0 } else { 1.0 };
    (y > threshold) as u8
}

/// Demaps the `k` unprotected MSBs of an MLC frame from the decoded LSBs.
pub fn msd_demap(samples: &[f64], decoded_lsbs: &[u8], layout: &FrameLayout) -> Result<Vec<u8>> {
    if layout.scheme != Scheme::Mlc {
        return Err(Error::InvalidParameter("msd_demap needs an MLC layout".into()));
    }
    check_len(layout.num_symbols(), samples.len())?;
    check_len(layout.k, decoded_lsbs.len())?;
    Ok(samples[..layout.k].iter().zip(decoded_lsbs).map(|(&y, &l)| msd_bit(y, l)).collect())
}
