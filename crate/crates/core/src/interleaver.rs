//! Card-dealing symbol interleaver between `M` outer RS words and `m` inner
//! codewords.
//!
//! Symbol `j` of RS word `i` has global index `g = N i + j`; it goes to inner
//! word `g mod m` at RS-symbol slot `g div m`. Slots fill inner words in
//! increasing `i`, so the symbols an RS word places in one inner word form a
//! contiguous strip.

use std::collections::BTreeMap;

use crate::config::Scheme;
use crate::error::{check_len, Error, Result};
use crate::gf::Element;

/// Information carried by one inner codeword.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InnerPayload {
    /// The `k` inner information bits.
    pub coded: Vec<u8>,
    /// The `k` unprotected MSBs (MLC only; empty for BICM).
    pub unprotected: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdjacencyMatrix {
    outer_words: usize,
    outer_len: usize,
    inner_words: usize,
    bits: u32,
    k: usize,
    scheme: Scheme,
    slots: usize,
    counts: Vec<u32>,
    offsets: Vec<u32>,
}

/// Number of RS-symbol slots in one inner word, or the violated condition.
pub fn slots_per_word(bits: u32, k: usize, scheme: Scheme) -> Result<usize> {
    let b = bits as usize;
    if b == 0 || b % 2 != 0 {
        return Err(Error::Infeasible(format!("RS symbol size {b} is not even")));
    }
    match scheme {
        Scheme::Bicm if k % b == 0 => Ok(k / b),
        Scheme::Bicm => Err(Error::Infeasible(format!("BICM needs B | k, got B={b}, k={k}"))),
        Scheme::Mlc if k % (b / 2) == 0 => Ok(2 * k / b),
        Scheme::Mlc => Err(Error::Infeasible(format!("MLC needs B/2 | k, got B={b}, k={k}"))),
    }
}

impl AdjacencyMatrix {
    pub fn build(
        outer_words: usize,
        outer_len: usize,
        inner_words: usize,
        bits: u32,
        k: usize,
        scheme: Scheme,
    ) -> Result<AdjacencyMatrix> {
        if outer_words == 0 || outer_len == 0 || inner_words == 0 {
            return Err(Error::Infeasible("empty frame".into()));
        }
        let slots = slots_per_word(bits, k, scheme)?;
        if outer_words * outer_len != inner_words * slots {
            return Err(Error::Infeasible(format!(
                "balance: M N = {} but m x slots = {}",
                outer_words * outer_len,
                inner_words * slots
            )));
        }
        let (mm, m) = (outer_words, inner_words);
        let mut counts = vec![0u32; mm * m];
        let mut offsets = vec![0u32; mm * m];
        for i in 0..mm {
            for j in 0..outer_len {
                let g = outer_len * i + j;
                let (w, s) = (g % m, g / m);
                let c = &mut counts[i * m + w];
                if *c == 0 {
                    offsets[i * m + w] = s as u32;
                }
                *c += 1;
            }
        }
        Ok(AdjacencyMatrix {
            outer_words,
            outer_len,
            inner_words,
            bits,
            k,
            scheme,
            slots,
            counts,
            offsets,
        })
    }

    pub fn outer_words(&self) -> usize {
        self.outer_words
    }

    pub fn outer_len(&self) -> usize {
        self.outer_len
    }

    pub fn inner_words(&self) -> usize {
        self.inner_words
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// RS-symbol slots per inner word.
    pub fn slots_per_word(&self) -> usize {
        self.slots
    }

    /// `L[i][j]`: symbols of RS word `i` in inner word `j`.
    pub fn get(&self, i: usize, j: usize) -> usize {
        self.counts[i * self.inner_words + j] as usize
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let m = self.inner_words;
        self.counts[i * m..(i + 1) * m].iter().map(|&c| c as usize)
    }

    pub fn column_sum(&self, j: usize) -> usize {
        (0..self.outer_words).map(|i| self.get(i, j)).sum()
    }

    /// First slot of strip `(i, j)` in inner word `j`; `None` if empty.
    pub fn strip_offset(&self, i: usize, j: usize) -> Option<usize> {
        (self.get(i, j) > 0).then(|| self.offsets[i * self.inner_words + j] as usize)
    }

    /// Multiset of nonzero strip lengths in row `i`, as `length -> count`.
    pub fn row_profile(&self, i: usize) -> BTreeMap<usize, usize> {
        let mut p = BTreeMap::new();
        for l in self.row(i).filter(|&l| l > 0) {
            *p.entry(l).or_insert(0) += 1;
        }
        p
    }

    /// Row profile of any row, from `N` and `m` alone: `N mod m` strips of
    /// length `ceil(N/m)` and the rest of length `floor(N/m)`.
    pub fn card_dealing_profile(outer_len: usize, inner_words: usize) -> BTreeMap<usize, usize> {
        let (q, r) = (outer_len / inner_words, outer_len % inner_words);
        let mut p = BTreeMap::new();
        if r > 0 {
            p.insert(q + 1, r);
        }
        if q > 0 {
            p.insert(q, inner_words - r);
        }
        p
    }

    /// Inner word and slot of symbol `j` of RS word `i`.
    #[inline]
    pub fn location(&self, i: usize, j: usize) -> (usize, usize) {
        let g = self.outer_len * i + j;
        (g % self.inner_words, g / self.inner_words)
    }

    /// RS word and symbol index occupying `slot` of inner word `w`.
    #[inline]
    pub fn source(&self, w: usize, slot: usize) -> (usize, usize) {
        let g = slot * self.inner_words + w;
        (g / self.outer_len, g % self.outer_len)
    }

    fn half(&self) -> usize {
        self.bits as usize / 2
    }

    /// Writes RS symbol `v` into `slot` of a payload. Bit `h` of the symbol is
    /// taken from the MSB end; in MLC even bits go to the unprotected level
    /// and odd bits to the inner information bits.
    fn put(&self, p: &mut InnerPayload, slot: usize, v: Element) {
        let b = self.bits as usize;
        let bit = |h: usize| ((v >> (b - 1 - h)) & 1) as u8;
        match self.scheme {
            Scheme::Bicm => {
                for h in 0..b {
                    p.coded[slot * b + h] = bit(h);
                }
            }
            Scheme::Mlc => {
                let base = slot * self.half();
                for h in 0..self.half() {
                    p.unprotected[base + h] = bit(2 * h);
                    p.coded[base + h] = bit(2 * h + 1);
                }
            }
        }
    }

    fn take(&self, p: &InnerPayload, slot: usize) -> Element {
        let b = self.bits as usize;
        let mut v: Element = 0;
        match self.scheme {
            Scheme::Bicm => {
                for h in 0..b {
                    v = (v << 1) | p.coded[slot * b + h] as Element;
                }
            }
            Scheme::Mlc => {
                let base = slot * self.half();
                for h in 0..self.half() {
                    v = (v << 1) | p.unprotected[base + h] as Element;
                    v = (v << 1) | p.coded[base + h] as Element;
                }
            }
        }
        v
    }

    /// Spreads `M` RS words over `m` inner payloads.
    pub fn interleave(&self, rs_words: &[Vec<Element>]) -> Result<Vec<InnerPayload>> {
        check_len(self.outer_words, rs_words.len())?;
        let un = if self.scheme == Scheme::Mlc { self.k } else { 0 };
        let mut out = vec![InnerPayload { coded: vec![0; self.k], unprotected: vec![0; un] }; self.inner_words];
        for (i, word) in rs_words.iter().enumerate() {
            check_len(self.outer_len, word.len())?;
            for (j, &v) in word.iter().enumerate() {
                let (w, s) = self.location(i, j);
                self.put(&mut out[w], s, v);
            }
        }
        Ok(out)
    }

    /// Reassembles the `M` RS words from `m` decoded payloads.
    pub fn deinterleave(&self, payloads: &[InnerPayload]) -> Result<Vec<Vec<Element>>> {
        check_len(self.inner_words, payloads.len())?;
        let un = if self.scheme == Scheme::Mlc { self.k } else { 0 };
        for p in payloads {
            check_len(self.k, p.coded.len())?;
            check_len(un, p.unprotected.len())?;
        }
        Ok((0..self.outer_words)
            .map(|i| {
                (0..self.outer_len)
                    .map(|j| {
                        let (w, s) = self.location(i, j);
                        self.take(&payloads[w], s)
                    })
                    .collect()
            })
            .collect())
    }
}
