//! Systematic encoders and bounded-distance hard-decision decoders for the
//! outer Reed-Solomon code and the inner (shortened, optionally extended)
//! binary BCH and single-parity-check codes.
//!
//! All codes put information first: the first `K` symbols (or `k` bits) of a
//! codeword are the message. Shortened codes drop the leading (highest-degree)
//! positions of the parent code.

mod bch;
mod rs;
mod spc;

pub use bch::{generator_degree, BchCode};
pub use rs::RsCode;
pub use spc::SpcCode;

use crate::gf::{Element, Field};

/// Outcome of a bounded-distance decoding attempt.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecodeStatus {
    /// Decoding succeeded after flipping this many positions.
    Corrected(usize),
    /// The received word is farther than the decoding radius from every
    /// codeword the decoder could find.
    Failure,
}

impl DecodeStatus {
    pub fn is_failure(self) -> bool {
        matches!(self, DecodeStatus::Failure)
    }
}

/// Decoded information plus status. On failure `info` holds the received
/// (uncorrected) information positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decoded<T> {
    pub info: Vec<T>,
    pub status: DecodeStatus,
}

/// Berlekamp-Massey over `field`. `synd[i]` is the syndrome `S_{i+1}`.
/// Returns the connection polynomial (lowest degree first) and its linear
/// complexity.
pub(crate) fn berlekamp_massey(synd: &[Element], field: &Field) -> (Vec<Element>, usize) {
    let mut lambda: Vec<Element> = vec![1];
    let mut prev: Vec<Element> = vec![1];
    let mut l = 0usize;
    let mut shift = 1usize;
    let mut prev_disc: Element = 1;
    for r in 0..synd.len() {
        let mut d = synd[r];
        for i in 1..=l.min(lambda.len() - 1) {
            d ^= field.mul(lambda[i], synd[r - i]);
        }
        if d == 0 {
            shift += 1;
            continue;
        }
        let coef = field.div(d, prev_disc);
        let mut next = lambda.clone();
        if next.len() < prev.len() + shift {
            next.resize(prev.len() + shift, 0);
        }
        for (i, &p) in prev.iter().enumerate() {
            next[i + shift] ^= field.mul(coef, p);
        }
        if 2 * l <= r {
            prev = std::mem::replace(&mut lambda, next);
            l = r + 1 - l;
            prev_disc = d;
            shift = 1;
        } else {
            lambda = next;
            shift += 1;
        }
    }
    while lambda.len() > 1 && *lambda.last().unwrap() == 0 {
        lambda.pop();
    }
    (lambda, l)
}

/// Roots of `lambda` of the form `alpha^{-e}` for `e < len`, returned as
/// exponents `e`. Stops once `lambda`'s degree worth of roots are found.
pub(crate) fn chien_exponents(lambda: &[Element], len: usize, field: &Field) -> Vec<usize> {
    let degree = lambda.len() - 1;
    let order = field.order();
    let mut found = Vec::with_capacity(degree);
    if degree == 1 {
        // 1 + l1 x vanishes at x = l1^{-1} = alpha^{-log l1}.
        if let Some(e) = field.log(lambda[1]) {
            if (e as usize) < len {
                found.push(e as usize);
            }
        }
        return found;
    }
    // idx[i] tracks log(lambda_i) - i*e (mod order).
    let mut idx: Vec<(usize, usize)> = lambda
        .iter()
        .enumerate()
        .skip(1)
        .filter_map(|(i, &c)| field.log(c).map(|l| (l as usize, i % order)))
        .collect();
    for e in 0..len {
        let mut acc = lambda[0];
        for (v, step) in idx.iter_mut() {
            acc ^= field.exp_small(*v);
            *v = if *v >= *step { *v - *step } else { *v + order - *step };
        }
        if acc == 0 {
            found.push(e);
            if found.len() == degree {
                break;
            }
        }
    }
    found
}
