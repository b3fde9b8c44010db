use super::{berlekamp_massey, chien_exponents, DecodeStatus, Decoded};
use crate::error::{check_len, Error, Result};
use crate::gf::{Element, Field, Poly};

/// Degree of the narrow-sense binary BCH generator with designed radius `t`
/// over GF(2^b): the size of the union of the cyclotomic cosets of
/// `1, 3, ..., 2t-1` modulo `2^b - 1`.
pub fn generator_degree(b: u32, t: usize) -> usize {
    let order = (1usize << b) - 1;
    let mut seen = vec![false; order];
    let mut degree = 0;
    for i in (1..2 * t).step_by(2) {
        let mut e = i % order;
        while !seen[e] {
            seen[e] = true;
            degree += 1;
            e = (2 * e) % order;
        }
    }
    degree
}

/// A binary BCH code shortened from length `2^b - 1`, or an extended BCH
/// code shortened from length `2^b` when `extended` is set.
///
/// Layout: `k` information bits, then the `deg g` BCH parity bits, then (if
/// extended) one overall parity bit. Position `p < n'` of the BCH part
/// carries the coefficient of `x^{n'-1-p}`, where `n'` is the length without
/// the overall parity bit.
#[derive(Clone, Debug)]
pub struct BchCode {
    n: usize,
    k: usize,
    t: usize,
    b: u32,
    extended: bool,
    field: Field,
    // Binary generator coefficients, lowest degree first.
    generator: Vec<u8>,
    // Odd-syndrome contributions, `t` per core position.
    columns: Vec<Element>,
    // A root `z` of `z^2 + z = c`, indexed by `c`; `NO_ROOT` if none.
    half_roots: Vec<Element>,
}

const NO_ROOT: Element = Element::MAX;

impl BchCode {
    pub fn new(b: u32, t: usize, n: usize, extended: bool) -> Result<BchCode> {
        if t == 0 {
            return Err(Error::InvalidParameter("BCH radius must be at least 1".into()));
        }
        if !(2..=16).contains(&b) {
            return Err(Error::InvalidParameter(format!("BCH exponent {b} out of range")));
        }
        let field = Field::new(b)?;
        let core = n.checked_sub(extended as usize).unwrap_or(0);
        if core > field.order() || core == 0 {
            return Err(Error::InvalidParameter(format!(
                "BCH length {n} incompatible with parent length {}",
                field.order() + extended as usize
            )));
        }
        let mut g = Poly::one();
        let mut seen = vec![false; field.order()];
        for i in (1..2 * t).step_by(2) {
            let mut e = i % field.order();
            while !seen[e] {
                seen[e] = true;
                g = g.mul(&Poly::new(vec![field.alpha_pow(e as i64), 1]), &field);
                e = (2 * e) % field.order();
            }
        }
        let generator: Vec<u8> = g
            .coeffs()
            .iter()
            .map(|&c| {
                debug_assert!(c <= 1, "minimal polynomials are binary");
                c as u8
            })
            .collect();
        let degree = generator.len() - 1;
        if degree >= core {
            return Err(Error::InvalidParameter(format!(
                "BCH({n}) from 2^{b} with t = {t} has no information bits"
            )));
        }
        let mut columns = Vec::with_capacity(core * t);
        for pos in 0..core {
            let e = (core - 1 - pos) as i64;
            columns.extend((0..t).map(|i| field.alpha_pow((2 * i as i64 + 1) * e)));
        }
        let mut half_roots = Vec::new();
        if t == 2 {
            half_roots = vec![NO_ROOT; field.size()];
            for z in 0..field.size() as Element {
                half_roots[(field.mul(z, z) ^ z) as usize] = z;
            }
        }
        Ok(BchCode {
            n,
            k: core - degree,
            t,
            b,
            extended,
            field,
            generator,
            columns,
            half_roots,
        })
    }

    /// Extended BCH code of length `n` shortened from `2^b`.
    pub fn extended(b: u32, t: usize, n: usize) -> Result<BchCode> {
        BchCode::new(b, t, n, true)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    pub fn is_extended(&self) -> bool {
        self.extended
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    /// Length of the BCH part (without the overall parity bit).
    pub fn core_len(&self) -> usize {
        self.n - self.extended as usize
    }

    pub fn generator_degree(&self) -> usize {
        self.generator.len() - 1
    }

    /// Systematic encoding: the output starts with `info`.
    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        check_len(self.k, info.len())?;
        let r = self.generator_degree();
        let core = self.core_len();
        let mut work = Vec::with_capacity(self.n);
        work.extend(info.iter().map(|&b| b & 1));
        work.resize(core, 0);
        for i in 0..self.k {
            if work[i] == 0 {
                continue;
            }
            for j in 1..=r {
                work[i + j] ^= self.generator[r - j];
            }
        }
        for (w, &b) in work.iter_mut().zip(info) {
            *w = b & 1;
        }
        if self.extended {
            let p = work.iter().fold(0, |acc, &b| acc ^ b);
            work.push(p);
        }
        Ok(work)
    }

    /// Contribution of a one at position `pos` to the odd syndromes
    /// `S_1, S_3, ..., S_{2t-1}`. The overall parity position contributes
    /// nothing.
    pub(crate) fn syndrome_column(&self, pos: usize) -> &[Element] {
        const NONE: [Element; 16] = [0; 16];
        if pos >= self.core_len() {
            return &NONE[..self.t.min(16)];
        }
        &self.columns[pos * self.t..(pos + 1) * self.t]
    }

    /// Odd syndromes of the BCH part of `word`.
    pub(crate) fn odd_syndromes(&self, word: &[u8]) -> Vec<Element> {
        let t = self.t;
        let mut s = vec![0 as Element; t];
        for (col, &bit) in self.columns.chunks_exact(t).zip(word) {
            if bit & 1 == 1 {
                for (si, &c) in s.iter_mut().zip(col) {
                    *si ^= c;
                }
            }
        }
        s
    }

    /// Position of the single error with locator `x`, if inside the code.
    fn position_of(&self, x: Element) -> Option<usize> {
        let e = self.field.log(x)? as usize;
        let core = self.core_len();
        (e < core).then(|| core - 1 - e)
    }

    /// Error positions of the BCH part for `t <= 2` by closed form.
    fn locate_small(&self, odd: &[Element]) -> Option<Vec<usize>> {
        let f = &self.field;
        let s1 = odd[0];
        if self.t == 1 {
            return self.position_of(s1).map(|p| vec![p]);
        }
        let s3 = odd[1];
        if s1 == 0 {
            return None;
        }
        let cube = f.mul(f.mul(s1, s1), s1);
        if s3 == cube {
            return self.position_of(s1).map(|p| vec![p]);
        }
        // X^2 + S1 X + (S3 + S1^3) / S1 = 0; substitute X = S1 z.
        let c = f.div(s3 ^ cube, cube);
        let z = self.half_roots[c as usize];
        if z == NO_ROOT {
            return None;
        }
        let x1 = f.mul(s1, z);
        Some(vec![self.position_of(x1)?, self.position_of(x1 ^ s1)?])
    }

    /// Error positions implied by the odd syndromes of the BCH part and the
    /// overall parity of the received word (ignored unless extended).
    /// Returns `None` on decoding failure.
    pub(crate) fn locate(&self, odd: &[Element], parity: u8) -> Option<Vec<usize>> {
        let core = self.core_len();
        let mut positions = if odd.iter().all(|&s| s == 0) {
            Vec::new()
        } else if self.t <= 2 && self.b >= 3 {
            self.locate_small(odd)?
        } else {
            let f = &self.field;
            let mut synd = vec![0 as Element; 2 * self.t];
            for j in 1..=2 * self.t {
                synd[j - 1] = if j % 2 == 1 {
                    odd[j / 2]
                } else {
                    let h = synd[j / 2 - 1];
                    f.mul(h, h)
                };
            }
            let (lambda, l) = berlekamp_massey(&synd, f);
            let degree = lambda.len() - 1;
            if degree != l || degree > self.t {
                return None;
            }
            let exps = chien_exponents(&lambda, core, f);
            if exps.len() != degree {
                return None;
            }
            exps.into_iter().map(|e| core - 1 - e).collect()
        };
        if self.extended {
            let residual = parity ^ (positions.len() % 2) as u8;
            if residual & 1 == 1 {
                if positions.len() + 1 > self.t {
                    return None;
                }
                positions.push(self.n - 1);
            }
        }
        Some(positions)
    }

    /// Bounded-distance decoding returning the corrected codeword.
    pub fn decode_codeword(&self, word: &[u8]) -> Result<(Vec<u8>, DecodeStatus)> {
        check_len(self.n, word.len())?;
        let odd = self.odd_syndromes(word);
        let parity = word.iter().fold(0, |acc, &b| acc ^ (b & 1));
        match self.locate(&odd, parity) {
            None => Ok((word.to_vec(), DecodeStatus::Failure)),
            Some(positions) => {
                let mut out = word.to_vec();
                for &p in &positions {
                    out[p] ^= 1;
                }
                Ok((out, DecodeStatus::Corrected(positions.len())))
            }
        }
    }

    /// Bounded-distance hard-decision decoding up to `t` bit errors.
    pub fn decode(&self, word: &[u8]) -> Result<Decoded<u8>> {
        let (cw, status) = self.decode_codeword(word)?;
        Ok(Decoded { info: cw[..self.k].to_vec(), status })
    }

    /// True iff `word` satisfies every parity check of the code.
    pub fn is_codeword(&self, word: &[u8]) -> bool {
        if word.len() != self.n {
            return false;
        }
        if self.odd_syndromes(word).iter().any(|&s| s != 0) {
            return false;
        }
        !self.extended || word.iter().fold(0, |acc, &b| acc ^ (b & 1)) == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_bits(n: usize, rng: &mut ChaCha8Rng) -> Vec<u8> {
        (0..n).map(|_| rng.random_range(0..2u8)).collect()
    }

    #[test]
    fn dimensions_match_search_codes() {
        // k = n - b*t - 1 for every eBCH code listed in the rate-0.88 table.
        for (n, b, t, k) in [
            (47, 6, 1, 40),
            (57, 6, 1, 50),
            (65, 7, 2, 50),
            (115, 7, 2, 100),
            (125, 7, 2, 110),
            (127, 7, 3, 105),
            (142, 8, 2, 125),
            (85, 7, 2, 70),
            (32, 5, 2, 21),
        ] {
            let code = BchCode::extended(b, t, n).unwrap();
            assert_eq!(code.k(), k, "eBCH({n},{k},{t})");
            assert_eq!(generator_degree(b, t), b as usize * t);
        }
        // Non-primitive cosets shrink the generator.
        assert_eq!(generator_degree(4, 3), 10);
        assert_eq!(BchCode::new(4, 3, 15, false).unwrap().k(), 5);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(BchCode::extended(6, 1, 66).is_err());
        assert!(BchCode::new(6, 1, 64, false).is_err());
        assert!(BchCode::extended(6, 1, 7).is_err());
        assert!(BchCode::extended(6, 0, 40).is_err());
        let code = BchCode::extended(6, 1, 40).unwrap();
        assert!(code.encode(&[0; 3]).is_err());
        assert!(code.decode(&[0; 39]).is_err());
    }

    #[test]
    fn zero_info_gives_zero_codeword() {
        let code = BchCode::extended(7, 2, 65).unwrap();
        assert_eq!(code.encode(&vec![0; 50]).unwrap(), vec![0; 65]);
    }

    #[test]
    fn round_trip_and_parity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (b, t, n, ext) in [(6, 1, 57, true), (7, 2, 65, true), (7, 3, 127, true), (5, 2, 31, false)] {
            let code = BchCode::new(b, t, n, ext).unwrap();
            for _ in 0..20 {
                let info = random_bits(code.k(), &mut rng);
                let cw = code.encode(&info).unwrap();
                assert_eq!(&cw[..code.k()], &info[..]);
                assert!(code.is_codeword(&cw));
                if ext {
                    assert_eq!(cw.iter().fold(0, |a, &b| a ^ b), 0);
                }
                let d = code.decode(&cw).unwrap();
                assert_eq!(d.info, info);
                assert_eq!(d.status, DecodeStatus::Corrected(0));
            }
        }
    }

    #[test]
    fn shortened_codeword_extends_to_parent_codeword() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let short = BchCode::new(6, 2, 40, false).unwrap();
        let parent = BchCode::new(6, 2, 63, false).unwrap();
        for _ in 0..20 {
            let cw = short.encode(&random_bits(short.k(), &mut rng)).unwrap();
            let mut full = vec![0u8; 63 - 40];
            full.extend_from_slice(&cw);
            assert!(parent.is_codeword(&full));
        }
    }

    #[test]
    fn ebch57_has_minimum_distance_at_least_four() {
        // Every nonzero error pattern of weight <= 3 leaves a nonzero
        // syndrome (or odd parity), so no codeword of weight 1..=3 exists.
        let code = BchCode::extended(6, 1, 57).unwrap();
        let n = code.n();
        let zero = vec![0u8; n];
        assert!(code.is_codeword(&zero));
        for a in 0..n {
            for b in a..n {
                for c in b..n {
                    let mut w = zero.clone();
                    w[a] ^= 1;
                    w[b] ^= 1;
                    w[c] ^= 1;
                    if w.iter().any(|&x| x != 0) {
                        assert!(!code.is_codeword(&w), "weight <= 3 codeword at {a},{b},{c}");
                    }
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..2000 {
            let cw = code.encode(&random_bits(code.k(), &mut rng)).unwrap();
            let w = cw.iter().filter(|&&x| x == 1).count();
            assert!(w == 0 || w >= 4);
        }
    }

    #[test]
    fn ebch32_syndromes_unique_for_weight_up_to_two() {
        // Distinct correctable patterns must map to distinct (syndrome,
        // parity) pairs.
        let code = BchCode::extended(5, 2, 32).unwrap();
        assert_eq!(code.k(), 21);
        let n = code.n();
        let mut seen = std::collections::HashMap::new();
        let mut patterns: Vec<Vec<usize>> = vec![vec![]];
        for a in 0..n {
            patterns.push(vec![a]);
            for b in a + 1..n {
                patterns.push(vec![a, b]);
            }
        }
        for p in &patterns {
            let mut w = vec![0u8; n];
            for &i in p {
                w[i] = 1;
            }
            let key = (code.odd_syndromes(&w), p.len() % 2);
            assert!(seen.insert(key, p.clone()).is_none(), "collision for {p:?}");
        }
    }

    #[test]
    fn corrects_up_to_t_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for (b, t, n) in [(5, 2, 32), (6, 1, 57), (7, 2, 65), (7, 3, 127), (8, 2, 142)] {
            let code = BchCode::extended(b, t, n).unwrap();
            for trial in 0..200 {
                let info = random_bits(code.k(), &mut rng);
                let cw = code.encode(&info).unwrap();
                let e = trial % (t + 1);
                let mut w = cw.clone();
                let mut pos: Vec<usize> = (0..n).collect();
                for i in 0..e {
                    let j = rng.random_range(i..n);
                    pos.swap(i, j);
                    w[pos[i]] ^= 1;
                }
                let d = code.decode(&w).unwrap();
                assert_eq!(d.status, DecodeStatus::Corrected(e));
                assert_eq!(d.info, info);
            }
        }
    }

    #[test]
    fn corrects_every_pattern_of_ebch32() {
        let code = BchCode::extended(5, 2, 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cw = code.encode(&random_bits(code.k(), &mut rng)).unwrap();
        for a in 0..32 {
            for b in a..32 {
                let mut w = cw.clone();
                w[a] ^= 1;
                if b != a {
                    w[b] ^= 1;
                }
                let (out, st) = code.decode_codeword(&w).unwrap();
                assert_eq!(out, cw);
                assert_eq!(st, DecodeStatus::Corrected(if a == b { 1 } else { 2 }));
            }
        }
    }

    #[test]
    fn beyond_radius_never_accepts_a_non_codeword() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for (b, t, n) in [(6, 1, 57), (7, 2, 65), (7, 3, 100)] {
            let code = BchCode::extended(b, t, n).unwrap();
            let mut failures = 0;
            for _ in 0..500 {
                let cw = code.encode(&random_bits(code.k(), &mut rng)).unwrap();
                let mut w = cw.clone();
                let mut pos: Vec<usize> = (0..n).collect();
                for i in 0..=t {
                    let j = rng.random_range(i..n);
                    pos.swap(i, j);
                    w[pos[i]] ^= 1;
                }
                let (out, st) = code.decode_codeword(&w).unwrap();
                match st {
                    DecodeStatus::Failure => {
                        failures += 1;
                        assert_eq!(out, w);
                    }
                    DecodeStatus::Corrected(e) => {
                        assert!(e <= t);
                        assert!(code.is_codeword(&out));
                        assert_ne!(out, cw);
                    }
                }
            }
            // Extended codes detect every weight-(t+1) pattern when t = 1.
            if t == 1 {
                assert_eq!(failures, 500);
            }
        }
    }
}
