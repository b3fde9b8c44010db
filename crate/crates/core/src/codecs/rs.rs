use super::{berlekamp_massey, chien_exponents, DecodeStatus, Decoded};
use crate::error::{check_len, Error, Result};
use crate::gf::{Element, Field, Poly};

/// A (possibly shortened) narrow-sense Reed-Solomon code RS(N, K) over
/// GF(2^B) correcting `T = (N - K) / 2` symbol errors.
///
/// Codeword position `p` carries the coefficient of `x^{N-1-p}`, so the
/// information symbols are the high-order coefficients.
#[derive(Clone, Debug)]
pub struct RsCode {
    n: usize,
    k: usize,
    t: usize,
    field: Field,
    // Generator prod_{i=1}^{2T} (x - alpha^i), lowest degree first.
    generator: Vec<Element>,
}

impl RsCode {
    pub fn new(n: usize, k: usize, bits: u32) -> Result<RsCode> {
        let field = Field::new(bits)?;
        if k == 0 || k >= n {
            return Err(Error::InvalidParameter(format!("RS({n},{k}) needs 0 < K < N")));
        }
        if (n - k) % 2 != 0 {
            return Err(Error::InvalidParameter(format!("RS({n},{k}): N - K must be even")));
        }
        if n > field.order() {
            return Err(Error::InvalidParameter(format!(
                "RS length {n} exceeds 2^{bits} - 1"
            )));
        }
        let t = (n - k) / 2;
        let mut g = Poly::one();
        for i in 1..=(2 * t) {
            g = g.mul(&Poly::new(vec![field.alpha_pow(i as i64), 1]), &field);
        }
        Ok(RsCode { n, k, t, field, generator: g.coeffs().to_vec() })
    }

    /// RS(N, K) with the redundancy expressed through the radius `T`.
    pub fn with_radius(n: usize, t: usize, bits: u32) -> Result<RsCode> {
        if 2 * t >= n {
            return Err(Error::InvalidParameter(format!("RS length {n} too short for T = {t}")));
        }
        RsCode::new(n, n - 2 * t, bits)
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

    pub fn bits(&self) -> u32 {
        self.field.bits()
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    /// Systematic encoding: the output starts with `info`.
    pub fn encode(&self, info: &[Element]) -> Result<Vec<Element>> {
        check_len(self.k, info.len())?;
        let r = 2 * self.t;
        let mask = (self.field.size() - 1) as Element;
        let mut work = Vec::with_capacity(self.n);
        work.extend(info.iter().map(|&s| s & mask));
        work.resize(self.n, 0);
        // Synthetic division by the monic generator, high degree first.
        for i in 0..self.k {
            let coef = work[i];
            if coef == 0 {
                continue;
            }
            for j in 1..=r {
                work[i + j] ^= self.field.mul(coef, self.generator[r - j]);
            }
        }
        work[..self.k].copy_from_slice(&info[..self.k]);
        for s in work[..self.k].iter_mut() {
            *s &= mask;
        }
        Ok(work)
    }

    /// Syndromes `S_1..S_{2T}`; all zero iff `word` is a codeword.
    pub fn syndromes(&self, word: &[Element]) -> Vec<Element> {
        (1..=2 * self.t)
            .map(|i| {
                let x = self.field.alpha_pow(i as i64);
                word.iter().fold(0, |acc, &c| self.field.mul(acc, x) ^ c)
            })
            .collect()
    }

    /// Bounded-distance decoding returning the corrected codeword.
    pub fn decode_codeword(&self, word: &[Element]) -> Result<(Vec<Element>, DecodeStatus)> {
        check_len(self.n, word.len())?;
        let synd = self.syndromes(word);
        if synd.iter().all(|&s| s == 0) {
            return Ok((word.to_vec(), DecodeStatus::Corrected(0)));
        }
        let f = &self.field;
        let (lambda, l) = berlekamp_massey(&synd, f);
        let degree = lambda.len() - 1;
        if degree != l || degree > self.t {
            return Ok((word.to_vec(), DecodeStatus::Failure));
        }
        let exps = chien_exponents(&lambda, self.n, f);
        if exps.len() != degree {
            return Ok((word.to_vec(), DecodeStatus::Failure));
        }
        // Forney with first consecutive root alpha^1.
        let omega = Poly::new(synd.clone())
            .mul(&Poly::new(lambda.clone()), f)
            .truncate(2 * self.t);
        let dlambda = Poly::new(lambda).derivative();
        let mut out = word.to_vec();
        for &e in &exps {
            let x_inv = f.alpha_pow(-(e as i64));
            let den = dlambda.eval(x_inv, f);
            if den == 0 {
                return Ok((word.to_vec(), DecodeStatus::Failure));
            }
            let magnitude = f.div(omega.eval(x_inv, f), den);
            out[self.n - 1 - e] ^= magnitude;
        }
        Ok((out, DecodeStatus::Corrected(degree)))
    }

    /// Bounded-distance decoding up to `T` symbol errors.
    pub fn decode(&self, word: &[Element]) -> Result<Decoded<Element>> {
        let (cw, status) = self.decode_codeword(word)?;
        Ok(Decoded { info: cw[..self.k].to_vec(), status })
    }
}
