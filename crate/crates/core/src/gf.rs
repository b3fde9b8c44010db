//! Arithmetic over the binary extension fields GF(2^b).
//!
//! Elements are stored as `u16` bit patterns in the polynomial basis, so
//! addition is XOR and multiplication goes through log/antilog tables built
//! from a fixed primitive polynomial per extension degree.

use crate::error::{Error, Result};

/// A field element in polynomial-basis representation.
pub type Element = u16;

/// Largest supported extension degree.
pub const MAX_BITS: u32 = 16;

/// Primitive polynomials indexed by extension degree, as bitmasks including
/// the leading term.
const PRIMITIVE_POLYS: [u32; 17] = [
    0, 0x3, 0x7, 0xB, 0x13, 0x25, 0x43, 0x89, 0x11D, 0x211, 0x409, 0x805, 0x1053, 0x201B, 0x4443,
    0x8003, 0x1100B,
];

/// The default primitive polynomial for `GF(2^bits)`.
pub fn primitive_poly(bits: u32) -> Option<u32> {
    PRIMITIVE_POLYS.get(bits as usize).copied().filter(|&p| p != 0)
}

/// The finite field GF(2^b) with precomputed log/antilog tables.
#[derive(Clone, Debug)]
pub struct Field {
    bits: u32,
    poly: u32,
    log: Vec<u32>,
    // Doubled so products can index without a modulo.
    exp: Vec<Element>,
}

impl Field {
    /// Builds `GF(2^bits)` from the standard primitive polynomial.
    pub fn new(bits: u32) -> Result<Field> {
        let poly = primitive_poly(bits).ok_or_else(|| {
            Error::InvalidParameter(format!("extension degree {bits} outside 1..={MAX_BITS}"))
        })?;
        Field::with_poly(bits, poly)
    }

    /// Builds `GF(2^bits)` from an explicit polynomial, which must be
    /// primitive of degree exactly `bits`.
    pub fn with_poly(bits: u32, poly: u32) -> Result<Field> {
        if bits == 0 || bits > MAX_BITS {
            return Err(Error::InvalidParameter(format!(
                "extension degree {bits} outside 1..={MAX_BITS}"
            )));
        }
        if poly >> bits != 1 {
            return Err(Error::InvalidParameter(format!(
                "polynomial {poly:#x} does not have degree {bits}"
            )));
        }
        let size = 1usize << bits;
        let order = size - 1;
        let mut log = vec![u32::MAX; size];
        let mut exp = vec![0 as Element; 2 * order];
        let mut x: u32 = 1;
        for (e, slot) in exp.iter_mut().take(order).enumerate() {
            if log[x as usize] != u32::MAX {
                return Err(Error::InvalidParameter(format!(
                    "polynomial {poly:#x} is not primitive"
                )));
            }
            *slot = x as Element;
            log[x as usize] = e as u32;
            x <<= 1;
            if x & (1 << bits) != 0 {
                x ^= poly;
            }
        }
        if x != 1 {
            return Err(Error::InvalidParameter(format!(
                "polynomial {poly:#x} is not primitive"
            )));
        }
        for e in order..2 * order {
            exp[e] = exp[e - order];
        }
        Ok(Field { bits, poly, log, exp })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn poly(&self) -> u32 {
        self.poly
    }

    /// Number of field elements, `2^b`.
    pub fn size(&self) -> usize {
        1 << self.bits
    }

    /// Multiplicative order of the primitive element, `2^b - 1`.
    pub fn order(&self) -> usize {
        (1 << self.bits) - 1
    }

    #[inline]
    pub fn mul(&self, a: Element, b: Element) -> Element {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }

    /// `a / b`; panics on division by zero.
    #[inline]
    pub fn div(&self, a: Element, b: Element) -> Element {
        assert!(b != 0, "division by zero in GF(2^{})", self.bits);
        if a == 0 {
            return 0;
        }
        let order = self.order() as u32;
        self.exp[(self.log[a as usize] + order - self.log[b as usize]) as usize]
    }

    /// Multiplicative inverse; panics on zero.
    #[inline]
    pub fn inv(&self, a: Element) -> Element {
        self.div(1, a)
    }

    /// `alpha^e` for any (possibly negative) exponent.
    #[inline]
    pub fn alpha_pow(&self, e: i64) -> Element {
        let order = self.order() as i64;
        self.exp[e.rem_euclid(order) as usize]
    }

    /// `alpha^e` for `0 <= e < 2 (2^b - 1)`, without reduction.
    #[inline]
    pub(crate) fn exp_small(&self, e: usize) -> Element {
        self.exp[e]
    }

    /// Discrete logarithm base alpha; `None` for zero.
    #[inline]
    pub fn log(&self, a: Element) -> Option<u32> {
        if a == 0 {
            None
        } else {
            Some(self.log[a as usize])
        }
    }

    /// `a^e` with `0^0 = 1`.
    pub fn pow(&self, a: Element, e: u64) -> Element {
        if e == 0 {
            return 1;
        }
        match self.log(a) {
            None => 0,
            Some(l) => {
                let order = self.order() as u64;
                self.exp[((l as u64 * (e % order)) % order) as usize]
            }
        }
    }
}

/// Polynomial with field coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly {
    coeffs: Vec<Element>,
}

impl Poly {
    /// Builds a polynomial, trimming high-order zero coefficients.
    pub fn new(coeffs: Vec<Element>) -> Poly {
        let mut p = Poly { coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Poly {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Poly {
        Poly { coeffs: vec![1] }
    }

    pub fn coeffs(&self) -> &[Element] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Coefficient of `x^i` (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> Element {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    fn trim(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    /// Horner evaluation at `x`.
    pub fn eval(&self, x: Element, field: &Field) -> Element {
        self.coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| field.mul(acc, x) ^ c)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let len = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..len).map(|i| self.coeff(i) ^ other.coeff(i)).collect())
    }

    pub fn mul(&self, other: &Poly, field: &Field) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] ^= field.mul(a, b);
            }
        }
        Poly::new(out)
    }

    pub fn scale(&self, c: Element, field: &Field) -> Poly {
        Poly::new(self.coeffs.iter().map(|&a| field.mul(a, c)).collect())
    }

    /// Formal derivative; in characteristic two only odd-degree terms survive.
    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| if i % 2 == 1 { c } else { 0 })
                .collect(),
        )
    }

    /// Remainder of division by `divisor`; panics if the divisor is zero.
    pub fn rem(&self, divisor: &Poly, field: &Field) -> Poly {
        let dd = divisor.degree().expect("division by zero polynomial");
        let lead_inv = field.inv(divisor.coeffs[dd]);
        let mut r = self.coeffs.clone();
        while r.len() > dd {
            let top = r.len() - 1;
            let c = field.mul(r[top], lead_inv);
            if c != 0 {
                for (j, &d) in divisor.coeffs.iter().enumerate() {
                    r[top - dd + j] ^= field.mul(c, d);
                }
            }
            r.pop();
        }
        Poly::new(r)
    }

    /// Keeps only terms of degree below `n`.
    pub fn truncate(&self, n: usize) -> Poly {
        Poly::new(self.coeffs.iter().take(n).copied().collect())
    }
}
