//! Descriptors for one concatenated system: outer RS code, inner code and
//! decoder, coded-modulation scheme and codeword counts.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::codecs::generator_degree;
use crate::error::{Error, Result};
use crate::interleaver::AdjacencyMatrix;

/// Coded-modulation architecture for the inner code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    /// Bit-interleaved coded modulation: every inner-code bit Gray-mapped.
    #[serde(rename = "BICM")]
    Bicm,
    /// Multilevel coding: inner-coded LSBs, uncoded conditionally demapped MSBs.
    #[serde(rename = "MLC")]
    Mlc,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Bicm => "BICM",
            Scheme::Mlc => "MLC",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Scheme> {
        match s.to_ascii_uppercase().as_str() {
            "BICM" => Ok(Scheme::Bicm),
            "MLC" => Ok(Scheme::Mlc),
            _ => Err(Error::InvalidParameter(format!("unknown scheme {s:?}"))),
        }
    }
}

/// Inner code together with its soft-decision decoder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InnerCode {
    /// (Extended) BCH decoded by Chase-II with `test_bits` test positions.
    Bch { n: usize, b: u32, t: usize, extended: bool, test_bits: usize },
    /// Single parity check decoded by Wagner's rule.
    Spc { n: usize },
}

impl InnerCode {
    pub fn ebch(n: usize, b: u32, t: usize, test_bits: usize) -> InnerCode {
        InnerCode::Bch { n, b, t, extended: true, test_bits }
    }

    pub fn n(&self) -> usize {
        match *self {
            InnerCode::Bch { n, .. } | InnerCode::Spc { n } => n,
        }
    }

    /// Number of information bits; zero if the parameters leave none.
    pub fn k(&self) -> usize {
        match *self {
            InnerCode::Bch { n, b, t, extended, .. } => {
                let core = n.saturating_sub(extended as usize);
                core.saturating_sub(generator_degree(b, t))
            }
            InnerCode::Spc { n } => n.saturating_sub(1),
        }
    }

    /// Hard-decision radius (0 for SPC).
    pub fn t(&self) -> usize {
        match *self {
            InnerCode::Bch { t, .. } => t,
            InnerCode::Spc { .. } => 0,
        }
    }

    pub fn b(&self) -> Option<u32> {
        match *self {
            InnerCode::Bch { b, .. } => Some(b),
            InnerCode::Spc { .. } => None,
        }
    }

    pub fn test_bits(&self) -> Option<usize> {
        match *self {
            InnerCode::Bch { test_bits, .. } => Some(test_bits),
            InnerCode::Spc { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            InnerCode::Bch { n, b, t, extended, test_bits } => {
                if !(2..=16).contains(&b) || t == 0 {
                    return Err(Error::InvalidParameter(format!("bad BCH parameters b={b}, t={t}")));
                }
                let parent = (1usize << b) - 1 + extended as usize;
                if n > parent || self.k() == 0 {
                    return Err(Error::InvalidParameter(format!(
                        "BCH length {n} invalid for parent length {parent} and t = {t}"
                    )));
                }
                if test_bits == 0 || test_bits > n {
                    return Err(Error::InvalidParameter(format!(
                        "Chase test bits {test_bits} outside 1..={n}"
                    )));
                }
                Ok(())
            }
            InnerCode::Spc { n } => {
                if n < 2 {
                    return Err(Error::InvalidParameter(format!("SPC length {n} < 2")));
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for InnerCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            InnerCode::Bch { n, b, t, extended, test_bits } => write!(
                f,
                "{}BCH({n},{},{t}) b={b} J={test_bits}",
                if extended { "e" } else { "" },
                self.k()
            ),
            InnerCode::Spc { n } => write!(f, "SPC({n},{})", n - 1),
        }
    }
}

fn parse_field<T: std::str::FromStr>(text: &str, what: &str) -> Result<T> {
    text.trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("cannot parse {what} from {text:?}")))
}

impl std::str::FromStr for InnerCode {
    type Err = Error;

    /// `ebch:n,b,t,J`, `bch:n,b,t,J` or `spc:n`.
    fn from_str(s: &str) -> Result<InnerCode> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidParameter(format!("inner code {s:?} lacks a kind prefix")))?;
        let parts: Vec<&str> = rest.split(',').collect();
        let code = match (kind.trim().to_ascii_lowercase().as_str(), parts.as_slice()) {
            ("ebch" | "bch", [n, b, t, j]) => InnerCode::Bch {
                n: parse_field(n, "n")?,
                b: parse_field(b, "b")?,
                t: parse_field(t, "t")?,
                extended: kind.trim().eq_ignore_ascii_case("ebch"),
                test_bits: parse_field(j, "J")?,
            },
            ("spc", [n]) => InnerCode::Spc { n: parse_field(n, "n")? },
            _ => return Err(Error::InvalidParameter(format!("unrecognized inner code {s:?}"))),
        };
        code.validate()?;
        Ok(code)
    }
}

/// Key of an inner-decoder error-weight distribution: everything that
/// determines the inner link except the SNR.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InnerKey {
    pub scheme: Scheme,
    pub code: InnerCode,
}

impl fmt::Display for InnerKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.code, self.scheme)
    }
}

/// Outer RS(N, K, T) code with `bits` bits per symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OuterCode {
    pub n: usize,
    pub t: usize,
    pub bits: u32,
}

impl OuterCode {
    pub fn k(&self) -> usize {
        self.n - 2 * self.t
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.n as f64
    }

    /// The RS(544, 514) code over GF(2^10).
    pub fn kp4() -> OuterCode {
        OuterCode { n: 544, t: 15, bits: 10 }
    }

    pub fn is_kp4(&self) -> bool {
        *self == OuterCode::kp4()
    }
}

/// One candidate concatenated system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConcatConfig {
    pub outer: OuterCode,
    /// Number of outer RS words per frame (M).
    pub outer_words: usize,
    pub inner: InnerCode,
    /// Number of inner codewords per frame (m).
    pub inner_words: usize,
    pub scheme: Scheme,
}

impl ConcatConfig {
    pub fn inner_key(&self) -> InnerKey {
        InnerKey { scheme: self.scheme, code: self.inner }
    }

    /// Rate of the inner coded-modulation stage: `k/n` (BICM) or
    /// `2k/(k+n)` (MLC).
    pub fn inner_rate(&self) -> f64 {
        inner_rate(self.scheme, self.inner.n(), self.inner.k())
    }

    pub fn rate(&self) -> f64 {
        self.outer.rate() * self.inner_rate()
    }

    /// Latency in bits: `m n` (BICM) or `m (n + k)` (MLC).
    pub fn latency(&self) -> u64 {
        crate::metrics::latency(self.inner_words, self.inner.n(), self.inner.k(), self.scheme)
    }

    /// Checks code parameters and all balance conditions.
    pub fn validate(&self) -> Result<()> {
        self.inner.validate()?;
        self.adjacency().map(|_| ())
    }

    pub fn adjacency(&self) -> Result<AdjacencyMatrix> {
        AdjacencyMatrix::build(
            self.outer_words,
            self.outer.n,
            self.inner_words,
            self.outer.bits,
            self.inner.k(),
            self.scheme,
        )
    }
}

impl ConcatConfig {
    /// The `M,N,T,m,n,b,t,J,Type` row accepted by `from_str`.
    pub fn row(&self) -> String {
        let dash = |v: Option<String>| v.unwrap_or_else(|| "-".into());
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.outer_words,
            self.outer.n,
            self.outer.t,
            self.inner_words,
            self.inner.n(),
            dash(self.inner.b().map(|b| b.to_string())),
            self.inner.t(),
            dash(self.inner.test_bits().map(|j| j.to_string())),
            self.scheme
        )
    }
}

impl std::str::FromStr for ConcatConfig {
    type Err = Error;

    /// A table row `M,N,T,m,n,b,t,J,Type` with 10-bit outer symbols; SPC
    /// inner codes give `-` for `b` and `J`. The result is validated.
    fn from_str(s: &str) -> Result<ConcatConfig> {
        let f: Vec<&str> = s.split(',').map(str::trim).collect();
        let [mm, big_n, big_t, m, n, b, t, j, scheme] = f.as_slice() else {
            return Err(Error::InvalidParameter(format!("expected 9 fields in {s:?}")));
        };
        let inner = if *b == "-" {
            InnerCode::Spc { n: parse_field(n, "n")? }
        } else {
            InnerCode::ebch(parse_field(n, "n")?, parse_field(b, "b")?, parse_field(t, "t")?, parse_field(j, "J")?)
        };
        let config = ConcatConfig {
            outer: OuterCode { n: parse_field(big_n, "N")?, t: parse_field(big_t, "T")?, bits: 10 },
            outer_words: parse_field(mm, "M")?,
            inner,
            inner_words: parse_field(m, "m")?,
            scheme: scheme.parse()?,
        };
        if config.outer.n <= 2 * config.outer.t {
            return Err(Error::InvalidParameter(format!("RS({},{}) has no information symbols", config.outer.n, config.outer.t)));
        }
        config.validate()?;
        Ok(config)
    }
}

impl fmt::Display for ConcatConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}x RS({},{},{}) + {}x {} {}",
            self.outer_words,
            self.outer.n,
            self.outer.k(),
            self.outer.t,
            self.inner_words,
            self.inner,
            self.scheme
        )
    }
}

pub fn inner_rate(scheme: Scheme, n: usize, k: usize) -> f64 {
    match scheme {
        Scheme::Bicm => k as f64 / n as f64,
        Scheme::Mlc => 2.0 * k as f64 / (k + n) as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rows_and_codes() {
        let c: ConcatConfig = "10,544,15,544,57,6,1,2,MLC".parse().unwrap();
        assert!(c.outer.is_kp4());
        assert_eq!(c.inner, InnerCode::ebch(57, 6, 1, 2));
        assert_eq!(c.row().parse::<ConcatConfig>().unwrap(), c);
        let spc: ConcatConfig = "1,544,15,272,21,-,0,-,BICM".parse().unwrap();
        assert_eq!(spc.row(), "1,544,15,272,21,-,0,-,BICM");
        assert!("10,544,15,545,57,6,1,2,MLC".parse::<ConcatConfig>().is_err());
        assert!("10,544,15,544,57,6,1,2".parse::<ConcatConfig>().is_err());
        assert_eq!("spc:21".parse::<InnerCode>().unwrap(), InnerCode::Spc { n: 21 });
        assert_eq!("eBCH:65,7,2,2".parse::<InnerCode>().unwrap(), InnerCode::ebch(65, 7, 2, 2));
        assert!("ebch:65,6,2,2".parse::<InnerCode>().is_err());
        assert!("rs:5".parse::<InnerCode>().is_err());
    }
}
