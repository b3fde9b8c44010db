//! Figures of merit: gap to the PAM4 constrained Shannon limit, decoding
//! complexity in elementary operations, and latency.

use std::sync::OnceLock;

use crate::config::{ConcatConfig, InnerCode, Scheme};
use crate::error::{Error, Result};
use crate::modem::{LEVELS, SYMBOL_ENERGY};

/// Key-equation-solver operations of the outer RS decoder.
pub fn ke_rs(t: usize) -> u64 {
    let t64 = t as u64;
    match t {
        1 => 9,
        2 => 54,
        3 => 159,
        4 => 336,
        _ => 2 * t64 * (24 * t64 + 8),
    }
}

/// Root-finding operations of the outer RS decoder.
pub fn rf_rs(n: usize, t: usize) -> u64 {
    match t {
        1 => 0,
        2 => 10,
        3 => 37,
        4 => 98,
        _ => 6 * (n * t) as u64,
    }
}

/// Operations to decode one RS(N, K, T) word.
pub fn kappa_out(n: usize, k: usize, t: usize) -> Result<u64> {
    if t == 0 || k + 2 * t != n {
        return Err(Error::InvalidParameter(format!("RS({n},{k},{t})")));
    }
    let (k64, n64, t64) = (k as u64, n as u64, t as u64);
    Ok(6 * k64 * (n64 - k64) + ke_rs(t) + rf_rs(n, t) + 6 * t64 * (2 * t64 + t64.div_ceil(2)) - 4 * t64)
}

fn binom(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Itemized Chase-II decoding cost of one inner word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChaseCost {
    pub items: [u64; 11],
}

impl ChaseCost {
    pub fn total(&self) -> u64 {
        self.items.iter().sum()
    }
}

/// Operations to Chase-decode one (e)BCH(n, k, t) word with `j` test bits.
pub fn chase_cost(n: usize, k: usize, t: usize, j: usize, scheme: Scheme) -> Result<ChaseCost> {
    if !(1..=3).contains(&t) || !(1..=6).contains(&j) || j > n {
        return Err(Error::InvalidParameter(format!("Chase cost for t={t}, J={j}, n={n}")));
    }
    let (n, k, t, j) = (n as u64, k as u64, t as u64, j as u64);
    let p = 1u64 << j;
    let weight = if t == 1 {
        let even: u64 = (0..=j / 2).map(|s| binom(j, 2 * s) * 2 * s).sum();
        let odd: u64 = (0..=j / 2).filter(|s| 2 * s < j).map(|s| binom(j, 2 * s + 1) * (2 * s + 1)).sum();
        even.max(odd)
    } else {
        (0..=j).map(|s| binom(j, s) * (t + s - 1)).sum()
    };
    let items = [
        2 * n,
        (n - j) * (j + 5) + j * (j - 1) / 2 + 3 * j,
        p - 1,
        n * t,
        t * (p - 1),
        p * [0, 11, 23][t as usize - 1],
        p * [0, 10, 37][t as usize - 1],
        weight,
        if t == 1 { p / 2 - 1 } else { p - 1 },
        j + t,
        if scheme == Scheme::Mlc { 2 * k } else { 0 },
    ];
    Ok(ChaseCost { items })
}

pub fn kappa_in_chase(n: usize, k: usize, t: usize, j: usize, scheme: Scheme) -> Result<u64> {
    Ok(chase_cost(n, k, t, j, scheme)?.total())
}

/// Operations to Wagner-decode one SPC(n, n-1) word.
pub fn kappa_in_wagner(n: usize) -> u64 {
    4 * n as u64
}

pub fn kappa_in(inner: &InnerCode, scheme: Scheme) -> Result<u64> {
    match *inner {
        InnerCode::Bch { n, t, test_bits, .. } => kappa_in_chase(n, inner.k(), t, test_bits, scheme),
        InnerCode::Spc { n } => Ok(kappa_in_wagner(n)),
    }
}

/// Operations per decoded information bit: `(M kout + m kin) / (M K B)`.
pub fn complexity_score(config: &ConcatConfig) -> Result<f64> {
    let o = &config.outer;
    let kout = kappa_out(o.n, o.k(), o.t)?;
    let kin = kappa_in(&config.inner, config.scheme)?;
    let ops = config.outer_words as f64 * kout as f64 + config.inner_words as f64 * kin as f64;
    Ok(ops / (config.outer_words * o.k() * o.bits as usize) as f64)
}

/// Buffered bits per frame: `m n` (BICM) or `m (n + k)` (MLC).
pub fn latency(m: usize, n: usize, k: usize, scheme: Scheme) -> u64 {
    let per = match scheme {
        Scheme::Bicm => n,
        Scheme::Mlc => n + k,
    };
    (m * per) as u64
}

/// Gauss-Hermite nodes and weights for `int e^{-x^2} f(x) dx`.
pub fn gauss_hermite(order: usize) -> (Vec<f64>, Vec<f64>) {
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let n = order;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * n as f64 + 1.0).sqrt() - 1.85575 * (2.0 * n as f64 + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * (n as f64).powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for jj in 0..n {
                let p3 = p2;
                p2 = p1;
                let j1 = jj as f64 + 1.0;
                p1 = z * (2.0 / j1).sqrt() * p2 - ((j1 - 1.0) / j1).sqrt() * p3;
            }
            pp = (2.0 * n as f64).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

const GH_ORDER: usize = 128;

fn nodes() -> &'static (Vec<f64>, Vec<f64>) {
    static NODES: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    NODES.get_or_init(|| gauss_hermite(GH_ORDER))
}

/// Mutual information in bits per symbol of equiprobable PAM4 over AWGN.
pub fn pam4_mutual_information(snr_db: f64) -> f64 {
    let var = SYMBOL_ENERGY / 10f64.powf(snr_db / 10.0);
    let sigma = var.sqrt();
    let (x, w) = nodes();
    let mut acc = 0.0;
    for a in LEVELS {
        for (&xi, &wi) in x.iter().zip(w) {
            let z = std::f64::consts::SQRT_2 * xi;
            let exps = LEVELS.map(|b| {
                let d = a - b;
                -(d * d + 2.0 * d * sigma * z) / (2.0 * var)
            });
            let hi = exps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = hi + exps.iter().map(|e| (e - hi).exp()).sum::<f64>().ln();
            acc += wi * lse;
        }
    }
    let expect = acc / (4.0 * std::f64::consts::PI.sqrt());
    2.0 - expect / std::f64::consts::LN_2
}

/// Tabulated PAM4 mutual information with an SNR solver.
pub struct CslCurve {
    start_db: f64,
    step_db: f64,
    values: Vec<f64>,
}

impl CslCurve {
    pub fn new() -> CslCurve {
        let (start_db, step_db, points) = (-30.0, 0.01, 6001);
        let values = (0..points).map(|i| pam4_mutual_information(start_db + step_db * i as f64)).collect();
        CslCurve { start_db, step_db, values }
    }

    /// Shared instance.
    pub fn global() -> &'static CslCurve {
        static CURVE: OnceLock<CslCurve> = OnceLock::new();
        CURVE.get_or_init(CslCurve::new)
    }

    pub fn span_db(&self) -> (f64, f64) {
        (self.start_db, self.start_db + self.step_db * (self.values.len() - 1) as f64)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// SNR (dB) at which the mutual information equals `bits`, by linear
    /// interpolation in the 0.01 dB table.
    pub fn snr_for(&self, bits: f64) -> Result<f64> {
        let (lo_db, hi_db) = self.span_db();
        let first = self.values[0];
        let last = *self.values.last().expect("non-empty table");
        if !(bits > first && bits < last) {
            return Err(Error::Unsolvable(format!(
                "{bits} bits/symbol outside [{first}, {last}] over [{lo_db}, {hi_db}] dB"
            )));
        }
        let i = self.values.partition_point(|&v| v < bits);
        let (va, vb) = (self.values[i - 1], self.values[i]);
        let a = self.start_db + self.step_db * (i - 1) as f64;
        Ok(a + self.step_db * (bits - va) / (vb - va))
    }
}

impl Default for CslCurve {
    fn default() -> Self {
        CslCurve::new()
    }
}

/// Constrained-Shannon-limit SNR for an overall code rate.
pub fn csl_snr(overall_rate: f64) -> Result<f64> {
    if !(overall_rate > 0.0 && overall_rate < 1.0) {
        return Err(Error::InvalidParameter(format!("rate {overall_rate} outside (0, 1)")));
    }
    CslCurve::global().snr_for(2.0 * overall_rate)
}

/// Gap in dB between a required SNR and the PAM4 CSL at `overall_rate`.
pub fn csl_gap(required_snr_db: f64, overall_rate: f64) -> Result<f64> {
    Ok(required_snr_db - csl_snr(overall_rate)?)
}
