//! Semi-analytical frame-error-rate estimation.
//!
//! An inner word carries `k_sym` PAM4 symbols in its information region, of
//! which a strip of `L` RS symbols covers `B/2 * L`. Given the inner error
//! weight `U`, the number `V` of RS symbols hit in the strip follows from the
//! bivariate generating function
//!
//! `W(x, y) = (1 + ((1+x)^{B/2} - 1) y)^L (1+x)^{k_sym - L B/2}`
//!
//! under the assumption that all weight-`u` patterns are equally likely.
//! The RS-symbol error count of an outer word is the sum of its independent
//! strip counts, and the frame error rate is bounded by the union over
//! outer words of `Pr(Y > T)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::config::{ConcatConfig, InnerKey, Scheme};
use crate::dist_db::{u_max, DistSource, WeightDistribution};
use crate::error::{Error, Result};
use crate::interleaver::{slots_per_word, AdjacencyMatrix};

/// Default post-FEC frame-error-rate target.
pub const TARGET_FER: f64 = 1e-13;

/// BER multiplier excess: 0 for BICM, about 0.3 for MLC.
pub fn gamma(scheme: Scheme) -> f64 {
    match scheme {
        Scheme::Bicm => 0.0,
        Scheme::Mlc => 0.3,
    }
}

/// Exact coefficients `c[u][v]` of `x^u y^v` in `W`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenFunCoeffs {
    pub b_half: usize,
    pub k_sym: usize,
    pub l: usize,
    table: Vec<Vec<BigUint>>,
}

fn binomial_row(r: usize) -> Vec<BigUint> {
    let mut row = vec![BigUint::one()];
    for i in 0..r {
        let next = &row[i] * BigUint::from(r - i) / BigUint::from(i + 1);
        row.push(next);
    }
    row
}

fn poly_mul(a: &[BigUint], b: &[BigUint]) -> Vec<BigUint> {
    let mut out = vec![BigUint::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

impl GenFunCoeffs {
    pub fn get(&self, u: usize, v: usize) -> &BigUint {
        &self.table[u][v]
    }

    pub fn row(&self, u: usize) -> &[BigUint] {
        &self.table[u]
    }
}

/// Expands `W_{b_half, k_sym, L}` exactly.
pub fn genfun(b_half: usize, k_sym: usize, l: usize) -> Result<GenFunCoeffs> {
    if b_half == 0 || b_half * l > k_sym {
        return Err(Error::InvalidParameter(format!(
            "generating function needs B/2 * L <= k_sym, got {b_half} * {l} > {k_sym}"
        )));
    }
    let rest = binomial_row(k_sym - b_half * l);
    let choose_l = binomial_row(l);
    let mut step = binomial_row(b_half);
    step[0] = BigUint::zero();
    let mut table = vec![vec![BigUint::zero(); l + 1]; k_sym + 1];
    let mut q = vec![BigUint::one()];
    for v in 0..=l {
        let p = poly_mul(&q, &rest);
        for (u, c) in p.into_iter().enumerate() {
            table[u][v] = c * &choose_l[v];
        }
        if v < l {
            q = poly_mul(&q, &step);
        }
    }
    Ok(GenFunCoeffs { b_half, k_sym, l, table })
}

/// `a / b` in floating point for arbitrarily large integers.
fn big_ratio(a: &BigUint, b: &BigUint) -> f64 {
    let bits = b.bits();
    let shift = bits.saturating_sub(900);
    let (a, b) = (a >> shift, b >> shift);
    a.to_f64().unwrap_or(f64::INFINITY) / b.to_f64().unwrap_or(f64::INFINITY)
}

/// Conditional pmfs `Pr(V = v | U = u)` for every `u`.
#[derive(Clone, Debug, PartialEq)]
pub struct CondTable {
    pub b_half: usize,
    pub k_sym: usize,
    pub l: usize,
    rows: Vec<Vec<f64>>,
}

impl CondTable {
    pub fn new(g: &GenFunCoeffs) -> CondTable {
        let rows = g
            .table
            .iter()
            .map(|row| {
                let total: BigUint = row.iter().sum();
                row.iter().map(|c| big_ratio(c, &total)).collect()
            })
            .collect();
        CondTable { b_half: g.b_half, k_sym: g.k_sym, l: g.l, rows }
    }

    /// Builds the table, in floating point while every coefficient fits
    /// (`k_sym <= 1000`) and exactly otherwise.
    pub fn build(b_half: usize, k_sym: usize, l: usize) -> Result<CondTable> {
        if k_sym <= 1000 {
            CondTable::build_float(b_half, k_sym, l)
        } else {
            CondTable::build_exact(b_half, k_sym, l)
        }
    }

    pub fn build_exact(b_half: usize, k_sym: usize, l: usize) -> Result<CondTable> {
        Ok(CondTable::new(&genfun(b_half, k_sym, l)?))
    }

    /// Same expansion as [`genfun`] in `f64`. All terms are non-negative, so
    /// the relative error stays near machine precision; coefficients are
    /// bounded by `2^k_sym`.
    pub fn build_float(b_half: usize, k_sym: usize, l: usize) -> Result<CondTable> {
        if b_half == 0 || b_half * l > k_sym {
            return Err(Error::InvalidParameter(format!(
                "generating function needs B/2 * L <= k_sym, got {b_half} * {l} > {k_sym}"
            )));
        }
        if k_sym > 1020 {
            return Err(Error::InvalidParameter(format!("{k_sym} symbols overflow f64 coefficients")));
        }
        let float_row = |r: usize| {
            let mut row = vec![1.0f64];
            for i in 0..r {
                row.push(row[i] * (r - i) as f64 / (i + 1) as f64);
            }
            row
        };
        let choose_l = float_row(l);
        let mut step = float_row(b_half);
        step[0] = 0.0;
        // a = q(x)^v (1+x)^{k_sym - B/2 L}, updated in place.
        let mut a = float_row(k_sym - b_half * l);
        a.resize(k_sym + 1, 0.0);
        let mut deg = k_sym - b_half * l;
        let mut rows = vec![vec![0.0; l + 1]; k_sym + 1];
        for v in 0..=l {
            for (u, &c) in a.iter().enumerate().take(deg + 1) {
                rows[u][v] = c * choose_l[v];
            }
            if v < l {
                let mut next = vec![0.0; k_sym + 1];
                for (i, &x) in a.iter().enumerate().take(deg + 1) {
                    if x == 0.0 {
                        continue;
                    }
                    for (j, &y) in step.iter().enumerate().skip(1) {
                        next[i + j] += x * y;
                    }
                }
                a = next;
                deg += b_half;
            }
        }
        for row in rows.iter_mut() {
            let total: f64 = row.iter().sum();
            for c in row.iter_mut() {
                *c /= total;
            }
        }
        Ok(CondTable { b_half, k_sym, l, rows })
    }

    pub fn row(&self, u: usize) -> &[f64] {
        &self.rows[u]
    }
}

/// `Pr(V = v | U = u)`.
pub fn cond_v_dist(table: &CondTable, u: usize) -> Result<Vec<f64>> {
    table
        .rows
        .get(u)
        .cloned()
        .ok_or_else(|| Error::InvalidParameter(format!("u = {u} exceeds {}", table.k_sym)))
}

/// `Pr(V = v)` by total probability over `U`.
pub fn v_dist(table: &CondTable, u_dist: &WeightDistribution) -> Result<Vec<f64>> {
    if u_dist.u_max() != table.k_sym {
        return Err(Error::InvalidParameter(format!(
            "weight support {} does not match {} symbols",
            u_dist.u_max(),
            table.k_sym
        )));
    }
    let mut out = vec![0.0; table.l + 1];
    for (u, &pu) in u_dist.pmf().iter().enumerate() {
        if pu == 0.0 {
            continue;
        }
        for (o, &c) in out.iter_mut().zip(&table.rows[u]) {
            *o += pu * c;
        }
    }
    Ok(out)
}

/// PMF over `0..=T` plus the aggregated mass above `T`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncPmf {
    head: Vec<f64>,
    tail: f64,
}

impl TruncPmf {
    /// Point mass at zero.
    pub fn unit(t: usize) -> TruncPmf {
        let mut head = vec![0.0; t + 1];
        head[0] = 1.0;
        TruncPmf { head, tail: 0.0 }
    }

    pub fn from_pmf(pmf: &[f64], t: usize) -> TruncPmf {
        let mut head = vec![0.0; t + 1];
        let mut tail = 0.0;
        for (i, &p) in pmf.iter().enumerate() {
            if i <= t {
                head[i] = p;
            } else {
                tail += p;
            }
        }
        TruncPmf { head, tail }
    }

    pub fn head(&self) -> &[f64] {
        &self.head
    }

    /// `Pr(Y > T)`.
    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn total(&self) -> f64 {
        self.head.iter().sum::<f64>() + self.tail
    }

    /// Distribution of the sum of two independent variables, truncated at
    /// the same `T`. The tail is accumulated from products only.
    pub fn convolve(&self, other: &TruncPmf) -> TruncPmf {
        let t = self.head.len() - 1;
        let mut head = vec![0.0; t + 1];
        let mut tail = self.tail * other.total() + other.tail * self.head.iter().sum::<f64>();
        for (i, &a) in self.head.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.head.iter().enumerate() {
                if i + j <= t {
                    head[i + j] += a * b;
                } else {
                    tail += a * b;
                }
            }
        }
        TruncPmf { head, tail }
    }

    /// `e`-fold self-convolution.
    pub fn pow(&self, mut e: usize) -> TruncPmf {
        let mut acc = TruncPmf::unit(self.head.len() - 1);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.convolve(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.convolve(&base);
            }
        }
        acc
    }
}

impl TruncPmf {
    /// Sum of `count` independent copies of `pmf`, truncated at `t`.
    ///
    /// Uses the power recurrence `n f0 g_n = sum_k ((count+1) k - n) f_k g_{n-k}`
    /// while every coefficient is non-negative (`n <= count + 1`) and falls
    /// back to repeated squaring otherwise.
    pub fn iid_sum(pmf: &[f64], count: usize, t: usize) -> TruncPmf {
        let direct = || TruncPmf::from_pmf(pmf, t).pow(count);
        let f0 = pmf.first().copied().unwrap_or(0.0);
        let support = count * pmf.len().saturating_sub(1);
        if count == 0 || f0 <= 0.0 || count < t + 1 {
            return direct();
        }
        let g0 = f0.powi(count as i32);
        if g0 == 0.0 || !g0.is_normal() {
            return direct();
        }
        let c1 = (count + 1) as f64;
        let mut g = Vec::with_capacity(t + 16);
        g.push(g0);
        let mut tail = 0.0;
        let mut n = 1;
        loop {
            if n > support {
                break;
            }
            if n > count + 1 {
                return direct();
            }
            let mut acc = 0.0;
            for k in 1..pmf.len().min(n + 1) {
                acc += (c1 * k as f64 - n as f64) * pmf[k] * g[n - k];
            }
            let gn = acc / (n as f64 * f0);
            g.push(gn);
            if n > t {
                tail += gn;
                let head_mass: f64 = g[..=t].iter().sum();
                if 1.0 - head_mass > 1e-6 {
                    // Heavy tail: complement is accurate enough here.
                    tail = (1.0 - head_mass).max(tail);
                    break;
                }
                if gn <= tail * 1e-18 && gn <= g[n - 1] {
                    break;
                }
            }
            n += 1;
        }
        g.resize(t + 1, 0.0);
        TruncPmf { head: g, tail }
    }
}

/// Distribution of `Y = sum_j V_j` for independent strips, truncated at `t`.
pub fn y_dist(strips: &[Vec<f64>], t: usize) -> TruncPmf {
    strips
        .iter()
        .fold(TruncPmf::unit(t), |acc, s| acc.convolve(&TruncPmf::from_pmf(s, t)))
}

/// Union bound on the frame error rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FerBound {
    /// `sum_i Pr(Y_i > T)`, possibly above 1.
    pub raw: f64,
}

impl FerBound {
    pub fn value(&self) -> f64 {
        self.raw.min(1.0)
    }
}

pub fn fer_bound(words: &[TruncPmf]) -> FerBound {
    FerBound { raw: words.iter().map(TruncPmf::tail).sum() }
}

/// `(1 + gamma) (T + 1) / (M N B) * FER`.
pub fn ber_estimate(fer: f64, config: &ConcatConfig) -> f64 {
    let o = &config.outer;
    (1.0 + gamma(config.scheme)) * (o.t + 1) as f64 / (config.outer_words * o.n * o.bits as usize) as f64 * fer
}

/// Required SNR for a target FER.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RequiredSnr {
    pub snr_db: f64,
    /// A bracketing grid entry had no observed error events.
    pub low_confidence: bool,
}

/// Caches conditional tables across evaluations.
#[derive(Default)]
pub struct FerModel {
    tables: Mutex<HashMap<(usize, usize, usize), Arc<CondTable>>>,
}

impl FerModel {
    pub fn new() -> FerModel {
        FerModel::default()
    }

    pub fn table(&self, b_half: usize, k_sym: usize, l: usize) -> Result<Arc<CondTable>> {
        let key = (b_half, k_sym, l);
        if let Some(t) = self.tables.lock().expect("table cache poisoned").get(&key) {
            return Ok(t.clone());
        }
        let t = Arc::new(CondTable::build(b_half, k_sym, l)?);
        self.tables.lock().expect("table cache poisoned").insert(key, t.clone());
        Ok(t)
    }

    /// Frame-error bound of `config` given the inner error-weight pmf.
    pub fn fer(&self, config: &ConcatConfig, u: &WeightDistribution) -> Result<FerBound> {
        let slots = slots_per_word(config.outer.bits, config.inner.k(), config.scheme)?;
        if config.outer_words * config.outer.n != config.inner_words * slots {
            return Err(Error::Infeasible(format!("{config}: unbalanced frame")));
        }
        let b_half = config.outer.bits as usize / 2;
        let k_sym = u_max(&config.inner_key());
        let t = config.outer.t;
        // Card dealing gives every outer word the same strip profile.
        let profile = AdjacencyMatrix::card_dealing_profile(config.outer.n, config.inner_words);
        let mut y = TruncPmf::unit(t);
        for (&l, &count) in &profile {
            let v = v_dist(&*self.table(b_half, k_sym, l)?, u)?;
            y = y.convolve(&TruncPmf::iid_sum(&v, count, t));
        }
        let raw = config.outer_words as f64 * y.tail();
        Ok(FerBound { raw })
    }

    /// Frame-error bound at any SNR within the grid span.
    pub fn fer_at<S: DistSource + ?Sized>(&self, config: &ConcatConfig, src: &S, snr_db: f64) -> Result<FerBound> {
        GridEvaluator::new(self, src).fer_at(config, snr_db)
    }

    /// Smallest SNR in the grid span whose estimated FER is at most
    /// `target`, resolved to 0.001 dB.
    pub fn required_snr<S: DistSource + ?Sized>(
        &self,
        config: &ConcatConfig,
        src: &S,
        target: f64,
    ) -> Result<RequiredSnr> {
        GridEvaluator::new(self, src).required_snr(config, target)
    }
}

struct StripPmf {
    v: Vec<f64>,
    low_confidence: bool,
}

/// FER evaluation against one distribution source.
///
/// Strip pmfs `Pr(V = v)` are memoized per grid point; between grid points
/// they are mixed linearly, which equals feeding the interpolated weight
/// distribution through the strip model.
pub struct GridEvaluator<'a, S: DistSource + ?Sized> {
    model: &'a FerModel,
    src: &'a S,
    strips: Mutex<HashMap<(InnerKey, usize, usize), Arc<StripPmf>>>,
}

impl<'a, S: DistSource + ?Sized> GridEvaluator<'a, S> {
    pub fn new(model: &'a FerModel, src: &'a S) -> Self {
        GridEvaluator { model, src, strips: Mutex::new(HashMap::new()) }
    }

    fn strip(&self, config: &ConcatConfig, index: usize, l: usize) -> Result<Arc<StripPmf>> {
        let key = (config.inner_key(), index, l);
        if let Some(s) = self.strips.lock().expect("strip cache poisoned").get(&key) {
            return Ok(s.clone());
        }
        let u = self.src.at(&key.0, index)?;
        let table = self.model.table(config.outer.bits as usize / 2, u_max(&key.0), l)?;
        let s = Arc::new(StripPmf { v: v_dist(&table, &u)?, low_confidence: u.is_low_confidence() });
        self.strips.lock().expect("strip cache poisoned").insert(key, s.clone());
        Ok(s)
    }

    /// FER with strip pmfs mixed as `(1 - w) at lo + w at hi`; also reports
    /// whether either grid point had no observed errors.
    fn fer_mixed(&self, config: &ConcatConfig, lo: usize, hi: usize, w: f64) -> Result<(FerBound, bool)> {
        let slots = slots_per_word(config.outer.bits, config.inner.k(), config.scheme)?;
        if config.outer_words * config.outer.n != config.inner_words * slots {
            return Err(Error::Infeasible(format!("{config}: unbalanced frame")));
        }
        let t = config.outer.t;
        let profile = AdjacencyMatrix::card_dealing_profile(config.outer.n, config.inner_words);
        let mut y = TruncPmf::unit(t);
        let mut low = false;
        for (&l, &count) in &profile {
            let a = self.strip(config, lo, l)?;
            low |= a.low_confidence;
            let strip = if lo == hi || w == 0.0 {
                a.v.clone()
            } else {
                let b = self.strip(config, hi, l)?;
                low |= b.low_confidence;
                a.v.iter().zip(&b.v).map(|(x, y)| (1.0 - w) * x + w * y).collect()
            };
            y = y.convolve(&TruncPmf::iid_sum(&strip, count, t));
        }
        Ok((FerBound { raw: config.outer_words as f64 * y.tail() }, low))
    }

    pub fn fer_at(&self, config: &ConcatConfig, snr_db: f64) -> Result<FerBound> {
        let (lo, hi, w) = self.src.grid().bracket(snr_db)?;
        Ok(self.fer_mixed(config, lo, hi, w)?.0)
    }

    /// See [`FerModel::required_snr`].
    pub fn required_snr(&self, config: &ConcatConfig, target: f64) -> Result<RequiredSnr> {
        let grid = self.src.grid();
        let meets = |i: usize| -> Result<(bool, bool)> {
            let (f, low) = self.fer_mixed(config, i, i, 0.0)?;
            Ok((f.value() <= target, low))
        };
        let last = grid.len() - 1;
        let (ok_last, low_last) = meets(last)?;
        if !ok_last {
            return Err(Error::OutOfRange(format!(
                "{config}: FER target {target:e} not reached by {:.2} dB",
                grid.max_db()
            )));
        }
        let (ok_first, low_first) = meets(0)?;
        if ok_first {
            return Ok(RequiredSnr { snr_db: grid.min_db(), low_confidence: low_first });
        }
        let (mut lo, mut hi, mut low_hi, mut low_lo) = (0, last, low_last, low_first);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            let (ok, low) = meets(mid)?;
            if ok {
                hi = mid;
                low_hi = low;
            } else {
                lo = mid;
                low_lo = low;
            }
        }
        // Bisect the mixing weight between the two bracketing grid points.
        let step = grid.snr_db(hi) - grid.snr_db(lo);
        let (mut a, mut b) = (0.0, 1.0);
        while (b - a) * step > 1e-3 {
            let mid = 0.5 * (a + b);
            if self.fer_mixed(config, lo, hi, mid)?.0.value() <= target {
                b = mid;
            } else {
                a = mid;
            }
        }
        Ok(RequiredSnr { snr_db: grid.snr_db(lo) + b * step, low_confidence: low_lo || low_hi })
    }
}
