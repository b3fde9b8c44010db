//! Run configuration: an optional TOML (or JSON manifest) file overlaid by
//! command-line flags.

use std::path::{Path, PathBuf};

use pamfec::chain::ChainBudget;
use pamfec::dist_db::{Budget, SnrGrid};
use pamfec::search::{SearchOptions, SearchSpace};
use pamfec::{ConcatConfig, Error, InnerCode, InnerKey, Result, Scheme};
use serde::{Deserialize, Serialize};

/// SNR grid in dB.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub start_db: f64,
    pub stop_db: f64,
    pub step_db: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        let g = SnrGrid::default();
        GridSpec { start_db: g.min_db(), stop_db: g.max_db(), step_db: g.step_centi_db as f64 / 100.0 }
    }
}

impl GridSpec {
    pub fn grid(&self) -> Result<SnrGrid> {
        SnrGrid::new(self.start_db, self.stop_db, self.step_db)
    }
}

/// Every setting a command may read. Serialized verbatim into manifests, and
/// a manifest can be fed back through `--config`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Worker threads; 0 lets the pool decide.
    pub threads: usize,
    /// Concatenated system as `M,N,T,m,n,b,t,J,Type`.
    pub system: Option<String>,
    /// Inner codes for `build-db`, as `ebch:n,b,t,J` or `spc:n`.
    pub inner: Vec<String>,
    pub schemes: Vec<Scheme>,
    /// SNR points for `simulate`.
    pub snr: Vec<f64>,
    pub database: Option<PathBuf>,
    /// Estimate entries missing from the database on demand.
    pub fill_missing: bool,
    pub grid: GridSpec,
    pub budget: Budget,
    pub chain: ChainBudget,
    pub search: SearchSpace,
    pub options: SearchOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            threads: 0,
            system: None,
            inner: Vec::new(),
            schemes: vec![Scheme::Mlc],
            snr: Vec::new(),
            database: None,
            fill_missing: false,
            grid: GridSpec::default(),
            budget: Budget::default(),
            chain: ChainBudget::default(),
            search: SearchSpace::default(),
            options: SearchOptions::default(),
        }
    }
}

impl RunConfig {
    /// Reads a TOML file, or a JSON manifest whose `config` is reused.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if is_json {
            let v: serde_json::Value = serde_json::from_str(&text)?;
            let body = v.get("manifest").unwrap_or(&v);
            let cfg = body.get("config").cloned().unwrap_or(v.clone());
            return serde_json::from_value(cfg).map_err(|e| invalid(path, e));
        }
        toml::from_str(&text).map_err(|e| invalid(path, e))
    }

    pub fn concat_config(&self) -> Result<ConcatConfig> {
        let row = self
            .system
            .as_deref()
            .ok_or_else(|| Error::InvalidParameter("no system given (--system or `system` in the config)".into()))?;
        row.parse()
    }

    pub fn inner_keys(&self) -> Result<Vec<InnerKey>> {
        if self.inner.is_empty() {
            return Err(Error::InvalidParameter("no inner codes given (--inner or `inner` in the config)".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::InvalidParameter("no schemes given".into()));
        }
        let mut keys = Vec::new();
        for text in &self.inner {
            let code: InnerCode = text.parse()?;
            for &scheme in &self.schemes {
                let key = InnerKey { scheme, code };
                if !keys.contains(&key) {
                    keys.push(key);
                }
            }
        }
        Ok(keys)
    }
}

fn invalid(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::InvalidParameter(format!("{}: {e}", path.display()))
}

/// Parses `a,b,c` integer lists whose items may be inclusive ranges `lo-hi`.
pub fn parse_ints(text: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let bad = || Error::InvalidParameter(format!("cannot parse {item:?} as an integer or range"));
        match item.split_once('-') {
            Some((lo, hi)) => {
                let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
                let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
                if lo > hi {
                    return Err(bad());
                }
                out.extend(lo..=hi);
            }
            None => out.push(item.parse().map_err(|_| bad())?),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_lists() {
        assert_eq!(parse_ints("1-3, 7").unwrap(), vec![1, 2, 3, 7]);
        assert!(parse_ints("3-1").is_err());
        assert!(parse_ints("x").is_err());
    }

    #[test]
    fn toml_round_trip() {
        let cfg = RunConfig { system: Some("10,544,15,544,57,6,1,2,MLC".into()), ..RunConfig::default() };
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(toml::from_str::<RunConfig>(&text).unwrap(), cfg);
        assert!(toml::from_str::<RunConfig>("sede = 3").is_err());
        let partial: RunConfig = toml::from_str("seed = 9\n[budget]\nbatch = 10\n").unwrap();
        assert_eq!(partial.seed, 9);
        assert_eq!(partial.budget.batch, 10);
        assert_eq!(partial.budget.min_frames, Budget::default().min_frames);
    }
}
