//! Concatenated Reed-Solomon + soft-decision BCH coded modulation over PAM4.
//!
//! The crate covers the whole chain: finite-field codecs, Chase and Wagner
//! soft-decision inner decoding, BICM/MLC PAM4 mapping with exact LLRs, the
//! card-dealing interleaver, Monte-Carlo estimation of the inner decoder's
//! PAM4-symbol error-weight distribution, the generating-function based
//! frame-error-rate estimator, the performance/complexity/latency metrics and
//! a Pareto search over code parameters.

pub mod chain;
pub mod codecs;
pub mod config;
pub mod dist_db;
pub mod error;
pub mod fer_model;
pub mod gf;
pub mod inner_sd;
pub mod interleaver;
pub mod link;
pub mod metrics;
pub mod modem;
pub mod search;
mod seed;

pub use config::{ConcatConfig, InnerCode, InnerKey, OuterCode, Scheme};
pub use error::{Error, Result};
