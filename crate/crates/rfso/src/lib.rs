//! Throughput and outage analysis of hybrid RF-FSO links under
//! incremental-redundancy HARQ.
//!
//! A joint link sends every codeword simultaneously over a radio-frequency
//! (RF) carrier and a free-space optical (FSO) carrier; the receiver decodes
//! from the accumulated mutual information of both. The RF fading gain is
//! quasi-static over a packet while the FSO turbulence gain changes `N` times
//! per HARQ round. This crate provides
//!
//! - seeded channel models and samplers ([`channel`]),
//! - the accumulated-mutual-information model and coupled Monte Carlo
//!   estimation of decoding probabilities ([`harq`]),
//! - a Gaussian (CLT) reduction of the FSO contribution with closed-form
//!   approximations and two-sided bounds of the resulting outage CDF
//!   ([`clt`]),
//! - product/sum bounds for the few-realization regime where the CLT is not
//!   trustworthy ([`small_n`]),
//! - RF/FSO power allocation rules under a sum-power constraint ([`power`]),
//! - the self-contained special functions everything above needs
//!   ([`specfun`]) and the adaptive quadrature backing them ([`quad`]).
//!
//! All randomness flows through [`channel::RngStream`], a counter-based
//! (seed, stream) scheme: a fixed seed reproduces bit-identical results
//! regardless of how work is split across threads.

pub mod channel;
pub mod clt;
pub mod error;
pub mod harq;
pub mod power;
pub mod quad;
pub mod small_n;
pub mod specfun;

pub use channel::{FsoTurbulence, Normalization, RfChannel, RngStream};
pub use clt::CltMoments;
pub use error::Error;
pub use harq::{DecodingProfile, HarqConfig, MonteCarloEstimate, PowerSplit};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
