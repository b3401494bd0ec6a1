//! Incremental-redundancy HARQ over the joint RF-FSO link: the accumulated
//! mutual information (AMI) model, coupled Monte Carlo estimation of the
//! per-round decoding probabilities, and the throughput/outage metrics.
//!
//! After round `m` the receiver has
//!
//! ```text
//! W_m = log(1 + P_RF G_RF) + (ψ / mN) Σ_{j<=m} Σ_{i<=N} log(1 + c P_FSO G_ij)
//! ```
//!
//! with the RF gain frozen for the whole packet and `N` fresh FSO gains per
//! round. Decoding succeeds once `W_m > R/m`. Throughput and outage follow
//! from the probabilities `p_m = Pr(W_m <= R/m)` alone:
//!
//! ```text
//! η = R (1 - p_M) / (1 + Σ_{m<M} p_m),    Pr(outage) = p_M
//! ```
//!
//! The Monte Carlo estimator evaluates all M events on one gain trajectory
//! per packet. Because m W_m is non-decreasing in m along a trajectory, the
//! empirical profile is exactly non-increasing, not just in expectation.

use rayon::prelude::*;

use crate::channel::{FsoTurbulence, RfChannel, RngStream};
use crate::error::Error;
use crate::Result;

/// Packets per worker chunk. Fixed so that estimates do not depend on the
/// number of threads, only on the stream ids.
const CHUNK: u64 = 16_384;

/// HARQ and detection configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarqConfig {
    /// Initial code rate R in nats per channel use.
    pub rate_r: f64,
    /// Maximum number of transmission rounds M (M = 1 is open loop).
    pub max_rounds_m: u32,
    /// FSO channel realizations per round N.
    pub fso_realizations_n: u32,
    /// Relative symbol rate ψ of the FSO link.
    pub psi: f64,
    /// Detection constant c: 1 for heterodyne, e/(2π) for IM/DD.
    pub detection_c: f64,
}

impl HarqConfig {
    pub fn new(rate_r: f64, max_rounds_m: u32, fso_realizations_n: u32) -> Result<Self> {
        let cfg = HarqConfig {
            rate_r,
            max_rounds_m,
            fso_realizations_n,
            psi: 1.0,
            detection_c: 1.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Detection constant for intensity modulation / direct detection.
    pub const IM_DD: f64 = std::f64::consts::E / (2.0 * std::f64::consts::PI);

    pub fn validate(&self) -> Result<()> {
        if !(self.rate_r > 0.0)
            || self.max_rounds_m < 1
            || self.fso_realizations_n < 1
            || !(self.psi > 0.0)
            || !(self.detection_c > 0.0)
        {
            return Err(Error::contract("HarqConfig", format!("invalid config {self:?}")));
        }
        Ok(())
    }
}

/// Transmission powers (linear scale, noise-normalized). The SNR in dB is
/// 10 log10(p_rf + p_fso).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSplit {
    pub p_rf: f64,
    pub p_fso: f64,
}

impl PowerSplit {
    pub fn new(p_rf: f64, p_fso: f64) -> Result<Self> {
        if !(p_rf >= 0.0) || !(p_fso >= 0.0) || !(p_rf + p_fso > 0.0) {
            return Err(Error::contract(
                "PowerSplit",
                format!("powers must be >= 0 with positive sum, got ({p_rf}, {p_fso})"),
            ));
        }
        Ok(PowerSplit { p_rf, p_fso })
    }

    /// Split a total budget by the RF fraction `ratio`.
    pub fn from_total(total: f64, ratio_rf: f64) -> Result<Self> {
        if !(total > 0.0) || !(0.0..=1.0).contains(&ratio_rf) {
            return Err(Error::contract(
                "PowerSplit",
                format!("need total > 0 and ratio in [0,1], got ({total}, {ratio_rf})"),
            ));
        }
        PowerSplit::new(total * ratio_rf, total * (1.0 - ratio_rf))
    }

    pub fn total(&self) -> f64 {
        self.p_rf + self.p_fso
    }

    pub fn snr_db(&self) -> f64 {
        10.0 * self.total().log10()
    }
}

/// The probabilities Pr(W_m <= R/m) for m = 1..M.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodingProfile {
    probs: Vec<f64>,
}

impl DecodingProfile {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::contract("DecodingProfile", "profile must have length >= 1"));
        }
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::contract("DecodingProfile", "entries must lie in [0,1]"));
        }
        Ok(DecodingProfile { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn rounds(&self) -> usize {
        self.probs.len()
    }

    /// True when p_m is non-increasing in m (holds exactly for coupled
    /// trajectories).
    pub fn is_non_increasing(&self) -> bool {
        self.probs.windows(2).all(|w| w[1] <= w[0])
    }
}

/// A probability estimate with its 95% confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub value: f64,
    pub half_width_95: f64,
    pub trials: u64,
    pub seed: u64,
}

impl MonteCarloEstimate {
    fn from_count(count: u64, trials: u64, seed: u64) -> Self {
        let p = count as f64 / trials as f64;
        MonteCarloEstimate {
            value: p,
            half_width_95: 1.96 * (p * (1.0 - p) / trials as f64).sqrt(),
            trials,
            seed,
        }
    }
}

/// Accumulated mutual information after round `m` (Eq. model above).
///
/// `g_fso` holds the m*N turbulence gains row-major (round-major); the
/// length must be exactly `m * cfg.fso_realizations_n`.
pub fn ami(
    g_rf: f64,
    g_fso: &[f64],
    m: u32,
    cfg: &HarqConfig,
    pw: &PowerSplit,
) -> Result<f64> {
    cfg.validate()?;
    if m < 1 {
        return Err(Error::contract("ami", "m must be >= 1"));
    }
    let n = cfg.fso_realizations_n as usize;
    if g_fso.len() != m as usize * n {
        return Err(Error::contract(
            "ami",
            format!("expected {} FSO gains, got {}", m as usize * n, g_fso.len()),
        ));
    }
    if !(g_rf >= 0.0) || g_fso.iter().any(|g| !(*g >= 0.0)) {
        return Err(Error::contract("ami", "gains must be non-negative"));
    }
    let fso_sum: f64 = g_fso
        .iter()
        .map(|&g| (cfg.detection_c * pw.p_fso * g).ln_1p())
        .sum();
    Ok((pw.p_rf * g_rf).ln_1p() + cfg.psi * fso_sum / (m as f64 * n as f64))
}

/// Per-chunk tally used by the Monte Carlo estimator.
struct ChunkTally {
    counts: Vec<u64>,
    nesting_ok: bool,
}

fn run_chunk(
    cfg: &HarqConfig,
    pw: &PowerSplit,
    rf: &RfChannel,
    fso: &FsoTurbulence,
    packets: u64,
    stream: RngStream,
) -> ChunkTally {
    let m_max = cfg.max_rounds_m as usize;
    let n = cfg.fso_realizations_n as usize;
    let mut rng = stream.rng();
    let mut counts = vec![0u64; m_max];
    let mut nesting_ok = true;
    let c_pf = cfg.detection_c * pw.p_fso;
    for _ in 0..packets {
        let g_rf = rf.sample_one(&mut rng);
        let rf_term = (pw.p_rf * g_rf).ln_1p();
        let mut fso_sum = 0.0;
        let mut prev_scaled = f64::NEG_INFINITY;
        for m in 1..=m_max {
            for _ in 0..n {
                let g = fso.sample_one(&mut rng);
                fso_sum += (c_pf * g).ln_1p();
            }
            // m * W_m = m * rf_term + psi * fso_sum / N; non-decreasing in m
            let scaled = m as f64 * rf_term + cfg.psi * fso_sum / n as f64;
            if scaled < prev_scaled {
                nesting_ok = false;
            }
            prev_scaled = scaled;
            if scaled <= cfg.rate_r {
                counts[m - 1] += 1;
            }
        }
    }
    ChunkTally { counts, nesting_ok }
}

/// Estimate the decoding profile by coupled Monte Carlo.
///
/// Each packet draws one RF gain (quasi-static over retransmissions) and
/// `N` fresh FSO gains per round; all M events are evaluated on that one
/// trajectory. Trials are partitioned into fixed-size chunks, each chunk
/// owning `stream.substream(k)`, so the merged estimate is bit-identical
/// for any number of worker threads.
pub fn mc_decoding_profile(
    cfg: &HarqConfig,
    pw: &PowerSplit,
    rf: &RfChannel,
    fso: &FsoTurbulence,
    trials: u64,
    stream: RngStream,
) -> Result<(DecodingProfile, Vec<MonteCarloEstimate>)> {
    cfg.validate()?;
    rf.validate()?;
    fso.validate()?;
    if trials < 1_000 {
        return Err(Error::contract("mc_decoding_profile", "need at least 10^3 trials"));
    }
    let m_max = cfg.max_rounds_m as usize;
    let n_chunks = trials.div_ceil(CHUNK);
    let tallies: Vec<ChunkTally> = (0..n_chunks)
        .into_par_iter()
        .map(|k| {
            let packets = CHUNK.min(trials - k * CHUNK);
            run_chunk(cfg, pw, rf, fso, packets, stream.substream(k))
        })
        .collect();

    let mut counts = vec![0u64; m_max];
    let mut nesting_ok = true;
    for t in &tallies {
        for (acc, c) in counts.iter_mut().zip(&t.counts) {
            *acc += c;
        }
        nesting_ok &= t.nesting_ok;
    }
    if !nesting_ok {
        return Err(Error::numeric(
            "mc_decoding_profile",
            "per-trajectory AMI nesting violated",
        ));
    }
    let estimates: Vec<MonteCarloEstimate> = counts
        .iter()
        .map(|&c| MonteCarloEstimate::from_count(c, trials, stream.seed))
        .collect();
    let profile = DecodingProfile::new(estimates.iter().map(|e| e.value).collect())?;
    Ok((profile, estimates))
}

/// Long-run throughput R (1 - p_M) / (1 + Σ_{m<M} p_m) in nats per channel
/// use.
pub fn throughput(profile: &DecodingProfile, rate_r: f64) -> f64 {
    let p = profile.probs();
    let m = p.len();
    let denom = 1.0 + p[..m - 1].iter().sum::<f64>();
    rate_r * (1.0 - p[m - 1]) / denom
}

/// Outage probability Pr(W_M <= R/M): the last profile entry.
pub fn outage(profile: &DecodingProfile) -> f64 {
    *profile.probs().last().expect("non-empty by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Normalization;

    fn cfg(r: f64, m: u32, n: u32) -> HarqConfig {
        HarqConfig::new(r, m, n).unwrap()
    }

    #[test]
    fn ami_zero_gains() {
        let c = cfg(4.0, 2, 3);
        let pw = PowerSplit::new(1.0, 1.0).unwrap();
        let v = ami(0.0, &[0.0; 6], 2, &c, &pw).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn ami_rf_only() {
        let c = cfg(4.0, 1, 1);
        let pw = PowerSplit::new(1.0, 0.0).unwrap();
        let v = ami(std::f64::consts::E - 1.0, &[5.0], 1, &c, &pw).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ami_direct_substitution() {
        let c = cfg(4.0, 1, 1);
        let pw = PowerSplit::new(1.0, 1.0).unwrap();
        let v = ami(1.0, &[1.0], 1, &c, &pw).unwrap();
        assert!((v - 2.0 * std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn ami_dimension_mismatch() {
        let c = cfg(4.0, 2, 3);
        let pw = PowerSplit::new(1.0, 1.0).unwrap();
        assert!(ami(1.0, &[1.0; 5], 2, &c, &pw).is_err());
    }

    #[test]
    fn power_split_rejects_zero_sum() {
        assert!(PowerSplit::new(0.0, 0.0).is_err());
        assert!(PowerSplit::new(-1.0, 2.0).is_err());
    }

    #[test]
    fn throughput_formula_cases() {
        let p0 = DecodingProfile::new(vec![0.0, 0.0, 0.0]).unwrap();
        assert_eq!(throughput(&p0, 4.0), 4.0);
        let p1 = DecodingProfile::new(vec![1.0, 1.0]).unwrap();
        assert_eq!(throughput(&p1, 4.0), 0.0);
        let p = DecodingProfile::new(vec![0.5, 0.2]).unwrap();
        assert!((throughput(&p, 6.0) - 3.2).abs() < 1e-15);
    }

    #[test]
    fn outage_is_last_entry() {
        let p = DecodingProfile::new(vec![0.5, 0.0]).unwrap();
        assert_eq!(outage(&p), 0.0);
        let q = DecodingProfile::new(vec![0.3]).unwrap();
        assert_eq!(outage(&q), 0.3);
    }

    #[test]
    fn tiny_rate_never_fails() {
        let c = cfg(1e-9, 2, 4);
        let pw = PowerSplit::new(5.0, 5.0).unwrap();
        let (profile, _) = mc_decoding_profile(
            &c,
            &pw,
            &RfChannel::Rayleigh,
            &FsoTurbulence::Exponential { lambda: 1.0 },
            20_000,
            RngStream::new(1, 0),
        )
        .unwrap();
        assert!(profile.probs().iter().all(|&p| p < 5e-4), "{:?}", profile.probs());
    }

    #[test]
    fn profile_is_monotone_per_run() {
        let c = cfg(5.0, 4, 3);
        let pw = PowerSplit::new(2.0, 2.0).unwrap();
        let (profile, est) = mc_decoding_profile(
            &c,
            &pw,
            &RfChannel::Rayleigh,
            &FsoTurbulence::GammaGamma { a: 4.3939, b: 2.5636 },
            50_000,
            RngStream::new(3, 0),
        )
        .unwrap();
        assert!(profile.is_non_increasing(), "{:?}", profile.probs());
        assert_eq!(est.len(), 4);
        assert!(est.iter().all(|e| e.trials == 50_000));
    }

    #[test]
    fn worker_layout_does_not_change_estimate() {
        let c = cfg(4.0, 2, 5);
        let pw = PowerSplit::new(3.0, 3.0).unwrap();
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| {
                mc_decoding_profile(
                    &c,
                    &pw,
                    &RfChannel::Rayleigh,
                    &FsoTurbulence::Exponential { lambda: 1.0 },
                    100_000,
                    RngStream::new(77, 0),
                )
                .unwrap()
                .0
            })
        };
        assert_eq!(run(1).probs(), run(4).probs());
    }

    #[test]
    fn outage_non_increasing_in_power_shared_randomness() {
        let c = cfg(4.0, 2, 10);
        let mut prev = f64::INFINITY;
        for k in 0..10 {
            let p_db = 2.0 + 2.0 * k as f64;
            let total = 10f64.powf(p_db / 10.0);
            let pw = PowerSplit::from_total(total, 0.5).unwrap();
            let (profile, _) = mc_decoding_profile(
                &c,
                &pw,
                &RfChannel::Rayleigh,
                &FsoTurbulence::Exponential { lambda: 1.0 },
                40_000,
                RngStream::new(2025, 0), // shared random numbers across the grid
            )
            .unwrap();
            let o = outage(&profile);
            assert!(o <= prev + 1e-12, "outage rose from {prev} to {o} at {p_db} dB");
            prev = o;
        }
    }

    #[test]
    fn composite_rf_channel_runs() {
        let c = cfg(3.0, 2, 4);
        let pw = PowerSplit::new(4.0, 4.0).unwrap();
        let rf = RfChannel::CompositeLogNormalRate {
            delta: 1.0,
            normalization: Normalization::UnitMean,
        };
        let (profile, _) = mc_decoding_profile(
            &c,
            &pw,
            &rf,
            &FsoTurbulence::Exponential { lambda: 1.0 },
            20_000,
            RngStream::new(4, 0),
        )
        .unwrap();
        assert!(profile.is_non_increasing());
    }
}
