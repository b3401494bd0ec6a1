//! Scenario runners: turn an [`ExperimentSpec`] into result rows.
//!
//! Every scenario expands into independent points (SNR knot x curve); the
//! points run on a worker pool, each owning an RNG stream derived from
//! (seed, point index), and merge in point order, so output bytes do not
//! depend on the thread count.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use rfso::channel::{FsoTurbulence, Normalization, RfChannel, RngStream};
use rfso::clt::{self, CltMoments};
use rfso::harq::{self, DecodingProfile, MonteCarloEstimate, PowerSplit};
use rfso::power;
use rfso::small_n::{self, ProductCdfTable, SumGGParams};

use crate::config::{ExperimentSpec, OutputFormat, Scenario};

/// Fixed build seed of the product-CDF tables and sum-density fits; these
/// estimate deterministic mathematical objects, so they do not follow the
/// experiment seed.
const TABLE_SEED: u64 = 715_517;

/// Estimation method behind a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Mc,
    CltQuadrature,
    Lemma1,
    Lemma2,
    Lemma3,
    Lemma4,
    Lemma5,
    UpperMinkowski,
    LowerJensen,
    HighSnr,
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::Mc => "mc",
            Method::CltQuadrature => "clt_quadrature",
            Method::Lemma1 => "lemma1",
            Method::Lemma2 => "lemma2",
            Method::Lemma3 => "lemma3",
            Method::Lemma4 => "lemma4",
            Method::Lemma5 => "lemma5",
            Method::UpperMinkowski => "upper_minkowski",
            Method::LowerJensen => "lower_jensen",
            Method::HighSnr => "high_snr",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        Some(match s {
            "mc" => Method::Mc,
            "clt_quadrature" => Method::CltQuadrature,
            "lemma1" => Method::Lemma1,
            "lemma2" => Method::Lemma2,
            "lemma3" => Method::Lemma3,
            "lemma4" => Method::Lemma4,
            "lemma5" => Method::Lemma5,
            "upper_minkowski" => Method::UpperMinkowski,
            "lower_jensen" => Method::LowerJensen,
            "high_snr" => Method::HighSnr,
            _ => return None,
        })
    }
}

/// Reported quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Outage,
    Throughput,
    /// fig11: optimal RF share of the sum power (in [0,1]).
    OptRatioRf,
}

impl Metric {
    pub fn tag(&self) -> &'static str {
        match self {
            Metric::Outage => "outage",
            Metric::Throughput => "throughput",
            Metric::OptRatioRf => "opt_ratio_rf",
        }
    }

    pub fn parse(s: &str) -> Option<Metric> {
        Some(match s {
            "outage" => Metric::Outage,
            "throughput" => Metric::Throughput,
            "opt_ratio_rf" => Metric::OptRatioRf,
            _ => return None,
        })
    }
}

/// One output record. CSV schema (exact header):
/// `scenario,snr_db,method,m,metric,value,ci95`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scenario: String,
    pub snr_db: f64,
    pub method: Method,
    pub m: u32,
    pub metric: Metric,
    pub value: f64,
    pub ci95: f64,
}

/// Which method families a subcommand wants.
#[derive(Debug, Clone, Copy)]
pub struct MethodMask {
    pub simulation: bool,
    pub analytic: bool,
    pub bounds: bool,
}

impl MethodMask {
    pub const ALL: MethodMask = MethodMask { simulation: true, analytic: true, bounds: true };
    pub const SIM_ONLY: MethodMask =
        MethodMask { simulation: true, analytic: false, bounds: false };
    pub const ANALYTIC_ONLY: MethodMask =
        MethodMask { simulation: false, analytic: true, bounds: false };
    pub const BOUNDS: MethodMask = MethodMask { simulation: true, analytic: false, bounds: true };
}

/// Completed run: ordered rows plus row-level failures (the run continues
/// past them).
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    pub errors: Vec<String>,
}

type PointResult = Result<Vec<ResultRow>, String>;

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Authoritative CLT moments for any turbulence law at FSO power `p_fso`.
fn moments_for(fso: &FsoTurbulence, p_fso: f64, c: f64) -> Result<CltMoments, String> {
    clt::moments_numeric(fso, p_fso, c).map_err(|e| e.to_string())
}

/// Conservative 95% half-width for the throughput estimator via the delta
/// method with triangle-inequality combination of the per-round widths.
fn throughput_half_width(profile: &DecodingProfile, est: &[MonteCarloEstimate], r: f64) -> f64 {
    let p = profile.probs();
    let m = p.len();
    let denom = 1.0 + p[..m - 1].iter().sum::<f64>();
    let eta = r * (1.0 - p[m - 1]) / denom;
    let mut hw = (r / denom) * est[m - 1].half_width_95;
    for e in &est[..m - 1] {
        hw += (eta / denom) * e.half_width_95;
    }
    hw
}

// ---------------------------------------------------------------------------
// Scenario point builders
// ---------------------------------------------------------------------------

struct Ctx {
    spec: ExperimentSpec,
    mask: MethodMask,
    cache_dir: Option<std::path::PathBuf>,
}

fn fig3_points(ctx: &Arc<Ctx>) -> Vec<Box<dyn Fn() -> PointResult + Send + Sync>> {
    let mut points: Vec<Box<dyn Fn() -> PointResult + Send + Sync>> = Vec::new();
    let mut idx = 0u64;
    for &n in &ctx.spec.n_values {
        for &snr in &ctx.spec.snr_db {
            let ctx = ctx.clone();
            let point = idx;
            idx += 1;
            points.push(Box::new(move || {
                let spec = &ctx.spec;
                let scen = format!("{}:N{}", spec.scenario.id(), n);
                let cfg = spec.harq_for(spec.max_rounds_m, n).map_err(|e| e.to_string())?;
                let pw = PowerSplit::from_total(db_to_linear(snr), 0.5).map_err(|e| e.to_string())?;
                let fso = FsoTurbulence::from(spec.fso);
                let mut rows = Vec::new();
                if ctx.mask.simulation {
                    let (profile, est) = harq::mc_decoding_profile(
                        &cfg,
                        &pw,
                        &RfChannel::from(spec.rf),
                        &fso,
                        spec.trials,
                        RngStream::new(spec.seed, point << 32),
                    )
                    .map_err(|e| e.to_string())?;
                    let last = est[profile.rounds() - 1];
                    rows.push(ResultRow {
                        scenario: scen.clone(),
                        snr_db: snr,
                        method: Method::Mc,
                        m: spec.max_rounds_m,
                        metric: Metric::Outage,
                        value: harq::outage(&profile),
                        ci95: last.half_width_95,
                    });
                }
                if ctx.mask.analytic {
                    let mom = moments_for(&fso, pw.p_fso, spec.detection_c)?;
                    let u = spec.rate_r / spec.max_rounds_m as f64;
                    let v = clt::cdf_clt(u, spec.max_rounds_m, n, &mom, pw.p_rf)
                        .map_err(|e| e.to_string())?;
                    rows.push(ResultRow {
                        scenario: scen,
                        snr_db: snr,
                        method: Method::CltQuadrature,
                        m: spec.max_rounds_m,
                        metric: Metric::Outage,
                        value: v,
                        ci95: 0.0,
                    });
                }
                Ok(rows)
            }));
        }
    }
    points
}

fn fig4to6_points(ctx: &Arc<Ctx>) -> Vec<Box<dyn Fn() -> PointResult + Send + Sync>> {
    let mut points: Vec<Box<dyn Fn() -> PointResult + Send + Sync>> = Vec::new();
    for (k, &snr) in ctx.spec.snr_db.iter().enumerate() {
        let ctx = ctx.clone();
        points.push(Box::new(move || {
            let spec = &ctx.spec;
            let scen = spec.scenario.id().to_string();
            let n = spec.fso_realizations_n;
            let cfg = spec.harq_for(spec.max_rounds_m, n).map_err(|e| e.to_string())?;
            let pw = PowerSplit::from_total(db_to_linear(snr), 0.5).map_err(|e| e.to_string())?;
            let fso = FsoTurbulence::from(spec.fso);
            let mut rows = Vec::new();
            let mut push = |method, m, value, ci| {
                rows.push(ResultRow {
                    scenario: scen.clone(),
                    snr_db: snr,
                    method,
                    m,
                    metric: Metric::Outage,
                    value,
                    ci95: ci,
                });
            };
            if ctx.mask.simulation {
                let (profile, est) = harq::mc_decoding_profile(
                    &cfg,
                    &pw,
                    &RfChannel::from(spec.rf),
                    &fso,
                    spec.trials,
                    RngStream::new(spec.seed, (k as u64) << 32),
                )
                .map_err(|e| e.to_string())?;
                for m in 1..=spec.max_rounds_m {
                    let e = est[m as usize - 1];
                    push(Method::Mc, m, profile.probs()[m as usize - 1], e.half_width_95);
                }
            }
            if ctx.mask.analytic {
                let mom = moments_for(&fso, pw.p_fso, spec.detection_c)?;
                for m in 1..=spec.max_rounds_m {
                    let u = spec.rate_r / m as f64;
                    let err = |e: rfso::Error| e.to_string();
                    push(Method::CltQuadrature, m, clt::cdf_clt(u, m, n, &mom, pw.p_rf).map_err(err)?, 0.0);
                    push(Method::Lemma1, m, clt::lemma1_f(u, m, n, &mom, pw.p_rf).map_err(err)?, 0.0);
                    push(Method::Lemma2, m, clt::lemma2_v(u, m, n, &mom, pw.p_rf).map_err(err)?, 0.0);
                    let eps = clt::epsilon_tune(m, n, &mom, pw.p_rf, u).map_err(err)?;
                    push(Method::Lemma3, m, clt::lemma3_t(u, m, n, &mom, pw.p_rf, eps).map_err(err)?, 0.0);
                    push(Method::Lemma4, m, clt::lemma4_r(u, m, n, &mom, pw.p_rf).map_err(err)?, 0.0);
                    push(Method::Lemma5, m, clt::lemma5_s(u, m, n, &mom, pw.p_rf).map_err(err)?, 0.0);
                }
            }
            Ok(rows)
        }));
    }
    points
}

fn fig7_points(ctx: &Arc<Ctx>) -> Vec<Box<dyn Fn() -> PointResult + Send + Sync>> {
    // shared deterministic tables (built once, reused by every point)
    let (a, b) = match ctx.spec.fso {
        crate::config::FsoSpec::GammaGamma { a, b } => (a, b),
        _ => (4.3939, 2.5636),
    };
    let n = ctx.spec.fso_realizations_n;
    let shared: Arc<
        std::sync::OnceLock<Result<(Vec<Arc<ProductCdfTable>>, Vec<SumGGParams>), String>>,
    > = Arc::new(std::sync::OnceLock::new());

    let mut points: Vec<Box<dyn Fn() -> PointResult + Send + Sync>> = Vec::new();
    for (k, &snr) in ctx.spec.snr_db.iter().enumerate() {
        let ctx = ctx.clone();
        let shared = shared.clone();
        points.push(Box::new(move || {
            let spec = &ctx.spec;
            let scen = spec.scenario.id().to_string();
            let cfg = spec.harq_for(spec.max_rounds_m, n).map_err(|e| e.to_string())?;
            let pw = PowerSplit::from_total(db_to_linear(snr), 0.5).map_err(|e| e.to_string())?;
            let mut rows = Vec::new();
            if ctx.mask.simulation {
                let (profile, est) = harq::mc_decoding_profile(
                    &cfg,
                    &pw,
                    &RfChannel::from(spec.rf),
                    &FsoTurbulence::GammaGamma { a, b },
                    spec.trials,
                    RngStream::new(spec.seed, (k as u64) << 32),
                )
                .map_err(|e| e.to_string())?;
                for m in 1..=spec.max_rounds_m {
                    rows.push(ResultRow {
                        scenario: scen.clone(),
                        snr_db: snr,
                        method: Method::Mc,
                        m,
                        metric: Metric::Outage,
                        value: profile.probs()[m as usize - 1],
                        ci95: est[m as usize - 1].half_width_95,
                    });
                }
            }
            if ctx.mask.bounds {
                let assets = shared.get_or_init(|| {
                    let mut tables = Vec::new();
                    let mut params = Vec::new();
                    for m in 1..=ctx.spec.max_rounds_m {
                        let mn = m * n;
                        tables.push(
                            ProductCdfTable::get_or_build(
                                ctx.cache_dir.as_deref(),
                                mn,
                                a,
                                b,
                                TABLE_SEED,
                            )
                            .map_err(|e| e.to_string())?,
                        );
                        params.push(
                            small_n::fit_varrho(mn, a, b, RngStream::new(TABLE_SEED, 1))
                                .map_err(|e| e.to_string())?,
                        );
                    }
                    Ok((tables, params))
                });
                let (tables, params) = assets.as_ref().map_err(|e| e.clone())?;
                let p_fso_eff = spec.detection_c * pw.p_fso;
                for m in 1..=spec.max_rounds_m {
                    let u = spec.rate_r / m as f64;
                    let err = |e: rfso::Error| e.to_string();
                    let upper = small_n::upper_bound_prob(
                        &tables[m as usize - 1],
                        u,
                        m,
                        n,
                        pw.p_rf,
                        p_fso_eff,
                    )
                    .map_err(err)?;
                    let lower = small_n::lower_bound_prob(
                        &params[m as usize - 1],
                        u,
                        m,
                        n,
                        pw.p_rf,
                        p_fso_eff,
                    )
                    .map_err(err)?;
                    let hs = small_n::high_snr_lower(u, m, n, pw.p_rf, p_fso_eff, a, b)
                        .map_err(err)?;
                    for (method, value) in [
                        (Method::UpperMinkowski, upper),
                        (Method::LowerJensen, lower),
                        (Method::HighSnr, hs),
                    ] {
                        rows.push(ResultRow {
                            scenario: scen.clone(),
                            snr_db: snr,
                            method,
                            m,
                            metric: Metric::Outage,
                            value,
                            ci95: 0.0,
                        });
                    }
                }
            }
            Ok(rows)
        }));
    }
    points
}

fn fig8_points(ctx: &Arc<Ctx>) -> Vec<Box<dyn Fn() -> PointResult + Send + Sync>> {
    let mut points: Vec<Box<dyn Fn() -> PointResult + Send + Sync>> = Vec::new();
    let m_max = ctx.spec.m_values.iter().copied().max().unwrap_or(1);
    for (k, &snr) in ctx.spec.snr_db.iter().enumerate() {
        let ctx = ctx.clone();
        points.push(Box::new(move || {
            let spec = &ctx.spec;
            let n = spec.fso_realizations_n;
            let cfg = spec.harq_for(m_max, n).map_err(|e| e.to_string())?;
            let pw = PowerSplit::from_total(db_to_linear(snr), 0.5).map_err(|e| e.to_string())?;
            let fso = FsoTurbulence::from(spec.fso);
            let mut rows = Vec::new();
            // one coupled run at the deepest M; truncations give every
            // shallower HARQ depth on the same trajectories
            if ctx.mask.simulation {
                let (profile, est) = harq::mc_decoding_profile(
                    &cfg,
                    &pw,
                    &RfChannel::from(spec.rf),
                    &fso,
                    spec.trials,
                    RngStream::new(spec.seed, (k as u64) << 32),
                )
                .map_err(|e| e.to_string())?;
                for &m in &spec.m_values {
                    let trunc =
                        DecodingProfile::new(profile.probs()[..m as usize].to_vec())
                            .map_err(|e| e.to_string())?;
                    let scen = format!("{}:M{}", spec.scenario.id(), m);
                    rows.push(ResultRow {
                        scenario: scen.clone(),
                        snr_db: snr,
                        method: Method::Mc,
                        m,
                        metric: Metric::Outage,
                        value: harq::outage(&trunc),
                        ci95: est[m as usize - 1].half_width_95,
                    });
                    rows.push(ResultRow {
                        scenario: scen,
                        snr_db: snr,
                        method: Method::Mc,
                        m,
                        metric: Metric::Throughput,
                        value: harq::throughput(&trunc, spec.rate_r),
                        ci95: throughput_half_width(&trunc, &est[..m as usize], spec.rate_r),
                    });
                }
            }
            if ctx.mask.analytic {
                let mom = moments_for(&fso, pw.p_fso, spec.detection_c)?;
                for &m in &spec.m_values {
                    let scen = format!("{}:M{}", spec.scenario.id(), m);
                    let cdf = |u: f64, mm: u32| {
                        clt::cdf_clt(u, mm, n, &mom, pw.p_rf).unwrap_or(f64::NAN)
                    };
                    let (eta, out) = clt::metrics_from_cdf(cdf, spec.rate_r, m);
                    if !eta.is_finite() || !out.is_finite() {
                        return Err(format!("clt metrics failed at {snr} dB, M={m}"));
                    }
                    for (metric, value) in
                        [(Metric::Outage, out), (Metric::Throughput, eta)]
                    {
                        rows.push(ResultRow {
                            scenario: scen.clone(),
                            snr_db: snr,
                            method: Method::CltQuadrature,
                            m,
                            metric,
                            value,
                            ci95: 0.0,
                        });
                    }
                }
            }
            Ok(rows)
        }));
    }
    points
}

fn fig9_points(ctx: &Arc<Ctx>) -> Vec<Box<dyn Fn() -> PointResult + Send + Sync>> {
    let mut points: Vec<Box<dyn Fn() -> PointResult + Send + Sync>> = Vec::new();
    let mut idx = 0u64;
    for (ri, &rate) in ctx.spec.rate_grid.iter().enumerate() {
        for &snr in &ctx.spec.snr_db {
            let ctx = ctx.clone();
            let point = idx;
            idx += 1;
            points.push(Box::new(move || {
                let spec = &ctx.spec;
                let n = spec.fso_realizations_n;
                let pw =
                    PowerSplit::from_total(db_to_linear(snr), 0.5).map_err(|e| e.to_string())?;
                let fso = FsoTurbulence::from(spec.fso);
                let scen = format!("{}:r{:.2}", spec.scenario.id(), rate);
                let mut rows = Vec::new();
                let mom = if ctx.mask.analytic {
                    Some(moments_for(&fso, pw.p_fso, spec.detection_c)?)
                } else {
                    None
                };
                for &m_depth in &spec.m_values {
                    if let Some(mom) = &mom {
                        let cdf = |u: f64, mm: u32| {
                            clt::cdf_clt(u, mm, n, mom, pw.p_rf).unwrap_or(f64::NAN)
                        };
                        let (eta, _) = clt::metrics_from_cdf(cdf, rate, m_depth);
                        if !eta.is_finite() {
                            return Err(format!("clt metrics failed at R={rate}, {snr} dB"));
                        }
                        rows.push(ResultRow {
                            scenario: scen.clone(),
                            snr_db: snr,
                            method: Method::CltQuadrature,
                            m: m_depth,
                            metric: Metric::Throughput,
                            value: eta,
                            ci95: 0.0,
                        });
                    }
                    // decimated simulation overlay
                    if ctx.mask.simulation && ri % 4 == 0 {
                        let cfg = spec.harq_for(m_depth, n).map_err(|e| e.to_string())?;
                        let mut cfg = cfg;
                        cfg.rate_r = rate;
                        let (profile, est) = harq::mc_decoding_profile(
                            &cfg,
                            &pw,
                            &RfChannel::from(spec.rf),
                            &fso,
                            spec.trials,
                            RngStream::new(spec.seed, (point * 8 + m_depth as u64) << 32),
                        )
                        .map_err(|e| e.to_string())?;
                        rows.push(ResultRow {
                            scenario: scen.clone(),
                            snr_db: snr,
                            method: Method::Mc,
                            m: m_depth,
                            metric: Metric::Throughput,
                            value: harq::throughput(&profile, rate),
                            ci95: throughput_half_width(&profile, &est, rate),
                        });
                    }
                }
                Ok(rows)
            }));
        }
    }
    points
}

/// The three fig10 systems.
const FIG10_CURVES: [(&str, f64); 3] =
    [("joint", 0.5), ("rf_only", 1.0), ("fso_only", 0.0)];

fn fig10_points(ctx: &Arc<Ctx>) -> Vec<Box<dyn Fn() -> PointResult + Send + Sync>> {
    let spec = &ctx.spec;
    // one shared rate trajectory for all curves and knots: the common
    // random numbers stabilize the dB gaps between curves
    let hyper = RfChannel::CompositeLogNormalRate {
        delta: spec.composite_delta,
        normalization: if spec.unit_median_rates {
            Normalization::UnitMedian
        } else {
            Normalization::UnitMean
        },
    };
    let lam: Arc<Vec<(f64, f64)>> = {
        let mut rng = RngStream::new(spec.seed, u64::MAX / 2).rng();
        Arc::new(
            (0..spec.outer_draws)
                .map(|_| (hyper.packet_rate(&mut rng), hyper.packet_rate(&mut rng)))
                .collect(),
        )
    };
    let mut points: Vec<Box<dyn Fn() -> PointResult + Send + Sync>> = Vec::new();
    let mut idx = 0u64;
    for (ci, (curve, ratio)) in FIG10_CURVES.iter().enumerate() {
        for &snr in &ctx.spec.snr_db {
            let ctx = ctx.clone();
            let lam = lam.clone();
            let point = idx;
            idx += 1;
            let curve = curve.to_string();
            let ratio = *ratio;
            let _ = ci;
            points.push(Box::new(move || {
                let spec = &ctx.spec;
                if !ctx.mask.simulation {
                    return Ok(Vec::new());
                }
                let total = db_to_linear(snr);
                let pw = PowerSplit::from_total(total, ratio).map_err(|e| e.to_string())?;
                let cfg = spec
                    .harq_for(spec.max_rounds_m, spec.fso_realizations_n)
                    .map_err(|e| e.to_string())?;
                let stride = spec.inner_packets.div_ceil(16_384).max(1);
                let outages: Vec<f64> = lam
                    .iter()
                    .enumerate()
                    .map(|(o, &(lam_rf, lam_fso))| {
                        let stream = RngStream::new(
                            spec.seed,
                            (point << 40) | (o as u64 * stride) << 8,
                        );
                        let (profile, _) = harq::mc_decoding_profile(
                            &cfg,
                            &pw,
                            &RfChannel::ExponentialRate { lambda_rf: lam_rf },
                            &FsoTurbulence::Exponential { lambda: lam_fso },
                            spec.inner_packets,
                            stream,
                        )?;
                        Ok(harq::outage(&profile))
                    })
                    .collect::<Result<_, rfso::Error>>()
                    .map_err(|e| e.to_string())?;
                let k = outages.len() as f64;
                let mean = outages.iter().sum::<f64>() / k;
                let var = outages.iter().map(|o| (o - mean) * (o - mean)).sum::<f64>()
                    / (k * (k - 1.0).max(1.0));
                Ok(vec![ResultRow {
                    scenario: format!("{}:{}", spec.scenario.id(), curve),
                    snr_db: snr,
                    method: Method::Mc,
                    m: spec.max_rounds_m,
                    metric: Metric::Outage,
                    value: mean,
                    ci95: 1.96 * var.sqrt(),
                }])
            }));
        }
    }
    points
}

fn fig11_points(ctx: &Arc<Ctx>) -> Vec<Box<dyn Fn() -> PointResult + Send + Sync>> {
    let mut points: Vec<Box<dyn Fn() -> PointResult + Send + Sync>> = Vec::new();
    for &snr in &ctx.spec.snr_db {
        let ctx = ctx.clone();
        points.push(Box::new(move || {
            let spec = &ctx.spec;
            let n = spec.fso_realizations_n;
            let m = spec.max_rounds_m;
            let u = spec.rate_r / m as f64;
            let total = db_to_linear(snr);
            let fso = FsoTurbulence::from(spec.fso);
            let outage_at = |split: &PowerSplit| -> f64 {
                let mom = match moments_for(&fso, split.p_fso, spec.detection_c) {
                    Ok(m) => m,
                    Err(_) => return f64::NAN,
                };
                if split.p_rf <= 0.0 {
                    // no RF leg: Gaussian tail of the FSO average alone
                    if mom.sigma2 <= 0.0 {
                        return if mom.mu > u { 0.0 } else { 1.0 };
                    }
                    let z = (mom.mu - u) * ((m * n) as f64 / mom.sigma2).sqrt();
                    return rfso::specfun::q_function(z).unwrap_or(f64::NAN);
                }
                clt::cdf_clt(u, m, n, &mom, split.p_rf).unwrap_or(f64::NAN)
            };
            let uniform = power::uniform_split(total).map_err(|e| e.to_string())?;
            let best = power::grid_optimize(total, |s| outage_at(s), spec.grid_points)
                .map_err(|e| e.to_string())?;
            let scen = |tag: &str| format!("{}:{}", spec.scenario.id(), tag);
            Ok(vec![
                ResultRow {
                    scenario: scen("uniform"),
                    snr_db: snr,
                    method: Method::CltQuadrature,
                    m,
                    metric: Metric::Outage,
                    value: outage_at(&uniform),
                    ci95: 0.0,
                },
                ResultRow {
                    scenario: scen("grid_opt"),
                    snr_db: snr,
                    method: Method::CltQuadrature,
                    m,
                    metric: Metric::Outage,
                    value: best.objective,
                    ci95: 0.0,
                },
                ResultRow {
                    scenario: scen("grid_opt"),
                    snr_db: snr,
                    method: Method::CltQuadrature,
                    m,
                    metric: Metric::OptRatioRf,
                    value: best.split.p_rf / best.split.total(),
                    ci95: 0.0,
                },
            ])
        }));
    }
    points
}

/// Custom scenario: simulation plus the CLT quadrature at the configured
/// (R, M, N) over the power grid.
fn custom_points(ctx: &Arc<Ctx>) -> Vec<Box<dyn Fn() -> PointResult + Send + Sync>> {
    let mut points: Vec<Box<dyn Fn() -> PointResult + Send + Sync>> = Vec::new();
    for (k, &snr) in ctx.spec.snr_db.iter().enumerate() {
        let ctx = ctx.clone();
        points.push(Box::new(move || {
            let spec = &ctx.spec;
            let n = spec.fso_realizations_n;
            let cfg = spec.harq_for(spec.max_rounds_m, n).map_err(|e| e.to_string())?;
            let pw = PowerSplit::from_total(db_to_linear(snr), 0.5).map_err(|e| e.to_string())?;
            let fso = FsoTurbulence::from(spec.fso);
            let scen = spec.scenario.id().to_string();
            let mut rows = Vec::new();
            if ctx.mask.simulation {
                let (profile, est) = harq::mc_decoding_profile(
                    &cfg,
                    &pw,
                    &RfChannel::from(spec.rf),
                    &fso,
                    spec.trials,
                    RngStream::new(spec.seed, (k as u64) << 32),
                )
                .map_err(|e| e.to_string())?;
                rows.push(ResultRow {
                    scenario: scen.clone(),
                    snr_db: snr,
                    method: Method::Mc,
                    m: spec.max_rounds_m,
                    metric: Metric::Outage,
                    value: harq::outage(&profile),
                    ci95: est[profile.rounds() - 1].half_width_95,
                });
                rows.push(ResultRow {
                    scenario: scen.clone(),
                    snr_db: snr,
                    method: Method::Mc,
                    m: spec.max_rounds_m,
                    metric: Metric::Throughput,
                    value: harq::throughput(&profile, spec.rate_r),
                    ci95: throughput_half_width(&profile, &est, spec.rate_r),
                });
            }
            if ctx.mask.analytic {
                if matches!(spec.rf, crate::config::RfSpec::Rayleigh) {
                    let mom = moments_for(&fso, pw.p_fso, spec.detection_c)?;
                    let cdf = |u: f64, mm: u32| {
                        clt::cdf_clt(u, mm, n, &mom, pw.p_rf).unwrap_or(f64::NAN)
                    };
                    let (eta, out) = clt::metrics_from_cdf(cdf, spec.rate_r, spec.max_rounds_m);
                    for (metric, value) in [(Metric::Outage, out), (Metric::Throughput, eta)] {
                        rows.push(ResultRow {
                            scenario: scen.clone(),
                            snr_db: snr,
                            method: Method::CltQuadrature,
                            m: spec.max_rounds_m,
                            metric,
                            value,
                            ci95: 0.0,
                        });
                    }
                }
            }
            Ok(rows)
        }));
    }
    points
}

// ---------------------------------------------------------------------------
// Execution and serialization
// ---------------------------------------------------------------------------

/// Run a spec: dispatch scenario points to the worker pool and merge in
/// point order.
pub fn run(spec: &ExperimentSpec, mask: MethodMask, cache_dir: Option<&Path>) -> RunOutput {
    let ctx = Arc::new(Ctx {
        spec: spec.clone(),
        mask,
        cache_dir: cache_dir.map(|p| p.to_path_buf()),
    });
    let points = match spec.scenario {
        Scenario::Fig3CltN => fig3_points(&ctx),
        Scenario::Fig4to6LemmaBounds => fig4to6_points(&ctx),
        Scenario::Fig7SmallN => fig7_points(&ctx),
        Scenario::Fig8HarqDepth => fig8_points(&ctx),
        Scenario::Fig9RateSweep => fig9_points(&ctx),
        Scenario::Fig10RfVsFsoVsJoint => fig10_points(&ctx),
        Scenario::Fig11PowerAlloc => fig11_points(&ctx),
        Scenario::Custom => custom_points(&ctx),
    };
    let mut results: Vec<(usize, PointResult)> =
        points.par_iter().enumerate().map(|(i, p)| (i, p())).collect();
    results.sort_by_key(|(i, _)| *i);
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (i, r) in results {
        match r {
            Ok(mut rs) => rows.append(&mut rs),
            Err(e) => errors.push(format!("point {i}: {e}")),
        }
    }
    RunOutput { rows, errors }
}

/// Serialize rows in the requested layout.
pub fn write_rows<W: Write>(rows: &[ResultRow], format: OutputFormat, mut w: W) -> std::io::Result<()> {
    match format {
        OutputFormat::Csv => {
            writeln!(w, "scenario,snr_db,method,m,metric,value,ci95")?;
            for r in rows {
                writeln!(
                    w,
                    "{},{},{},{},{},{:.12e},{:.12e}",
                    r.scenario,
                    r.snr_db,
                    r.method.tag(),
                    r.m,
                    r.metric.tag(),
                    r.value,
                    r.ci95
                )?;
            }
        }
        OutputFormat::Gnuplot => {
            // one block per curve, blank-line separated
            let mut keys: Vec<(String, Method, u32, Metric)> = rows
                .iter()
                .map(|r| (r.scenario.clone(), r.method, r.m, r.metric))
                .collect();
            keys.sort_by(|x, y| {
                (&x.0, x.1.tag(), x.2, x.3.tag()).cmp(&(&y.0, y.1.tag(), y.2, y.3.tag()))
            });
            keys.dedup();
            for (scen, method, m, metric) in keys {
                writeln!(w, "# {} {} m={} {}", scen, method.tag(), m, metric.tag())?;
                for r in rows.iter().filter(|r| {
                    r.scenario == scen && r.method == method && r.m == m && r.metric == metric
                }) {
                    writeln!(w, "{} {:.12e} {:.12e}", r.snr_db, r.value, r.ci95)?;
                }
                writeln!(w)?;
            }
        }
    }
    Ok(())
}

/// Parse rows back from the CSV layout (used by `validate`).
pub fn read_rows_csv(path: &Path) -> Result<Vec<ResultRow>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty file")?;
    if header != "scenario,snr_db,method,m,metric,value,ci95" {
        return Err(format!("unexpected header: {header}"));
    }
    let mut rows = Vec::new();
    for (ln, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(format!("line {}: expected 7 fields", ln + 2));
        }
        let parse_f = |s: &str| s.parse::<f64>().map_err(|e| format!("line {}: {e}", ln + 2));
        rows.push(ResultRow {
            scenario: f[0].to_string(),
            snr_db: parse_f(f[1])?,
            method: Method::parse(f[2]).ok_or(format!("line {}: bad method", ln + 2))?,
            m: f[3].parse().map_err(|e| format!("line {}: {e}", ln + 2))?,
            metric: Metric::parse(f[4]).ok_or(format!("line {}: bad metric", ln + 2))?,
            value: parse_f(f[5])?,
            ci95: parse_f(f[6])?,
        });
    }
    Ok(rows)
}
