//! Decoding-probability bounds for comparable RF/FSO coherence times
//! (small `N`), Gamma-Gamma turbulence.
//!
//! When only a handful of FSO realizations occur per packet the Gaussian
//! reduction of [`crate::clt`] is not trustworthy. Two algebraic routes
//! bracket the truth instead:
//!
//! - an upper bound on Pr(W_m <= u) from the Minkowski inequality, which
//!   needs the CDF of a product of mN Gamma-Gamma variates
//!   ([`ProductCdfTable`]; the paper-level closed form is a Meijer G that
//!   is only ever evaluated numerically, so the table is a deterministic
//!   stratified Monte Carlo estimate, cached on disk), and
//! - a lower bound from Jensen's inequality, which needs the density of a
//!   sum of mN Gamma-Gamma variates; the sum is well approximated by
//!   another Bessel-type density with a fitted adjustment parameter
//!   ([`fit_varrho`]).
//!
//! Both routes are capped at mN <= 6: beyond that the bounds lose
//! tightness (and the CLT route takes over anyway).

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, OnceLock};

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::channel::RngStream;
use crate::error::Error;
use crate::quad;
use crate::specfun;
use crate::Result;

/// Largest supported mN for the product/sum routes.
pub const MAX_MN: u32 = 6;

/// Samples behind each cached product-CDF table.
const TABLE_SAMPLES: usize = 10_000_000;
/// Log-spaced CDF knots per table.
const TABLE_KNOTS: usize = 4096;
/// Cache format version (bump to invalidate old files).
const TABLE_VERSION: u32 = 1;

/// Parameters of the Bessel-type density approximating a sum of mN
/// Gamma-Gamma variates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumGGParams {
    /// Larger shape: mN * max(a,b) + varrho.
    pub sigma_mn: f64,
    /// Smaller shape: mN * min(a,b).
    pub varsigma_mn: f64,
    /// Fitted adjustment added to the larger shape.
    pub varrho: f64,
    /// min(a, b).
    pub tau: f64,
    /// max(a, b).
    pub upsilon: f64,
}

impl SumGGParams {
    /// Assemble parameters for mN summands with adjustment `varrho`.
    pub fn new(mn: u32, a: f64, b: f64, varrho: f64) -> Result<Self> {
        if !(a > 0.0) || !(b > 0.0) || mn < 1 {
            return Err(Error::contract("SumGGParams", "need a, b > 0 and mN >= 1"));
        }
        let tau = a.min(b);
        let upsilon = a.max(b);
        let sigma_mn = mn as f64 * upsilon + varrho;
        let varsigma_mn = mn as f64 * tau;
        if !(sigma_mn > 0.0) {
            return Err(Error::contract("SumGGParams", "adjusted shape must stay positive"));
        }
        Ok(SumGGParams { sigma_mn, varsigma_mn, varrho, tau, upsilon })
    }
}

// ---------------------------------------------------------------------------
// Product CDF table
// ---------------------------------------------------------------------------

/// Deterministic numeric CDF of the product of mN Gamma-Gamma gains.
///
/// Built once per (mN, a, b, seed) from 10^7 stratified samples binned at
/// log-spaced knots, then queried by monotone linear interpolation. Tables
/// persist as small versioned binary files keyed by their parameters.
#[derive(Debug, Clone)]
pub struct ProductCdfTable {
    mn: u32,
    /// ln(x) at each knot (strictly increasing).
    log_knots: Vec<f64>,
    /// CDF value at each knot (non-decreasing).
    cdf: Vec<f64>,
}

fn table_key(mn: u32, a: f64, b: f64, seed: u64) -> String {
    format!("ggprod-mn{}-a{:.6}-b{:.6}-s{}-v{}", mn, a, b, seed, TABLE_VERSION)
}

impl ProductCdfTable {
    /// Build the table by stratified Monte Carlo: sample k of the first
    /// gamma factor uses the quantile band [k/K, (k+1)/K), removing that
    /// factor's marginal variance from the estimate.
    pub fn build(mn: u32, a: f64, b: f64, seed: u64) -> Result<Self> {
        if mn < 1 || mn > MAX_MN {
            return Err(Error::unsupported(
                "product_cdf",
                format!("mN = {mn} outside 1..={MAX_MN}; use the CLT route instead"),
            ));
        }
        if !(a > 0.0) || !(b > 0.0) {
            return Err(Error::contract("product_cdf", "need a, b > 0"));
        }
        let tau = a.min(b);
        let ups = a.max(b);
        // quantile table of the smallest-shape factor for the stratified dim
        let strat = GammaQuantiles::new(tau)?;
        let d_tau = Gamma::new(tau, 1.0 / tau).expect("tau > 0");
        let d_ups = Gamma::new(ups, 1.0 / ups).expect("ups > 0");

        let mut rng = RngStream::new(seed, 0).rng();
        let mut logs = Vec::with_capacity(TABLE_SAMPLES);
        for k in 0..TABLE_SAMPLES {
            // stratified uniform in (0,1) for the first tau-shaped factor
            let u = (k as f64 + rng.random::<f64>()) / TABLE_SAMPLES as f64;
            let mut lq = (strat.quantile(u) / tau).ln();
            lq += d_ups.sample(&mut rng).ln();
            for _ in 1..mn {
                lq += d_tau.sample(&mut rng).ln() + d_ups.sample(&mut rng).ln();
            }
            logs.push(lq);
        }
        logs.sort_by(|x, y| x.partial_cmp(y).unwrap());
        // knots at uniform sample ranks; dedupe keeps them strictly increasing
        let mut log_knots = Vec::with_capacity(TABLE_KNOTS);
        let mut cdf = Vec::with_capacity(TABLE_KNOTS);
        for j in 0..TABLE_KNOTS {
            let idx = ((j + 1) * TABLE_SAMPLES / TABLE_KNOTS).min(TABLE_SAMPLES) - 1;
            let x = logs[idx];
            let p = (idx + 1) as f64 / TABLE_SAMPLES as f64;
            if log_knots.last().map_or(true, |&last| x > last) {
                log_knots.push(x);
                cdf.push(p);
            } else if let Some(last) = cdf.last_mut() {
                *last = p.max(*last);
            }
        }
        Ok(ProductCdfTable { mn, log_knots, cdf })
    }

    /// CDF at x (monotone interpolation in log-x).
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let lx = x.ln();
        let n = self.log_knots.len();
        if lx <= self.log_knots[0] {
            // geometric tail below the first knot
            return self.cdf[0] * ((lx - self.log_knots[0]).exp()).min(1.0);
        }
        if lx >= self.log_knots[n - 1] {
            return 1.0;
        }
        let j = self.log_knots.partition_point(|&k| k < lx);
        let (x0, x1) = (self.log_knots[j - 1], self.log_knots[j]);
        let (y0, y1) = (self.cdf[j - 1], self.cdf[j]);
        y0 + (y1 - y0) * (lx - x0) / (x1 - x0)
    }

    pub fn mn(&self) -> u32 {
        self.mn
    }

    /// Serialize as a little-endian binary knot table.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(16 + 16 * self.log_knots.len());
        buf.extend_from_slice(&TABLE_VERSION.to_le_bytes());
        buf.extend_from_slice(&self.mn.to_le_bytes());
        buf.extend_from_slice(&(self.log_knots.len() as u64).to_le_bytes());
        for (&k, &c) in self.log_knots.iter().zip(&self.cdf) {
            buf.extend_from_slice(&k.to_le_bytes());
            buf.extend_from_slice(&c.to_le_bytes());
        }
        let mut f = std::fs::File::create(path)
            .map_err(|e| Error::io("product_cdf", format!("create {path:?}: {e}")))?;
        f.write_all(&buf)
            .map_err(|e| Error::io("product_cdf", format!("write {path:?}: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::io("product_cdf", format!("read {path:?}: {e}")))?;
        let fail = || Error::io("product_cdf", format!("malformed table {path:?}"));
        if bytes.len() < 16 {
            return Err(fail());
        }
        let version = u32::from_le_bytes(bytes[0..4].try_into().unwrap());
        if version != TABLE_VERSION {
            return Err(fail());
        }
        let mn = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        let len = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        if bytes.len() != 16 + 16 * len {
            return Err(fail());
        }
        let mut log_knots = Vec::with_capacity(len);
        let mut cdf = Vec::with_capacity(len);
        for j in 0..len {
            let off = 16 + 16 * j;
            log_knots.push(f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap()));
            cdf.push(f64::from_le_bytes(bytes[off + 8..off + 16].try_into().unwrap()));
        }
        Ok(ProductCdfTable { mn, log_knots, cdf })
    }

    /// Fetch from the in-process cache, the on-disk cache, or build.
    ///
    /// `cache_dir = None` keeps tables in memory only.
    pub fn get_or_build(
        cache_dir: Option<&Path>,
        mn: u32,
        a: f64,
        b: f64,
        seed: u64,
    ) -> Result<std::sync::Arc<ProductCdfTable>> {
        static CACHE: OnceLock<Mutex<HashMap<String, std::sync::Arc<ProductCdfTable>>>> =
            OnceLock::new();
        let key = table_key(mn, a, b, seed);
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(t) = cache.lock().unwrap().get(&key) {
            return Ok(t.clone());
        }
        let path: Option<PathBuf> = cache_dir.map(|d| d.join(format!("{key}.bin")));
        let table = match path.as_deref().filter(|p| p.exists()).map(ProductCdfTable::load) {
            Some(Ok(t)) if t.mn == mn => t,
            _ => {
                let t = ProductCdfTable::build(mn, a, b, seed)?;
                if let Some(p) = &path {
                    if let Some(dir) = p.parent() {
                        let _ = std::fs::create_dir_all(dir);
                    }
                    t.save(p)?;
                }
                t
            }
        };
        let arc = std::sync::Arc::new(table);
        cache.lock().unwrap().insert(key, arc.clone());
        Ok(arc)
    }
}

/// Numeric inverse CDF of Gamma(shape, scale 1) at tabulated quantiles,
/// for the stratified sampling dimension.
struct GammaQuantiles {
    /// quantile values at u = (j+0.5)/LEN
    values: Vec<f64>,
    shape: f64,
}

impl GammaQuantiles {
    const LEN: usize = 8192;

    fn new(shape: f64) -> Result<Self> {
        let lg = specfun::ln_gamma(shape);
        let cdf = |x: f64| -> f64 {
            if x <= 0.0 {
                return 0.0;
            }
            1.0 - specfun::gamma_upper(shape, x).map(|g| g * (-lg).exp()).unwrap_or(0.0)
        };
        // bracketed bisection per quantile, warm-started from the previous
        let mut values = Vec::with_capacity(Self::LEN);
        let mut lo = 0.0_f64;
        for j in 0..Self::LEN {
            let u = (j as f64 + 0.5) / Self::LEN as f64;
            let mut hi = (lo.max(shape) + 1.0) * 2.0;
            while cdf(hi) < u {
                hi *= 2.0;
                if hi > 1e8 {
                    return Err(Error::numeric("product_cdf", "gamma quantile bracket failed"));
                }
            }
            let mut a = lo;
            let mut b = hi;
            for _ in 0..80 {
                let mid = 0.5 * (a + b);
                if cdf(mid) < u {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            let q = 0.5 * (a + b);
            values.push(q);
            lo = q;
        }
        Ok(GammaQuantiles { values, shape })
    }

    /// Quantile at u in (0,1) by interpolation of the table.
    fn quantile(&self, u: f64) -> f64 {
        let pos = u * Self::LEN as f64 - 0.5;
        if pos <= 0.0 {
            // power-law tail of the gamma CDF near zero
            let u0 = 0.5 / Self::LEN as f64;
            return self.values[0] * (u / u0).powf(1.0 / self.shape).max(0.0);
        }
        let j = pos.floor() as usize;
        if j + 1 >= Self::LEN {
            return *self.values.last().unwrap();
        }
        let frac = pos - j as f64;
        self.values[j] * (1.0 - frac) + self.values[j + 1] * frac
    }
}

/// CDF of the product of mN independent Gamma-Gamma gains at `x`.
pub fn product_cdf(
    table: &ProductCdfTable,
    x: f64,
    mn: u32,
) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::domain("product_cdf", format!("x must be >= 0, got {x}")));
    }
    if table.mn() != mn {
        return Err(Error::contract("product_cdf", "table built for a different mN"));
    }
    Ok(table.cdf(x))
}

// ---------------------------------------------------------------------------
// Bounds
// ---------------------------------------------------------------------------

/// Minkowski upper bound on Pr(W_m <= u): outer quadrature over the
/// Rayleigh RF gain of the product CDF evaluated at
/// `((e^{u - log(1+P_RF x)} - 1) / (c P_FSO))^{mN}`.
pub fn upper_bound_prob(
    table: &ProductCdfTable,
    u: f64,
    m: u32,
    n: u32,
    p_rf: f64,
    p_fso_eff: f64,
) -> Result<f64> {
    let mn = m.checked_mul(n).ok_or_else(|| Error::contract("upper_bound_prob", "mN overflow"))?;
    if table.mn() != mn {
        return Err(Error::contract("upper_bound_prob", "table built for a different mN"));
    }
    if !(p_rf > 0.0) || !(p_fso_eff > 0.0) {
        return Err(Error::contract("upper_bound_prob", "need positive powers"));
    }
    if u <= 0.0 {
        return Ok(0.0);
    }
    let x_end = (u.exp_m1() / p_rf).min(745.0);
    let f = |x: f64| {
        let w = (u - (p_rf * x).ln_1p()).exp_m1();
        if w <= 0.0 {
            return 0.0;
        }
        let arg = (w / p_fso_eff).powi(mn as i32);
        (-x).exp() * table.cdf(arg)
    };
    let bp = [x_end * 0.01, x_end * 0.1, x_end * 0.3, x_end * 0.6];
    let v = quad::integrate(f, 0.0, x_end, 1e-11, 1e-9, &bp);
    Ok(v.clamp(0.0, 1.0))
}

/// Bessel-type density of the sum of mN Gamma-Gamma gains.
pub fn sum_pdf(x: f64, params: &SumGGParams, mn: u32) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain("sum_pdf", format!("x must be > 0, got {x}")));
    }
    let sg = params.sigma_mn;
    let vs = params.varsigma_mn;
    let z = sg * vs * x / mn as f64;
    let k = specfun::bessel_k(sg - vs, 2.0 * z.sqrt())?;
    if k == 0.0 {
        return Ok(0.0);
    }
    let logpre = 2.0_f64.ln() - specfun::ln_gamma(sg) - specfun::ln_gamma(vs) - x.ln()
        + 0.5 * (sg + vs) * z.ln();
    let v = logpre.exp() * k;
    Ok(if v.is_finite() { v } else { 0.0 })
}

/// Jensen lower bound on Pr(W_m <= u): single integral of the sum density
/// against the Rayleigh RF CDF.
pub fn lower_bound_prob(
    params: &SumGGParams,
    u: f64,
    m: u32,
    n: u32,
    p_rf: f64,
    p_fso_eff: f64,
) -> Result<f64> {
    let mn = m * n;
    if !(p_rf > 0.0) || !(p_fso_eff > 0.0) {
        return Err(Error::contract("lower_bound_prob", "need positive powers"));
    }
    if u <= 0.0 {
        return Ok(0.0);
    }
    let mnf = mn as f64;
    let f = |y: f64| {
        let arg = mnf * y.exp_m1() / p_fso_eff;
        if arg <= 0.0 {
            return 0.0;
        }
        let pdf = sum_pdf(arg, params, mn).unwrap_or(0.0);
        let rf_cdf = -(-((u - y).exp_m1() / p_rf)).exp_m1();
        (mnf / p_fso_eff) * y.exp() * pdf * rf_cdf
    };
    let bp = [u * 0.05, u * 0.2, u * 0.5, u * 0.8];
    let v = quad::integrate(f, 1e-12, u, 1e-11, 1e-9, &bp);
    Ok(v.clamp(0.0, 1.0))
}

/// High-SNR power-law form of the Jensen lower bound.
pub fn high_snr_lower(
    u: f64,
    m: u32,
    n: u32,
    p_rf: f64,
    p_fso_eff: f64,
    a: f64,
    b: f64,
) -> Result<f64> {
    let mn = m * n;
    if !(p_rf > 0.0) || !(p_fso_eff > 0.0) || !(a > 0.0) || !(b > 0.0) {
        return Err(Error::contract("high_snr_lower", "need positive powers and shapes"));
    }
    if u <= 0.0 {
        return Ok(0.0);
    }
    let tau = a.min(b);
    let ups = a.max(b);
    let mnf = mn as f64;
    // log of ((Γ(υ-τ)(υτ)^τ / Γ(υ))^{mN} (mN / P)^{mN τ} / Γ(mN τ))
    let ln_pre = mnf
        * (specfun::ln_gamma(ups - tau) + tau * (ups * tau).ln() - specfun::ln_gamma(ups))
        + mnf * tau * (mnf / p_fso_eff).ln()
        - specfun::ln_gamma(mnf * tau);
    let f = |y: f64| {
        let rf_cdf = -(-((u - y).exp_m1() / p_rf)).exp_m1();
        let ln_val = y + (mnf * tau - 1.0) * y.exp_m1().ln();
        (ln_pre + ln_val).exp() * rf_cdf
    };
    let v = quad::integrate(f, 1e-12, u, 1e-12, 1e-9, &[u * 0.3, u * 0.7]);
    Ok(v.clamp(0.0, 1.0))
}

/// Fit the sum-density adjustment by minimizing the Kolmogorov-Smirnov
/// distance to an empirical 10^6-sample sum distribution. `varrho` is
/// forced to 0 for a single summand (the density is then exact).
pub fn fit_varrho(mn: u32, a: f64, b: f64, stream: RngStream) -> Result<SumGGParams> {
    if mn < 1 {
        return Err(Error::contract("fit_varrho", "need mN >= 1"));
    }
    if mn == 1 {
        return SumGGParams::new(1, a, b, 0.0);
    }
    const SAMPLES: usize = 1_000_000;
    let d_a = Gamma::new(a, 1.0 / a).map_err(|e| Error::contract("fit_varrho", e.to_string()))?;
    let d_b = Gamma::new(b, 1.0 / b).map_err(|e| Error::contract("fit_varrho", e.to_string()))?;
    let mut rng = stream.rng();
    let mut sums: Vec<f64> = (0..SAMPLES)
        .map(|_| {
            (0..mn)
                .map(|_| d_a.sample(&mut rng) * d_b.sample(&mut rng))
                .sum::<f64>()
        })
        .collect();
    sums.sort_by(|x, y| x.partial_cmp(y).unwrap());
    // empirical CDF probed at 60 central quantiles
    let probes: Vec<(f64, f64)> = (0..60)
        .map(|j| {
            let q = 0.005 + 0.99 * j as f64 / 59.0;
            let idx = ((q * SAMPLES as f64) as usize).min(SAMPLES - 1);
            (sums[idx], (idx + 1) as f64 / SAMPLES as f64)
        })
        .collect();
    let ks_for = |varrho: f64| -> Result<f64> {
        let params = SumGGParams::new(mn, a, b, varrho)?;
        let mut ks: f64 = 0.0;
        let mut prev_x = 0.0_f64;
        let mut acc = 0.0;
        for &(x, emp) in &probes {
            acc += quad::integrate(
                |t| sum_pdf(t, &params, mn).unwrap_or(0.0),
                prev_x.max(1e-12),
                x,
                1e-10,
                1e-8,
                &[],
            );
            prev_x = x;
            ks = ks.max((acc - emp).abs());
        }
        Ok(ks)
    };
    // coarse grid (includes 0), then local refinement
    let ups = a.max(b);
    let lo_grid = -(0.9 * mn as f64 * ups).min(2.0);
    let mut best = (0.0, ks_for(0.0)?);
    for k in 0..=32 {
        let varrho = lo_grid + (6.0 - lo_grid) * k as f64 / 32.0;
        let ks = ks_for(varrho)?;
        if ks < best.1 {
            best = (varrho, ks);
        }
    }
    let step = (6.0 - lo_grid) / 32.0;
    for k in -4..=4 {
        let varrho = best.0 + k as f64 * step / 4.0;
        if varrho <= -(mn as f64 * ups) {
            continue;
        }
        let ks = ks_for(varrho)?;
        if ks < best.1 {
            best = (varrho, ks);
        }
    }
    SumGGParams::new(mn, a, b, best.0)
}
