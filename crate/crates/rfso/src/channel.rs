//! Channel models: FSO turbulence and RF fading distributions, their
//! densities and moments, and reproducible seeded samplers.
//!
//! All sampling is driven by [`RngStream`], a (seed, stream) pair on top of
//! ChaCha12. Distinct stream ids give independent sequences, and a fixed
//! pair reproduces the exact same draws on every run and thread layout, so
//! Monte Carlo work can be partitioned freely without changing results.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Exp, Gamma, LogNormal, StandardNormal};

use crate::error::Error;
use crate::quad;
use crate::Result;

/// Deterministic counter-based RNG handle.
///
/// Identical `(seed, stream_id)` pairs reproduce identical sample sequences
/// across runs and thread layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    /// Derive the worker stream for chunk `k` (keeps the seed, offsets the
    /// stream id).
    pub fn substream(&self, k: u64) -> Self {
        RngStream { seed: self.seed, stream_id: self.stream_id.wrapping_add(k) }
    }

    /// Instantiate the generator for this stream.
    pub fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Interpretation of a "normalized" log-normal hyper-parameter draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// E[X] = 1 (location -delta^2/2).
    #[default]
    UnitMean,
    /// median(X) = 1 (location 0).
    UnitMedian,
}

impl Normalization {
    fn location(self, delta: f64) -> f64 {
        match self {
            Normalization::UnitMean => -0.5 * delta * delta,
            Normalization::UnitMedian => 0.0,
        }
    }
}

/// FSO turbulence gain distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FsoTurbulence {
    /// f(x) = λ e^{-λx}.
    Exponential { lambda: f64 },
    /// log X ~ N(ϖ, δ²).
    LogNormal { varpi: f64, delta: f64 },
    /// Product of two unit-mean gamma variates with shapes a and b;
    /// f(x) = 2(ab)^{(a+b)/2}/(Γ(a)Γ(b)) x^{(a+b)/2-1} K_{a-b}(2√(abx)).
    GammaGamma { a: f64, b: f64 },
}

impl FsoTurbulence {
    /// Validate parameter positivity.
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            FsoTurbulence::Exponential { lambda } => lambda > 0.0,
            FsoTurbulence::LogNormal { varpi, delta } => delta > 0.0 && varpi.is_finite(),
            FsoTurbulence::GammaGamma { a, b } => a > 0.0 && b > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::contract("FsoTurbulence", format!("invalid parameters {self:?}")))
        }
    }

    /// Density at x >= 0.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::domain("pdf", format!("x must be >= 0, got {x}")));
        }
        self.validate()?;
        Ok(match *self {
            FsoTurbulence::Exponential { lambda } => lambda * (-lambda * x).exp(),
            FsoTurbulence::LogNormal { varpi, delta } => {
                if x == 0.0 {
                    0.0
                } else {
                    let z = (x.ln() - varpi) / delta;
                    (-0.5 * z * z).exp() / (x * delta * (2.0 * std::f64::consts::PI).sqrt())
                }
            }
            FsoTurbulence::GammaGamma { a, b } => {
                if x == 0.0 {
                    // finite only for min(a,b) > 1; report the limit
                    if a.min(b) > 1.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    let lg = crate::specfun::ln_gamma(a) + crate::specfun::ln_gamma(b);
                    let k = crate::specfun::bessel_k(a - b, 2.0 * (a * b * x).sqrt())?;
                    let logpre = 0.5 * (a + b) * (a * b).ln() - lg
                        + (0.5 * (a + b) - 1.0) * x.ln()
                        + 2.0_f64.ln();
                    logpre.exp() * k
                }
            }
        })
    }

    /// E[G].
    pub fn mean_gain(&self) -> f64 {
        match *self {
            FsoTurbulence::Exponential { lambda } => 1.0 / lambda,
            FsoTurbulence::LogNormal { varpi, delta } => (varpi + 0.5 * delta * delta).exp(),
            // product of two unit-mean gammas
            FsoTurbulence::GammaGamma { .. } => 1.0,
        }
    }

    /// CDF by adaptive quadrature of the density (reference object for
    /// goodness-of-fit tests; not a sampling path).
    pub fn cdf_numeric(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(0.0);
        }
        self.validate()?;
        match *self {
            FsoTurbulence::Exponential { lambda } => Ok(-(-lambda * x).exp_m1()),
            FsoTurbulence::LogNormal { varpi, delta } => {
                let z = (x.ln() - varpi) / delta;
                Ok(1.0 - crate::specfun::q_raw(z))
            }
            FsoTurbulence::GammaGamma { .. } => {
                let f = |t: f64| self.pdf(t).unwrap_or(0.0);
                let v = quad::integrate(f, 1e-12, x, 1e-11, 1e-10, &[x * 0.1, x * 0.5]);
                Ok(v.clamp(0.0, 1.0))
            }
        }
    }

    /// Draw `count` i.i.d. gains.
    pub fn sample(&self, stream: RngStream, count: usize) -> Vec<f64> {
        let mut rng = stream.rng();
        self.sample_with(&mut rng, count)
    }

    /// Draw using an existing generator (used by the Monte Carlo loops).
    pub fn sample_with<R: Rng>(&self, rng: &mut R, count: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(count);
        match *self {
            FsoTurbulence::Exponential { lambda } => {
                let d = Exp::new(lambda).expect("validated");
                out.extend((0..count).map(|_| d.sample(rng)));
            }
            FsoTurbulence::LogNormal { varpi, delta } => {
                let d = LogNormal::new(varpi, delta).expect("validated");
                out.extend((0..count).map(|_| d.sample(rng)));
            }
            FsoTurbulence::GammaGamma { a, b } => {
                let da = Gamma::new(a, 1.0 / a).expect("validated");
                let db = Gamma::new(b, 1.0 / b).expect("validated");
                out.extend((0..count).map(|_| da.sample(rng) * db.sample(rng)));
            }
        }
        out
    }

    /// One draw.
    pub fn sample_one<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            FsoTurbulence::Exponential { lambda } => Exp::new(lambda).expect("validated").sample(rng),
            FsoTurbulence::LogNormal { varpi, delta } => {
                LogNormal::new(varpi, delta).expect("validated").sample(rng)
            }
            FsoTurbulence::GammaGamma { a, b } => {
                Gamma::new(a, 1.0 / a).expect("validated").sample(rng)
                    * Gamma::new(b, 1.0 / b).expect("validated").sample(rng)
            }
        }
    }
}

/// RF fading gain distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RfChannel {
    /// Unit-rate exponential gain (|CN(0,1)|²).
    Rayleigh,
    /// Exponential gain with rate λ_RF.
    ExponentialRate { lambda_rf: f64 },
    /// λ_RF redrawn once per packet from a normalized log-normal; the gain
    /// is exponential with that rate for the whole packet.
    CompositeLogNormalRate { delta: f64, normalization: Normalization },
}

impl RfChannel {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            RfChannel::Rayleigh => true,
            RfChannel::ExponentialRate { lambda_rf } => lambda_rf > 0.0,
            RfChannel::CompositeLogNormalRate { delta, .. } => delta > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::contract("RfChannel", format!("invalid parameters {self:?}")))
        }
    }

    /// Draw the per-packet rate (fixed for non-composite variants).
    pub fn packet_rate<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            RfChannel::Rayleigh => 1.0,
            RfChannel::ExponentialRate { lambda_rf } => lambda_rf,
            RfChannel::CompositeLogNormalRate { delta, normalization } => {
                let z: f64 = StandardNormal.sample(rng);
                (normalization.location(delta) + delta * z).exp()
            }
        }
    }

    /// One packet gain: exponential with the packet rate.
    pub fn sample_one<R: Rng>(&self, rng: &mut R) -> f64 {
        let rate = self.packet_rate(rng);
        Exp::new(rate).expect("rate > 0").sample(rng)
    }

    /// Draw `count` packet gains.
    pub fn sample(&self, stream: RngStream, count: usize) -> Vec<f64> {
        let mut rng = stream.rng();
        (0..count).map(|_| self.sample_one(&mut rng)).collect()
    }
}
