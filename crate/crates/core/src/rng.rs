//! Deterministic uniform streams and inverse-CDF transforms.
//!
//! Every random draw in this crate is an explicit monotone function of a
//! uniform variate, so that coupling two chains on the same uniforms is
//! well defined. The generator is counter-based: the value at position n
//! depends only on (seed, replicate_id, n), never on thread scheduling.

use crate::error::{Error, Result};
use crate::numerics::{erfc, log_gamma, reg_inc_beta, reg_inc_gamma_lower};
use serde::{Deserialize, Serialize};

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
const INV_2_53: f64 = 1.0 / 9_007_199_254_740_992.0; // 2^-53

#[inline]
fn mix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    z
}

/// Deterministic, seedable source of uniforms on the open interval (0, 1).
///
/// Streams with distinct `replicate_id` use distinct substream keys, so
/// concurrent replicates can each own one without coordination.
#[derive(Clone, Debug)]
pub struct UniformStream {
    source: Source,
    position: u64,
}

#[derive(Clone, Debug)]
enum Source {
    Counter { key: u64 },
    Recorded { values: Vec<f64> },
}

impl UniformStream {
    pub fn new(seed: u64, replicate_id: u64) -> Self {
        let key = mix64(mix64(seed).wrapping_add(replicate_id.wrapping_mul(GOLDEN) ^ GOLDEN));
        Self {
            source: Source::Counter { key },
            position: 0,
        }
    }

    /// Test fixture: replays an explicit list of uniforms, then panics on
    /// exhaustion.
    pub fn from_recorded(values: Vec<f64>) -> Self {
        Self {
            source: Source::Recorded { values },
            position: 0,
        }
    }

    /// Number of uniforms drawn so far.
    pub fn position(&self) -> u64 {
        self.position
    }

    pub fn next_uniform(&mut self) -> f64 {
        let u = match &self.source {
            Source::Counter { key } => {
                let counter = self.position.wrapping_add(1).wrapping_mul(GOLDEN);
                let bits = mix64(key.wrapping_add(counter));
                let u = (bits >> 11) as f64 * INV_2_53;
                // Endpoints are excluded: inverse CDFs diverge there.
                if u == 0.0 {
                    INV_2_53
                } else {
                    u
                }
            }
            Source::Recorded { values } => values[self.position as usize],
        };
        self.position += 1;
        u
    }
}

/// Parametric one-dimensional distribution family with a monotone quantile
/// map.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum DistributionSpec {
    Uniform { a: f64, b: f64 },
    Normal { mean: f64, sd: f64 },
    Gamma { shape: f64, rate: f64 },
    InverseGamma { shape: f64, rate: f64 },
    Beta { a: f64, b: f64 },
}

impl DistributionSpec {
    /// Inv-χ²(ν₀, c₀²) represented as inverse-gamma(ν₀/2, ν₀c₀²/2).
    pub fn inverse_chi_squared(nu0: f64, c0sq: f64) -> Self {
        DistributionSpec::InverseGamma {
            shape: nu0 / 2.0,
            rate: nu0 * c0sq / 2.0,
        }
    }

    pub fn standard_normal() -> Self {
        DistributionSpec::Normal { mean: 0.0, sd: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            DistributionSpec::Uniform { a, b } => a.is_finite() && b.is_finite() && a < b,
            DistributionSpec::Normal { mean, sd } => mean.is_finite() && *sd > 0.0,
            DistributionSpec::Gamma { shape, rate }
            | DistributionSpec::InverseGamma { shape, rate } => *shape > 0.0 && *rate > 0.0,
            DistributionSpec::Beta { a, b } => *a > 0.0 && *b > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid parameters: {self:?}")))
        }
    }

    /// Cumulative distribution function.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        self.validate()?;
        Ok(match self {
            DistributionSpec::Uniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            DistributionSpec::Normal { mean, sd } => {
                0.5 * erfc(-(x - mean) / (sd * std::f64::consts::SQRT_2))
            }
            DistributionSpec::Gamma { shape, rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    reg_inc_gamma_lower(*shape, rate * x)?
                }
            }
            DistributionSpec::InverseGamma { shape, rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    1.0 - reg_inc_gamma_lower(*shape, rate / x)?
                }
            }
            DistributionSpec::Beta { a, b } => {
                if x <= 0.0 {
                    0.0
                } else if x >= 1.0 {
                    1.0
                } else {
                    reg_inc_beta(*a, *b, x)?
                }
            }
        })
    }

    /// Generalized inverse CDF, non-decreasing in `u`.
    pub fn inv_cdf(&self, u: f64) -> Result<f64> {
        self.validate()?;
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!("inv_cdf requires u in (0, 1), got {u}")));
        }
        Ok(match self {
            DistributionSpec::Uniform { a, b } => a + (b - a) * u,
            DistributionSpec::Normal { mean, sd } => mean + sd * standard_normal_quantile(u),
            DistributionSpec::Gamma { shape, rate } => gamma_quantile(*shape, u)? / rate,
            DistributionSpec::InverseGamma { shape, rate } => {
                // Reciprocal identity: X ~ IG(α, β)  ⇔  1/X ~ Gamma(α, β).
                rate / gamma_quantile(*shape, 1.0 - u)?
            }
            DistributionSpec::Beta { a, b } => beta_quantile(*a, *b, u)?,
        })
    }

    /// Truncated domain covering all but `eps` of probability mass on each
    /// tail; used to grid unbounded θ laws.
    pub fn quantile_range(&self, eps: f64) -> Result<(f64, f64)> {
        Ok((self.inv_cdf(eps)?, self.inv_cdf(1.0 - eps)?))
    }
}

// Acklam's rational approximation for the standard normal quantile,
// refined by one Newton step on the CDF (via erfc).
fn standard_normal_quantile(u: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let mut x = if u < P_LOW {
        let q = (-2.0 * u.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if u <= 1.0 - P_LOW {
        let q = u - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - u).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };

    // Two Newton refinements push the absolute error below 1e-12.
    for _ in 0..2 {
        let cdf = 0.5 * erfc(-x / std::f64::consts::SQRT_2);
        let pdf = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        if pdf > 0.0 {
            x -= (cdf - u) / pdf;
        }
    }
    x
}

const QUANTILE_TOL: f64 = 1e-12;
const QUANTILE_MAX_ITER: usize = 200;

// Solves P(shape, t) = u by safeguarded Newton with a growing bracket.
fn gamma_quantile(shape: f64, u: f64) -> Result<f64> {
    let ln_gamma_shape = log_gamma(shape)?;
    // Wilson-Hilferty starting point.
    let z = standard_normal_quantile(u);
    let d = 1.0 / (9.0 * shape);
    let wh = shape * (1.0 - d + z * d.sqrt()).powi(3);
    let mut t = if wh.is_finite() && wh > 0.0 {
        wh
    } else {
        // Small-shape fallback from the leading series term.
        ((u.ln() + log_gamma(shape + 1.0)?) / shape).exp()
    };
    if !(t.is_finite() && t > 0.0) {
        t = 1e-8;
    }

    let mut lo = 0.0f64;
    let mut hi = t.max(1.0);
    while reg_inc_gamma_lower(shape, hi)? < u {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Domain(format!(
                "gamma quantile bracket overflow for shape {shape}, u {u}"
            )));
        }
    }
    t = t.clamp(lo.max(f64::MIN_POSITIVE), hi);

    for _ in 0..QUANTILE_MAX_ITER {
        let f = reg_inc_gamma_lower(shape, t)? - u;
        if f.abs() <= QUANTILE_TOL * u.min(1.0 - u).max(1e-300) || (hi - lo) <= 1e-15 * t {
            break;
        }
        if f > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let ln_pdf = (shape - 1.0) * t.ln() - t - ln_gamma_shape;
        let step = f / ln_pdf.exp();
        let next = t - step;
        t = if next.is_finite() && next > lo && next < hi {
            next
        } else {
            0.5 * (lo + hi)
        };
    }
    Ok(t)
}

// Solves I_x(a, b) = u by safeguarded Newton on [0, 1].
fn beta_quantile(a: f64, b: f64, u: f64) -> Result<f64> {
    let ln_beta = log_gamma(a)? + log_gamma(b)? - log_gamma(a + b)?;
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let mut x = (a / (a + b)).clamp(1e-12, 1.0 - 1e-12);

    for _ in 0..QUANTILE_MAX_ITER {
        let f = reg_inc_beta(a, b, x)? - u;
        if f.abs() <= QUANTILE_TOL * u.min(1.0 - u).max(1e-300) || (hi - lo) <= 1e-16 {
            break;
        }
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let ln_pdf = (a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln() - ln_beta;
        let step = f / ln_pdf.exp();
        let next = x - step;
        x = if next.is_finite() && next > lo && next < hi {
            next
        } else {
            0.5 * (lo + hi)
        };
    }
    Ok(x)
}

/// How the partner chain's θ draws relate to the primary chain's.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingMode {
    /// θ′ = F⁻¹(u) with the same u.
    Crn,
    /// θ′ = F⁻¹(1 − u).
    Antithetic,
    /// θ′ drawn from the partner stream.
    Independent,
}

impl std::str::FromStr for CouplingMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "crn" => Ok(CouplingMode::Crn),
            "antithetic" => Ok(CouplingMode::Antithetic),
            "independent" => Ok(CouplingMode::Independent),
            other => Err(Error::Usage(format!(
                "unknown coupling mode '{other}' (expected crn, antithetic, independent)"
            ))),
        }
    }
}

impl std::fmt::Display for CouplingMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CouplingMode::Crn => write!(f, "crn"),
            CouplingMode::Antithetic => write!(f, "antithetic"),
            CouplingMode::Independent => write!(f, "independent"),
        }
    }
}

/// Draws a coupled pair (θ, θ′) coordinate-wise.
///
/// The primary stream is always consumed in fixed coordinate order; the
/// partner stream is consumed only in independent mode.
pub fn draw_theta(
    specs: &[DistributionSpec],
    stream: &mut UniformStream,
    mode: CouplingMode,
    partner: &mut UniformStream,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut theta = Vec::with_capacity(specs.len());
    let mut theta_prime = Vec::with_capacity(specs.len());
    for spec in specs {
        let u = stream.next_uniform();
        let primary = spec.inv_cdf(u)?;
        let secondary = match mode {
            CouplingMode::Crn => primary,
            CouplingMode::Antithetic => spec.inv_cdf(1.0 - u)?,
            CouplingMode::Independent => spec.inv_cdf(partner.next_uniform())?,
        };
        theta.push(primary);
        theta_prime.push(secondary);
    }
    Ok((theta, theta_prime))
}
