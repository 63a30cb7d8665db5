//! Rejection-sampling constant K, separation distance, and assembly of the
//! stationarity bound.

use crate::error::{Error, Result};
use crate::estimators::EstimateReport;
use crate::rng::UniformStream;
use serde::Serialize;
use std::io::Write;
use std::sync::Arc;

/// A one-dimensional density known up to (optional) normalization.
#[derive(Clone)]
pub struct Density {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub normalized: bool,
}

impl Density {
    pub fn normalized(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { f: Arc::new(f), normalized: true }
    }

    pub fn unnormalized(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { f: Arc::new(f), normalized: false }
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }
}

/// Target/proposal pair on a shared support; the proposal must be positive
/// wherever the target is.
#[derive(Clone)]
pub struct DensityPair {
    pub target: Density,
    pub proposal: Density,
    /// Support endpoints; either may be infinite.
    pub support: (f64, f64),
}

/// How the essential supremum of the density ratio is obtained.
#[derive(Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SupMethod {
    /// User-supplied analytic value of sup target/proposal.
    Analytic(f64),
    /// Grid search over `[lo, hi]`, refined by golden section; yields a
    /// lower estimate of the essential sup.
    Grid { cells: usize, lo: f64, hi: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Analytic,
    Grid,
    LBased,
}

/// Rejection constant: finite K >= 1 or an unbounded-ratio flag, under
/// which the bound is vacuous.
#[derive(Clone, Copy, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KValue {
    Finite {
        k: f64,
        provenance: Provenance,
        /// True when K came from a grid search and so under-estimates the
        /// essential sup.
        lower_estimate: bool,
    },
    Unbounded,
}

impl KValue {
    pub fn finite(&self) -> Option<f64> {
        match self {
            KValue::Finite { k, .. } => Some(*k),
            KValue::Unbounded => None,
        }
    }
}

const GOLDEN_RATIO: f64 = 0.618_033_988_749_894_9;

fn golden_section_max(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut c = b - GOLDEN_RATIO * (b - a);
    let mut d = a + GOLDEN_RATIO * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() < 1e-12 * (a.abs() + b.abs() + 1.0) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN_RATIO * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN_RATIO * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd)
}

fn ratio_fn(pair: &DensityPair) -> impl Fn(f64) -> f64 + '_ {
    move |x| {
        let num = pair.target.eval(x);
        let den = pair.proposal.eval(x);
        if num <= 0.0 {
            0.0
        } else if den <= 0.0 {
            f64::INFINITY
        } else {
            num / den
        }
    }
}

// Checks whether the ratio keeps growing past the grid box toward an
// infinite support endpoint.
fn grows_unbounded(ratio: &dyn Fn(f64) -> f64, from: f64, toward_pos_inf: bool) -> bool {
    let mut x = if from.abs() < 1.0 { 1.0 } else { from.abs() };
    let mut prev = ratio(from);
    for _ in 0..60 {
        x *= 2.0;
        let probe = if toward_pos_inf { x } else { -x };
        let v = ratio(probe);
        if !v.is_finite() || v > 1e12 {
            return true;
        }
        if v <= prev {
            return false;
        }
        prev = v;
    }
    true
}

/// Essential supremum of target/proposal over the support.
pub fn rejection_constant(pair: &DensityPair, method: SupMethod) -> Result<KValue> {
    match method {
        SupMethod::Analytic(k) => {
            if !(k >= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "analytic K must be >= 1, got {k}"
                )));
            }
            Ok(KValue::Finite { k, provenance: Provenance::Analytic, lower_estimate: false })
        }
        SupMethod::Grid { cells, lo, hi } => {
            if cells < 2 || !(lo < hi) {
                return Err(Error::Usage(format!(
                    "grid method requires cells >= 2 and lo < hi, got {cells}, [{lo}, {hi}]"
                )));
            }
            let ratio = ratio_fn(pair);
            let h = (hi - lo) / cells as f64;
            let mut best_idx = 0usize;
            let mut best = f64::NEG_INFINITY;
            for i in 0..=cells {
                let v = ratio(lo + i as f64 * h);
                if !v.is_finite() {
                    return Ok(KValue::Unbounded);
                }
                // Lowest index wins ties, so parallel-by-cell evaluation
                // with a deterministic max-reduce gives the same answer.
                if v > best {
                    best = v;
                    best_idx = i;
                }
            }
            // Unbounded-ratio probe at box edges interior to the support.
            if pair.support.1 > hi && grows_unbounded(&ratio, hi, true) {
                return Ok(KValue::Unbounded);
            }
            if pair.support.0 < lo && grows_unbounded(&ratio, lo, false) {
                return Ok(KValue::Unbounded);
            }
            let a = lo + best_idx.saturating_sub(1) as f64 * h;
            let b = (lo + (best_idx + 1) as f64 * h).min(hi);
            let refined = golden_section_max(&ratio, a, b).max(best);
            Ok(KValue::Finite {
                k: refined.max(1.0),
                provenance: Provenance::Grid,
                lower_estimate: true,
            })
        }
    }
}

/// Separation distance s = 1 − 1/K.
pub fn separation_distance(pair: &DensityPair, method: SupMethod) -> Result<f64> {
    match rejection_constant(pair, method)? {
        KValue::Finite { k, .. } => Ok(1.0 - 1.0 / k),
        KValue::Unbounded => Ok(1.0),
    }
}

/// K upper bound from an unnormalized target: sup(g/ν) / L where L is a
/// verified lower bound on ∫g.
pub fn k_from_unnormalized(
    g: &Density,
    proposal: &Density,
    support: (f64, f64),
    l: f64,
    method: SupMethod,
) -> Result<KValue> {
    if !(l > 0.0) {
        return Err(Error::Usage(format!("L must be > 0, got {l}")));
    }
    let pair = DensityPair {
        target: g.clone(),
        proposal: proposal.clone(),
        support,
    };
    match rejection_constant(&pair, method)? {
        KValue::Finite { k: sup, lower_estimate, .. } => Ok(KValue::Finite {
            k: sup / l,
            provenance: Provenance::LBased,
            lower_estimate,
        }),
        KValue::Unbounded => Ok(KValue::Unbounded),
    }
}

/// Per-iteration upper bound (K · mean_n)^{1/p} with propagated standard
/// errors.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub k: Option<f64>,
    pub separation: f64,
    pub l: Option<f64>,
    pub provenance: Option<Provenance>,
    pub vacuous: bool,
    pub p: f64,
    pub iterations: Vec<BoundIteration>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoundIteration {
    pub n: usize,
    pub mean: f64,
    pub se: f64,
    pub bound: f64,
    pub bound_se: f64,
}

impl BoundReport {
    /// CSV export: iteration, mean, bound, se.
    pub fn write_csv(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "iteration,mean,bound,se")?;
        for it in &self.iterations {
            writeln!(
                w,
                "{},{},{},{}",
                it.n,
                crate::format_float(it.mean),
                crate::format_float(it.bound),
                crate::format_float(it.se)
            )?;
        }
        Ok(())
    }
}

pub fn stationarity_bound(k: &KValue, report: &EstimateReport) -> BoundReport {
    let p = report.p;
    match k {
        KValue::Unbounded => BoundReport {
            k: None,
            separation: 1.0,
            l: None,
            provenance: None,
            vacuous: true,
            p,
            iterations: report
                .iterations
                .iter()
                .map(|it| BoundIteration {
                    n: it.n,
                    mean: it.mean,
                    se: it.se,
                    bound: f64::INFINITY,
                    bound_se: f64::INFINITY,
                })
                .collect(),
        },
        KValue::Finite { k, provenance, .. } => {
            let iterations = report
                .iterations
                .iter()
                .map(|it| {
                    let scaled = k * it.mean;
                    let bound = scaled.powf(1.0 / p);
                    // Delta method: d(Km)^{1/p}/dm = K^{1/p} m^{1/p - 1} / p.
                    let bound_se = if it.mean > 0.0 {
                        k.powf(1.0 / p) * it.mean.powf(1.0 / p - 1.0) / p * it.se
                    } else {
                        0.0
                    };
                    BoundIteration { n: it.n, mean: it.mean, se: it.se, bound, bound_se }
                })
                .collect();
            BoundReport {
                k: Some(*k),
                separation: 1.0 - 1.0 / k,
                l: None,
                provenance: Some(*provenance),
                vacuous: false,
                p,
                iterations,
            }
        }
    }
}

/// Empirical acceptance rate of the rejection sampler over `trials`
/// proposals drawn via `propose`.
pub fn empirical_acceptance_rate(
    pair: &DensityPair,
    k: f64,
    propose: &mut dyn FnMut(&mut UniformStream) -> f64,
    trials: usize,
    stream: &mut UniformStream,
) -> f64 {
    let mut accepted = 0usize;
    for _ in 0..trials {
        let x = propose(stream);
        let u = stream.next_uniform();
        let ratio = pair.target.eval(x) / (k * pair.proposal.eval(x));
        if u <= ratio {
            accepted += 1;
        }
    }
    accepted as f64 / trials as f64
}
