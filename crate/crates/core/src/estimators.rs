//! Distance estimators: the coupled-replicate mean-distance algorithm, the
//! one-dimensional quantile-coupling Wasserstein oracle, monotonicity-region
//! classification, and the contraction estimator.

use crate::error::{Error, Result};
use crate::ifs::{euclidean_distance, ChainModel};
use crate::rng::{draw_theta, CouplingMode, DistributionSpec, UniformStream};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::sync::Arc;

/// A half-open-agnostic interval [lo, hi]; interval lists are kept sorted
/// and disjoint.
pub type Interval = (f64, f64);

fn normalize_intervals(mut list: Vec<Interval>) -> Vec<Interval> {
    list.retain(|(a, b)| b > a);
    list.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut out: Vec<Interval> = Vec::with_capacity(list.len());
    for (a, b) in list {
        match out.last_mut() {
            Some((_, prev_hi)) if a <= *prev_hi => *prev_hi = prev_hi.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

fn intersect_intervals(xs: &[Interval], ys: &[Interval]) -> Vec<Interval> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < xs.len() && j < ys.len() {
        let lo = xs[i].0.max(ys[j].0);
        let hi = xs[i].1.min(ys[j].1);
        if hi > lo {
            out.push((lo, hi));
        }
        if xs[i].1 < ys[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

fn contains(list: &[Interval], x: f64) -> bool {
    list.iter().any(|(a, b)| x >= *a && x <= *b)
}

/// Monotone regions of θ ↦ f(θ, z) for a fixed state z.
#[derive(Clone, Debug, Serialize)]
pub struct MonotonicityPartition {
    /// Intervals where the map is non-decreasing (plateaus included).
    pub non_decreasing: Vec<Interval>,
    /// Intervals where the map is non-increasing.
    pub non_increasing: Vec<Interval>,
    pub grid_resolution: usize,
    pub domain: Interval,
}

/// Classifies monotone regions on an `m`-cell grid over `domain`.
///
/// Each cell is labeled by the sign of the difference across it; plateau
/// cells count as non-decreasing. Breakpoints are resolved to grid cells.
pub fn classify_monotonicity(
    f: &dyn Fn(f64) -> f64,
    domain: Interval,
    m: usize,
) -> Result<MonotonicityPartition> {
    if m < 2 {
        return Err(Error::Usage(format!("grid resolution must be >= 2, got {m}")));
    }
    let (lo, hi) = domain;
    if !(lo < hi) {
        return Err(Error::Usage(format!("bad domain [{lo}, {hi}]")));
    }
    let h = (hi - lo) / m as f64;
    let values: Vec<f64> = (0..=m).map(|i| f(lo + i as f64 * h)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain(
            "non-finite function value during monotonicity classification".into(),
        ));
    }
    let mut inc = Vec::new();
    let mut dec = Vec::new();
    let mut run_start = 0usize;
    let mut run_sign = values[1] >= values[0];
    for i in 1..m {
        let sign = values[i + 1] >= values[i];
        if sign != run_sign {
            let iv = (lo + run_start as f64 * h, lo + i as f64 * h);
            if run_sign { inc.push(iv) } else { dec.push(iv) }
            run_start = i;
            run_sign = sign;
        }
    }
    let iv = (lo + run_start as f64 * h, hi);
    if run_sign { inc.push(iv) } else { dec.push(iv) }
    Ok(MonotonicityPartition {
        non_decreasing: normalize_intervals(inc),
        non_increasing: normalize_intervals(dec),
        grid_resolution: m,
        domain,
    })
}

/// The common monotone region A = (I_x ∩ I_y) ∪ (D_x ∩ D_y) and its
/// probability under the θ law.
#[derive(Clone, Debug, Serialize)]
pub struct CommonRegion {
    pub intervals: Vec<Interval>,
    pub prob_a: f64,
}

pub fn common_region(
    part_x: &MonotonicityPartition,
    part_y: &MonotonicityPartition,
    theta_law: &DistributionSpec,
) -> Result<CommonRegion> {
    let ii = intersect_intervals(&part_x.non_decreasing, &part_y.non_decreasing);
    let dd = intersect_intervals(&part_x.non_increasing, &part_y.non_increasing);
    let intervals = normalize_intervals([ii, dd].concat());
    let mut prob_a = 0.0;
    for (a, b) in &intervals {
        prob_a += theta_law.cdf(*b)? - theta_law.cdf(*a)?;
    }
    Ok(CommonRegion {
        intervals,
        prob_a: prob_a.clamp(0.0, 1.0),
    })
}

/// Per-iteration mean coupled distance to the p-th power with Monte Carlo
/// standard errors.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EstimateReport {
    pub chain: String,
    pub p: f64,
    pub replicates: usize,
    pub horizon: usize,
    pub coupling: CouplingMode,
    pub seed: u64,
    pub iterations: Vec<IterationStat>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct IterationStat {
    pub n: usize,
    /// (1/I) Σ |x_{n,i} − y_{n,i}|^p.
    pub mean: f64,
    /// Sample standard deviation of |x_n − y_n|^p over replicates, / √I.
    pub se: f64,
}

impl EstimateReport {
    pub fn mean_at(&self, n: usize) -> f64 {
        self.iterations[n].mean
    }

    pub fn se_at(&self, n: usize) -> f64 {
        self.iterations[n].se
    }

    /// CSV export: iteration, mean, se.
    pub fn write_csv(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "iteration,mean,se")?;
        for it in &self.iterations {
            writeln!(
                w,
                "{},{},{}",
                it.n,
                crate::format_float(it.mean),
                crate::format_float(it.se)
            )?;
        }
        Ok(())
    }
}

/// Initial-state sampler for one side of the coupled pair.
#[derive(Clone)]
pub enum InitSampler {
    Point(Vec<f64>),
    Sampler(Arc<dyn Fn(&mut UniformStream) -> Result<Vec<f64>> + Send + Sync>),
}

impl InitSampler {
    pub fn point(x: impl Into<Vec<f64>>) -> Self {
        InitSampler::Point(x.into())
    }

    pub fn from_fn(
        f: impl Fn(&mut UniformStream) -> Result<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        InitSampler::Sampler(Arc::new(f))
    }

    fn draw(&self, stream: &mut UniformStream) -> Result<Vec<f64>> {
        match self {
            InitSampler::Point(x) => Ok(x.clone()),
            InitSampler::Sampler(f) => f(stream),
        }
    }
}

// Substream roles per replicate. Initial draws are independent of each
// other and of the theta stream by construction.
const STREAMS_PER_REPLICATE: u64 = 4;
const ROLE_INIT_X: u64 = 0;
const ROLE_INIT_Y: u64 = 1;
const ROLE_THETA: u64 = 2;
const ROLE_PARTNER: u64 = 3;

fn replicate_trace(
    chain: &ChainModel,
    init_mu: &InitSampler,
    init_nu: &InitSampler,
    horizon: usize,
    p: f64,
    mode: CouplingMode,
    seed: u64,
    replicate: usize,
) -> Result<Vec<f64>> {
    let base = replicate as u64 * STREAMS_PER_REPLICATE;
    let mut init_x_stream = UniformStream::new(seed, base + ROLE_INIT_X);
    let mut init_y_stream = UniformStream::new(seed, base + ROLE_INIT_Y);
    let mut theta_stream = UniformStream::new(seed, base + ROLE_THETA);
    let mut partner_stream = UniformStream::new(seed, base + ROLE_PARTNER);

    let mut x = init_mu.draw(&mut init_x_stream)?;
    let mut y = init_nu.draw(&mut init_y_stream)?;
    let mut trace = Vec::with_capacity(horizon + 1);
    trace.push(euclidean_distance(&x, &y).powf(p));
    let tag = |e: Error| match e {
        Error::NonFinite { iteration, .. } => Error::NonFinite {
            iteration,
            replicate: Some(replicate),
        },
        other => other,
    };
    for n in 1..=horizon {
        let (theta, theta_prime) =
            draw_theta(&chain.theta_specs, &mut theta_stream, mode, &mut partner_stream)
                .map_err(tag)?;
        x = chain.step(&theta, &x);
        y = chain.step(&theta_prime, &y);
        if !x.iter().chain(y.iter()).all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                iteration: n,
                replicate: Some(replicate),
            });
        }
        trace.push(euclidean_distance(&x, &y).powf(p));
    }
    Ok(trace)
}

/// Coupled-replicate estimate of E[|X_n − Y_n|^p] for every n ≤ N.
///
/// Replicates are independent tasks; aggregation is in fixed replicate
/// order so results are bit-identical regardless of worker count.
pub fn algorithm1(
    chain: &ChainModel,
    init_mu: &InitSampler,
    init_nu: &InitSampler,
    horizon: usize,
    replicates: usize,
    p: f64,
    mode: CouplingMode,
    seed: u64,
) -> Result<EstimateReport> {
    Ok(algorithm1_with_traces(chain, init_mu, init_nu, horizon, replicates, p, mode, seed)?.0)
}

/// As [`algorithm1`], but also returns the per-replicate |x_n − y_n|^p
/// traces (row = replicate).
#[allow(clippy::too_many_arguments)]
pub fn algorithm1_with_traces(
    chain: &ChainModel,
    init_mu: &InitSampler,
    init_nu: &InitSampler,
    horizon: usize,
    replicates: usize,
    p: f64,
    mode: CouplingMode,
    seed: u64,
) -> Result<(EstimateReport, Vec<Vec<f64>>)> {
    if replicates == 0 {
        return Err(Error::Usage("replicate count must be >= 1".into()));
    }
    if !(p >= 1.0) {
        return Err(Error::Usage(format!("p must be >= 1, got {p}")));
    }
    let traces: Vec<Vec<f64>> = (0..replicates)
        .into_par_iter()
        .map(|i| replicate_trace(chain, init_mu, init_nu, horizon, p, mode, seed, i))
        .collect::<Result<_>>()?;

    let mut iterations = Vec::with_capacity(horizon + 1);
    for n in 0..=horizon {
        let mean = traces.iter().map(|t| t[n]).sum::<f64>() / replicates as f64;
        let se = if replicates > 1 {
            let var = traces
                .iter()
                .map(|t| (t[n] - mean) * (t[n] - mean))
                .sum::<f64>()
                / (replicates as f64 - 1.0);
            (var / replicates as f64).sqrt()
        } else {
            0.0
        };
        iterations.push(IterationStat { n, mean, se });
    }
    Ok((
        EstimateReport {
            chain: chain.name.clone(),
            p,
            replicates,
            horizon,
            coupling: mode,
            seed,
            iterations,
        },
        traces,
    ))
}

/// Empirical L^p-Wasserstein distance between two equal-size samples via
/// the sorted (quantile) coupling, which is optimal in one dimension.
pub fn empirical_wasserstein(samples_a: &[f64], samples_b: &[f64], p: f64) -> Result<f64> {
    let (wpp, _) = empirical_wasserstein_pth(samples_a, samples_b, p)?;
    Ok(wpp.powf(1.0 / p))
}

/// W_p^p (the mean of sorted |differences|^p) with a delta-method standard
/// error for that mean.
pub fn empirical_wasserstein_pth(
    samples_a: &[f64],
    samples_b: &[f64],
    p: f64,
) -> Result<(f64, f64)> {
    if samples_a.is_empty() || samples_a.len() != samples_b.len() {
        return Err(Error::Usage(format!(
            "samples must be equal-length and nonempty, got {} and {}",
            samples_a.len(),
            samples_b.len()
        )));
    }
    let mut a = samples_a.to_vec();
    let mut b = samples_b.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let n = a.len() as f64;
    let powers: Vec<f64> = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs().powf(p))
        .collect();
    let mean = powers.iter().sum::<f64>() / n;
    let se = if powers.len() > 1 {
        let var = powers.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok((mean, se))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MonotoneCase {
    /// P(A) = 1: the CRN estimate is unbiased for W₂².
    Matched,
    /// P(A) = 0: the antithetic estimate is unbiased for W₂².
    Opposed,
    /// 0 < P(A) < 1: only the interval [crn − ê, crn] brackets W₂².
    Mixed,
}

/// One-step squared-distance estimates under CRN and antithetic couplings,
/// classified by the common monotone region.
#[derive(Clone, Debug, Serialize)]
pub struct OneStepReport {
    pub case: MonotoneCase,
    pub prob_a: f64,
    pub crn_estimate: f64,
    pub crn_se: f64,
    pub antithetic_estimate: f64,
    pub antithetic_se: f64,
    /// Monte Carlo estimate of the mixed-case error term e; may be
    /// negative, which is flagged rather than clamped.
    pub error_term: f64,
    pub error_term_negative: bool,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

/// One-step W₂² estimator for f(θ, ·) at fixed states x, y.
///
/// The θ domain for classification is the law's (ε, 1−ε) quantile range
/// with ε = 1e-6 unless the law is already bounded.
pub fn one_step_w2(
    f: &(dyn Fn(f64, f64) -> f64 + Sync),
    x: f64,
    y: f64,
    theta_spec: &DistributionSpec,
    grid: usize,
    samples: usize,
    seed: u64,
) -> Result<OneStepReport> {
    if samples == 0 {
        return Err(Error::Usage("sample count must be >= 1".into()));
    }
    let domain = match theta_spec {
        DistributionSpec::Uniform { a, b } => (*a, *b),
        DistributionSpec::Beta { .. } => (0.0, 1.0),
        _ => theta_spec.quantile_range(1e-6)?,
    };
    let part_x = classify_monotonicity(&|t| f(t, x), domain, grid)?;
    let part_y = classify_monotonicity(&|t| f(t, y), domain, grid)?;
    let region = common_region(&part_x, &part_y, theta_spec)?;

    // Measure of a few grid cells, the classification resolution.
    let case_tol = 16.0 / grid as f64;
    let case = if region.prob_a >= 1.0 - case_tol {
        MonotoneCase::Matched
    } else if region.prob_a <= case_tol {
        MonotoneCase::Opposed
    } else {
        MonotoneCase::Mixed
    };

    let mut stream = UniformStream::new(seed, 0);
    let mut crn = MeanAcc::new();
    let mut anti = MeanAcc::new();
    let mut err = MeanAcc::new();
    for _ in 0..samples {
        let u = stream.next_uniform();
        let theta_u = theta_spec.inv_cdf(u)?;
        let theta_refl = theta_spec.inv_cdf(1.0 - u)?;
        let fx = f(theta_u, x);
        let fy = f(theta_u, y);
        let fx_refl = f(theta_refl, x);
        crn.push((fx - fy) * (fx - fy));
        anti.push((fx_refl - fy) * (fx_refl - fy));
        let in_complement = !contains(&region.intervals, theta_u);
        err.push(if in_complement {
            2.0 * (fx_refl - fx) * fy
        } else {
            0.0
        });
    }

    let (crn_estimate, crn_se) = crn.finish();
    let (antithetic_estimate, antithetic_se) = anti.finish();
    let (error_term, _) = err.finish();
    let (lower_bound, upper_bound) = match case {
        MonotoneCase::Matched => (crn_estimate, crn_estimate),
        MonotoneCase::Opposed => (antithetic_estimate, antithetic_estimate),
        MonotoneCase::Mixed => (crn_estimate - error_term, crn_estimate),
    };
    Ok(OneStepReport {
        case,
        prob_a: region.prob_a,
        crn_estimate,
        crn_se,
        antithetic_estimate,
        antithetic_se,
        error_term,
        error_term_negative: error_term < 0.0,
        lower_bound,
        upper_bound,
    })
}

struct MeanAcc {
    n: usize,
    mean: f64,
    m2: f64,
}

impl MeanAcc {
    fn new() -> Self {
        Self { n: 0, mean: 0.0, m2: 0.0 }
    }

    fn push(&mut self, v: f64) {
        self.n += 1;
        let delta = v - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (v - self.mean);
    }

    fn finish(&self) -> (f64, f64) {
        let se = if self.n > 1 {
            (self.m2 / (self.n as f64 - 1.0) / self.n as f64).sqrt()
        } else {
            0.0
        };
        (self.mean, se)
    }
}

/// Contraction-factor estimate: max over sampled state pairs of the mean
/// post-map distance ratio.
#[derive(Clone, Debug, Serialize)]
pub struct ContractionEstimate {
    pub d_hat: f64,
    /// (ratio, se) per retained pair.
    pub per_pair: Vec<(f64, f64)>,
    /// Pairs skipped because d(x, x') = 0.
    pub skipped: usize,
}

pub fn contraction_estimate(
    chain: &ChainModel,
    pair_sampler: &dyn Fn(&mut UniformStream) -> (Vec<f64>, Vec<f64>),
    n_pairs: usize,
    n_theta: usize,
    seed: u64,
) -> Result<ContractionEstimate> {
    let mut pair_stream = UniformStream::new(seed, 0);
    let mut theta_stream = UniformStream::new(seed, 1);
    let mut per_pair = Vec::new();
    let mut skipped = 0usize;
    for _ in 0..n_pairs {
        let (x, y) = pair_sampler(&mut pair_stream);
        let d0 = euclidean_distance(&x, &y);
        if d0 == 0.0 {
            skipped += 1;
            continue;
        }
        let mut acc = MeanAcc::new();
        for _ in 0..n_theta {
            let mut theta = Vec::with_capacity(chain.theta_specs.len());
            for spec in &chain.theta_specs {
                theta.push(spec.inv_cdf(theta_stream.next_uniform())?);
            }
            let fx = chain.step(&theta, &x);
            let fy = chain.step(&theta, &y);
            acc.push(euclidean_distance(&fx, &fy) / d0);
        }
        per_pair.push(acc.finish());
    }
    let d_hat = per_pair
        .iter()
        .map(|(r, _)| *r)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ContractionEstimate {
        d_hat,
        per_pair,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains;

    #[test]
    fn linear_increasing_is_single_interval() {
        let part = classify_monotonicity(&|t| t, (0.0, 1.0), 64).unwrap();
        assert_eq!(part.non_decreasing, vec![(0.0, 1.0)]);
        assert!(part.non_increasing.is_empty());
    }

    #[test]
    fn constant_function_plateau_rule() {
        let part = classify_monotonicity(&|_| 3.0, (0.0, 1.0), 64).unwrap();
        assert_eq!(part.non_decreasing, vec![(0.0, 1.0)]);
        assert!(part.non_increasing.is_empty());
    }

    #[test]
    fn cosine_switch_within_one_cell() {
        let m = 4096;
        let part =
            classify_monotonicity(&|t| (std::f64::consts::PI * t).cos(), (0.0, 2.0), m).unwrap();
        let cell = 2.0 / m as f64;
        assert_eq!(part.non_increasing.len(), 1);
        assert_eq!(part.non_decreasing.len(), 1);
        assert!((part.non_increasing[0].0 - 0.0).abs() <= cell);
        assert!((part.non_increasing[0].1 - 1.0).abs() <= cell);
        assert!((part.non_decreasing[0].0 - 1.0).abs() <= cell);
        assert!((part.non_decreasing[0].1 - 2.0).abs() <= cell);
    }

    #[test]
    fn common_region_identical_partitions() {
        let law = DistributionSpec::Uniform { a: 0.0, b: 2.0 };
        let part =
            classify_monotonicity(&|t| (std::f64::consts::PI * t).cos(), (0.0, 2.0), 4096).unwrap();
        let region = common_region(&part, &part, &law).unwrap();
        assert!((region.prob_a - 1.0).abs() < 1e-3);
    }

    #[test]
    fn common_region_opposed_linear() {
        let law = DistributionSpec::Uniform { a: 0.0, b: 1.0 };
        let px = classify_monotonicity(&|t| t, (0.0, 1.0), 256).unwrap();
        let py = classify_monotonicity(&|t| -t, (0.0, 1.0), 256).unwrap();
        let region = common_region(&px, &py, &law).unwrap();
        assert_eq!(region.prob_a, 0.0);
    }

    #[test]
    fn common_region_fig3_intervals() {
        let law = DistributionSpec::Uniform { a: 0.0, b: 2.0 };
        let m = 4096;
        let px = classify_monotonicity(&|t| chains::cos_family(t, 1.0), (0.0, 2.0), m).unwrap();
        let py = classify_monotonicity(&|t| chains::cos_family(t, 2.0), (0.0, 2.0), m).unwrap();
        let region = common_region(&px, &py, &law).unwrap();
        let cell = 2.0 / m as f64;
        assert_eq!(region.intervals.len(), 2, "{:?}", region.intervals);
        let expected = [(0.0, 0.5), (1.5, 2.0)];
        for ((lo, hi), (elo, ehi)) in region.intervals.iter().zip(expected.iter()) {
            assert!((lo - elo).abs() <= cell && (hi - ehi).abs() <= cell);
        }
        assert!((region.prob_a - 0.5).abs() <= 2.0 / m as f64);
    }

    #[test]
    fn wasserstein_identical_multisets() {
        assert_eq!(empirical_wasserstein(&[1.0, 2.0], &[2.0, 1.0], 2.0).unwrap(), 0.0);
    }

    #[test]
    fn wasserstein_shifted_pair() {
        // Enumerating both couplings of {1,2} vs {3,4} confirms the sorted
        // pairing is optimal: (|1-3|+|2-4|)/2 = 2 vs (|1-4|+|2-3|)/2 = 2.
        assert_eq!(empirical_wasserstein(&[1.0, 2.0], &[3.0, 4.0], 1.0).unwrap(), 2.0);
    }

    #[test]
    fn wasserstein_length_mismatch() {
        assert!(empirical_wasserstein(&[1.0], &[1.0, 2.0], 1.0).is_err());
    }

    #[test]
    fn algorithm1_ar1_analytic_cancellation() {
        let chain = chains::ar1(0.9, 1.0).unwrap();
        let report = algorithm1(
            &chain,
            &InitSampler::point(vec![25.0]),
            &InitSampler::point(vec![-25.0]),
            20,
            8,
            1.0,
            CouplingMode::Crn,
            7,
        )
        .unwrap();
        for n in 0..=20 {
            let expected = 0.9f64.powi(n as i32) * 50.0;
            assert!((report.mean_at(n) - expected).abs() <= 1e-9 * expected);
            assert!(report.se_at(n) <= 1e-12 * expected.max(1.0));
        }
    }

    #[test]
    fn algorithm1_identical_inits_all_zero() {
        let chain = chains::random_logistic(1.0).unwrap();
        let init = InitSampler::point(vec![0.5]);
        let report =
            algorithm1(&chain, &init, &init, 10, 16, 2.0, CouplingMode::Crn, 3).unwrap();
        assert!(report.iterations.iter().all(|it| it.mean == 0.0));
    }

    #[test]
    fn algorithm1_rejects_zero_replicates() {
        let chain = chains::ar1(0.9, 1.0).unwrap();
        let init = InitSampler::point(vec![0.0]);
        assert!(algorithm1(&chain, &init, &init, 5, 0, 1.0, CouplingMode::Crn, 1).is_err());
    }

    #[test]
    fn one_step_trivial_equal_states() {
        let spec = DistributionSpec::Uniform { a: 0.0, b: 1.0 };
        let r = one_step_w2(&|t, x| x * t, 1.0, 1.0, &spec, 512, 1000, 5).unwrap();
        assert_eq!(r.crn_estimate, 0.0);
        assert_eq!(r.case, MonotoneCase::Matched);
    }

    #[test]
    fn one_step_opposed_linear_case() {
        let spec = DistributionSpec::Uniform { a: 0.0, b: 1.0 };
        let r = one_step_w2(&|t, x| x * t, 1.0, -1.0, &spec, 1024, 20_000, 5).unwrap();
        assert_eq!(r.case, MonotoneCase::Opposed);
        // E[((1-U) + U)^2] = 1 and E[(2U)^2] = 4/3.
        assert!((r.antithetic_estimate - 1.0).abs() < 1e-6);
        assert!((r.crn_estimate - 4.0 / 3.0).abs() < 0.02);
    }

    #[test]
    fn contraction_ar1_is_exact() {
        let chain = chains::ar1(0.9, 1.0).unwrap();
        let sampler = |s: &mut UniformStream| {
            let a = s.next_uniform() * 20.0 - 10.0;
            let b = s.next_uniform() * 20.0 - 10.0;
            (vec![a], vec![b])
        };
        let est = contraction_estimate(&chain, &sampler, 50, 20, 2).unwrap();
        assert!((est.d_hat - 0.9).abs() < 1e-12);
    }

    #[test]
    fn contraction_identity_map() {
        let chain = crate::ifs::ChainModel::new(
            "id",
            1,
            vec![DistributionSpec::Uniform { a: 0.0, b: 1.0 }],
            None,
            |_, x| x.to_vec(),
        )
        .unwrap();
        let sampler = |s: &mut UniformStream| {
            let a = s.next_uniform();
            (vec![a], vec![a + 1.0])
        };
        let est = contraction_estimate(&chain, &sampler, 10, 10, 2).unwrap();
        assert_eq!(est.d_hat, 1.0);
    }

    #[test]
    fn contraction_skips_zero_distance_pairs() {
        let chain = chains::ar1(0.9, 1.0).unwrap();
        let sampler = |_: &mut UniformStream| (vec![1.0], vec![1.0]);
        let est = contraction_estimate(&chain, &sampler, 5, 5, 2).unwrap();
        assert_eq!(est.skipped, 5);
        assert!(est.per_pair.is_empty());
    }
}
