//! Cross-module property tests: inverse-CDF round trips, coupling closure,
//! Wasserstein metric axioms, Cholesky reconstruction, and the
//! forward/backward marginal equality.

use crn::chains::ar1;
use crn::estimators::empirical_wasserstein;
use crn::ifs::{simulate_backward, simulate_forward};
use crn::numerics::{log_gamma, reg_inc_beta, reg_inc_gamma_lower, reg_inc_gamma_upper, SpdMatrix};
use crn::rng::{DistributionSpec, UniformStream};
use proptest::prelude::*;

fn test_specs() -> Vec<DistributionSpec> {
    vec![
        DistributionSpec::Uniform { a: -2.0, b: 5.0 },
        DistributionSpec::Normal { mean: 1.5, sd: 0.7 },
        DistributionSpec::Gamma { shape: 2.5, rate: 1.3 },
        DistributionSpec::Gamma { shape: 0.4, rate: 2.0 },
        DistributionSpec::InverseGamma { shape: 10.5, rate: 5.0 },
        DistributionSpec::Beta { a: 1.5, b: 0.5 },
        DistributionSpec::Beta { a: 3.0, b: 4.0 },
    ]
}

proptest! {
    #[test]
    fn inv_cdf_round_trips(u in 1.0e-6..=0.999_999f64) {
        for spec in test_specs() {
            let x = spec.inv_cdf(u).unwrap();
            let back = spec.cdf(x).unwrap();
            prop_assert!(
                (back - u).abs() <= 1.0e-9,
                "{spec:?}: cdf(inv_cdf({u})) = {back}"
            );
        }
    }

    #[test]
    fn inv_cdf_is_monotone(u in 1.0e-6..=0.999_998f64, du in 1.0e-6..=1.0e-3f64) {
        let v = (u + du).min(0.999_999);
        for spec in test_specs() {
            let a = spec.inv_cdf(u).unwrap();
            let b = spec.inv_cdf(v).unwrap();
            prop_assert!(a <= b, "{spec:?}: inv_cdf not monotone at ({u}, {v})");
        }
    }

    // Applying the antithetic reflection twice recovers the original draw
    // up to one rounding of the uniform itself.
    #[test]
    fn antithetic_is_an_involution(u in 1.0e-6..=0.999_999f64) {
        for spec in test_specs() {
            let direct = spec.inv_cdf(u).unwrap();
            let twice = spec.inv_cdf(1.0 - (1.0 - u)).unwrap();
            prop_assert!(
                (direct - twice).abs() <= 1.0e-9 * (1.0 + direct.abs()),
                "{spec:?}: {direct} vs {twice} at u = {u}"
            );
        }
    }

    #[test]
    fn wasserstein_metric_axioms(seed in 0u64..1000, p in 1.0..3.0f64) {
        let mut s = UniformStream::new(seed, 0);
        let n = 64;
        let a: Vec<f64> = (0..n).map(|_| s.next_uniform() * 4.0 - 2.0).collect();
        let b: Vec<f64> = (0..n).map(|_| s.next_uniform() * 4.0 - 2.0).collect();
        let c: Vec<f64> = (0..n).map(|_| s.next_uniform() * 4.0 - 2.0).collect();

        let wab = empirical_wasserstein(&a, &b, p).unwrap();
        let wba = empirical_wasserstein(&b, &a, p).unwrap();
        let wac = empirical_wasserstein(&a, &c, p).unwrap();
        let wcb = empirical_wasserstein(&c, &b, p).unwrap();
        let waa = empirical_wasserstein(&a, &a, p).unwrap();

        prop_assert!(waa.abs() <= 1.0e-12, "identity failed: {waa}");
        prop_assert!((wab - wba).abs() <= 1.0e-12, "symmetry failed");
        prop_assert!(wab <= wac + wcb + 1.0e-9, "triangle failed: {wab} > {wac} + {wcb}");
        prop_assert!(wab >= 0.0);
    }
}

#[test]
fn cholesky_reconstruction_is_accurate() {
    // A @ A^T + d*I is SPD for any square A; rebuild it from its factor.
    let dim = 6;
    let mut s = UniformStream::new(7, 0);
    let a: Vec<Vec<f64>> = (0..dim)
        .map(|_| (0..dim).map(|_| s.next_uniform() * 2.0 - 1.0).collect())
        .collect();
    let mut m = SpdMatrix::identity(dim);
    for i in 0..dim {
        for j in 0..dim {
            let v: f64 = (0..dim).map(|k| a[i][k] * a[j][k]).sum::<f64>()
                + if i == j { 0.5 } else { 0.0 };
            m.set(i, j, v);
        }
    }
    let chol = m.cholesky().unwrap();
    for i in 0..dim {
        for j in 0..dim {
            let rebuilt: f64 = (0..=i.min(j)).map(|k| chol.get(i, k) * chol.get(j, k)).sum();
            let denom = m.get(i, i).max(m.get(j, j));
            assert!(
                (rebuilt - m.get(i, j)).abs() / denom <= 1.0e-9,
                "entry ({i},{j}): {} vs {}",
                rebuilt,
                m.get(i, j)
            );
        }
    }
}

#[test]
fn incomplete_function_identities() {
    for (a, x) in [(0.5, 0.3), (2.5, 1.0), (10.5, 9.0), (1.0, 4.0)] {
        let lower = reg_inc_gamma_lower(a, x).unwrap();
        let upper = reg_inc_gamma_upper(a, x).unwrap();
        assert!((lower + upper - 1.0).abs() <= 1.0e-12, "gamma split at ({a},{x})");
    }
    // Exponential special case: P(1, x) = 1 - e^{-x}.
    let p1 = reg_inc_gamma_lower(1.0, 0.7).unwrap();
    assert!((p1 - (1.0 - (-0.7f64).exp())).abs() <= 1.0e-12);

    for (a, b, x) in [(1.5, 0.5, 0.3), (3.0, 4.0, 0.6), (0.7, 0.7, 0.5)] {
        let fwd = reg_inc_beta(a, b, x).unwrap();
        let rev = reg_inc_beta(b, a, 1.0 - x).unwrap();
        assert!((fwd + rev - 1.0).abs() <= 1.0e-10, "beta reflection at ({a},{b},{x})");
    }

    for x in [0.5, 1.0, 3.7, 12.0] {
        let lhs = log_gamma(x + 1.0).unwrap();
        let rhs = log_gamma(x).unwrap() + x.ln();
        assert!((lhs - rhs).abs() <= 1.0e-10, "recurrence at {x}");
    }
}

/// Two-sample Kolmogorov-Smirnov statistic for equal sample sizes.
fn ks_statistic(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let n = a.len();
    let mut i = 0;
    let mut j = 0;
    let mut d: f64 = 0.0;
    while i < n && j < n {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max(((i as f64 - j as f64) / n as f64).abs());
    }
    d
}

#[test]
fn forward_and_backward_marginals_agree() {
    // The backward process composes the same maps newest-inside; at any
    // fixed n its law equals the chain's. Compare both at n = 30 with a
    // two-sample KS test at the 1% level.
    let chain = ar1(0.9, 1.0).unwrap();
    let samples = 10_000;
    let n = 30;
    let mut fwd = Vec::with_capacity(samples);
    let mut bwd = Vec::with_capacity(samples);
    for rep in 0..samples as u64 {
        let mut s = UniformStream::new(2024, rep);
        fwd.push(simulate_forward(&chain, &[2.0], &mut s, n).unwrap().endpoint()[0]);
        let mut s = UniformStream::new(4048, rep);
        bwd.push(simulate_backward(&chain, &[2.0], &mut s, n).unwrap().endpoint()[0]);
    }
    let d = ks_statistic(fwd, bwd);
    // c(0.01) * sqrt((n+m)/(n m)) with n = m = 10^4.
    let critical = 1.628 * (2.0 / samples as f64).sqrt();
    assert!(d < critical, "KS statistic {d} >= critical value {critical}");
}
