//! Registry of concrete chains, each a [`ChainModel`].

use crate::error::Result;
use crate::ifs::ChainModel;
use crate::rng::DistributionSpec;

/// A registered chain with default initial values and provenance notes.
pub struct ChainRegistryEntry {
    pub chain: ChainModel,
    pub default_inits: (Vec<f64>, Vec<f64>),
    pub citation: &'static str,
    /// Whether the one-step unbiasedness theorem covers this chain
    /// (scalar θ with matching monotone regions).
    pub theorem_applicable: bool,
}

/// AR(1): x' = φx + Z, Z ~ N(0, σ).
pub fn ar1(phi: f64, sigma: f64) -> Result<ChainModel> {
    ChainModel::new(
        "ar1",
        1,
        vec![DistributionSpec::Normal { mean: 0.0, sd: sigma }],
        None,
        move |theta, x| vec![phi * x[0] + theta[0]],
    )
}

/// Random logistic map: x' = 4θx(1−x), θ ~ Beta(a+1/2, a−1/2).
///
/// Non-decreasing in θ for every x in [0, 1], so P(A) = 1 everywhere.
pub fn random_logistic(a: f64) -> Result<ChainModel> {
    ChainModel::new(
        "logistic",
        1,
        vec![DistributionSpec::Beta { a: a + 0.5, b: a - 0.5 }],
        Some(vec![(0.0, 1.0)]),
        |theta, x| vec![4.0 * theta[0] * x[0] * (1.0 - x[0])],
    )
}

/// Trigonometric chain: x' = sin[(1−|x|)cos θ], θ ~ Unif(−π/2, 3π/2).
///
/// For every x the map decreases exactly on θ ∈ (0, π) and increases on the
/// rest of the domain, so any two states share the same partition.
pub fn trig_chain() -> Result<ChainModel> {
    use std::f64::consts::PI;
    ChainModel::new(
        "trig",
        1,
        vec![DistributionSpec::Uniform { a: -PI / 2.0, b: 3.0 * PI / 2.0 }],
        Some(vec![(-1.0, 1.0)]),
        |theta, x| vec![((1.0 - x[0].abs()) * theta[0].cos()).sin()],
    )
}

/// Dirichlet process means: x' = (1−θ)Z + θx, θ ~ Beta(a, 1), Z ~ N(0, 1).
///
/// θ-vector is (θ, Z) ∈ ℝ², outside the scope of the scalar-θ theorem;
/// registered with `theorem_applicable = false`.
pub fn dirichlet_means(a: f64) -> Result<ChainModel> {
    ChainModel::new(
        "dirichlet",
        1,
        vec![
            DistributionSpec::Beta { a, b: 1.0 },
            DistributionSpec::standard_normal(),
        ],
        None,
        |theta, x| vec![(1.0 - theta[0]) * theta[1] + theta[0] * x[0]],
    )
}

/// Unnormalized Metropolis demo target on [0.5, 2].
pub fn metropolis_target(x: f64) -> f64 {
    if (0.5..=2.0).contains(&x) {
        (x.powi(3) * (x.powi(4)).sin() * (x.powi(5)).cos()).abs()
    } else {
        0.0
    }
}

/// Random-walk Metropolis on [`metropolis_target`], θ = (Z, U) with the
/// accept/reject uniform shared between coupled copies.
///
/// A known counterexample: the shared-uniform heuristic keeps CRN distances
/// bounded away from zero even though the marginal laws converge.
pub fn metropolis_demo(step: f64) -> Result<ChainModel> {
    ChainModel::new(
        "metropolis",
        1,
        vec![
            DistributionSpec::standard_normal(),
            DistributionSpec::Uniform { a: 0.0, b: 1.0 },
        ],
        Some(vec![(0.5, 2.0)]),
        move |theta, x| {
            let proposal = x[0] + step * theta[0];
            let g_old = metropolis_target(x[0]);
            let g_new = metropolis_target(proposal);
            // Ratio >= 1 accepts regardless of U; g_old == 0 only at
            // isolated target zeros, where any move is accepted.
            let accept = g_old == 0.0 || theta[1] * g_old < g_new;
            if accept {
                vec![proposal]
            } else {
                vec![x[0]]
            }
        },
    )
}

/// Monotonicity test target (not a chain): f(θ, x) = cos(πxθ) on θ ∈ (0, 2).
pub fn cos_family(theta: f64, x: f64) -> f64 {
    (std::f64::consts::PI * x * theta).cos()
}

/// θ-domain for [`cos_family`].
pub const COS_FAMILY_DOMAIN: (f64, f64) = (0.0, 2.0);

/// All registered chains with their default initial values.
pub fn registry() -> Vec<ChainRegistryEntry> {
    vec![
        ChainRegistryEntry {
            chain: ar1(0.9, 1.0).expect("valid"),
            default_inits: (vec![25.0], vec![-25.0]),
            citation: "autoregressive normal system, x' = 0.9x + Z",
            theorem_applicable: true,
        },
        ChainRegistryEntry {
            chain: random_logistic(1.0).expect("valid"),
            default_inits: (vec![0.99], vec![0.1]),
            citation: "random logistic map, theta ~ Beta(1.5, 0.5)",
            theorem_applicable: true,
        },
        ChainRegistryEntry {
            chain: trig_chain().expect("valid"),
            default_inits: (vec![0.75], vec![0.05]),
            citation: "trigonometric chain, theta ~ Unif(-pi/2, 3pi/2)",
            theorem_applicable: true,
        },
        ChainRegistryEntry {
            chain: dirichlet_means(1.5).expect("valid"),
            default_inits: (vec![10.0], vec![-10.0]),
            citation: "Dirichlet process means, theta ~ Beta(1.5, 1)",
            theorem_applicable: false,
        },
        ChainRegistryEntry {
            chain: metropolis_demo(0.1).expect("valid"),
            default_inits: (vec![0.6], vec![1.9]),
            citation: "random-walk Metropolis counterexample",
            theorem_applicable: false,
        },
    ]
}

/// Looks up a registered chain by name.
pub fn by_name(name: &str) -> Option<ChainRegistryEntry> {
    registry().into_iter().find(|e| e.chain.name == name)
}
