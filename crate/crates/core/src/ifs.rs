//! Iterated function system abstraction and simulation of forward, backward,
//! and coupled processes.

use crate::error::{Error, Result};
use crate::rng::{draw_theta, CouplingMode, DistributionSpec, UniformStream};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::sync::Arc;

type UpdateFn = dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync;

/// A Markov chain expressed as `x' = f(θ, x)` with θ drawn i.i.d. each
/// iteration, coordinate-wise from `theta_specs` in declared order.
///
/// The draw order is fixed: coupling correctness depends on the two chains
/// consuming the same uniforms for the same coordinates.
#[derive(Clone)]
pub struct ChainModel {
    pub name: String,
    pub state_dim: usize,
    pub theta_specs: Vec<DistributionSpec>,
    pub state_domain: Option<Vec<(f64, f64)>>,
    update: Arc<UpdateFn>,
}

impl ChainModel {
    pub fn new(
        name: impl Into<String>,
        state_dim: usize,
        theta_specs: Vec<DistributionSpec>,
        state_domain: Option<Vec<(f64, f64)>>,
        update: impl Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        for spec in &theta_specs {
            spec.validate()?;
        }
        Ok(Self {
            name: name.into(),
            state_dim,
            theta_specs,
            state_domain,
            update: Arc::new(update),
        })
    }

    /// Applies the (deterministic) update map once.
    pub fn step(&self, theta: &[f64], x: &[f64]) -> Vec<f64> {
        (self.update)(theta, x)
    }

    pub fn in_domain(&self, x: &[f64]) -> bool {
        match &self.state_domain {
            None => true,
            Some(boxes) => x
                .iter()
                .zip(boxes.iter())
                .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi),
        }
    }

    fn draw_single(&self, stream: &mut UniformStream) -> Result<Vec<f64>> {
        let mut theta = Vec::with_capacity(self.theta_specs.len());
        for spec in &self.theta_specs {
            theta.push(spec.inv_cdf(stream.next_uniform())?);
        }
        Ok(theta)
    }
}

impl std::fmt::Debug for ChainModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChainModel")
            .field("name", &self.name)
            .field("state_dim", &self.state_dim)
            .field("theta_specs", &self.theta_specs)
            .field("state_domain", &self.state_domain)
            .finish_non_exhaustive()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

/// A simulated path x₀…x_N.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub states: Vec<Vec<f64>>,
    pub direction: Direction,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn endpoint(&self) -> &[f64] {
        self.states.last().expect("trajectory has at least x0")
    }

    /// CSV export: columns iteration, coordinate index, value.
    pub fn write_csv(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "iteration,coordinate,value")?;
        for (n, state) in self.states.iter().enumerate() {
            for (c, v) in state.iter().enumerate() {
                writeln!(w, "{n},{c},{}", crate::format_float(*v))?;
            }
        }
        Ok(())
    }
}

fn check_finite(x: &[f64], iteration: usize) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite {
            iteration,
            replicate: None,
        })
    }
}

/// Forward process: x_n = f(θ_n, x_{n-1}), newest map applied outside.
pub fn simulate_forward(
    chain: &ChainModel,
    x0: &[f64],
    stream: &mut UniformStream,
    n_steps: usize,
) -> Result<Trajectory> {
    let mut states = Vec::with_capacity(n_steps + 1);
    states.push(x0.to_vec());
    let mut x = x0.to_vec();
    for n in 1..=n_steps {
        let theta = chain.draw_single(stream)?;
        x = chain.step(&theta, &x);
        check_finite(&x, n)?;
        states.push(x.clone());
    }
    Ok(Trajectory {
        states,
        direction: Direction::Forward,
    })
}

/// Backward process: x̃_n = f(θ₁, f(θ₂, … f(θ_n, x₀))), newest map applied
/// inside. Uses the same θ₁…θ_N as the forward run on the same stream, so
/// all θ draws are retained (O(N·dim) memory).
pub fn simulate_backward(
    chain: &ChainModel,
    x0: &[f64],
    stream: &mut UniformStream,
    n_steps: usize,
) -> Result<Trajectory> {
    let mut thetas = Vec::with_capacity(n_steps);
    for _ in 0..n_steps {
        thetas.push(chain.draw_single(stream)?);
    }
    let mut states = Vec::with_capacity(n_steps + 1);
    states.push(x0.to_vec());
    for m in 1..=n_steps {
        let mut x = x0.to_vec();
        // θ_m is innermost, θ_1 outermost.
        for theta in thetas[..m].iter().rev() {
            x = chain.step(theta, &x);
        }
        check_finite(&x, m)?;
        states.push(x);
    }
    Ok(Trajectory {
        states,
        direction: Direction::Backward,
    })
}

/// Paired trajectories under a declared coupling mode.
#[derive(Clone, Debug)]
pub struct CoupledRun {
    pub x_traj: Trajectory,
    pub y_traj: Trajectory,
    pub coupling: CouplingMode,
    /// Euclidean distance |x_n − y_n| per iteration, length N+1.
    pub distances: Vec<f64>,
}

pub fn euclidean_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.len() == 1 {
        (a[0] - b[0]).abs()
    } else {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }
}

/// Simulates two copies of the chain from `x0` and `y0`, both driven by
/// `draw_theta` under `mode`, recording per-iteration distances.
pub fn simulate_coupled(
    chain: &ChainModel,
    x0: &[f64],
    y0: &[f64],
    stream: &mut UniformStream,
    partner: &mut UniformStream,
    n_steps: usize,
    mode: CouplingMode,
) -> Result<CoupledRun> {
    let mut x_states = Vec::with_capacity(n_steps + 1);
    let mut y_states = Vec::with_capacity(n_steps + 1);
    let mut distances = Vec::with_capacity(n_steps + 1);
    let mut x = x0.to_vec();
    let mut y = y0.to_vec();
    x_states.push(x.clone());
    y_states.push(y.clone());
    distances.push(euclidean_distance(&x, &y));
    for n in 1..=n_steps {
        let (theta, theta_prime) = draw_theta(&chain.theta_specs, stream, mode, partner)?;
        x = chain.step(&theta, &x);
        y = chain.step(&theta_prime, &y);
        check_finite(&x, n)?;
        check_finite(&y, n)?;
        x_states.push(x.clone());
        y_states.push(y.clone());
        distances.push(euclidean_distance(&x, &y));
    }
    Ok(CoupledRun {
        x_traj: Trajectory {
            states: x_states,
            direction: Direction::Forward,
        },
        y_traj: Trajectory {
            states: y_states,
            direction: Direction::Forward,
        },
        coupling: mode,
        distances,
    })
}
