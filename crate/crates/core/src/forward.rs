//! Forward diffusion `dΓ = b(t,Γ)dt + σ(t,Γ)dW` started from `(t, x)`, plus a
//! probabilistic audit of the Lipschitz, linear-growth and right-continuity
//! conditions on its coefficients.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::rng;
use crate::stochastic::{BrownianPaths, TimeGrid};

type VectorField = dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync;

/// Coefficients `(b, σ)` with their declared Lipschitz (`L1`) and growth (`L2`)
/// constants. `σ` is written row-major as an `m × d` matrix.
#[derive(Clone)]
pub struct ForwardModel {
    label: String,
    state_dim: usize,
    noise_dim: usize,
    drift: Arc<VectorField>,
    diffusion: Arc<VectorField>,
    lipschitz: f64,
    growth: f64,
}

impl fmt::Debug for ForwardModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ForwardModel")
            .field("label", &self.label)
            .field("state_dim", &self.state_dim)
            .field("noise_dim", &self.noise_dim)
            .field("lipschitz", &self.lipschitz)
            .field("growth", &self.growth)
            .finish()
    }
}

impl ForwardModel {
    pub fn new(
        label: impl Into<String>,
        state_dim: usize,
        noise_dim: usize,
        drift: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
        diffusion: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
        lipschitz: f64,
        growth: f64,
    ) -> Result<Self> {
        if state_dim == 0 || noise_dim == 0 {
            return Err(LabError::invalid("forward model dimensions must be positive"));
        }
        if !(lipschitz >= 0.0) || !(growth >= 0.0) {
            return Err(LabError::invalid("declared constants must be non-negative"));
        }
        Ok(ForwardModel {
            label: label.into(),
            state_dim,
            noise_dim,
            drift: Arc::new(drift),
            diffusion: Arc::new(diffusion),
            lipschitz,
            growth,
        })
    }

    /// One-dimensional model driven by one Brownian motion.
    pub fn scalar(
        label: impl Into<String>,
        drift: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        diffusion: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        lipschitz: f64,
        growth: f64,
    ) -> Result<Self> {
        Self::new(
            label,
            1,
            1,
            move |t, x, out| out[0] = drift(t, x[0]),
            move |t, x, out| out[0] = diffusion(t, x[0]),
            lipschitz,
            growth,
        )
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn noise_dim(&self) -> usize {
        self.noise_dim
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn growth(&self) -> f64 {
        self.growth
    }

    pub fn drift(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.state_dim];
        (self.drift)(t, x, &mut out);
        out
    }

    pub fn diffusion(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.state_dim * self.noise_dim];
        (self.diffusion)(t, x, &mut out);
        out
    }

    /// `σ*(t,x) p`, a `d`-vector.
    pub fn diffusion_transpose_times(&self, t: f64, x: &[f64], p: &[f64]) -> Vec<f64> {
        let s = self.diffusion(t, x);
        let d = self.noise_dim;
        (0..d)
            .map(|k| (0..self.state_dim).map(|i| s[i * d + k] * p[i]).sum())
            .collect()
    }
}

/// Built-in forward models addressable from configuration files.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ForwardSpec {
    /// `b = 0`, `σ = 1`: the state is a shifted Brownian motion.
    Brownian,
    /// `b = a·x + b0`, `σ = c`.
    Linear { a: f64, b0: f64, c: f64 },
    /// `b = sin(x)`, `σ = 1`.
    Sine,
}

impl ForwardSpec {
    pub fn build(&self) -> ForwardModel {
        match *self {
            ForwardSpec::Brownian => {
                ForwardModel::scalar("brownian", |_, _| 0.0, |_, _| 1.0, 0.0, 1.0).expect("valid constants")
            }
            ForwardSpec::Linear { a, b0, c } => ForwardModel::scalar(
                format!("linear({a},{b0},{c})"),
                move |_, x| a * x + b0,
                move |_, _| c,
                a.abs(),
                a.abs().max(b0.abs() + c.abs()),
            )
            .expect("valid constants"),
            ForwardSpec::Sine => {
                ForwardModel::scalar("sine", |_, x| x.sin(), |_, _| 1.0, 1.0, 1.0).expect("valid constants")
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            ForwardSpec::Brownian => "brownian".into(),
            ForwardSpec::Linear { a, b0, c } => format!("linear({a},{b0},{c})"),
            ForwardSpec::Sine => "sine".into(),
        }
    }
}

/// Simulated states `Γ[m][n]`, constant and equal to `x` up to the start node.
#[derive(Debug, Clone)]
pub struct ForwardPaths {
    grid: TimeGrid,
    state_dim: usize,
    paths: usize,
    start_node: usize,
    start_point: Vec<f64>,
    states: Vec<f64>,
}

impl ForwardPaths {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn paths(&self) -> usize {
        self.paths
    }

    pub fn start(&self) -> (usize, &[f64]) {
        (self.start_node, &self.start_point)
    }

    /// Flat states laid out as `(m * (N+1) + n) * q + i`.
    pub fn states(&self) -> &[f64] {
        &self.states
    }

    pub fn state(&self, m: usize, n: usize) -> &[f64] {
        let q = self.state_dim;
        let at = (m * (self.grid.steps() + 1) + n) * q;
        &self.states[at..at + q]
    }

    /// States up to node `n`, on `grid` (which must end at `t_n`).
    pub(crate) fn truncated(&self, n: usize, grid: TimeGrid) -> Self {
        let q = self.state_dim;
        let row = (self.grid.steps() + 1) * q;
        let mut states = Vec::with_capacity(self.paths * (n + 1) * q);
        for m in 0..self.paths {
            states.extend_from_slice(&self.states[m * row..m * row + (n + 1) * q]);
        }
        ForwardPaths {
            grid,
            state_dim: q,
            paths: self.paths,
            start_node: self.start_node.min(n),
            start_point: self.start_point.clone(),
            states,
        }
    }
}

/// Explicit Euler–Maruyama from `(start_node, x)` along the given increments.
pub fn euler_maruyama(
    model: &ForwardModel,
    brownian: &BrownianPaths,
    start_node: usize,
    x: &[f64],
) -> Result<ForwardPaths> {
    let grid = *brownian.grid();
    let n_steps = grid.steps();
    if start_node > n_steps {
        return Err(LabError::invalid(format!("start node {start_node} lies beyond the grid")));
    }
    if x.len() != model.state_dim() {
        return Err(LabError::invalid("start point dimension does not match the model"));
    }
    if brownian.dim() != model.noise_dim() {
        return Err(LabError::invalid("model noise dimension does not match the Brownian paths"));
    }
    let q = model.state_dim();
    let d = model.noise_dim();
    let dt = grid.dt();
    let row = (n_steps + 1) * q;
    let mut states = vec![0.0; brownian.paths() * row];
    let failures: Vec<Option<usize>> = states
        .par_chunks_mut(row)
        .enumerate()
        .map(|(m, out)| {
            for n in 0..=start_node {
                out[n * q..(n + 1) * q].copy_from_slice(x);
            }
            let mut b = vec![0.0; q];
            let mut s = vec![0.0; q * d];
            for n in start_node..n_steps {
                let t = grid.time(n);
                let (head, tail) = out.split_at_mut((n + 1) * q);
                let cur = &head[n * q..];
                (model.drift)(t, cur, &mut b);
                (model.diffusion)(t, cur, &mut s);
                let dw = brownian.increment(m, n);
                let next = &mut tail[..q];
                for i in 0..q {
                    let mut noise = 0.0;
                    for k in 0..d {
                        noise += s[i * d + k] * dw[k];
                    }
                    next[i] = cur[i] + b[i] * dt + noise;
                    if !next[i].is_finite() {
                        return Some(n + 1);
                    }
                }
            }
            None
        })
        .collect();
    if let Some((m, node)) = failures
        .iter()
        .enumerate()
        .find_map(|(m, f)| f.map(|node| (m, node)))
    {
        return Err(LabError::numerical("euler_maruyama", node, Some(m)));
    }
    Ok(ForwardPaths {
        grid,
        state_dim: q,
        paths: brownian.paths(),
        start_node,
        start_point: x.to_vec(),
        states,
    })
}

/// Probe region for the coefficient audit.
#[derive(Debug, Clone, PartialEq)]
pub struct StateBox {
    pub t_max: f64,
    pub x_max: f64,
    /// Extra times at which right-continuity is probed.
    pub probe_times: Vec<f64>,
}

impl Default for StateBox {
    fn default() -> Self {
        StateBox {
            t_max: 1.0,
            x_max: 5.0,
            probe_times: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForwardAssumptionReport {
    pub lipschitz_ratio: f64,
    /// `(t, x, x')` attaining the largest Lipschitz ratio.
    pub lipschitz_witness: (f64, Vec<f64>, Vec<f64>),
    pub lipschitz_pass: bool,
    pub growth_ratio: f64,
    pub growth_pass: bool,
    pub right_gap: f64,
    pub right_continuity_pass: bool,
    /// `(t, gap)` pairs where the coefficients jump from the left.
    pub left_discontinuities: Vec<(f64, f64)>,
    pub pass: bool,
}

const CONTINUITY_STEP: f64 = 1e-9;
const CONTINUITY_TOL: f64 = 1e-6;

fn coefficient_distance(model: &ForwardModel, t: f64, x: &[f64], t2: f64, x2: &[f64]) -> f64 {
    let db: f64 = model
        .drift(t, x)
        .iter()
        .zip(model.drift(t2, x2))
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let ds: f64 = model
        .diffusion(t, x)
        .iter()
        .zip(model.diffusion(t2, x2))
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    db + ds
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Spot-checks the Lipschitz, growth and right-continuity conditions on
/// `probes` random points of `region`. Half of the Lipschitz pairs are far
/// apart, half are local perturbations.
pub fn check_h_assumptions(model: &ForwardModel, region: &StateBox, probes: usize, seed: u64) -> Result<ForwardAssumptionReport> {
    if probes == 0 {
        return Err(LabError::invalid("need at least one probe"));
    }
    let q = model.state_dim();
    let mut r = rng::keyed(seed, rng::PROBES, 0);
    let point = |r: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
        (0..q).map(|_| r.random_range(-region.x_max..=region.x_max)).collect()
    };

    let mut lipschitz_ratio: f64 = 0.0;
    let mut witness = (0.0, vec![0.0; q], vec![0.0; q]);
    let mut growth_ratio: f64 = 0.0;
    let local = 1e-3 * region.x_max.max(1e-6);
    for i in 0..probes {
        let t = r.random_range(0.0..region.t_max);
        let x = point(&mut r);
        let x2: Vec<f64> = if i % 2 == 0 {
            point(&mut r)
        } else {
            x.iter().map(|v| v + local * r.random_range(-1.0..1.0)).collect()
        };
        let dx: Vec<f64> = x.iter().zip(&x2).map(|(a, b)| a - b).collect();
        let dist = norm(&dx);
        if dist > 0.0 {
            let ratio = coefficient_distance(model, t, &x, t, &x2) / dist;
            if ratio > lipschitz_ratio {
                lipschitz_ratio = ratio;
                witness = (t, x.clone(), x2.clone());
            }
        }
        let size = norm(&model.drift(t, &x)) + norm(&model.diffusion(t, &x));
        growth_ratio = growth_ratio.max(size / (1.0 + norm(&x)));
    }

    let mut times: Vec<f64> = region.probe_times.clone();
    for _ in 0..probes.min(256) {
        times.push(r.random_range(0.0..region.t_max));
    }
    let mut right_gap: f64 = 0.0;
    let mut left_discontinuities = Vec::new();
    for &t in &times {
        let x = point(&mut r);
        let h = CONTINUITY_STEP * region.t_max.max(1.0);
        let scale = 1.0 + norm(&model.drift(t, &x)) + norm(&model.diffusion(t, &x));
        let gap = coefficient_distance(model, t + h, &x, t, &x) / scale;
        right_gap = right_gap.max(gap);
        if t - h >= 0.0 {
            let left = coefficient_distance(model, t - h, &x, t, &x);
            if left / scale > CONTINUITY_TOL {
                left_discontinuities.push((t, left));
            }
        }
    }

    let slack = 1.0 + 1e-9;
    let lipschitz_pass = lipschitz_ratio <= model.lipschitz() * slack + 1e-12;
    let growth_pass = growth_ratio <= model.growth() * slack + 1e-12;
    let right_continuity_pass = right_gap <= CONTINUITY_TOL;
    Ok(ForwardAssumptionReport {
        lipschitz_ratio,
        lipschitz_witness: witness,
        lipschitz_pass,
        growth_ratio,
        growth_pass,
        right_gap,
        right_continuity_pass,
        left_discontinuities,
        pass: lipschitz_pass && growth_pass && right_continuity_pass,
    })
}
