//! Time grids, seeded Brownian increments, the initial enlargement variable
//! and the events used to probe conditional statements.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::rng;

/// Uniform time discretization `origin = t_0 < t_1 < ... < t_N = origin + T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    origin: f64,
    horizon: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        Self::with_origin(0.0, horizon, steps)
    }

    /// Grid over `[origin, origin + horizon]`; used by restarted sub-problems.
    pub fn with_origin(origin: f64, horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(LabError::invalid(format!("horizon must be positive, got {horizon}")));
        }
        if steps == 0 {
            return Err(LabError::invalid("grid needs at least one step"));
        }
        if !origin.is_finite() {
            return Err(LabError::invalid("grid origin must be finite"));
        }
        Ok(TimeGrid {
            origin,
            horizon,
            steps,
        })
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    /// Time of node `n`; the last node is pinned to `origin + horizon`.
    pub fn time(&self, n: usize) -> f64 {
        if n == self.steps {
            self.origin + self.horizon
        } else {
            self.origin + n as f64 * self.dt()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.steps).map(|n| self.time(n)).collect()
    }

    /// Node index of time `t`, if `t` sits on the grid.
    pub fn node_of(&self, t: f64) -> Option<usize> {
        let k = (t - self.origin) / self.dt();
        let r = k.round();
        if (k - r).abs() <= 1e-9 * k.abs().max(1.0) && r >= 0.0 && r as usize <= self.steps {
            Some(r as usize)
        } else {
            None
        }
    }
}

/// Seeded `d`-dimensional Brownian increments on `M` paths.
///
/// Increments are stored path-major: `ΔW[m][n][k]` lives at
/// `(m * N + n) * d + k`. Levels `W` are recomputed on demand by forward
/// summation so the accumulation order never depends on the caller.
#[derive(Debug, Clone)]
pub struct BrownianPaths {
    grid: TimeGrid,
    dim: usize,
    paths: usize,
    seed: u64,
    increments: Vec<f64>,
}

impl BrownianPaths {
    pub fn simulate(grid: TimeGrid, dim: usize, paths: usize, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(LabError::invalid("Brownian dimension must be at least 1"));
        }
        if paths == 0 {
            return Err(LabError::invalid("need at least one path"));
        }
        let n = grid.steps();
        let sd = grid.dt().sqrt();
        let mut increments = vec![0.0; paths * n * dim];
        increments
            .par_chunks_mut(n * dim)
            .enumerate()
            .for_each(|(m, row)| {
                let mut r = rng::keyed(seed, rng::BROWNIAN, m as u64);
                for x in row.iter_mut() {
                    let e: f64 = StandardNormal.sample(&mut r);
                    *x = sd * e;
                }
            });
        Ok(BrownianPaths {
            grid,
            dim,
            paths,
            seed,
            increments,
        })
    }

    /// Wraps externally supplied increments (row-major `[m][n][k]`).
    pub fn from_increments(grid: TimeGrid, dim: usize, paths: usize, increments: Vec<f64>) -> Result<Self> {
        if dim == 0 || paths == 0 {
            return Err(LabError::invalid("dimension and path count must be positive"));
        }
        if increments.len() != paths * grid.steps() * dim {
            return Err(LabError::invalid(format!(
                "expected {} increments, got {}",
                paths * grid.steps() * dim,
                increments.len()
            )));
        }
        if increments.iter().any(|x| !x.is_finite()) {
            return Err(LabError::invalid("increments must be finite"));
        }
        Ok(BrownianPaths {
            grid,
            dim,
            paths,
            seed: 0,
            increments,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn paths(&self) -> usize {
        self.paths
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// `ΔW[m][n]` as a `d`-vector.
    pub fn increment(&self, m: usize, n: usize) -> &[f64] {
        let d = self.dim;
        let start = (m * self.grid.steps() + n) * d;
        &self.increments[start..start + d]
    }

    /// Levels `W[m][n][k]` for `n = 0..=N`, laid out as `(m * (N+1) + n) * d + k`.
    pub fn levels(&self) -> Vec<f64> {
        let n = self.grid.steps();
        let d = self.dim;
        let mut out = vec![0.0; self.paths * (n + 1) * d];
        out.par_chunks_mut((n + 1) * d)
            .enumerate()
            .for_each(|(m, row)| {
                for step in 0..n {
                    let inc = self.increment(m, step);
                    for k in 0..d {
                        row[(step + 1) * d + k] = row[step * d + k] + inc[k];
                    }
                }
            });
        out
    }

    /// The first `n` steps of every path, on the grid ending at `t_n`.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        let steps = self.grid.steps();
        if n == 0 || n > steps {
            return Err(LabError::invalid(format!("cannot truncate {steps} steps to {n}")));
        }
        let grid = TimeGrid::with_origin(self.grid.origin(), n as f64 * self.grid.dt(), n)?;
        let d = self.dim;
        let mut increments = Vec::with_capacity(self.paths * n * d);
        for m in 0..self.paths {
            let at = m * steps * d;
            increments.extend_from_slice(&self.increments[at..at + n * d]);
        }
        Ok(BrownianPaths {
            grid,
            dim: d,
            paths: self.paths,
            seed: self.seed,
            increments,
        })
    }

    /// `W_T` on path `m`.
    pub fn terminal(&self, m: usize) -> Vec<f64> {
        let mut w = vec![0.0; self.dim];
        for n in 0..self.grid.steps() {
            for (k, x) in self.increment(m, n).iter().enumerate() {
                w[k] += x;
            }
        }
        w
    }
}

/// Independent `F_0`-measurable variable `U` with finite support.
#[derive(Debug, Clone, PartialEq)]
pub struct EnlargementVariable {
    atoms: Vec<f64>,
    probs: Vec<f64>,
    index: Vec<usize>,
}

impl EnlargementVariable {
    pub fn sample(atoms: &[f64], probs: &[f64], paths: usize, seed: u64) -> Result<Self> {
        if atoms.is_empty() {
            return Err(LabError::invalid("enlargement needs at least one atom"));
        }
        if atoms.len() != probs.len() {
            return Err(LabError::invalid("atoms and probabilities differ in length"));
        }
        if probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(LabError::invalid("probabilities must be non-negative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(LabError::invalid(format!("probabilities sum to {total}, not 1")));
        }
        if paths == 0 {
            return Err(LabError::invalid("need at least one path"));
        }
        let mut cdf = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for p in probs {
            acc += p;
            cdf.push(acc);
        }
        let index = (0..paths)
            .into_par_iter()
            .map(|m| {
                let u: f64 = rng::keyed(seed, rng::ENLARGEMENT, m as u64).random();
                cdf.iter().position(|c| u < *c).unwrap_or(atoms.len() - 1)
            })
            .collect();
        Ok(EnlargementVariable {
            atoms: atoms.to_vec(),
            probs: probs.to_vec(),
            index,
        })
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn paths(&self) -> usize {
        self.index.len()
    }

    pub fn atom_index(&self, m: usize) -> usize {
        self.index[m]
    }

    pub fn value(&self, m: usize) -> f64 {
        self.atoms[self.index[m]]
    }

    /// Empirical frequency of each atom.
    pub fn frequencies(&self) -> Vec<f64> {
        let mut counts = vec![0usize; self.atoms.len()];
        for &i in &self.index {
            counts[i] += 1;
        }
        counts
            .into_iter()
            .map(|c| c as f64 / self.index.len() as f64)
            .collect()
    }
}

/// When an event becomes known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Measurability {
    /// Known at time zero, i.e. `σ(U)`.
    Initial,
    /// Known from grid node `n` onwards.
    Node(usize),
}

impl Measurability {
    pub fn known_at(&self, n: usize) -> bool {
        match self {
            Measurability::Initial => true,
            Measurability::Node(k) => *k <= n,
        }
    }
}

/// Definition of an event in terms of the state path and `U`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EventSpec {
    /// `{ W^k_{t_n} > level }`
    Above { node: usize, component: usize, level: f64 },
    /// `{ lower < W^k_{t_n} <= upper }`
    Band {
        node: usize,
        component: usize,
        lower: f64,
        upper: f64,
    },
    /// `{ U = atoms[index] }`
    Atom { index: usize },
    /// Complement of another event.
    Not(Box<EventSpec>),
}

impl EventSpec {
    pub fn measurability(&self) -> Measurability {
        match self {
            EventSpec::Above { node, .. } | EventSpec::Band { node, .. } => Measurability::Node(*node),
            EventSpec::Atom { .. } => Measurability::Initial,
            EventSpec::Not(inner) => inner.measurability(),
        }
    }

    /// Evaluates the event from `W_{t_node}` and the atom index of `U`.
    pub fn holds(&self, w_at: impl Fn(usize) -> f64 + Copy, atom: Option<usize>) -> bool {
        match self {
            EventSpec::Above { node, level, .. } => w_at(*node) > *level,
            EventSpec::Band {
                node, lower, upper, ..
            } => {
                let w = w_at(*node);
                *lower < w && w <= *upper
            }
            EventSpec::Atom { index } => atom == Some(*index),
            EventSpec::Not(inner) => !inner.holds(w_at, atom),
        }
    }

    pub fn component(&self) -> usize {
        match self {
            EventSpec::Above { component, .. } | EventSpec::Band { component, .. } => *component,
            EventSpec::Atom { .. } => 0,
            EventSpec::Not(inner) => inner.component(),
        }
    }
}

/// An event materialized on a path set.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub spec: EventSpec,
    pub indicator: Vec<bool>,
}

impl Event {
    pub fn materialize(
        spec: EventSpec,
        brownian: &BrownianPaths,
        enlargement: Option<&EnlargementVariable>,
    ) -> Result<Self> {
        if let Measurability::Node(n) = spec.measurability() {
            if n > brownian.grid().steps() {
                return Err(LabError::invalid(format!("event node {n} lies beyond the grid")));
            }
        }
        if spec.component() >= brownian.dim() {
            return Err(LabError::invalid("event component exceeds Brownian dimension"));
        }
        if matches!(spec, EventSpec::Atom { .. }) && enlargement.is_none() {
            return Err(LabError::invalid("atom events need an enlargement variable"));
        }
        let levels = brownian.levels();
        let d = brownian.dim();
        let stride = (brownian.grid().steps() + 1) * d;
        let k = spec.component();
        let indicator = (0..brownian.paths())
            .map(|m| {
                let w_at = |n: usize| levels[m * stride + n * d + k];
                spec.holds(w_at, enlargement.map(|e| e.atom_index(m)))
            })
            .collect();
        Ok(Event { spec, indicator })
    }

    pub fn measurability(&self) -> Measurability {
        self.spec.measurability()
    }

    pub fn frequency(&self) -> f64 {
        self.indicator.iter().filter(|b| **b).count() as f64 / self.indicator.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_nodes() {
        let g = TimeGrid::new(1.0, 4).unwrap();
        assert_eq!(g.nodes(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g = TimeGrid::new(2.0, 1).unwrap();
        assert_eq!(g.nodes(), vec![0.0, 2.0]);
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(matches!(TimeGrid::new(1.0, 0), Err(LabError::InvalidArgument(_))));
        assert!(matches!(TimeGrid::new(0.0, 4), Err(LabError::InvalidArgument(_))));
        assert!(matches!(TimeGrid::new(-1.0, 4), Err(LabError::InvalidArgument(_))));
    }

    #[test]
    fn grid_spacing_and_alignment() {
        let g = TimeGrid::new(1.0, 80).unwrap();
        let nodes = g.nodes();
        for w in nodes.windows(2) {
            assert!(w[1] > w[0]);
            assert!((w[1] - w[0] - g.dt()).abs() < 1e-15);
        }
        assert_eq!(nodes[80] - nodes[0], 1.0);
        assert_eq!(g.node_of(0.025), Some(2));
        assert_eq!(g.node_of(0.5), Some(40));
        assert_eq!(g.node_of(0.02), None);
    }

    #[test]
    fn brownian_mean_within_clt_bound() {
        let g = TimeGrid::new(1.0, 64).unwrap();
        let bp = BrownianPaths::simulate(g, 1, 1 << 14, 7).unwrap();
        let m = bp.paths() as f64;
        let mean = (0..bp.paths()).map(|i| bp.terminal(i)[0]).sum::<f64>() / m;
        assert!(mean.abs() <= 3.0 * (1.0 / m).sqrt(), "mean {mean}");
        let var = (0..bp.paths()).map(|i| bp.terminal(i)[0].powi(2)).sum::<f64>() / m - mean * mean;
        assert!((var - 1.0).abs() < 0.05, "var {var}");
    }

    #[test]
    fn brownian_is_deterministic_and_seed_sensitive() {
        let g = TimeGrid::new(1.0, 64).unwrap();
        let a = BrownianPaths::simulate(g, 2, 256, 7).unwrap();
        let b = BrownianPaths::simulate(g, 2, 256, 7).unwrap();
        let c = BrownianPaths::simulate(g, 2, 256, 8).unwrap();
        assert_eq!(a.increments(), b.increments());
        assert_ne!(a.increments(), c.increments());
    }

    #[test]
    fn levels_start_at_zero_and_sum_increments() {
        let g = TimeGrid::new(1.0, 8).unwrap();
        let bp = BrownianPaths::simulate(g, 1, 16, 3).unwrap();
        let lv = bp.levels();
        for m in 0..16 {
            assert_eq!(lv[m * 9], 0.0);
            assert!((lv[m * 9 + 8] - bp.terminal(m)[0]).abs() < 1e-14);
        }
    }

    #[test]
    fn enlargement_frequencies() {
        let u = EnlargementVariable::sample(&[-1.0, 1.0], &[0.5, 0.5], 1 << 14, 7).unwrap();
        let f = u.frequencies()[1];
        assert!((f - 0.5).abs() <= 0.012, "freq {f}");

        let u = EnlargementVariable::sample(&[3.0], &[1.0], 100, 1).unwrap();
        assert!((0..100).all(|m| u.value(m) == 3.0));

        assert!(matches!(
            EnlargementVariable::sample(&[0.0, 1.0], &[0.6, 0.6], 10, 1),
            Err(LabError::InvalidArgument(_))
        ));
    }

    #[test]
    fn enlargement_independent_of_increments() {
        let m = 1 << 14;
        let g = TimeGrid::new(1.0, 16).unwrap();
        let bp = BrownianPaths::simulate(g, 1, m, 11).unwrap();
        let u = EnlargementVariable::sample(&[-1.0, 1.0], &[0.5, 0.5], m, 11).unwrap();
        let bound = 3.0 / (m as f64).sqrt();
        for n in [0, 7, 15] {
            let xs: Vec<f64> = (0..m).map(|i| bp.increment(i, n)[0]).collect();
            let us: Vec<f64> = (0..m).map(|i| u.value(i)).collect();
            let corr = crate::stats::correlation(&xs, &us);
            assert!(corr.abs() <= bound, "corr {corr} at step {n}");
        }
    }

    #[test]
    fn events_respect_definition() {
        let g = TimeGrid::new(1.0, 4).unwrap();
        let inc = vec![0.5, -0.2, 0.1, 0.0, -0.5, 0.3, 0.1, 0.0];
        let bp = BrownianPaths::from_increments(g, 1, 2, inc).unwrap();
        let e = Event::materialize(
            EventSpec::Above {
                node: 2,
                component: 0,
                level: 0.0,
            },
            &bp,
            None,
        )
        .unwrap();
        assert_eq!(e.indicator, vec![true, false]);
        assert_eq!(e.measurability(), Measurability::Node(2));
        assert!(Measurability::Node(2).known_at(3));
        assert!(!Measurability::Node(2).known_at(1));
    }
}
