//! The simulated world a solver runs on: Brownian paths, an optional forward
//! state driven by them, and an optional enlargement variable.

use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::forward::ForwardPaths;
use crate::stochastic::{BrownianPaths, EnlargementVariable, TimeGrid};

#[derive(Debug, Clone)]
pub struct Scenario {
    brownian: Arc<BrownianPaths>,
    levels: Arc<Vec<f64>>,
    forward: Option<Arc<ForwardPaths>>,
    enlargement: Option<Arc<EnlargementVariable>>,
}

impl Scenario {
    pub fn brownian(brownian: BrownianPaths) -> Self {
        let levels = brownian.levels();
        Scenario {
            brownian: Arc::new(brownian),
            levels: Arc::new(levels),
            forward: None,
            enlargement: None,
        }
    }

    pub fn with_forward(mut self, forward: ForwardPaths) -> Result<Self> {
        if forward.paths() != self.brownian.paths() || forward.grid() != self.brownian.grid() {
            return Err(LabError::invalid("forward paths do not match the Brownian paths"));
        }
        self.forward = Some(Arc::new(forward));
        Ok(self)
    }

    pub fn with_enlargement(mut self, enlargement: EnlargementVariable) -> Result<Self> {
        if enlargement.paths() != self.brownian.paths() {
            return Err(LabError::invalid("enlargement sample size does not match the path count"));
        }
        self.enlargement = Some(Arc::new(enlargement));
        Ok(self)
    }

    /// The same paths observed only up to node `n`.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        let brownian = self.brownian.truncated(n)?;
        let grid = *brownian.grid();
        Ok(Scenario {
            levels: Arc::new(brownian.levels()),
            brownian: Arc::new(brownian),
            forward: self.forward.as_ref().map(|f| Arc::new(f.truncated(n, grid))),
            enlargement: self.enlargement.clone(),
        })
    }

    /// Independent Brownian paths (and `U` draws) with the same origin and
    /// step, over the first `steps` steps.
    pub fn fresh(&self, steps: usize, paths: usize, seed: u64) -> Result<Self> {
        if self.forward.is_some() {
            return Err(LabError::invalid("fresh paths cannot regenerate a forward state"));
        }
        let grid = self.grid();
        let fresh_grid = TimeGrid::with_origin(grid.origin(), steps as f64 * grid.dt(), steps)?;
        let mut out = Scenario::brownian(BrownianPaths::simulate(fresh_grid, self.dim(), paths, seed)?);
        if let Some(e) = &self.enlargement {
            out = out.with_enlargement(EnlargementVariable::sample(e.atoms(), e.probs(), paths, seed)?)?;
        }
        Ok(out)
    }

    pub fn grid(&self) -> &TimeGrid {
        self.brownian.grid()
    }

    pub fn paths(&self) -> usize {
        self.brownian.paths()
    }

    pub fn dim(&self) -> usize {
        self.brownian.dim()
    }

    pub fn brownian_paths(&self) -> &BrownianPaths {
        &self.brownian
    }

    pub fn forward_paths(&self) -> Option<&ForwardPaths> {
        self.forward.as_deref()
    }

    pub fn enlargement(&self) -> Option<&EnlargementVariable> {
        self.enlargement.as_deref()
    }

    /// Number of atoms of `U` (one when there is no enlargement).
    pub fn atoms(&self) -> usize {
        self.enlargement.as_ref().map_or(1, |e| e.atoms().len())
    }

    pub fn atom_index(&self, m: usize) -> Option<usize> {
        self.enlargement.as_ref().map(|e| e.atom_index(m))
    }

    /// `W[m][n]` as a `d`-vector.
    pub fn w(&self, m: usize, n: usize) -> &[f64] {
        let d = self.dim();
        let at = (m * (self.grid().steps() + 1) + n) * d;
        &self.levels[at..at + d]
    }

    pub fn view(&self, m: usize) -> PathView<'_> {
        let d = self.dim();
        let row = (self.grid().steps() + 1) * d;
        let forward = self.forward.as_ref().map(|f| {
            let q = f.state_dim();
            let row = (self.grid().steps() + 1) * q;
            (&f.states()[m * row..(m + 1) * row], q)
        });
        PathView {
            grid: *self.grid(),
            w: &self.levels[m * row..(m + 1) * row],
            d,
            forward,
            atom: self
                .enlargement
                .as_ref()
                .map(|e| (e.atom_index(m), e.value(m))),
        }
    }
}

/// Everything a terminal functional or partition may read on one path.
#[derive(Debug, Clone, Copy)]
pub struct PathView<'a> {
    grid: TimeGrid,
    w: &'a [f64],
    d: usize,
    forward: Option<(&'a [f64], usize)>,
    atom: Option<(usize, f64)>,
}

impl<'a> PathView<'a> {
    /// View over explicit Brownian levels `(N+1)·d`, used by lattice solvers.
    pub fn from_levels(grid: TimeGrid, w: &'a [f64], d: usize, atom: Option<(usize, f64)>) -> Self {
        PathView {
            grid,
            w,
            d,
            forward: None,
            atom,
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    fn node(&self, t: f64) -> usize {
        self.grid
            .node_of(t)
            .unwrap_or_else(|| panic!("time {t} is not a node of the grid"))
    }

    /// `W` at node `n`.
    pub fn w_node(&self, n: usize) -> &'a [f64] {
        &self.w[n * self.d..(n + 1) * self.d]
    }

    /// `W` at grid time `t`.
    pub fn w_at(&self, t: f64) -> &'a [f64] {
        self.w_node(self.node(t))
    }

    pub fn w_terminal(&self) -> &'a [f64] {
        self.w_node(self.grid.steps())
    }

    /// Forward state at node `n`, if a forward model is attached.
    pub fn x_node(&self, n: usize) -> Option<&'a [f64]> {
        self.forward.map(|(f, q)| &f[n * q..(n + 1) * q])
    }

    pub fn x_terminal(&self) -> Option<&'a [f64]> {
        self.x_node(self.grid.steps())
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn forward_dim(&self) -> Option<usize> {
        self.forward.map(|f| f.1)
    }

    pub fn atom(&self) -> Option<usize> {
        self.atom.map(|a| a.0)
    }

    pub fn atom_value(&self) -> Option<f64> {
        self.atom.map(|a| a.1)
    }
}
