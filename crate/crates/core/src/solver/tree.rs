//! Recombining binomial lattice with `ΔW = ±√Δt`: conditional expectations
//! are exact two-point averages, so this serves as a regression-free oracle.

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::generator::{DriverContext, Generator};
use crate::scenario::PathView;
use crate::stochastic::TimeGrid;
use crate::terminal::{Source, TerminalCondition};

/// Largest lattice depth accepted.
pub const MAX_TREE_STEPS: usize = 24;

const FIXED_POINT_TOL: f64 = 1e-15;
const FIXED_POINT_MAX: usize = 500;

/// `y[n][i]`, `z[n][i]` at the lattice node with `W = (2i − n)·√Δt`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeSolution {
    pub grid: TimeGrid,
    pub y: Vec<Vec<f64>>,
    pub z: Vec<Vec<f64>>,
}

impl TreeSolution {
    pub fn y0(&self) -> f64 {
        self.y[0][0]
    }

    /// `W` at lattice node `(n, i)`.
    pub fn level(&self, n: usize, i: usize) -> f64 {
        (2.0 * i as f64 - n as f64) * self.grid.dt().sqrt()
    }
}

/// Dynamic programming on the lattice for a terminal that is a function of
/// `W_T` only.
pub fn solve_tree(g: &Generator, xi: &TerminalCondition, horizon: f64, steps: usize) -> Result<TreeSolution> {
    if steps > MAX_TREE_STEPS {
        return Err(LabError::invalid(format!("lattice depth {steps} exceeds {MAX_TREE_STEPS}")));
    }
    let grid = TimeGrid::new(horizon, steps)?;
    if g.dim() != 1 {
        return Err(LabError::invalid("the lattice oracle is one-dimensional"));
    }
    let dt = grid.dt();
    if g.lipschitz() * dt >= 1.0 {
        return Err(LabError::invalid(format!(
            "fixed point does not contract: K·Δt = {} ≥ 1",
            g.lipschitz() * dt
        )));
    }
    if xi.source() == Source::Forward || xi.needs_atom() || !xi.observed_nodes(&grid)?.is_empty() || !xi.partitions().is_empty() {
        return Err(LabError::invalid("the lattice oracle needs a terminal depending on W_T only"));
    }
    let sdt = dt.sqrt();
    let mut levels = vec![0.0; steps + 1];
    let mut terminal = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        levels[steps] = (2.0 * i as f64 - steps as f64) * sdt;
        terminal.push(xi.eval(&PathView::from_levels(grid, &levels, 1, None)));
    }
    let mut y = vec![Vec::new(); steps + 1];
    let mut z = vec![Vec::new(); steps + 1];
    y[steps] = terminal;
    for n in (0..steps).rev() {
        let t = grid.time(n);
        let mut yn = Vec::with_capacity(n + 1);
        let mut zn = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let (up, down) = (y[n + 1][i + 1], y[n + 1][i]);
            let ce = 0.5 * (up + down);
            let zv = [(up - down) / (2.0 * sdt)];
            let w = [(2.0 * i as f64 - n as f64) * sdt];
            let ctx = DriverContext { w: &w, atom: None };
            let mut v = ce;
            let mut converged = false;
            for _ in 0..FIXED_POINT_MAX {
                let next = ce + dt * g.eval_ctx(t, v, &zv, &ctx);
                let done = (next - v).abs() <= FIXED_POINT_TOL * (1.0 + next.abs());
                v = next;
                if done {
                    converged = true;
                    break;
                }
            }
            if !converged || !v.is_finite() {
                return Err(LabError::numerical("lattice fixed point", n, None));
            }
            yn.push(v);
            zn.push(zv[0]);
        }
        y[n] = yn;
        z[n] = zn;
    }
    Ok(TreeSolution { grid, y, z })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::builtin;

    #[test]
    fn martingale_mean() {
        let t = solve_tree(&builtin("zero").unwrap(), &TerminalCondition::brownian_affine(0.0, 1.0), 1.0, 16).unwrap();
        assert_eq!(t.y0(), 0.0);
        assert!(t.z[3].iter().all(|z| (z - 1.0).abs() < 1e-12));
    }

    #[test]
    fn depth_guard() {
        let r = solve_tree(&builtin("zero").unwrap(), &TerminalCondition::brownian_affine(0.0, 1.0), 1.0, 25);
        assert!(matches!(r, Err(LabError::InvalidArgument(_))));
    }
}
