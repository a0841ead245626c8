//! Backward solvers for `dY = −g(t,Y,Z)dt + Z dW`, `Y_T = ξ`.

mod closed_form;
mod duality;
mod lsmc;
mod tree;

use std::sync::Arc;

use serde::Serialize;

pub use closed_form::{closed_form_linear, closed_form_value};
pub use duality::{
    apriori_estimate_audit, transposition_residual, AprioriReport, DualTestProcess, TranspositionReport,
    TranspositionRow,
};
pub use lsmc::{solve_lsmc, Estimator, LsmcConfig};
pub use tree::{solve_tree, TreeSolution, MAX_TREE_STEPS};

use crate::error::{LabError, Result};
use crate::generator::{DriverContext, Generator};
use crate::regression::{PolynomialBasis, Standardizer};
use crate::scenario::{PathView, Scenario};
use crate::stats;
use crate::stochastic::TimeGrid;
use crate::terminal::{Partition, Source, TerminalCondition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolverTag {
    Lsmc,
    Tree,
    ClosedForm,
}

impl std::fmt::Display for SolverTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolverTag::Lsmc => "lsmc",
            SolverTag::Tree => "tree",
            SolverTag::ClosedForm => "closed-form",
        })
    }
}

/// Regression bookkeeping for one backward step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeDiagnostics {
    pub node: usize,
    pub basis_size: usize,
    pub design_size: usize,
    pub strata: usize,
    /// Strata whose target was constant and bypassed the regression.
    pub constant_strata: usize,
    pub condition: f64,
    /// Sup-norm change of `Y` in each Picard sweep.
    pub picard_sweeps: Vec<f64>,
}

/// `Y_0` restricted to one atom of the enlargement variable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomValue {
    pub atom: usize,
    pub value: Option<f64>,
    pub paths: usize,
    pub y0: f64,
    pub se: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct StratumFit {
    pub a: Vec<f64>,
    /// `Z_k = Σ_j zc[j·d + k]·φ_j`
    pub zc: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct NodeFit {
    pub standardizer: Standardizer,
    pub basis: PolynomialBasis,
    pub strata: Vec<Option<StratumFit>>,
}

/// Everything needed to re-evaluate `(Y_n, Z_n)` on paths other than the
/// ones the regressions were fitted on.
#[derive(Debug, Clone)]
pub(crate) struct FittedModel {
    pub generator: Generator,
    pub picard_iters: usize,
    pub source: Source,
    pub observed: Vec<usize>,
    pub partitions: Vec<(usize, Partition)>,
    pub atoms: usize,
    pub grid: TimeGrid,
    pub dim: usize,
    pub nodes: Vec<NodeFit>,
}

pub(crate) struct PointValue {
    pub y: f64,
    pub z: Vec<f64>,
    pub sweeps: Vec<f64>,
}

impl FittedModel {
    pub fn raw_state(&self, n: usize, view: &PathView, out: &mut Vec<f64>) {
        out.clear();
        let read = |k: usize| match self.source {
            Source::Forward => view.x_node(k).expect("forward state missing"),
            _ => view.w_node(k),
        };
        out.extend_from_slice(read(n));
        for &k in &self.observed {
            if k < n {
                out.extend_from_slice(read(k));
            }
        }
    }

    pub fn stratum(&self, n: usize, view: &PathView) -> usize {
        let mut bits = 0;
        for (i, (node, p)) in self.partitions.iter().enumerate() {
            if *node <= n && p.holds(view) {
                bits |= 1 << i;
            }
        }
        view.atom().unwrap_or(0) + self.atoms * bits
    }

    pub fn stratum_count(&self) -> usize {
        self.atoms << self.partitions.len()
    }

    /// Features of path `view` at node `n`.
    pub fn features(&self, fit: &NodeFit, n: usize, view: &PathView, raw: &mut Vec<f64>, s: &mut Vec<f64>, phi: &mut [f64]) {
        self.raw_state(n, view, raw);
        s.resize(fit.standardizer.dim(), 0.0);
        fit.standardizer.apply(raw, s);
        fit.basis.eval(s, phi);
    }

    /// `(Y_n, Z_n)` on one path from the stored projections.
    pub fn value(&self, n: usize, view: &PathView) -> Result<PointValue> {
        let fit = &self.nodes[n];
        let mut raw = Vec::new();
        let mut s = Vec::new();
        let mut phi = vec![0.0; fit.basis.size()];
        self.features(fit, n, view, &mut raw, &mut s, &mut phi);
        let stratum = self.stratum(n, view);
        let coef = fit
            .strata
            .get(stratum)
            .and_then(|c| c.as_ref())
            .ok_or_else(|| LabError::numerical("evaluation on a stratum absent from the fit", n, None))?;
        Ok(self.step(n, view, &phi, coef))
    }

    pub fn step(&self, n: usize, view: &PathView, phi: &[f64], coef: &StratumFit) -> PointValue {
        let d = self.dim;
        let mut ce = 0.0;
        for (a, f) in coef.a.iter().zip(phi) {
            ce += a * f;
        }
        let mut z = vec![0.0; d];
        for (j, f) in phi.iter().enumerate() {
            for k in 0..d {
                z[k] += coef.zc[j * d + k] * f;
            }
        }
        let t = self.grid.time(n);
        let dt = self.grid.dt();
        let ctx = DriverContext {
            w: view.w_node(n),
            atom: view.atom(),
        };
        let mut y = ce;
        let mut sweeps = Vec::with_capacity(self.picard_iters);
        for _ in 0..self.picard_iters {
            let next = ce + dt * self.generator.eval_ctx(t, y, &z, &ctx);
            sweeps.push((next - y).abs());
            y = next;
        }
        PointValue { y, z, sweeps }
    }
}

/// Path-indexed `(Y, Z)` with provenance.
#[derive(Debug, Clone)]
pub struct BsdeSolution {
    tag: SolverTag,
    scenario: Scenario,
    generator: Generator,
    terminal_label: String,
    y: Vec<f64>,
    z: Vec<f64>,
    pathwise: Vec<f64>,
    diagnostics: Vec<NodeDiagnostics>,
    model: Option<Arc<FittedModel>>,
}

impl BsdeSolution {
    pub fn tag(&self) -> SolverTag {
        self.tag
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn terminal_label(&self) -> &str {
        &self.terminal_label
    }

    pub fn grid(&self) -> &TimeGrid {
        self.scenario.grid()
    }

    pub fn paths(&self) -> usize {
        self.scenario.paths()
    }

    pub fn dim(&self) -> usize {
        self.scenario.dim()
    }

    pub fn seed(&self) -> u64 {
        self.scenario.brownian_paths().seed()
    }

    pub fn diagnostics(&self) -> &[NodeDiagnostics] {
        &self.diagnostics
    }

    pub fn y(&self, m: usize, n: usize) -> f64 {
        self.y[m * (self.grid().steps() + 1) + n]
    }

    pub fn z(&self, m: usize, n: usize) -> &[f64] {
        let d = self.dim();
        let at = (m * (self.grid().steps() + 1) + n) * d;
        &self.z[at..at + d]
    }

    /// `Y[·][n]` across paths.
    pub fn y_node(&self, n: usize) -> Vec<f64> {
        (0..self.paths()).map(|m| self.y(m, n)).collect()
    }

    /// First component of `Z[·][n]` across paths.
    pub fn z_node(&self, n: usize) -> Vec<f64> {
        (0..self.paths()).map(|m| self.z(m, n)[0]).collect()
    }

    /// `Y_0`: the common value when `Y[·][0]` is constant, else its mean.
    pub fn y0(&self) -> f64 {
        let ys = self.y_node(0);
        if ys.iter().all(|v| v.to_bits() == ys[0].to_bits()) {
            ys[0]
        } else {
            stats::mean(&ys)
        }
    }

    /// `ξ + Σ g Δt − Σ Z·ΔW` per path; its mean estimates `Y_0` and its
    /// spread measures the accumulated regression noise.
    pub fn pathwise_y0(&self) -> &[f64] {
        &self.pathwise
    }

    /// Standard error of `Y_0` from the pathwise representation.
    pub fn y0_se(&self) -> f64 {
        stats::std_error(&self.pathwise)
    }

    /// `Y_0` per atom of `U` (a single entry without enlargement).
    pub fn y0_by_atom(&self) -> Vec<AtomValue> {
        let atoms = self.scenario.atoms();
        let mut out = Vec::with_capacity(atoms);
        for a in 0..atoms {
            let idx: Vec<usize> = (0..self.paths())
                .filter(|&m| self.scenario.atom_index(m).unwrap_or(0) == a)
                .collect();
            let ys: Vec<f64> = idx.iter().map(|&m| self.y(m, 0)).collect();
            let ps: Vec<f64> = idx.iter().map(|&m| self.pathwise[m]).collect();
            out.push(AtomValue {
                atom: a,
                value: self.scenario.enlargement().map(|e| e.atoms()[a]),
                paths: idx.len(),
                y0: stats::mean(&ys),
                se: stats::std_error(&ps),
            });
        }
        out
    }

    /// `g(t_n, Y_n, Z_n)` per path.
    pub fn driver_node(&self, n: usize) -> Vec<f64> {
        let t = self.grid().time(n);
        (0..self.paths())
            .map(|m| {
                let ctx = DriverContext {
                    w: self.scenario.w(m, n),
                    atom: self.scenario.atom_index(m),
                };
                self.generator.eval_ctx(t, self.y(m, n), self.z(m, n), &ctx)
            })
            .collect()
    }

    /// Re-evaluates `(Y_n, Z¹_n)` on another scenario with the same step.
    pub fn evaluate(&self, n: usize, other: &Scenario) -> Result<(Vec<f64>, Vec<f64>)> {
        let model = self
            .model
            .as_ref()
            .ok_or_else(|| LabError::invalid("only regression solutions can be re-evaluated"))?;
        check_compatible(&model.grid, other.grid(), n)?;
        if n >= model.nodes.len() {
            return Err(LabError::invalid(format!("node {n} is not a regression node")));
        }
        use rayon::prelude::*;
        let values: Vec<Result<PointValue>> = (0..other.paths())
            .into_par_iter()
            .map(|m| model.value(n, &other.view(m)))
            .collect();
        let mut ys = Vec::with_capacity(values.len());
        let mut zs = Vec::with_capacity(values.len());
        for v in values {
            let v = v?;
            ys.push(v.y);
            zs.push(v.z[0]);
        }
        Ok((ys, zs))
    }

    /// `Y_n` as a terminal condition at time `t_n` for nested solves.
    pub fn as_terminal(&self, n: usize) -> Result<TerminalCondition> {
        let model = self
            .model
            .clone()
            .ok_or_else(|| LabError::invalid("only regression solutions can be nested"))?;
        if n >= model.nodes.len() {
            return Err(LabError::invalid(format!("node {n} is not a regression node")));
        }
        let grid = model.grid;
        let observed: Vec<f64> = model.observed.iter().filter(|&&k| k < n).map(|&k| grid.time(k)).collect();
        let source = match model.source {
            Source::Forward => Source::Forward,
            _ => Source::Brownian,
        };
        let needs_atom = self.scenario.enlargement().is_some();
        let mut t = TerminalCondition::custom(
            format!("Y({})", grid.time(n)),
            source,
            needs_atom,
            observed,
            move |v| model.value(n, v).map(|p| p.y).unwrap_or(f64::NAN),
        );
        for (node, p) in self.model.as_ref().map(|m| m.partitions.clone()).unwrap_or_default() {
            if node <= n {
                t = t.with_partition(p);
            }
        }
        Ok(t)
    }
}

fn check_compatible(fitted: &TimeGrid, other: &TimeGrid, n: usize) -> Result<()> {
    let same_step = (fitted.dt() - other.dt()).abs() <= 1e-12 * fitted.dt();
    let same_origin = (fitted.origin() - other.origin()).abs() <= 1e-12;
    if !same_step || !same_origin {
        return Err(LabError::invalid("scenario grid does not share origin and step with the fit"));
    }
    if n > other.steps() {
        return Err(LabError::invalid(format!("node {n} lies beyond the scenario grid")));
    }
    Ok(())
}

/// Pathwise `ξ + Σ g Δt − Σ Z·ΔW`.
fn pathwise_values(scenario: &Scenario, generator: &Generator, y: &[f64], z: &[f64]) -> Vec<f64> {
    use rayon::prelude::*;
    let grid = *scenario.grid();
    let n_steps = grid.steps();
    let d = scenario.dim();
    let dt = grid.dt();
    (0..scenario.paths())
        .into_par_iter()
        .map(|m| {
            let row = m * (n_steps + 1);
            let mut acc = y[row + n_steps];
            for n in 0..n_steps {
                let zn = &z[(row + n) * d..(row + n + 1) * d];
                let ctx = DriverContext {
                    w: scenario.w(m, n),
                    atom: scenario.atom_index(m),
                };
                acc += generator.eval_ctx(grid.time(n), y[row + n], zn, &ctx) * dt;
                let dw = scenario.brownian_paths().increment(m, n);
                for k in 0..d {
                    acc -= zn[k] * dw[k];
                }
            }
            acc
        })
        .collect()
}
