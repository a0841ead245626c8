//! Duality identity against test processes `dX = u dr + v dW`, `X_s = η`,
//! and the a-priori size audit of a solution.

use rand::Rng;
use serde::Serialize;

use super::BsdeSolution;
use crate::error::{LabError, Result};
use crate::generator::DriverContext;
use crate::rng;
use crate::scenario::Scenario;
use crate::stats;

/// Adapted step processes `(u, v)`, start value `η` at node `s`, and the
/// induced `X` from the Euler rule.
#[derive(Debug, Clone)]
pub struct DualTestProcess {
    label: String,
    start: usize,
    steps: usize,
    dim: usize,
    u: Vec<f64>,
    v: Vec<f64>,
    eta: Vec<f64>,
    x: Vec<f64>,
}

impl DualTestProcess {
    /// Builds `(u, v, η)` from callables of `(t_n, W_n)` and `W_s`.
    pub fn new(
        label: impl Into<String>,
        scenario: &Scenario,
        start: usize,
        u: impl Fn(f64, &[f64]) -> f64,
        v: impl Fn(f64, &[f64], &mut [f64]),
        eta: impl Fn(&[f64]) -> f64,
    ) -> Result<Self> {
        let grid = scenario.grid();
        let n_steps = grid.steps();
        if start > n_steps {
            return Err(LabError::invalid(format!("start node {start} lies beyond the grid")));
        }
        let d = scenario.dim();
        let paths = scenario.paths();
        let row = n_steps + 1;
        let dt = grid.dt();
        let mut uu = vec![0.0; paths * row];
        let mut vv = vec![0.0; paths * row * d];
        let mut ee = vec![0.0; paths];
        let mut xx = vec![0.0; paths * row];
        for m in 0..paths {
            ee[m] = eta(scenario.w(m, start));
            for n in 0..=n_steps {
                let w = scenario.w(m, n);
                uu[m * row + n] = u(grid.time(n), w);
                v(grid.time(n), w, &mut vv[(m * row + n) * d..(m * row + n + 1) * d]);
            }
            for n in 0..=start {
                xx[m * row + n] = ee[m];
            }
            for n in start..n_steps {
                let dw = scenario.brownian_paths().increment(m, n);
                let vn = &vv[(m * row + n) * d..(m * row + n + 1) * d];
                let mut next = xx[m * row + n] + uu[m * row + n] * dt;
                for k in 0..d {
                    next += vn[k] * dw[k];
                }
                xx[m * row + n + 1] = next;
            }
        }
        Ok(DualTestProcess {
            label: label.into(),
            start,
            steps: n_steps,
            dim: d,
            u: uu,
            v: vv,
            eta: ee,
            x: xx,
        })
    }

    /// `u ≡ u0`, `v ≡ v0`, `η ≡ eta0`.
    pub fn constant(scenario: &Scenario, start: usize, u0: f64, v0: f64, eta0: f64) -> Result<Self> {
        Self::new(
            format!("const(u={u0},v={v0},eta={eta0})"),
            scenario,
            start,
            move |_, _| u0,
            move |_, _, out| out.iter_mut().for_each(|o| *o = v0),
            move |_| eta0,
        )
    }

    /// `count` processes `u = a0 + a1 sin W + a2 t`, `v = b0 + b1 cos W`,
    /// `η = c0 + c1 W_s` with coefficients uniform on `[−1, 1]`.
    pub fn random_family(scenario: &Scenario, start: usize, count: usize, seed: u64) -> Result<Vec<Self>> {
        let mut r = rng::keyed(seed, rng::TEST_PROCESSES, 0);
        (0..count)
            .map(|i| {
                let c: Vec<f64> = (0..7).map(|_| r.random_range(-1.0..=1.0)).collect();
                let (a0, a1, a2, b0, b1, c0, c1) = (c[0], c[1], c[2], c[3], c[4], c[5], c[6]);
                Self::new(
                    format!("random#{i}"),
                    scenario,
                    start,
                    move |t, w| a0 + a1 * w[0].sin() + a2 * t,
                    move |_, w, out| {
                        for (k, o) in out.iter_mut().enumerate() {
                            *o = b0 + b1 * w[k].cos();
                        }
                    },
                    move |w| c0 + c1 * w[0],
                )
            })
            .collect()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn x(&self, m: usize, n: usize) -> f64 {
        self.x[m * (self.steps + 1) + n]
    }

    pub fn u(&self, m: usize, n: usize) -> f64 {
        self.u[m * (self.steps + 1) + n]
    }

    pub fn v(&self, m: usize, n: usize) -> &[f64] {
        let at = (m * (self.steps + 1) + n) * self.dim;
        &self.v[at..at + self.dim]
    }

    pub fn eta(&self, m: usize) -> f64 {
        self.eta[m]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TranspositionRow {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub se: f64,
    /// RMS of the per-path left-hand side.
    pub scale: f64,
    /// `max(3·SE, 5·Δt·scale)`
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TranspositionReport {
    pub start: usize,
    pub end: usize,
    pub dt: f64,
    pub rows: Vec<TranspositionRow>,
}

impl TranspositionReport {
    pub fn total_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.residual).sum()
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Compares `E[Y_t X_t + Σ X_{n+1} g_n Δt]` with `E[Y_s η + Σ (u_n Y_n + v_n·Z_n) Δt]`
/// on `[t_s, t_t]`. Pairing `g_n` with `X_{n+1}` makes the identity exact in
/// expectation for the backward Euler scheme.
pub fn transposition_residual(sol: &BsdeSolution, tests: &[DualTestProcess], s: usize, t: usize) -> Result<TranspositionReport> {
    let grid = *sol.grid();
    if s > t || t > grid.steps() {
        return Err(LabError::invalid(format!("need s ≤ t ≤ N, got s={s}, t={t}")));
    }
    let paths = sol.paths();
    let dt = grid.dt();
    let d = sol.dim();
    let drivers: Vec<Vec<f64>> = (s..t).map(|n| sol.driver_node(n)).collect();
    let mut rows = Vec::with_capacity(tests.len());
    for test in tests {
        if test.start != s {
            return Err(LabError::invalid(format!(
                "test process `{}` starts at node {}, not {s}",
                test.label, test.start
            )));
        }
        if test.steps != grid.steps() || test.eta.len() != paths {
            return Err(LabError::invalid("test process was built on a different scenario"));
        }
        let mut lhs = Vec::with_capacity(paths);
        let mut diff = Vec::with_capacity(paths);
        let mut rhs_sum = 0.0;
        for m in 0..paths {
            let mut l = sol.y(m, t) * test.x(m, t);
            let mut r = sol.y(m, s) * test.eta(m);
            for n in s..t {
                l += test.x(m, n + 1) * drivers[n - s][m] * dt;
                let vz: f64 = (0..d).map(|k| test.v(m, n)[k] * sol.z(m, n)[k]).sum();
                r += (test.u(m, n) * sol.y(m, n) + vz) * dt;
            }
            lhs.push(l);
            diff.push(l - r);
            rhs_sum += r;
        }
        let residual = stats::mean(&diff).abs();
        let se = stats::std_error(&diff);
        let scale = stats::rms(&lhs);
        let tolerance = (3.0 * se).max(5.0 * dt * scale);
        rows.push(TranspositionRow {
            label: test.label.clone(),
            lhs: stats::mean(&lhs),
            rhs: rhs_sum / paths as f64,
            residual,
            se,
            scale,
            tolerance,
            pass: residual <= tolerance,
        });
    }
    Ok(TranspositionReport {
        start: s,
        end: t,
        dt,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AprioriReport {
    /// `sqrt(E[sup_n Y_n²] + E[Σ |Z_n|² Δt])`
    pub solution_norm: f64,
    /// `sqrt(E[(Σ |g(t_n,0,0)| Δt)²])`
    pub driver_norm: f64,
    /// `sqrt(E[ξ²])`
    pub terminal_norm: f64,
    pub ratio: f64,
}

/// Size of `(Y, Z)` relative to the size of the data `(g(·,0,0), ξ)`.
pub fn apriori_estimate_audit(sol: &BsdeSolution) -> AprioriReport {
    let grid = *sol.grid();
    let n_steps = grid.steps();
    let dt = grid.dt();
    let paths = sol.paths();
    let scenario = sol.scenario();
    let g = sol.generator();
    let zeros = vec![0.0; sol.dim()];
    let (mut sup_y, mut zz, mut g0, mut xi2) = (0.0, 0.0, 0.0, 0.0);
    for m in 0..paths {
        let mut sup: f64 = 0.0;
        let mut gsum = 0.0;
        for n in 0..=n_steps {
            sup = sup.max(sol.y(m, n).powi(2));
            if n < n_steps {
                zz += sol.z(m, n).iter().map(|v| v * v).sum::<f64>() * dt;
                let ctx = DriverContext {
                    w: scenario.w(m, n),
                    atom: scenario.atom_index(m),
                };
                gsum += g.eval_ctx(grid.time(n), 0.0, &zeros, &ctx).abs() * dt;
            }
        }
        sup_y += sup;
        g0 += gsum * gsum;
        xi2 += sol.y(m, n_steps).powi(2);
    }
    let p = paths as f64;
    let solution_norm = (sup_y / p + zz / p).sqrt();
    let driver_norm = (g0 / p).sqrt();
    let terminal_norm = (xi2 / p).sqrt();
    let denom = driver_norm + terminal_norm;
    let ratio = if denom > 0.0 {
        solution_norm / denom
    } else if solution_norm == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    AprioriReport {
        solution_norm,
        driver_norm,
        terminal_norm,
        ratio,
    }
}
