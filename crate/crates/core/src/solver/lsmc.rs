//! Least-squares Monte Carlo backward scheme, implicit in `Y` and explicit
//! in `Z`, with a fixed number of Picard sweeps per node.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::{pathwise_values, BsdeSolution, FittedModel, NodeDiagnostics, NodeFit, SolverTag, StratumFit};
use crate::error::{LabError, Result};
use crate::generator::Generator;
use crate::regression::{least_squares, FitFailure, PolynomialBasis, Standardizer};
use crate::scenario::Scenario;
use crate::terminal::{Source, TerminalCondition};

/// How the conditional expectations are projected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Estimator {
    /// Regress `Y_{n+1}` jointly on the basis and on the martingale features
    /// `φ_j·ΔW_k/√Δt` and `ΔW_kΔW_l/Δt − δ_kl`. The fitted basis part is the
    /// conditional mean and the `ΔW` loadings give `Z`.
    ControlVariate,
    /// Separate projections of `Y_{n+1}` and `Y_{n+1}·ΔW/Δt` on the basis.
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LsmcConfig {
    /// Total polynomial degree of the basis in the regression state.
    pub degree: usize,
    pub picard_iters: usize,
    pub estimator: Estimator,
}

impl Default for LsmcConfig {
    fn default() -> Self {
        LsmcConfig {
            degree: 2,
            picard_iters: 3,
            estimator: Estimator::ControlVariate,
        }
    }
}

fn fit_error(n: usize, e: FitFailure) -> LabError {
    let context = match e {
        FitFailure::TooFewRows { rows, features } => {
            format!("lsmc regression (stratum of {rows} paths for {features} features)")
        }
        FitFailure::IllConditioned { condition } => {
            format!("lsmc regression (condition number {condition:.3e})")
        }
    };
    LabError::numerical(context, n, None)
}

/// Solves the BSDE backward on every path of `scenario`.
///
/// The caller is responsible for auditing the Lipschitz condition of `g`;
/// the solver only enforces the Picard contraction `K·Δt < 1`.
pub fn solve_lsmc(g: &Generator, xi: &TerminalCondition, scenario: &Scenario, cfg: &LsmcConfig) -> Result<BsdeSolution> {
    let grid = *scenario.grid();
    let n_steps = grid.steps();
    let d = scenario.dim();
    let paths = scenario.paths();
    let dt = grid.dt();
    let sdt = dt.sqrt();
    if g.dim() != d {
        return Err(LabError::invalid(format!(
            "driver expects z in R^{} but the Brownian motion is {d}-dimensional",
            g.dim()
        )));
    }
    if g.lipschitz() * dt >= 1.0 {
        return Err(LabError::invalid(format!(
            "Picard sweeps do not contract: K·Δt = {} ≥ 1",
            g.lipschitz() * dt
        )));
    }
    if cfg.picard_iters == 0 {
        return Err(LabError::invalid("need at least one Picard sweep"));
    }
    if xi.source() == Source::Forward && scenario.forward_paths().is_none() {
        return Err(LabError::invalid("terminal reads the forward state but no forward paths were given"));
    }
    if xi.needs_atom() && scenario.enlargement().is_none() {
        return Err(LabError::invalid("terminal reads U but the scenario has no enlargement variable"));
    }
    let observed = xi.observed_nodes(&grid)?;
    let partitions = xi
        .partitions()
        .iter()
        .map(|p| Ok((p.node(&grid)?, p.clone())))
        .collect::<Result<Vec<_>>>()?;
    if partitions.len() > 16 {
        return Err(LabError::invalid("at most 16 partitions are supported"));
    }

    let mut model = FittedModel {
        generator: g.clone(),
        picard_iters: cfg.picard_iters,
        source: xi.source(),
        observed,
        partitions,
        atoms: scenario.atoms(),
        grid,
        dim: d,
        nodes: Vec::with_capacity(n_steps),
    };
    let strata_count = model.stratum_count();

    let row = n_steps + 1;
    let mut y = vec![0.0; paths * row];
    let mut z = vec![0.0; paths * row * d];
    let mut y_next: Vec<f64> = (0..paths)
        .into_par_iter()
        .map(|m| xi.eval(&scenario.view(m)))
        .collect();
    if let Some(m) = y_next.iter().position(|v| !v.is_finite()) {
        return Err(LabError::numerical("terminal condition", n_steps, Some(m)));
    }
    for m in 0..paths {
        y[m * row + n_steps] = y_next[m];
    }

    let mut fits = Vec::with_capacity(n_steps);
    let mut diagnostics = Vec::with_capacity(n_steps);
    let brownian = scenario.brownian_paths();
    for n in (0..n_steps).rev() {
        let raw: Vec<Vec<f64>> = (0..paths)
            .into_par_iter()
            .map(|m| {
                let mut out = Vec::new();
                model.raw_state(n, &scenario.view(m), &mut out);
                out
            })
            .collect();
        let q = raw[0].len();
        let flat: Vec<f64> = raw.into_iter().flatten().collect();
        let standardizer = Standardizer::fit(&flat, q);
        let basis = PolynomialBasis::new(standardizer.dim(), cfg.degree);
        let p = basis.size();
        let mut fit = NodeFit {
            standardizer,
            basis,
            strata: vec![None; strata_count],
        };

        let phi: Vec<f64> = {
            let mut phi = vec![0.0; paths * p];
            phi.par_chunks_mut(p).enumerate().for_each(|(m, out)| {
                let (mut raw, mut s) = (Vec::new(), Vec::new());
                model.features(&fit, n, &scenario.view(m), &mut raw, &mut s, out);
            });
            phi
        };
        let strata: Vec<usize> = (0..paths)
            .into_par_iter()
            .map(|m| model.stratum(n, &scenario.view(m)))
            .collect();
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); strata_count];
        for (m, &s) in strata.iter().enumerate() {
            groups[s].push(m);
        }

        let pairs = d * (d + 1) / 2;
        let design_size = match cfg.estimator {
            Estimator::ControlVariate => p + p * d + pairs,
            Estimator::Plain => p,
        };
        let mut condition: f64 = 1.0;
        let mut constant_strata = 0;
        let mut used_strata = 0;
        for (s, rows) in groups.iter().enumerate() {
            if rows.is_empty() {
                continue;
            }
            used_strata += 1;
            let first = y_next[rows[0]];
            if rows.iter().all(|&m| y_next[m].to_bits() == first.to_bits()) {
                let mut a = vec![0.0; p];
                a[0] = first;
                fit.strata[s] = Some(StratumFit {
                    a,
                    zc: vec![0.0; p * d],
                });
                constant_strata += 1;
                continue;
            }
            let phi_row = |m: usize| &phi[m * p..(m + 1) * p];
            let coef = match cfg.estimator {
                Estimator::ControlVariate => {
                    let ls = least_squares(
                        rows,
                        design_size,
                        1,
                        |m, out| {
                            let f = phi_row(m);
                            let dw = brownian.increment(m, n);
                            out[..p].copy_from_slice(f);
                            for j in 0..p {
                                for k in 0..d {
                                    out[p + j * d + k] = f[j] * dw[k] / sdt;
                                }
                            }
                            let mut at = p + p * d;
                            for k in 0..d {
                                for l in k..d {
                                    let delta = if k == l { 1.0 } else { 0.0 };
                                    out[at] = dw[k] * dw[l] / dt - delta;
                                    at += 1;
                                }
                            }
                        },
                        |m, out| out[0] = y_next[m],
                    )
                    .map_err(|e| fit_error(n, e))?;
                    condition = condition.max(ls.condition);
                    let a = (0..p).map(|j| ls.coefficient(j, 0)).collect();
                    let mut zc = vec![0.0; p * d];
                    for j in 0..p {
                        for k in 0..d {
                            zc[j * d + k] = ls.coefficient(p + j * d + k, 0) / sdt;
                        }
                    }
                    StratumFit { a, zc }
                }
                Estimator::Plain => {
                    let ls = least_squares(
                        rows,
                        p,
                        1 + d,
                        |m, out| out.copy_from_slice(phi_row(m)),
                        |m, out| {
                            let dw = brownian.increment(m, n);
                            out[0] = y_next[m];
                            for k in 0..d {
                                out[1 + k] = y_next[m] * dw[k] / dt;
                            }
                        },
                    )
                    .map_err(|e| fit_error(n, e))?;
                    condition = condition.max(ls.condition);
                    let a = (0..p).map(|j| ls.coefficient(j, 0)).collect();
                    let mut zc = vec![0.0; p * d];
                    for j in 0..p {
                        for k in 0..d {
                            zc[j * d + k] = ls.coefficient(j, 1 + k);
                        }
                    }
                    StratumFit { a, zc }
                }
            };
            fit.strata[s] = Some(coef);
        }

        let values: Vec<(f64, Vec<f64>, Vec<f64>)> = (0..paths)
            .into_par_iter()
            .map(|m| {
                let coef = fit.strata[strata[m]].as_ref().expect("stratum fitted");
                let v = model.step(n, &scenario.view(m), &phi[m * p..(m + 1) * p], coef);
                (v.y, v.z, v.sweeps)
            })
            .collect();
        let mut sweeps = vec![0.0f64; cfg.picard_iters];
        for (m, (yv, zv, sw)) in values.iter().enumerate() {
            if !yv.is_finite() || zv.iter().any(|v| !v.is_finite()) {
                return Err(LabError::numerical("lsmc backward step", n, Some(m)));
            }
            y[m * row + n] = *yv;
            z[(m * row + n) * d..(m * row + n + 1) * d].copy_from_slice(zv);
            y_next[m] = *yv;
            for (acc, v) in sweeps.iter_mut().zip(sw) {
                *acc = acc.max(*v);
            }
        }
        diagnostics.push(NodeDiagnostics {
            node: n,
            basis_size: p,
            design_size,
            strata: used_strata,
            constant_strata,
            condition,
            picard_sweeps: sweeps,
        });
        fits.push(fit);
    }
    fits.reverse();
    diagnostics.reverse();
    model.nodes = fits;

    for m in 0..paths {
        let (last, prev) = ((m * row + n_steps) * d, (m * row + n_steps - 1) * d);
        z.copy_within(prev..prev + d, last);
    }
    let pathwise = pathwise_values(scenario, g, &y, &z);
    Ok(BsdeSolution {
        tag: SolverTag::Lsmc,
        scenario: scenario.clone(),
        generator: g.clone(),
        terminal_label: xi.label().to_string(),
        y,
        z,
        pathwise,
        diagnostics,
        model: Some(Arc::new(model)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::builtin;
    use crate::stochastic::{BrownianPaths, TimeGrid};

    fn scenario(n: usize, m: usize, seed: u64) -> Scenario {
        Scenario::brownian(BrownianPaths::simulate(TimeGrid::new(1.0, n).unwrap(), 1, m, seed).unwrap())
    }

    #[test]
    fn terminal_is_copied_bitwise() {
        let sc = scenario(8, 512, 1);
        let xi = TerminalCondition::cosine();
        let sol = solve_lsmc(&builtin("kappa_abs_z(0.5)").unwrap(), &xi, &sc, &LsmcConfig::default()).unwrap();
        for m in 0..512 {
            assert_eq!(sol.y(m, 8).to_bits(), xi.eval(&sc.view(m)).to_bits());
        }
    }

    #[test]
    fn constants_are_preserved_exactly() {
        let sc = scenario(16, 256, 2);
        for c in [-1.0, 0.0, 2.0, 0.3] {
            let sol = solve_lsmc(
                &builtin("kappa_abs_z(0.5)").unwrap(),
                &TerminalCondition::constant(c),
                &sc,
                &LsmcConfig::default(),
            )
            .unwrap();
            assert!((0..256).all(|m| (0..=16).all(|n| sol.y(m, n) == c)));
            assert_eq!(sol.y0(), c);
        }
    }

    #[test]
    fn linear_driver_is_reproduced_exactly() {
        let sc = scenario(16, 1024, 3);
        let sol = solve_lsmc(
            &builtin("linear(0,1,0)").unwrap(),
            &TerminalCondition::brownian_affine(0.0, 1.0),
            &sc,
            &LsmcConfig::default(),
        )
        .unwrap();
        assert!((sol.y0() - 1.0).abs() < 1e-10, "{}", sol.y0());
        for m in 0..16 {
            assert!((sol.z(m, 5)[0] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn contraction_guard() {
        let sc = scenario(1, 16, 3);
        let r = solve_lsmc(
            &builtin("discount(1.5)").unwrap(),
            &TerminalCondition::constant(1.0),
            &sc,
            &LsmcConfig::default(),
        );
        assert!(matches!(r, Err(LabError::InvalidArgument(_))));
    }

    #[test]
    fn tiny_sample_reports_node() {
        let sc = scenario(4, 3, 3);
        let r = solve_lsmc(
            &builtin("zero").unwrap(),
            &TerminalCondition::square(),
            &sc,
            &LsmcConfig::default(),
        );
        match r {
            Err(LabError::NumericalFailure { node, .. }) => assert_eq!(node, 3),
            other => panic!("expected failure, got {other:?}"),
        }
    }
}
