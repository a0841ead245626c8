//! Exact solution for `g = a·y + b·z + c` with `ξ = α + β·W_T` (one dimension).

use super::{BsdeSolution, SolverTag};
use crate::error::{LabError, Result};
use crate::generator::GeneratorSpec;
use crate::scenario::Scenario;
use crate::terminal::TerminalCondition;

/// `(Y_t, Z_t)` at time-to-maturity `tau` and Brownian level `w`.
///
/// Under the measure that adds drift `b` to `W`, `Y_t = e^{aτ}(α + β(W_t + bτ))
/// + (c/a)(e^{aτ} − 1)` (the last term is `c·τ` when `a = 0`) and
/// `Z_t = β e^{aτ}`.
pub fn closed_form_value(a: f64, b: f64, c: f64, alpha: f64, beta: f64, tau: f64, w: f64) -> (f64, f64) {
    let growth = (a * tau).exp();
    let forcing = if a == 0.0 { c * tau } else { c / a * (growth - 1.0) };
    (growth * (alpha + beta * (w + b * tau)) + forcing, beta * growth)
}

/// Evaluates the closed form on every path and node of `scenario`.
pub fn closed_form_linear(a: f64, b: f64, c: f64, xi: &TerminalCondition, scenario: &Scenario) -> Result<BsdeSolution> {
    if scenario.dim() != 1 {
        return Err(LabError::invalid("closed form is implemented for one Brownian motion"));
    }
    let (alpha, beta) = xi
        .affine()
        .ok_or_else(|| LabError::invalid(format!("closed form needs ξ = α + β·W_T, got `{}`", xi.label())))?;
    let grid = *scenario.grid();
    let n_steps = grid.steps();
    let row = n_steps + 1;
    let paths = scenario.paths();
    let horizon = grid.time(n_steps);
    let mut y = vec![0.0; paths * row];
    let mut z = vec![0.0; paths * row];
    for m in 0..paths {
        for n in 0..=n_steps {
            let tau = horizon - grid.time(n);
            let (yv, zv) = closed_form_value(a, b, c, alpha, beta, tau, scenario.w(m, n)[0]);
            y[m * row + n] = yv;
            z[m * row + n] = zv;
        }
        y[m * row + n_steps] = xi.eval(&scenario.view(m));
    }
    let y0 = y[0];
    Ok(BsdeSolution {
        tag: SolverTag::ClosedForm,
        scenario: scenario.clone(),
        generator: GeneratorSpec::Linear { a, b, c }.build(1)?,
        terminal_label: xi.label().to_string(),
        pathwise: vec![y0; paths],
        y,
        z,
        diagnostics: Vec::new(),
        model: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_values() {
        assert_eq!(closed_form_value(0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0), (1.0, 1.0));
        let (y, z) = closed_form_value(-1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.3);
        assert!((y - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(z, 0.0);
        assert_eq!(closed_form_value(0.0, 0.0, 0.0, 0.0, 1.0, 0.7, 0.25).0, 0.25);
    }
}
