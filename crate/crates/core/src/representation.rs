//! Recovering a driver from its solutions: difference quotients
//! `(Y_t − y)/ε` on short horizons, converse comparison over a probe grid,
//! and the solution-level characterization of structural properties.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::check::{Check, Tolerances};
use crate::error::{LabError, Result};
use crate::forward::{check_h_assumptions, euler_maruyama, ForwardModel, StateBox};
use crate::generator::{check_a_assumptions, probe_structure, Generator, GeneratorSpec, ProbeBox, StructureAudit};
use crate::gexp::{admit, GConfig};
use crate::scenario::Scenario;
use crate::solver::{closed_form_value, solve_lsmc, BsdeSolution, LsmcConfig, SolverTag};
use crate::stats;
use crate::stochastic::{BrownianPaths, TimeGrid};
use crate::terminal::{Source, TerminalCondition};

/// Default `ε` ladder.
pub const DEFAULT_EPSILONS: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

const SE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotientConfig {
    /// Grid the probe times and `ε` values must align with.
    pub grid: TimeGrid,
    /// Steps of the restarted grid on `[t, t + ε]`.
    pub sub_steps: usize,
    pub paths: usize,
    /// Shared by every `ε` so the ladder uses common random numbers.
    pub seed: u64,
    pub lsmc: LsmcConfig,
    /// Use the closed form on `[t, t + ε]` for linear catalog drivers.
    pub analytic: bool,
    pub audit_box: ProbeBox,
    pub audit_probes: usize,
}

impl Default for QuotientConfig {
    fn default() -> Self {
        QuotientConfig {
            grid: TimeGrid::new(1.0, 80).expect("valid grid"),
            sub_steps: 32,
            paths: 1 << 14,
            seed: 0,
            lsmc: LsmcConfig::default(),
            analytic: false,
            audit_box: ProbeBox::default(),
            audit_probes: 4096,
        }
    }
}

/// Probe of `g(t, y, z)` through `ξ = y + z·(W_{t+ε} − W_t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BrownianProbe {
    pub t: f64,
    pub y: f64,
    pub z: Vec<f64>,
    pub epsilons: Vec<f64>,
}

/// Probe of `g(t, y, σ*(t,x)p) + p·b(t,x)` through `ξ = y + p·(Γ^{t,x}_{t+ε} − x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForwardProbe {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: f64,
    pub p: Vec<f64>,
    pub epsilons: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotientRow {
    pub epsilon: f64,
    /// Sample mean of `D_ε`.
    pub estimate: f64,
    /// `sqrt(mean((D_ε − target)²))` over paths.
    pub l2_error: f64,
    pub se: f64,
    /// `(1/ε)·E[Σ g(t_n, Y_n, Z_n) Δt]`, when a regression run is available.
    pub conditional_mean_form: Option<f64>,
    pub solver: SolverTag,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepresentationReport {
    pub target: f64,
    pub rows: Vec<QuotientRow>,
    /// Steps of the ladder where the error grew.
    pub inversions: usize,
    /// At most one inversion, and that one within one standard error.
    pub monotone: bool,
    pub final_error: f64,
}

impl RepresentationReport {
    fn new(target: f64, rows: Vec<QuotientRow>) -> Self {
        let mut inversions = 0;
        let mut within = true;
        for w in rows.windows(2) {
            let grow = w[1].l2_error - w[0].l2_error;
            if grow > SE_FLOOR {
                inversions += 1;
                within &= grow <= w[0].se.max(w[1].se).max(SE_FLOOR);
            }
        }
        let final_error = rows.last().map_or(f64::NAN, |r| r.l2_error);
        RepresentationReport {
            target,
            rows,
            inversions,
            monotone: inversions <= 1 && within,
            final_error,
        }
    }

    pub fn converged(&self, tolerance: f64) -> bool {
        self.monotone && self.final_error <= tolerance
    }
}

fn check_ladder(grid: &TimeGrid, t: f64, epsilons: &[f64]) -> Result<()> {
    if epsilons.is_empty() {
        return Err(LabError::invalid("need at least one ε"));
    }
    let start = grid
        .node_of(t)
        .ok_or_else(|| LabError::invalid(format!("probe time {t} is not a grid node")))?;
    if start >= grid.steps() {
        return Err(LabError::invalid("probe time must lie before the horizon"));
    }
    for (i, &eps) in epsilons.iter().enumerate() {
        if !(eps > 0.0) || eps < grid.dt() * (1.0 - 1e-9) {
            return Err(LabError::invalid(format!("ε = {eps} is below the grid resolution {}", grid.dt())));
        }
        match grid.node_of(t + eps) {
            Some(k) if k > start => {}
            _ => {
                return Err(LabError::invalid(format!(
                    "ε = {eps} is not a multiple of Δt = {} within the horizon",
                    grid.dt()
                )))
            }
        }
        if i > 0 && eps >= epsilons[i - 1] {
            return Err(LabError::invalid("the ε ladder must be strictly decreasing"));
        }
    }
    Ok(())
}

fn audit_driver(g: &Generator, cfg: &QuotientConfig) -> Result<()> {
    let audit = check_a_assumptions(g, &cfg.audit_box, cfg.audit_probes, cfg.seed)?;
    if !audit.a1_pass {
        return Err(LabError::invalid(format!(
            "A1 violated: `{}` has Lipschitz ratio {:.6} above the declared {}",
            g.label(),
            audit.lipschitz_ratio,
            audit.declared_lipschitz
        )));
    }
    if !audit.g00_sup.is_finite() {
        return Err(LabError::invalid(format!("A3 violated: g(t,0,0) is not finite for `{}`", g.label())));
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Per-path `D_ε` from a regression run, the row, and the per-path pathwise
/// quotient used for paired comparisons.
fn quotient_from_solution(sol: &BsdeSolution, y: f64, eps: f64, target: f64) -> (QuotientRow, Vec<f64>) {
    let d: Vec<f64> = sol.y_node(0).iter().map(|v| (v - y) / eps).collect();
    let err: Vec<f64> = d.iter().map(|v| v - target).collect();
    let n_steps = sol.grid().steps();
    let dt = sol.grid().dt();
    let mut integral = vec![0.0; sol.paths()];
    for n in 0..n_steps {
        for (acc, g) in integral.iter_mut().zip(sol.driver_node(n)) {
            *acc += g * dt;
        }
    }
    let pathwise: Vec<f64> = sol.pathwise_y0().iter().map(|v| (v - y) / eps).collect();
    (
        QuotientRow {
            epsilon: eps,
            estimate: stats::mean(&d),
            l2_error: stats::rms(&err),
            se: sol.y0_se() / eps,
            conditional_mean_form: Some(stats::mean(&integral) / eps),
            solver: SolverTag::Lsmc,
        },
        pathwise,
    )
}

fn brownian_run(g: &Generator, probe: &BrownianProbe, eps: f64, target: f64, cfg: &QuotientConfig) -> Result<(QuotientRow, Vec<f64>)> {
    let d = g.dim();
    if cfg.analytic && d == 1 {
        let linear = match g.spec() {
            Some(GeneratorSpec::Zero) => Some((0.0, 0.0, 0.0)),
            Some(GeneratorSpec::Linear { a, b, c }) => Some((a, b, c)),
            _ => None,
        };
        if let Some((a, b, c)) = linear {
            let (y, _) = closed_form_value(a, b, c, probe.y, probe.z[0], eps, 0.0);
            let q = (y - probe.y) / eps;
            let row = QuotientRow {
                epsilon: eps,
                estimate: q,
                l2_error: (q - target).abs(),
                se: 0.0,
                conditional_mean_form: None,
                solver: SolverTag::ClosedForm,
            };
            return Ok((row, vec![q; cfg.paths]));
        }
    }
    let grid = TimeGrid::with_origin(probe.t, eps, cfg.sub_steps)?;
    let scenario = Scenario::brownian(BrownianPaths::simulate(grid, d, cfg.paths, cfg.seed)?);
    let (y, z) = (probe.y, probe.z.clone());
    let xi = TerminalCondition::custom(
        format!("{y}+z.(W_(t+e)-W_t)"),
        Source::Brownian,
        false,
        vec![],
        move |v| y + dot(&z, v.w_terminal()),
    );
    let sol = solve_lsmc(g, &xi, &scenario, &cfg.lsmc)?;
    Ok(quotient_from_solution(&sol, probe.y, eps, target))
}

/// `D_ε = (Y_t − y)/ε` for `ξ = y + z·(W_{t+ε} − W_t)` along the ladder.
pub fn difference_quotient_brownian(g: &Generator, probe: &BrownianProbe, cfg: &QuotientConfig) -> Result<RepresentationReport> {
    if probe.z.len() != g.dim() {
        return Err(LabError::invalid("probe direction dimension does not match the driver"));
    }
    check_ladder(&cfg.grid, probe.t, &probe.epsilons)?;
    audit_driver(g, cfg)?;
    let target = g.eval(probe.t, probe.y, &probe.z);
    let rows = probe
        .epsilons
        .iter()
        .map(|&eps| brownian_run(g, probe, eps, target, cfg).map(|r| r.0))
        .collect::<Result<Vec<_>>>()?;
    Ok(RepresentationReport::new(target, rows))
}

/// `D_ε = (Y_t − y)/ε` for `ξ = y + p·(Γ^{t,x}_{t+ε} − x)` along the ladder.
pub fn difference_quotient_forward(
    g: &Generator,
    model: &ForwardModel,
    probe: &ForwardProbe,
    cfg: &QuotientConfig,
) -> Result<RepresentationReport> {
    let (q, d) = (model.state_dim(), model.noise_dim());
    if probe.x.len() != q || probe.p.len() != q {
        return Err(LabError::invalid("probe state or direction dimension does not match the model"));
    }
    if g.dim() != d {
        return Err(LabError::invalid("driver dimension does not match the model noise"));
    }
    check_ladder(&cfg.grid, probe.t, &probe.epsilons)?;
    audit_driver(g, cfg)?;
    let h = check_h_assumptions(model, &StateBox::default(), cfg.audit_probes, cfg.seed)?;
    if !h.pass {
        return Err(LabError::invalid(format!("forward model `{}` fails its assumption audit", model.label())));
    }
    let (t, y) = (probe.t, probe.y);
    let sz = model.diffusion_transpose_times(t, &probe.x, &probe.p);
    let target = g.eval(t, y, &sz) + dot(&probe.p, &model.drift(t, &probe.x));
    let mut rows = Vec::with_capacity(probe.epsilons.len());
    for &eps in &probe.epsilons {
        let grid = TimeGrid::with_origin(t, eps, cfg.sub_steps)?;
        let brownian = BrownianPaths::simulate(grid, d, cfg.paths, cfg.seed)?;
        let forward = euler_maruyama(model, &brownian, 0, &probe.x)?;
        let scenario = Scenario::brownian(brownian).with_forward(forward)?;
        let (x, p) = (probe.x.clone(), probe.p.clone());
        let xi = TerminalCondition::forward(format!("{y}+p.(G_(t+e)-x)"), move |gam| {
            let shift: Vec<f64> = gam.iter().zip(&x).map(|(a, b)| a - b).collect();
            y + dot(&p, &shift)
        });
        let sol = solve_lsmc(g, &xi, &scenario, &cfg.lsmc)?;
        rows.push(quotient_from_solution(&sol, y, eps, target).0);
    }
    Ok(RepresentationReport::new(target, rows))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConverseConfig {
    pub quotient: QuotientConfig,
    /// `ε` used on the probe grid.
    pub epsilon: f64,
    pub times: Vec<f64>,
    pub ys: Vec<f64>,
    /// Component values; the probe grid takes every combination.
    pub zs: Vec<f64>,
    pub lsmc: LsmcConfig,
    pub tol: Tolerances,
}

impl Default for ConverseConfig {
    fn default() -> Self {
        ConverseConfig {
            quotient: QuotientConfig {
                paths: 1 << 12,
                ..QuotientConfig::default()
            },
            epsilon: 0.025,
            times: (0..8).map(|i| i as f64 / 8.0).collect(),
            ys: vec![-1.0, 0.0, 1.0],
            zs: vec![-1.0, 0.0, 1.0],
            lsmc: LsmcConfig::default(),
            tol: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingCheck {
    pub terminal: String,
    /// `Y_0(g¹) − Y_0(g²)`
    pub gap: f64,
    pub se: f64,
    pub ordered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceProbe {
    pub t: f64,
    pub y: f64,
    pub z: Vec<f64>,
    pub lower: f64,
    pub upper: f64,
    pub se: f64,
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConverseReport {
    pub lower: String,
    pub upper: String,
    pub hypothesis: Vec<OrderingCheck>,
    /// `Y(g¹) ≤ Y(g²)` up to noise for every terminal of the family.
    pub hypothesis_holds: bool,
    pub probes: Vec<DominanceProbe>,
    /// No probe shows `D_ε(g¹) > D_ε(g²)` beyond noise.
    pub dominance_holds: bool,
    pub counterexamples: Vec<DominanceProbe>,
    /// The ordering of solutions never coexists with a dominance violation.
    pub consistent: bool,
}

fn z_grid(values: &[f64], d: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}

/// Tests `Y(g¹) ≤ Y(g²)` over `family` on `scenario`, then compares the
/// difference quotients of the two drivers on the probe grid.
pub fn converse_comparison(
    lower: &Generator,
    upper: &Generator,
    family: &[TerminalCondition],
    scenario: &Scenario,
    cfg: &ConverseConfig,
) -> Result<ConverseReport> {
    if lower.dim() != upper.dim() {
        return Err(LabError::invalid("drivers act on different z dimensions"));
    }
    audit_driver(lower, &cfg.quotient)?;
    audit_driver(upper, &cfg.quotient)?;
    let mut hypothesis = Vec::with_capacity(family.len());
    for xi in family {
        let s1 = solve_lsmc(lower, xi, scenario, &cfg.lsmc)?;
        let s2 = solve_lsmc(upper, xi, scenario, &cfg.lsmc)?;
        let d: Vec<f64> = s1.pathwise_y0().iter().zip(s2.pathwise_y0()).map(|(a, b)| a - b).collect();
        let se = stats::std_error(&d);
        let gap = s1.y0() - s2.y0();
        hypothesis.push(OrderingCheck {
            terminal: xi.label().to_string(),
            gap,
            se,
            ordered: gap <= cfg.tol.noise(se),
        });
    }
    let hypothesis_holds = hypothesis.iter().all(|h| h.ordered);

    let mut points = Vec::new();
    for &t in &cfg.times {
        check_ladder(&cfg.quotient.grid, t, &[cfg.epsilon])?;
        for &y in &cfg.ys {
            for z in z_grid(&cfg.zs, lower.dim()) {
                points.push(BrownianProbe {
                    t,
                    y,
                    z,
                    epsilons: vec![cfg.epsilon],
                });
            }
        }
    }
    let probes = points
        .par_iter()
        .map(|p| {
            let (r1, d1) = brownian_run(lower, p, cfg.epsilon, lower.eval(p.t, p.y, &p.z), &cfg.quotient)?;
            let (r2, d2) = brownian_run(upper, p, cfg.epsilon, upper.eval(p.t, p.y, &p.z), &cfg.quotient)?;
            let diff: Vec<f64> = d1.iter().zip(&d2).map(|(a, b)| a - b).collect();
            let se = stats::std_error(&diff);
            Ok(DominanceProbe {
                t: p.t,
                y: p.y,
                z: p.z.clone(),
                lower: r1.estimate,
                upper: r2.estimate,
                se,
                violated: r1.estimate - r2.estimate > cfg.tol.noise(se),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let counterexamples: Vec<DominanceProbe> = probes.iter().filter(|p| p.violated).cloned().collect();
    let dominance_holds = counterexamples.is_empty();
    Ok(ConverseReport {
        lower: lower.label().to_string(),
        upper: upper.label().to_string(),
        hypothesis,
        hypothesis_holds,
        dominance_holds,
        consistent: !hypothesis_holds || dominance_holds,
        probes,
        counterexamples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Property {
    PositiveHomogeneity,
    TranslationInvariance,
    Subadditivity,
    Convexity,
}

impl Property {
    pub const ALL: [Property; 4] = [
        Property::PositiveHomogeneity,
        Property::TranslationInvariance,
        Property::Subadditivity,
        Property::Convexity,
    ];

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "positive_homogeneity" => Ok(Property::PositiveHomogeneity),
            "translation_invariance" => Ok(Property::TranslationInvariance),
            "subadditivity" => Ok(Property::Subadditivity),
            "convexity" => Ok(Property::Convexity),
            other => Err(LabError::invalid(format!(
                "unknown property `{other}` (expected positive_homogeneity, translation_invariance, subadditivity or convexity)"
            ))),
        }
    }

    fn id(&self) -> &'static str {
        match self {
            Property::PositiveHomogeneity => "positive-homogeneity",
            Property::TranslationInvariance => "translation-invariance",
            Property::Subadditivity => "subadditivity",
            Property::Convexity => "convexity",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Property::PositiveHomogeneity => "positive_homogeneity",
            Property::TranslationInvariance => "translation_invariance",
            Property::Subadditivity => "subadditivity",
            Property::Convexity => "convexity",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    GeneratorToSolution,
    SolutionToGenerator,
}

impl Direction {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "generator=>solution" | "generator_to_solution" => Ok(Direction::GeneratorToSolution),
            "solution=>generator" | "solution_to_generator" => Ok(Direction::SolutionToGenerator),
            other => Err(LabError::invalid(format!(
                "unknown direction `{other}` (expected generator=>solution or solution=>generator)"
            ))),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::GeneratorToSolution => "generator=>solution",
            Direction::SolutionToGenerator => "solution=>generator",
        })
    }
}

/// Outcome of the solution-level test of one property.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionLevel {
    pub holds: bool,
    /// Largest violation seen at node 0.
    pub max_gap: f64,
    pub witness: Option<String>,
    pub checks: Vec<Check>,
}

struct Solver<'a> {
    g: &'a Generator,
    scenario: &'a Scenario,
    lsmc: LsmcConfig,
    cache: std::collections::HashMap<String, BsdeSolution>,
}

impl Solver<'_> {
    fn solve(&mut self, xi: &TerminalCondition) -> Result<BsdeSolution> {
        if let Some(s) = self.cache.get(xi.label()) {
            return Ok(s.clone());
        }
        let s = solve_lsmc(self.g, xi, self.scenario, &self.lsmc)?;
        self.cache.insert(xi.label().to_string(), s.clone());
        Ok(s)
    }
}

fn terminal_pairs() -> Vec<(TerminalCondition, TerminalCondition)> {
    let w = TerminalCondition::brownian_affine(0.0, 1.0);
    vec![
        (w.clone(), TerminalCondition::brownian_affine(0.0, -1.0)),
        (w.clone(), TerminalCondition::square()),
        (TerminalCondition::cosine(), w.clone()),
        (w.clone(), TerminalCondition::constant(2.0)),
        (w, TerminalCondition::constant(-2.0)),
    ]
}

/// Solution-level test of `property` at `nodes`.
///
/// At node 0 the comparison is between scalars and uses the paired pathwise
/// standard error; at later nodes it is path-wise, with the RMS of the
/// violation held to the regression tolerance.
pub fn solution_level(
    g: &Generator,
    property: Property,
    scenario: &Scenario,
    nodes: &[usize],
    lsmc: &LsmcConfig,
    tol: &Tolerances,
) -> Result<SolutionLevel> {
    let grid = *scenario.grid();
    let n_steps = grid.steps();
    if n_steps % 2 != 0 {
        return Err(LabError::invalid("the characterization checks need an even step count"));
    }
    let mid = n_steps / 2;
    let mut s = Solver {
        g,
        scenario,
        lsmc: *lsmc,
        cache: Default::default(),
    };
    let id = format!("representation/{}", property.id());
    let mut checks = Vec::new();
    let mut max_gap: f64 = 0.0;
    let mut witness: Option<(f64, String)> = None;
    let mut note = |gap: f64, label: &str| {
        if gap > max_gap {
            max_gap = gap;
        }
        if witness.as_ref().is_none_or(|w| gap > w.0) {
            witness = Some((gap, label.to_string()));
        }
    };

    // `lhs` should equal (`equality`) or not exceed `rhs`.
    let mut compare = |lhs: &BsdeSolution,
                       rhs: &dyn Fn(usize, usize) -> f64,
                       rhs_pathwise: &dyn Fn(usize) -> f64,
                       equality: bool,
                       label: String,
                       nodes: &[usize]|
     -> Check {
        let mut worst_ratio = f64::NEG_INFINITY;
        let mut result = None;
        for &n in nodes {
            let (observed, tolerance) = if n == 0 {
                let paired: Vec<f64> = (0..scenario.paths()).map(|m| lhs.pathwise_y0()[m] - rhs_pathwise(m)).collect();
                let rhs0 = stats::mean(&(0..scenario.paths()).map(|m| rhs(m, 0)).collect::<Vec<_>>());
                let gap = lhs.y0() - rhs0;
                let observed = if equality { gap.abs() } else { gap.max(0.0) };
                note(observed, &label);
                (observed, tol.noise(stats::std_error(&paired)) + if equality { tol.scalar } else { 0.0 })
            } else {
                let d: Vec<f64> = (0..scenario.paths())
                    .map(|m| {
                        let gap = lhs.y(m, n) - rhs(m, n);
                        if equality {
                            gap
                        } else {
                            gap.max(0.0)
                        }
                    })
                    .collect();
                (stats::rms(&d), tol.regression)
            };
            let ratio = observed - tolerance;
            if ratio > worst_ratio {
                worst_ratio = ratio;
                result = Some((n, observed, tolerance));
            }
        }
        let (n, observed, tolerance) = result.expect("at least one node");
        Check::at_most(&id, label, observed, tolerance).with_detail(format!("worst node {n}"))
    };

    match property {
        Property::PositiveHomogeneity => {
            for xi in [TerminalCondition::brownian_affine(0.0, 1.0), TerminalCondition::cosine()] {
                let base = s.solve(&xi)?;
                for alpha in [0.0, 0.5, 2.0] {
                    let scaled = s.solve(&xi.scaled(alpha))?;
                    checks.push(compare(
                        &scaled,
                        &|m, n| alpha * base.y(m, n),
                        &|m| alpha * base.pathwise_y0()[m],
                        true,
                        format!("Y({alpha}*{}) = {alpha}*Y({})", xi.label(), xi.label()),
                        nodes,
                    ));
                }
            }
        }
        Property::TranslationInvariance => {
            let family = [
                TerminalCondition::constant(0.0),
                TerminalCondition::brownian_affine(0.0, 1.0),
                TerminalCondition::cosine(),
            ];
            let beta = TerminalCondition::brownian_at(grid.time(mid));
            for xi in &family {
                let base = s.solve(xi)?;
                for c in [1.0, -1.0] {
                    let shifted = s.solve(&xi.shifted(c))?;
                    checks.push(compare(
                        &shifted,
                        &|m, n| base.y(m, n) + c,
                        &|m| base.pathwise_y0()[m] + c,
                        true,
                        format!("Y({}+{c}) = Y({})+{c}", xi.label(), xi.label()),
                        nodes,
                    ));
                }
                let late: Vec<usize> = nodes.iter().copied().filter(|&n| n >= mid).collect();
                if !late.is_empty() {
                    let shifted = s.solve(&xi.plus(&beta)?)?;
                    checks.push(compare(
                        &shifted,
                        &|m, n| base.y(m, n) + scenario.w(m, mid)[0],
                        &|m| base.pathwise_y0()[m],
                        true,
                        format!("Y_s({}+{}) = Y_s({})+{} for s >= {}", xi.label(), beta.label(), xi.label(), beta.label(), grid.time(mid)),
                        &late,
                    ));
                }
            }
        }
        Property::Subadditivity => {
            for (a, b) in terminal_pairs() {
                let (ya, yb) = (s.solve(&a)?, s.solve(&b)?);
                let sum = s.solve(&a.plus(&b)?)?;
                checks.push(compare(
                    &sum,
                    &|m, n| ya.y(m, n) + yb.y(m, n),
                    &|m| ya.pathwise_y0()[m] + yb.pathwise_y0()[m],
                    false,
                    format!("Y({}+{}) <= Y({})+Y({})", a.label(), b.label(), a.label(), b.label()),
                    nodes,
                ));
            }
        }
        Property::Convexity => {
            for (a, b) in terminal_pairs() {
                let (ya, yb) = (s.solve(&a)?, s.solve(&b)?);
                for lambda in [0.25, 0.5] {
                    let mix = s.solve(&a.combine(lambda, &b, 1.0 - lambda)?)?;
                    checks.push(compare(
                        &mix,
                        &|m, n| lambda * ya.y(m, n) + (1.0 - lambda) * yb.y(m, n),
                        &|m| lambda * ya.pathwise_y0()[m] + (1.0 - lambda) * yb.pathwise_y0()[m],
                        false,
                        format!("Y({lambda}*{}+{}*{}) <= convex combination", a.label(), 1.0 - lambda, b.label()),
                        nodes,
                    ));
                }
            }
        }
    }
    let holds = checks.iter().all(|c| c.pass);
    Ok(SolutionLevel {
        holds,
        max_gap,
        witness: if holds { None } else { witness.map(|w| w.1) },
        checks,
    })
}

fn declared(g: &Generator, property: Property) -> bool {
    let f = g.flags();
    match property {
        Property::PositiveHomogeneity => f.positively_homogeneous,
        Property::TranslationInvariance => f.independent_of_y,
        Property::Subadditivity => f.subadditive,
        Property::Convexity => f.convex_in_z,
    }
}

fn observed(a: &StructureAudit, property: Property) -> bool {
    match property {
        Property::PositiveHomogeneity => a.observed.positively_homogeneous,
        Property::TranslationInvariance => a.observed.independent_of_y,
        Property::Subadditivity => a.observed.subadditive,
        Property::Convexity => a.observed.convex_in_z,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharacterizationReport {
    pub generator: String,
    pub property: Property,
    pub direction: Direction,
    /// Generator-level claim (declared flag) or solution-level outcome.
    pub premise: bool,
    pub conclusion: bool,
    /// `premise ⇒ conclusion` held.
    pub consistent: bool,
    pub solution: SolutionLevel,
    pub structure: StructureAudit,
}

/// One property in one direction; the Lipschitz audit gates the driver.
pub fn characterization_suite(
    g: &Generator,
    property: Property,
    direction: Direction,
    scenario: &Scenario,
    cfg: &GConfig,
) -> Result<CharacterizationReport> {
    let mut reports = characterization_reports(g, property, &[direction], scenario, cfg)?;
    Ok(reports.remove(0))
}

/// One report per direction, sharing the solution-level check.
pub fn characterization_reports(
    g: &Generator,
    property: Property,
    directions: &[Direction],
    scenario: &Scenario,
    cfg: &GConfig,
) -> Result<Vec<CharacterizationReport>> {
    let audit = check_a_assumptions(g, &cfg.audit_box, cfg.audit_probes, cfg.audit_seed)?;
    if !audit.a1_pass {
        return Err(LabError::invalid(format!(
            "A1 violated: `{}` has Lipschitz ratio {:.6} above the declared {}",
            g.label(),
            audit.lipschitz_ratio,
            audit.declared_lipschitz
        )));
    }
    let n = scenario.grid().steps();
    let solution = solution_level(g, property, scenario, &[0, n / 2], &cfg.lsmc, &cfg.tol)?;
    let structure = probe_structure(g, &cfg.audit_box, cfg.audit_probes, cfg.audit_seed);
    Ok(directions
        .iter()
        .map(|&direction| {
            let (premise, conclusion) = match direction {
                Direction::GeneratorToSolution => (declared(g, property), solution.holds),
                Direction::SolutionToGenerator => (solution.holds, observed(&structure, property)),
            };
            CharacterizationReport {
                generator: g.label().to_string(),
                property,
                direction,
                premise,
                conclusion,
                consistent: !premise || conclusion,
                solution: solution.clone(),
                structure: structure.clone(),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceRow {
    pub property: Property,
    /// Property of the driver itself, by direct evaluation.
    pub generator_level: bool,
    /// Property of `E_g[·|F_t]` at `t = T/2`, path-wise.
    pub conditional_level: bool,
    /// Property of `E_g[·]`.
    pub expectation_level: bool,
    pub agree: bool,
    pub max_gap: f64,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub generator: String,
    pub rows: Vec<EquivalenceRow>,
}

impl EquivalenceReport {
    pub fn all_agree(&self) -> bool {
        self.rows.iter().all(|r| r.agree)
    }
}

/// For each property, whether the driver, the conditional expectation and
/// the expectation all have it or all lack it.
pub fn axiom_equivalence_suite(g: &Generator, scenario: &Scenario, cfg: &GConfig) -> Result<EquivalenceReport> {
    admit(g, cfg)?;
    let n = scenario.grid().steps();
    let structure = probe_structure(g, &cfg.audit_box, cfg.audit_probes, cfg.audit_seed);
    let mut rows = Vec::new();
    for property in Property::ALL {
        let generator_level = match property {
            Property::PositiveHomogeneity => structure.observed.positively_homogeneous,
            Property::TranslationInvariance => structure.observed.independent_of_y,
            Property::Subadditivity => structure.observed.independent_of_y && structure.subadditive_in_z,
            Property::Convexity => structure.observed.independent_of_y && structure.convex_z_only,
        };
        let conditional = solution_level(g, property, scenario, &[n / 2], &cfg.lsmc, &cfg.tol)?;
        let expectation = solution_level(g, property, scenario, &[0], &cfg.lsmc, &cfg.tol)?;
        let mut checks = conditional.checks.clone();
        checks.extend(expectation.checks.iter().cloned());
        rows.push(EquivalenceRow {
            property,
            generator_level,
            conditional_level: conditional.holds,
            expectation_level: expectation.holds,
            agree: generator_level == conditional.holds && conditional.holds == expectation.holds,
            max_gap: expectation.max_gap,
            checks,
        });
    }
    Ok(EquivalenceReport {
        generator: g.label().to_string(),
        rows,
    })
}
