//! Nonlinear expectations `E_g[ξ] = Y_0` and `E_g[ξ|F_t] = Y_t`, the
//! defining identity over events, and the axiom checks.

use serde::Serialize;

use crate::check::{Check, Tolerances};
use crate::error::{LabError, Result};
use crate::generator::{check_a_assumptions, Generator, GeneratorAssumptionReport, ProbeBox};
use crate::representation::{converse_comparison, ConverseConfig, ConverseReport};
use crate::rng;
use crate::scenario::Scenario;
use crate::solver::{solve_lsmc, AtomValue, BsdeSolution, LsmcConfig};
use crate::stats;
use crate::stochastic::{BrownianPaths, TimeGrid};
use crate::terminal::{Partition, TerminalCondition};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GConfig {
    pub lsmc: LsmcConfig,
    pub audit_box: ProbeBox,
    pub audit_probes: usize,
    pub audit_seed: u64,
    pub tol: Tolerances,
}

impl Default for GConfig {
    fn default() -> Self {
        GConfig {
            lsmc: LsmcConfig::default(),
            audit_box: ProbeBox::default(),
            audit_probes: 4096,
            audit_seed: 0,
            tol: Tolerances::default(),
        }
    }
}

/// Audits `g` and refuses it unless it is Lipschitz and vanishes at `z = 0`.
pub fn admit(g: &Generator, cfg: &GConfig) -> Result<GeneratorAssumptionReport> {
    let audit = check_a_assumptions(g, &cfg.audit_box, cfg.audit_probes, cfg.audit_seed)?;
    if !audit.a1_pass {
        return Err(LabError::InvalidArgument(format!(
            "A1 violated: `{}` has Lipschitz ratio {:.6} above the declared {}",
            g.label(),
            audit.lipschitz_ratio,
            audit.declared_lipschitz
        )));
    }
    if let Some(w) = &audit.a5_witness {
        return Err(LabError::InvalidArgument(format!(
            "A5 violated: `{}` gives g({}, {}, 0) = {}",
            g.label(),
            w.t,
            w.y,
            w.value
        )));
    }
    Ok(audit)
}

/// `E_g[ξ]` together with the solution it was read from.
#[derive(Debug, Clone)]
pub struct GExpectation {
    solution: BsdeSolution,
    audit: GeneratorAssumptionReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeSummary {
    pub node: usize,
    pub time: f64,
    pub mean: f64,
    pub se: f64,
    pub rms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GExpectationReport {
    pub generator: String,
    pub terminal: String,
    pub value: f64,
    pub se: f64,
    pub by_atom: Vec<AtomValue>,
    pub conditional: Vec<NodeSummary>,
}

impl GExpectation {
    pub fn value(&self) -> f64 {
        self.solution.y0()
    }

    pub fn se(&self) -> f64 {
        self.solution.y0_se()
    }

    pub fn by_atom(&self) -> Vec<AtomValue> {
        self.solution.y0_by_atom()
    }

    /// `E_g[ξ|F_{t_n}]` per path.
    pub fn conditional(&self, n: usize) -> Vec<f64> {
        self.solution.y_node(n)
    }

    pub fn solution(&self) -> &BsdeSolution {
        &self.solution
    }

    pub fn audit(&self) -> &GeneratorAssumptionReport {
        &self.audit
    }

    pub fn report(&self, nodes: &[usize]) -> GExpectationReport {
        let grid = self.solution.grid();
        GExpectationReport {
            generator: self.solution.generator().label().to_string(),
            terminal: self.solution.terminal_label().to_string(),
            value: self.value(),
            se: self.se(),
            by_atom: self.by_atom(),
            conditional: nodes
                .iter()
                .filter(|&&n| n <= grid.steps())
                .map(|&n| {
                    let v = self.conditional(n);
                    NodeSummary {
                        node: n,
                        time: grid.time(n),
                        mean: stats::mean(&v),
                        se: stats::std_error(&v),
                        rms: stats::rms(&v),
                    }
                })
                .collect(),
        }
    }
}

pub fn g_expectation(g: &Generator, xi: &TerminalCondition, scenario: &Scenario, cfg: &GConfig) -> Result<GExpectation> {
    let audit = admit(g, cfg)?;
    let solution = solve_lsmc(g, xi, scenario, &cfg.lsmc)?;
    Ok(GExpectation { solution, audit })
}

/// `|E_g[I_A ξ] − E_g[I_A ζ]|` for one event `A`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventCheck {
    pub event: String,
    pub frequency: f64,
    pub direct: f64,
    pub nested: f64,
    pub se: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalExpectation {
    pub node: usize,
    pub time: f64,
    pub values: Vec<f64>,
    pub events: Vec<EventCheck>,
}

impl ConditionalExpectation {
    pub fn all_pass(&self) -> bool {
        self.events.iter().all(|e| e.pass)
    }
}

fn splits_at(scenario: &Scenario, n: usize) -> Vec<Partition> {
    if n == 0 {
        return Vec::new();
    }
    let t = scenario.grid().time(n);
    vec![Partition::above(t, 0, 0.0), Partition::band(t, 0, -0.5, 0.5)]
}

/// Half-space, complement, band and atom events known at node `n`.
pub fn events_at(scenario: &Scenario, n: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    let splits = splits_at(scenario, n);
    if let Some(half) = splits.first() {
        out.push(half.complement());
    }
    out.extend(splits);
    if scenario.enlargement().is_some() {
        for i in 0..scenario.atoms() {
            out.push(Partition::atom(i));
        }
    }
    out
}

/// `E_g[ζ]` for an `F_{t_n}`-measurable `ζ` read off a fitted solution,
/// solved on the same paths up to `t_n`.
fn nested_on_same_paths(g: &Generator, zeta: &TerminalCondition, scenario: &Scenario, n: usize, cfg: &GConfig) -> Result<BsdeSolution> {
    solve_lsmc(g, zeta, &scenario.truncated(n)?, &cfg.lsmc)
}

/// `Y_t` per path, with the identity `E_g[I_A ξ] = E_g[I_A Y_t]` audited
/// over [`events_at`] and the whole space.
pub fn conditional_g_expectation(
    g: &Generator,
    xi: &TerminalCondition,
    node: usize,
    scenario: &Scenario,
    cfg: &GConfig,
) -> Result<ConditionalExpectation> {
    let grid = *scenario.grid();
    if node > grid.steps() {
        return Err(LabError::invalid(format!("node {node} lies beyond the grid")));
    }
    admit(g, cfg)?;
    // Strata on the audited events from `t_n` on, so `Y_t` is fitted per event.
    let mut xi = xi.clone();
    if node < grid.steps() {
        for p in splits_at(scenario, node) {
            xi = xi.with_partition(p);
        }
    }
    let xi = &xi;
    let sol = solve_lsmc(g, xi, scenario, &cfg.lsmc)?;
    let values = sol.y_node(node);
    let mut events = Vec::new();
    let mut cases: Vec<Option<Partition>> = vec![None];
    cases.extend(events_at(scenario, node).into_iter().map(Some));
    for event in cases {
        let (label, frequency, direct) = match &event {
            None => ("all".to_string(), 1.0, sol.clone()),
            Some(p) => {
                let hits = (0..scenario.paths()).filter(|&m| p.holds(&scenario.view(m))).count();
                (
                    p.label().to_string(),
                    hits as f64 / scenario.paths() as f64,
                    solve_lsmc(g, &xi.restricted_to(p.clone()), scenario, &cfg.lsmc)?,
                )
            }
        };
        let indicator = |m: usize| match &event {
            None => 1.0,
            Some(p) => {
                if p.holds(&scenario.view(m)) {
                    1.0
                } else {
                    0.0
                }
            }
        };
        let (nested_value, nested_pathwise): (f64, Vec<f64>) = if node == grid.steps() {
            (direct.y0(), direct.pathwise_y0().to_vec())
        } else if node == 0 {
            let v: Vec<f64> = (0..scenario.paths()).map(|m| indicator(m) * values[m]).collect();
            (stats::mean(&v), v)
        } else {
            let zeta = match &event {
                None => sol.as_terminal(node)?,
                Some(p) => sol.as_terminal(node)?.restricted_to(p.clone()),
            };
            let nested = nested_on_same_paths(g, &zeta, scenario, node, cfg)?;
            (nested.y0(), nested.pathwise_y0().to_vec())
        };
        let diff: Vec<f64> = direct
            .pathwise_y0()
            .iter()
            .zip(&nested_pathwise)
            .map(|(a, b)| a - b)
            .collect();
        let se = stats::std_error(&diff);
        let tolerance = cfg.tol.noise(se);
        let gap = (direct.y0() - nested_value).abs();
        events.push(EventCheck {
            event: label,
            frequency,
            direct: direct.y0(),
            nested: nested_value,
            se,
            tolerance,
            pass: gap <= tolerance,
        });
    }
    Ok(ConditionalExpectation {
        node,
        time: grid.time(node),
        values,
        events,
    })
}

/// Axiom table for one driver.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport {
    pub generator: String,
    pub checks: Vec<Check>,
    /// Largest observed `‖ΔY_t‖ / ‖Δξ‖`.
    pub stability_constant: f64,
    pub stability_bound: f64,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn quarter_nodes(grid: &TimeGrid) -> Result<[usize; 4]> {
    let n = grid.steps();
    if n < 4 || n % 4 != 0 {
        return Err(LabError::invalid(format!("the axiom checks need a step count divisible by 4, got {n}")));
    }
    Ok([0, n / 4, n / 2, 3 * n / 4])
}

fn diff_at(a: &BsdeSolution, b: &BsdeSolution, n: usize) -> Vec<f64> {
    (0..a.paths()).map(|m| a.y(m, n) - b.y(m, n)).collect()
}

/// RMS difference at `t1` between the solution and the nested solve of its
/// own `Y_{t2}` on independent paths.
pub fn time_consistency_residual(
    g: &Generator,
    sol: &BsdeSolution,
    t1: usize,
    t2: usize,
    seed_tag: u64,
    cfg: &GConfig,
) -> Result<f64> {
    if !(t1 < t2 && t2 < sol.grid().steps()) {
        return Err(LabError::invalid(format!("need t1 < t2 < N, got {t1}, {t2}")));
    }
    let scenario = sol.scenario();
    let fresh = scenario.fresh(t2, scenario.paths(), rng::child_seed(sol.seed(), seed_tag))?;
    let nested = solve_lsmc(g, &sol.as_terminal(t2)?, &fresh, &cfg.lsmc)?;
    let (direct, _) = sol.evaluate(t1, &fresh)?;
    let diff: Vec<f64> = (0..fresh.paths()).map(|m| nested.y(m, t1) - direct[m]).collect();
    Ok(stats::rms(&diff))
}

/// Items of the axiom list for `g`, checked on every terminal of `family`.
pub fn axiom_suite(g: &Generator, family: &[TerminalCondition], scenario: &Scenario, cfg: &GConfig) -> Result<AxiomReport> {
    admit(g, cfg)?;
    if family.is_empty() {
        return Err(LabError::invalid("the axiom suite needs at least one terminal"));
    }
    let grid = *scenario.grid();
    let nodes = quarter_nodes(&grid)?;
    let n_steps = grid.steps();
    let mid = nodes[2];
    let tol = cfg.tol;
    let solve = |xi: &TerminalCondition| solve_lsmc(g, xi, scenario, &cfg.lsmc);
    let sols: Vec<BsdeSolution> = family.iter().map(solve).collect::<Result<_>>()?;
    let mut checks = Vec::new();

    // Monotonicity
    let indicator = TerminalCondition::indicator_positive();
    for (xi, base) in family.iter().zip(&sols) {
        for lower in [xi.shifted(-0.5), xi.combine(1.0, &indicator, -1.0)?] {
            let low = solve(&lower)?;
            let mut worst = f64::INFINITY;
            let mut worst_tol = 0.0;
            let mut suspicious = false;
            for &n in &nodes {
                let d = diff_at(base, &low, n);
                let (mean, se) = (stats::mean(&d), stats::std_error(&d));
                if mean + tol.noise(se) < worst + worst_tol {
                    worst = mean;
                    worst_tol = tol.noise(se);
                }
                suspicious |= mean.abs() <= tol.noise(se);
            }
            let label = format!("{} >= {}", xi.label(), lower.label());
            let detail = if suspicious {
                "difference within noise at some node while the terminals differ"
            } else {
                ""
            };
            checks.push(Check::at_most("g-expectation/monotonicity", label, -worst, worst_tol).with_detail(detail));
        }
    }

    // Zero-one law on B = {W_{T/2} > 0}
    let b = Partition::above(grid.time(mid), 0, 0.0);
    for xi in family {
        let base = solve(&xi.clone().with_partition(b.clone()))?;
        let restricted = solve(&xi.restricted_to(b.clone()))?;
        let mut worst: f64 = 0.0;
        for &n in &nodes[2..] {
            let d: Vec<f64> = (0..scenario.paths())
                .map(|m| {
                    let ind = if b.holds(&scenario.view(m)) { 1.0 } else { 0.0 };
                    restricted.y(m, n) - ind * base.y(m, n)
                })
                .collect();
            worst = worst.max(stats::rms(&d));
        }
        checks.push(Check::at_most(
            "g-expectation/zero-one-law",
            format!("E_g[1B {}|F_t] = 1B E_g[{}|F_t]", xi.label(), xi.label()),
            worst,
            tol.regression,
        ));
    }

    // L2 stability
    let k = g.lipschitz();
    let horizon = grid.horizon();
    let bound_at = |n: usize| ((k + k * k) * (horizon - (grid.time(n) - grid.origin()))).exp() * 1.05;
    let mut stability_constant: f64 = 0.0;
    let mut stability_bound = f64::INFINITY;
    let mut pairs = Vec::new();
    for i in 0..sols.len() {
        for j in i + 1..sols.len() {
            pairs.push((i, j));
        }
    }
    if pairs.is_empty() {
        pairs.push((0, usize::MAX));
    }
    for (i, j) in pairs {
        let (other, other_label) = if j == usize::MAX {
            (solve(&family[0].shifted(1.0))?, format!("{}+1", family[0].label()))
        } else {
            (sols[j].clone(), family[j].label().to_string())
        };
        let dxi = stats::rms(&diff_at(&sols[i], &other, n_steps));
        if dxi == 0.0 {
            continue;
        }
        let mut worst: f64 = 0.0;
        let mut worst_bound = f64::INFINITY;
        for n in [0, mid] {
            let c = stats::rms(&diff_at(&sols[i], &other, n)) / dxi;
            if c / bound_at(n) > worst / worst_bound {
                worst = c;
                worst_bound = bound_at(n);
            }
        }
        stability_constant = stability_constant.max(worst);
        stability_bound = stability_bound.min(worst_bound);
        checks.push(Check::at_most(
            "g-expectation/l2-stability",
            format!("{} vs {}", family[i].label(), other_label),
            worst,
            worst_bound,
        ));
    }

    // F_t-measurable terminal
    let wt = TerminalCondition::brownian_at(grid.time(mid));
    let sol_wt = solve(&wt)?;
    let mut worst: f64 = 0.0;
    for m in 0..scenario.paths() {
        let target = scenario.w(m, mid)[0];
        for n in mid..=n_steps {
            worst = worst.max((sol_wt.y(m, n) - target).abs());
        }
    }
    checks.push(Check::at_most(
        "g-expectation/measurable-terminal",
        format!("E_g[{}|F_t] = {} for t >= {}", wt.label(), wt.label(), grid.time(mid)),
        worst,
        tol.exact,
    ));

    // Constant preserving
    for c in [-1.0, 0.0, 2.0] {
        let s = solve(&TerminalCondition::constant(c))?;
        let mut worst: f64 = 0.0;
        for m in 0..scenario.paths() {
            for n in 0..=n_steps {
                worst = worst.max((s.y(m, n) - c).abs());
            }
        }
        checks.push(Check::at_most(
            "g-expectation/constant-preserving",
            format!("E_g[{c}|F_t] = {c}"),
            worst,
            0.0,
        ));
    }

    // Time consistency on independent paths
    let pairs = [(nodes[1], nodes[2]), (nodes[1], nodes[3]), (nodes[2], nodes[3])];
    for (i, (xi, sol)) in family.iter().zip(&sols).enumerate() {
        let mut worst: f64 = 0.0;
        for (k, &(t1, t2)) in pairs.iter().enumerate() {
            worst = worst.max(time_consistency_residual(g, sol, t1, t2, (i * pairs.len() + k) as u64, cfg)?);
        }
        checks.push(Check::at_most(
            "g-expectation/time-consistency",
            format!("E_g[E_g[{}|F_t2]|F_t1] = E_g[{}|F_t1]", xi.label(), xi.label()),
            worst,
            tol.regression,
        ));
    }

    // E_g[Y_t] = E_g[ξ]
    for (i, (xi, sol)) in family.iter().zip(&sols).enumerate() {
        let fresh = scenario.fresh(mid, scenario.paths(), rng::child_seed(sol.seed(), 1000 + i as u64))?;
        let nested = solve_lsmc(g, &sol.as_terminal(mid)?, &fresh, &cfg.lsmc)?;
        let se = (sol.y0_se().powi(2) + nested.y0_se().powi(2)).sqrt();
        checks.push(Check::at_most(
            "g-expectation/expectation-of-conditional",
            format!("E_g[E_g[{}|F_t]] = E_g[{}]", xi.label(), xi.label()),
            (nested.y0() - sol.y0()).abs(),
            tol.noise(se),
        ));
    }

    Ok(AxiomReport {
        generator: g.label().to_string(),
        checks,
        stability_constant,
        stability_bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementRow {
    pub steps: usize,
    pub paths: usize,
    pub residual: f64,
}

/// Time-consistency residual for `(t1, t2) = (T/4, T/2)` along a sequence of
/// `(steps, paths)` levels, each simulated with `seed`.
pub fn time_consistency_refinement(
    g: &Generator,
    xi: &TerminalCondition,
    horizon: f64,
    levels: &[(usize, usize)],
    seed: u64,
    cfg: &GConfig,
) -> Result<Vec<RefinementRow>> {
    admit(g, cfg)?;
    levels
        .iter()
        .map(|&(steps, paths)| {
            let grid = TimeGrid::new(horizon, steps)?;
            let nodes = quarter_nodes(&grid)?;
            let scenario = Scenario::brownian(BrownianPaths::simulate(grid, g.dim(), paths, seed)?);
            let sol = solve_lsmc(g, xi, &scenario, &cfg.lsmc)?;
            Ok(RefinementRow {
                steps,
                paths,
                residual: time_consistency_residual(g, &sol, nodes[1], nodes[2], 0, cfg)?,
            })
        })
        .collect()
}

/// Whether no level has a larger residual than its predecessor; residuals
/// at or below `floor` count as converged.
pub fn refinement_shrinks(rows: &[RefinementRow], floor: f64) -> bool {
    rows.len() >= 2 && rows.windows(2).all(|w| w[1].residual <= w[0].residual.max(floor))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingRow {
    pub terminal: String,
    pub node: usize,
    /// `mean(Y¹_n − Y²_n)`
    pub gap: f64,
    pub se: f64,
    pub ordered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectationComparison {
    pub upper: String,
    pub lower: String,
    /// `g¹ ≥ g²` on every probe of the audit box.
    pub pointwise_dominance: bool,
    pub dominance_witness: Option<String>,
    pub rows: Vec<OrderingRow>,
    pub all_ordered: bool,
    /// Pointwise dominance implies ordered conditional values.
    pub forward_direction: Check,
    /// Difference-quotient test of dominance when the family is ordered.
    pub converse: Option<ConverseReport>,
}

/// Compares `E_{g¹}[·|F_t]` with `E_{g²}[·|F_t]` on a terminal family.
pub fn expectation_comparison(
    upper: &Generator,
    lower: &Generator,
    family: &[TerminalCondition],
    scenario: &Scenario,
    cfg: &GConfig,
    converse: Option<&ConverseConfig>,
) -> Result<ExpectationComparison> {
    admit(upper, cfg)?;
    admit(lower, cfg)?;
    let grid = *scenario.grid();
    let nodes = quarter_nodes(&grid)?;
    let mut r = rng::keyed(cfg.audit_seed, rng::PROBES, 10);
    let mut dominance_witness = None;
    {
        use rand::Rng;
        let bx = cfg.audit_box;
        for _ in 0..cfg.audit_probes {
            let t = r.random_range(0.0..bx.t_max);
            let y = r.random_range(-bx.y_max..=bx.y_max);
            let z: Vec<f64> = (0..upper.dim()).map(|_| r.random_range(-bx.z_max..=bx.z_max)).collect();
            let gap = upper.eval(t, y, &z) - lower.eval(t, y, &z);
            if gap < -1e-12 {
                dominance_witness = Some(format!("g1 - g2 = {gap:.6} at t={t:.4}, y={y:.4}, z={z:.4?}"));
                break;
            }
        }
    }
    let pointwise_dominance = dominance_witness.is_none();
    let mut rows = Vec::new();
    for xi in family {
        let s1 = solve_lsmc(upper, xi, scenario, &cfg.lsmc)?;
        let s2 = solve_lsmc(lower, xi, scenario, &cfg.lsmc)?;
        for &n in &[nodes[0], nodes[2]] {
            let (gap, se) = if n == 0 {
                let d: Vec<f64> = s1.pathwise_y0().iter().zip(s2.pathwise_y0()).map(|(a, b)| a - b).collect();
                (s1.y0() - s2.y0(), stats::std_error(&d))
            } else {
                let d = diff_at(&s1, &s2, n);
                (stats::mean(&d), stats::std_error(&d))
            };
            rows.push(OrderingRow {
                terminal: xi.label().to_string(),
                node: n,
                gap,
                se,
                ordered: gap >= -cfg.tol.noise(se),
            });
        }
    }
    let all_ordered = rows.iter().all(|r| r.ordered);
    let forward_direction = Check::flag(
        "g-expectation/comparison",
        format!("{} >= {} pointwise => ordered expectations", upper.label(), lower.label()),
        !pointwise_dominance || all_ordered,
        if pointwise_dominance {
            format!("pointwise dominance observed; ordered: {all_ordered}")
        } else {
            "no pointwise dominance; implication vacuous".to_string()
        },
    );
    let converse = match converse {
        Some(c) if all_ordered => Some(converse_comparison(lower, upper, family, scenario, c)?),
        _ => None,
    };
    Ok(ExpectationComparison {
        upper: upper.label().to_string(),
        lower: lower.label().to_string(),
        pointwise_dominance,
        dominance_witness,
        rows,
        all_ordered,
        forward_direction,
        converse,
    })
}

/// With `U` uniform on `{−1, +1}` and `ξ = U·W_T`, compares the two
/// per-atom values of `E_g[ξ|F_0]`.
pub fn enlargement_symmetry(g: &Generator, scenario: &Scenario, cfg: &GConfig) -> Result<Check> {
    admit(g, cfg)?;
    let e = scenario
        .enlargement()
        .ok_or_else(|| LabError::invalid("the symmetry check needs an enlargement variable"))?;
    let mut atoms = e.atoms().to_vec();
    atoms.sort_by(f64::total_cmp);
    if atoms != [-1.0, 1.0] {
        return Err(LabError::invalid("the symmetry check needs U supported on {-1, +1}"));
    }
    let xi = TerminalCondition::with_atom("U*W_T", |w, u| u * w[0]);
    let sol = solve_lsmc(g, &xi, scenario, &cfg.lsmc)?;
    let by = sol.y0_by_atom();
    let (a, b) = (&by[0], &by[1]);
    let se = (a.se.powi(2) + b.se.powi(2)).sqrt();
    Ok(Check::at_most(
        "g-expectation/enlargement-symmetry",
        format!("E_g[U W_T | U=-1] = E_g[U W_T | U=+1] for {}", g.label()),
        (a.y0 - b.y0).abs(),
        cfg.tol.noise(se),
    )
    .with_detail(format!("atom values {:.6} and {:.6}", a.y0, b.y0)))
}
