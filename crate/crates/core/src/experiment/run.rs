use crate::check::{Check, Tolerances};
use crate::error::{LabError, Result};
use crate::forward::euler_maruyama;
use crate::generator::{check_a_assumptions, Generator, GeneratorSpec, ProbeBox};
use crate::gexp::{
    axiom_suite, conditional_g_expectation, enlargement_symmetry, g_expectation, refinement_shrinks,
    time_consistency_refinement, GConfig,
};
use crate::representation::{
    axiom_equivalence_suite, characterization_reports, converse_comparison, difference_quotient_brownian,
    difference_quotient_forward, BrownianProbe, ConverseConfig, Direction, ForwardProbe, QuotientConfig,
    RepresentationReport,
};
use crate::scenario::Scenario;
use crate::solver::{
    closed_form_linear, solve_lsmc, solve_tree, transposition_residual, BsdeSolution, DualTestProcess,
};
use crate::stats;
use crate::stochastic::{BrownianPaths, EnlargementVariable, TimeGrid};
use crate::terminal::{Source, TerminalCondition};

use super::svg::{Chart, Line};
use super::{Cell, ExperimentConfig, ExperimentKind, Provenance, ReportBundle, RunOptions, Table, TerminalSpec};

const AUDIT_PROBES: usize = 4096;

struct Ctx {
    cfg: ExperimentConfig,
    tol: Tolerances,
    scale: f64,
}

struct Output {
    results: Table,
    series: Option<Table>,
    chart: Option<Chart>,
    verdicts: Vec<Check>,
}

/// Runs `cfg`; `config_text` only feeds the provenance hash.
///
/// An assumption-gate refusal becomes a failing verdict; other errors
/// propagate.
pub fn run_experiment(cfg: &ExperimentConfig, config_text: &str, opts: &RunOptions) -> Result<ReportBundle> {
    if !(opts.tolerance_scale > 0.0) || !opts.tolerance_scale.is_finite() {
        return Err(LabError::invalid("tolerance scale must be positive"));
    }
    let mut cfg = cfg.clone();
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    let ctx = Ctx {
        tol: cfg.tol.scaled(opts.tolerance_scale),
        scale: opts.tolerance_scale,
        cfg,
    };
    let out = match dispatch(&ctx) {
        Ok(out) => out,
        Err(e) => match gate_failure(&e) {
            Some(msg) => {
                let mut results = Table::new(&["check", "message"]);
                results.push(vec!["assumptions".into(), msg.clone().into()]);
                Output {
                    results,
                    series: None,
                    chart: None,
                    verdicts: vec![Check::flag("generators/assumptions", msg, false, "driver refused by the audit")],
                }
            }
            None => return Err(e),
        },
    };
    Ok(ReportBundle {
        provenance: Provenance::new(config_text, ctx.cfg.kind, ctx.cfg.seed, ctx.scale),
        results: out.results,
        series: out.series,
        chart: out.chart,
        verdicts: out.verdicts,
    })
}

fn gate_failure(e: &LabError) -> Option<String> {
    match e {
        LabError::InvalidArgument(msg)
            if ["A1 violated", "A3 violated", "A5 violated"].iter().any(|p| msg.starts_with(p)) =>
        {
            Some(msg.clone())
        }
        _ => None,
    }
}

fn dispatch(ctx: &Ctx) -> Result<Output> {
    match ctx.cfg.kind {
        ExperimentKind::Solve => solve(ctx),
        ExperimentKind::TranspositionCheck => transposition(ctx),
        ExperimentKind::GExpectation => gexpectation(ctx),
        ExperimentKind::AxiomSuite => axioms(ctx),
        ExperimentKind::Representation => representation(ctx),
        ExperimentKind::ConverseComparison => converse(ctx),
        ExperimentKind::Characterization => characterization(ctx),
    }
}

impl Ctx {
    fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.cfg.horizon, self.cfg.steps)
    }

    fn scenario(&self) -> Result<Scenario> {
        let c = &self.cfg;
        let brownian = BrownianPaths::simulate(self.grid()?, c.dim, c.paths, c.seed)?;
        let mut s = Scenario::brownian(brownian.clone());
        if let Some(f) = &c.forward {
            s = s.with_forward(euler_maruyama(&f.spec.build(), &brownian, 0, &[f.x0])?)?;
        }
        if let Some(e) = &c.enlargement {
            s = s.with_enlargement(EnlargementVariable::sample(&e.atoms, &e.probs, c.paths, c.seed)?)?;
        }
        Ok(s)
    }

    fn generator(&self, spec: Option<GeneratorSpec>) -> Result<Generator> {
        spec.ok_or_else(|| LabError::MissingKey("generator.kind".into()))?
            .build(self.cfg.dim)
    }

    fn terminal(&self) -> Result<TerminalCondition> {
        Ok(self
            .cfg
            .terminal
            .ok_or_else(|| LabError::MissingKey("terminal".into()))?
            .build())
    }

    fn gconfig(&self) -> GConfig {
        GConfig {
            lsmc: self.cfg.lsmc,
            audit_seed: self.cfg.seed,
            tol: self.tol,
            ..GConfig::default()
        }
    }

    fn quotient(&self) -> Result<QuotientConfig> {
        Ok(QuotientConfig {
            grid: self.grid()?,
            sub_steps: self.cfg.probe.sub_steps,
            paths: self.cfg.paths,
            seed: self.cfg.seed,
            lsmc: self.cfg.lsmc,
            analytic: self.cfg.probe.analytic,
            audit_box: ProbeBox::default(),
            audit_probes: AUDIT_PROBES,
        })
    }
}

fn require_lipschitz(g: &Generator, seed: u64) -> Result<()> {
    let audit = check_a_assumptions(g, &ProbeBox::default(), AUDIT_PROBES, seed)?;
    if !audit.a1_pass {
        return Err(LabError::invalid(format!(
            "A1 violated: `{}` has Lipschitz ratio {:.6} above the declared {}",
            g.label(),
            audit.lipschitz_ratio,
            audit.declared_lipschitz
        )));
    }
    Ok(())
}

/// Mean of `Y` over paths at every node, with a one-standard-deviation band.
fn node_series(sols: &[&BsdeSolution]) -> (Table, Chart) {
    let mut table = Table::new(&["solution", "node", "time", "mean", "std", "lower", "upper"]);
    let mut lines = Vec::new();
    for sol in sols {
        let grid = sol.grid();
        let label = format!("{} | {}", sol.generator().label(), sol.terminal_label());
        let (mut xs, mut ys, mut lo, mut hi) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for n in 0..=grid.steps() {
            let v = sol.y_node(n);
            let (mean, sd) = (stats::mean(&v), stats::std_dev(&v));
            table.push(vec![
                label.clone().into(),
                n.into(),
                grid.time(n).into(),
                mean.into(),
                sd.into(),
                (mean - sd).into(),
                (mean + sd).into(),
            ]);
            xs.push(grid.time(n));
            ys.push(mean);
            lo.push(mean - sd);
            hi.push(mean + sd);
        }
        lines.push(Line {
            label,
            xs,
            ys,
            band: Some((lo, hi)),
        });
    }
    let chart = Chart {
        title: "Y mean with one-sd band".into(),
        x_label: "t".into(),
        y_label: "Y_t".into(),
        log_x: false,
        log_y: false,
        lines,
    };
    (table, chart)
}

fn linear_coefficients(spec: Option<GeneratorSpec>) -> Option<(f64, f64, f64)> {
    match spec? {
        GeneratorSpec::Zero => Some((0.0, 0.0, 0.0)),
        GeneratorSpec::Linear { a, b, c } => Some((a, b, c)),
        GeneratorSpec::Discount { beta } => Some((-beta, 0.0, 0.0)),
        GeneratorSpec::KappaAbsZ { .. } => None,
    }
}

/// `Ok(None)` when an oracle does not apply to this configuration.
fn optional<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(LabError::InvalidArgument(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn solve(ctx: &Ctx) -> Result<Output> {
    let c = &ctx.cfg;
    let g = ctx.generator(c.generator)?;
    require_lipschitz(&g, c.seed)?;
    let xi = ctx.terminal()?;
    let scenario = ctx.scenario()?;
    let sol = solve_lsmc(&g, &xi, &scenario, &c.lsmc)?;
    let apriori = crate::solver::apriori_estimate_audit(&sol);

    let mut results = Table::new(&["solver", "y0", "se", "abs_diff_vs_lsmc", "apriori_ratio"]);
    results.push(vec![
        "lsmc".into(),
        sol.y0().into(),
        sol.y0_se().into(),
        Cell::Empty,
        apriori.ratio.into(),
    ]);
    let mut verdicts = Vec::new();
    let mid = c.steps / 2;

    let plain = c.forward.is_none() && c.enlargement.is_none() && c.dim == 1;
    if let (true, Some((a, b, cc))) = (plain, linear_coefficients(c.generator)) {
        if let Some(exact) = optional(closed_form_linear(a, b, cc, &xi, &scenario))? {
            let diff = (sol.y0() - exact.y0()).abs();
            results.push(vec!["closed-form".into(), exact.y0().into(), 0.0.into(), diff.into(), Cell::Empty]);
            verdicts.push(Check::at_most(
                "bsde-solver/closed-form-y0",
                format!("|Y_0(lsmc) - Y_0(closed form)| for {} with {}", g.label(), xi.label()),
                diff,
                ctx.tol.scalar,
            ));
            let d: Vec<f64> = (0..c.paths).map(|m| sol.y(m, mid) - exact.y(m, mid)).collect();
            verdicts.push(Check::at_most(
                "bsde-solver/closed-form-path",
                format!("path RMSE of Y at t = {}", scenario.grid().time(mid)),
                stats::rms(&d),
                ctx.tol.regression,
            ));
        }
    }
    if plain && xi.source() != Source::Forward {
        if let Some(tree) = optional(solve_tree(&g, &xi, c.horizon, c.steps))? {
            let diff = (sol.y0() - tree.y0()).abs();
            results.push(vec!["tree".into(), tree.y0().into(), 0.0.into(), diff.into(), Cell::Empty]);
            verdicts.push(Check::at_most(
                "bsde-solver/tree-y0",
                format!("|Y_0(lsmc) - Y_0(tree)| for {} with {}", g.label(), xi.label()),
                diff,
                ctx.tol.scalar,
            ));
        }
    }
    if let Some(e) = c.expect {
        verdicts.push(Check::at_most(
            "bsde-solver/reference-y0",
            format!("|Y_0 - {}|", e.y0),
            (sol.y0() - e.y0).abs(),
            e.tolerance * ctx.scale,
        ));
    }
    let (series, chart) = node_series(&[&sol]);
    Ok(Output {
        results,
        series: Some(series),
        chart: Some(chart),
        verdicts,
    })
}

fn transposition(ctx: &Ctx) -> Result<Output> {
    let c = &ctx.cfg;
    let g = ctx.generator(c.generator)?;
    require_lipschitz(&g, c.seed)?;
    let xi = ctx.terminal()?;
    let scenario = ctx.scenario()?;
    let sol = solve_lsmc(&g, &xi, &scenario, &c.lsmc)?;
    let mut results = Table::new(&["start", "end", "test", "lhs", "rhs", "residual", "se", "tolerance", "pass"]);
    let mut verdicts = Vec::new();
    let mut intervals = vec![0];
    if c.steps >= 2 {
        intervals.push(c.steps / 2);
    }
    for s in intervals {
        let tests = DualTestProcess::random_family(&scenario, s, c.transposition_tests, c.seed)?;
        let report = transposition_residual(&sol, &tests, s, c.steps)?;
        let mut worst = (0.0, String::new());
        for row in &report.rows {
            let tolerance = row.tolerance * ctx.scale;
            let ratio = row.residual / tolerance.max(f64::MIN_POSITIVE);
            if ratio >= worst.0 {
                worst = (ratio, row.label.clone());
            }
            results.push(vec![
                s.into(),
                c.steps.into(),
                row.label.clone().into(),
                row.lhs.into(),
                row.rhs.into(),
                row.residual.into(),
                row.se.into(),
                tolerance.into(),
                (row.residual <= tolerance).into(),
            ]);
        }
        verdicts.push(
            Check::at_most(
                "bsde-solver/transposition-identity",
                format!(
                    "duality residual / max(3 SE, 5 dt scale) on [{}, {}] over {} test processes",
                    scenario.grid().time(s),
                    scenario.grid().time(c.steps),
                    report.rows.len()
                ),
                worst.0,
                1.0,
            )
            .with_detail(format!("worst test {}", worst.1)),
        );
    }
    let (series, chart) = node_series(&[&sol]);
    Ok(Output {
        results,
        series: Some(series),
        chart: Some(chart),
        verdicts,
    })
}

fn gexpectation(ctx: &Ctx) -> Result<Output> {
    let c = &ctx.cfg;
    let g = ctx.generator(c.generator)?;
    let xi = ctx.terminal()?;
    let scenario = ctx.scenario()?;
    let gcfg = ctx.gconfig();
    let e = g_expectation(&g, &xi, &scenario, &gcfg)?;
    let mut results = Table::new(&["quantity", "atom", "value", "se", "paths"]);
    results.push(vec!["E_g".into(), "all".into(), e.value().into(), e.se().into(), c.paths.into()]);
    for a in e.by_atom() {
        results.push(vec![
            "E_g|U".into(),
            a.value.map_or(format!("atom{}", a.atom), |v| v.to_string()).into(),
            a.y0.into(),
            a.se.into(),
            a.paths.into(),
        ]);
    }
    let mut verdicts = Vec::new();
    let cond0 = conditional_g_expectation(&g, &xi, 0, &scenario, &gcfg)?;
    let same = cond0.values.iter().zip(e.conditional(0)).all(|(a, b)| a.to_bits() == b.to_bits());
    verdicts.push(Check::flag(
        "g-expectation/definition-consistency",
        "E_g[xi] equals E_g[xi|F_0] on every path",
        same,
        "",
    ));
    let mid = c.steps / 2;
    let cond = conditional_g_expectation(&g, &xi, mid, &scenario, &gcfg)?;
    for ev in &cond.events {
        verdicts.push(
            Check::at_most(
                "g-expectation/conditional-identity",
                format!("|E_g[1_A xi] - E_g[1_A Y_t]| for A = {} at t = {}", ev.event, cond.time),
                (ev.direct - ev.nested).abs(),
                ev.tolerance,
            )
            .with_detail(format!("P(A) = {:.4}", ev.frequency)),
        );
    }
    if let Some(en) = &c.enlargement {
        let mut atoms = en.atoms.clone();
        atoms.sort_by(f64::total_cmp);
        if atoms == [-1.0, 1.0] && matches!(c.generator, Some(GeneratorSpec::KappaAbsZ { .. } | GeneratorSpec::Zero)) {
            verdicts.push(enlargement_symmetry(&g, &scenario, &gcfg)?);
        }
    }
    if let Some(ex) = c.expect {
        verdicts.push(Check::at_most(
            "g-expectation/reference-value",
            format!("|E_g[xi] - {}|", ex.y0),
            (e.value() - ex.y0).abs(),
            ex.tolerance * ctx.scale,
        ));
    }
    let (series, chart) = node_series(&[e.solution()]);
    Ok(Output {
        results,
        series: Some(series),
        chart: Some(chart),
        verdicts,
    })
}

fn axioms(ctx: &Ctx) -> Result<Output> {
    let c = &ctx.cfg;
    let g = ctx.generator(c.generator)?;
    let specs = c.terminals();
    let family: Vec<TerminalCondition> = specs.iter().map(TerminalSpec::build).collect();
    let scenario = ctx.scenario()?;
    let gcfg = ctx.gconfig();
    let report = axiom_suite(&g, &family, &scenario, &gcfg)?;
    let mut results = Table::new(&["id", "label", "observed", "tolerance", "pass", "detail"]);
    for ch in &report.checks {
        results.push(vec![
            ch.id.clone().into(),
            ch.label.clone().into(),
            ch.observed.into(),
            ch.tolerance.into(),
            ch.pass.into(),
            ch.detail.clone().into(),
        ]);
    }
    let mut verdicts = report.checks.clone();
    let (mut series, mut chart) = (None, None);
    let probe = family.iter().find(|t| t.source() == Source::Brownian && !t.needs_atom() && t.affine().is_none());
    if let (Some(xi), true, None, None) = (probe, c.steps % 16 == 0, &c.forward, &c.enlargement) {
        let levels = [
            (c.steps / 4, (c.paths / 16).max(64)),
            (c.steps / 2, (c.paths / 4).max(64)),
            (c.steps, c.paths),
        ];
        let rows = time_consistency_refinement(&g, xi, c.horizon, &levels, c.seed, &gcfg)?;
        let mut t = Table::new(&["steps", "paths", "residual"]);
        for r in &rows {
            t.push(vec![r.steps.into(), r.paths.into(), r.residual.into()]);
        }
        let shrinks = refinement_shrinks(&rows, ctx.tol.exact);
        verdicts.push(Check::flag(
            "g-expectation/time-consistency-refinement",
            format!("time-consistency residual for {} non-increasing under refinement", xi.label()),
            shrinks,
            rows.iter()
                .map(|r| format!("({}, {}): {:.3e}", r.steps, r.paths, r.residual))
                .collect::<Vec<_>>()
                .join("; "),
        ));
        chart = Some(Chart {
            title: format!("time-consistency residual, {}", xi.label()),
            x_label: "N".into(),
            y_label: "RMS residual".into(),
            log_x: true,
            log_y: true,
            lines: vec![Line {
                label: g.label().to_string(),
                xs: rows.iter().map(|r| r.steps as f64).collect(),
                ys: rows.iter().map(|r| r.residual).collect(),
                band: None,
            }],
        });
        series = Some(t);
    }
    Ok(Output {
        results,
        series,
        chart,
        verdicts,
    })
}

fn quotient_table(report: &RepresentationReport) -> Table {
    let mut t = Table::new(&["epsilon", "estimate", "target", "l2_error", "se", "conditional_mean_form", "solver"]);
    for r in &report.rows {
        t.push(vec![
            r.epsilon.into(),
            r.estimate.into(),
            report.target.into(),
            r.l2_error.into(),
            r.se.into(),
            r.conditional_mean_form.into(),
            r.solver.to_string().into(),
        ]);
    }
    t
}

fn representation(ctx: &Ctx) -> Result<Output> {
    let c = &ctx.cfg;
    let g = ctx.generator(c.generator)?;
    let q = ctx.quotient()?;
    let p = &c.probe;
    let report = match &c.forward {
        Some(f) => difference_quotient_forward(
            &g,
            &f.spec.build(),
            &ForwardProbe {
                t: p.t,
                x: vec![p.x],
                y: p.y,
                p: vec![p.p],
                epsilons: p.epsilons.clone(),
            },
            &q,
        )?,
        None => difference_quotient_brownian(
            &g,
            &BrownianProbe {
                t: p.t,
                y: p.y,
                z: p.z.clone(),
                epsilons: p.epsilons.clone(),
            },
            &q,
        )?,
    };
    let tolerance = p.tolerance * ctx.scale;
    let verdicts = vec![
        Check::at_most(
            "representation/convergence",
            format!("final L2 error of D_eps for {} at target {}", g.label(), report.target),
            report.final_error,
            tolerance,
        ),
        Check::flag(
            "representation/monotone-error",
            "L2 error non-increasing along the eps ladder (at most one inversion within 1 SE)",
            report.monotone,
            format!("{} inversion(s)", report.inversions),
        ),
    ];
    let chart = Chart {
        title: format!("difference quotient error, {}", g.label()),
        x_label: "epsilon".into(),
        y_label: "L2 error".into(),
        log_x: true,
        log_y: true,
        lines: vec![Line {
            label: "L2 error".into(),
            xs: report.rows.iter().map(|r| r.epsilon).collect(),
            ys: report.rows.iter().map(|r| r.l2_error).collect(),
            band: None,
        }],
    };
    Ok(Output {
        results: quotient_table(&report),
        series: None,
        chart: Some(chart),
        verdicts,
    })
}

fn converse(ctx: &Ctx) -> Result<Output> {
    let c = &ctx.cfg;
    let lower = ctx.generator(c.lower)?;
    let upper = ctx.generator(c.upper)?;
    let specs = if c.terminals().is_empty() {
        vec![
            TerminalSpec::Affine { alpha: 0.0, beta: 1.0 },
            TerminalSpec::Affine { alpha: 0.0, beta: -1.0 },
            TerminalSpec::Square,
            TerminalSpec::Cosine,
        ]
    } else {
        c.terminals()
    };
    let family: Vec<TerminalCondition> = specs.iter().map(TerminalSpec::build).collect();
    let scenario = ctx.scenario()?;
    let cc = ConverseConfig {
        quotient: ctx.quotient()?,
        epsilon: c.converse.epsilon,
        times: c.converse.times.clone(),
        ys: c.converse.ys.clone(),
        zs: c.converse.zs.clone(),
        lsmc: c.lsmc,
        tol: ctx.tol,
    };
    let report = converse_comparison(&lower, &upper, &family, &scenario, &cc)?;
    let mut results = Table::new(&["t", "y", "z", "d_lower", "d_upper", "se", "violated"]);
    for p in &report.probes {
        let z = p.z.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
        results.push(vec![
            p.t.into(),
            p.y.into(),
            z.into(),
            p.lower.into(),
            p.upper.into(),
            p.se.into(),
            p.violated.into(),
        ]);
    }
    let mut series = Table::new(&["terminal", "gap", "se", "ordered"]);
    for h in &report.hypothesis {
        series.push(vec![h.terminal.clone().into(), h.gap.into(), h.se.into(), h.ordered.into()]);
    }
    let detail = match report.counterexamples.first() {
        Some(p) => format!(
            "{} counterexample(s); first at t={}, y={}, z={:?}: {:.4} > {:.4}",
            report.counterexamples.len(),
            p.t,
            p.y,
            p.z,
            p.lower,
            p.upper
        ),
        None => "no probe shows g1 > g2".into(),
    };
    let verdicts = vec![Check::flag(
        "representation/converse-comparison",
        format!(
            "Y({}) <= Y({}) on the family => {} <= {} on the probe grid",
            report.lower, report.upper, report.lower, report.upper
        ),
        report.consistent,
        format!(
            "ordering {}; dominance {}; {detail}",
            if report.hypothesis_holds { "holds" } else { "fails" },
            if report.dominance_holds { "holds" } else { "fails" }
        ),
    )];
    let idx: Vec<f64> = (0..report.probes.len()).map(|i| i as f64).collect();
    let gap: Vec<f64> = report.probes.iter().map(|p| p.upper - p.lower).collect();
    let noise: Vec<f64> = report.probes.iter().map(|p| ctx.tol.noise(p.se)).collect();
    let chart = Chart {
        title: format!("D_eps({}) - D_eps({}) per probe", report.upper, report.lower),
        x_label: "probe".into(),
        y_label: "difference".into(),
        log_x: false,
        log_y: false,
        lines: vec![Line {
            label: "upper - lower".into(),
            band: Some((
                gap.iter().zip(&noise).map(|(g, n)| g - n).collect(),
                gap.iter().zip(&noise).map(|(g, n)| g + n).collect(),
            )),
            xs: idx,
            ys: gap,
        }],
    };
    Ok(Output {
        results,
        series: Some(series),
        chart: Some(chart),
        verdicts,
    })
}

fn direction_id(d: Direction) -> &'static str {
    match d {
        Direction::GeneratorToSolution => "generator-to-solution",
        Direction::SolutionToGenerator => "solution-to-generator",
    }
}

fn characterization(ctx: &Ctx) -> Result<Output> {
    let c = &ctx.cfg;
    let g = ctx.generator(c.generator)?;
    let scenario = ctx.scenario()?;
    let gcfg = ctx.gconfig();
    let mut results = Table::new(&[
        "property",
        "direction",
        "premise",
        "conclusion",
        "consistent",
        "max_gap",
        "witness",
    ]);
    let mut verdicts = Vec::new();
    for &property in &c.properties {
        for r in characterization_reports(&g, property, &c.directions, &scenario, &gcfg)? {
            let direction = r.direction;
            let witness = r.solution.witness.clone().unwrap_or_default();
            results.push(vec![
                property.to_string().into(),
                direction.to_string().into(),
                r.premise.into(),
                r.conclusion.into(),
                r.consistent.into(),
                r.solution.max_gap.into(),
                witness.clone().into(),
            ]);
            verdicts.push(Check::flag(
                &format!("representation/characterization/{property}/{}", direction_id(direction)),
                format!("{property} {direction} for {}", g.label()),
                r.consistent,
                format!(
                    "premise {}, conclusion {}, max gap {:.6}{}",
                    r.premise,
                    r.conclusion,
                    r.solution.max_gap,
                    if witness.is_empty() { String::new() } else { format!(", witness {witness}") }
                ),
            ));
        }
    }
    let mut series = Table::new(&[
        "property",
        "generator_level",
        "conditional_level",
        "expectation_level",
        "agree",
        "max_gap",
    ]);
    match axiom_equivalence_suite(&g, &scenario, &gcfg) {
        Ok(eq) => {
            for row in &eq.rows {
                series.push(vec![
                    row.property.to_string().into(),
                    row.generator_level.into(),
                    row.conditional_level.into(),
                    row.expectation_level.into(),
                    row.agree.into(),
                    row.max_gap.into(),
                ]);
                verdicts.push(Check::flag(
                    &format!("g-expectation/axiom-equivalence/{}", row.property),
                    format!("driver, conditional and expectation levels agree on {}", row.property),
                    row.agree,
                    format!(
                        "levels {}/{}/{}",
                        row.generator_level, row.conditional_level, row.expectation_level
                    ),
                ));
            }
        }
        Err(e) if gate_failure(&e).is_some() => {}
        Err(e) => return Err(e),
    }
    Ok(Output {
        results,
        series: (!series.rows.is_empty()).then_some(series),
        chart: None,
        verdicts,
    })
}
