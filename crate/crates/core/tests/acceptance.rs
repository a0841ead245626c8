//! Acceptance criteria, one line per criterion. Runs with its own harness so
//! the lines are always printed.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use bsde_lab::gexp::refinement_shrinks;
use bsde_lab::stats;
use bsde_lab::*;

const SEED: u64 = 7;

type Outcome = std::result::Result<(bool, String), String>;

fn scenario(n: usize, m: usize) -> Scenario {
    Scenario::brownian(BrownianPaths::simulate(TimeGrid::new(1.0, n).unwrap(), 1, m, SEED).unwrap())
}

fn g(label: &str) -> Generator {
    builtin(label).unwrap()
}

fn err(e: LabError) -> String {
    e.to_string()
}

fn single_threaded<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(f)
}

fn linear_oracle() -> Outcome {
    let start = Instant::now();
    let (y0, rmse) = single_threaded(|| -> std::result::Result<(f64, f64), LabError> {
        let s = scenario(64, 1 << 14);
        let sol = solve_lsmc(&g("linear(0,1,0)"), &TerminalCondition::brownian_affine(0.0, 1.0), &s, &LsmcConfig::default())?;
        let sq: Vec<f64> = (0..s.paths())
            .map(|m| {
                let exact = s.w(m, 32)[0] + 0.5;
                (sol.y(m, 32) - exact).powi(2)
            })
            .collect();
        Ok((sol.y0(), stats::mean(&sq).sqrt()))
    })
    .map_err(err)?;
    let elapsed = start.elapsed();
    let pass = (y0 - 1.0).abs() <= 0.02 && rmse <= 0.03 && elapsed <= Duration::from_secs(30);
    Ok((
        pass,
        format!("|Y_0 - 1| = {:.3e}, RMSE(Y_0.5) = {rmse:.3e}, {:.2}s single-threaded", (y0 - 1.0).abs(), elapsed.as_secs_f64()),
    ))
}

fn discount_oracle() -> Outcome {
    let s = scenario(64, 1 << 14);
    let sol = solve_lsmc(&g("discount(1)"), &TerminalCondition::constant(1.0), &s, &LsmcConfig::default()).map_err(err)?;
    // y' = y backward from y(1) = 1
    let exact = (-1f64).exp();
    let d = (sol.y0() - exact).abs();
    Ok((d <= 0.01, format!("Y_0 = {:.6}, |Y_0 - e^-1| = {d:.3e}", sol.y0())))
}

fn ambiguity_driver() -> Outcome {
    let s = scenario(64, 1 << 14);
    let k = g("kappa_abs_z(0.5)");
    let cfg = GConfig::default();
    let up = g_expectation(&k, &TerminalCondition::brownian_affine(0.0, 1.0), &s, &cfg).map_err(err)?.value();
    let down = g_expectation(&k, &TerminalCondition::brownian_affine(0.0, -1.0), &s, &cfg).map_err(err)?.value();
    // Girsanov: sup over drifts |θ| ≤ κ of E[θ T] = κ T
    let pass = (up - 0.5).abs() <= 0.02 && (down - 0.5).abs() <= 0.02;
    Ok((pass, format!("E_g[W_T] = {up:.6}, E_g[-W_T] = {down:.6}")))
}

fn tree_equivalence() -> Outcome {
    let s = scenario(16, 1 << 14);
    let xi = TerminalCondition::brownian_affine(0.0, 1.0);
    let mut worst = (0.0f64, String::new());
    for spec in GeneratorSpec::catalog() {
        let gen = spec.build(1).map_err(err)?;
        let a = solve_lsmc(&gen, &xi, &s, &LsmcConfig::default()).map_err(err)?.y0();
        let b = solve_tree(&gen, &xi, 1.0, 16).map_err(err)?.y0();
        if (a - b).abs() >= worst.0 {
            worst = ((a - b).abs(), spec.to_string());
        }
    }
    Ok((worst.0 <= 0.02, format!("worst |lsmc - tree| = {:.3e} ({})", worst.0, worst.1)))
}

fn transposition_identity() -> Outcome {
    let k = g("kappa_abs_z(0.5)");
    let mut totals = Vec::new();
    let mut pass = true;
    for (n, m) in [(64, 1 << 14), (128, 1 << 16)] {
        let s = scenario(n, m);
        let sol = solve_lsmc(&k, &TerminalCondition::cosine(), &s, &LsmcConfig::default()).map_err(err)?;
        let tests = DualTestProcess::random_family(&s, 0, 20, SEED).map_err(err)?;
        let r = transposition_residual(&sol, &tests, 0, n).map_err(err)?;
        pass &= r.all_pass();
        totals.push(r.total_residual());
    }
    pass &= totals[1] < totals[0];
    Ok((pass, format!("total residual {:.3e} -> {:.3e} over 20 test processes", totals[0], totals[1])))
}

fn representation_convergence() -> Outcome {
    let cfg = QuotientConfig { seed: SEED, ..Default::default() };
    let probe = BrownianProbe { t: 0.0, y: 0.0, z: vec![1.0], epsilons: DEFAULT_EPSILONS.to_vec() };
    let r = difference_quotient_brownian(&g("kappa_abs_z(0.5)"), &probe, &cfg).map_err(err)?;
    let mut pass = r.monotone && r.final_error <= 0.03 && (r.target - 0.5).abs() < 1e-15;
    let analytic = QuotientConfig { analytic: true, ..cfg };
    let mut linear_worst = 0.0f64;
    for spec in ["zero", "linear(0,1,0)", "discount(1)"] {
        let lin = difference_quotient_brownian(&g(spec), &probe, &analytic).map_err(err)?;
        linear_worst = lin.rows.iter().map(|r| r.l2_error).fold(linear_worst, f64::max);
    }
    pass &= linear_worst <= 1e-3;
    Ok((
        pass,
        format!(
            "kappa|z| final error {:.3e}, {} inversion(s); linear catalog worst {linear_worst:.3e}",
            r.final_error, r.inversions
        ),
    ))
}

fn forward_representation() -> Outcome {
    let cfg = QuotientConfig { seed: SEED, ..Default::default() };
    let model = ForwardSpec::Linear { a: 1.0, b0: 0.0, c: 1.0 }.build();
    let probe = ForwardProbe { t: 0.0, x: vec![1.0], y: 0.0, p: vec![1.0], epsilons: DEFAULT_EPSILONS.to_vec() };
    let r = difference_quotient_forward(&g("linear(0,1,0)"), &model, &probe, &cfg).map_err(err)?;
    // g(0, 0, σ p) + p b(0, x) = 1 + 1
    let target = 2.0;
    let last = r.rows.last().map(|row| row.estimate).unwrap_or(f64::NAN);
    let ladder: Vec<String> = r.rows.iter().map(|row| format!("{:.4}", row.estimate)).collect();
    Ok(((last - target).abs() <= 0.05, format!("D_eps = [{}] against 2.0", ladder.join(", "))))
}

fn comparison_strictness() -> Outcome {
    let s = scenario(64, 1 << 14);
    let cfg = LsmcConfig::default();
    let upper = g("kappa_abs_z(0.5)");
    let lower = g("linear(0,0.5,0)");
    let gap = |beta: f64| -> std::result::Result<(f64, f64), LabError> {
        let xi = TerminalCondition::brownian_affine(0.0, beta);
        let a = solve_lsmc(&upper, &xi, &s, &cfg)?;
        let b = solve_lsmc(&lower, &xi, &s, &cfg)?;
        let diff: Vec<f64> = a.pathwise_y0().iter().zip(b.pathwise_y0()).map(|(x, y)| x - y).collect();
        Ok((stats::mean(&diff), stats::std_error(&diff)))
    };
    let (strict, _) = gap(-1.0).map_err(err)?;
    let (equal, se) = gap(1.0).map_err(err)?;
    // Z ≡ −1 under both drivers, so the gap is 2·κ·E∫|Z|dt = 1
    let tol = Tolerances::default();
    let pass = (strict - 1.0).abs() <= 0.05 && equal.abs() <= tol.noise(se);
    Ok((pass, format!("gap(-W_T) = {strict:.6}, gap(W_T) = {equal:.3e} (3 SE = {:.3e})", tol.noise(se))))
}

fn axiom_suite_criterion() -> Outcome {
    let s = scenario(64, 1 << 14);
    let cfg = GConfig::default();
    let family = vec![
        TerminalCondition::brownian_affine(0.0, 1.0),
        TerminalCondition::cosine(),
        TerminalCondition::indicator_positive(),
        TerminalCondition::square(),
    ];
    let mut pass = true;
    let mut notes = Vec::new();
    for spec in ["zero", "kappa_abs_z(0.5)", "linear(0,1,0)"] {
        let gen = g(spec);
        let r = axiom_suite(&gen, &family, &s, &cfg).map_err(err)?;
        let failed: Vec<&str> = r.checks.iter().filter(|c| !c.pass).map(|c| c.id.as_str()).collect();
        let rows = time_consistency_refinement(
            &gen,
            &TerminalCondition::cosine(),
            1.0,
            &[(16, 1 << 10), (32, 1 << 12), (64, 1 << 14)],
            SEED,
            &cfg,
        )
        .map_err(err)?;
        let last = rows.last().map_or(f64::NAN, |r| r.residual);
        let ok = failed.is_empty() && last <= 0.03 && refinement_shrinks(&rows, cfg.tol.exact);
        pass &= ok;
        let ladder: Vec<String> = rows.iter().map(|r| format!("{:.1e}", r.residual)).collect();
        notes.push(format!(
            "{spec}: {}/{} checks{} refine [{}]",
            r.checks.len() - failed.len(),
            r.checks.len(),
            if failed.is_empty() { String::new() } else { format!(" (failed {})", failed.join(",")) },
            ladder.join(" ")
        ));
    }
    Ok((pass, notes.join("; ")))
}

fn characterization() -> Outcome {
    let s = scenario(64, 1 << 14);
    let cfg = GConfig::default();
    let mut inconsistent = Vec::new();
    for spec in ["zero", "kappa_abs_z(0.5)", "linear(0,1,0)", "discount(1)"] {
        let gen = g(spec);
        for property in Property::ALL {
            let directions = [Direction::GeneratorToSolution, Direction::SolutionToGenerator];
            for r in characterization_reports(&gen, property, &directions, &s, &cfg).map_err(err)? {
                if !r.consistent {
                    inconsistent.push(format!("{spec}/{property}/{}", r.direction));
                }
            }
        }
    }
    let d = characterization_suite(&g("discount(1)"), Property::TranslationInvariance, Direction::SolutionToGenerator, &s, &cfg)
        .map_err(err)?;
    let expected_gap = 1.0 - (-1f64).exp();
    let witness_ok = !d.solution.holds && (d.solution.max_gap - expected_gap).abs() <= 0.01;
    let quadratic = Generator::new("z+0.1z^2", 1, 1.0, GeneratorFlags::NONE, |_, _, z| z[0] + 0.1 * z[0] * z[0]).map_err(err)?;
    let gate = characterization_suite(&quadratic, Property::Convexity, Direction::GeneratorToSolution, &s, &cfg);
    let gated = matches!(&gate, Err(e) if e.to_string().contains("A1 violated"));
    let pass = inconsistent.is_empty() && witness_ok && gated;
    Ok((
        pass,
        format!(
            "{} inconsistent suite(s){}; discount translation gap {:.4} (target {expected_gap:.4}); quadratic driver {}",
            inconsistent.len(),
            if inconsistent.is_empty() { String::new() } else { format!(" [{}]", inconsistent.join(", ")) },
            d.solution.max_gap,
            if gated { "refused by the A1 audit" } else { "NOT refused" }
        ),
    ))
}

const LINEAR_CONFIG: &str = "experiment.kind = solve
grid.T = 1.0
grid.N = 64
paths.M = 2^14
paths.seed = 7
generator.kind = linear
generator.b = 1
terminal = affine(0,1)
";

fn determinism() -> Outcome {
    let cfg = ExperimentConfig::parse(LINEAR_CONFIG).map_err(err)?;
    let run = |threads: usize| -> std::result::Result<(String, String, String), LabError> {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
            let b = run_experiment(&cfg, LINEAR_CONFIG, &RunOptions::default())?;
            let series = b.series.as_ref().map(|t| t.to_csv()).transpose()?.unwrap_or_default();
            Ok((b.results.to_csv()?, series, b.verdicts_json()?))
        })
    };
    let a = run(1).map_err(err)?;
    let b = run(1).map_err(err)?;
    let c = run(4).map_err(err)?;
    let pass = a == b && a == c && !a.0.is_empty() && !a.1.is_empty();
    Ok((
        pass,
        format!("results.csv {} B, series.csv {} B, verdicts.json {} B identical across 3 runs (1, 1, 4 threads)", a.0.len(), a.1.len(), a.2.len()),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("linear oracle match", linear_oracle),
        ("discount oracle", discount_oracle),
        ("ambiguity driver", ambiguity_driver),
        ("tree equivalence", tree_equivalence),
        ("transposition identity", transposition_identity),
        ("representation convergence", representation_convergence),
        ("forward-form representation", forward_representation),
        ("comparison and strictness", comparison_strictness),
        ("axiom suite", axiom_suite_criterion),
        ("characterization suites", characterization),
        ("determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = run().unwrap_or_else(|e| (false, format!("error: {e}")));
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {:>2} {:<28} {}  {detail} [{:.1}s]",
            i + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criterion(s) failed");
        ExitCode::FAILURE
    }
}
