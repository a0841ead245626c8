use bsde_lab::*;

fn g(label: &str) -> Generator {
    builtin(label).unwrap()
}

fn probe(t: f64, y: f64, z: f64) -> BrownianProbe {
    BrownianProbe { t, y, z: vec![z], epsilons: DEFAULT_EPSILONS.to_vec() }
}

fn cfg() -> QuotientConfig {
    QuotientConfig { seed: 7, paths: 1 << 12, ..Default::default() }
}

fn min_driver() -> Generator {
    Generator::new("0.5min(|z|,|y|)", 1, 0.5, GeneratorFlags::NONE, |_, y, z| 0.5 * z[0].abs().min(y.abs())).unwrap()
}

#[test]
fn linear_quotients_are_exact() {
    for analytic in [false, true] {
        let c = QuotientConfig { analytic, ..cfg() };
        let r = difference_quotient_brownian(&g("linear(0,1,0)"), &probe(0.0, 0.0, 1.0), &c).unwrap();
        assert_eq!(r.target, 1.0);
        assert!(r.rows.iter().all(|row| row.l2_error <= 1e-3), "{r:?}");
        let tag = if analytic { SolverTag::ClosedForm } else { SolverTag::Lsmc };
        assert!(r.rows.iter().all(|row| row.solver == tag));
        let zero = difference_quotient_brownian(&g("zero"), &probe(0.25, 0.5, -1.0), &c).unwrap();
        assert!(zero.rows.iter().all(|row| row.estimate.abs() <= 1e-3), "{zero:?}");
    }
}

#[test]
fn kappa_quotient_converges_monotonically() {
    let r = difference_quotient_brownian(&g("kappa_abs_z(0.5)"), &probe(0.0, 0.0, 1.0), &cfg()).unwrap();
    assert_eq!(r.target, 0.5);
    assert!(r.converged(0.03), "{r:?}");
    assert_eq!(r.rows.len(), 4);
    for row in &r.rows {
        let cm = row.conditional_mean_form.unwrap();
        assert!((cm - row.estimate).abs() <= 0.03, "{row:?}");
    }
}

#[test]
fn probes_converge_at_eight_grid_times() {
    let c = cfg();
    for spec in ["zero", "kappa_abs_z(0.5)", "linear(0,1,0)", "discount(1)"] {
        for i in 0..8 {
            let t = i as f64 / 10.0;
            let r = difference_quotient_brownian(&g(spec), &probe(t, 1.0, -1.0), &c).unwrap();
            assert!(r.final_error <= 0.03, "{spec} at t = {t}: {r:?}");
        }
    }
}

#[test]
fn ladder_and_probe_validation() {
    let c = cfg();
    let k = g("kappa_abs_z(0.5)");
    let mut p = probe(0.0, 0.0, 1.0);
    p.epsilons = vec![0.1, 0.2];
    assert!(difference_quotient_brownian(&k, &p, &c).is_err());
    p.epsilons = vec![0.013];
    assert!(difference_quotient_brownian(&k, &p, &c).is_err());
    assert!(difference_quotient_brownian(&k, &probe(0.3333, 0.0, 1.0), &c).is_err());
    assert!(difference_quotient_brownian(&k, &probe(1.0, 0.0, 1.0), &c).is_err());
    assert!(difference_quotient_brownian(&k, &probe(0.9, 0.0, 1.0), &c).is_err());
    let mut wide = probe(0.0, 0.0, 1.0);
    wide.z = vec![1.0, 0.0];
    assert!(difference_quotient_brownian(&k, &wide, &c).is_err());
    let understated = g("kappa_abs_z(0.5)").with_declared_lipschitz(0.4);
    let e = difference_quotient_brownian(&understated, &probe(0.0, 0.0, 1.0), &c).unwrap_err();
    assert!(e.to_string().contains("A1 violated"), "{e}");
}

#[test]
fn forward_probe_with_brownian_state_reduces_to_brownian_probe() {
    let c = cfg();
    let model = ForwardModel::scalar("W", |_, _| 0.0, |_, _| 1.0, 0.0, 1.0).unwrap();
    let k = g("kappa_abs_z(0.5)");
    let fwd = ForwardProbe { t: 0.25, x: vec![0.0], y: 0.5, p: vec![1.0], epsilons: DEFAULT_EPSILONS.to_vec() };
    let a = difference_quotient_forward(&k, &model, &fwd, &c).unwrap();
    let b = difference_quotient_brownian(&k, &probe(0.25, 0.5, 1.0), &c).unwrap();
    assert_eq!(a.target, b.target);
    for (x, y) in a.rows.iter().zip(&b.rows) {
        assert_eq!(x.estimate.to_bits(), y.estimate.to_bits());
    }
}

#[test]
fn forward_probe_with_constant_drift() {
    let model = ForwardModel::scalar("t", |_, _| 1.0, |_, _| 1.0, 0.0, 2.0).unwrap();
    let fwd = ForwardProbe { t: 0.0, x: vec![0.3], y: 0.0, p: vec![1.0], epsilons: DEFAULT_EPSILONS.to_vec() };
    let r = difference_quotient_forward(&g("zero"), &model, &fwd, &cfg()).unwrap();
    assert_eq!(r.target, 1.0);
    assert!(r.rows.iter().all(|row| row.l2_error <= 1e-9), "{r:?}");
}

#[test]
fn forward_probe_linear_model() {
    let model = ForwardSpec::Linear { a: 1.0, b0: 0.0, c: 1.0 }.build();
    let fwd = ForwardProbe { t: 0.0, x: vec![1.0], y: 0.0, p: vec![1.0], epsilons: DEFAULT_EPSILONS.to_vec() };
    let r = difference_quotient_forward(&g("linear(0,1,0)"), &model, &fwd, &cfg()).unwrap();
    assert_eq!(r.target, 2.0);
    // Y_0 = y + p(E^Q[Γ_ε] − x) with drift x + 1 under Q: (e^ε − 1)(x + 1)/ε → 2
    for row in &r.rows {
        let expansion = (row.epsilon.exp() - 1.0) * 2.0 / row.epsilon;
        assert!((row.estimate - expansion).abs() <= 0.02, "{row:?} vs {expansion}");
    }
    assert!((r.rows.last().unwrap().estimate - 2.0).abs() <= 0.05);
    let bad = ForwardModel::scalar("x^2", |_, x| x * x, |_, _| 1.0, 1.0, 1.0).unwrap();
    assert!(difference_quotient_forward(&g("linear(0,1,0)"), &bad, &fwd, &cfg()).is_err());
}

fn scenario(n: usize, m: usize) -> Scenario {
    Scenario::brownian(BrownianPaths::simulate(TimeGrid::new(1.0, n).unwrap(), 1, m, 7).unwrap())
}

#[test]
fn converse_comparison_cases() {
    let s = scenario(80, 1 << 12);
    let c = ConverseConfig { times: vec![0.0, 0.5], ..Default::default() };
    let lin = g("linear(0,0.5,0)");
    let kap = g("kappa_abs_z(0.5)");
    let full = vec![
        TerminalCondition::brownian_affine(0.0, 1.0),
        TerminalCondition::brownian_affine(0.0, -1.0),
        TerminalCondition::square(),
    ];
    let r = converse_comparison(&lin, &kap, &full, &s, &c).unwrap();
    assert!(r.hypothesis_holds && r.dominance_holds && r.consistent, "{r:?}");
    for p in &r.probes {
        if p.z[0] >= 0.0 {
            assert!((p.upper - p.lower).abs() <= 1e-9, "{p:?}");
        }
    }

    let same = converse_comparison(&kap, &kap, &full, &s, &c).unwrap();
    assert!(same.hypothesis_holds && same.dominance_holds);

    // reversed pair with ξ = −W_T: the ordering fails and every counterexample has z < 0
    let rev = converse_comparison(&kap, &lin, &full[1..2], &s, &c).unwrap();
    assert!(!rev.hypothesis_holds && !rev.dominance_holds && rev.consistent);
    assert!(rev.counterexamples.iter().all(|p| p.z[0] < 0.0));

    // with ξ = W_T alone the solutions coincide, so the family cannot separate the drivers
    let thin = converse_comparison(&kap, &lin, &full[..1], &s, &c).unwrap();
    assert!(thin.hypothesis_holds && !thin.dominance_holds && !thin.consistent);
}

#[test]
fn characterization_examples() {
    let s = scenario(64, 1 << 14);
    let cfg = GConfig::default();
    let both = [Direction::GeneratorToSolution, Direction::SolutionToGenerator];
    for r in characterization_reports(&g("kappa_abs_z(0.5)"), Property::PositiveHomogeneity, &both, &s, &cfg).unwrap() {
        assert!(r.premise && r.conclusion && r.consistent, "{r:?}");
    }
    let ti = characterization_suite(&g("linear(0,1,0)"), Property::TranslationInvariance, Direction::GeneratorToSolution, &s, &cfg).unwrap();
    assert!(ti.solution.holds && ti.consistent);
    let disc = characterization_suite(&g("discount(1)"), Property::TranslationInvariance, Direction::SolutionToGenerator, &s, &cfg).unwrap();
    assert!(!disc.solution.holds && disc.consistent);
    assert!((disc.solution.max_gap - (1.0 - (-1f64).exp())).abs() <= 0.01);
    assert!(disc.solution.witness.is_some());
}

#[test]
fn axiom_equivalences() {
    let s = scenario(32, 1 << 13);
    let cfg = GConfig::default();
    let zero = axiom_equivalence_suite(&g("zero"), &s, &cfg).unwrap();
    assert!(zero.all_agree());
    assert!(zero.rows.iter().all(|r| r.generator_level && r.conditional_level && r.expectation_level));
    for spec in ["kappa_abs_z(0.5)", "linear(0,0.5,0)"] {
        let r = axiom_equivalence_suite(&g(spec), &s, &cfg).unwrap();
        assert!(r.all_agree(), "{spec}: {:?}", r.rows);
    }
    let m = axiom_equivalence_suite(&min_driver(), &s, &cfg).unwrap();
    assert!(m.all_agree(), "{:?}", m.rows);
    let ph = m.rows.iter().find(|r| r.property == Property::PositiveHomogeneity).unwrap();
    assert!(ph.generator_level);
    for r in m.rows.iter().filter(|r| r.property != Property::PositiveHomogeneity) {
        assert!(!r.generator_level && !r.expectation_level, "{r:?}");
    }
    let e = axiom_equivalence_suite(&g("discount(1)"), &s, &cfg).unwrap_err();
    assert!(e.to_string().contains("A5 violated"));
}

#[test]
fn property_and_direction_names() {
    for p in Property::ALL {
        assert_eq!(Property::parse(&p.to_string()).unwrap(), p);
    }
    assert_eq!(Direction::parse("generator=>solution").unwrap(), Direction::GeneratorToSolution);
    assert_eq!(Direction::parse("solution_to_generator").unwrap(), Direction::SolutionToGenerator);
    assert!(Property::parse("monotone").is_err());
}

#[test]
fn time_jump_driver_is_reported_not_asserted() {
    let jump = Generator::new("z after 0.5", 1, 1.0, GeneratorFlags::NONE, |t, _, z| if t >= 0.5 { z[0] } else { 0.0 }).unwrap();
    let c = QuotientConfig { paths: 1 << 10, ..cfg() };
    for t in [0.4, 0.5, 0.6] {
        let r = difference_quotient_brownian(&jump, &probe(t, 0.0, 1.0), &c).unwrap();
        assert_eq!(r.target, if t >= 0.5 { 1.0 } else { 0.0 });
        assert_eq!(r.rows.len(), DEFAULT_EPSILONS.len());
        assert!(r.final_error.is_finite());
    }
}
