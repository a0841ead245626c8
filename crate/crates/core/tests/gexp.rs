use bsde_lab::gexp::{refinement_shrinks, time_consistency_residual};
use bsde_lab::stats;
use bsde_lab::*;

fn scenario(n: usize, m: usize, seed: u64) -> Scenario {
    Scenario::brownian(BrownianPaths::simulate(TimeGrid::new(1.0, n).unwrap(), 1, m, seed).unwrap())
}

fn g(label: &str) -> Generator {
    builtin(label).unwrap()
}

#[test]
fn classical_and_ambiguous_expectations() {
    let s = scenario(64, 1 << 14, 7);
    let cfg = GConfig::default();
    let w = TerminalCondition::brownian_affine(0.0, 1.0);
    let zero = g_expectation(&g("zero"), &w, &s, &cfg).unwrap();
    assert!(zero.value().abs() <= 3.0 * zero.se().max(1.0 / 128.0));
    let k = g_expectation(&g("kappa_abs_z(0.5)"), &w, &s, &cfg).unwrap();
    assert!((k.value() - 0.5).abs() <= 0.02);
}

#[test]
fn a5_gate_refuses_drivers_with_a_constant() {
    let s = scenario(16, 1 << 10, 1);
    let e = g_expectation(&g("linear(0,1,0.5)"), &TerminalCondition::cosine(), &s, &GConfig::default()).unwrap_err();
    assert!(matches!(e, LabError::InvalidArgument(_)));
    assert!(e.to_string().contains("A5 violated"), "{e}");
    assert!(g_expectation(&g("discount(1)"), &TerminalCondition::cosine(), &s, &GConfig::default()).is_err());
}

#[test]
fn conditional_values_for_g_equal_z() {
    let s = scenario(64, 1 << 14, 7);
    let c = conditional_g_expectation(&g("linear(0,1,0)"), &TerminalCondition::brownian_affine(0.0, 1.0), 32, &s, &GConfig::default())
        .unwrap();
    let err: Vec<f64> = (0..s.paths()).map(|m| c.values[m] - (s.w(m, 32)[0] + 0.5)).collect();
    assert!(stats::rms(&err) <= 0.03);
    assert!(c.all_pass(), "{:?}", c.events);
}

#[test]
fn measurable_terminal_and_terminal_node() {
    let s = scenario(32, 1 << 12, 2);
    let cfg = GConfig::default();
    let k = g("kappa_abs_z(0.5)");
    let at_half = TerminalCondition::brownian_at(0.5);
    let c = conditional_g_expectation(&k, &at_half, 16, &s, &cfg).unwrap();
    for m in 0..s.paths() {
        assert!((c.values[m] - s.w(m, 16)[0]).abs() < 1e-10);
    }
    let xi = TerminalCondition::cosine();
    let end = conditional_g_expectation(&k, &xi, 32, &s, &cfg).unwrap();
    for m in 0..s.paths() {
        assert_eq!(end.values[m].to_bits(), xi.eval(&s.view(m)).to_bits());
    }
    assert!(conditional_g_expectation(&k, &xi, 33, &s, &cfg).is_err());
}

#[test]
fn event_identity_holds_for_nonlinear_terminals() {
    let s = scenario(64, 1 << 14, 7);
    let cfg = GConfig::default();
    for xi in [TerminalCondition::cosine(), TerminalCondition::indicator_positive()] {
        for node in [16, 32] {
            let c = conditional_g_expectation(&g("kappa_abs_z(0.5)"), &xi, node, &s, &cfg).unwrap();
            assert!(c.all_pass(), "{} at node {node}: {:?}", xi.label(), c.events);
            assert!(c.events.len() >= 4);
        }
    }
}

#[test]
fn definition_agrees_with_conditional_at_time_zero() {
    let s = scenario(32, 1 << 12, 3);
    let cfg = GConfig::default();
    let k = g("kappa_abs_z(0.5)");
    let xi = TerminalCondition::square();
    let e = g_expectation(&k, &xi, &s, &cfg).unwrap();
    let c = conditional_g_expectation(&k, &xi, 0, &s, &cfg).unwrap();
    assert_eq!(e.conditional(0), c.values);
    // Y_0 is deterministic in the Brownian filtration
    assert!(c.values.iter().all(|v| v.to_bits() == e.value().to_bits()));
}

#[test]
fn time_consistency_for_g_equal_z() {
    let s = scenario(64, 1 << 14, 7);
    let cfg = GConfig::default();
    let lin = g("linear(0,1,0)");
    let sol = solve_lsmc(&lin, &TerminalCondition::brownian_affine(0.0, 1.0), &s, &cfg.lsmc).unwrap();
    assert!(time_consistency_residual(&lin, &sol, 16, 32, 0, &cfg).unwrap() <= 0.03);
    let nested = sol.as_terminal(32).unwrap();
    let inner = solve_lsmc(&lin, &nested, &s.truncated(32).unwrap(), &cfg.lsmc).unwrap();
    let err: Vec<f64> = (0..s.paths()).map(|m| inner.y(m, 16) - (s.w(m, 16)[0] + 0.75)).collect();
    assert!(stats::rms(&err) <= 0.03);
}

#[test]
fn axiom_suite_items() {
    let s = scenario(32, 1 << 13, 5);
    let family = vec![TerminalCondition::brownian_affine(0.0, 1.0), TerminalCondition::cosine()];
    let r = axiom_suite(&g("kappa_abs_z(0.5)"), &family, &s, &GConfig::default()).unwrap();
    assert!(r.all_pass(), "{:?}", r.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>());
    for id in [
        "g-expectation/monotonicity",
        "g-expectation/constant-preserving",
        "g-expectation/time-consistency",
        "g-expectation/measurable-terminal",
        "g-expectation/zero-one-law",
        "g-expectation/expectation-of-conditional",
    ] {
        assert!(r.checks.iter().any(|c| c.id == id), "missing {id}");
    }
    assert!(r.stability_constant <= r.stability_bound);
}

#[test]
fn constants_are_fixed_points() {
    let s = scenario(16, 1 << 10, 4);
    let cfg = GConfig::default();
    for c in [-1.0, 0.0, 2.0] {
        let e = conditional_g_expectation(&g("kappa_abs_z(0.5)"), &TerminalCondition::constant(c), 8, &s, &cfg).unwrap();
        assert!(e.values.iter().all(|&v| v == c));
    }
}

#[test]
fn refinement_levels_shrink() {
    let cfg = GConfig::default();
    let rows = time_consistency_refinement(
        &g("kappa_abs_z(0.5)"),
        &TerminalCondition::cosine(),
        1.0,
        &[(8, 1 << 9), (16, 1 << 11), (32, 1 << 13)],
        7,
        &cfg,
    )
    .unwrap();
    assert_eq!(rows.len(), 3);
    assert!(refinement_shrinks(&rows, cfg.tol.exact), "{rows:?}");
}

#[test]
fn comparison_of_expectations() {
    let s = scenario(32, 1 << 13, 6);
    let cfg = GConfig::default();
    let family = vec![
        TerminalCondition::brownian_affine(0.0, 1.0),
        TerminalCondition::brownian_affine(0.0, -1.0),
        TerminalCondition::square(),
        TerminalCondition::cosine(),
    ];
    let r = expectation_comparison(&g("kappa_abs_z(0.5)"), &g("linear(0,0.5,0)"), &family, &s, &cfg, None).unwrap();
    assert!(r.pointwise_dominance && r.all_ordered && r.forward_direction.pass, "{r:?}");

    let vs_zero = expectation_comparison(&g("kappa_abs_z(0.5)"), &g("zero"), &family[..1], &s, &cfg, None).unwrap();
    assert!(vs_zero.all_ordered);
    assert!(vs_zero.rows.iter().any(|row| row.node == 0 && (row.gap - 0.5).abs() <= 0.02));

    let same = expectation_comparison(&g("kappa_abs_z(0.5)"), &g("kappa_abs_z(0.5)"), &family, &s, &cfg, None).unwrap();
    assert!(same.rows.iter().all(|row| row.gap.abs() <= cfg.tol.noise(row.se)));
}

#[test]
fn enlargement_symmetry_for_symmetric_driver() {
    let base = scenario(32, 1 << 13, 7);
    let u = EnlargementVariable::sample(&[-1.0, 1.0], &[0.5, 0.5], 1 << 13, 7).unwrap();
    let s = base.clone().with_enlargement(u).unwrap();
    let check = enlargement_symmetry(&g("kappa_abs_z(0.5)"), &s, &GConfig::default()).unwrap();
    assert!(check.pass, "{check:?}");
    assert!(enlargement_symmetry(&g("kappa_abs_z(0.5)"), &base, &GConfig::default()).is_err());
}
