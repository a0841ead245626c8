use bsde_lab::experiment::TerminalSpec;
use bsde_lab::*;
use proptest::prelude::*;
use rand::RngCore;

fn terminals() -> impl Strategy<Value = TerminalCondition> {
    prop_oneof![
        (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| TerminalCondition::brownian_affine(a, b)),
        Just(TerminalCondition::cosine()),
        Just(TerminalCondition::square()),
        Just(TerminalCondition::indicator_positive()),
    ]
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn grid_nodes_are_ordered_and_addressable(origin in -1.0..1.0f64, len in 0.1..5.0f64, steps in 1usize..200) {
        let grid = TimeGrid::with_origin(origin, len, steps).unwrap();
        let nodes = grid.nodes();
        prop_assert_eq!(nodes.len(), steps + 1);
        prop_assert_eq!(nodes[0], origin);
        prop_assert_eq!(nodes[steps], origin + len);
        prop_assert!(nodes.windows(2).all(|w| w[0] < w[1]));
        for n in 0..=steps {
            prop_assert_eq!(grid.node_of(grid.time(n)), Some(n));
        }
    }

    #[test]
    fn keyed_streams_are_reproducible(seed in any::<u64>(), stream in 0u64..8, path in 0u64..1 << 20) {
        let mut a = rng::keyed(seed, stream, path);
        let mut b = rng::keyed(seed, stream, path);
        let mut c = rng::keyed(seed, stream, path + 1);
        let xa: Vec<u64> = (0..4).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..4).map(|_| b.next_u64()).collect();
        let xc: Vec<u64> = (0..4).map(|_| c.next_u64()).collect();
        prop_assert_eq!(&xa, &xb);
        prop_assert_ne!(&xa, &xc);
    }

    #[test]
    fn simulated_paths_are_deterministic(seed in any::<u64>(), steps in 1usize..16, paths in 1usize..64) {
        let grid = TimeGrid::new(1.0, steps).unwrap();
        let a = BrownianPaths::simulate(grid.clone(), 1, paths, seed).unwrap();
        let b = BrownianPaths::simulate(grid, 1, paths, seed).unwrap();
        prop_assert_eq!(a.increments(), b.increments());
        for m in 0..paths {
            let sum: f64 = (0..steps).map(|n| a.increment(m, n)[0]).sum();
            prop_assert!((a.terminal(m)[0] - sum).abs() <= 1e-12);
        }
    }

    #[test]
    fn generator_labels_round_trip(a in -10.0..10.0f64, b in -10.0..10.0f64, c in -10.0..10.0f64, k in 0.0..5.0f64) {
        for spec in [
            GeneratorSpec::Zero,
            GeneratorSpec::Linear { a, b, c },
            GeneratorSpec::KappaAbsZ { kappa: k },
            GeneratorSpec::Discount { beta: k },
        ] {
            prop_assert_eq!(GeneratorSpec::parse(&spec.to_string()).unwrap(), spec);
        }
    }

    #[test]
    fn terminal_labels_parse(alpha in -10.0..10.0f64, beta in -10.0..10.0f64) {
        prop_assert_eq!(
            TerminalSpec::parse(&format!("affine({alpha},{beta})")).unwrap(),
            TerminalSpec::Affine { alpha, beta }
        );
        prop_assert_eq!(
            TerminalSpec::parse(&format!("constant({alpha})")).unwrap(),
            TerminalSpec::Constant { value: alpha }
        );
    }

    #[test]
    fn config_parser_never_panics(text in "\\PC{0,200}") {
        let _ = ExperimentConfig::parse(&text);
    }

    #[test]
    fn config_parser_never_panics_on_key_value_lines(
        lines in prop::collection::vec(("[a-z_.]{1,12}", "[ -~]{0,20}"), 0..12)
    ) {
        let text: String = lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        let _ = ExperimentConfig::parse(&text);
    }

    #[test]
    fn lattice_comparison_in_terminal(xi in terminals(), shift in 0.0..2.0f64, kappa in 0.0..1.0f64, steps in 2usize..14) {
        let g = GeneratorSpec::KappaAbsZ { kappa }.build(1).unwrap();
        let lo = solve_tree(&g, &xi, 1.0, steps).unwrap();
        let hi = solve_tree(&g, &xi.shifted(shift), 1.0, steps).unwrap();
        for (a, b) in lo.y.iter().flatten().zip(hi.y.iter().flatten()) {
            prop_assert!(a <= &(b + 1e-12));
        }
    }

    #[test]
    fn lattice_comparison_in_driver(xi in terminals(), k1 in 0.0..1.0f64, dk in 0.0..1.0f64, steps in 2usize..14) {
        let small = GeneratorSpec::KappaAbsZ { kappa: k1 }.build(1).unwrap();
        let large = GeneratorSpec::KappaAbsZ { kappa: k1 + dk }.build(1).unwrap();
        let a = solve_tree(&small, &xi, 1.0, steps).unwrap();
        let b = solve_tree(&large, &xi, 1.0, steps).unwrap();
        prop_assert!(a.y0() <= b.y0() + 1e-12);
    }

    #[test]
    fn lattice_positive_homogeneity(xi in terminals(), lambda in 0.0..3.0f64, kappa in 0.0..1.0f64, steps in 2usize..14) {
        let g = GeneratorSpec::KappaAbsZ { kappa }.build(1).unwrap();
        let base = solve_tree(&g, &xi, 1.0, steps).unwrap();
        let scaled = solve_tree(&g, &xi.scaled(lambda), 1.0, steps).unwrap();
        for (a, b) in base.y.iter().flatten().zip(scaled.y.iter().flatten()) {
            prop_assert!(close(lambda * a, *b), "{} vs {}", lambda * a, b);
        }
    }

    #[test]
    fn lattice_translation_invariance(xi in terminals(), c in -2.0..2.0f64, b in -1.0..1.0f64, kappa in 0.0..1.0f64, steps in 2usize..14) {
        for spec in [GeneratorSpec::Linear { a: 0.0, b, c: 0.0 }, GeneratorSpec::KappaAbsZ { kappa }] {
            let g = spec.build(1).unwrap();
            let base = solve_tree(&g, &xi, 1.0, steps).unwrap();
            let moved = solve_tree(&g, &xi.shifted(c), 1.0, steps).unwrap();
            prop_assert!(close(base.y0() + c, moved.y0()), "{spec}: {} vs {}", base.y0() + c, moved.y0());
        }
    }

    #[test]
    fn lattice_linear_driver_matches_closed_form(a in -1.0..1.0f64, b in -1.0..1.0f64, c in -1.0..1.0f64, beta in -2.0..2.0f64) {
        // Y_n = s_n·W_n + y_n with Z_n = s_{n+1}
        let steps = 12;
        let dt = 1.0 / steps as f64;
        let g = GeneratorSpec::Linear { a, b, c }.build(1).unwrap();
        let tree = solve_tree(&g, &TerminalCondition::brownian_affine(0.0, beta), 1.0, steps).unwrap();
        let mut y = 0.0;
        let mut slope = beta;
        for _ in 0..steps {
            y = (y + dt * (b * slope + c)) / (1.0 - a * dt);
            slope /= 1.0 - a * dt;
        }
        prop_assert!(close(tree.y0(), y), "{} vs {}", tree.y0(), y);
    }
}
