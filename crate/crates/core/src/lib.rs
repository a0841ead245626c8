//! Numerical laboratory for Lipschitz BSDEs `dY = −g(t,Y,Z)dt + Z dW`,
//! `Y_T = ξ`: regression and lattice solvers, closed forms, g-expectations,
//! difference-quotient probes of the driver, and structural test suites.

pub mod check;
pub mod error;
pub mod experiment;
pub mod forward;
pub mod generator;
pub mod gexp;
pub mod regression;
pub mod representation;
pub mod rng;
pub mod scenario;
pub mod solver;
pub mod stats;
pub mod stochastic;
pub mod terminal;

pub use check::{Check, Tolerances};
pub use error::{LabError, Result};
pub use experiment::{catalog_listing, run_experiment, ExperimentConfig, ExperimentKind, ReportBundle, RunOptions};
pub use forward::{check_h_assumptions, euler_maruyama, ForwardModel, ForwardPaths, ForwardSpec, StateBox};
pub use generator::{builtin, check_a_assumptions, Generator, GeneratorFlags, GeneratorSpec, ProbeBox};
pub use gexp::{
    axiom_suite, conditional_g_expectation, enlargement_symmetry, expectation_comparison, g_expectation,
    time_consistency_refinement, GConfig, GExpectation,
};
pub use representation::{
    axiom_equivalence_suite, characterization_reports, characterization_suite, converse_comparison, difference_quotient_brownian,
    difference_quotient_forward, BrownianProbe, ConverseConfig, DEFAULT_EPSILONS, Direction, ForwardProbe, Property, QuotientConfig,
    RepresentationReport,
};
pub use scenario::{PathView, Scenario};
pub use solver::{
    apriori_estimate_audit, closed_form_linear, closed_form_value, solve_lsmc, solve_tree, transposition_residual,
    BsdeSolution, DualTestProcess, Estimator, LsmcConfig, SolverTag, TreeSolution,
};
pub use stochastic::{BrownianPaths, EnlargementVariable, Event, EventSpec, Measurability, TimeGrid};
pub use terminal::{Partition, Source, TerminalCondition, TerminalKind};
