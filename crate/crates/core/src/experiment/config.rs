//! Flat `key = value` experiment files with dotted section keys.
//!
//! ```text
//! # comment
//! experiment.kind = solve
//! grid.T = 1.0
//! grid.N = 64
//! generator.kind = kappa_abs_z
//! generator.kappa = 0.5
//! terminal = affine(0,1)
//! ```

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::PathBuf;

use serde::Serialize;

use crate::check::Tolerances;
use crate::error::{LabError, Result};
use crate::forward::ForwardSpec;
use crate::generator::GeneratorSpec;
use crate::representation::{Direction, Property, DEFAULT_EPSILONS};
use crate::solver::{Estimator, LsmcConfig};
use crate::stochastic::{EnlargementVariable, TimeGrid};
use crate::terminal::TerminalCondition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExperimentKind {
    Solve,
    TranspositionCheck,
    GExpectation,
    AxiomSuite,
    Representation,
    ConverseComparison,
    Characterization,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::AxiomSuite,
        ExperimentKind::Characterization,
        ExperimentKind::ConverseComparison,
        ExperimentKind::GExpectation,
        ExperimentKind::Representation,
        ExperimentKind::Solve,
        ExperimentKind::TranspositionCheck,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Solve => "solve",
            ExperimentKind::TranspositionCheck => "transposition-check",
            ExperimentKind::GExpectation => "g-expectation",
            ExperimentKind::AxiomSuite => "axiom-suite",
            ExperimentKind::Representation => "representation",
            ExperimentKind::ConverseComparison => "converse-comparison",
            ExperimentKind::Characterization => "characterization",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Terminal conditions addressable from a config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TerminalSpec {
    /// `α + β·W_T`
    Affine { alpha: f64, beta: f64 },
    Constant { value: f64 },
    Square,
    Cosine,
    IndicatorPositive,
    /// `W` at an intermediate grid time.
    BrownianAt { time: f64 },
    /// `U·W_T` on an enlarged filtration.
    AtomTimesW,
    /// `α + β·Γ_T`
    ForwardAffine { alpha: f64, beta: f64 },
}

impl TerminalSpec {
    pub fn catalog() -> Vec<TerminalSpec> {
        vec![
            TerminalSpec::Affine { alpha: 0.0, beta: 1.0 },
            TerminalSpec::AtomTimesW,
            TerminalSpec::BrownianAt { time: 0.5 },
            TerminalSpec::Constant { value: 1.0 },
            TerminalSpec::Cosine,
            TerminalSpec::ForwardAffine { alpha: 0.0, beta: 1.0 },
            TerminalSpec::IndicatorPositive,
            TerminalSpec::Square,
        ]
    }

    pub fn parse(label: &str) -> Result<Self> {
        let (name, args) = split_call(label)?;
        let want = |n: usize| -> Result<()> {
            if args.len() == n {
                Ok(())
            } else {
                Err(LabError::invalid(format!(
                    "terminal `{name}` takes {n} argument(s), got {}",
                    args.len()
                )))
            }
        };
        match name {
            "affine" => {
                want(2)?;
                Ok(TerminalSpec::Affine { alpha: args[0], beta: args[1] })
            }
            "constant" => {
                want(1)?;
                Ok(TerminalSpec::Constant { value: args[0] })
            }
            "square" => want(0).map(|_| TerminalSpec::Square),
            "cosine" => want(0).map(|_| TerminalSpec::Cosine),
            "indicator_positive" => want(0).map(|_| TerminalSpec::IndicatorPositive),
            "brownian_at" => {
                want(1)?;
                Ok(TerminalSpec::BrownianAt { time: args[0] })
            }
            "atom_times_w" => want(0).map(|_| TerminalSpec::AtomTimesW),
            "forward_affine" => {
                want(2)?;
                Ok(TerminalSpec::ForwardAffine { alpha: args[0], beta: args[1] })
            }
            other => Err(LabError::invalid(format!("unknown terminal `{other}`"))),
        }
    }

    pub fn build(&self) -> TerminalCondition {
        match *self {
            TerminalSpec::Affine { alpha, beta } => TerminalCondition::brownian_affine(alpha, beta),
            TerminalSpec::Constant { value } => TerminalCondition::constant(value),
            TerminalSpec::Square => TerminalCondition::square(),
            TerminalSpec::Cosine => TerminalCondition::cosine(),
            TerminalSpec::IndicatorPositive => TerminalCondition::indicator_positive(),
            TerminalSpec::BrownianAt { time } => TerminalCondition::brownian_at(time),
            TerminalSpec::AtomTimesW => TerminalCondition::with_atom("U*W_T", |w, u| u * w[0]),
            TerminalSpec::ForwardAffine { alpha, beta } => {
                TerminalCondition::forward(format!("{alpha}+{beta}*G_T"), move |x| alpha + beta * x[0])
            }
        }
    }

    /// One-line description for the catalog listing.
    pub fn describe(&self) -> &'static str {
        match self {
            TerminalSpec::Affine { .. } => "alpha + beta*W_T",
            TerminalSpec::Constant { .. } => "deterministic constant",
            TerminalSpec::Square => "W_T^2",
            TerminalSpec::Cosine => "cos(W_T)",
            TerminalSpec::IndicatorPositive => "1{W_T > 0}",
            TerminalSpec::BrownianAt { .. } => "W at an intermediate grid time",
            TerminalSpec::AtomTimesW => "U*W_T, needs enlargement",
            TerminalSpec::ForwardAffine { .. } => "alpha + beta*X_T, needs a forward model",
        }
    }
}

impl fmt::Display for TerminalSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TerminalSpec::Affine { alpha, beta } => write!(f, "affine({alpha},{beta})"),
            TerminalSpec::Constant { value } => write!(f, "constant({value})"),
            TerminalSpec::Square => write!(f, "square"),
            TerminalSpec::Cosine => write!(f, "cosine"),
            TerminalSpec::IndicatorPositive => write!(f, "indicator_positive"),
            TerminalSpec::BrownianAt { time } => write!(f, "brownian_at({time})"),
            TerminalSpec::AtomTimesW => write!(f, "atom_times_w"),
            TerminalSpec::ForwardAffine { alpha, beta } => write!(f, "forward_affine({alpha},{beta})"),
        }
    }
}

fn split_call(label: &str) -> Result<(&str, Vec<f64>)> {
    let label = label.trim();
    let (name, inner) = match label.find('(') {
        Some(i) => {
            let rest = label[i + 1..]
                .strip_suffix(')')
                .ok_or_else(|| LabError::invalid(format!("unbalanced parentheses in `{label}`")))?;
            (label[..i].trim(), rest)
        }
        None => (label, ""),
    };
    let args = inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| LabError::invalid(format!("bad number `{s}` in `{label}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((name, args))
}

/// Forward model together with its starting state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForwardChoice {
    pub spec: ForwardSpec,
    pub x0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeConfig {
    pub t: f64,
    pub y: f64,
    pub z: Vec<f64>,
    pub x: f64,
    pub p: f64,
    pub epsilons: Vec<f64>,
    pub analytic: bool,
    pub sub_steps: usize,
    /// Final-error tolerance of the ladder.
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConverseGrid {
    pub epsilon: f64,
    pub times: Vec<f64>,
    pub ys: Vec<f64>,
    pub zs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Enlargement {
    pub atoms: Vec<f64>,
    pub probs: Vec<f64>,
}

/// User-supplied reference for `Y_0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Expectation {
    pub y0: f64,
    pub tolerance: f64,
}

/// Validated experiment description.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub horizon: f64,
    pub steps: usize,
    pub paths: usize,
    pub seed: u64,
    pub dim: usize,
    pub generator: Option<GeneratorSpec>,
    pub lower: Option<GeneratorSpec>,
    pub upper: Option<GeneratorSpec>,
    pub forward: Option<ForwardChoice>,
    pub terminal: Option<TerminalSpec>,
    pub family: Vec<TerminalSpec>,
    pub probe: ProbeConfig,
    pub converse: ConverseGrid,
    pub properties: Vec<Property>,
    pub directions: Vec<Direction>,
    pub transposition_tests: usize,
    pub enlargement: Option<Enlargement>,
    pub lsmc: LsmcConfig,
    pub tol: Tolerances,
    pub expect: Option<Expectation>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
    key_column: usize,
    value_column: usize,
}

/// Raw key/value pairs with their positions.
#[derive(Debug)]
pub struct RawConfig {
    entries: BTreeMap<String, Entry>,
    used: RefCell<BTreeSet<String>>,
}

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> LabError {
    LabError::Parse {
        line,
        column,
        message: message.into(),
    }
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = match raw.find('#') {
                Some(k) => &raw[..k],
                None => raw,
            };
            if content.trim().is_empty() {
                continue;
            }
            let lead = content.len() - content.trim_start().len();
            let eq = content
                .find('=')
                .ok_or_else(|| parse_error(line, lead + 1, "expected `key = value`"))?;
            let key = content[..eq].trim();
            if key.is_empty() {
                return Err(parse_error(line, eq + 1, "missing key before `=`"));
            }
            if let Some(off) = key.find(|c: char| !(c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '-')) {
                return Err(parse_error(line, lead + off + 1, format!("invalid character in key `{key}`")));
            }
            let after = &content[eq + 1..];
            let value = after.trim();
            let value_column = eq + 2 + (after.len() - after.trim_start().len());
            if value.is_empty() {
                return Err(parse_error(line, eq + 2, format!("missing value for key `{key}`")));
            }
            if let Some(prev) = entries.get(key).map(|e: &Entry| e.line) {
                return Err(parse_error(line, lead + 1, format!("duplicate key `{key}` (first set on line {prev})")));
            }
            entries.insert(
                key.to_string(),
                Entry {
                    value: value.to_string(),
                    line,
                    key_column: lead + 1,
                    value_column,
                },
            );
        }
        Ok(RawConfig {
            entries,
            used: RefCell::new(BTreeSet::new()),
        })
    }

    fn get(&self, key: &str) -> Option<&Entry> {
        let e = self.entries.get(key);
        if e.is_some() {
            self.used.borrow_mut().insert(key.to_string());
        }
        e
    }

    pub fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn string(&self, key: &str) -> Result<String> {
        self.opt_string(key)?.ok_or_else(|| LabError::MissingKey(key.to_string()))
    }

    pub fn opt_string(&self, key: &str) -> Result<Option<String>> {
        Ok(self.get(key).map(|e| e.value.clone()))
    }

    fn typed<T>(&self, key: &str, what: &str, f: impl Fn(&str) -> Option<T>) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(e) => f(&e.value)
                .map(Some)
                .ok_or_else(|| parse_error(e.line, e.value_column, format!("`{key}` expects {what}, got `{}`", e.value))),
        }
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        self.typed(key, "a finite number", |s| s.parse::<f64>().ok().filter(|v| v.is_finite()))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        self.opt_f64(key)?.ok_or_else(|| LabError::MissingKey(key.to_string()))
    }

    pub fn opt_usize(&self, key: &str) -> Result<Option<usize>> {
        self.typed(key, "a non-negative integer", parse_count)
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        self.opt_usize(key)?.ok_or_else(|| LabError::MissingKey(key.to_string()))
    }

    pub fn opt_bool(&self, key: &str) -> Result<Option<bool>> {
        self.typed(key, "true or false", |s| match s {
            "true" => Some(true),
            "false" => Some(false),
            _ => None,
        })
    }

    pub fn opt_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.typed(key, "a comma-separated list of numbers", |s| {
            s.split(',')
                .map(|x| x.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
                .collect()
        })
    }

    /// Re-raises `e` at the position of `key`'s value when it lacks one.
    fn locate(&self, key: &str, e: LabError) -> LabError {
        match (&e, self.entries.get(key)) {
            (LabError::InvalidArgument(msg), Some(entry)) => parse_error(entry.line, entry.value_column, msg.clone()),
            _ => e,
        }
    }

    /// First key that no accessor asked for.
    fn unused(&self) -> Option<(&String, &Entry)> {
        let used = self.used.borrow();
        self.entries
            .iter()
            .filter(|(k, _)| !used.contains(*k))
            .min_by_key(|(_, e)| e.line)
    }
}

/// Integers accept `2^k` as well as plain digits.
fn parse_count(s: &str) -> Option<usize> {
    if let Some((base, exp)) = s.split_once('^') {
        let base: usize = base.trim().parse().ok()?;
        let exp: u32 = exp.trim().parse().ok()?;
        return base.checked_pow(exp);
    }
    s.parse().ok()
}

fn generator_at(raw: &RawConfig, prefix: &str) -> Result<Option<GeneratorSpec>> {
    if let Some(label) = raw.opt_string(prefix)? {
        return GeneratorSpec::parse(&label).map(Some).map_err(|e| raw.locate(prefix, e));
    }
    let kind_key = format!("{prefix}.kind");
    let Some(kind) = raw.opt_string(&kind_key)? else {
        return Ok(None);
    };
    let param = |name: &str, default: Option<f64>| -> Result<f64> {
        let key = format!("{prefix}.{name}");
        match (raw.opt_f64(&key)?, default) {
            (Some(v), _) => Ok(v),
            (None, Some(d)) => Ok(d),
            (None, None) => Err(LabError::MissingKey(key)),
        }
    };
    let spec = match kind.as_str() {
        "zero" => GeneratorSpec::Zero,
        "linear" => GeneratorSpec::Linear {
            a: param("a", Some(0.0))?,
            b: param("b", Some(0.0))?,
            c: param("c", Some(0.0))?,
        },
        "kappa_abs_z" => GeneratorSpec::KappaAbsZ {
            kappa: param("kappa", None)?,
        },
        "discount" => GeneratorSpec::Discount {
            beta: param("beta", None)?,
        },
        other => return Err(raw.locate(&kind_key, LabError::invalid(format!("unknown generator `{other}`")))),
    };
    Ok(Some(spec))
}

fn terminal_at(raw: &RawConfig, prefix: &str) -> Result<Option<TerminalSpec>> {
    if let Some(label) = raw.opt_string(prefix)? {
        return TerminalSpec::parse(&label).map(Some).map_err(|e| raw.locate(prefix, e));
    }
    let kind_key = format!("{prefix}.kind");
    let Some(kind) = raw.opt_string(&kind_key)? else {
        return Ok(None);
    };
    let param = |name: &str, default: f64| -> Result<f64> { Ok(raw.opt_f64(&format!("{prefix}.{name}"))?.unwrap_or(default)) };
    let spec = match kind.as_str() {
        "affine" => TerminalSpec::Affine {
            alpha: param("alpha", 0.0)?,
            beta: param("beta", 1.0)?,
        },
        "constant" => TerminalSpec::Constant {
            value: param("value", 0.0)?,
        },
        "brownian_at" => TerminalSpec::BrownianAt {
            time: raw.f64(&format!("{prefix}.time"))?,
        },
        "forward_affine" => TerminalSpec::ForwardAffine {
            alpha: param("alpha", 0.0)?,
            beta: param("beta", 1.0)?,
        },
        other => TerminalSpec::parse(other).map_err(|e| raw.locate(&kind_key, e))?,
    };
    Ok(Some(spec))
}

fn forward_at(raw: &RawConfig) -> Result<Option<ForwardChoice>> {
    let Some(kind) = raw.opt_string("forward.kind")? else {
        return Ok(None);
    };
    let spec = match kind.as_str() {
        "brownian" => ForwardSpec::Brownian,
        "linear" => ForwardSpec::Linear {
            a: raw.opt_f64("forward.a")?.unwrap_or(0.0),
            b0: raw.opt_f64("forward.b0")?.unwrap_or(0.0),
            c: raw.opt_f64("forward.c")?.unwrap_or(1.0),
        },
        "sine" => ForwardSpec::Sine,
        other => {
            return Err(raw.locate(
                "forward.kind",
                LabError::invalid(format!("unknown forward model `{other}` (expected brownian, linear or sine)")),
            ))
        }
    };
    Ok(Some(ForwardChoice {
        spec,
        x0: raw.opt_f64("forward.x0")?.unwrap_or(0.0),
    }))
}

fn positive(raw: &RawConfig, key: &str, value: f64) -> Result<f64> {
    if value > 0.0 {
        Ok(value)
    } else {
        Err(raw.locate(key, LabError::invalid(format!("`{key}` must be positive"))))
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let raw = RawConfig::parse(text)?;
        let cfg = Self::from_raw(&raw)?;
        if let Some((key, e)) = raw.unused() {
            return Err(parse_error(e.line, e.key_column, format!("unknown key `{key}`")));
        }
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn from_raw(raw: &RawConfig) -> Result<Self> {
        let kind_name = raw.string("experiment.kind")?;
        let kind = ExperimentKind::parse(&kind_name).ok_or_else(|| {
            raw.locate(
                "experiment.kind",
                LabError::invalid(format!(
                    "unknown experiment kind `{kind_name}` (expected one of {})",
                    ExperimentKind::ALL.map(|k| k.name()).join(", ")
                )),
            )
        })?;
        let horizon = positive(raw, "grid.T", raw.f64("grid.T")?)?;
        let steps = raw.usize("grid.N")?;
        if steps == 0 {
            return Err(raw.locate("grid.N", LabError::invalid("`grid.N` must be positive")));
        }
        let paths = raw.opt_usize("paths.M")?.unwrap_or(1 << 14);
        if paths < 2 {
            return Err(raw.locate("paths.M", LabError::invalid("`paths.M` must be at least 2")));
        }
        let seed = raw.opt_usize("paths.seed")?.unwrap_or(0) as u64;
        let dim = raw.opt_usize("paths.d")?.unwrap_or(1);
        if dim == 0 {
            return Err(raw.locate("paths.d", LabError::invalid("`paths.d` must be positive")));
        }

        let generator = generator_at(raw, "generator")?;
        let lower = generator_at(raw, "lower")?;
        let upper = generator_at(raw, "upper")?;
        let forward = forward_at(raw)?;
        let terminal = terminal_at(raw, "terminal")?;
        let family = match raw.opt_string("terminal.family")? {
            Some(list) => list
                .split(';')
                .map(|s| TerminalSpec::parse(s).map_err(|e| raw.locate("terminal.family", e)))
                .collect::<Result<Vec<_>>>()?,
            None => Vec::new(),
        };

        let probe = ProbeConfig {
            t: raw.opt_f64("probe.t")?.unwrap_or(0.0),
            y: raw.opt_f64("probe.y")?.unwrap_or(0.0),
            z: raw.opt_list("probe.z")?.unwrap_or_else(|| vec![1.0; dim]),
            x: raw.opt_f64("probe.x")?.unwrap_or(0.0),
            p: raw.opt_f64("probe.p")?.unwrap_or(1.0),
            epsilons: raw.opt_list("probe.epsilons")?.unwrap_or_else(|| DEFAULT_EPSILONS.to_vec()),
            analytic: raw.opt_bool("probe.analytic")?.unwrap_or(false),
            sub_steps: raw.opt_usize("probe.sub_steps")?.unwrap_or(32),
            tolerance: match raw.opt_f64("probe.tolerance")? {
                Some(v) => positive(raw, "probe.tolerance", v)?,
                None => 0.03,
            },
        };
        if probe.sub_steps == 0 {
            return Err(raw.locate("probe.sub_steps", LabError::invalid("`probe.sub_steps` must be positive")));
        }
        let converse = ConverseGrid {
            epsilon: raw.opt_f64("converse.epsilon")?.unwrap_or(0.025),
            times: raw
                .opt_list("converse.times")?
                .unwrap_or_else(|| (0..8).map(|i| i as f64 * horizon / 8.0).collect()),
            ys: raw.opt_list("converse.y")?.unwrap_or_else(|| vec![-1.0, 0.0, 1.0]),
            zs: raw.opt_list("converse.z")?.unwrap_or_else(|| vec![-1.0, 0.0, 1.0]),
        };

        let properties = match raw.opt_string("characterization.property")? {
            None => Property::ALL.to_vec(),
            Some(s) if s == "all" => Property::ALL.to_vec(),
            Some(s) => s
                .split(',')
                .map(|p| Property::parse(p).map_err(|e| raw.locate("characterization.property", e)))
                .collect::<Result<_>>()?,
        };
        let directions = match raw.opt_string("characterization.direction")? {
            None => vec![Direction::GeneratorToSolution, Direction::SolutionToGenerator],
            Some(s) if s == "both" => vec![Direction::GeneratorToSolution, Direction::SolutionToGenerator],
            Some(s) => vec![Direction::parse(&s).map_err(|e| raw.locate("characterization.direction", e))?],
        };

        let enlargement = match raw.opt_list("enlargement.atoms")? {
            None => None,
            Some(atoms) => {
                let probs = raw
                    .opt_list("enlargement.probs")?
                    .unwrap_or_else(|| vec![1.0 / atoms.len() as f64; atoms.len()]);
                EnlargementVariable::sample(&atoms, &probs, 2, 0).map_err(|e| raw.locate("enlargement.atoms", e))?;
                Some(Enlargement { atoms, probs })
            }
        };

        let mut lsmc = LsmcConfig::default();
        if let Some(d) = raw.opt_usize("lsmc.degree")? {
            lsmc.degree = d;
        }
        if let Some(p) = raw.opt_usize("lsmc.picard")? {
            lsmc.picard_iters = p;
        }
        if let Some(e) = raw.opt_string("lsmc.estimator")? {
            lsmc.estimator = match e.as_str() {
                "control_variate" => Estimator::ControlVariate,
                "plain" => Estimator::Plain,
                other => {
                    return Err(raw.locate(
                        "lsmc.estimator",
                        LabError::invalid(format!("unknown estimator `{other}` (expected control_variate or plain)")),
                    ))
                }
            };
        }

        let mut tol = Tolerances::default();
        for (key, slot) in [
            ("tolerance.se_multiple", &mut tol.se_multiple),
            ("tolerance.regression", &mut tol.regression),
            ("tolerance.scalar", &mut tol.scalar),
            ("tolerance.exact", &mut tol.exact),
        ] {
            if let Some(v) = raw.opt_f64(key)? {
                *slot = positive(raw, key, v)?;
            }
        }

        let expect = match raw.opt_f64("expect.y0")? {
            None => None,
            Some(y0) => Some(Expectation {
                y0,
                tolerance: match raw.opt_f64("expect.tolerance")? {
                    Some(v) => positive(raw, "expect.tolerance", v)?,
                    None => tol.scalar,
                },
            }),
        };

        let cfg = ExperimentConfig {
            kind,
            horizon,
            steps,
            paths,
            seed,
            dim,
            generator,
            lower,
            upper,
            forward,
            terminal,
            family,
            probe,
            converse,
            properties,
            directions,
            transposition_tests: raw.opt_usize("transposition.tests")?.unwrap_or(20),
            enlargement,
            lsmc,
            tol,
            expect,
            output_dir: raw.opt_string("output.dir")?.map(PathBuf::from),
        };
        cfg.require(raw)?;
        TimeGrid::new(horizon, steps)?;
        Ok(cfg)
    }

    /// Keys each kind cannot run without.
    fn require(&self, raw: &RawConfig) -> Result<()> {
        let need_generator = || -> Result<()> {
            if self.generator.is_none() {
                return Err(LabError::MissingKey("generator.kind".into()));
            }
            Ok(())
        };
        let need_terminal = || -> Result<()> {
            if self.terminal.is_none() {
                return Err(LabError::MissingKey("terminal".into()));
            }
            Ok(())
        };
        match self.kind {
            ExperimentKind::Solve | ExperimentKind::TranspositionCheck | ExperimentKind::GExpectation => {
                need_generator()?;
                need_terminal()?;
            }
            ExperimentKind::AxiomSuite => {
                need_generator()?;
                if self.family.is_empty() && self.terminal.is_none() {
                    return Err(LabError::MissingKey("terminal.family".into()));
                }
            }
            ExperimentKind::Representation | ExperimentKind::Characterization => need_generator()?,
            ExperimentKind::ConverseComparison => {
                if self.lower.is_none() {
                    return Err(LabError::MissingKey("lower.kind".into()));
                }
                if self.upper.is_none() {
                    return Err(LabError::MissingKey("upper.kind".into()));
                }
            }
        }
        if self.forward.is_some() && self.dim != 1 {
            return Err(raw.locate("paths.d", LabError::invalid("forward models are one-dimensional")));
        }
        Ok(())
    }

    /// Terminals of the suites: the family, else the single terminal.
    pub fn terminals(&self) -> Vec<TerminalSpec> {
        if !self.family.is_empty() {
            self.family.clone()
        } else {
            self.terminal.into_iter().collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SOLVE: &str = "experiment.kind = solve\ngrid.T = 1.0\ngrid.N = 64\ngenerator.kind = kappa_abs_z\ngenerator.kappa = 0.5\nterminal = affine(0,1)\n";

    #[test]
    fn parses_a_solve_config() {
        let c = ExperimentConfig::parse(SOLVE).unwrap();
        assert_eq!(c.kind, ExperimentKind::Solve);
        assert_eq!(c.steps, 64);
        assert_eq!(c.paths, 1 << 14);
        assert_eq!(c.generator, Some(GeneratorSpec::KappaAbsZ { kappa: 0.5 }));
        assert_eq!(c.terminal, Some(TerminalSpec::Affine { alpha: 0.0, beta: 1.0 }));
    }

    #[test]
    fn label_form_and_comments() {
        let c = ExperimentConfig::parse(
            "# header\nexperiment.kind = g-expectation # trailing\n\ngrid.T=1\ngrid.N=16\npaths.M = 2^10\ngenerator = linear(0,1,0)\nterminal.kind = cosine\n",
        )
        .unwrap();
        assert_eq!(c.paths, 1024);
        assert_eq!(c.generator, Some(GeneratorSpec::Linear { a: 0.0, b: 1.0, c: 0.0 }));
        assert_eq!(c.terminal, Some(TerminalSpec::Cosine));
    }

    #[test]
    fn missing_horizon_names_the_key() {
        let text = SOLVE.replace("grid.T = 1.0\n", "");
        assert_eq!(ExperimentConfig::parse(&text).unwrap_err(), LabError::MissingKey("grid.T".into()));
    }

    #[test]
    fn bad_value_reports_line_and_column() {
        let text = SOLVE.replace("grid.N = 64", "grid.N = sixty");
        match ExperimentConfig::parse(&text).unwrap_err() {
            LabError::Parse { line, column, .. } => assert_eq!((line, column), (3, 10)),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn missing_equals_and_unknown_keys() {
        match ExperimentConfig::parse("experiment.kind solve\n").unwrap_err() {
            LabError::Parse { line, column, .. } => assert_eq!((line, column), (1, 1)),
            e => panic!("{e}"),
        }
        let text = format!("{SOLVE}  grid.typo = 3\n");
        match ExperimentConfig::parse(&text).unwrap_err() {
            LabError::Parse { line, column, message } => {
                assert_eq!((line, column), (7, 3));
                assert!(message.contains("grid.typo"));
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn duplicate_keys_are_rejected() {
        let text = format!("{SOLVE}grid.N = 32\n");
        assert!(matches!(ExperimentConfig::parse(&text), Err(LabError::Parse { line: 7, .. })));
    }

    #[test]
    fn terminal_labels_round_trip() {
        for t in TerminalSpec::catalog() {
            assert_eq!(TerminalSpec::parse(&t.to_string()).unwrap(), t);
        }
        assert!(TerminalSpec::parse("sinh").is_err());
        assert!(TerminalSpec::parse("affine(1)").is_err());
    }

    #[test]
    fn converse_needs_both_drivers() {
        let text = "experiment.kind = converse-comparison\ngrid.T = 1\ngrid.N = 80\nlower = linear(0,0.5,0)\n";
        assert_eq!(ExperimentConfig::parse(text).unwrap_err(), LabError::MissingKey("upper.kind".into()));
    }
}
