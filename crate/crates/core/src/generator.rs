//! Drivers `g(t, y, z)`, their structural flags, and probe-based audits of the
//! Lipschitz / integrability / right-continuity / `g(t,y,0) = 0` conditions.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::rng;

/// Path information available to a driver at a grid node.
#[derive(Debug, Clone, Copy, Default)]
pub struct DriverContext<'a> {
    /// Brownian level `W_t` (empty when unknown).
    pub w: &'a [f64],
    /// Atom index of the enlargement variable, if any.
    pub atom: Option<usize>,
}

type DriverFn = dyn Fn(f64, f64, &[f64], &DriverContext) -> f64 + Send + Sync;

/// Structural claims attached to a driver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GeneratorFlags {
    pub independent_of_y: bool,
    pub positively_homogeneous: bool,
    pub subadditive: bool,
    /// Jointly convex in `(y, z)`.
    pub convex_in_z: bool,
    pub satisfies_a5: bool,
}

impl GeneratorFlags {
    pub const NONE: GeneratorFlags = GeneratorFlags {
        independent_of_y: false,
        positively_homogeneous: false,
        subadditive: false,
        convex_in_z: false,
        satisfies_a5: false,
    };
}

/// Catalog entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum GeneratorSpec {
    Zero,
    /// `a·y + b·Σ_k z_k + c`
    Linear { a: f64, b: f64, c: f64 },
    /// `κ·|z|`
    KappaAbsZ { kappa: f64 },
    /// `−β·y`
    Discount { beta: f64 },
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorSpec::Zero => write!(f, "zero"),
            GeneratorSpec::Linear { a, b, c } => write!(f, "linear({a},{b},{c})"),
            GeneratorSpec::KappaAbsZ { kappa } => write!(f, "kappa_abs_z({kappa})"),
            GeneratorSpec::Discount { beta } => write!(f, "discount({beta})"),
        }
    }
}

fn parse_args(label: &str, args: &str, expected: usize) -> Result<Vec<f64>> {
    let values: Vec<f64> = args
        .split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| LabError::invalid(format!("bad number `{s}` in generator `{label}`")))
        })
        .collect::<Result<_>>()?;
    if values.len() != expected {
        return Err(LabError::invalid(format!(
            "generator `{label}` takes {expected} argument(s), got {}",
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(LabError::invalid(format!("generator `{label}` needs finite arguments")));
    }
    Ok(values)
}

impl GeneratorSpec {
    /// Parses `zero`, `linear(a,b,c)`, `kappa_abs_z(k)` or `discount(b)`.
    pub fn parse(label: &str) -> Result<Self> {
        let label = label.trim();
        let (name, args) = match label.find('(') {
            Some(i) => {
                if !label.ends_with(')') {
                    return Err(LabError::invalid(format!("unbalanced parentheses in `{label}`")));
                }
                (&label[..i], &label[i + 1..label.len() - 1])
            }
            None => (label, ""),
        };
        match name.trim() {
            "zero" => {
                parse_args(label, args, 0)?;
                Ok(GeneratorSpec::Zero)
            }
            "linear" => {
                let v = parse_args(label, args, 3)?;
                Ok(GeneratorSpec::Linear {
                    a: v[0],
                    b: v[1],
                    c: v[2],
                })
            }
            "kappa_abs_z" => {
                let v = parse_args(label, args, 1)?;
                Ok(GeneratorSpec::KappaAbsZ { kappa: v[0] })
            }
            "discount" => {
                let v = parse_args(label, args, 1)?;
                Ok(GeneratorSpec::Discount { beta: v[0] })
            }
            "custom" => Err(LabError::invalid(
                "custom drivers are built in code with Generator::new, not from a label",
            )),
            other => Err(LabError::invalid(format!("unknown generator `{other}`"))),
        }
    }

    /// Flags computed from the definition of each family.
    pub fn flags(&self) -> GeneratorFlags {
        match *self {
            GeneratorSpec::Zero => GeneratorFlags {
                independent_of_y: true,
                positively_homogeneous: true,
                subadditive: true,
                convex_in_z: true,
                satisfies_a5: true,
            },
            GeneratorSpec::Linear { a, c, .. } => GeneratorFlags {
                independent_of_y: a == 0.0,
                positively_homogeneous: c == 0.0,
                subadditive: c >= 0.0,
                convex_in_z: true,
                satisfies_a5: a == 0.0 && c == 0.0,
            },
            GeneratorSpec::KappaAbsZ { kappa } => GeneratorFlags {
                independent_of_y: true,
                positively_homogeneous: true,
                subadditive: kappa >= 0.0,
                convex_in_z: kappa >= 0.0,
                satisfies_a5: true,
            },
            GeneratorSpec::Discount { beta } => GeneratorFlags {
                independent_of_y: beta == 0.0,
                positively_homogeneous: true,
                subadditive: true,
                convex_in_z: true,
                satisfies_a5: beta == 0.0,
            },
        }
    }

    pub fn lipschitz(&self, dim: usize) -> f64 {
        match *self {
            GeneratorSpec::Zero => 0.0,
            GeneratorSpec::Linear { a, b, .. } => a.abs().max(b.abs() * (dim as f64).sqrt()),
            GeneratorSpec::KappaAbsZ { kappa } => kappa.abs(),
            GeneratorSpec::Discount { beta } => beta.abs(),
        }
    }

    pub fn build(&self, dim: usize) -> Result<Generator> {
        if dim == 0 {
            return Err(LabError::invalid("driver dimension must be positive"));
        }
        let spec = *self;
        let f: Arc<DriverFn> = match spec {
            GeneratorSpec::Zero => Arc::new(|_, _, _, _| 0.0),
            GeneratorSpec::Linear { a, b, c } => Arc::new(move |_, y, z, _| a * y + b * z.iter().sum::<f64>() + c),
            GeneratorSpec::KappaAbsZ { kappa } => {
                Arc::new(move |_, _, z, _| kappa * z.iter().map(|v| v * v).sum::<f64>().sqrt())
            }
            GeneratorSpec::Discount { beta } => Arc::new(move |_, y, _, _| -beta * y),
        };
        Ok(Generator {
            label: spec.to_string(),
            dim,
            lipschitz: spec.lipschitz(dim),
            flags: spec.flags(),
            spec: Some(spec),
            f,
        })
    }

    /// Every family with one representative instance, sorted by name.
    pub fn catalog() -> Vec<GeneratorSpec> {
        vec![
            GeneratorSpec::Discount { beta: 1.0 },
            GeneratorSpec::KappaAbsZ { kappa: 0.5 },
            GeneratorSpec::Linear { a: 0.0, b: 1.0, c: 0.0 },
            GeneratorSpec::Zero,
        ]
    }
}

/// Catalog lookup for a one-dimensional Brownian motion.
pub fn builtin(label: &str) -> Result<Generator> {
    GeneratorSpec::parse(label)?.build(1)
}

/// A driver with its declared Lipschitz constant and structural flags.
#[derive(Clone)]
pub struct Generator {
    label: String,
    dim: usize,
    lipschitz: f64,
    flags: GeneratorFlags,
    spec: Option<GeneratorSpec>,
    f: Arc<DriverFn>,
}

impl fmt::Debug for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Generator")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("lipschitz", &self.lipschitz)
            .field("flags", &self.flags)
            .finish()
    }
}

impl Generator {
    /// Deterministic driver `g(t, y, z)`. The callable must be pure.
    pub fn new(
        label: impl Into<String>,
        dim: usize,
        lipschitz: f64,
        flags: GeneratorFlags,
        f: impl Fn(f64, f64, &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::with_context(label, dim, lipschitz, flags, move |t, y, z, _| f(t, y, z))
    }

    /// Driver that may also read the Brownian level and the atom of `U`.
    pub fn with_context(
        label: impl Into<String>,
        dim: usize,
        lipschitz: f64,
        flags: GeneratorFlags,
        f: impl Fn(f64, f64, &[f64], &DriverContext) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(LabError::invalid("driver dimension must be positive"));
        }
        if !(lipschitz >= 0.0) || !lipschitz.is_finite() {
            return Err(LabError::invalid("Lipschitz constant must be finite and non-negative"));
        }
        Ok(Generator {
            label: label.into(),
            dim,
            lipschitz,
            flags,
            spec: None,
            f: Arc::new(f),
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Declared constant `K`.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn flags(&self) -> GeneratorFlags {
        self.flags
    }

    pub fn spec(&self) -> Option<GeneratorSpec> {
        self.spec
    }

    pub fn eval(&self, t: f64, y: f64, z: &[f64]) -> f64 {
        (self.f)(t, y, z, &DriverContext::default())
    }

    pub fn eval_ctx(&self, t: f64, y: f64, z: &[f64], ctx: &DriverContext) -> f64 {
        (self.f)(t, y, z, ctx)
    }

    /// Same driver with a different declared constant (used to exercise the audit).
    pub fn with_declared_lipschitz(mut self, k: f64) -> Self {
        self.lipschitz = k;
        self
    }
}

/// Probe region for driver audits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeBox {
    pub t_max: f64,
    pub y_max: f64,
    pub z_max: f64,
}

impl Default for ProbeBox {
    fn default() -> Self {
        ProbeBox {
            t_max: 1.0,
            y_max: 5.0,
            z_max: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct A5Witness {
    pub t: f64,
    pub y: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzWitness {
    pub t: f64,
    pub y: f64,
    pub z: Vec<f64>,
    pub y2: f64,
    pub z2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorAssumptionReport {
    pub declared_lipschitz: f64,
    pub lipschitz_ratio: f64,
    pub lipschitz_witness: Option<LipschitzWitness>,
    pub a1_pass: bool,
    /// `(t, |g(t,0,0)|)` along an even time grid.
    pub g00_samples: Vec<(f64, f64)>,
    pub g00_sup: f64,
    pub right_gap: f64,
    pub a4_pass: bool,
    pub left_discontinuities: Vec<(f64, f64)>,
    pub a5_max: f64,
    /// First probe violating `g(t,y,0) = 0`.
    pub a5_witness: Option<A5Witness>,
    pub a5_pass: bool,
}

const ZERO_TOL: f64 = 1e-12;
const CONTINUITY_STEP: f64 = 1e-9;
const CONTINUITY_TOL: f64 = 1e-6;

/// Fixed levels probed first for `g(t,y,0) = 0` so witnesses are readable.
const A5_LEVELS: [f64; 7] = [1.0, -1.0, 0.5, -0.5, 5.0, -5.0, 0.0];

fn norm(z: &[f64]) -> f64 {
    z.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn random_z(r: &mut ChaCha8Rng, dim: usize, zmax: f64) -> Vec<f64> {
    (0..dim).map(|_| r.random_range(-zmax..=zmax)).collect()
}

/// Audits a driver on `probes` random points of `region`.
pub fn check_a_assumptions(g: &Generator, region: &ProbeBox, probes: usize, seed: u64) -> Result<GeneratorAssumptionReport> {
    if probes == 0 {
        return Err(LabError::invalid("need at least one probe"));
    }
    let d = g.dim();
    let mut r = rng::keyed(seed, rng::PROBES, 1);
    let mut lipschitz_ratio: f64 = 0.0;
    let mut lipschitz_witness = None;
    for i in 0..probes {
        let t = r.random_range(0.0..region.t_max);
        let y = r.random_range(-region.y_max..=region.y_max);
        let z = random_z(&mut r, d, region.z_max);
        // Pair families: move z only, move y only, move both, local move.
        let (y2, z2) = match i % 4 {
            0 => (y, random_z(&mut r, d, region.z_max)),
            1 => (r.random_range(-region.y_max..=region.y_max), z.clone()),
            2 => (r.random_range(-region.y_max..=region.y_max), random_z(&mut r, d, region.z_max)),
            _ => {
                let h = 1e-3 * region.z_max.max(region.y_max);
                (
                    y + h * r.random_range(-1.0..1.0),
                    z.iter().map(|v| v + h * r.random_range(-1.0..1.0)).collect(),
                )
            }
        };
        let dz: Vec<f64> = z.iter().zip(&z2).map(|(a, b)| a - b).collect();
        let dist = (y - y2).abs() + norm(&dz);
        if dist <= 0.0 {
            continue;
        }
        let ratio = (g.eval(t, y, &z) - g.eval(t, y2, &z2)).abs() / dist;
        if ratio > lipschitz_ratio {
            lipschitz_ratio = ratio;
            lipschitz_witness = Some(LipschitzWitness { t, y, z, y2, z2 });
        }
    }

    // Escalating scales: a finite declared constant cannot hide superlinear growth.
    let t_mid = 0.5 * region.t_max;
    let unit: Vec<f64> = vec![1.0 / (d as f64).sqrt(); d];
    for j in 0..=20 {
        let s = region.z_max.max(region.y_max) * f64::powi(2.0, j);
        let z: Vec<f64> = unit.iter().map(|u| s * u).collect();
        let z2: Vec<f64> = unit.iter().map(|u| (s + 1.0) * u).collect();
        for (y, y2, za, zb) in [(0.0, 0.0, &z, &z2), (s, s + 1.0, &unit, &unit)] {
            let dz: Vec<f64> = za.iter().zip(zb.iter()).map(|(a, b)| a - b).collect();
            let dist = (y - y2).abs() + norm(&dz);
            let ratio = (g.eval(t_mid, y, za) - g.eval(t_mid, y2, zb)).abs() / dist;
            if ratio > lipschitz_ratio {
                lipschitz_ratio = ratio;
                lipschitz_witness = Some(LipschitzWitness {
                    t: t_mid,
                    y,
                    z: za.clone(),
                    y2,
                    z2: zb.clone(),
                });
            }
        }
    }

    let zeros = vec![0.0; d];
    let g00_samples: Vec<(f64, f64)> = (0..=32)
        .map(|i| {
            let t = region.t_max * i as f64 / 32.0;
            (t, g.eval(t, 0.0, &zeros).abs())
        })
        .collect();
    let g00_sup = g00_samples.iter().map(|s| s.1).fold(0.0, f64::max);

    let mut right_gap: f64 = 0.0;
    let mut left_discontinuities = Vec::new();
    let h = CONTINUITY_STEP * region.t_max.max(1.0);
    for _ in 0..probes.min(256) {
        let t = r.random_range(0.0..region.t_max);
        let y = r.random_range(-region.y_max..=region.y_max);
        let z = random_z(&mut r, d, region.z_max);
        let here = g.eval(t, y, &z);
        let scale = 1.0 + here.abs();
        right_gap = right_gap.max((g.eval(t + h, y, &z) - here).abs() / scale);
        if t - h >= 0.0 {
            let left = (g.eval(t - h, y, &z) - here).abs();
            if left / scale > CONTINUITY_TOL {
                left_discontinuities.push((t, left));
            }
        }
    }

    let mut a5_max: f64 = 0.0;
    let mut a5_witness = None;
    let mut probe_a5 = |t: f64, y: f64| {
        let v = g.eval(t, y, &zeros);
        a5_max = a5_max.max(v.abs());
        if v.abs() > ZERO_TOL && a5_witness.is_none() {
            a5_witness = Some(A5Witness { t, y, value: v });
        }
    };
    for &y in &A5_LEVELS {
        probe_a5(0.0, y);
    }
    for _ in 0..probes {
        let t = r.random_range(0.0..region.t_max);
        let y = r.random_range(-region.y_max..=region.y_max);
        probe_a5(t, y);
    }

    let declared = g.lipschitz();
    Ok(GeneratorAssumptionReport {
        declared_lipschitz: declared,
        lipschitz_ratio,
        lipschitz_witness,
        a1_pass: lipschitz_ratio <= declared * (1.0 + 1e-9) + ZERO_TOL,
        g00_samples,
        g00_sup,
        right_gap,
        a4_pass: right_gap <= CONTINUITY_TOL,
        left_discontinuities,
        a5_pass: a5_witness.is_none(),
        a5_max,
        a5_witness,
    })
}

/// Structural properties observed by direct evaluation on random probes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureAudit {
    pub observed: GeneratorFlags,
    /// Subadditive in `z` alone (with `y` held at zero).
    pub subadditive_in_z: bool,
    /// Convex in `z` alone (with `y` held at zero).
    pub convex_z_only: bool,
    /// Human-readable description of the first counterexample per property.
    pub witnesses: Vec<String>,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

fn below(a: f64, b: f64) -> bool {
    a <= b + 1e-9 * (1.0 + a.abs().max(b.abs()))
}

/// Probes positive homogeneity, independence of `y`, subadditivity,
/// joint convexity and `g(t,y,0) = 0` by direct evaluation.
pub fn probe_structure(g: &Generator, region: &ProbeBox, probes: usize, seed: u64) -> StructureAudit {
    let d = g.dim();
    let mut r = rng::keyed(seed, rng::PROBES, 2);
    let mut obs = GeneratorFlags {
        independent_of_y: true,
        positively_homogeneous: true,
        subadditive: true,
        convex_in_z: true,
        satisfies_a5: true,
    };
    let mut sa_z = true;
    let mut cvx_z = true;
    let mut witnesses = Vec::new();
    let zeros = vec![0.0; d];
    let fail = |flag: &mut bool, msg: String, w: &mut Vec<String>| {
        if *flag {
            *flag = false;
            w.push(msg);
        }
    };
    for _ in 0..probes.max(1) {
        let t = r.random_range(0.0..region.t_max);
        let y1 = r.random_range(-region.y_max..=region.y_max);
        let y2 = r.random_range(-region.y_max..=region.y_max);
        let z1 = random_z(&mut r, d, region.z_max);
        let z2 = random_z(&mut r, d, region.z_max);
        let alpha: f64 = r.random_range(0.0..=3.0);
        let lambda: f64 = r.random();

        let g1 = g.eval(t, y1, &z1);
        let g2 = g.eval(t, y2, &z2);

        let scaled: Vec<f64> = z1.iter().map(|v| alpha * v).collect();
        let gs = g.eval(t, alpha * y1, &scaled);
        if !close(gs, alpha * g1) {
            fail(
                &mut obs.positively_homogeneous,
                format!("g(t,{0}y,{0}z) = {gs} but {0}·g(t,y,z) = {1} at t={t}, y={y1}", alpha, alpha * g1),
                &mut witnesses,
            );
        }
        let gy = g.eval(t, y2, &z1);
        if !close(g1, gy) {
            fail(
                &mut obs.independent_of_y,
                format!("g(t,{y1},z) = {g1} differs from g(t,{y2},z) = {gy} at t={t}"),
                &mut witnesses,
            );
        }
        let zsum: Vec<f64> = z1.iter().zip(&z2).map(|(a, b)| a + b).collect();
        let gsum = g.eval(t, y1 + y2, &zsum);
        if !below(gsum, g1 + g2) {
            fail(
                &mut obs.subadditive,
                format!("g at the sum = {gsum} exceeds {} at t={t}, y1={y1}, y2={y2}", g1 + g2),
                &mut witnesses,
            );
        }
        let zmix: Vec<f64> = z1.iter().zip(&z2).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
        let gmix = g.eval(t, lambda * y1 + (1.0 - lambda) * y2, &zmix);
        if !below(gmix, lambda * g1 + (1.0 - lambda) * g2) {
            fail(
                &mut obs.convex_in_z,
                format!("convexity fails at t={t}, λ={lambda}: {gmix} > {}", lambda * g1 + (1.0 - lambda) * g2),
                &mut witnesses,
            );
        }
        let h1 = g.eval(t, 0.0, &z1);
        let h2 = g.eval(t, 0.0, &z2);
        if !below(g.eval(t, 0.0, &zsum), h1 + h2) {
            sa_z = false;
        }
        if !below(g.eval(t, 0.0, &zmix), lambda * h1 + (1.0 - lambda) * h2) {
            cvx_z = false;
        }
        let a5 = g.eval(t, y1, &zeros);
        if a5.abs() > ZERO_TOL {
            fail(
                &mut obs.satisfies_a5,
                format!("g(t,{y1},0) = {a5} at t={t}"),
                &mut witnesses,
            );
        }
    }
    StructureAudit {
        observed: obs,
        subadditive_in_z: sa_z,
        convex_z_only: cvx_z,
        witnesses,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_catalog_labels() {
        assert_eq!(GeneratorSpec::parse("zero").unwrap(), GeneratorSpec::Zero);
        assert_eq!(
            GeneratorSpec::parse("linear(0, 1, 0)").unwrap(),
            GeneratorSpec::Linear { a: 0.0, b: 1.0, c: 0.0 }
        );
        assert_eq!(GeneratorSpec::parse("kappa_abs_z(0.5)").unwrap(), GeneratorSpec::KappaAbsZ { kappa: 0.5 });
        assert!(matches!(GeneratorSpec::parse("custom"), Err(LabError::InvalidArgument(_))));
        assert!(matches!(GeneratorSpec::parse("quadratic(1)"), Err(LabError::InvalidArgument(_))));
        assert!(matches!(GeneratorSpec::parse("linear(1,2)"), Err(LabError::InvalidArgument(_))));
        for spec in GeneratorSpec::catalog() {
            assert_eq!(GeneratorSpec::parse(&spec.to_string()).unwrap(), spec);
        }
    }

    #[test]
    fn kappa_flags_and_constant() {
        let g = builtin("kappa_abs_z(0.5)").unwrap();
        let f = g.flags();
        assert!(f.independent_of_y && f.positively_homogeneous && f.subadditive && f.convex_in_z && f.satisfies_a5);
        assert_eq!(g.lipschitz(), 0.5);
    }

    #[test]
    fn linear_z_is_a5() {
        let g = builtin("linear(0,1,0)").unwrap();
        assert!(g.flags().satisfies_a5);
        assert_eq!(g.lipschitz(), 1.0);
        let rep = check_a_assumptions(&g, &ProbeBox::default(), 2000, 1).unwrap();
        assert!(rep.a1_pass && rep.a5_pass);
    }

    #[test]
    fn discount_fails_a5_with_readable_witness() {
        let g = builtin("discount(1.0)").unwrap();
        assert_eq!(g.eval(0.0, 2.0, &[0.0]), -2.0);
        assert!(!g.flags().satisfies_a5);
        let rep = check_a_assumptions(&g, &ProbeBox::default(), 100, 1).unwrap();
        let w = rep.a5_witness.unwrap();
        assert_eq!((w.y, w.value), (1.0, -1.0));
    }

    #[test]
    fn understated_constant_is_caught() {
        let g = builtin("kappa_abs_z(0.5)").unwrap().with_declared_lipschitz(0.4);
        let rep = check_a_assumptions(&g, &ProbeBox::default(), 4000, 3).unwrap();
        assert!(!rep.a1_pass);
        assert!((rep.lipschitz_ratio - 0.5).abs() < 1e-12, "{}", rep.lipschitz_ratio);
    }

    #[test]
    fn y_plus_z_witness() {
        let g = Generator::new("y+z", 1, 1.0, GeneratorFlags::NONE, |_, y, z| y + z[0]).unwrap();
        let rep = check_a_assumptions(&g, &ProbeBox::default(), 100, 1).unwrap();
        assert!(!rep.a5_pass);
        let w = rep.a5_witness.unwrap();
        assert_eq!((w.y, w.value), (1.0, 1.0));
    }

    #[test]
    fn g00_is_sampled_along_time() {
        let g = Generator::new("t", 1, 0.0, GeneratorFlags::NONE, |t, _, _| t).unwrap();
        let rep = check_a_assumptions(&g, &ProbeBox::default(), 10, 1).unwrap();
        assert_eq!(rep.g00_samples.len(), 33);
        assert_eq!(rep.g00_sup, 1.0);
    }

    #[test]
    fn time_jump_is_left_discontinuous_only() {
        let g = Generator::new("jump", 1, 1.0, GeneratorFlags::NONE, |t, _, z| if t >= 0.5 { z[0] } else { 0.0 }).unwrap();
        let rep = check_a_assumptions(&g, &ProbeBox::default(), 256, 1).unwrap();
        assert!(rep.a4_pass);
    }

    #[test]
    fn linear_with_constant_is_not_homogeneous() {
        let g = builtin("linear(0,1,0.5)").unwrap();
        let audit = probe_structure(&g, &ProbeBox::default(), 1000, 1);
        assert!(!audit.observed.positively_homogeneous);
        assert!(audit.observed.subadditive);
        assert!(!audit.witnesses.is_empty());
    }
}
