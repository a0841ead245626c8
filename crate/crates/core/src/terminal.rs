//! Terminal conditions `ξ` and the path partitions they may be restricted to.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::scenario::PathView;
use crate::stochastic::TimeGrid;

/// Which path data the regression state is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Source {
    /// Reads nothing random (constants).
    Deterministic,
    Brownian,
    Forward,
}

/// What `ξ` is a functional of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TerminalKind {
    BrownianPath,
    ForwardTerminal,
    BrownianWithAtom,
}

type PathFn = dyn Fn(&PathView) -> f64 + Send + Sync;
type PathPredicate = dyn Fn(&PathView) -> bool + Send + Sync;

/// A yes/no split of the paths, known from `time` on (`None`: known at zero).
#[derive(Clone)]
pub struct Partition {
    label: String,
    time: Option<f64>,
    f: Arc<PathPredicate>,
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Partition({})", self.label)
    }
}

impl Partition {
    pub fn new(
        label: impl Into<String>,
        time: Option<f64>,
        f: impl Fn(&PathView) -> bool + Send + Sync + 'static,
    ) -> Self {
        Partition {
            label: label.into(),
            time,
            f: Arc::new(f),
        }
    }

    /// `{ W^k_time > level }`
    pub fn above(time: f64, component: usize, level: f64) -> Self {
        Self::new(format!("W{component}({time})>{level}"), Some(time), move |v| {
            v.w_at(time)[component] > level
        })
    }

    /// `{ lower < W^k_time <= upper }`
    pub fn band(time: f64, component: usize, lower: f64, upper: f64) -> Self {
        Self::new(format!("{lower}<W{component}({time})<={upper}"), Some(time), move |v| {
            let w = v.w_at(time)[component];
            lower < w && w <= upper
        })
    }

    /// `{ U = atoms[index] }`
    pub fn atom(index: usize) -> Self {
        Self::new(format!("U=atom{index}"), None, move |v| v.atom() == Some(index))
    }

    pub fn complement(&self) -> Self {
        let f = self.f.clone();
        Partition {
            label: format!("not({})", self.label),
            time: self.time,
            f: Arc::new(move |v| !f(v)),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn time(&self) -> Option<f64> {
        self.time
    }

    pub fn holds(&self, view: &PathView) -> bool {
        (self.f)(view)
    }

    /// Node from which the partition is known on `grid`.
    pub fn node(&self, grid: &TimeGrid) -> Result<usize> {
        match self.time {
            None => Ok(0),
            Some(t) => grid
                .node_of(t)
                .ok_or_else(|| LabError::invalid(format!("partition time {t} is not a grid node"))),
        }
    }
}

/// `ξ` as a function of one path's data.
#[derive(Clone)]
pub struct TerminalCondition {
    label: String,
    source: Source,
    needs_atom: bool,
    observed: Vec<f64>,
    partitions: Vec<Partition>,
    affine: Option<(f64, f64)>,
    f: Arc<PathFn>,
}

impl fmt::Debug for TerminalCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TerminalCondition")
            .field("label", &self.label)
            .field("source", &self.source)
            .field("observed", &self.observed)
            .field("partitions", &self.partitions)
            .finish()
    }
}

impl TerminalCondition {
    /// General constructor. `observed` lists the grid times before the
    /// horizon whose source values `f` reads; they join the regression state.
    pub fn custom(
        label: impl Into<String>,
        source: Source,
        needs_atom: bool,
        observed: Vec<f64>,
        f: impl Fn(&PathView) -> f64 + Send + Sync + 'static,
    ) -> Self {
        TerminalCondition {
            label: label.into(),
            source,
            needs_atom,
            observed,
            partitions: Vec::new(),
            affine: None,
            f: Arc::new(f),
        }
    }

    pub fn constant(c: f64) -> Self {
        let mut t = Self::custom(format!("{c}"), Source::Deterministic, false, vec![], move |_| c);
        t.affine = Some((c, 0.0));
        t
    }

    /// `α + β·W¹_T`
    pub fn brownian_affine(alpha: f64, beta: f64) -> Self {
        let label = match (alpha, beta) {
            (a, b) if a == 0.0 && b == 1.0 => "W_T".to_string(),
            (a, b) if a == 0.0 && b == -1.0 => "-W_T".to_string(),
            (a, b) if a == 0.0 => format!("{b}*W_T"),
            (a, b) => format!("{a}+{b}*W_T"),
        };
        let mut t = Self::custom(label, Source::Brownian, false, vec![], move |v| alpha + beta * v.w_terminal()[0]);
        t.affine = Some((alpha, beta));
        t
    }

    /// `f(W_T)`
    pub fn brownian(label: impl Into<String>, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self::custom(label, Source::Brownian, false, vec![], move |v| f(v.w_terminal()))
    }

    /// `W¹` at grid time `t`.
    pub fn brownian_at(time: f64) -> Self {
        Self::custom(format!("W({time})"), Source::Brownian, false, vec![time], move |v| v.w_at(time)[0])
    }

    /// `f(Γ_T)`
    pub fn forward(label: impl Into<String>, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self::custom(label, Source::Forward, false, vec![], move |v| {
            f(v.x_terminal().expect("forward terminal evaluated without forward paths"))
        })
    }

    /// `f(W_T, U)`
    pub fn with_atom(label: impl Into<String>, f: impl Fn(&[f64], f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::custom(label, Source::Brownian, true, vec![], move |v| {
            f(
                v.w_terminal(),
                v.atom_value().expect("atom terminal evaluated without enlargement"),
            )
        })
    }

    pub fn square() -> Self {
        Self::brownian("W_T^2", |w| w[0] * w[0])
    }

    pub fn cosine() -> Self {
        Self::brownian("cos(W_T)", |w| w[0].cos())
    }

    pub fn indicator_positive() -> Self {
        Self::brownian("1{W_T>0}", |w| if w[0] > 0.0 { 1.0 } else { 0.0 })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn source(&self) -> Source {
        self.source
    }

    pub fn kind(&self) -> TerminalKind {
        match (self.source, self.needs_atom) {
            (Source::Forward, _) => TerminalKind::ForwardTerminal,
            (_, true) => TerminalKind::BrownianWithAtom,
            _ => TerminalKind::BrownianPath,
        }
    }

    pub fn needs_atom(&self) -> bool {
        self.needs_atom
    }

    pub fn observed(&self) -> &[f64] {
        &self.observed
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    /// `(α, β)` when `ξ = α + β·W¹_T`.
    pub fn affine(&self) -> Option<(f64, f64)> {
        self.affine
    }

    pub fn eval(&self, view: &PathView) -> f64 {
        (self.f)(view)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Adds a stratification split without changing the values of `ξ`.
    pub fn with_partition(mut self, partition: Partition) -> Self {
        self.partitions.push(partition);
        self
    }

    /// `α·ξ`
    pub fn scaled(&self, alpha: f64) -> Self {
        let f = self.f.clone();
        TerminalCondition {
            label: format!("{alpha}*({})", self.label),
            f: Arc::new(move |v| alpha * f(v)),
            affine: self.affine.map(|(a, b)| (alpha * a, alpha * b)),
            ..self.clone()
        }
    }

    /// `ξ + c`
    pub fn shifted(&self, c: f64) -> Self {
        let f = self.f.clone();
        TerminalCondition {
            label: format!("({})+{c}", self.label),
            f: Arc::new(move |v| f(v) + c),
            affine: self.affine.map(|(a, b)| (a + c, b)),
            ..self.clone()
        }
    }

    /// `α·ξ + β·η`
    pub fn combine(&self, alpha: f64, other: &TerminalCondition, beta: f64) -> Result<Self> {
        let source = match (self.source, other.source) {
            (a, Source::Deterministic) => a,
            (Source::Deterministic, b) => b,
            (a, b) if a == b => a,
            _ => return Err(LabError::invalid("cannot combine Brownian and forward terminals")),
        };
        let (f, g) = (self.f.clone(), other.f.clone());
        let mut observed = self.observed.clone();
        for t in &other.observed {
            if !observed.contains(t) {
                observed.push(*t);
            }
        }
        observed.sort_by(f64::total_cmp);
        let mut partitions = self.partitions.clone();
        partitions.extend(other.partitions.iter().cloned());
        Ok(TerminalCondition {
            label: format!("{alpha}*({})+{beta}*({})", self.label, other.label),
            source,
            needs_atom: self.needs_atom || other.needs_atom,
            observed,
            partitions,
            affine: match (self.affine, other.affine) {
                (Some((a1, b1)), Some((a2, b2))) => Some((alpha * a1 + beta * a2, alpha * b1 + beta * b2)),
                _ => None,
            },
            f: Arc::new(move |v| alpha * f(v) + beta * g(v)),
        })
    }

    /// `ξ + η`
    pub fn plus(&self, other: &TerminalCondition) -> Result<Self> {
        Ok(self.combine(1.0, other, 1.0)?.with_label(format!("({})+({})", self.label, other.label)))
    }

    /// `I_B·ξ`; the regression is stratified on `B` once it is known.
    pub fn restricted_to(&self, partition: Partition) -> Self {
        let f = self.f.clone();
        let p = partition.clone();
        let mut partitions = self.partitions.clone();
        partitions.push(partition);
        TerminalCondition {
            label: format!("1[{}]*({})", p.label(), self.label),
            partitions,
            affine: None,
            f: Arc::new(move |v| if p.holds(v) { f(v) } else { 0.0 }),
            ..self.clone()
        }
    }

    /// Checks that every observed time and partition sits on `grid`.
    pub fn validate(&self, grid: &TimeGrid) -> Result<()> {
        for &t in &self.observed {
            match grid.node_of(t) {
                Some(_) => {}
                None => {
                    return Err(LabError::invalid(format!(
                        "terminal `{}` reads time {t}, which is not a node of the grid",
                        self.label
                    )))
                }
            }
        }
        for p in &self.partitions {
            p.node(grid)?;
        }
        Ok(())
    }

    /// Observed nodes strictly before the horizon, ascending.
    pub fn observed_nodes(&self, grid: &TimeGrid) -> Result<Vec<usize>> {
        self.validate(grid)?;
        let mut nodes: Vec<usize> = self
            .observed
            .iter()
            .filter_map(|t| grid.node_of(*t))
            .filter(|n| *n < grid.steps())
            .collect();
        nodes.sort_unstable();
        nodes.dedup();
        Ok(nodes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn view_levels() -> (TimeGrid, Vec<f64>) {
        (TimeGrid::new(1.0, 4).unwrap(), vec![0.0, 0.5, -0.25, 1.0, 2.0])
    }

    #[test]
    fn affine_terminals_evaluate() {
        let (g, w) = view_levels();
        let v = PathView::from_levels(g, &w, 1, None);
        assert_eq!(TerminalCondition::brownian_affine(1.0, 2.0).eval(&v), 5.0);
        assert_eq!(TerminalCondition::constant(3.0).eval(&v), 3.0);
        assert_eq!(TerminalCondition::brownian_at(0.5).eval(&v), -0.25);
        assert_eq!(TerminalCondition::square().eval(&v), 4.0);
    }

    #[test]
    fn combinators_track_affine_form() {
        let xi = TerminalCondition::brownian_affine(0.0, 1.0);
        assert_eq!(xi.scaled(2.0).affine(), Some((0.0, 2.0)));
        assert_eq!(xi.shifted(1.0).affine(), Some((1.0, 1.0)));
        let s = xi.plus(&TerminalCondition::square()).unwrap();
        assert_eq!(s.affine(), None);
        let (g, w) = view_levels();
        let v = PathView::from_levels(g, &w, 1, None);
        assert_eq!(s.eval(&v), 6.0);
    }

    #[test]
    fn restriction_zeroes_outside_partition() {
        let (g, w) = view_levels();
        let v = PathView::from_levels(g, &w, 1, None);
        let xi = TerminalCondition::brownian_affine(0.0, 1.0);
        assert_eq!(xi.restricted_to(Partition::above(0.5, 0, 0.0)).eval(&v), 0.0);
        assert_eq!(xi.restricted_to(Partition::above(0.25, 0, 0.0)).eval(&v), 2.0);
        assert_eq!(xi.restricted_to(Partition::above(0.5, 0, 0.0).complement()).eval(&v), 2.0);
    }

    #[test]
    fn unaligned_times_are_rejected() {
        let g = TimeGrid::new(1.0, 4).unwrap();
        assert!(TerminalCondition::brownian_at(0.3).validate(&g).is_err());
        assert_eq!(TerminalCondition::brownian_at(0.5).observed_nodes(&g).unwrap(), vec![2]);
        assert!(TerminalCondition::brownian_at(1.0).observed_nodes(&g).unwrap().is_empty());
    }
}
