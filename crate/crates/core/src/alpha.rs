//! Pairwise overlap predicates α(s_i, s_j).
//!
//! A predicate is *well-conditioned* when it is hereditary (a non-conflicting
//! pair stays non-conflicting under taking subsets of either side), only
//! overlapping pairs can conflict, and relaxing a conflicting pair to a
//! non-conflicting pair of subsets always drops some shared element. Every
//! built-in predicate here depends only on the overlap region `s_i ∩ s_j`,
//! which makes it symmetric and makes disjoint pairs conflict-free.
//! [`validate_well_conditioned`] checks the two structural conditions
//! exhaustively on a small universe.

use std::cell::{Cell, RefCell};
use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{contains_induced, graph_distance_matrix, Graph, SmallGraph};
use crate::instance::{DistanceMatrix, ElementSet, Universe};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Conflict,
    NoConflict,
}

impl Verdict {
    pub fn from_conflict(conflict: bool) -> Self {
        if conflict {
            Verdict::Conflict
        } else {
            Verdict::NoConflict
        }
    }

    pub fn is_conflict(self) -> bool {
        self == Verdict::Conflict
    }
}

pub trait OverlapPredicate {
    fn evaluate(&self, a: &ElementSet, b: &ElementSet) -> Verdict;

    fn conflicts(&self, a: &ElementSet, b: &ElementSet) -> bool {
        self.evaluate(a, b).is_conflict()
    }
}

impl<F> OverlapPredicate for F
where
    F: Fn(&ElementSet, &ElementSet) -> Verdict,
{
    fn evaluate(&self, a: &ElementSet, b: &ElementSet) -> Verdict {
        self(a, b)
    }
}

/// Hereditary graph class allowed in the overlap region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternClass {
    Clique,
    Edgeless,
    /// Graphs containing none of the listed graphs as an induced subgraph.
    ForbiddenInduced(Vec<Graph>),
}

/// Declarative description of an overlap predicate, as found in instance files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlphaSpec {
    /// Conflict iff |s_i ∩ s_j| > t.
    Size { t: usize },
    /// Conflict iff the overlap's total element weight exceeds `w_t`.
    Weight { w_t: f64 },
    /// Conflict iff the additive measure given by `values` exceeds `t` on the overlap.
    Measure { t: f64, values: Vec<f64> },
    /// Conflict iff the overlap has two elements at universe distance > `d_t`.
    Metric { d_t: f64 },
    /// As `metric`, with hop distances in the instance graph.
    Distance { d_t: f64 },
    /// Conflict iff the graph induced by a non-empty overlap leaves `class`.
    Pattern { class: PatternClass },
    /// Conflict iff some overlap element lacks the universe property flag.
    Property,
    /// Conflict iff a non-empty overlap of size O has fewer than O(O−1)/2 − c edges.
    DenseOverlap { c: usize },
    /// Conflict iff a non-empty overlap has more than `t` vertices or more than `c` edges.
    Density { t: usize, c: usize },
    /// Conflict iff any part conflicts.
    Conjunction { parts: Vec<AlphaSpec> },
}

impl AlphaSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            AlphaSpec::Size { .. } => "size",
            AlphaSpec::Weight { .. } => "weight",
            AlphaSpec::Measure { .. } => "measure",
            AlphaSpec::Metric { .. } => "metric",
            AlphaSpec::Distance { .. } => "distance",
            AlphaSpec::Pattern { .. } => "pattern",
            AlphaSpec::Property => "property",
            AlphaSpec::DenseOverlap { .. } => "dense_overlap",
            AlphaSpec::Density { .. } => "density",
            AlphaSpec::Conjunction { .. } => "conjunction",
        }
    }

    pub fn uses_universe_distances(&self) -> bool {
        match self {
            AlphaSpec::Metric { .. } => true,
            AlphaSpec::Conjunction { parts } => parts.iter().any(AlphaSpec::uses_universe_distances),
            _ => false,
        }
    }

    pub fn needs_graph(&self) -> bool {
        match self {
            AlphaSpec::Distance { .. }
            | AlphaSpec::Pattern { .. }
            | AlphaSpec::DenseOverlap { .. }
            | AlphaSpec::Density { .. } => true,
            AlphaSpec::Conjunction { parts } => parts.iter().any(AlphaSpec::needs_graph),
            _ => false,
        }
    }
}

/// A built-in predicate closed over its parameters and annotations.
#[derive(Clone, Debug)]
pub enum Predicate {
    Size { t: usize },
    Weight { weights: Arc<[f64]>, w_t: f64 },
    Measure { values: Arc<[f64]>, t: f64 },
    Metric { dist: Arc<DistanceMatrix>, d_t: f64 },
    Pattern { graph: Arc<Graph>, class: Arc<[SmallGraph]>, kind: PatternKind },
    Property { flags: Arc<[bool]> },
    DenseOverlap { graph: Arc<Graph>, c: usize },
    Density { graph: Arc<Graph>, t: usize, c: usize },
    All(Vec<Predicate>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PatternKind {
    Clique,
    Edgeless,
    ForbiddenInduced,
}

impl Predicate {
    /// Verdict given the overlap region alone.
    pub fn conflicts_on_overlap(&self, overlap: &ElementSet) -> bool {
        if overlap.is_empty() {
            return false;
        }
        match self {
            Predicate::Size { t } => overlap.len() > *t,
            Predicate::Weight { weights, w_t } => overlap.iter().map(|u| weights[u]).sum::<f64>() > *w_t,
            Predicate::Measure { values, t } => overlap.iter().map(|u| values[u]).sum::<f64>() > *t,
            Predicate::Metric { dist, d_t } => {
                let v = overlap.as_slice();
                v.iter().enumerate().any(|(i, &a)| v[i + 1..].iter().any(|&b| dist.get(a, b) > *d_t))
            }
            Predicate::Pattern { graph, class, kind } => {
                let h = graph.induced(overlap);
                match kind {
                    PatternKind::Clique => !h.is_clique(),
                    PatternKind::Edgeless => !h.is_edgeless(),
                    PatternKind::ForbiddenInduced => class.iter().any(|f| contains_induced(&h, f)),
                }
            }
            Predicate::Property { flags } => overlap.iter().any(|u| !flags[u]),
            Predicate::DenseOverlap { graph, c } => {
                let o = overlap.len();
                graph.induced_edge_count(overlap) + c < o * (o - 1) / 2
            }
            Predicate::Density { graph, t, c } => overlap.len() > *t || graph.induced_edge_count(overlap) > *c,
            Predicate::All(parts) => parts.iter().any(|p| p.conflicts_on_overlap(overlap)),
        }
    }
}

impl OverlapPredicate for Predicate {
    fn evaluate(&self, a: &ElementSet, b: &ElementSet) -> Verdict {
        Verdict::from_conflict(self.conflicts_on_overlap(&a.intersection(b)))
    }
}

fn non_negative(what: &str, x: f64) -> Result<f64> {
    if x.is_finite() && x >= 0.0 {
        Ok(x)
    } else {
        Err(Error::InvalidParameter(format!("{what} must be a finite non-negative number, got {x}")))
    }
}

fn graph_for<'g>(kind: &'static str, graph: Option<&'g Graph>, n: usize) -> Result<&'g Graph> {
    let g = graph.ok_or(Error::MissingAnnotation { kind, what: "a graph context" })?;
    if g.n() != n {
        return Err(Error::AnnotationLength { what: "graph vertices", got: g.n(), expected: n });
    }
    Ok(g)
}

/// Builds a predicate from its spec, checking parameters and that the
/// required annotations are present.
pub fn build_predicate(spec: &AlphaSpec, universe: &Universe, graph: Option<&Graph>) -> Result<Predicate> {
    let n = universe.n;
    Ok(match spec {
        AlphaSpec::Size { t } => Predicate::Size { t: *t },
        AlphaSpec::Weight { w_t } => {
            let weights =
                universe.weights.as_ref().ok_or(Error::MissingAnnotation { kind: "weight", what: "weights" })?;
            Predicate::Weight { weights: weights.as_slice().into(), w_t: non_negative("w_t", *w_t)? }
        }
        AlphaSpec::Measure { t, values } => {
            if values.len() != n {
                return Err(Error::AnnotationLength { what: "measure values", got: values.len(), expected: n });
            }
            for &v in values {
                non_negative("measure value", v)?;
            }
            Predicate::Measure { values: values.as_slice().into(), t: non_negative("t", *t)? }
        }
        AlphaSpec::Metric { d_t } => {
            let dist =
                universe.distances.as_ref().ok_or(Error::MissingAnnotation { kind: "metric", what: "distances" })?;
            Predicate::Metric { dist: Arc::new(dist.clone()), d_t: positive_threshold(*d_t)? }
        }
        AlphaSpec::Distance { d_t } => {
            let g = graph_for("distance", graph, n)?;
            Predicate::Metric { dist: Arc::new(graph_distance_matrix(g)), d_t: positive_threshold(*d_t)? }
        }
        AlphaSpec::Pattern { class } => {
            let g = graph_for("pattern", graph, n)?;
            let (kind, graphs) = match class {
                PatternClass::Clique => (PatternKind::Clique, Vec::new()),
                PatternClass::Edgeless => (PatternKind::Edgeless, Vec::new()),
                PatternClass::ForbiddenInduced(list) => {
                    if list.iter().any(|f| f.n() == 0) {
                        return Err(Error::InvalidParameter(
                            "forbidden induced graphs need at least one vertex".into(),
                        ));
                    }
                    (PatternKind::ForbiddenInduced, list.iter().map(Graph::as_small).collect())
                }
            };
            Predicate::Pattern { graph: Arc::new(g.clone()), class: graphs.into(), kind }
        }
        AlphaSpec::Property => {
            let flags = universe
                .properties
                .as_ref()
                .ok_or(Error::MissingAnnotation { kind: "property", what: "properties" })?;
            Predicate::Property { flags: flags.as_slice().into() }
        }
        AlphaSpec::DenseOverlap { c } => {
            Predicate::DenseOverlap { graph: Arc::new(graph_for("dense_overlap", graph, n)?.clone()), c: *c }
        }
        AlphaSpec::Density { t, c } => {
            Predicate::Density { graph: Arc::new(graph_for("density", graph, n)?.clone()), t: *t, c: *c }
        }
        AlphaSpec::Conjunction { parts } => {
            Predicate::All(parts.iter().map(|p| build_predicate(p, universe, graph)).collect::<Result<_>>()?)
        }
    })
}

fn positive_threshold(d_t: f64) -> Result<f64> {
    if d_t.is_finite() && d_t > 0.0 {
        Ok(d_t)
    } else {
        Err(Error::InvalidParameter(format!("d_t must be a finite positive number, got {d_t}")))
    }
}

const MEMO_CAPACITY: usize = 1 << 20;

/// Caches verdicts per unordered pair of sets and counts calls that reach
/// the wrapped predicate. Single-threaded; parallel solvers keep one each.
pub struct MemoPredicate<'a, P: ?Sized> {
    inner: &'a P,
    memo: RefCell<HashMap<Vec<usize>, Verdict>>,
    evaluations: Cell<u64>,
}

impl<'a, P: OverlapPredicate + ?Sized> MemoPredicate<'a, P> {
    pub fn new(inner: &'a P) -> Self {
        MemoPredicate { inner, memo: RefCell::new(HashMap::new()), evaluations: Cell::new(0) }
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations.get()
    }
}

impl<P: OverlapPredicate + ?Sized> OverlapPredicate for MemoPredicate<'_, P> {
    fn evaluate(&self, a: &ElementSet, b: &ElementSet) -> Verdict {
        let (x, y) = if a <= b { (a, b) } else { (b, a) };
        let mut key = Vec::with_capacity(x.len() + y.len() + 1);
        key.extend(x.iter());
        key.push(usize::MAX);
        key.extend(y.iter());
        if let Some(&v) = self.memo.borrow().get(&key) {
            return v;
        }
        let v = self.inner.evaluate(a, b);
        self.evaluations.set(self.evaluations.get() + 1);
        let mut memo = self.memo.borrow_mut();
        if memo.len() < MEMO_CAPACITY {
            memo.insert(key, v);
        }
        v
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub pair: (ElementSet, ElementSet),
    /// The subset pair; absent for a conflicting pair with empty overlap.
    pub sub_pair: Option<(ElementSet, ElementSet)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ConditionReport {
    pub hereditary_violations: Vec<Witness>,
    pub condition_ii_violations: Vec<Witness>,
    pub checked_pairs: u64,
    /// Set when more violations were found than are listed.
    pub truncated: bool,
}

impl ConditionReport {
    pub fn passed(&self) -> bool {
        self.hereditary_violations.is_empty() && self.condition_ii_violations.is_empty()
    }
}

const MAX_WITNESSES: usize = 256;

/// Largest universe accepted by [`validate_well_conditioned`].
pub const VALIDATOR_MAX_N: usize = 8;

/// Exhaustively checks the hereditary and overlap conditions on every pair
/// of subsets of `{0..n_max}` with at most `r` elements, against every pair
/// of their subsets.
pub fn validate_well_conditioned<P: OverlapPredicate + ?Sized>(pred: &P, n_max: usize, r: usize) -> ConditionReport {
    assert!(n_max <= VALIDATOR_MAX_N, "n_max must be at most {VALIDATOR_MAX_N}");
    let full = 1usize << n_max;
    let masks: Vec<usize> = (0..full).filter(|m| m.count_ones() as usize <= r).collect();
    let sets: Vec<ElementSet> = (0..full).map(|m| ElementSet::from_mask(m as u64)).collect();

    let mut conflict = vec![false; full * full];
    for &a in &masks {
        for &b in &masks {
            conflict[a * full + b] = pred.conflicts(&sets[a], &sets[b]);
        }
    }

    let mut report = ConditionReport::default();
    let witness = |a: usize, b: usize, sub: Option<(usize, usize)>| Witness {
        pair: (sets[a].clone(), sets[b].clone()),
        sub_pair: sub.map(|(x, y)| (sets[x].clone(), sets[y].clone())),
    };
    let push = |list: &mut Vec<Witness>, truncated: &mut bool, w: Witness| {
        if list.len() < MAX_WITNESSES {
            list.push(w);
        } else {
            *truncated = true;
        }
    };

    for &a in &masks {
        for &b in &masks {
            report.checked_pairs += 1;
            let overlap = a & b;
            let is_conflict = conflict[a * full + b];
            if is_conflict && overlap == 0 {
                push(&mut report.condition_ii_violations, &mut report.truncated, witness(a, b, None));
            }
            for sa in submasks(a) {
                for sb in submasks(b) {
                    let sub_conflict = conflict[sa * full + sb];
                    if !is_conflict && sub_conflict {
                        push(&mut report.hereditary_violations, &mut report.truncated, witness(a, b, Some((sa, sb))));
                    } else if is_conflict && !sub_conflict && sa & sb == overlap {
                        push(&mut report.condition_ii_violations, &mut report.truncated, witness(a, b, Some((sa, sb))));
                    }
                }
            }
        }
    }
    report
}

/// All submasks of `mask`, including `mask` and 0.
fn submasks(mask: usize) -> impl Iterator<Item = usize> {
    let mut next = Some(mask);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 { None } else { Some((cur - 1) & mask) };
        Some(cur)
    })
}
