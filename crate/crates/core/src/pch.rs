//! Predetermined cluster heads: every packed set must contain one of the
//! given head sets, and packed sets may not share head elements.

use itertools::Itertools;
use log::warn;

use crate::alpha::{OverlapPredicate, Verdict};
use crate::error::{Error, Result};
use crate::instance::{ElementSet, SetFamily, SetSystemInstance};
use crate::solver::{self, PartialSolution, SolveReport, SolverConfig};

/// The head collection 𝒞 with heads larger than r dropped. Dropped heads
/// still count towards val(𝒞): packed sets may not share their elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterHeads {
    heads: Vec<ElementSet>,
    elements: ElementSet,
    discarded: usize,
}

impl ClusterHeads {
    pub fn new(heads: Vec<ElementSet>, r: usize) -> Self {
        let before = heads.len();
        let elements = heads.iter().fold(ElementSet::empty(), |acc, h| acc.union(h));
        let heads: Vec<ElementSet> = heads.into_iter().filter(|h| h.len() <= r).collect();
        ClusterHeads { discarded: before - heads.len(), heads, elements }
    }

    pub fn heads(&self) -> &[ElementSet] {
        &self.heads
    }

    /// val(𝒞).
    pub fn elements(&self) -> &ElementSet {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.heads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heads.is_empty()
    }

    pub fn discarded(&self) -> usize {
        self.discarded
    }
}

/// Root children: one per k-combination of distinct heads, slot j = j-th head.
pub fn initialize_children_pch(heads: &ClusterHeads, k: usize) -> Vec<PartialSolution> {
    if heads.len() < k || k == 0 {
        return Vec::new();
    }
    heads.heads().iter().cloned().combinations(k).map(PartialSolution::new).collect()
}

/// Shared-heads roots: one per size-k multiset of heads, since two packed
/// sets may then contain the same head.
pub fn initialize_children_pch_shared(heads: &ClusterHeads, k: usize) -> Vec<PartialSolution> {
    if k == 0 {
        return Vec::new();
    }
    heads.heads().iter().cloned().combinations_with_replacement(k).map(PartialSolution::new).collect()
}

/// Conflict whenever the overlap touches a head element; otherwise defer to
/// the wrapped predicate.
#[derive(Clone, Debug)]
pub struct PchPredicate<P> {
    inner: P,
    head_elements: ElementSet,
}

impl<P> PchPredicate<P> {
    pub fn inner(&self) -> &P {
        &self.inner
    }
}

pub fn wrap_alpha_pch<P: OverlapPredicate>(pred: P, heads: &ClusterHeads) -> PchPredicate<P> {
    PchPredicate { inner: pred, head_elements: heads.elements().clone() }
}

impl<P: OverlapPredicate> OverlapPredicate for PchPredicate<P> {
    fn evaluate(&self, a: &ElementSet, b: &ElementSet) -> Verdict {
        if a.intersection(b).intersects(&self.head_elements) {
            Verdict::Conflict
        } else {
            self.inner.evaluate(a, b)
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct PchConfig {
    /// Allow packed sets to share head elements (the inner predicate is used
    /// unwrapped; only head containment is required).
    pub shared_heads: bool,
    pub solver: SolverConfig,
}

pub fn solve_pch(instance: &SetSystemInstance, config: PchConfig) -> Result<SolveReport> {
    let raw = instance
        .cluster_heads
        .clone()
        .ok_or_else(|| Error::InvalidParameter("cluster-head mode needs `cluster_heads`".into()))?;
    let heads = ClusterHeads::new(raw, instance.r());
    if heads.discarded() > 0 {
        warn!("discarded {} cluster heads larger than r = {}", heads.discarded(), instance.r());
    }
    for h in heads.heads() {
        if instance.family.sets_containing(h).is_empty() {
            warn!("cluster head {h} is contained in no set of the family");
        }
    }
    let pred = instance.predicate()?;
    let report = if config.shared_heads {
        let roots = initialize_children_pch_shared(&heads, instance.k);
        solve_pch_with(&instance.family, instance.k, &pred, roots, heads.len(), config.solver)
    } else {
        let roots = initialize_children_pch(&heads, instance.k);
        solve_pch_with(&instance.family, instance.k, &wrap_alpha_pch(pred, &heads), roots, heads.len(), config.solver)
    };
    Ok(report)
}

/// Searches from the given head roots with `pred` as given; callers choose
/// the roots and whether `pred` is wrapped.
pub fn solve_pch_with<P: OverlapPredicate + Sync + ?Sized>(
    family: &SetFamily,
    k: usize,
    pred: &P,
    roots: Vec<PartialSolution>,
    head_count: usize,
    config: SolverConfig,
) -> SolveReport {
    let root_children = roots.len() as u64;
    let budget = config.node_budget.unwrap_or_else(|| {
        solver::clamp_budget(solver::tree_size_bound_from_roots(root_children as u128, k, family.r()))
    });
    let result = solver::search(roots, family, pred, budget, config.parallel);
    SolveReport {
        solution: result.solution,
        nodes_expanded: result.nodes_expanded,
        max_depth: result.max_depth,
        root_children,
        predicate_evaluations: result.predicate_evaluations,
        seeded_by_maximal: false,
        budget_exhausted: result.budget_exhausted,
        cluster_heads: Some(head_count as u64),
    }
}
