//! Bounded search tree for r-Set Packing with α()-Overlap.
//!
//! The tree is seeded from a maximal α-packing M: when |M| ≥ k, M already
//! answers the instance. Otherwise every solution set meets val(M), so the
//! root gets one child per size-k multiset over val(M), each slot holding a
//! single element. At a node, greedy completion tries to extend every slot to
//! a family member; when it gets stuck on slot j, the elements shared between
//! the sponsors of slot j and the greedily packed sets (I*) are the branching
//! alphabet, and each child grows slot j by one of them.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alpha::{MemoPredicate, OverlapPredicate};
use crate::error::Result;
use crate::instance::{ElementSet, SetFamily, SetSystemInstance, Solution};

/// The slots s_1..s_k carried by a search-tree node.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PartialSolution {
    slots: Vec<ElementSet>,
}

impl PartialSolution {
    pub fn new(slots: Vec<ElementSet>) -> Self {
        PartialSolution { slots }
    }

    pub fn slots(&self) -> &[ElementSet] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    fn with_slot(&self, j: usize, slot: ElementSet) -> Self {
        let mut slots = self.slots.clone();
        slots[j] = slot;
        PartialSolution { slots }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GreedyOutcome {
    Complete(Solution),
    /// Greedy packed `packed` (one member per slot, in slot order) and found
    /// no admissible sponsor for slot `slot == packed.len()` (0-based).
    Stuck {
        packed: Vec<usize>,
        slot: usize,
    },
    Infeasible,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveReport {
    pub solution: Option<Vec<usize>>,
    pub nodes_expanded: u64,
    /// Branching depth below the root's children.
    pub max_depth: u64,
    pub root_children: u64,
    pub predicate_evaluations: u64,
    /// The answer came straight from the maximal packing.
    pub seeded_by_maximal: bool,
    pub budget_exhausted: bool,
    /// Number of cluster heads after filtering, in cluster-head mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster_heads: Option<u64>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SolverConfig {
    /// Maximum number of expanded nodes; `None` uses the theoretical tree bound.
    pub node_budget: Option<u64>,
    /// Explore the root's subtrees concurrently. Node counts become upper
    /// bounds on the sequential counts rather than exact.
    pub parallel: bool,
}

/// Greedy scan in member order, keeping every member that does not conflict
/// with those already kept.
pub fn maximal_alpha_packing<P: OverlapPredicate + ?Sized>(family: &SetFamily, pred: &P) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::new();
    for (i, s) in family.members().iter().enumerate() {
        if kept.iter().all(|&j| !pred.conflicts(s, family.get(j))) {
            kept.push(i);
        }
    }
    kept
}

/// Root children: one partial solution per size-k multiset over val(M), in
/// lexicographic order, every slot a singleton.
pub fn initialize_children(m: &[usize], family: &SetFamily, k: usize) -> Vec<PartialSolution> {
    let values = family.union_of(m);
    if values.is_empty() || k == 0 {
        return Vec::new();
    }
    values
        .iter()
        .combinations_with_replacement(k)
        .map(|combo| PartialSolution::new(combo.into_iter().map(ElementSet::singleton).collect()))
        .collect()
}

/// 𝒮(s_j, Q, α): members containing slot `j` that neither conflict with nor
/// equal any other slot.
pub fn feasible_sponsors<P: OverlapPredicate + ?Sized>(
    j: usize,
    q: &PartialSolution,
    family: &SetFamily,
    pred: &P,
) -> Vec<usize> {
    let slots = q.slots();
    family
        .sets_containing(&slots[j])
        .into_iter()
        .filter(|&i| {
            let member = family.get(i);
            slots
                .iter()
                .enumerate()
                .filter(|&(f, _)| f != j)
                .all(|(_, other)| other != member && !pred.conflicts(other, member))
        })
        .collect()
}

/// Tries to complete `q`, choosing for each slot the first sponsor (member
/// order) that is not yet packed and conflicts with nothing packed.
pub fn greedy_complete<P: OverlapPredicate + ?Sized>(
    q: &PartialSolution,
    family: &SetFamily,
    pred: &P,
) -> GreedyOutcome {
    let slots = q.slots();
    for (f, a) in slots.iter().enumerate() {
        if slots[f + 1..].iter().any(|b| pred.conflicts(a, b)) {
            return GreedyOutcome::Infeasible;
        }
    }
    let mut packed: Vec<usize> = Vec::with_capacity(slots.len());
    for j in 0..slots.len() {
        let sponsors = feasible_sponsors(j, q, family, pred);
        if sponsors.is_empty() {
            return GreedyOutcome::Infeasible;
        }
        let pick = sponsors
            .into_iter()
            .find(|&s| !packed.contains(&s) && packed.iter().all(|&p| !pred.conflicts(family.get(s), family.get(p))));
        match pick {
            Some(s) => packed.push(s),
            None => return GreedyOutcome::Stuck { packed, slot: j },
        }
    }
    GreedyOutcome::Complete(Solution::new(packed))
}

/// Children of a stuck node: slot `slot` grown by each element of I*,
/// dropping any slot that would exceed r elements.
pub fn branch<P: OverlapPredicate + ?Sized>(
    q: &PartialSolution,
    packed: &[usize],
    slot: usize,
    family: &SetFamily,
    pred: &P,
) -> Vec<PartialSolution> {
    conflict_elements(q, packed, slot, family, pred)
        .into_iter()
        .map(|u| q.slots()[slot].with_element(u))
        .filter(|grown| grown.len() <= family.r())
        .map(|grown| q.with_slot(slot, grown))
        .collect()
}

/// I*: the union of (S ∖ s_j) ∩ S' over sponsors S of slot j and packed sets
/// S' with S = S' or α(S, S') = 1, in ascending element order.
pub fn conflict_elements<P: OverlapPredicate + ?Sized>(
    q: &PartialSolution,
    packed: &[usize],
    slot: usize,
    family: &SetFamily,
    pred: &P,
) -> Vec<usize> {
    let stuck = &q.slots()[slot];
    let mut found = BTreeSet::new();
    for s in feasible_sponsors(slot, q, family, pred) {
        let sponsor = family.get(s);
        let rest = sponsor.difference(stuck);
        for &p in packed {
            let other = family.get(p);
            if s == p || pred.conflicts(sponsor, other) {
                found.extend(rest.intersection(other).iter());
            }
        }
    }
    found.into_iter().collect()
}

pub fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// C(k·r·(k−1), k) · (r(k−1))^((r−1)k): the bound on expanded nodes.
pub fn tree_size_bound(k: usize, r: usize) -> u128 {
    let (k, r) = (k as u128, r as u128);
    let branching = r * k.saturating_sub(1);
    let roots = binomial(k * branching, k);
    let height = (r.saturating_sub(1) * k) as u32;
    roots.saturating_mul(branching.saturating_pow(height))
}

/// (r−1)·k: the bound on branching depth.
pub fn depth_bound(k: usize, r: usize) -> u64 {
    (r.saturating_sub(1) * k) as u64
}

/// Bound on nodes of a tree with `roots` root children, branching factor at
/// most r(k−1) and at most (r−1)k levels of branching.
pub(crate) fn tree_size_bound_from_roots(roots: u128, k: usize, r: usize) -> u128 {
    let branching = (r * k.saturating_sub(1)) as u128;
    let height = depth_bound(k, r) as u32;
    let mut level: u128 = 1;
    let mut total: u128 = 1;
    for _ in 0..height {
        level = level.saturating_mul(branching);
        total = total.saturating_add(level);
    }
    roots.saturating_mul(total)
}

pub(crate) struct SearchResult {
    pub solution: Option<Vec<usize>>,
    pub nodes_expanded: u64,
    pub max_depth: u64,
    pub predicate_evaluations: u64,
    pub budget_exhausted: bool,
}

struct SearchState {
    nodes: AtomicU64,
    max_depth: AtomicU64,
    evaluations: AtomicU64,
    exhausted: AtomicBool,
    budget: u64,
}

impl SearchState {
    /// Claims one node expansion; false once the budget is used up.
    fn claim(&self) -> bool {
        let prev = self.nodes.fetch_add(1, Ordering::Relaxed);
        if prev >= self.budget {
            self.nodes.fetch_sub(1, Ordering::Relaxed);
            self.exhausted.store(true, Ordering::Relaxed);
            return false;
        }
        true
    }
}

fn explore<P: OverlapPredicate + ?Sized>(
    roots: Vec<PartialSolution>,
    family: &SetFamily,
    pred: &P,
    state: &SearchState,
) -> Option<Vec<usize>> {
    let memo = MemoPredicate::new(pred);
    let mut stack: Vec<(PartialSolution, u64)> = roots.into_iter().rev().map(|q| (q, 0)).collect();
    let mut found = None;
    while let Some((q, depth)) = stack.pop() {
        if state.exhausted.load(Ordering::Relaxed) || !state.claim() {
            break;
        }
        state.max_depth.fetch_max(depth, Ordering::Relaxed);
        match greedy_complete(&q, family, &memo) {
            GreedyOutcome::Complete(sol) => {
                found = Some(sol.chosen);
                break;
            }
            GreedyOutcome::Infeasible => {}
            GreedyOutcome::Stuck { packed, slot } => {
                let children = branch(&q, &packed, slot, family, &memo);
                stack.extend(children.into_iter().rev().map(|c| (c, depth + 1)));
            }
        }
    }
    state.evaluations.fetch_add(memo.evaluations(), Ordering::Relaxed);
    found
}

/// Depth-first search from the given root children.
pub(crate) fn search<P: OverlapPredicate + Sync + ?Sized>(
    roots: Vec<PartialSolution>,
    family: &SetFamily,
    pred: &P,
    budget: u64,
    parallel: bool,
) -> SearchResult {
    let state = SearchState {
        nodes: AtomicU64::new(0),
        max_depth: AtomicU64::new(0),
        evaluations: AtomicU64::new(0),
        exhausted: AtomicBool::new(false),
        budget,
    };
    let solution = if parallel {
        roots.into_par_iter().find_map_first(|root| explore(vec![root], family, pred, &state))
    } else {
        explore(roots, family, pred, &state)
    };
    let budget_exhausted = solution.is_none() && state.exhausted.load(Ordering::Relaxed);
    SearchResult {
        solution,
        nodes_expanded: state.nodes.load(Ordering::Relaxed),
        max_depth: state.max_depth.load(Ordering::Relaxed),
        predicate_evaluations: state.evaluations.load(Ordering::Relaxed),
        budget_exhausted,
    }
}

pub(crate) fn clamp_budget(bound: u128) -> u64 {
    u64::try_from(bound).unwrap_or(u64::MAX)
}

/// Solves the instance with its own overlap predicate. Cluster heads, if
/// present, are ignored here; see [`crate::pch::solve_pch`].
pub fn solve(instance: &SetSystemInstance) -> Result<SolveReport> {
    solve_with_config(instance, SolverConfig::default())
}

pub fn solve_with_config(instance: &SetSystemInstance, config: SolverConfig) -> Result<SolveReport> {
    let pred = instance.predicate()?;
    Ok(solve_with(&instance.family, instance.k, &pred, config))
}

pub fn solve_with<P: OverlapPredicate + Sync + ?Sized>(
    family: &SetFamily,
    k: usize,
    pred: &P,
    config: SolverConfig,
) -> SolveReport {
    let memo = MemoPredicate::new(pred);
    let maximal = maximal_alpha_packing(family, &memo);
    if maximal.len() >= k {
        return SolveReport {
            solution: Some(maximal[..k].to_vec()),
            nodes_expanded: 0,
            max_depth: 0,
            root_children: 0,
            predicate_evaluations: memo.evaluations(),
            seeded_by_maximal: true,
            budget_exhausted: false,
            cluster_heads: None,
        };
    }
    let roots = initialize_children(&maximal, family, k);
    let root_children = roots.len() as u64;
    let budget = config.node_budget.unwrap_or_else(|| clamp_budget(tree_size_bound(k, family.r())));
    let result = search(roots, family, pred, budget, config.parallel);
    SolveReport {
        solution: result.solution,
        nodes_expanded: result.nodes_expanded,
        max_depth: result.max_depth,
        root_children,
        predicate_evaluations: memo.evaluations() + result.predicate_evaluations,
        seeded_by_maximal: false,
        budget_exhausted: result.budget_exhausted,
        cluster_heads: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alpha::Predicate;

    fn set(v: &[usize]) -> ElementSet {
        ElementSet::new(v.to_vec()).unwrap()
    }

    fn family(sets: &[&[usize]]) -> SetFamily {
        let n = sets.iter().flat_map(|s| s.iter()).max().map_or(1, |m| m + 1).max(8);
        let r = sets.iter().map(|s| s.len()).max().unwrap_or(1).max(3);
        SetFamily::new(sets.iter().map(|s| set(s)).collect(), r, n).unwrap()
    }

    fn q(slots: &[&[usize]]) -> PartialSolution {
        PartialSolution::new(slots.iter().map(|s| set(s)).collect())
    }

    #[test]
    fn maximal_packing_examples() {
        let size1 = Predicate::Size { t: 1 };
        assert_eq!(maximal_alpha_packing(&family(&[&[0, 1, 2], &[1, 2, 3], &[4, 5, 6]]), &size1), vec![0, 2]);
        assert_eq!(maximal_alpha_packing(&family(&[&[0, 1], &[2, 3], &[4]]), &size1), vec![0, 1, 2]);
        assert!(maximal_alpha_packing(&family(&[]), &size1).is_empty());
    }

    #[test]
    fn initialize_children_examples() {
        // val(M) = {a, b} with a = 3, b = 5.
        let f = family(&[&[3, 5]]);
        assert_eq!(initialize_children(&[0], &f, 2), vec![q(&[&[3], &[3]]), q(&[&[3], &[5]]), q(&[&[5], &[5]])]);
        let f = family(&[&[4]]);
        assert_eq!(initialize_children(&[0], &f, 3), vec![q(&[&[4], &[4], &[4]])]);
        assert!(initialize_children(&[], &f, 2).is_empty());
    }

    #[test]
    fn feasible_sponsors_examples() {
        let f = family(&[&[0, 1, 2], &[1, 2, 3]]);
        let size1 = Predicate::Size { t: 1 };
        assert_eq!(feasible_sponsors(0, &q(&[&[0], &[3]]), &f, &size1), vec![0]);
        assert!(feasible_sponsors(0, &q(&[&[5], &[3]]), &f, &size1).is_empty());

        let f = family(&[&[0, 1, 2]]);
        assert_eq!(feasible_sponsors(0, &q(&[&[0], &[0]]), &f, &size1), vec![0]);
        assert!(feasible_sponsors(0, &q(&[&[0], &[0]]), &f, &Predicate::Size { t: 0 }).is_empty());
        // A member equal to another slot is never a sponsor.
        assert!(feasible_sponsors(0, &q(&[&[0], &[0, 1, 2]]), &f, &Predicate::Size { t: 3 }).is_empty());
    }

    #[test]
    fn greedy_examples() {
        let size0 = Predicate::Size { t: 0 };
        let f = family(&[&[0, 1, 2], &[4, 5, 6]]);
        assert_eq!(greedy_complete(&q(&[&[0], &[4]]), &f, &size0), GreedyOutcome::Complete(Solution::new(vec![0, 1])));

        let f = family(&[&[0, 1, 2], &[1, 2, 3]]);
        // [0,1,2] overlaps slot {1}, so slot {0} has no sponsor.
        assert_eq!(greedy_complete(&q(&[&[0], &[1]]), &f, &size0), GreedyOutcome::Infeasible);
        let size1 = Predicate::Size { t: 1 };
        assert_eq!(greedy_complete(&q(&[&[0], &[3]]), &f, &size1), GreedyOutcome::Stuck { packed: vec![0], slot: 1 });
        assert_eq!(greedy_complete(&q(&[&[0], &[0]]), &f, &size0), GreedyOutcome::Infeasible);
        // Empty sponsor set.
        assert_eq!(greedy_complete(&q(&[&[7], &[1]]), &f, &size0), GreedyOutcome::Infeasible);
    }

    #[test]
    fn branch_examples() {
        let size0 = Predicate::Size { t: 0 };
        let size1 = Predicate::Size { t: 1 };
        let f = family(&[&[0, 1, 2], &[1, 2, 3]]);
        let node = q(&[&[0], &[3]]);
        // Sponsor [1,2,3] of slot {3} meets packed [0,1,2] in {1,2}.
        assert_eq!(conflict_elements(&node, &[0], 1, &f, &size1), vec![1, 2]);
        assert_eq!(branch(&node, &[0], 1, &f, &size1), vec![q(&[&[0], &[1, 3]]), q(&[&[0], &[2, 3]])]);

        // A sponsor equal to a packed set contributes too.
        let f2 = family(&[&[0, 1, 2]]);
        let node2 = q(&[&[0], &[2]]);
        assert_eq!(conflict_elements(&node2, &[0], 1, &f2, &Predicate::Size { t: 3 }), vec![0, 1]);

        // No packed sets: I* is empty.
        assert!(branch(&node, &[], 1, &f, &size0).is_empty());

        // Slot already at r = 3 elements cannot grow.
        let f3 = SetFamily::new(vec![set(&[0, 1, 2]), set(&[1, 2, 3])], 3, 8).unwrap();
        let full = q(&[&[0], &[1, 2, 3]]);
        let grown = branch(&full, &[0], 1, &f3, &size0);
        assert!(grown.iter().all(|c| c.slots()[1].len() <= 3));
    }

    fn instance(sets: &[&[usize]], t: usize, k: usize) -> SetSystemInstance {
        SetSystemInstance {
            universe: crate::instance::Universe::new(8),
            family: family(sets),
            k,
            alpha: crate::alpha::AlphaSpec::Size { t },
            cluster_heads: None,
            graph: None,
        }
    }

    #[test]
    fn solve_examples() {
        let rep = solve(&instance(&[&[0, 1], &[2, 3]], 0, 2)).unwrap();
        assert_eq!(rep.solution, Some(vec![0, 1]));
        assert_eq!(rep.nodes_expanded, 0);
        assert!(rep.seeded_by_maximal);

        let rep = solve(&instance(&[&[0, 1, 2], &[1, 2, 3]], 1, 2)).unwrap();
        assert_eq!(rep.solution, None);
        assert!(!rep.budget_exhausted);

        let rep = solve(&instance(&[&[0, 1, 2], &[2, 3, 4]], 1, 2)).unwrap();
        assert_eq!(rep.solution, Some(vec![0, 1]));
    }

    #[test]
    fn solve_needs_branching() {
        // Maximal packing picks {0,1} and blocks both {0,2} and {1,3};
        // the only 2-packing is {0,2},{1,3}.
        let inst = instance(&[&[0, 1], &[0, 2], &[1, 3]], 0, 2);
        let rep = solve(&inst).unwrap();
        assert_eq!(rep.solution, Some(vec![1, 2]));
        assert!(rep.nodes_expanded > 0);
        assert!(rep.max_depth <= depth_bound(2, 3));
    }

    #[test]
    fn budget_exhaustion_is_distinct() {
        let inst = instance(&[&[0, 1], &[0, 2], &[1, 3]], 0, 2);
        let rep = solve_with_config(&inst, SolverConfig { node_budget: Some(0), parallel: false }).unwrap();
        assert!(rep.budget_exhausted);
        assert_eq!(rep.solution, None);
        assert_eq!(rep.nodes_expanded, 0);
    }

    #[test]
    fn parallel_agrees() {
        let inst = instance(&[&[0, 1], &[0, 2], &[1, 3], &[2, 3, 4]], 0, 2);
        let seq = solve(&inst).unwrap();
        let par = solve_with_config(&inst, SolverConfig { node_budget: None, parallel: true }).unwrap();
        assert_eq!(seq.solution.is_some(), par.solution.is_some());
    }

    #[test]
    fn bounds() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(2, 5), 0);
        // k=2, r=3: C(6,2) · 3^4.
        assert_eq!(tree_size_bound(2, 3), 15 * 81);
        // k=3, r=2: C(12,3) · 4^3.
        assert_eq!(tree_size_bound(3, 2), 220 * 64);
        assert_eq!(tree_size_bound(1, 3), 0);
        assert_eq!(depth_bound(3, 4), 9);
        assert_eq!(tree_size_bound_from_roots(3, 2, 2), 3 * (1 + 2 + 4));
    }
}
