//! Brute-force reference solvers. They enumerate k-subsets in order and
//! check the packing conditions literally; no pruning.

use itertools::Itertools;

use crate::alpha::{self, AlphaSpec, OverlapPredicate, PatternClass};
use crate::error::{Error, Result};
use crate::graph::{check_pi, GraphInstance};
use crate::instance::{ElementSet, SetFamily, SetSystemInstance, Solution};

#[derive(Clone, Copy, Debug)]
pub struct OracleConfig {
    /// Refuse families with more members than this.
    pub max_family_size: usize,
    /// Enforce the cluster-head conditions using the instance's heads.
    pub pch_mode: bool,
    /// In cluster-head mode, allow packed sets to share head elements.
    pub shared_heads: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { max_family_size: 24, pch_mode: false, shared_heads: false }
    }
}

/// First k-subset of the family (in lexicographic index order) that is a
/// valid packing, or `None`.
pub fn brute_force_solve(instance: &SetSystemInstance, cfg: OracleConfig) -> Result<Option<Solution>> {
    if instance.family.len() > cfg.max_family_size {
        return Err(Error::OracleBudget(format!(
            "family has {} members, limit is {}",
            instance.family.len(),
            cfg.max_family_size
        )));
    }
    let pred = instance.predicate()?;
    let heads = if cfg.pch_mode {
        Some(
            instance
                .cluster_heads
                .as_deref()
                .ok_or_else(|| Error::InvalidParameter("cluster-head mode needs `cluster_heads`".into()))?,
        )
    } else {
        None
    };
    Ok(first_packing(instance.family.members(), instance.k, &pred, heads, !cfg.shared_heads).map(Solution::new))
}

fn first_packing<P: OverlapPredicate + ?Sized>(
    members: &[ElementSet],
    k: usize,
    pred: &P,
    heads: Option<&[ElementSet]>,
    exclusive_heads: bool,
) -> Option<Vec<usize>> {
    let head_elements = heads.map(|hs| hs.iter().fold(ElementSet::empty(), |acc, h| acc.union(h)));
    let admissible: Vec<bool> =
        members.iter().map(|s| heads.is_none_or(|hs| hs.iter().any(|h| h.is_subset(s)))).collect();
    (0..members.len()).combinations(k).find(|combo| {
        combo.iter().all(|&i| admissible[i])
            && combo.iter().tuple_combinations().all(|(&i, &j)| {
                let (a, b) = (&members[i], &members[j]);
                if pred.conflicts(a, b) {
                    return false;
                }
                match (&head_elements, exclusive_heads) {
                    (Some(he), true) => !a.intersection(b).intersects(he),
                    _ => true,
                }
            })
    })
}

/// Direct graph-side search for a (k,α)-Π-packing: enumerates vertex subsets
/// of size 1..=r by bitmask, keeps those satisfying Π, and checks every
/// k-combination. Distances come from Floyd–Warshall rather than the BFS
/// matrix the set-side reduction uses.
pub fn brute_force_graph_packing(
    gi: &GraphInstance,
    cfg: OracleConfig,
    max_combinations: u128,
) -> Result<Option<Vec<ElementSet>>> {
    gi.validate()?;
    let n = gi.graph.n();
    if n > 24 {
        return Err(Error::OracleBudget(format!("graph oracle handles at most 24 vertices, got {n}")));
    }
    let mut candidates = Vec::new();
    for mask in 1u64..(1 << n) {
        if mask.count_ones() as usize <= gi.r {
            let s = ElementSet::from_mask(mask);
            if check_pi(&gi.graph, &s, &gi.pi) {
                candidates.push(s);
            }
        }
    }
    let combos = crate::solver::binomial(candidates.len() as u128, gi.k as u128);
    if combos > max_combinations {
        return Err(Error::OracleBudget(format!("{combos} combinations exceed the limit {max_combinations}")));
    }
    let direct = DirectGraphAlpha::new(gi)?;
    let heads = if cfg.pch_mode {
        Some(
            gi.cluster_heads
                .as_deref()
                .ok_or_else(|| Error::InvalidParameter("cluster-head mode needs `cluster_heads`".into()))?,
        )
    } else {
        None
    };
    let found = first_packing(&candidates, gi.k, &direct, heads, !cfg.shared_heads);
    Ok(found.map(|combo| combo.into_iter().map(|i| candidates[i].clone()).collect()))
}

/// Graph-side overlap check written against the definitions directly.
struct DirectGraphAlpha<'a> {
    gi: &'a GraphInstance,
    hops: Vec<Vec<f64>>,
    fallback: Option<alpha::Predicate>,
}

impl<'a> DirectGraphAlpha<'a> {
    fn new(gi: &'a GraphInstance) -> Result<Self> {
        let n = gi.graph.n();
        let mut hops = vec![vec![f64::INFINITY; n]; n];
        for (u, row) in hops.iter_mut().enumerate() {
            row[u] = 0.0;
        }
        for (u, v) in gi.graph.edges() {
            hops[u][v] = 1.0;
            hops[v][u] = 1.0;
        }
        for w in 0..n {
            for u in 0..n {
                for v in 0..n {
                    let via = hops[u][w] + hops[w][v];
                    if via < hops[u][v] {
                        hops[u][v] = via;
                    }
                }
            }
        }
        let fallback = if needs_fallback(&gi.alpha) {
            Some(alpha::build_predicate(&gi.alpha, &gi.universe()?, Some(&gi.graph))?)
        } else {
            None
        };
        Ok(DirectGraphAlpha { gi, hops, fallback })
    }

    fn conflict(&self, spec: &AlphaSpec, overlap: &[usize]) -> bool {
        let o = overlap.len();
        if o == 0 {
            return false;
        }
        let g = &self.gi.graph;
        let edges = || overlap.iter().tuple_combinations().filter(|&(&u, &v)| g.has_edge(u, v)).count();
        let far = |d_t: f64| overlap.iter().tuple_combinations().any(|(&u, &v)| self.hops[u][v] > d_t);
        match spec {
            AlphaSpec::Size { t } => o > *t,
            AlphaSpec::Metric { d_t } | AlphaSpec::Distance { d_t } => far(*d_t),
            AlphaSpec::DenseOverlap { c } => (edges() as i64) < (o * (o - 1) / 2) as i64 - *c as i64,
            AlphaSpec::Density { t, c } => o > *t || edges() > *c,
            AlphaSpec::Measure { t, values } => overlap.iter().map(|&u| values[u]).sum::<f64>() > *t,
            AlphaSpec::Pattern { class: PatternClass::Clique } => edges() != o * (o - 1) / 2,
            AlphaSpec::Pattern { class: PatternClass::Edgeless } => edges() != 0,
            AlphaSpec::Conjunction { parts } => parts.iter().any(|p| self.conflict(p, overlap)),
            _ => {
                let set = ElementSet::from_sorted(overlap.to_vec());
                self.fallback.as_ref().expect("fallback predicate built").conflicts_on_overlap(&set)
            }
        }
    }
}

fn needs_fallback(spec: &AlphaSpec) -> bool {
    match spec {
        AlphaSpec::Conjunction { parts } => parts.iter().any(needs_fallback),
        AlphaSpec::Pattern { class: PatternClass::ForbiddenInduced(_) }
        | AlphaSpec::Weight { .. }
        | AlphaSpec::Property => true,
        _ => false,
    }
}

impl OverlapPredicate for DirectGraphAlpha<'_> {
    fn evaluate(&self, a: &ElementSet, b: &ElementSet) -> alpha::Verdict {
        let overlap: Vec<usize> = a.iter().filter(|&u| b.contains(u)).collect();
        alpha::Verdict::from_conflict(self.conflict(&self.gi.alpha, &overlap))
    }
}

/// Family-level helper for callers holding a custom predicate.
pub fn brute_force_with<P: OverlapPredicate + ?Sized>(family: &SetFamily, k: usize, pred: &P) -> Option<Solution> {
    first_packing(family.members(), k, pred, None, true).map(Solution::new)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Graph, PiSpec};
    use crate::instance::Universe;

    fn set(v: &[usize]) -> ElementSet {
        ElementSet::new(v.to_vec()).unwrap()
    }

    fn instance(sets: &[&[usize]], t: usize, k: usize) -> SetSystemInstance {
        SetSystemInstance {
            universe: Universe::new(6),
            family: SetFamily::new(sets.iter().map(|s| set(s)).collect(), 3, 6).unwrap(),
            k,
            alpha: AlphaSpec::Size { t },
            cluster_heads: None,
            graph: None,
        }
    }

    #[test]
    fn oracle_examples() {
        let cfg = OracleConfig::default();
        assert_eq!(
            brute_force_solve(&instance(&[&[0, 1], &[2, 3]], 0, 2), cfg).unwrap(),
            Some(Solution::new(vec![0, 1]))
        );
        assert_eq!(brute_force_solve(&instance(&[&[0, 1], &[1, 2]], 0, 2), cfg).unwrap(), None);
    }

    #[test]
    fn oracle_refuses_large_families() {
        let sets: Vec<Vec<usize>> = (0..6).flat_map(|a| (a + 1..6).map(move |b| vec![a, b])).collect();
        let refs: Vec<&[usize]> = sets.iter().map(Vec::as_slice).collect();
        let cfg = OracleConfig { max_family_size: 10, ..Default::default() };
        assert!(matches!(brute_force_solve(&instance(&refs, 0, 2), cfg), Err(Error::OracleBudget(_))));
    }

    #[test]
    fn oracle_pch_conditions() {
        let mut inst = instance(&[&[0, 1, 2], &[2, 3, 4], &[3, 5]], 1, 2);
        inst.cluster_heads = Some(vec![set(&[0]), set(&[3])]);
        let cfg = OracleConfig { pch_mode: true, ..Default::default() };
        assert_eq!(brute_force_solve(&inst, cfg).unwrap(), Some(Solution::new(vec![0, 1])));
        inst.cluster_heads = Some(vec![set(&[0]), set(&[2])]);
        // {0,1,2} and {2,3,4} share head element 2; {3,5} has no head.
        assert_eq!(brute_force_solve(&inst, cfg).unwrap(), None);
        let shared = OracleConfig { shared_heads: true, ..cfg };
        assert_eq!(brute_force_solve(&inst, shared).unwrap(), Some(Solution::new(vec![0, 1])));
    }

    fn triangles(shared: &[[usize; 2]]) -> Graph {
        let mut edges = vec![[0, 1], [1, 2], [0, 2]];
        edges.extend_from_slice(shared);
        Graph::from_edges(5, &edges).unwrap()
    }

    #[test]
    fn graph_oracle_two_triangles() {
        let k3 = PiSpec::Family { graphs: vec![Graph::complete(3)] };
        // Second triangle 2-3-4 shares vertex 2.
        let gi = GraphInstance {
            graph: triangles(&[[2, 3], [3, 4], [2, 4]]),
            r: 3,
            k: 2,
            pi: k3.clone(),
            alpha: AlphaSpec::Size { t: 1 },
            cluster_heads: None,
        };
        let found = brute_force_graph_packing(&gi, OracleConfig::default(), 1 << 20).unwrap().unwrap();
        assert_eq!(found, vec![set(&[0, 1, 2]), set(&[2, 3, 4])]);

        // Second triangle 1-2-3 shares edge {1,2}.
        let gi = GraphInstance { graph: triangles(&[[1, 3], [2, 3]]), ..gi };
        assert_eq!(brute_force_graph_packing(&gi, OracleConfig::default(), 1 << 20).unwrap(), None);
    }
}
