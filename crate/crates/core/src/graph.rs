//! Graph model, community properties (Π), enumeration of induced
//! Π-subgraphs and the reduction from graph packing to set packing.

use std::collections::VecDeque;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::alpha::AlphaSpec;
use crate::error::{Error, Result};
use crate::instance::{DistanceMatrix, ElementSet, SetFamily, SetSystemInstance, Universe};

/// Simple undirected graph on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<usize>>,
    matrix: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphRepr {
    vertices: usize,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<GraphRepr> for Graph {
    type Error = Error;
    fn try_from(r: GraphRepr) -> Result<Self> {
        Graph::from_edges(r.vertices, &r.edges)
    }
}

impl From<Graph> for GraphRepr {
    fn from(g: Graph) -> Self {
        GraphRepr { vertices: g.n, edges: g.edges().map(|(u, v)| [u, v]).collect() }
    }
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph { n, adj: vec![Vec::new(); n], matrix: vec![false; n * n] }
    }

    /// Rejects self-loops, repeated edges and out-of-range endpoints.
    pub fn from_edges(n: usize, edges: &[[usize; 2]]) -> Result<Self> {
        let mut g = Graph::empty(n);
        for &[u, v] in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!("edge ({u},{v}) out of range for {n} vertices")));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at {u}")));
            }
            if g.has_edge(u, v) {
                return Err(Error::InvalidGraph(format!("parallel edge ({u},{v})")));
            }
            g.matrix[u * n + v] = true;
            g.matrix[v * n + u] = true;
            g.adj[u].push(v);
            g.adj[v].push(u);
        }
        for list in &mut g.adj {
            list.sort_unstable();
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<[usize; 2]> = (0..n).tuple_combinations().map(|(u, v)| [u, v]).collect();
        Graph::from_edges(n, &edges).expect("complete graph is simple")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.matrix[u * self.n + v]
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, ns)| ns.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// |E(G[s])|.
    pub fn induced_edge_count(&self, s: &ElementSet) -> usize {
        let v = s.as_slice();
        let mut count = 0;
        for (i, &a) in v.iter().enumerate() {
            for &b in &v[i + 1..] {
                if self.has_edge(a, b) {
                    count += 1;
                }
            }
        }
        count
    }

    /// Number of edges with exactly one endpoint in `s`.
    pub fn boundary_edge_count(&self, s: &ElementSet) -> usize {
        s.iter().map(|u| self.adj[u].iter().filter(|&&v| !s.contains(v)).count()).sum()
    }

    pub fn induced(&self, s: &ElementSet) -> SmallGraph {
        let v = s.as_slice();
        assert!(v.len() <= 64, "induced subgraphs are limited to 64 vertices");
        let mut adj = vec![0u64; v.len()];
        for i in 0..v.len() {
            for j in 0..v.len() {
                if i != j && self.has_edge(v[i], v[j]) {
                    adj[i] |= 1 << j;
                }
            }
        }
        SmallGraph { adj }
    }

    pub fn as_small(&self) -> SmallGraph {
        self.induced(&ElementSet::from_sorted((0..self.n).collect()))
    }
}

/// Dense bitmask graph for isomorphism checks on at most 64 vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmallGraph {
    adj: Vec<u64>,
}

impl SmallGraph {
    pub fn order(&self) -> usize {
        self.adj.len()
    }

    fn degree(&self, v: usize) -> u32 {
        self.adj[v].count_ones()
    }

    fn edge(&self, u: usize, v: usize) -> bool {
        self.adj[u] >> v & 1 == 1
    }

    fn edge_count(&self) -> u32 {
        self.adj.iter().map(|a| a.count_ones()).sum::<u32>() / 2
    }

    pub fn is_clique(&self) -> bool {
        let n = self.order();
        (0..n).all(|v| self.degree(v) as usize == n - 1)
    }

    pub fn is_edgeless(&self) -> bool {
        self.adj.iter().all(|&a| a == 0)
    }
}

/// Extends a partial injective map `pattern -> host` vertex by vertex,
/// requiring adjacency and non-adjacency to be preserved.
fn extend_embedding(pattern: &SmallGraph, host: &SmallGraph, mapping: &mut Vec<usize>, used: u64, exact: bool) -> bool {
    let next = mapping.len();
    if next == pattern.order() {
        return true;
    }
    for cand in 0..host.order() {
        if used >> cand & 1 == 1 {
            continue;
        }
        if exact && pattern.degree(next) != host.degree(cand) {
            continue;
        }
        let consistent = mapping.iter().enumerate().all(|(p, &h)| pattern.edge(next, p) == host.edge(cand, h));
        if consistent {
            mapping.push(cand);
            if extend_embedding(pattern, host, mapping, used | 1 << cand, exact) {
                return true;
            }
            mapping.pop();
        }
    }
    false
}

/// Exhaustive isomorphism test over vertex permutations (with degree pruning).
pub fn is_isomorphic(a: &SmallGraph, b: &SmallGraph) -> bool {
    if a.order() != b.order() || a.edge_count() != b.edge_count() {
        return false;
    }
    let mut da: Vec<u32> = (0..a.order()).map(|v| a.degree(v)).collect();
    let mut db: Vec<u32> = (0..b.order()).map(|v| b.degree(v)).collect();
    da.sort_unstable();
    db.sort_unstable();
    if da != db {
        return false;
    }
    extend_embedding(a, b, &mut Vec::with_capacity(a.order()), 0, true)
}

/// Whether `pattern` occurs as an induced subgraph of `host`.
pub fn contains_induced(host: &SmallGraph, pattern: &SmallGraph) -> bool {
    pattern.order() <= host.order()
        && extend_embedding(pattern, host, &mut Vec::with_capacity(pattern.order()), 0, false)
}

/// Community property Π of an induced subgraph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PiSpec {
    /// G[S] is isomorphic to some graph of the list.
    Family {
        graphs: Vec<Graph>,
    },
    /// |E(G[S])| ≥ t, optionally with at most `max_boundary_edges` edges leaving S.
    MinEdges {
        t: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_boundary_edges: Option<usize>,
    },
    /// Every vertex of S is adjacent to at least |S| − c vertices of S.
    MinDegreeOffset {
        c: usize,
    },
    Clique,
}

pub fn check_pi(g: &Graph, s: &ElementSet, pi: &PiSpec) -> bool {
    match pi {
        PiSpec::Clique => g.induced(s).is_clique(),
        PiSpec::MinEdges { t, max_boundary_edges } => {
            g.induced_edge_count(s) >= *t && max_boundary_edges.is_none_or(|max| g.boundary_edge_count(s) <= max)
        }
        PiSpec::MinDegreeOffset { c } => {
            let need = s.len().saturating_sub(*c);
            s.iter().all(|u| g.neighbors(u).iter().filter(|&&v| s.contains(v)).count() >= need)
        }
        PiSpec::Family { graphs } => {
            let h = g.induced(s);
            graphs.iter().any(|f| is_isomorphic(&h, &f.as_small()))
        }
    }
}

/// All vertex sets of size `min_size..=r` whose induced subgraph satisfies Π,
/// by naive enumeration, ordered by size and then lexicographically.
pub fn enumerate_pi_subgraphs_sized(g: &Graph, pi: &PiSpec, r: usize, min_size: usize) -> SetFamily {
    let mut members = Vec::new();
    for size in min_size.max(1)..=r.min(g.n()) {
        for combo in (0..g.n()).combinations(size) {
            let s = ElementSet::from_sorted(combo);
            if check_pi(g, &s, pi) {
                members.push(s);
            }
        }
    }
    SetFamily::new(members, r, g.n()).expect("enumerated subsets are distinct and in range")
}

pub fn enumerate_pi_subgraphs(g: &Graph, pi: &PiSpec, r: usize) -> SetFamily {
    enumerate_pi_subgraphs_sized(g, pi, r, 1)
}

/// All-pairs hop distances by repeated BFS; unreachable pairs are +inf.
pub fn graph_distance_matrix(g: &Graph) -> DistanceMatrix {
    let n = g.n();
    let mut data = vec![f64::INFINITY; n * n];
    let mut queue = VecDeque::new();
    for src in 0..n {
        let row = &mut data[src * n..(src + 1) * n];
        row[src] = 0.0;
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            for &v in g.neighbors(u) {
                if row[v].is_infinite() {
                    row[v] = row[u] + 1.0;
                    queue.push_back(v);
                }
            }
        }
    }
    DistanceMatrix::from_flat(n, data)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphInstance {
    pub graph: Graph,
    pub r: usize,
    pub k: usize,
    pub pi: PiSpec,
    pub alpha: AlphaSpec,
    pub cluster_heads: Option<Vec<ElementSet>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphInstanceFile {
    vertices: usize,
    edges: Vec<[usize; 2]>,
    r: usize,
    k: usize,
    pi: PiSpec,
    alpha: AlphaSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cluster_heads: Option<Vec<ElementSet>>,
}

impl GraphInstance {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.r == 0 {
            return Err(Error::InvalidParameter("k and r must be at least 1".into()));
        }
        if let PiSpec::Family { graphs } = &self.pi {
            if let Some(h) = graphs.iter().find(|h| h.n() > self.r || h.n() == 0) {
                return Err(Error::InvalidParameter(format!(
                    "pattern graph with {} vertices must have between 1 and r = {} vertices",
                    h.n(),
                    self.r
                )));
            }
        }
        if let Some(heads) = &self.cluster_heads {
            for h in heads {
                if h.is_empty() {
                    return Err(Error::Format("cluster heads must be non-empty".into()));
                }
                if let Some(m) = h.max_element().filter(|&m| m >= self.graph.n()) {
                    return Err(Error::ElementOutOfRange { element: m, n: self.graph.n() });
                }
            }
        }
        crate::alpha::build_predicate(&self.alpha, &self.universe()?, Some(&self.graph)).map(|_| ())
    }

    /// Universe over V(G), with hop distances when `alpha` reads them.
    pub fn universe(&self) -> Result<Universe> {
        let universe = Universe::new(self.graph.n());
        if self.alpha.uses_universe_distances() {
            universe.with_distances(graph_distance_matrix(&self.graph))
        } else {
            Ok(universe)
        }
    }

    pub fn to_json(&self) -> String {
        let file = GraphInstanceFile {
            vertices: self.graph.n(),
            edges: self.graph.edges().map(|(u, v)| [u, v]).collect(),
            r: self.r,
            k: self.k,
            pi: self.pi.clone(),
            alpha: self.alpha.clone(),
            cluster_heads: self.cluster_heads.clone(),
        };
        serde_json::to_string(&file).expect("graph instance serializes")
    }
}

pub fn parse_graph_instance(text: &str) -> Result<GraphInstance> {
    let file: GraphInstanceFile = serde_json::from_str(text)?;
    let gi = GraphInstance {
        graph: Graph::from_edges(file.vertices, &file.edges)?,
        r: file.r,
        k: file.k,
        pi: file.pi,
        alpha: file.alpha,
        cluster_heads: file.cluster_heads,
    };
    gi.validate()?;
    Ok(gi)
}

/// Plain edge list: first line `n m`, then `m` lines `u v`. Blank lines and
/// lines starting with `#` are skipped.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| Error::Format("empty edge list".into()))?;
    let nums = |line: &str| -> Result<Vec<usize>> {
        line.split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|e| Error::Format(format!("bad number {t:?}: {e}"))))
            .collect()
    };
    let head = nums(header)?;
    let [n, m] = head[..] else {
        return Err(Error::Format("edge list header must be `n m`".into()));
    };
    let mut edges = Vec::with_capacity(m);
    for line in lines {
        let pair = nums(line)?;
        let [u, v] = pair[..] else {
            return Err(Error::Format(format!("edge line {line:?} must be `u v`")));
        };
        edges.push([u, v]);
    }
    if edges.len() != m {
        return Err(Error::Format(format!("header announces {m} edges, found {}", edges.len())));
    }
    Graph::from_edges(n, &edges)
}

/// Builds the set instance whose (k,α)-packings are exactly the
/// (k,α)-Π-packings of the graph.
pub fn reduce_to_set_instance(gi: &GraphInstance) -> Result<SetSystemInstance> {
    reduce_to_set_instance_sized(gi, 1)
}

pub fn reduce_to_set_instance_sized(gi: &GraphInstance, min_size: usize) -> Result<SetSystemInstance> {
    gi.validate()?;
    let instance = SetSystemInstance {
        universe: gi.universe()?,
        family: enumerate_pi_subgraphs_sized(&gi.graph, &gi.pi, gi.r, min_size),
        k: gi.k,
        alpha: gi.alpha.clone(),
        cluster_heads: gi.cluster_heads.clone(),
        graph: Some(gi.graph.clone()),
    };
    instance.predicate()?;
    Ok(instance)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[usize]) -> ElementSet {
        ElementSet::new(v.to_vec()).unwrap()
    }

    fn path3() -> Graph {
        Graph::from_edges(3, &[[0, 1], [1, 2]]).unwrap()
    }

    #[test]
    fn check_pi_examples() {
        let tri = Graph::complete(3);
        assert!(check_pi(&tri, &set(&[0, 1, 2]), &PiSpec::Clique));
        let p = path3();
        assert!(check_pi(&p, &set(&[0, 1, 2]), &PiSpec::MinEdges { t: 2, max_boundary_edges: None }));
        assert!(!check_pi(&p, &set(&[0, 1, 2]), &PiSpec::MinDegreeOffset { c: 1 }));
        assert!(check_pi(&p, &set(&[0, 1, 2]), &PiSpec::MinDegreeOffset { c: 2 }));
    }

    #[test]
    fn boundary_bound_on_min_edges() {
        // Path 0-1-2-3: {0,1} has one boundary edge (1-2).
        let g = Graph::from_edges(4, &[[0, 1], [1, 2], [2, 3]]).unwrap();
        let s = set(&[0, 1]);
        assert!(check_pi(&g, &s, &PiSpec::MinEdges { t: 1, max_boundary_edges: Some(1) }));
        assert!(!check_pi(&g, &s, &PiSpec::MinEdges { t: 1, max_boundary_edges: Some(0) }));
    }

    #[test]
    fn enumerate_k4_cliques() {
        let fam = enumerate_pi_subgraphs(&Graph::complete(4), &PiSpec::Clique, 3);
        assert_eq!(fam.len(), 4 + 6 + 4);
        assert_eq!(fam.get(0), &set(&[0]));
        assert_eq!(fam.get(13), &set(&[1, 2, 3]));
    }

    #[test]
    fn enumerate_edgeless_cliques_are_singletons() {
        let fam = enumerate_pi_subgraphs(&Graph::empty(5), &PiSpec::Clique, 3);
        assert_eq!(fam.len(), 5);
        assert!(fam.members().iter().all(|s| s.len() == 1));
    }

    #[test]
    fn enumerate_min_size() {
        let fam = enumerate_pi_subgraphs_sized(&Graph::complete(4), &PiSpec::Clique, 3, 3);
        assert_eq!(fam.len(), 4);
    }

    #[test]
    fn family_k3_finds_triangles() {
        // Triangles 0-1-2 and 2-3-4 plus a pendant edge 4-5.
        let g = Graph::from_edges(6, &[[0, 1], [1, 2], [0, 2], [2, 3], [3, 4], [2, 4], [4, 5]]).unwrap();
        let pi = PiSpec::Family { graphs: vec![Graph::complete(3)] };
        let fam = enumerate_pi_subgraphs(&g, &pi, 3);
        assert_eq!(fam.members(), &[set(&[0, 1, 2]), set(&[2, 3, 4])]);
    }

    #[test]
    fn distance_matrix_examples() {
        let d = graph_distance_matrix(&path3());
        assert_eq!(d.get(0, 2), 2.0);
        assert_eq!(d.get(2, 0), 2.0);
        let d = graph_distance_matrix(&Graph::empty(2));
        assert_eq!(d.get(0, 1), f64::INFINITY);
        let d = graph_distance_matrix(&Graph::empty(1));
        assert_eq!(d.get(0, 0), 0.0);
        graph_distance_matrix(&Graph::from_edges(5, &[[0, 1], [1, 2], [3, 4]]).unwrap()).check_metric().unwrap();
    }

    #[test]
    fn isomorphism_basics() {
        let p = path3().as_small();
        let p2 = Graph::from_edges(3, &[[0, 2], [2, 1]]).unwrap().as_small();
        assert!(is_isomorphic(&p, &p2));
        assert!(!is_isomorphic(&p, &Graph::complete(3).as_small()));
        // C4 vs. a star on 4 vertices: same edge count, different degrees.
        let c4 = Graph::from_edges(4, &[[0, 1], [1, 2], [2, 3], [3, 0]]).unwrap().as_small();
        let paw = Graph::from_edges(4, &[[0, 1], [1, 2], [2, 0], [2, 3]]).unwrap().as_small();
        assert!(!is_isomorphic(&c4, &paw));
        assert!(contains_induced(&paw, &p));
        assert!(!contains_induced(&Graph::complete(4).as_small(), &p));
    }

    #[test]
    fn graph_rejects_bad_edges() {
        assert!(Graph::from_edges(3, &[[0, 0]]).is_err());
        assert!(Graph::from_edges(3, &[[0, 1], [1, 0]]).is_err());
        assert!(Graph::from_edges(3, &[[0, 3]]).is_err());
    }

    #[test]
    fn edge_list_format() {
        let g = parse_edge_list("3 2\n0 1\n1 2\n").unwrap();
        assert_eq!(g, path3());
        assert!(parse_edge_list("3 2\n0 1\n").is_err());
        assert!(parse_edge_list("").is_err());
    }

    #[test]
    fn graph_instance_json() {
        let text = r#"{"vertices":5,"edges":[[0,1],[1,2],[0,2],[2,3],[3,4],[2,4]],"r":3,"k":2,
            "pi":{"kind":"family","graphs":[{"vertices":3,"edges":[[0,1],[1,2],[0,2]]}]},
            "alpha":{"kind":"size","t":1}}"#;
        let gi = parse_graph_instance(text).unwrap();
        let again = parse_graph_instance(&gi.to_json()).unwrap();
        assert_eq!(gi, again);
        let inst = reduce_to_set_instance(&gi).unwrap();
        assert_eq!(inst.family.len(), 2);
        assert!(inst.graph.is_some());
    }

    #[test]
    fn pattern_larger_than_r_rejected() {
        let text = r#"{"vertices":4,"edges":[],"r":2,"k":1,
            "pi":{"kind":"family","graphs":[{"vertices":3,"edges":[]}]},"alpha":{"kind":"size","t":1}}"#;
        assert!(parse_graph_instance(text).is_err());
    }

    #[test]
    fn metric_alpha_gets_graph_distances() {
        let gi = GraphInstance {
            graph: path3(),
            r: 2,
            k: 1,
            pi: PiSpec::Clique,
            alpha: AlphaSpec::Metric { d_t: 1.0 },
            cluster_heads: None,
        };
        let inst = reduce_to_set_instance(&gi).unwrap();
        assert_eq!(inst.universe.distances.unwrap().get(0, 2), 2.0);
    }
}
