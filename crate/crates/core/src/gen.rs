//! Seeded random instances. The same seed and parameters always produce the
//! same instance, and so the same JSON bytes.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alpha::{AlphaSpec, PatternClass};
use crate::error::{Error, Result};
use crate::graph::{Graph, GraphInstance, PiSpec};
use crate::instance::{DistanceMatrix, ElementSet, SetFamily, SetSystemInstance, Universe};

pub const MAX_GEN_N: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum AlphaKind {
    Size,
    Weight,
    Measure,
    Metric,
    Distance,
    Pattern,
    Property,
    DenseOverlap,
    Density,
    Conjunction,
}

impl AlphaKind {
    pub const ALL: [AlphaKind; 10] = [
        AlphaKind::Size,
        AlphaKind::Weight,
        AlphaKind::Measure,
        AlphaKind::Metric,
        AlphaKind::Distance,
        AlphaKind::Pattern,
        AlphaKind::Property,
        AlphaKind::DenseOverlap,
        AlphaKind::Density,
        AlphaKind::Conjunction,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AlphaKind::Size => "size",
            AlphaKind::Weight => "weight",
            AlphaKind::Measure => "measure",
            AlphaKind::Metric => "metric",
            AlphaKind::Distance => "distance",
            AlphaKind::Pattern => "pattern",
            AlphaKind::Property => "property",
            AlphaKind::DenseOverlap => "dense_overlap",
            AlphaKind::Density => "density",
            AlphaKind::Conjunction => "conjunction",
        }
    }
}

/// Fixed thresholds; anything left `None` is drawn at random.
#[derive(Clone, Debug, Default)]
pub struct AlphaParams {
    pub t: Option<usize>,
    pub w_t: Option<f64>,
    pub d_t: Option<f64>,
    pub c: Option<usize>,
    pub class: Option<PatternClass>,
}

/// A predicate spec together with the annotations it reads.
#[derive(Clone, Debug)]
pub struct AlphaDraw {
    pub spec: AlphaSpec,
    pub universe: Universe,
    pub graph: Option<Graph>,
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random G(n, p) graph.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push([u, v]);
            }
        }
    }
    Graph::from_edges(n, &edges).expect("generated edges are simple")
}

/// Shortest paths over a complete graph with random integer edge lengths,
/// with a few edges removed so some pairs can become unreachable.
pub fn random_metric<R: Rng>(rng: &mut R, n: usize) -> DistanceMatrix {
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (u, row) in d.iter_mut().enumerate() {
        row[u] = 0.0;
    }
    for (u, v) in (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))) {
        if rng.gen_bool(0.8) {
            let w = rng.gen_range(1..=4) as f64;
            d[u][v] = w;
            d[v][u] = w;
        }
    }
    for w in 0..n {
        for u in 0..n {
            for v in 0..n {
                let via = d[u][w] + d[w][v];
                if via < d[u][v] {
                    d[u][v] = via;
                }
            }
        }
    }
    DistanceMatrix::from_rows(d).expect("square matrix")
}

fn small_weight<R: Rng>(rng: &mut R) -> f64 {
    *[0.0, 0.5, 1.0, 1.0, 1.5, 2.0].choose(rng).unwrap()
}

/// Draws a spec of the given kind over `n` elements plus every annotation
/// it needs. Graph-aware kinds get a random graph.
pub fn random_alpha<R: Rng>(rng: &mut R, kind: AlphaKind, params: &AlphaParams, n: usize) -> AlphaDraw {
    let mut universe = Universe::new(n);
    let mut graph = None;
    let mut need_graph = |rng: &mut R| {
        if graph.is_none() {
            let p = rng.gen_range(0.2..0.8);
            graph = Some(random_graph(rng, n, p));
        }
    };
    let spec = match kind {
        AlphaKind::Size => AlphaSpec::Size { t: params.t.unwrap_or_else(|| rng.gen_range(0..=2)) },
        AlphaKind::Weight => {
            let weights = (0..n).map(|_| small_weight(rng)).collect();
            universe = universe.with_weights(weights).expect("weights match n");
            AlphaSpec::Weight { w_t: params.w_t.unwrap_or_else(|| *[0.0, 0.5, 1.0, 1.5, 2.5].choose(rng).unwrap()) }
        }
        AlphaKind::Measure => {
            let values = (0..n).map(|_| small_weight(rng)).collect();
            let t = params.t.map(|t| t as f64).unwrap_or_else(|| *[0.0, 1.0, 2.0].choose(rng).unwrap());
            AlphaSpec::Measure { t, values }
        }
        AlphaKind::Metric => {
            let d = random_metric(rng, n);
            universe = universe.with_distances(d).expect("shortest paths are a metric");
            AlphaSpec::Metric { d_t: params.d_t.unwrap_or_else(|| rng.gen_range(1..=5) as f64) }
        }
        AlphaKind::Distance => {
            need_graph(rng);
            AlphaSpec::Distance { d_t: params.d_t.unwrap_or_else(|| rng.gen_range(1..=3) as f64) }
        }
        AlphaKind::Pattern => {
            need_graph(rng);
            let class = params.class.clone().unwrap_or_else(|| match rng.gen_range(0..3) {
                0 => PatternClass::Clique,
                1 => PatternClass::Edgeless,
                _ => PatternClass::ForbiddenInduced(vec![path3()]),
            });
            AlphaSpec::Pattern { class }
        }
        AlphaKind::Property => {
            let flags = (0..n).map(|_| rng.gen_bool(0.7)).collect();
            universe = universe.with_properties(flags).expect("flags match n");
            AlphaSpec::Property
        }
        AlphaKind::DenseOverlap => {
            need_graph(rng);
            AlphaSpec::DenseOverlap { c: params.c.unwrap_or_else(|| rng.gen_range(0..=2)) }
        }
        AlphaKind::Density => {
            need_graph(rng);
            AlphaSpec::Density {
                t: params.t.unwrap_or_else(|| rng.gen_range(1..=3)),
                c: params.c.unwrap_or_else(|| rng.gen_range(0..=2)),
            }
        }
        AlphaKind::Conjunction => {
            let first = random_alpha(rng, AlphaKind::Size, params, n);
            let other = *[AlphaKind::Weight, AlphaKind::Metric, AlphaKind::DenseOverlap, AlphaKind::Property]
                .choose(rng)
                .unwrap();
            let second = random_alpha(rng, other, params, n);
            universe = second.universe;
            graph = second.graph;
            AlphaSpec::Conjunction { parts: vec![first.spec, second.spec] }
        }
    };
    AlphaDraw { spec, universe, graph }
}

/// Induced path on three vertices.
pub fn path3() -> Graph {
    Graph::from_edges(3, &[[0, 1], [1, 2]]).expect("valid path")
}

#[derive(Clone, Debug)]
pub struct SetGenConfig {
    pub n: usize,
    pub m: usize,
    pub r: usize,
    pub k: usize,
    pub alpha: AlphaKind,
    pub params: AlphaParams,
    /// Number of cluster heads to draw; 0 leaves them out.
    pub heads: usize,
}

fn check_caps(n: usize, r: usize, k: usize) -> Result<()> {
    if n == 0 || n > MAX_GEN_N {
        return Err(Error::InvalidParameter(format!("n must be between 1 and {MAX_GEN_N}, got {n}")));
    }
    if r == 0 || k == 0 {
        return Err(Error::InvalidParameter("r and k must be at least 1".into()));
    }
    Ok(())
}

fn random_subset<R: Rng>(rng: &mut R, pool: &[usize], size: usize) -> ElementSet {
    let picked: Vec<usize> = pool.choose_multiple(rng, size).copied().collect();
    ElementSet::new(picked).expect("distinct picks")
}

/// Number of distinct non-empty subsets of size ≤ r, saturating.
fn subset_count(n: usize, r: usize) -> u128 {
    (1..=r.min(n)).map(|i| crate::solver::binomial(n as u128, i as u128)).fold(0u128, u128::saturating_add)
}

fn random_heads<R: Rng>(rng: &mut R, family: &[ElementSet], n: usize, r: usize, count: usize) -> Vec<ElementSet> {
    let all: Vec<usize> = (0..n).collect();
    let cap = subset_count(n, r.saturating_sub(1).max(1));
    let mut heads: Vec<ElementSet> = Vec::new();
    while heads.len() < count && (heads.len() as u128) < cap {
        let head = if !family.is_empty() && rng.gen_bool(0.8) {
            // Part of an existing member, so the head is usable.
            let s = family.choose(rng).unwrap();
            let size = rng.gen_range(1..=s.len().min(r.saturating_sub(1).max(1)));
            random_subset(rng, s.as_slice(), size)
        } else {
            let size = rng.gen_range(1..=r.saturating_sub(1).max(1).min(n));
            random_subset(rng, &all, size)
        };
        if !heads.contains(&head) {
            heads.push(head);
        }
    }
    heads
}

pub fn generate_set_instance<R: Rng>(rng: &mut R, cfg: &SetGenConfig) -> Result<SetSystemInstance> {
    check_caps(cfg.n, cfg.r, cfg.k)?;
    if (cfg.m as u128) > subset_count(cfg.n, cfg.r) {
        return Err(Error::InvalidParameter(format!(
            "cannot draw {} distinct sets of size at most {} from {} elements",
            cfg.m, cfg.r, cfg.n
        )));
    }
    if cfg.m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    let all: Vec<usize> = (0..cfg.n).collect();
    let mut members: Vec<ElementSet> = Vec::with_capacity(cfg.m);
    while members.len() < cfg.m {
        let size = rng.gen_range(1..=cfg.r.min(cfg.n));
        let s = random_subset(rng, &all, size);
        if !members.contains(&s) {
            members.push(s);
        }
    }
    let draw = random_alpha(rng, cfg.alpha, &cfg.params, cfg.n);
    let cluster_heads = (cfg.heads > 0).then(|| random_heads(rng, &members, cfg.n, cfg.r, cfg.heads));
    let instance = SetSystemInstance {
        universe: draw.universe,
        family: SetFamily::new(members, cfg.r, cfg.n)?,
        k: cfg.k,
        alpha: draw.spec,
        cluster_heads,
        graph: draw.graph,
    };
    instance.predicate()?;
    Ok(instance)
}

#[derive(Clone, Debug)]
pub struct GraphGenConfig {
    pub n: usize,
    pub edge_prob: f64,
    pub r: usize,
    pub k: usize,
    pub pi: PiSpec,
    pub alpha: AlphaKind,
    pub params: AlphaParams,
    pub heads: usize,
}

/// Random graph instance. Only kinds whose annotations live in the graph or
/// in the spec itself are allowed.
pub fn generate_graph_instance<R: Rng>(rng: &mut R, cfg: &GraphGenConfig) -> Result<GraphInstance> {
    check_caps(cfg.n, cfg.r, cfg.k)?;
    if matches!(cfg.alpha, AlphaKind::Weight | AlphaKind::Property | AlphaKind::Conjunction) {
        return Err(Error::InvalidParameter(format!(
            "alpha kind `{}` needs universe annotations a graph instance cannot carry",
            cfg.alpha.name()
        )));
    }
    if !(0.0..=1.0).contains(&cfg.edge_prob) {
        return Err(Error::InvalidParameter(format!("edge probability must lie in [0, 1], got {}", cfg.edge_prob)));
    }
    let graph = random_graph(rng, cfg.n, cfg.edge_prob);
    let kind = if cfg.alpha == AlphaKind::Metric { AlphaKind::Distance } else { cfg.alpha };
    let mut spec = random_alpha(rng, kind, &cfg.params, cfg.n).spec;
    if cfg.alpha == AlphaKind::Metric {
        if let AlphaSpec::Distance { d_t } = spec {
            spec = AlphaSpec::Metric { d_t };
        }
    }
    let cluster_heads = (cfg.heads > 0).then(|| random_heads(rng, &[], cfg.n, cfg.r, cfg.heads));
    let gi = GraphInstance { graph, r: cfg.r, k: cfg.k, pi: cfg.pi.clone(), alpha: spec, cluster_heads };
    gi.validate()?;
    Ok(gi)
}
