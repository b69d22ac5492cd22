//! Data model for set-packing instances: universes, element sets, set
//! families, solutions, the JSON instance format and solution validation.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::alpha::{self, AlphaSpec, OverlapPredicate, Verdict};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// A sorted, duplicate-free set of element indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementSet(Vec<usize>);

impl ElementSet {
    pub fn empty() -> Self {
        ElementSet(Vec::new())
    }

    pub fn singleton(u: usize) -> Self {
        ElementSet(vec![u])
    }

    /// Sorts the input; fails if an element is repeated.
    pub fn new(mut elements: Vec<usize>) -> Result<Self> {
        elements.sort_unstable();
        if let Some(w) = elements.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::RepeatedElement { element: w[0] });
        }
        Ok(ElementSet(elements))
    }

    /// Builds a set from elements already known to be sorted and distinct.
    pub fn from_sorted(elements: Vec<usize>) -> Self {
        debug_assert!(elements.windows(2).all(|w| w[0] < w[1]));
        ElementSet(elements)
    }

    pub fn from_mask(mask: u64) -> Self {
        ElementSet((0..64).filter(|b| mask >> b & 1 == 1).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, u: usize) -> bool {
        self.0.binary_search(&u).is_ok()
    }

    pub fn max_element(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn is_subset(&self, other: &ElementSet) -> bool {
        if self.len() > other.len() {
            return false;
        }
        let mut it = other.0.iter();
        'outer: for &x in &self.0 {
            for &y in it.by_ref() {
                if y == x {
                    continue 'outer;
                }
                if y > x {
                    return false;
                }
            }
            return false;
        }
        true
    }

    pub fn intersection(&self, other: &ElementSet) -> ElementSet {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::with_capacity(self.len().min(other.len()));
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    out.push(self.0[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        ElementSet(out)
    }

    pub fn intersects(&self, other: &ElementSet) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    pub fn difference(&self, other: &ElementSet) -> ElementSet {
        ElementSet(self.iter().filter(|&u| !other.contains(u)).collect())
    }

    pub fn union(&self, other: &ElementSet) -> ElementSet {
        let mut v: Vec<usize> = self.iter().chain(other.iter()).collect();
        v.sort_unstable();
        v.dedup();
        ElementSet(v)
    }

    pub fn with_element(&self, u: usize) -> ElementSet {
        let mut v = self.0.clone();
        if let Err(pos) = v.binary_search(&u) {
            v.insert(pos, u);
        }
        ElementSet(v)
    }
}

impl fmt::Display for ElementSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, u) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{u}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for ElementSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ElementSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        ElementSet::new(v).map_err(serde::de::Error::custom)
    }
}

/// Symmetric n x n matrix of non-negative distances. `f64::INFINITY` marks
/// unreachable pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::Format(format!("distance row {i} has length {}, expected {n}", row.len())));
            }
            data.extend(row);
        }
        Ok(DistanceMatrix { n, data })
    }

    pub(crate) fn from_flat(n: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), n * n);
        DistanceMatrix { n, data }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.data[u * self.n + v]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n.max(1)).map(|c| c.to_vec()).take(self.n).collect()
    }

    /// Checks non-negativity, zero diagonal, symmetry and the triangle
    /// inequality with exact comparisons.
    pub fn check_metric(&self) -> Result<()> {
        let n = self.n;
        for u in 0..n {
            if self.get(u, u) != 0.0 {
                return Err(Error::MetricViolation(format!("dist({u},{u}) != 0")));
            }
            for v in 0..n {
                let d = self.get(u, v);
                if d.is_nan() || d < 0.0 {
                    return Err(Error::MetricViolation(format!("dist({u},{v}) = {d}")));
                }
                if d != self.get(v, u) {
                    return Err(Error::MetricViolation(format!("dist({u},{v}) != dist({v},{u})")));
                }
            }
        }
        for u in 0..n {
            for v in 0..n {
                let uv = self.get(u, v);
                for w in 0..n {
                    if self.get(u, w) > uv + self.get(v, w) {
                        return Err(Error::MetricViolation(format!("dist({u},{w}) > dist({u},{v}) + dist({v},{w})")));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Universe {
    pub n: usize,
    pub names: Option<Vec<String>>,
    pub weights: Option<Vec<f64>>,
    pub properties: Option<Vec<bool>>,
    pub distances: Option<DistanceMatrix>,
}

impl Universe {
    pub fn new(n: usize) -> Self {
        Universe { n, ..Default::default() }
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.n {
            return Err(Error::AnnotationLength { what: "weights", got: weights.len(), expected: self.n });
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidParameter(format!("weight {w} is not a finite non-negative number")));
        }
        self.weights = Some(weights);
        Ok(self)
    }

    pub fn with_properties(mut self, flags: Vec<bool>) -> Result<Self> {
        if flags.len() != self.n {
            return Err(Error::AnnotationLength { what: "properties", got: flags.len(), expected: self.n });
        }
        self.properties = Some(flags);
        Ok(self)
    }

    pub fn with_distances(mut self, d: DistanceMatrix) -> Result<Self> {
        if d.size() != self.n {
            return Err(Error::AnnotationLength { what: "distances", got: d.size(), expected: self.n });
        }
        d.check_metric()?;
        self.distances = Some(d);
        Ok(self)
    }

    pub fn name_of(&self, u: usize) -> String {
        match &self.names {
            Some(names) => names[u].clone(),
            None => u.to_string(),
        }
    }
}

/// The collection 𝒮 with an element → members inverted index.
#[derive(Clone, Debug, PartialEq)]
pub struct SetFamily {
    members: Vec<ElementSet>,
    r: usize,
    by_element: Vec<Vec<usize>>,
}

impl SetFamily {
    /// Validates sizes, element range and distinctness. Member order is kept.
    pub fn new(members: Vec<ElementSet>, r: usize, n: usize) -> Result<Self> {
        let mut seen: HashMap<&ElementSet, usize> = HashMap::with_capacity(members.len());
        let mut by_element = vec![Vec::new(); n];
        for (i, s) in members.iter().enumerate() {
            if s.is_empty() {
                return Err(Error::EmptySet { index: i });
            }
            if s.len() > r {
                return Err(Error::SetExceedsR { index: i, size: s.len(), r });
            }
            if let Some(max) = s.max_element().filter(|&m| m >= n) {
                return Err(Error::ElementOutOfRange { element: max, n });
            }
            if let Some(&first) = seen.get(s) {
                return Err(Error::DuplicateSet { first, second: i });
            }
            seen.insert(s, i);
            for u in s.iter() {
                by_element[u].push(i);
            }
        }
        Ok(SetFamily { members, r, by_element })
    }

    pub fn members(&self) -> &[ElementSet] {
        &self.members
    }

    pub fn get(&self, i: usize) -> &ElementSet {
        &self.members[i]
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// 𝒮(s): indices of all members containing `s`, in member order.
    pub fn sets_containing(&self, s: &ElementSet) -> Vec<usize> {
        if s.is_empty() {
            return (0..self.members.len()).collect();
        }
        let Some(rarest) =
            s.iter().map(|u| self.by_element.get(u).map(Vec::as_slice).unwrap_or(&[])).min_by_key(|l| l.len())
        else {
            return Vec::new();
        };
        rarest.iter().copied().filter(|&i| s.is_subset(&self.members[i])).collect()
    }

    /// val(·) of a sub-collection given by member indices.
    pub fn union_of(&self, indices: &[usize]) -> ElementSet {
        let mut v: Vec<usize> = indices.iter().flat_map(|&i| self.members[i].iter()).collect();
        v.sort_unstable();
        v.dedup();
        ElementSet::from_sorted(v)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SetSystemInstance {
    pub universe: Universe,
    pub family: SetFamily,
    pub k: usize,
    pub alpha: AlphaSpec,
    pub cluster_heads: Option<Vec<ElementSet>>,
    /// Graph over the universe, needed by graph-aware overlap predicates.
    pub graph: Option<Graph>,
}

impl SetSystemInstance {
    pub fn r(&self) -> usize {
        self.family.r()
    }

    /// Builds the overlap predicate described by `alpha`.
    pub fn predicate(&self) -> Result<alpha::Predicate> {
        alpha::build_predicate(&self.alpha, &self.universe, self.graph.as_ref())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&InstanceFile::from(self)).expect("instance serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&InstanceFile::from(self)).expect("instance serializes")
    }
}

/// Element reference in the JSON format: an index, or a name listed in `names`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum ElementRef {
    Index(usize),
    Name(String),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    universe: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    names: Option<Vec<String>>,
    r: usize,
    k: usize,
    sets: Vec<Vec<ElementRef>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    properties: Option<Vec<bool>>,
    /// `null` entries stand for unreachable (+inf).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    distances: Option<Vec<Vec<Option<f64>>>>,
    alpha: AlphaSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cluster_heads: Option<Vec<Vec<ElementRef>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    edges: Option<Vec<[usize; 2]>>,
}

impl From<&SetSystemInstance> for InstanceFile {
    fn from(inst: &SetSystemInstance) -> Self {
        let refs = |s: &ElementSet| s.iter().map(ElementRef::Index).collect::<Vec<_>>();
        InstanceFile {
            universe: inst.universe.n,
            names: inst.universe.names.clone(),
            r: inst.r(),
            k: inst.k,
            sets: inst.family.members().iter().map(refs).collect(),
            weights: inst.universe.weights.clone(),
            properties: inst.universe.properties.clone(),
            distances: inst.universe.distances.as_ref().map(|d| {
                d.rows().into_iter().map(|row| row.into_iter().map(|x| x.is_finite().then_some(x)).collect()).collect()
            }),
            alpha: inst.alpha.clone(),
            cluster_heads: inst.cluster_heads.as_ref().map(|h| h.iter().map(refs).collect()),
            edges: inst.graph.as_ref().map(|g| g.edges().map(|(u, v)| [u, v]).collect()),
        }
    }
}

fn resolve_set(refs: &[ElementRef], names: Option<&HashMap<&str, usize>>, n: usize) -> Result<ElementSet> {
    let mut out = Vec::with_capacity(refs.len());
    for r in refs {
        let u = match r {
            ElementRef::Index(u) => *u,
            ElementRef::Name(name) => {
                *names.and_then(|m| m.get(name.as_str())).ok_or_else(|| Error::UnknownName(name.clone()))?
            }
        };
        if u >= n {
            return Err(Error::ElementOutOfRange { element: u, n });
        }
        out.push(u);
    }
    ElementSet::new(out)
}

/// Parses and validates a set-system instance from the JSON format.
pub fn parse_instance(text: &str) -> Result<SetSystemInstance> {
    let file: InstanceFile = serde_json::from_str(text)?;
    let n = file.universe;
    if file.k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if file.r == 0 {
        return Err(Error::InvalidParameter("r must be at least 1".into()));
    }
    let name_map: Option<HashMap<&str, usize>> = match &file.names {
        Some(names) => {
            if names.len() != n {
                return Err(Error::AnnotationLength { what: "names", got: names.len(), expected: n });
            }
            let map: HashMap<&str, usize> = names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
            if map.len() != n {
                return Err(Error::Format("element names must be unique".into()));
            }
            Some(map)
        }
        None => None,
    };

    let mut universe = Universe::new(n);
    universe.names = file.names.clone();
    if let Some(w) = file.weights {
        universe = universe.with_weights(w)?;
    }
    if let Some(p) = file.properties {
        universe = universe.with_properties(p)?;
    }
    if let Some(rows) = file.distances {
        let rows = rows.into_iter().map(|row| row.into_iter().map(|x| x.unwrap_or(f64::INFINITY)).collect()).collect();
        universe = universe.with_distances(DistanceMatrix::from_rows(rows)?)?;
    }

    let members = file
        .sets
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let set = resolve_set(s, name_map.as_ref(), n)?;
            if set.len() > file.r {
                return Err(Error::SetExceedsR { index: i, size: set.len(), r: file.r });
            }
            Ok(set)
        })
        .collect::<Result<Vec<_>>>()?;
    let family = SetFamily::new(members, file.r, n)?;

    let cluster_heads = match file.cluster_heads {
        Some(heads) => Some(
            heads
                .iter()
                .map(|h| {
                    let set = resolve_set(h, name_map.as_ref(), n)?;
                    if set.is_empty() {
                        return Err(Error::Format("cluster heads must be non-empty".into()));
                    }
                    Ok(set)
                })
                .collect::<Result<Vec<_>>>()?,
        ),
        None => None,
    };

    let graph = match file.edges {
        Some(edges) => Some(Graph::from_edges(n, &edges)?),
        None => None,
    };

    let instance = SetSystemInstance { universe, family, k: file.k, alpha: file.alpha, cluster_heads, graph };
    // Fails on missing annotations or bad thresholds.
    instance.predicate()?;
    Ok(instance)
}

/// Indices of the chosen members.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Solution {
    pub chosen: Vec<usize>,
}

impl Solution {
    pub fn new(chosen: Vec<usize>) -> Self {
        Solution { chosen }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    WrongCardinality { expected: usize, got: usize },
    IndexOutOfRange { index: usize },
    RepeatedMember { index: usize },
    Conflict { first: usize, second: usize },
    MissingHead { index: usize },
    SharedHeadElement { first: usize, second: usize, element: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

/// Cluster-head conditions to check alongside pairwise no-conflict.
#[derive(Clone, Copy, Debug)]
pub struct HeadCheck<'a> {
    pub heads: &'a [ElementSet],
    /// Chosen sets may not share elements of val(𝒞).
    pub exclusive: bool,
}

/// Validates `sol` against the instance's own predicate; checks the
/// cluster-head conditions when the instance carries heads.
pub fn validate_solution(instance: &SetSystemInstance, sol: &Solution) -> Result<ValidationReport> {
    let pred = instance.predicate()?;
    let heads = instance.cluster_heads.as_deref().map(|heads| HeadCheck { heads, exclusive: true });
    Ok(validate_solution_with(&instance.family, instance.k, &pred, sol, heads))
}

pub fn validate_solution_with<P: OverlapPredicate + ?Sized>(
    family: &SetFamily,
    k: usize,
    pred: &P,
    sol: &Solution,
    heads: Option<HeadCheck<'_>>,
) -> ValidationReport {
    let mut violations = Vec::new();
    if sol.chosen.len() != k {
        violations.push(Violation::WrongCardinality { expected: k, got: sol.chosen.len() });
    }
    let mut in_range = Vec::with_capacity(sol.chosen.len());
    for (pos, &i) in sol.chosen.iter().enumerate() {
        if i >= family.len() {
            violations.push(Violation::IndexOutOfRange { index: i });
        } else if sol.chosen[..pos].contains(&i) {
            violations.push(Violation::RepeatedMember { index: i });
        } else {
            in_range.push(i);
        }
    }
    for (a, &i) in in_range.iter().enumerate() {
        for &j in &in_range[a + 1..] {
            if pred.evaluate(family.get(i), family.get(j)) == Verdict::Conflict {
                violations.push(Violation::Conflict { first: i, second: j });
            }
        }
    }
    if let Some(check) = heads {
        let head_elements = check.heads.iter().fold(ElementSet::empty(), |acc, h| acc.union(h));
        for &i in &in_range {
            if !check.heads.iter().any(|h| h.is_subset(family.get(i))) {
                violations.push(Violation::MissingHead { index: i });
            }
        }
        if check.exclusive {
            for (a, &i) in in_range.iter().enumerate() {
                for &j in &in_range[a + 1..] {
                    let shared = family.get(i).intersection(family.get(j));
                    let found = shared.iter().find(|&u| head_elements.contains(u));
                    if let Some(element) = found {
                        violations.push(Violation::SharedHeadElement { first: i, second: j, element });
                    }
                }
            }
        }
    }
    ValidationReport { valid: violations.is_empty(), violations }
}
