//! Graph families linked by single-vertex deviations, used to show that no
//! impartial mechanism can meet a given additive guarantee.
//!
//! A family is a set of graphs plus links `(a, b, v)`: graphs `a` and `b`
//! differ only in the out-edges of `v`. Any impartial mechanism must give
//! `v` the same membership in both. [`verify_impossibility`] searches for a
//! per-graph assignment of selections that respects every link and the
//! additive threshold. No such assignment (UNSAT) means no impartial
//! mechanism with that guarantee exists on any class containing the family.
//! An assignment (SAT) only shows the family is consistent, not that a
//! mechanism exists.

mod search;

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Digraph, GraphError, Vertex};
use crate::mechanisms::{MechanismError, Selection, SelectionRule};
use crate::ratio::{serde_rational, Exact, Rational};
use crate::verify::{additive_gap, Aggregator};

pub use search::{exhaustive_search, SearchStats, SearchTrace, TraceEvent};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GadgetError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("the cycle family needs at least 3 vertices, got {n}")]
    CycleTooSmall { n: usize },
    #[error("the K family needs 2 <= d <= n-1, got d = {d} with n = {n}")]
    KFamilyDegree { n: usize, d: usize },
    #[error("family graphs must share a vertex count: expected {expected}, got {found}")]
    VertexCountMismatch { expected: usize, found: usize },
    #[error("link ({a}, {b}, {vertex}): graphs differ in the out-edges of vertex {other}")]
    LinkDisagreement {
        a: usize,
        b: usize,
        vertex: Vertex,
        other: Vertex,
    },
    #[error("link ({a}, {b}, {vertex}) refers to a missing graph or vertex")]
    LinkOutOfRange { a: usize, b: usize, vertex: Vertex },
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("search over {n} vertices is too large (limit {limit})")]
    TooLarge { n: usize, limit: usize },
    #[error("witness rejected at graph {graph}: {reason}")]
    InvalidWitness { graph: usize, reason: String },
    #[error("invalid family JSON: {0}")]
    Json(String),
}

/// `graphs[b]` is a deviation of `graphs[a]` by `vertex`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Link {
    pub a: usize,
    pub b: usize,
    pub vertex: Vertex,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledGraph {
    pub label: String,
    #[serde(flatten)]
    pub graph: Digraph,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FamilyJson", into = "FamilyJson")]
pub struct GadgetFamily {
    n: usize,
    graphs: Vec<LabeledGraph>,
    links: Vec<Link>,
}

#[derive(Serialize, Deserialize)]
struct FamilyJson {
    graphs: Vec<LabeledGraph>,
    links: Vec<[usize; 3]>,
}

impl TryFrom<FamilyJson> for GadgetFamily {
    type Error = GadgetError;

    fn try_from(json: FamilyJson) -> Result<Self, GadgetError> {
        let n = json
            .graphs
            .first()
            .map(|g| g.graph.n())
            .ok_or_else(|| GadgetError::Json("a family needs at least one graph".into()))?;
        let mut builder = FamilyBuilder::new(n);
        let mut ids = Vec::with_capacity(json.graphs.len());
        for g in json.graphs {
            ids.push(builder.add(&g.label, g.graph)?);
        }
        for [a, b, v] in json.links {
            let (Some(&a), Some(&b)) = (ids.get(a), ids.get(b)) else {
                return Err(GadgetError::LinkOutOfRange { a, b, vertex: v });
            };
            builder.link(a, b, v)?;
        }
        Ok(builder.finish())
    }
}

impl From<GadgetFamily> for FamilyJson {
    fn from(f: GadgetFamily) -> Self {
        FamilyJson {
            graphs: f.graphs,
            links: f.links.iter().map(|l| [l.a, l.b, l.vertex]).collect(),
        }
    }
}

impl GadgetFamily {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn graphs(&self) -> &[LabeledGraph] {
        &self.graphs
    }

    pub fn graph(&self, i: usize) -> &Digraph {
        &self.graphs[i].graph
    }

    pub fn label(&self, i: usize) -> &str {
        &self.graphs[i].label
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.graphs.iter().position(|g| g.label == label)
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn max_outdegree(&self) -> usize {
        self.graphs
            .iter()
            .map(|g| g.graph.max_outdegree())
            .max()
            .unwrap_or(0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("family serialization is infallible")
    }

    pub fn from_json(input: &str) -> Result<Self, GadgetError> {
        serde_json::from_str(input).map_err(|e| GadgetError::Json(e.to_string()))
    }
}

/// Interns graphs (a mechanism is a function, so equal graphs are one
/// variable) and checks every link on insertion.
struct FamilyBuilder {
    n: usize,
    graphs: Vec<LabeledGraph>,
    index: HashMap<Digraph, usize>,
    links: Vec<Link>,
    seen: HashSet<Link>,
}

impl FamilyBuilder {
    fn new(n: usize) -> Self {
        FamilyBuilder {
            n,
            graphs: Vec::new(),
            index: HashMap::new(),
            links: Vec::new(),
            seen: HashSet::new(),
        }
    }

    fn add(&mut self, label: &str, graph: Digraph) -> Result<usize, GadgetError> {
        if graph.n() != self.n {
            return Err(GadgetError::VertexCountMismatch {
                expected: self.n,
                found: graph.n(),
            });
        }
        if let Some(&i) = self.index.get(&graph) {
            return Ok(i);
        }
        let i = self.graphs.len();
        self.index.insert(graph.clone(), i);
        self.graphs.push(LabeledGraph {
            label: label.to_string(),
            graph,
        });
        Ok(i)
    }

    fn link(&mut self, a: usize, b: usize, vertex: Vertex) -> Result<(), GadgetError> {
        let (Some(ga), Some(gb)) = (self.graphs.get(a), self.graphs.get(b)) else {
            return Err(GadgetError::LinkOutOfRange { a, b, vertex });
        };
        if !(1..=self.n).contains(&vertex) {
            return Err(GadgetError::LinkOutOfRange { a, b, vertex });
        }
        if let Some(other) = ga
            .graph
            .vertices()
            .find(|&u| u != vertex && ga.graph.out_neighbors(u) != gb.graph.out_neighbors(u))
        {
            return Err(GadgetError::LinkDisagreement {
                a,
                b,
                vertex,
                other,
            });
        }
        if a == b {
            return Ok(());
        }
        let link = Link { a, b, vertex };
        let reverse = Link { a: b, b: a, vertex };
        if !self.seen.contains(&reverse) && self.seen.insert(link) {
            self.links.push(link);
        }
        Ok(())
    }

    fn finish(self) -> GadgetFamily {
        GadgetFamily {
            n: self.n,
            graphs: self.graphs,
            links: self.links,
        }
    }
}

fn cycle_graphs(n: usize) -> Result<[(&'static str, Digraph); 4], GraphError> {
    let g = |edges: &[(Vertex, Vertex)]| Digraph::from_edges(n, edges.iter().copied());
    Ok([
        ("G", g(&[(1, 2), (2, 3), (3, 1)])?),
        ("G1", g(&[(1, 3), (2, 3), (3, 1)])?),
        ("G2", g(&[(1, 2), (2, 1), (3, 1)])?),
        ("G3", g(&[(1, 2), (2, 3), (3, 2)])?),
    ])
}

/// A 3-cycle on `{1,2,3}` (plus isolated vertices) and, for each cycle
/// vertex `v`, the graph where `v` points at the other cycle vertex instead.
pub fn build_cycle_family(n: usize) -> Result<GadgetFamily, GadgetError> {
    if n < 3 {
        return Err(GadgetError::CycleTooSmall { n });
    }
    let mut builder = FamilyBuilder::new(n);
    let [base, rest @ ..] = cycle_graphs(n)?;
    let center = builder.add(base.0, base.1)?;
    for (v, (label, graph)) in (1..).zip(rest) {
        let i = builder.add(label, graph)?;
        builder.link(center, i, v)?;
    }
    Ok(builder.finish())
}

/// For `D = {1..=d+1}`: `K_v` has every edge from `D \ {v}` into `D`, and
/// `K_uv` has every edge from `D \ {u, v}` into `D`, linked to `K_v` by `u`.
/// `K_uv` and `K_vu` are the same graph and appear once.
pub fn build_k_family(n: usize, d: usize) -> Result<GadgetFamily, GadgetError> {
    if d < 2 || d + 1 > n {
        return Err(GadgetError::KFamilyDegree { n, d });
    }
    let core: Vec<Vertex> = (1..=d + 1).collect();
    let without = |removed: &[Vertex]| {
        let edges = core
            .iter()
            .filter(|u| !removed.contains(u))
            .flat_map(|&u| core.iter().filter(move |&&w| w != u).map(move |&w| (u, w)));
        Digraph::from_edges(n, edges)
    };
    let mut builder = FamilyBuilder::new(n);
    let singles: Vec<usize> = core
        .iter()
        .map(|&v| builder.add(&format!("K{v}"), without(&[v])?))
        .collect::<Result<_, GadgetError>>()?;
    for (&v, &kv) in core.iter().zip(&singles) {
        for &u in core.iter().filter(|&&u| u != v) {
            let (lo, hi) = (u.min(v), u.max(v));
            let kuv = builder.add(&format!("K{lo},{hi}"), without(&[u, v])?)?;
            builder.link(kv, kuv, u)?;
        }
    }
    Ok(builder.finish())
}

const TWO_PATH: [(&str, [&[Vertex]; 4]); 8] = [
    ("L", [&[2, 3, 4], &[1, 3, 4], &[1, 2, 4], &[]]),
    ("TL", [&[2, 3, 4], &[], &[1, 2, 4], &[]]),
    ("TM", [&[2, 3, 4], &[], &[1, 2, 4], &[1, 2, 3]]),
    ("TR", [&[], &[], &[1, 2, 4], &[1, 2, 3]]),
    ("R", [&[], &[1, 3, 4], &[1, 2, 4], &[1, 2, 3]]),
    ("BL", [&[2, 3, 4], &[1, 3, 4], &[], &[]]),
    ("BM", [&[2, 3, 4], &[1, 3, 4], &[], &[1, 2, 3]]),
    ("BR", [&[], &[1, 3, 4], &[], &[1, 2, 3]]),
];

const TWO_PATH_LINKS: [(&str, &str, Vertex); 8] = [
    ("L", "TL", 2),
    ("TL", "TM", 4),
    ("TM", "TR", 1),
    ("TR", "R", 2),
    ("L", "BL", 3),
    ("BL", "BM", 4),
    ("BM", "BR", 1),
    ("BR", "R", 3),
];

fn two_path_into(
    builder: &mut FamilyBuilder,
    perm: [Vertex; 4],
    suffix: &str,
) -> Result<(), GadgetError> {
    let map = |v: Vertex| perm[v - 1];
    let mut ids = HashMap::new();
    for (label, lists) in TWO_PATH {
        let mut out = vec![Vec::new(); 4];
        for (u, targets) in (1..).zip(lists) {
            out[map(u) - 1] = targets.iter().map(|&w| map(w)).collect();
        }
        let id = builder.add(&format!("{label}{suffix}"), Digraph::from_out_lists(out)?)?;
        ids.insert(label, id);
    }
    for (a, b, v) in TWO_PATH_LINKS {
        builder.link(ids[a], ids[b], map(v))?;
    }
    Ok(())
}

/// The eight 4-vertex graphs of the two-path counterexample: a bidirected
/// triangle on `{1,2,3}` all pointing at 4, transformed along two paths of
/// single-vertex deviations into a common end graph.
pub fn build_two_path_family() -> Result<GadgetFamily, GadgetError> {
    let mut builder = FamilyBuilder::new(4);
    two_path_into(&mut builder, [1, 2, 3, 4], "")?;
    Ok(builder.finish())
}

/// [`build_two_path_family`] closed under all relabelings of `{1,2,3}`.
///
/// The eight drawn graphs alone admit a consistent assignment: the
/// argument behind them fixes, without loss of generality, which triangle
/// vertex the mechanism leaves out, and the other choices are covered by the
/// relabeled copies. Identical graphs across copies are merged.
pub fn build_two_path_orbit() -> Result<GadgetFamily, GadgetError> {
    const PERMS: [[Vertex; 3]; 6] = [
        [1, 2, 3],
        [1, 3, 2],
        [2, 1, 3],
        [2, 3, 1],
        [3, 1, 2],
        [3, 2, 1],
    ];
    let mut builder = FamilyBuilder::new(4);
    for p in PERMS {
        let suffix = if p == [1, 2, 3] {
            String::new()
        } else {
            format!("[{}{}{}]", p[0], p[1], p[2])
        };
        two_path_into(&mut builder, [p[0], p[1], p[2], 4], &suffix)?;
    }
    Ok(builder.finish())
}

/// Is there an assignment of selections of size at most `k`, each within
/// `alpha` of the maximum indegree under `objective`, respecting every link?
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ImpossibilityQuery {
    pub family: GadgetFamily,
    pub objective: Aggregator,
    #[serde(with = "serde_rational")]
    pub alpha: Rational,
    pub k: usize,
}

impl ImpossibilityQuery {
    pub fn new(
        family: GadgetFamily,
        objective: Aggregator,
        alpha: Rational,
        k: usize,
    ) -> Result<Self, GadgetError> {
        let query = ImpossibilityQuery {
            family,
            objective,
            alpha,
            k,
        };
        query.check()?;
        Ok(query)
    }

    fn check(&self) -> Result<(), GadgetError> {
        if self.family.is_empty() {
            return Err(GadgetError::InvalidQuery("the family is empty".into()));
        }
        if self.alpha < Rational::from_integer(0) {
            return Err(GadgetError::InvalidQuery(format!(
                "alpha must be nonnegative, got {}",
                Exact(self.alpha)
            )));
        }
        if !(1..=self.family.n()).contains(&self.k) {
            return Err(GadgetError::InvalidQuery(format!(
                "k must lie in 1..={}, got {}",
                self.family.n(),
                self.k
            )));
        }
        Ok(())
    }
}

/// One selection per family graph, by index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(into = "BTreeMap<usize, Selection>")]
pub struct Assignment(Vec<Selection>);

impl From<Assignment> for BTreeMap<usize, Selection> {
    fn from(a: Assignment) -> Self {
        a.0.into_iter().enumerate().collect()
    }
}

impl Assignment {
    pub fn new(selections: Vec<Selection>) -> Self {
        Assignment(selections)
    }

    /// The assignment a concrete mechanism induces on the family.
    pub fn induced<R: SelectionRule + ?Sized>(
        family: &GadgetFamily,
        rule: &R,
    ) -> Result<Self, MechanismError> {
        family
            .graphs()
            .iter()
            .map(|g| rule.select(&g.graph))
            .collect::<Result<_, _>>()
            .map(Assignment)
    }

    pub fn selections(&self) -> &[Selection] {
        &self.0
    }

    pub fn get(&self, graph: usize) -> &Selection {
        &self.0[graph]
    }

    /// Checks every constraint of `query` from scratch: sizes, the additive
    /// threshold via [`additive_gap`], and membership agreement on links.
    pub fn validate(&self, query: &ImpossibilityQuery) -> Result<(), GadgetError> {
        let family = &query.family;
        if self.0.len() != family.len() {
            return Err(GadgetError::InvalidWitness {
                graph: self.0.len().min(family.len()),
                reason: format!("{} selections for {} graphs", self.0.len(), family.len()),
            });
        }
        for (i, selection) in self.0.iter().enumerate() {
            let reject = |reason: String| GadgetError::InvalidWitness { graph: i, reason };
            if selection.len() > query.k {
                return Err(reject(format!(
                    "{} vertices exceed k = {}",
                    selection.len(),
                    query.k
                )));
            }
            let gap = additive_gap(family.graph(i), selection, query.objective)
                .map_err(|e| reject(e.to_string()))?;
            if gap > query.alpha {
                return Err(reject(format!(
                    "{} gap {} exceeds alpha = {}",
                    query.objective,
                    Exact(gap),
                    Exact(query.alpha)
                )));
            }
        }
        for link in family.links() {
            let (sa, sb) = (&self.0[link.a], &self.0[link.b]);
            if sa.contains(link.vertex) != sb.contains(link.vertex) {
                return Err(GadgetError::InvalidWitness {
                    graph: link.a,
                    reason: format!(
                        "vertex {} is selected in only one of graphs {} and {}",
                        link.vertex, link.a, link.b
                    ),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "lowercase")]
pub enum ImpossibilityOutcome {
    /// The family admits a consistent assignment. This does not imply a
    /// mechanism with the guarantee exists on the whole class.
    Sat {
        assignment: Assignment,
        stats: SearchStats,
    },
    /// No impartial mechanism meets the guarantee on any class containing
    /// the family.
    Unsat { trace: SearchTrace },
}

impl ImpossibilityOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, ImpossibilityOutcome::Sat { .. })
    }

    pub fn is_unsat(&self) -> bool {
        !self.is_sat()
    }

    pub fn assignment(&self) -> Option<&Assignment> {
        match self {
            ImpossibilityOutcome::Sat { assignment, .. } => Some(assignment),
            ImpossibilityOutcome::Unsat { .. } => None,
        }
    }
}

/// Backtracking search with forward checking over the query's constraints.
/// A SAT witness is re-validated with [`Assignment::validate`] before it is
/// returned.
pub fn verify_impossibility(
    query: &ImpossibilityQuery,
) -> Result<ImpossibilityOutcome, GadgetError> {
    query.check()?;
    let outcome = search::backtrack(query)?;
    if let Some(assignment) = outcome.assignment() {
        assignment.validate(query)?;
    }
    Ok(outcome)
}
