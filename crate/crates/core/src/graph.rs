//! Loop-free digraphs on the vertex set `1..=n`.
//!
//! Adjacency is kept canonical (sorted, duplicate-free out-lists), so two
//! [`Digraph`]s compare equal exactly when they have the same vertex count and
//! edge set. Indegrees are cached at construction; every graph is immutable.

use std::fmt;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A 1-indexed vertex.
pub type Vertex = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("a graph needs at least one vertex")]
    NoVertices,
    #[error("vertex {vertex} is out of range 1..={n}")]
    VertexOutOfRange { vertex: Vertex, n: usize },
    #[error("self-loop on vertex {0}")]
    SelfLoop(Vertex),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(Vertex, Vertex),
    #[error("outdegree bound {d} is outside 1..={max} for n = {n}")]
    InvalidOutdegreeBound { d: usize, n: usize, max: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid graph JSON: {0}")]
    Json(String),
}

/// The tie-breaking key `(indegree, vertex)`, ordered lexicographically.
///
/// A larger key wins: higher indegree first, then higher index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LexKey {
    pub indegree: usize,
    pub vertex: Vertex,
}

impl LexKey {
    pub fn new(indegree: usize, vertex: Vertex) -> Self {
        LexKey { indegree, vertex }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "GraphJson", into = "GraphJson")]
pub struct Digraph {
    // out[v - 1] is the sorted out-neighborhood of v.
    out: Vec<Vec<Vertex>>,
    indeg: Vec<usize>,
}

impl Digraph {
    /// The edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::NoVertices);
        }
        Ok(Digraph {
            out: vec![Vec::new(); n],
            indeg: vec![0; n],
        })
    }

    /// The complete loop-free digraph on `n` vertices.
    pub fn complete(n: usize) -> Result<Self, GraphError> {
        let edges = (1..=n).flat_map(|u| (1..=n).filter(move |&v| v != u).map(move |v| (u, v)));
        Self::from_edges(n, edges)
    }

    /// Builds a graph from an edge list, rejecting self-loops, out-of-range
    /// endpoints and repeated edges.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        if n == 0 {
            return Err(GraphError::NoVertices);
        }
        let mut out = vec![Vec::new(); n];
        for (u, v) in edges {
            check_vertex(u, n)?;
            check_vertex(v, n)?;
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            out[u - 1].push(v);
        }
        Self::from_out_lists(out)
    }

    /// Builds a graph from per-vertex out-neighborhoods (`lists[v - 1]` for
    /// vertex `v`). Lists need not be sorted but must be duplicate-free.
    pub fn from_out_lists(mut lists: Vec<Vec<Vertex>>) -> Result<Self, GraphError> {
        let n = lists.len();
        if n == 0 {
            return Err(GraphError::NoVertices);
        }
        let mut indeg = vec![0; n];
        for (i, list) in lists.iter_mut().enumerate() {
            let u = i + 1;
            list.sort_unstable();
            for (j, &v) in list.iter().enumerate() {
                check_vertex(v, n)?;
                if v == u {
                    return Err(GraphError::SelfLoop(u));
                }
                if j > 0 && list[j - 1] == v {
                    return Err(GraphError::DuplicateEdge(u, v));
                }
                indeg[v - 1] += 1;
            }
        }
        Ok(Digraph { out: lists, indeg })
    }

    pub fn n(&self) -> usize {
        self.out.len()
    }

    pub fn vertices(&self) -> RangeInclusive<Vertex> {
        1..=self.n()
    }

    pub fn contains_vertex(&self, v: Vertex) -> bool {
        (1..=self.n()).contains(&v)
    }

    /// Sorted out-neighborhood of `v`.
    ///
    /// # Panics
    /// If `v` is not a vertex of the graph.
    pub fn out_neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.out[v - 1]
    }

    pub fn outdegree(&self, v: Vertex) -> usize {
        self.out[v - 1].len()
    }

    /// Number of edges pointing at `v`.
    pub fn indegree(&self, v: Vertex) -> Result<usize, GraphError> {
        check_vertex(v, self.n())?;
        Ok(self.indeg[v - 1])
    }

    /// All indegrees, indexed by `v - 1`.
    pub fn indegrees(&self) -> &[usize] {
        &self.indeg
    }

    pub fn lex_key(&self, v: Vertex) -> LexKey {
        LexKey::new(self.indeg[v - 1], v)
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.contains_vertex(u) && self.out[u - 1].binary_search(&v).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    /// Edges in canonical order: by source, then by target.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(i, list)| list.iter().map(move |&v| (i + 1, v)))
    }

    /// Maximum indegree over all vertices.
    pub fn max_indegree(&self) -> usize {
        self.indeg.iter().copied().max().unwrap_or(0)
    }

    pub fn max_outdegree(&self) -> usize {
        self.out.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// The vertex with maximum indegree, ties broken towards the larger index.
    pub fn top(&self) -> Vertex {
        self.vertices()
            .max_by_key(|&v| self.lex_key(v))
            .expect("graphs have at least one vertex")
    }

    /// Copy of the graph with the out-neighborhood of `v` replaced.
    pub fn with_out_neighbors(&self, v: Vertex, targets: Vec<Vertex>) -> Result<Self, GraphError> {
        check_vertex(v, self.n())?;
        let mut lists = self.out.clone();
        lists[v - 1] = targets;
        Self::from_out_lists(lists)
    }

    /// `G_v`: the graph with every outgoing edge of `v` removed.
    pub fn without_out_edges(&self, v: Vertex) -> Result<Self, GraphError> {
        self.with_out_neighbors(v, Vec::new())
    }

    /// Keeps exactly the edges `(u, v)` for which `keep(u, v)` holds.
    pub fn retain_edges<F>(&self, mut keep: F) -> Self
    where
        F: FnMut(Vertex, Vertex) -> bool,
    {
        let n = self.n();
        let mut indeg = vec![0; n];
        let out = self
            .out
            .iter()
            .enumerate()
            .map(|(i, list)| {
                let kept: Vec<Vertex> = list.iter().copied().filter(|&v| keep(i + 1, v)).collect();
                for &v in &kept {
                    indeg[v - 1] += 1;
                }
                kept
            })
            .collect();
        Digraph { out, indeg }
    }

    /// Replaces `v`'s out-list with a list already known to be valid.
    fn replace_out_unchecked(&self, v: Vertex, targets: Vec<Vertex>) -> Self {
        let mut indeg = self.indeg.clone();
        for &w in &self.out[v - 1] {
            indeg[w - 1] -= 1;
        }
        for &w in &targets {
            indeg[w - 1] += 1;
        }
        let mut out = self.out.clone();
        out[v - 1] = targets;
        Digraph { out, indeg }
    }

    /// Every graph obtained by changing the outgoing edges of `v`, `G` itself
    /// included. Subsets of `V \ {v}` are produced in increasing binary order,
    /// the smallest target being the least significant bit.
    pub fn deviation_neighborhood(&self, v: Vertex) -> Result<Deviations<'_>, GraphError> {
        check_vertex(v, self.n())?;
        Ok(Deviations::new(self, v, None))
    }

    /// As [`Digraph::deviation_neighborhood`], restricted to out-neighborhoods
    /// of size at most `d`, so deviations stay inside `G_n(d)`.
    pub fn restricted_deviation_neighborhood(
        &self,
        v: Vertex,
        d: usize,
    ) -> Result<Deviations<'_>, GraphError> {
        check_vertex(v, self.n())?;
        check_bound(self.n(), d)?;
        Ok(Deviations::new(self, v, Some(d)))
    }

    /// Parses either the JSON form (input starting with `{`) or the line
    /// format.
    pub fn parse(input: &str) -> Result<Self, GraphError> {
        if input.trim_start().starts_with('{') {
            Self::from_json(input)
        } else {
            Self::parse_text(input)
        }
    }

    /// Line format: `n <N>` on the first line, then one `<u> <v>` edge per
    /// non-empty line.
    pub fn parse_text(input: &str) -> Result<Self, GraphError> {
        let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let (line_no, header) = lines.next().ok_or_else(|| GraphError::Parse {
            line: 1,
            message: "missing `n <N>` header".into(),
        })?;
        let n = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["n", count] => parse_number(count, line_no)?,
            _ => {
                return Err(GraphError::Parse {
                    line: line_no,
                    message: format!("expected `n <N>` header, found `{header}`"),
                })
            }
        };
        if n == 0 {
            return Err(GraphError::Parse {
                line: line_no,
                message: "a graph needs at least one vertex".into(),
            });
        }
        let mut out: Vec<Vec<Vertex>> = vec![Vec::new(); n];
        for (line_no, line) in lines {
            if line.is_empty() {
                continue;
            }
            let (u, v) = match line.split_whitespace().collect::<Vec<_>>().as_slice() {
                [u, v] => (parse_number(u, line_no)?, parse_number(v, line_no)?),
                _ => {
                    return Err(GraphError::Parse {
                        line: line_no,
                        message: format!("expected `<u> <v>`, found `{line}`"),
                    })
                }
            };
            let at_line = |e: GraphError| GraphError::Parse {
                line: line_no,
                message: e.to_string(),
            };
            check_vertex(u, n).map_err(at_line)?;
            check_vertex(v, n).map_err(at_line)?;
            if u == v {
                return Err(at_line(GraphError::SelfLoop(u)));
            }
            if out[u - 1].contains(&v) {
                return Err(at_line(GraphError::DuplicateEdge(u, v)));
            }
            out[u - 1].push(v);
        }
        Self::from_out_lists(out)
    }

    pub fn from_json(input: &str) -> Result<Self, GraphError> {
        serde_json::from_str(input).map_err(|e| GraphError::Json(e.to_string()))
    }

    /// Serializes to the line format accepted by [`Digraph::parse_text`].
    pub fn to_text(&self) -> String {
        let mut s = format!("n {}\n", self.n());
        for (u, v) in self.edges() {
            s.push_str(&format!("{u} {v}\n"));
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serialization is infallible")
    }
}

impl fmt::Debug for Digraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Digraph(n={}, {:?})",
            self.n(),
            self.edges().collect::<Vec<_>>()
        )
    }
}

impl fmt::Display for Digraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} {{", self.n())?;
        for (i, (u, v)) in self.edges().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "({u},{v})")?;
        }
        write!(f, "}}")
    }
}

/// Wire form: `{"n": N, "edges": [[u, v], ...]}`.
#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<[Vertex; 2]>,
}

impl TryFrom<GraphJson> for Digraph {
    type Error = GraphError;

    fn try_from(json: GraphJson) -> Result<Self, Self::Error> {
        Digraph::from_edges(json.n, json.edges.into_iter().map(|[u, v]| (u, v)))
    }
}

impl From<Digraph> for GraphJson {
    fn from(g: Digraph) -> Self {
        GraphJson {
            n: g.n(),
            edges: g.edges().map(|(u, v)| [u, v]).collect(),
        }
    }
}

fn check_vertex(v: Vertex, n: usize) -> Result<(), GraphError> {
    if (1..=n).contains(&v) {
        Ok(())
    } else {
        Err(GraphError::VertexOutOfRange { vertex: v, n })
    }
}

fn check_bound(n: usize, d: usize) -> Result<(), GraphError> {
    if d >= 1 && d < n {
        Ok(())
    } else {
        Err(GraphError::InvalidOutdegreeBound {
            d,
            n,
            max: n.saturating_sub(1),
        })
    }
}

fn parse_number(token: &str, line: usize) -> Result<usize, GraphError> {
    token.parse().map_err(|_| GraphError::Parse {
        line,
        message: format!("`{token}` is not a nonnegative integer"),
    })
}

/// Counter over subsets of a fixed ground set in increasing binary order,
/// optionally skipping subsets larger than `max_size`.
#[derive(Debug, Clone)]
pub(crate) struct SubsetCounter {
    bits: Vec<bool>,
    ones: usize,
    max_size: Option<usize>,
}

impl SubsetCounter {
    pub(crate) fn new(len: usize, max_size: Option<usize>) -> Self {
        SubsetCounter {
            bits: vec![false; len],
            ones: 0,
            max_size,
        }
    }

    /// Moves to the next admissible subset; returns `false` after wrapping
    /// back to the empty set.
    pub(crate) fn advance(&mut self) -> bool {
        loop {
            let mut i = 0;
            while i < self.bits.len() && self.bits[i] {
                self.bits[i] = false;
                self.ones -= 1;
                i += 1;
            }
            if i == self.bits.len() {
                return false;
            }
            self.bits[i] = true;
            self.ones += 1;
            if self.max_size.is_none_or(|m| self.ones <= m) {
                return true;
            }
        }
    }

    pub(crate) fn select<'a, T: Copy>(&'a self, ground: &'a [T]) -> impl Iterator<Item = T> + 'a {
        ground
            .iter()
            .zip(&self.bits)
            .filter(|(_, &b)| b)
            .map(|(&x, _)| x)
    }
}

/// Stream of the deviation neighborhood of one vertex.
#[derive(Debug, Clone)]
pub struct Deviations<'g> {
    graph: &'g Digraph,
    vertex: Vertex,
    targets: Vec<Vertex>,
    counter: SubsetCounter,
    done: bool,
}

impl<'g> Deviations<'g> {
    fn new(graph: &'g Digraph, vertex: Vertex, max_size: Option<usize>) -> Self {
        let targets: Vec<Vertex> = graph.vertices().filter(|&w| w != vertex).collect();
        let counter = SubsetCounter::new(targets.len(), max_size);
        Deviations {
            graph,
            vertex,
            targets,
            counter,
            done: false,
        }
    }

    pub fn vertex(&self) -> Vertex {
        self.vertex
    }
}

impl Iterator for Deviations<'_> {
    type Item = Digraph;

    fn next(&mut self) -> Option<Digraph> {
        if self.done {
            return None;
        }
        let chosen: Vec<Vertex> = self.counter.select(&self.targets).collect();
        let g = self.graph.replace_out_unchecked(self.vertex, chosen);
        self.done = !self.counter.advance();
        Some(g)
    }
}

/// The class `G_n` (no bound) or `G_n(d)` (every outdegree at most `d`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GraphClassSpec {
    n: usize,
    d: Option<usize>,
}

impl GraphClassSpec {
    pub fn new(n: usize, d: Option<usize>) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::NoVertices);
        }
        if let Some(d) = d {
            check_bound(n, d)?;
        }
        Ok(GraphClassSpec { n, d })
    }

    pub fn unbounded(n: usize) -> Result<Self, GraphError> {
        Self::new(n, None)
    }

    pub fn bounded(n: usize, d: usize) -> Result<Self, GraphError> {
        Self::new(n, Some(d))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> Option<usize> {
        self.d
    }

    /// The bound that actually constrains graphs of the class; `n - 1` when
    /// unbounded.
    pub fn effective_bound(&self) -> usize {
        self.d.unwrap_or(self.n - 1)
    }

    pub fn contains(&self, g: &Digraph) -> bool {
        g.n() == self.n && g.max_outdegree() <= self.effective_bound()
    }

    /// Admissible out-neighborhoods per vertex: `sum_{i<=d} C(n-1, i)`.
    pub fn choices_per_vertex(&self) -> u128 {
        let m = (self.n - 1) as u32;
        match self.d {
            None => 1u128.checked_shl(m).unwrap_or(u128::MAX),
            Some(d) => (0..=d as u128).map(|i| binomial(m as u128, i)).sum(),
        }
    }

    /// Number of graphs in the class, or `None` if it overflows `u128`.
    pub fn size(&self) -> Option<u128> {
        self.choices_per_vertex().checked_pow(self.n as u32)
    }

    /// Deviation stream for `v` that stays inside the class.
    pub fn deviations<'g>(&self, g: &'g Digraph, v: Vertex) -> Result<Deviations<'g>, GraphError> {
        match self.d {
            Some(d) => g.restricted_deviation_neighborhood(v, d),
            None => g.deviation_neighborhood(v),
        }
    }

    /// Every graph of the class exactly once. Vertex 1's out-neighborhood is
    /// the most significant digit; each digit runs through the admissible
    /// subsets in increasing binary order.
    pub fn enumerate(&self) -> ClassIter {
        ClassIter::new(*self)
    }
}

impl fmt::Display for GraphClassSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.d {
            Some(d) => write!(f, "G_{}({})", self.n, d),
            None => write!(f, "G_{}", self.n),
        }
    }
}

pub(crate) fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Convenience wrapper over [`GraphClassSpec::enumerate`].
pub fn enumerate_class(spec: GraphClassSpec) -> ClassIter {
    spec.enumerate()
}

/// Stream over every graph of a [`GraphClassSpec`].
#[derive(Debug, Clone)]
pub struct ClassIter {
    targets: Vec<Vec<Vertex>>,
    counters: Vec<SubsetCounter>,
    done: bool,
}

impl ClassIter {
    fn new(spec: GraphClassSpec) -> Self {
        let n = spec.n;
        let targets: Vec<Vec<Vertex>> = (1..=n)
            .map(|v| (1..=n).filter(|&w| w != v).collect())
            .collect();
        let counters = (0..n).map(|_| SubsetCounter::new(n - 1, spec.d)).collect();
        ClassIter {
            targets,
            counters,
            done: false,
        }
    }
}

impl Iterator for ClassIter {
    type Item = Digraph;

    fn next(&mut self) -> Option<Digraph> {
        if self.done {
            return None;
        }
        let lists = self
            .counters
            .iter()
            .zip(&self.targets)
            .map(|(c, t)| c.select(t).collect())
            .collect();
        let g = Digraph::from_out_lists(lists).expect("enumerated adjacency is canonical");
        // Odometer: the last vertex turns fastest.
        self.done = true;
        for c in self.counters.iter_mut().rev() {
            if c.advance() {
                self.done = false;
                break;
            }
        }
        Some(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cycle3() -> Digraph {
        Digraph::from_edges(3, [(1, 2), (2, 3), (3, 1)]).unwrap()
    }

    #[test]
    fn indegree_examples() {
        assert_eq!(cycle3().indegree(2), Ok(1));
        assert_eq!(Digraph::empty(3).unwrap().indegree(1), Ok(0));
        let g = Digraph::from_edges(3, [(1, 3), (2, 3), (3, 1)]).unwrap();
        assert_eq!(g.indegree(3), Ok(2));
        assert_eq!(
            g.indegree(4),
            Err(GraphError::VertexOutOfRange { vertex: 4, n: 3 })
        );
        assert!(g.indegree(0).is_err());
    }

    #[test]
    fn max_indegree_and_top() {
        let g = Digraph::from_edges(3, [(1, 3), (2, 3), (3, 1)]).unwrap();
        assert_eq!(cycle3().max_indegree(), 1);
        assert_eq!(g.max_indegree(), 2);
        assert_eq!(Digraph::complete(4).unwrap().max_indegree(), 3);
        assert_eq!(cycle3().top(), 3);
        assert_eq!(g.top(), 3);
        assert_eq!(Digraph::empty(5).unwrap().top(), 5);
    }

    #[test]
    fn construction_rejects_bad_edges() {
        assert_eq!(
            Digraph::from_edges(3, [(2, 2)]),
            Err(GraphError::SelfLoop(2))
        );
        assert_eq!(
            Digraph::from_edges(3, [(1, 2), (1, 2)]),
            Err(GraphError::DuplicateEdge(1, 2))
        );
        assert!(matches!(
            Digraph::from_edges(3, [(1, 4)]),
            Err(GraphError::VertexOutOfRange { vertex: 4, .. })
        ));
        assert_eq!(Digraph::empty(0), Err(GraphError::NoVertices));
    }

    #[test]
    fn deviation_neighborhood_small_cases() {
        let g = Digraph::empty(2).unwrap();
        let devs: Vec<_> = g.deviation_neighborhood(1).unwrap().collect();
        assert_eq!(
            devs,
            vec![g.clone(), Digraph::from_edges(2, [(1, 2)]).unwrap()]
        );
        assert_eq!(cycle3().deviation_neighborhood(2).unwrap().count(), 4);
        assert!(cycle3().deviation_neighborhood(4).is_err());
    }

    #[test]
    fn deviation_order_is_binary_over_sorted_targets() {
        let g = Digraph::empty(3).unwrap();
        let outs: Vec<Vec<Vertex>> = g
            .deviation_neighborhood(2)
            .unwrap()
            .map(|h| h.out_neighbors(2).to_vec())
            .collect();
        assert_eq!(outs, vec![vec![], vec![1], vec![3], vec![1, 3]]);
    }

    #[test]
    fn complete_graph_deviations_keep_other_edges() {
        let g = Digraph::complete(4).unwrap();
        let devs: Vec<_> = g.deviation_neighborhood(1).unwrap().collect();
        assert_eq!(devs.len(), 8);
        let others = |h: &Digraph| h.edges().filter(|&(u, _)| u != 1).collect::<Vec<_>>();
        for h in &devs {
            assert_eq!(others(h).len(), 9);
            assert_eq!(others(h), others(&g));
        }
    }

    #[test]
    fn restricted_deviation_counts() {
        let g = cycle3();
        let outs: Vec<Vec<Vertex>> = g
            .restricted_deviation_neighborhood(1, 1)
            .unwrap()
            .map(|h| h.out_neighbors(1).to_vec())
            .collect();
        assert_eq!(outs, vec![vec![], vec![2], vec![3]]);

        let k4 = Digraph::complete(4).unwrap();
        let full: Vec<_> = k4.deviation_neighborhood(2).unwrap().collect();
        let restricted: Vec<_> = k4
            .restricted_deviation_neighborhood(2, 3)
            .unwrap()
            .collect();
        assert_eq!(full, restricted);

        let g5 = Digraph::empty(5).unwrap();
        assert_eq!(
            g5.restricted_deviation_neighborhood(3, 2).unwrap().count(),
            11
        );
        assert!(g5.restricted_deviation_neighborhood(3, 0).is_err());
        assert!(g5.restricted_deviation_neighborhood(3, 5).is_err());
    }

    #[test]
    fn class_counts() {
        let count = |n, d| GraphClassSpec::new(n, d).unwrap().enumerate().count() as u128;
        assert_eq!(count(2, None), 4);
        assert_eq!(count(3, Some(1)), 27);
        assert_eq!(count(4, Some(1)), 256);
        for (n, d) in [(1, None), (3, None), (4, None), (4, Some(2)), (4, Some(3))] {
            let spec = GraphClassSpec::new(n, d).unwrap();
            assert_eq!(Some(count(n, d)), spec.size(), "{spec}");
        }
        assert_eq!(GraphClassSpec::unbounded(6).unwrap().size(), Some(1 << 30));
        assert!(GraphClassSpec::new(1, Some(1)).is_err());
    }

    #[test]
    fn enumeration_respects_bound_and_is_duplicate_free() {
        let spec = GraphClassSpec::bounded(4, 2).unwrap();
        let all: Vec<_> = spec.enumerate().collect();
        assert!(all
            .iter()
            .all(|g| g.max_outdegree() <= 2 && spec.contains(g)));
        let unique: std::collections::BTreeSet<_> = all.iter().cloned().collect();
        assert_eq!(unique.len(), all.len());
        assert_eq!(all[0], Digraph::empty(4).unwrap());
    }

    #[test]
    fn enumeration_is_vertex_major() {
        let mut it = GraphClassSpec::bounded(3, 1).unwrap().enumerate();
        it.next();
        assert_eq!(
            it.next().unwrap(),
            Digraph::from_edges(3, [(3, 1)]).unwrap()
        );
    }

    #[test]
    fn text_format_roundtrip_and_errors() {
        let g = Digraph::parse("n 3\n1 2\n\n2 3\n3 1\n").unwrap();
        assert_eq!(g, cycle3());
        assert_eq!(Digraph::parse(&g.to_text()).unwrap(), g);

        let err = Digraph::parse("n 3\n1 2\n1 2\n").unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 3, .. }), "{err}");
        let err = Digraph::parse("n 3\n2 2\n").unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 2, .. }), "{err}");
        let err = Digraph::parse("n 3\n1 x\n").unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 2, .. }), "{err}");
        let err = Digraph::parse("3\n").unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 1, .. }), "{err}");
        assert!(Digraph::parse("n 3\n1 2 3\n").is_err());
        assert!(Digraph::parse("n 0\n").is_err());
    }

    #[test]
    fn json_form() {
        let g = cycle3();
        assert_eq!(g.to_json(), r#"{"n":3,"edges":[[1,2],[2,3],[3,1]]}"#);
        assert_eq!(Digraph::parse(&g.to_json()).unwrap(), g);
        assert!(Digraph::parse(r#"{"n":3,"edges":[[1,2],[1,2]]}"#).is_err());
        assert!(Digraph::parse(r#"{"n":3,"edges":[[1,1]]}"#).is_err());
    }

    #[test]
    fn isolated_vertices_are_kept() {
        let g = Digraph::from_edges(6, [(1, 2)]).unwrap();
        assert_eq!(g.n(), 6);
        assert_eq!(g.to_text(), "n 6\n1 2\n");
    }

    fn arb_graph(max_n: usize) -> impl Strategy<Value = Digraph> {
        (1..=max_n).prop_flat_map(|n| {
            proptest::collection::vec(proptest::collection::vec(any::<bool>(), n), n).prop_map(
                move |m| {
                    let edges = (0..n)
                        .flat_map(|u| (0..n).map(move |v| (u, v)))
                        .filter(|&(u, v)| u != v && m[u][v])
                        .map(|(u, v)| (u + 1, v + 1));
                    Digraph::from_edges(n, edges).unwrap()
                },
            )
        })
    }

    proptest! {
        #[test]
        fn deviations_only_touch_the_deviating_vertex(g in arb_graph(5), pick in 0usize..5) {
            let v = pick % g.n() + 1;
            let devs: Vec<_> = g.deviation_neighborhood(v).unwrap().collect();
            prop_assert_eq!(devs.len(), 1 << (g.n() - 1));
            prop_assert!(devs.contains(&g));
            let unique: std::collections::BTreeSet<_> = devs.iter().collect();
            prop_assert_eq!(unique.len(), devs.len());
            for h in &devs {
                for u in g.vertices().filter(|&u| u != v) {
                    prop_assert_eq!(h.out_neighbors(u), g.out_neighbors(u));
                }
                // cached indegrees agree with a fresh rebuild
                let rebuilt = Digraph::from_edges(h.n(), h.edges()).unwrap();
                prop_assert_eq!(h.indegrees(), rebuilt.indegrees());
            }
        }

        #[test]
        fn top_is_the_largest_max_indegree_vertex(g in arb_graph(7)) {
            let t = g.top();
            let delta = g.max_indegree();
            prop_assert_eq!(g.indegree(t).unwrap(), delta);
            for v in g.vertices().filter(|&v| v > t) {
                prop_assert!(g.indegree(v).unwrap() < delta);
            }
        }

        #[test]
        fn lex_key_is_a_total_order(a in 0usize..4, b in 1usize..5, c in 0usize..4, d in 1usize..5) {
            let x = LexKey::new(a, b);
            let y = LexKey::new(c, d);
            let relations = [x < y, x == y, x > y].iter().filter(|&&r| r).count();
            prop_assert_eq!(relations, 1);
            if x == y {
                prop_assert_eq!((a, b), (c, d));
            }
            prop_assert_eq!(x > y, a > c || (a == c && b > d));
        }

        #[test]
        fn text_and_json_roundtrip(g in arb_graph(6)) {
            prop_assert_eq!(Digraph::parse(&g.to_text()).unwrap(), g.clone());
            prop_assert_eq!(Digraph::parse(&g.to_json()).unwrap(), g);
        }
    }
}
