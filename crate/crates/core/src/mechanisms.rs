//! Selection mechanisms based on plurality with runners-up.
//!
//! Ties are always broken towards the larger vertex index: vertex `v` beats
//! `w` when `(indegree(v), v) > (indegree(w), w)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Digraph, SubsetCounter, Vertex};

/// Sorted, duplicate-free set of selected vertices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Selection(Vec<Vertex>);

impl Selection {
    pub fn new<I: IntoIterator<Item = Vertex>>(vertices: I) -> Self {
        let mut v: Vec<Vertex> = vertices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Selection(v)
    }

    pub fn empty() -> Self {
        Selection(Vec::new())
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[Vertex] {
        &self.0
    }

    pub fn is_subset(&self, other: &Selection) -> bool {
        self.iter().all(|v| other.contains(v))
    }
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

impl FromIterator<Vertex> for Selection {
    fn from_iter<I: IntoIterator<Item = Vertex>>(iter: I) -> Self {
        Selection::new(iter)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MechanismError {
    #[error("plurality with runners-up needs outdegree at most 1, but vertex {vertex} has outdegree {outdegree}")]
    OutdegreeTooLarge { vertex: Vertex, outdegree: usize },
    #[error("selection budget k = {k} is outside 2..={n}")]
    BudgetOutOfRange { k: usize, n: usize },
}

/// Which mechanism to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum Mechanism {
    /// Plurality with runners-up; defined on outdegree-one graphs only.
    Pwru,
    /// Asymmetric plurality with runners-up.
    Apwru,
    /// Asymmetric plurality with runners-up and pivotal vertices.
    ApwruPivotal,
    /// Asymmetric plurality with runners-up on the graph with short forward
    /// edges deleted; selects at most `k` vertices.
    ApwruDeletion { k: usize },
}

impl Mechanism {
    pub fn name(&self) -> &'static str {
        match self {
            Mechanism::Pwru => "pwru",
            Mechanism::Apwru => "apwru",
            Mechanism::ApwruPivotal => "apwru-pivotal",
            Mechanism::ApwruDeletion { .. } => "apwru-deletion",
        }
    }

    /// Builds a mechanism from its CLI name; `k` is only used by
    /// `apwru-deletion`, which requires it.
    pub fn from_name(name: &str, k: Option<usize>) -> Result<Self, String> {
        match (name, k) {
            ("pwru", _) => Ok(Mechanism::Pwru),
            ("apwru", _) => Ok(Mechanism::Apwru),
            ("apwru-pivotal", _) => Ok(Mechanism::ApwruPivotal),
            ("apwru-deletion", Some(k)) => Ok(Mechanism::ApwruDeletion { k }),
            ("apwru-deletion", None) => Err("apwru-deletion requires a budget k".into()),
            (other, _) => Err(format!("unknown mechanism `{other}`")),
        }
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mechanism::ApwruDeletion { k } => write!(f, "apwru-deletion(k={k})"),
            m => f.write_str(m.name()),
        }
    }
}

impl FromStr for Mechanism {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mechanism::from_name(s, None)
    }
}

/// Anything that maps a digraph to a selection: the built-in mechanisms, or
/// a closure standing in as a test double.
pub trait SelectionRule {
    fn select(&self, g: &Digraph) -> Result<Selection, MechanismError>;
}

impl SelectionRule for Mechanism {
    fn select(&self, g: &Digraph) -> Result<Selection, MechanismError> {
        run(*self, g)
    }
}

impl<F> SelectionRule for F
where
    F: Fn(&Digraph) -> Selection,
{
    fn select(&self, g: &Digraph) -> Result<Selection, MechanismError> {
        Ok(self(g))
    }
}

/// Dispatches to the mechanism's implementation.
pub fn run(mechanism: Mechanism, g: &Digraph) -> Result<Selection, MechanismError> {
    match mechanism {
        Mechanism::Pwru => pwru(g),
        Mechanism::Apwru => Ok(apwru(g)),
        Mechanism::ApwruPivotal => Ok(apwru_pivotal(g)),
        Mechanism::ApwruDeletion { k } => apwru_deletion(g, k),
    }
}

fn nonempty(selection: Selection, mechanism: &str) -> Selection {
    assert!(
        !selection.is_empty(),
        "{mechanism} returned an empty selection, which cannot happen for a valid graph"
    );
    selection
}

/// Plurality with runners-up.
///
/// Selects every vertex of maximum indegree. When that vertex `t` is unique,
/// also selects every vertex with indegree one below the maximum that has an
/// edge to `t`.
pub fn pwru(g: &Digraph) -> Result<Selection, MechanismError> {
    if let Some(v) = g.vertices().find(|&v| g.outdegree(v) > 1) {
        return Err(MechanismError::OutdegreeTooLarge {
            vertex: v,
            outdegree: g.outdegree(v),
        });
    }
    let indeg = g.indegrees();
    let delta = g.max_indegree();
    let mut chosen: Vec<Vertex> = g.vertices().filter(|&v| indeg[v - 1] == delta).collect();
    if let [t] = chosen[..] {
        if delta >= 1 {
            chosen.extend(
                g.vertices()
                    .filter(|&u| indeg[u - 1] == delta - 1 && g.has_edge(u, t)),
            );
        }
    }
    Ok(nonempty(Selection::new(chosen), "pwru"))
}

/// The winner of the tie-breaking order once the edges `removed` (all
/// leaving a single vertex, sorted) are taken out of a graph with indegrees
/// `indeg`.
fn top_after_removal(indeg: &[usize], removed: &[Vertex]) -> Vertex {
    let mut removed = removed.iter().peekable();
    let mut best = (0, 0);
    for (i, &d) in indeg.iter().enumerate() {
        let w = i + 1;
        let mut d = d;
        if removed.peek() == Some(&&w) {
            removed.next();
            d -= 1;
        }
        if (d, w) >= best {
            best = (d, w);
        }
    }
    best.1
}

/// Whether `v` is selected by [`apwru`] on a graph with indegrees `indeg` in
/// which `v`'s out-neighborhood is `out_v`.
fn apwru_selects(indeg: &[usize], v: Vertex, out_v: &[Vertex]) -> bool {
    top_after_removal(indeg, out_v) == v
}

/// Asymmetric plurality with runners-up.
///
/// Selects `v` exactly when `v` wins the tie-breaking order in `G_v`, the graph
/// with all of `v`'s outgoing edges removed. Runs in `O(n^2 + m)`.
pub fn apwru(g: &Digraph) -> Selection {
    let indeg = g.indegrees();
    let chosen = g
        .vertices()
        .filter(|&v| apwru_selects(indeg, v, g.out_neighbors(v)))
        .collect();
    nonempty(Selection(chosen), "apwru")
}

/// How [`apwru_pivotal_with`] looks for a witnessing deviation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PivotSearch {
    /// Try the three deviations that settle the nonemptiness argument first
    /// (drop all edges; drop all and point at the top vertex; drop only the
    /// edge to the top vertex), then fall back to full enumeration.
    #[default]
    CandidatesFirst,
    /// Enumerate the whole deviation neighborhood.
    Exhaustive,
}

/// Asymmetric plurality with runners-up and pivotal vertices.
///
/// Keeps the members `u` of [`apwru`]'s selection that are pivotal for every
/// other member `v`: some change of `u`'s outgoing edges removes `v` from the
/// selection. Never selects all `n` vertices when `n >= 2`.
pub fn apwru_pivotal(g: &Digraph) -> Selection {
    apwru_pivotal_with(g, PivotSearch::CandidatesFirst)
}

pub fn apwru_pivotal_with(g: &Digraph, search: PivotSearch) -> Selection {
    let base = apwru(g);
    let top = g.top();
    let chosen = base
        .iter()
        .filter(|&u| {
            base.iter()
                .filter(|&v| v != u)
                .all(|v| is_pivotal(g, u, v, top, search))
        })
        .collect();
    nonempty(Selection(chosen), "apwru-pivotal")
}

/// Whether some `G' in N_u(G)` has `v` unselected by [`apwru`].
fn is_pivotal(g: &Digraph, u: Vertex, v: Vertex, top: Vertex, search: PivotSearch) -> bool {
    let mut indeg = g.indegrees().to_vec();
    for &w in g.out_neighbors(u) {
        indeg[w - 1] -= 1;
    }
    // `indeg` now describes G_u; each candidate adds its own targets back.
    let drops_v = |indeg: &mut Vec<usize>, targets: &[Vertex]| {
        for &w in targets {
            indeg[w - 1] += 1;
        }
        let dropped = !apwru_selects(indeg, v, g.out_neighbors(v));
        for &w in targets {
            indeg[w - 1] -= 1;
        }
        dropped
    };

    if search == PivotSearch::CandidatesFirst {
        let mut candidates: Vec<Vec<Vertex>> = vec![Vec::new()];
        if top != u {
            candidates.push(vec![top]);
            candidates.push(
                g.out_neighbors(u)
                    .iter()
                    .copied()
                    .filter(|&w| w != top)
                    .collect(),
            );
        }
        if candidates.iter().any(|t| drops_v(&mut indeg, t)) {
            return true;
        }
    }

    let ground: Vec<Vertex> = g.vertices().filter(|&w| w != u).collect();
    let mut counter = SubsetCounter::new(ground.len(), None);
    let mut targets = Vec::with_capacity(ground.len());
    loop {
        targets.clear();
        targets.extend(counter.select(&ground));
        if drops_v(&mut indeg, &targets) {
            return true;
        }
        if !counter.advance() {
            return false;
        }
    }
}

/// Number of forward edges each vertex loses in the edge-deletion variant:
/// `floor((n - 2) / (k - 1))`.
pub fn deletion_radius(n: usize, k: usize) -> Result<usize, MechanismError> {
    if k < 2 || k > n {
        return Err(MechanismError::BudgetOutOfRange { k, n });
    }
    Ok((n - 2) / (k - 1))
}

/// `G` without every edge `(u, v)` with `u < v <= u + r`.
pub fn deletion_graph(g: &Digraph, k: usize) -> Result<Digraph, MechanismError> {
    let r = deletion_radius(g.n(), k)?;
    Ok(g.retain_edges(|u, v| !(u < v && v <= u + r)))
}

/// Asymmetric plurality with runners-up and edge deletion: [`apwru`] applied
/// to [`deletion_graph`]. Selects at most `k` vertices.
pub fn apwru_deletion(g: &Digraph, k: usize) -> Result<Selection, MechanismError> {
    let reduced = deletion_graph(g, k)?;
    Ok(nonempty(apwru(&reduced), "apwru-deletion"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphClassSpec;

    fn graph(n: usize, edges: &[(Vertex, Vertex)]) -> Digraph {
        Digraph::from_edges(n, edges.iter().copied()).unwrap()
    }

    fn sel(vs: &[Vertex]) -> Selection {
        Selection::new(vs.iter().copied())
    }

    fn cycle3() -> Digraph {
        graph(3, &[(1, 2), (2, 3), (3, 1)])
    }

    /// Literal reading of the definition: build `G_v` and ask for its top.
    fn apwru_by_construction(g: &Digraph) -> Selection {
        g.vertices()
            .filter(|&v| g.without_out_edges(v).unwrap().top() == v)
            .collect()
    }

    /// Literal reading of the pivotal rule over materialized deviations.
    fn pivotal_by_construction(g: &Digraph) -> Selection {
        let base = apwru_by_construction(g);
        base.iter()
            .filter(|&u| {
                base.iter().filter(|&v| v != u).all(|v| {
                    g.deviation_neighborhood(u)
                        .unwrap()
                        .any(|h| !apwru_by_construction(&h).contains(v))
                })
            })
            .collect()
    }

    #[test]
    fn pwru_examples() {
        assert_eq!(pwru(&cycle3()), Ok(sel(&[1, 2, 3])));
        assert_eq!(pwru(&graph(3, &[(2, 1), (3, 1)])), Ok(sel(&[1])));
        assert_eq!(pwru(&graph(3, &[(2, 1), (3, 1), (1, 2)])), Ok(sel(&[1, 2])));
        assert_eq!(pwru(&Digraph::empty(2).unwrap()), Ok(sel(&[1, 2])));
        assert_eq!(pwru(&Digraph::empty(1).unwrap()), Ok(sel(&[1])));
    }

    #[test]
    fn pwru_rejects_outdegree_two() {
        let g = graph(3, &[(1, 2), (2, 1), (2, 3)]);
        assert_eq!(
            pwru(&g),
            Err(MechanismError::OutdegreeTooLarge {
                vertex: 2,
                outdegree: 2
            })
        );
    }

    #[test]
    fn apwru_examples() {
        assert_eq!(apwru(&cycle3()), sel(&[2, 3]));
        assert_eq!(apwru(&graph(3, &[(1, 3), (2, 3), (3, 1)])), sel(&[3]));
        assert_eq!(apwru(&Digraph::empty(3).unwrap()), sel(&[3]));
        // K_1 for d = 2: complete on {1,2,3} minus vertex 1's out-edges.
        assert_eq!(
            apwru(&graph(3, &[(2, 1), (2, 3), (3, 1), (3, 2)])),
            sel(&[1, 2, 3])
        );
    }

    #[test]
    fn apwru_matches_literal_construction() {
        for spec in [
            GraphClassSpec::unbounded(3).unwrap(),
            GraphClassSpec::unbounded(4).unwrap(),
        ] {
            for g in spec.enumerate() {
                assert_eq!(apwru(&g), apwru_by_construction(&g), "{g}");
            }
        }
    }

    #[test]
    fn pivotal_examples() {
        assert_eq!(apwru_pivotal(&Digraph::complete(3).unwrap()), sel(&[3]));
        assert_eq!(apwru_pivotal(&Digraph::empty(1).unwrap()), sel(&[1]));
        // 3 cannot unseat 2: with 2's edge removed, 2 is the unique top of
        // every graph 3 can produce. 2 unseats 3 by dropping its edge.
        assert_eq!(apwru_pivotal(&cycle3()), sel(&[2]));
        assert_eq!(pivotal_by_construction(&cycle3()), sel(&[2]));
    }

    #[test]
    fn pivotal_search_strategies_agree_with_definition() {
        for n in 1..=4 {
            for g in GraphClassSpec::unbounded(n).unwrap().enumerate() {
                let fast = apwru_pivotal_with(&g, PivotSearch::CandidatesFirst);
                let full = apwru_pivotal_with(&g, PivotSearch::Exhaustive);
                assert_eq!(fast, full, "{g}");
                if n <= 3 {
                    assert_eq!(fast, pivotal_by_construction(&g), "{g}");
                }
            }
        }
    }

    #[test]
    fn deletion_examples() {
        let k4 = Digraph::complete(4).unwrap();
        assert_eq!(deletion_radius(4, 2), Ok(2));
        let reduced = deletion_graph(&k4, 2).unwrap();
        assert_eq!(reduced.indegrees(), &[3, 2, 1, 1]);
        assert_eq!(reduced.edge_count(), 12 - 5);
        assert_eq!(apwru_deletion(&k4, 2), Ok(sel(&[1, 2])));
        assert_eq!(deletion_radius(6, 2), Ok(4));
        assert_eq!(deletion_radius(6, 3), Ok(2));
    }

    #[test]
    fn deletion_with_full_budget_is_apwru() {
        for g in GraphClassSpec::unbounded(4).unwrap().enumerate() {
            assert_eq!(apwru_deletion(&g, 4), Ok(apwru(&g)));
        }
    }

    #[test]
    fn deletion_budget_errors() {
        let g = Digraph::complete(4).unwrap();
        assert_eq!(
            apwru_deletion(&g, 1),
            Err(MechanismError::BudgetOutOfRange { k: 1, n: 4 })
        );
        assert!(apwru_deletion(&g, 5).is_err());
    }

    #[test]
    fn run_dispatch() {
        assert_eq!(run(Mechanism::Apwru, &cycle3()), Ok(sel(&[2, 3])));
        assert_eq!(
            run(Mechanism::Pwru, &Digraph::empty(2).unwrap()),
            Ok(sel(&[1, 2]))
        );
        assert_eq!(
            run(
                Mechanism::ApwruDeletion { k: 2 },
                &Digraph::complete(4).unwrap()
            ),
            Ok(sel(&[1, 2]))
        );
        assert!(run(Mechanism::Pwru, &Digraph::complete(3).unwrap()).is_err());
    }

    #[test]
    fn mechanism_names_roundtrip() {
        for m in [
            Mechanism::Pwru,
            Mechanism::Apwru,
            Mechanism::ApwruPivotal,
            Mechanism::ApwruDeletion { k: 3 },
        ] {
            assert_eq!(Mechanism::from_name(m.name(), Some(3)), Ok(m));
        }
        assert!(Mechanism::from_name("apwru-deletion", None).is_err());
        assert!("plurality".parse::<Mechanism>().is_err());
        assert_eq!(
            serde_json::to_string(&Mechanism::ApwruDeletion { k: 2 }).unwrap(),
            r#"{"variant":"apwru-deletion","k":2}"#
        );
    }

    #[test]
    fn selection_is_canonical() {
        let s = Selection::new([3, 1, 3, 2]);
        assert_eq!(s.as_slice(), &[1, 2, 3]);
        assert!(s.contains(2) && !s.contains(4));
        assert_eq!(s.to_string(), "{1,2,3}");
        assert!(sel(&[1, 3]).is_subset(&s));
    }
}
