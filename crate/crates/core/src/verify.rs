//! Exhaustive verification: an independent oracle for [`apwru`], exact
//! additive gaps, and impartiality sweeps over whole graph classes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Digraph, GraphClassSpec, GraphError, Vertex};
use crate::mechanisms::{
    apwru, apwru_deletion, deletion_radius, Mechanism, MechanismError, Selection, SelectionRule,
};
use crate::ratio::{serde_rational_opt, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{mechanism} is not defined on every graph of {class}: {reason}")]
    OutsideDomain {
        mechanism: Mechanism,
        class: String,
        reason: &'static str,
    },
    #[error("selected vertex {vertex} is not a vertex of a graph with {n} vertices")]
    SelectionOutOfRange { vertex: Vertex, n: usize },
}

/// How the indegrees of a selection are summarized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregator {
    Min,
    Median,
    Mean,
}

impl Aggregator {
    pub const ALL: [Aggregator; 3] = [Aggregator::Min, Aggregator::Median, Aggregator::Mean];

    pub fn name(&self) -> &'static str {
        match self {
            Aggregator::Min => "min",
            Aggregator::Median => "median",
            Aggregator::Mean => "mean",
        }
    }
}

impl fmt::Display for Aggregator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Aggregator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "min" => Ok(Aggregator::Min),
            "median" => Ok(Aggregator::Median),
            "mean" => Ok(Aggregator::Mean),
            other => Err(format!(
                "unknown objective `{other}` (expected min, median or mean)"
            )),
        }
    }
}

/// Exact value of `sigma` on a multiset; `0` on the empty multiset. The
/// median of an even-sized multiset is the midpoint of the two middle values.
pub fn aggregate(values: &[usize], sigma: Aggregator) -> Rational {
    if values.is_empty() {
        return Rational::from_integer(0);
    }
    let int = |x: usize| Rational::from_integer(x as i64);
    match sigma {
        Aggregator::Min => int(*values.iter().min().expect("nonempty")),
        Aggregator::Mean => {
            let total: usize = values.iter().sum();
            Rational::new(total as i64, values.len() as i64)
        }
        Aggregator::Median => {
            let mut sorted = values.to_vec();
            sorted.sort_unstable();
            let mid = sorted.len() / 2;
            if sorted.len() % 2 == 1 {
                int(sorted[mid])
            } else {
                (int(sorted[mid - 1]) + int(sorted[mid])) / 2
            }
        }
    }
}

/// `Delta(G) - sigma(indegrees of the selection)`, exactly.
pub fn additive_gap(
    g: &Digraph,
    selection: &Selection,
    sigma: Aggregator,
) -> Result<Rational, VerifyError> {
    let indeg: Vec<usize> = selection
        .iter()
        .map(|v| {
            g.indegree(v).map_err(|_| VerifyError::SelectionOutOfRange {
                vertex: v,
                n: g.n(),
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(Rational::from_integer(g.max_indegree() as i64) - aggregate(&indeg, sigma))
}

/// The set selected by asymmetric plurality with runners-up, computed from
/// its structural characterization rather than from the graphs `G_v`.
///
/// `v` qualifies iff
/// (a) `v` has an edge to every `w` with `(indeg(w), w) > (indeg(v), v)`, and
/// (b) `indeg(v) = Delta`, or `indeg(v) = Delta - 1` and `v` exceeds every
///     vertex of indegree `Delta`.
pub fn characterization_select(g: &Digraph) -> Selection {
    let delta = g.max_indegree();
    let max_vertices: Vec<Vertex> = g
        .vertices()
        .filter(|&w| g.lex_key(w).indegree == delta)
        .collect();
    g.vertices()
        .filter(|&v| {
            let key = g.lex_key(v);
            let dominated_are_hit = g
                .vertices()
                .filter(|&w| g.lex_key(w) > key)
                .all(|w| g.has_edge(v, w));
            let degree_ok = key.indegree == delta
                || (key.indegree + 1 == delta && max_vertices.iter().all(|&w| v > w));
            dominated_are_hit && degree_ok
        })
        .collect()
}

/// [`apwru`]'s selection split by indegree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SelectionStrata {
    /// Selected vertices of maximum indegree.
    pub s0: Selection,
    /// Selected vertices one below the maximum indegree.
    pub s1: Selection,
    /// Tie-breaking maximum of the selection, equal to `top(G)`.
    pub v_high: Vertex,
    /// Tie-breaking minimum of the selection.
    pub v_low: Vertex,
}

pub fn strata(g: &Digraph) -> SelectionStrata {
    let selected = apwru(g);
    let delta = g.max_indegree();
    let indeg = |v: Vertex| g.lex_key(v).indegree;
    let s0 = selected.iter().filter(|&v| indeg(v) == delta).collect();
    let s1 = selected.iter().filter(|&v| indeg(v) + 1 == delta).collect();
    let v_high = selected
        .iter()
        .max_by_key(|&v| g.lex_key(v))
        .expect("apwru is nonempty");
    let v_low = selected
        .iter()
        .min_by_key(|&v| g.lex_key(v))
        .expect("apwru is nonempty");
    SelectionStrata {
        s0,
        s1,
        v_high,
        v_low,
    }
}

/// A vertex whose membership differs between a graph and one of its
/// deviations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub graph: Digraph,
    pub vertex: Vertex,
    pub deviation: Digraph,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub graphs_checked: u64,
    /// Mechanism evaluations on deviation graphs (0 when impartiality was
    /// not checked).
    pub deviations_checked: u64,
    pub impartiality_violations: Vec<Violation>,
    pub objective: Option<Aggregator>,
    #[serde(with = "serde_rational_opt")]
    pub worst_gap: Option<Rational>,
    /// First graph, in sweep order, attaining `worst_gap`.
    pub worst_gap_witness: Option<Digraph>,
    pub max_selection_size: usize,
    pub min_selection_size: usize,
}

impl VerificationReport {
    pub fn is_impartial(&self) -> bool {
        self.impartiality_violations.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }
}

/// What a [`sweep`] measures on each graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SweepConfig {
    /// Check membership invariance over deviation neighborhoods.
    pub impartiality: bool,
    /// Restrict deviations to out-neighborhoods of at most this size.
    pub deviation_bound: Option<usize>,
    /// Track the worst additive gap under this aggregator.
    pub objective: Option<Aggregator>,
}

/// Folds `rule` over `graphs` in order. The fold is sequential, so the report
/// (violation order and gap witness included) depends only on the input
/// order.
pub fn sweep<R, I>(
    rule: &R,
    graphs: I,
    config: SweepConfig,
) -> Result<VerificationReport, VerifyError>
where
    R: SelectionRule + ?Sized,
    I: IntoIterator<Item = Digraph>,
{
    let mut report = VerificationReport {
        graphs_checked: 0,
        deviations_checked: 0,
        impartiality_violations: Vec::new(),
        objective: config.objective,
        worst_gap: None,
        worst_gap_witness: None,
        max_selection_size: 0,
        min_selection_size: usize::MAX,
    };
    for g in graphs {
        let selected = rule.select(&g)?;
        report.graphs_checked += 1;
        report.max_selection_size = report.max_selection_size.max(selected.len());
        report.min_selection_size = report.min_selection_size.min(selected.len());

        if let Some(sigma) = config.objective {
            let gap = additive_gap(&g, &selected, sigma)?;
            if report.worst_gap.is_none_or(|w| gap > w) {
                report.worst_gap = Some(gap);
                report.worst_gap_witness = Some(g.clone());
            }
        }

        if config.impartiality {
            for v in g.vertices() {
                let deviations = match config.deviation_bound {
                    Some(d) if d < g.n() - 1 => g.restricted_deviation_neighborhood(v, d)?,
                    _ => g.deviation_neighborhood(v)?,
                };
                for h in deviations {
                    report.deviations_checked += 1;
                    if rule.select(&h)?.contains(v) != selected.contains(v) {
                        report.impartiality_violations.push(Violation {
                            graph: g.clone(),
                            vertex: v,
                            deviation: h,
                        });
                    }
                }
            }
        }
    }
    if report.graphs_checked == 0 {
        report.min_selection_size = 0;
    }
    Ok(report)
}

/// Rejects mechanism/class pairs where the mechanism is undefined on part of
/// the class.
pub fn check_domain(mechanism: Mechanism, spec: GraphClassSpec) -> Result<(), VerifyError> {
    let outside = |reason| VerifyError::OutsideDomain {
        mechanism,
        class: spec.to_string(),
        reason,
    };
    match mechanism {
        Mechanism::Pwru if spec.effective_bound() > 1 => Err(outside(
            "plurality with runners-up needs maximum outdegree 1",
        )),
        Mechanism::ApwruDeletion { k } => deletion_radius(spec.n(), k)
            .map(|_| ())
            .map_err(|_| outside("the budget k must lie in 2..=n")),
        _ => Ok(()),
    }
}

fn class_config(
    spec: GraphClassSpec,
    objective: Option<Aggregator>,
    impartiality: bool,
) -> SweepConfig {
    SweepConfig {
        impartiality,
        deviation_bound: spec.d(),
        objective,
    }
}

/// Checks impartiality of `mechanism` on every graph of the class, with
/// deviations kept inside the class.
pub fn check_impartial(
    mechanism: Mechanism,
    spec: GraphClassSpec,
) -> Result<VerificationReport, VerifyError> {
    check_domain(mechanism, spec)?;
    sweep(&mechanism, spec.enumerate(), class_config(spec, None, true))
}

/// Worst additive gap of `mechanism` over the class under `sigma`.
pub fn measure_additive(
    mechanism: Mechanism,
    spec: GraphClassSpec,
    sigma: Aggregator,
) -> Result<VerificationReport, VerifyError> {
    check_domain(mechanism, spec)?;
    sweep(
        &mechanism,
        spec.enumerate(),
        class_config(spec, Some(sigma), false),
    )
}

/// Impartiality and worst gap in a single pass.
pub fn verify_class(
    mechanism: Mechanism,
    spec: GraphClassSpec,
    sigma: Aggregator,
) -> Result<VerificationReport, VerifyError> {
    check_domain(mechanism, spec)?;
    sweep(
        &mechanism,
        spec.enumerate(),
        class_config(spec, Some(sigma), true),
    )
}

/// Searches for a graph on which the edge-deletion variant's min-gap equals
/// its upper bound `r + 1`.
///
/// The search space is in-stars: graphs whose edges all point at a single
/// vertex `t`. A deleted in-edge of `t` lowers its indegree in the reduced
/// graph, which lets a low-indegree vertex above `t` that points at `t` be
/// selected. Stars are tried by `t`, then by in-neighborhood in increasing
/// binary order; the first tight graph is returned.
pub fn deletion_tightness_witness(n: usize, k: usize) -> Result<Option<Digraph>, VerifyError> {
    let r = deletion_radius(n, k)?;
    let target = Rational::from_integer(r as i64 + 1);
    for t in 1..=n {
        let base = Digraph::empty(n)?;
        // Only t's in-edges vary: enumerate them as deviations of t in the
        // reversed sense by building each star directly.
        let sources: Vec<Vertex> = (1..=n).filter(|&u| u != t).collect();
        for mask in 0u64..(1u64 << sources.len()) {
            let edges = sources
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &u)| (u, t));
            let g = Digraph::from_edges(base.n(), edges)?;
            let selected = apwru_deletion(&g, k)?;
            if additive_gap(&g, &selected, Aggregator::Min)? == target {
                return Ok(Some(g));
            }
        }
    }
    Ok(None)
}
