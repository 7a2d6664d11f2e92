//! Constraint search behind [`verify_impossibility`](super::verify_impossibility).
//!
//! One variable per family graph. Its domain is every vertex set of size at
//! most `k` whose gap is within `alpha`, encoded as a bitmask (bit `v - 1`
//! for vertex `v`). A link `(a, b, v)` requires bit `v - 1` to agree.

use serde::Serialize;

use super::{Assignment, GadgetError, ImpossibilityOutcome, ImpossibilityQuery};
use crate::graph::{Digraph, Vertex};
use crate::mechanisms::Selection;
use crate::ratio::Rational;
use crate::verify::{additive_gap, aggregate, Aggregator};

/// Bitmask domains are built by enumerating subsets, so keep `n` modest.
const MAX_SEARCH_VERTICES: usize = 20;
const MAX_EXHAUSTIVE_STATES: u128 = 1 << 24;
const TRACE_LIMIT: usize = 10_000;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub graphs: usize,
    pub links: usize,
    /// Candidate selections per graph before any propagation.
    pub initial_domain_sizes: Vec<usize>,
    pub nodes: u64,
    pub wipeouts: u64,
    pub backtracks: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "event", rename_all = "lowercase")]
pub enum TraceEvent {
    /// The search tried `selection` for `graph` at the given depth.
    Assign {
        depth: usize,
        graph: usize,
        selection: Selection,
    },
    /// Propagating the last assignment left `graph` without candidates.
    Wipeout { depth: usize, graph: usize },
    /// Every candidate for `graph` failed.
    Exhausted { depth: usize, graph: usize },
}

/// Record of a search that found no assignment. Events are kept up to a
/// fixed limit; `truncated` marks a cut-off log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchTrace {
    pub stats: SearchStats,
    pub events: Vec<TraceEvent>,
    pub truncated: bool,
}

fn mask_to_selection(mask: u64) -> Selection {
    (0..64)
        .filter(|i| mask & (1 << i) != 0)
        .map(|i| i as Vertex + 1)
        .collect()
}

fn domain(g: &Digraph, sigma: Aggregator, alpha: Rational, k: usize) -> Vec<u64> {
    let delta = Rational::from_integer(g.max_indegree() as i64);
    let indeg = g.indegrees();
    // Under MIN any vertex below delta - alpha sinks the whole selection.
    let ground: Vec<Vertex> = g
        .vertices()
        .filter(|&v| {
            sigma != Aggregator::Min || Rational::from_integer(indeg[v - 1] as i64) >= delta - alpha
        })
        .collect();
    let mut values: Vec<(Rational, Selection, u64)> = Vec::new();
    for sub in 0u64..(1 << ground.len()) {
        if sub.count_ones() as usize > k {
            continue;
        }
        let chosen: Vec<Vertex> = (0..ground.len())
            .filter(|i| sub & (1 << i) != 0)
            .map(|i| ground[i])
            .collect();
        let degrees: Vec<usize> = chosen.iter().map(|&v| indeg[v - 1]).collect();
        let gap = delta - aggregate(&degrees, sigma);
        if gap <= alpha {
            let mask = chosen.iter().fold(0u64, |m, &v| m | 1 << (v - 1));
            values.push((gap, Selection::new(chosen), mask));
        }
    }
    // Best aggregate first; ties in selection order, for a fixed search.
    values.sort();
    values.into_iter().map(|(_, _, mask)| mask).collect()
}

struct Search {
    neighbors: Vec<Vec<(usize, u64)>>,
    assigned: Vec<bool>,
    stats: SearchStats,
    events: Vec<TraceEvent>,
    truncated: bool,
}

impl Search {
    fn log(&mut self, event: TraceEvent) {
        if self.events.len() < TRACE_LIMIT {
            self.events.push(event);
        } else {
            self.truncated = true;
        }
    }

    fn solve(&mut self, domains: Vec<Vec<u64>>, depth: usize) -> Option<Vec<u64>> {
        let next = (0..domains.len())
            .filter(|&i| !self.assigned[i])
            .min_by_key(|&i| (domains[i].len(), i));
        let Some(var) = next else {
            return Some(domains.iter().map(|d| d[0]).collect());
        };
        self.assigned[var] = true;
        for &value in &domains[var] {
            self.stats.nodes += 1;
            self.log(TraceEvent::Assign {
                depth,
                graph: var,
                selection: mask_to_selection(value),
            });
            let mut reduced = domains.clone();
            reduced[var] = vec![value];
            let mut wiped = None;
            for &(other, bit) in &self.neighbors[var] {
                if self.assigned[other] {
                    continue;
                }
                reduced[other].retain(|&x| x & bit == value & bit);
                if reduced[other].is_empty() {
                    wiped = Some(other);
                    break;
                }
            }
            if let Some(graph) = wiped {
                self.stats.wipeouts += 1;
                self.log(TraceEvent::Wipeout { depth, graph });
                continue;
            }
            if let Some(solution) = self.solve(reduced, depth + 1) {
                return Some(solution);
            }
        }
        self.assigned[var] = false;
        self.stats.backtracks += 1;
        self.log(TraceEvent::Exhausted { depth, graph: var });
        None
    }
}

pub(super) fn backtrack(query: &ImpossibilityQuery) -> Result<ImpossibilityOutcome, GadgetError> {
    let family = &query.family;
    if family.n() > MAX_SEARCH_VERTICES {
        return Err(GadgetError::TooLarge {
            n: family.n(),
            limit: MAX_SEARCH_VERTICES,
        });
    }
    let domains: Vec<Vec<u64>> = family
        .graphs()
        .iter()
        .map(|g| domain(&g.graph, query.objective, query.alpha, query.k))
        .collect();
    let mut neighbors = vec![Vec::new(); family.len()];
    for link in family.links() {
        let bit = 1u64 << (link.vertex - 1);
        neighbors[link.a].push((link.b, bit));
        neighbors[link.b].push((link.a, bit));
    }
    let mut search = Search {
        neighbors,
        assigned: vec![false; family.len()],
        stats: SearchStats {
            graphs: family.len(),
            links: family.links().len(),
            initial_domain_sizes: domains.iter().map(Vec::len).collect(),
            ..SearchStats::default()
        },
        events: Vec::new(),
        truncated: false,
    };
    if let Some(graph) = domains.iter().position(Vec::is_empty) {
        search.stats.wipeouts += 1;
        search.log(TraceEvent::Wipeout { depth: 0, graph });
    } else if let Some(masks) = search.solve(domains, 0) {
        return Ok(ImpossibilityOutcome::Sat {
            assignment: Assignment::new(masks.into_iter().map(mask_to_selection).collect()),
            stats: search.stats,
        });
    }
    Ok(ImpossibilityOutcome::Unsat {
        trace: SearchTrace {
            stats: search.stats,
            events: search.events,
            truncated: search.truncated,
        },
    })
}

/// Unpruned reference: walks every assignment of vertex sets of size at most
/// `k` in odometer order and returns the first that meets all constraints.
/// Meant for families of a few graphs on a few vertices.
pub fn exhaustive_search(query: &ImpossibilityQuery) -> Result<Option<Assignment>, GadgetError> {
    query.check()?;
    let family = &query.family;
    let n = family.n();
    let too_large = GadgetError::TooLarge {
        n,
        limit: MAX_SEARCH_VERTICES,
    };
    if n > MAX_SEARCH_VERTICES {
        return Err(too_large);
    }
    let subsets: Vec<Selection> = (0u64..1 << n)
        .filter(|m| m.count_ones() as usize <= query.k)
        .map(mask_to_selection)
        .collect();
    let states = (subsets.len() as u128).checked_pow(family.len() as u32);
    if states.is_none_or(|s| s > MAX_EXHAUSTIVE_STATES) {
        return Err(too_large);
    }
    // within[g][s]: subset s meets the threshold on graph g.
    let within: Vec<Vec<bool>> = family
        .graphs()
        .iter()
        .map(|g| {
            subsets
                .iter()
                .map(|s| {
                    additive_gap(&g.graph, s, query.objective).is_ok_and(|gap| gap <= query.alpha)
                })
                .collect()
        })
        .collect();
    let mut digits = vec![0usize; family.len()];
    loop {
        let feasible = digits.iter().enumerate().all(|(g, &s)| within[g][s])
            && family.links().iter().all(|l| {
                subsets[digits[l.a]].contains(l.vertex) == subsets[digits[l.b]].contains(l.vertex)
            });
        if feasible {
            let selections = digits.iter().map(|&s| subsets[s].clone()).collect();
            return Ok(Some(Assignment::new(selections)));
        }
        let mut i = 0;
        loop {
            if i == digits.len() {
                return Ok(None);
            }
            digits[i] += 1;
            if digits[i] < subsets.len() {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}
