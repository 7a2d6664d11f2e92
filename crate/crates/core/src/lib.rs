//! Impartial selection of vertices in nomination digraphs.
//!
//! A selection mechanism maps a loop-free digraph on `1..=n` to a set of its
//! vertices. It is *impartial* when no vertex can change its own membership
//! by changing its outgoing edges. This crate provides:
//!
//! * [`graph`]: the [`Digraph`] type, tie-breaking keys, deviation
//!   neighborhoods and exhaustive enumeration of `G_n` / `G_n(d)`;
//! * [`mechanisms`]: plurality with runners-up and its asymmetric, pivotal and
//!   edge-deletion variants;
//! * [`verify`]: an independent characterization oracle, exact additive-gap
//!   measurement and impartiality sweeps over whole graph classes;
//! * [`gadgets`]: the graph families behind the lower bounds, with a
//!   backtracking search that confirms no impartial mechanism beats them;
//! * [`sample`]: seeded uniform sampling from classes too large to enumerate.

pub mod gadgets;
pub mod graph;
pub mod mechanisms;
pub mod ratio;
pub mod sample;
pub mod verify;

pub use gadgets::{
    build_cycle_family, build_k_family, build_two_path_family, build_two_path_orbit,
    exhaustive_search, verify_impossibility, Assignment, GadgetError, GadgetFamily,
    ImpossibilityOutcome, ImpossibilityQuery,
};
pub use graph::{enumerate_class, Digraph, GraphClassSpec, GraphError, LexKey, Vertex};
pub use mechanisms::{
    apwru, apwru_deletion, apwru_pivotal, pwru, run, Mechanism, MechanismError, Selection,
    SelectionRule,
};
pub use ratio::{parse_rational, Rational};
pub use sample::sample_class;
pub use verify::{
    additive_gap, aggregate, characterization_select, check_impartial, deletion_tightness_witness,
    measure_additive, strata, sweep, verify_class, Aggregator, SelectionStrata, SweepConfig,
    VerificationReport, VerifyError, Violation,
};
