use impartial_core::mechanisms::deletion_radius;
use impartial_core::{
    additive_gap, apwru, apwru_deletion, apwru_pivotal, characterization_select, check_impartial,
    measure_additive, pwru, Aggregator, Digraph, GraphClassSpec, Mechanism, Rational, Vertex,
};
use proptest::prelude::*;

fn r(p: i64, q: i64) -> Rational {
    Rational::new(p, q)
}

fn classes(max_n: usize) -> Vec<GraphClassSpec> {
    let mut all = Vec::new();
    for n in 1..=max_n {
        all.push(GraphClassSpec::unbounded(n).unwrap());
        for d in 1..n.saturating_sub(1) {
            all.push(GraphClassSpec::bounded(n, d).unwrap());
        }
    }
    all
}

fn min_selected_indegree(g: &Digraph, selected: &[Vertex]) -> usize {
    selected
        .iter()
        .map(|&v| g.indegrees()[v - 1])
        .min()
        .unwrap()
}

#[test]
fn every_mechanism_is_impartial_up_to_four_vertices() {
    for spec in classes(4) {
        for mechanism in [Mechanism::Apwru, Mechanism::ApwruPivotal] {
            let report = check_impartial(mechanism, spec).unwrap();
            assert!(
                report.is_impartial(),
                "{mechanism} on {spec}: {:?}",
                report.impartiality_violations
            );
        }
        for k in 2..=spec.n() {
            let mechanism = Mechanism::ApwruDeletion { k };
            assert!(
                check_impartial(mechanism, spec).unwrap().is_impartial(),
                "{mechanism} on {spec}"
            );
        }
    }
}

#[test]
fn pwru_is_impartial_on_outdegree_one_up_to_five_vertices() {
    for n in 2..=5 {
        let spec = GraphClassSpec::bounded(n, 1).unwrap();
        let report = check_impartial(Mechanism::Pwru, spec).unwrap();
        assert!(report.is_impartial(), "{spec}");
        for g in spec.enumerate() {
            let selected = pwru(&g).unwrap();
            assert!(!selected.is_empty());
            assert!(min_selected_indegree(&g, selected.as_slice()) + 1 >= g.max_indegree());
        }
    }
}

#[test]
fn worst_min_gap_is_exactly_one() {
    for n in 2..=4 {
        let spec = GraphClassSpec::unbounded(n).unwrap();
        for mechanism in [Mechanism::Apwru, Mechanism::ApwruPivotal] {
            let report = measure_additive(mechanism, spec, Aggregator::Min).unwrap();
            assert_eq!(report.worst_gap, Some(r(1, 1)), "{mechanism} on {spec}");
        }
        let median = measure_additive(Mechanism::Apwru, spec, Aggregator::Median).unwrap();
        assert!(median.worst_gap.unwrap() <= r(1, 1));
    }
}

#[test]
fn mean_gap_and_size_bounds_on_bounded_classes() {
    for spec in classes(4) {
        let d = spec.effective_bound();
        let k = d as i64 + 1;
        let report = measure_additive(Mechanism::Apwru, spec, Aggregator::Mean).unwrap();
        assert!(report.worst_gap.unwrap() <= r(k - 1, k), "{spec}");
        assert!(report.max_selection_size <= d + 1, "{spec}");
    }
}

#[test]
fn pivotal_bounds_over_full_classes() {
    for n in 1..=4 {
        for g in GraphClassSpec::unbounded(n).unwrap().enumerate() {
            let p = apwru_pivotal(&g);
            assert!(!p.is_empty() && p.is_subset(&apwru(&g)), "{g}");
            assert!(p.len() <= n.saturating_sub(1).max(1), "{g}");
        }
    }
}

#[test]
fn deletion_bounds_over_full_classes() {
    for n in 2..=4 {
        for g in GraphClassSpec::unbounded(n).unwrap().enumerate() {
            for k in 2..=n {
                let selected = apwru_deletion(&g, k).unwrap();
                let radius = deletion_radius(n, k).unwrap();
                assert!(selected.len() <= k, "{g} k={k}");
                assert!(
                    min_selected_indegree(&g, selected.as_slice()) + radius + 1 >= g.max_indegree()
                );
            }
            assert_eq!(apwru_deletion(&g, n).unwrap(), apwru(&g));
        }
    }
}

fn arb_graph(max_n: usize) -> impl Strategy<Value = Digraph> {
    (2..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(proptest::bool::ANY, n * (n - 1)).prop_map(move |bits| {
            let mut it = bits.into_iter();
            let edges: Vec<(Vertex, Vertex)> = (1..=n)
                .flat_map(|u| (1..=n).filter(move |&v| v != u).map(move |v| (u, v)))
                .filter(|_| it.next().unwrap())
                .collect();
            Digraph::from_edges(n, edges).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn characterization_matches_on_random_graphs(g in arb_graph(9)) {
        prop_assert_eq!(characterization_select(&g), apwru(&g));
    }

    #[test]
    fn apwru_structure(g in arb_graph(9)) {
        let selected = apwru(&g);
        prop_assert!(selected.contains(g.top()));
        prop_assert!(selected.len() <= g.max_outdegree() + 1);
        prop_assert!(min_selected_indegree(&g, selected.as_slice()) + 1 >= g.max_indegree());
        let gap = additive_gap(&g, &selected, Aggregator::Min).unwrap();
        prop_assert!(gap >= r(0, 1) && gap <= r(1, 1));
    }

    #[test]
    fn deletion_structure(g in arb_graph(9), k_seed in 0usize..100) {
        let n = g.n();
        let k = 2 + k_seed % (n - 1);
        let selected = apwru_deletion(&g, k).unwrap();
        let radius = deletion_radius(n, k).unwrap();
        prop_assert!(!selected.is_empty() && selected.len() <= k);
        prop_assert!(min_selected_indegree(&g, selected.as_slice()) + radius + 1 >= g.max_indegree());
    }

    #[test]
    fn membership_survives_own_deviation(g in arb_graph(7), v_seed in 0usize..100, mask in 0u64..64) {
        let n = g.n();
        let v = 1 + v_seed % n;
        let others: Vec<Vertex> = (1..=n).filter(|&w| w != v).collect();
        let targets = others.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, &w)| w).collect();
        let h = g.with_out_neighbors(v, targets).unwrap();
        prop_assert_eq!(apwru(&g).contains(v), apwru(&h).contains(v));
        prop_assert_eq!(apwru_pivotal(&g).contains(v), apwru_pivotal(&h).contains(v));
        for k in 2..=n {
            prop_assert_eq!(
                apwru_deletion(&g, k).unwrap().contains(v),
                apwru_deletion(&h, k).unwrap().contains(v)
            );
        }
    }

    #[test]
    fn empty_selection_gap_is_max_indegree(g in arb_graph(7)) {
        let empty = impartial_core::Selection::empty();
        for sigma in Aggregator::ALL {
            prop_assert_eq!(additive_gap(&g, &empty, sigma).unwrap(), r(g.max_indegree() as i64, 1));
        }
    }
}
