use std::sync::Arc;

use mcfinite::du::{du_submatrix, WitnessSet};
use mcfinite::prs::{catalog, DetectConfig, Evaluator};
use mcfinite::structures::{
    closed_form_density, density, parse_graph, EnumConfig, PropertySpec, RelStructure, Vocabulary,
};
use num_bigint::BigUint;
use proptest::prelude::*;

const PROPERTIES: [&str; 10] = [
    "connected",
    "max-degree:2",
    "forbid-sub:K3",
    "forbid-ind:P3",
    "cycles",
    "cycles-exactly:2",
    "cycles-restricted:even",
    "two-equal-cliques",
    "and(connected,max-degree:2)",
    "all",
];

fn arb_graph(max_n: usize) -> impl Strategy<Value = RelStructure> {
    (0..=max_n).prop_flat_map(|n| {
        let pairs = n * n.saturating_sub(1) / 2;
        prop::collection::vec(any::<bool>(), pairs).prop_map(move |bits| {
            let mut edges = Vec::new();
            let mut k = 0;
            for a in 1..=n {
                for b in a + 1..=n {
                    if bits[k] {
                        edges.push((a, b));
                    }
                    k += 1;
                }
            }
            RelStructure::graph(n, &edges).unwrap()
        })
    })
}

fn arb_perm(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((1..=n).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #[test]
    fn properties_are_isomorphism_invariant(
        (g, perm) in arb_graph(7).prop_flat_map(|g| { let n = g.n(); (Just(g), arb_perm(n)) }),
        which in 0..PROPERTIES.len(),
    ) {
        let p = PropertySpec::parse(PROPERTIES[which]).unwrap();
        prop_assert_eq!(p.holds(&g).unwrap(), p.holds(&g.permuted(&perm)).unwrap());
        prop_assert_eq!(g.gaifman().degrees().iter().sum::<usize>(), 2 * g.edges(0).len());
    }

    #[test]
    fn forbidding_a_connected_graph_commutes_with_unions(a in arb_graph(5), b in arb_graph(5)) {
        // A connected forbidden subgraph must sit inside one side of a union.
        let p = PropertySpec::parse("forbid-sub:K3").unwrap();
        let u = a.disjoint_union(&b).unwrap();
        prop_assert_eq!(p.holds(&u).unwrap(), p.holds(&a).unwrap() && p.holds(&b).unwrap());
        let c = PropertySpec::parse("connected").unwrap();
        if a.n() > 0 && b.n() > 0 {
            prop_assert!(!c.holds(&u).unwrap());
        }
    }

    #[test]
    fn literals_round_trip(g in arb_graph(8)) {
        prop_assert_eq!(parse_graph(&g.to_string()).unwrap(), g);
    }
}

#[test]
fn matching_counts_follow_the_involution_recurrence() {
    // max-degree:1 graphs are matchings, counted by the involution numbers.
    let spec = PropertySpec::parse("max-degree:1").unwrap();
    let ev = Evaluator::new(catalog::telephone(), DetectConfig::default());
    for n in 1..=60usize {
        let closed = closed_form_density(&spec, n).unwrap();
        for m in [2u64, 3, 7, 10, 12] {
            let want = ev.eval_mod(m, &BigUint::from(n)).unwrap().value();
            assert_eq!((&closed % m).try_into(), Ok(want), "n={n} m={m}");
        }
        if n <= 8 {
            assert_eq!(density(&spec, n, EnumConfig::default()).unwrap(), closed);
        }
    }
}

#[test]
fn closed_forms_match_enumeration() {
    for p in ["all", "cycles", "cycles-exactly:1", "max-degree:0", "max-degree:1"] {
        let spec = PropertySpec::parse(p).unwrap();
        for n in 0..=6 {
            assert_eq!(
                closed_form_density(&spec, n),
                Some(density(&spec, n, EnumConfig::default()).unwrap()),
                "{p} n={n}"
            );
        }
    }
}

#[test]
fn two_equal_cliques_rank_grows_with_the_witness_set() {
    let p = PropertySpec::parse("two-equal-cliques").unwrap();
    for s in 1..=5 {
        let items = (1..=s).map(RelStructure::complete).collect();
        let w = WitnessSet::new(Arc::new(Vocabulary::graph()), items).unwrap();
        assert_eq!(du_submatrix(&p, &w, 1).unwrap().rank(), s);
    }
}
