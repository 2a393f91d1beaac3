mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use splicekit::catalog::{fox_milnor_factor, FoxMilnor, IntPolynomial};
use splicekit::coherence::{decide_structure, Structure};
use splicekit::engine::{analyze_knot, replay, VerdictKind};
use splicekit::ops::{edge_cut, rejoin};
use splicekit::symmetry::reduce;
use splicekit::{
    compare, complexity, enumerate_norms, validate, validate_action, AmphichiralAction, CompanionshipGraph, Sign,
};
use std::cmp::Ordering;

use common::{random_knot, random_tree, same_graph};

fn tree() -> impl Strategy<Value = CompanionshipGraph> {
    (any::<u64>(), 1usize..=12).prop_map(|(seed, n)| random_tree(&mut ChaCha8Rng::seed_from_u64(seed), n))
}

fn knot() -> impl Strategy<Value = common::KnotInstance> {
    any::<u64>().prop_map(|seed| random_knot(&mut ChaCha8Rng::seed_from_u64(seed), 10))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn graph_json_round_trips(g in tree()) {
        let back = CompanionshipGraph::from_json(&g.to_json()).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn action_json_round_trips(k in knot()) {
        let back = AmphichiralAction::from_json(&k.action.to_json()).unwrap();
        prop_assert_eq!(back, k.action);
    }

    #[test]
    fn every_cut_rejoins_and_shrinks(g in tree()) {
        prop_assert!(validate(&g).is_valid());
        let whole = complexity(&g);
        for e in g.edge_ids() {
            let cut = edge_cut(&g, &e).unwrap();
            prop_assert_eq!(cut.side1.vertices.len() + cut.side2.vertices.len(), g.vertices.len());
            prop_assert_eq!(compare(&complexity(&cut.side1), &whole), Ordering::Less);
            prop_assert_eq!(compare(&complexity(&cut.side2), &whole), Ordering::Less);
            // both sides carry the cut edge as an external component
            prop_assert!(cut.side1.externals().contains_key(&e) && cut.side2.externals().contains_key(&e));
            let back = rejoin(&cut).unwrap();
            prop_assert!(same_graph(&g, &back).is_ok());
        }
    }

    #[test]
    fn fixed_edge_signs_multiply_to_minus_one(k in knot(), flip in any::<prop::sample::Index>()) {
        prop_assert!(validate_action(&k.graph, &k.action).is_valid());
        let fixed: Vec<String> = k.action.edge_signs.keys().cloned().collect();
        prop_assume!(!fixed.is_empty());
        let e = flip.get(&fixed).clone();
        let mut a = k.action.clone();
        let end = a.edge_signs[&e].keys().next().unwrap().clone();
        let s = a.edge_signs[&e][&end];
        a.edge_signs.get_mut(&e).unwrap().insert(end, s.flip());
        prop_assert!(!validate_action(&k.graph, &a).is_valid());
    }

    #[test]
    fn reduction_is_reduced_and_idempotent(k in knot()) {
        let r = reduce(&k.graph, &k.action).unwrap();
        prop_assert!(r.action.is_reduced(&k.graph));
        let again = reduce(&k.graph, &r.action).unwrap();
        prop_assert_eq!(again.exponent, 1);
        prop_assert_eq!(again.action, r.action);
    }

    #[test]
    fn knot_certificates_replay(k in knot()) {
        let (v, cert) = analyze_knot(&k.graph, &k.action).unwrap();
        prop_assert!(replay(&cert, &k.graph, &k.action).is_ok());
        let d = decide_structure(&k.graph, &k.action).unwrap();
        if d.structure == Structure::TotallyCoherent {
            prop_assert_eq!(v.kind, VerdictKind::StronglyNegAmphichiral);
        }
        if d.structure == Structure::ProperlyIncoherent {
            prop_assert!(v.kaw_bound <= 1);
        }
        // the certificate is deterministic
        let (_, again) = analyze_knot(&k.graph, &k.action).unwrap();
        prop_assert_eq!(again, cert);
    }

    #[test]
    fn positive_external_is_refused(k in knot()) {
        let a = k.action.clone().with_external("K", Sign::Plus);
        prop_assert!(analyze_knot(&k.graph, &a).is_err());
    }

    #[test]
    fn norms_are_sorted_and_bounded(atoms in prop::collection::vec(0.25f64..5.0, 1..4), bound in 0.0f64..8.0) {
        let v = enumerate_norms(&atoms, bound).unwrap();
        prop_assert_eq!(v[0], 0.0);
        prop_assert!(v.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(v.iter().all(|x| *x <= bound + 1e-9));
        for a in &atoms {
            if *a <= bound {
                prop_assert!(v.iter().any(|x| (x - a).abs() <= 1e-9));
            }
        }
    }

    #[test]
    fn products_with_the_conjugate_factor(c in prop::collection::vec(-4i64..=4, 1..6)) {
        let p = IntPolynomial::new(c).normalized();
        prop_assume!(!p.coeffs.is_empty());
        let delta = p.mul(&p.reversed());
        match fox_milnor_factor(&delta).unwrap() {
            FoxMilnor::Satisfiable { f } => prop_assert!(f.mul(&f.reversed()).same_up_to_units(&delta)),
            FoxMilnor::NotSatisfiable => prop_assert!(false, "{} rejected", delta),
        }
    }
}
