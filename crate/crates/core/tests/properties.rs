use std::collections::BTreeSet;

use epsem::calculus::Calculus;
use epsem::formula::{parse, Binding, Formula};
use epsem::ge_model::LogicVariant;
use epsem::search::{enumerate_models, ModelSpace, SearchBounds};
use epsem::truth_algebra::{complex_algebra, PreorderFrame};
use proptest::prelude::*;

fn formula(modal: bool) -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![Just(Formula::atom("p")), Just(Formula::atom("q"))];
    leaf.prop_recursive(4, 24, 2, move |inner| {
        let mut arms = vec![
            inner.clone().prop_map(Formula::neg).boxed(),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)).boxed(),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::arrow(a, b)).boxed(),
        ];
        if modal {
            arms.push(inner.prop_map(Formula::nec).boxed());
        }
        proptest::strategy::Union::new(arms)
    })
}

/// Reflexive transitive closure of an arbitrary relation on `n` worlds.
fn preorder() -> impl Strategy<Value = PreorderFrame> {
    (1usize..=4).prop_flat_map(|n| {
        proptest::collection::vec(0u32..(1 << n), n).prop_map(move |rel| {
            let mut succ: Vec<u32> = rel.iter().enumerate().map(|(w, &s)| s | (1 << w)).collect();
            for _ in 0..n {
                for u in 0..n {
                    for v in 0..n {
                        if succ[u] & (1 << v) != 0 {
                            succ[u] |= succ[v];
                        }
                    }
                }
            }
            PreorderFrame::new(succ).unwrap()
        })
    })
}

fn small_bounds() -> SearchBounds {
    SearchBounds {
        max_worlds: 2,
        max_topics: 3,
        ..SearchBounds::default()
    }
}

proptest! {
    #[test]
    fn printing_round_trips(f in formula(true)) {
        prop_assert_eq!(parse(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn schema_matching_inverts_substitution(a in formula(true), b in formula(true), idx in 0usize..64) {
        let calc = Calculus::for_variant(LogicVariant::Pai);
        let schema = &calc.schemata[idx % calc.schemata.len()].formula;
        let binding: Binding = schema
            .metavariables()
            .into_iter()
            .zip([a, b].into_iter().cycle())
            .collect();
        let instance = schema.substitute(&binding).unwrap();
        let found = instance.match_schema(schema).expect("instance matches its schema");
        prop_assert_eq!(schema.substitute(&found).unwrap(), instance);
    }

    #[test]
    fn complex_box_is_an_interior_operator(frame in preorder(), s in 0u32..16, t in 0u32..16) {
        let alg = complex_algebra(&frame).unwrap();
        let mask = frame.all_worlds();
        let (s, t) = ((s & mask) as u8, (t & mask) as u8);
        prop_assert!(alg.leq(alg.nec(s), s));
        prop_assert_eq!(alg.nec(alg.nec(s)), alg.nec(s));
        prop_assert_eq!(alg.nec(alg.meet(s, t)), alg.meet(alg.nec(s), alg.nec(t)));
        prop_assert_eq!(alg.nec(alg.one()), alg.one());
    }

    #[test]
    fn schema_instances_hold_in_sampled_models(
        a in formula(true),
        b in formula(true),
        idx in 0usize..64,
        pick in any::<u64>(),
        vi in 0usize..3,
    ) {
        let variant = [LogicVariant::Pai0, LogicVariant::Pai, LogicVariant::LPai][vi];
        let calc = Calculus::for_variant(variant);
        let schema = &calc.schemata[idx % calc.schemata.len()];
        let binding: Binding = schema
            .formula
            .metavariables()
            .into_iter()
            .zip([a, b].into_iter().cycle())
            .collect();
        let instance = schema.formula.substitute(&binding).unwrap();
        let space = ModelSpace::new(variant, &["p".to_string(), "q".to_string()], &small_bounds()).unwrap();
        let index = pick % space.model_count() as u64;
        let m = space.model_at(index).unwrap();
        prop_assert!(m.consequence(&[], &instance).unwrap(), "{} fails at model {}", schema.name, index);
    }

    #[test]
    fn truth_value_is_the_first_component(f in formula(true), pick in any::<u64>()) {
        let space = ModelSpace::new(LogicVariant::Pai, &["p".to_string(), "q".to_string()], &small_bounds()).unwrap();
        let m = space.model_at(pick % space.model_count() as u64).unwrap();
        prop_assert_eq!(m.eval(&f).unwrap(), m.sem_value(&f).unwrap().truth);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn shards_cover_the_stream_once(k in 1usize..6) {
        let atoms: BTreeSet<String> = ["p".to_string()].into();
        let b = SearchBounds { max_worlds: 2, max_topics: 2, ..SearchBounds::default() };
        let all: Vec<u64> = enumerate_models(LogicVariant::Dai, &atoms, &b).unwrap().map(|(i, _)| i).collect();
        let mut merged: Vec<u64> = (0..k)
            .flat_map(|i| {
                let sb = SearchBounds { shard: Some((i, k)), ..b.clone() };
                enumerate_models(LogicVariant::Dai, &atoms, &sb).unwrap().map(|(i, _)| i).collect::<Vec<_>>()
            })
            .collect();
        merged.sort_unstable();
        prop_assert_eq!(merged, all);
    }
}
