use ghz_core::additive::{mixed_sumset, GroupSet};
use ghz_core::extract::{graph_of, sample_w, ParityConstraintSystem};
use ghz_core::game::{make_strategy, StrategyFamily};
use ghz_core::io::{from_json, to_json, CrossFnFile, CrossTripleFile, GroupSetFile, StrategyFile};
use ghz_core::z4::{from_cross, to_cross_triple, CrossFn};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn strategy_files_round_trip(n in 1usize..=10, seed in any::<u64>()) {
        let st = make_strategy(&StrategyFamily::Random(seed), n).unwrap();
        let text = to_json(&StrategyFile::from_triple(&st)).unwrap();
        let back: StrategyFile = from_json(&text).unwrap();
        prop_assert_eq!(to_json(&back).unwrap(), text);
        prop_assert_eq!(back.to_triple().unwrap(), st);
    }

    #[test]
    fn cross_files_round_trip(n in 1usize..=8, seed in any::<u64>()) {
        let st = make_strategy(&StrategyFamily::Random(seed), n).unwrap();
        let ct = to_cross_triple(&st);
        let text = to_json(&CrossTripleFile::from_triple(&ct)).unwrap();
        let back: CrossTripleFile = from_json(&text).unwrap();
        prop_assert_eq!(to_json(&back).unwrap(), text);
        let ct2 = back.to_triple().unwrap();
        prop_assert_eq!(from_cross(&ct2.f).unwrap(), st.f);

        let f = CrossFn::random(n, seed).unwrap();
        let one = to_json(&CrossFnFile::from_fn(&f)).unwrap();
        prop_assert_eq!(to_json(&from_json::<CrossFnFile>(&one).unwrap()).unwrap(), one);
    }

    #[test]
    fn group_set_files_round_trip(n in 1usize..=6, seed in any::<u64>(), take in 1usize..40) {
        let keys = graph_of(&CrossFn::random(n, seed).unwrap()).elems();
        let set = GroupSet::from_elems(n, keys.into_iter().take(take)).unwrap();
        let text = to_json(&GroupSetFile::from_set(&set)).unwrap();
        let back: GroupSetFile = from_json(&text).unwrap();
        prop_assert_eq!(to_json(&back).unwrap(), text);
        prop_assert_eq!(back.to_set().unwrap(), set);
    }

    #[test]
    fn constraint_system_json_round_trips(n in 1usize..=12, t in 1usize..=6, seed in any::<u64>()) {
        let w = sample_w(n, t, seed).unwrap();
        let text = to_json(&w).unwrap();
        let back: ParityConstraintSystem = from_json(&text).unwrap();
        prop_assert_eq!(to_json(&back).unwrap(), text);
        prop_assert_eq!(back, w);
    }
}

#[test]
fn w_is_closed_under_addition_and_negation() {
    for seed in 0..6u64 {
        let w = sample_w(3, 2, seed).unwrap();
        let m = w.members().unwrap();
        assert_eq!(mixed_sumset(&m, 1, 1).unwrap(), m);
        assert_eq!(m.negate(), m);
    }
}
