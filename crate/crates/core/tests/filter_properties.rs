mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use tw_core::canon::CanonicalForm;
use tw_core::filters::{jump_pattern_ok, FilterSet, Stage};
use tw_core::rules::RuleId;
use tw_core::search::{evaluate_config, s2_configs};

const CASES: u32 = 10_000;

fn pair_rules() -> Vec<RuleId> {
    Stage::DEFAULT_ORDER.iter().flat_map(|s| s.rules().iter().copied()).collect()
}

fn order() -> impl Strategy<Value = Vec<Stage>> {
    Just(Stage::DEFAULT_ORDER.to_vec()).prop_shuffle()
}

fn rotate(v: &[usize], k: usize) -> Vec<usize> {
    let n = v.len();
    (0..n).map(|i| v[(i + k) % n]).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    #[test]
    fn jumping_invariant_under_rotation_and_reflection(
        v in (3usize..10).prop_flat_map(|n| Just((0..n).collect::<Vec<_>>()).prop_shuffle()),
        ku in 0usize..10,
        kv in 0usize..10,
    ) {
        let n = v.len();
        let ok = jump_pattern_ok(&v);
        // Rotating u's order relabels the u-indices.
        let u_rot: Vec<usize> = v.iter().map(|&x| (x + ku) % n).collect();
        prop_assert_eq!(jump_pattern_ok(&u_rot), ok);
        prop_assert_eq!(jump_pattern_ok(&rotate(&v, kv % n)), ok);
        let both: Vec<usize> = v.iter().rev().map(|&x| (n - x) % n).collect();
        prop_assert_eq!(jump_pattern_ok(&both), ok);
    }

    #[test]
    fn filter_order_does_not_change_survival(i in 0usize..100_000, ord in order()) {
        let pool = common::pool();
        let p = &pool[i % pool.len()];
        let default = FilterSet::default();
        let shuffled = FilterSet { order: ord, ..FilterSet::default() };
        prop_assert_eq!(default.first_failure(p).is_none(), shuffled.first_failure(p).is_none());
    }

    #[test]
    fn removing_filters_never_removes_survivors(
        i in 0usize..100_000,
        off in prop::sample::subsequence(pair_rules(), 0..=pair_rules().len()),
    ) {
        let pool = common::pool();
        let p = &pool[i % pool.len()];
        if FilterSet::default().first_failure(p).is_none() {
            prop_assert!(FilterSet::without(&off).first_failure(p).is_none());
        }
        // A failure under fewer filters is a failure under all of them.
        if FilterSet::without(&off).first_failure(p).is_some() {
            prop_assert!(FilterSet::default().first_failure(p).is_some());
        }
    }
}

fn survivors(filters: &FilterSet, configs: &[(tw_core::weights::WeightVector, tw_core::weights::WeightVector)]) -> BTreeSet<CanonicalForm> {
    let t = common::template();
    configs
        .iter()
        .flat_map(|(ws, wt)| evaluate_config(&t, ws, wt, filters, true).survivors)
        .map(|(f, _)| f)
        .collect()
}

#[test]
fn stage_orders_agree_on_search_slice() {
    let configs = s2_configs(&FilterSet::default()).unwrap();
    let slice: Vec<_> = configs.iter().step_by(7).cloned().chain(
        configs.iter().filter(|(ws, wt)| ws.x == [2, 2, 2, 2, 0] && wt.x == [3, 2, 2, 0, 0]).cloned(),
    ).collect();
    let base = survivors(&FilterSet::default(), &slice);
    assert!(!base.is_empty());
    let mut reversed = Stage::DEFAULT_ORDER.to_vec();
    reversed.reverse();
    for order in [reversed, vec![Stage::Jumping, Stage::Parity, Stage::SCycle, Stage::Bounds, Stage::DoubleParallel]] {
        let f = FilterSet { order, ..FilterSet::default() };
        assert_eq!(survivors(&f, &slice), base);
    }
}
