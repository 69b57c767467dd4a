mod common;

use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn sampling_only_lowers_the_bias(case in common::instance_strategy()) {
        common::sampling_is_monotone(case)?;
    }

    #[test]
    fn unit_rescaling_keeps_active_sets(case in common::instance_strategy()) {
        common::normalization_preserves_active_sets(case)?;
    }

    #[test]
    fn small_frame_moves_stay_rectifying(case in common::instance_strategy()) {
        common::perturbation_is_sound(case)?;
    }

    #[test]
    fn scaling_domain_and_bias_together(case in common::instance_strategy()) {
        common::scaling_is_consistent(case)?;
    }

    #[test]
    fn facets_describe_the_hull(case in common::instance_strategy()) {
        common::facets_support_hull(case)?;
    }
}
