mod support;

use proptest::prelude::*;

fn check(result: support::Check) -> Result<(), TestCaseError> {
    result.map_err(TestCaseError::fail)
}

#[test]
fn basis_sizes_match_recursive_count() {
    support::basis_sizes().unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn dual_rail_preserves_overlaps(seed: u64) { check(support::dual_rail_preserves_overlaps(seed))?; }

    #[test]
    fn dual_rail_round_trip(seed: u64) { check(support::dual_rail_round_trip(seed))?; }

    #[test]
    fn ryser_matches_naive(seed: u64) { check(support::ryser_matches_naive(seed))?; }

    #[test]
    fn permanent_symmetries(seed: u64) { check(support::permanent_symmetries(seed))?; }

    #[test]
    fn lift_is_unitary(seed: u64) { check(support::lift_is_unitary(seed))?; }

    #[test]
    fn lift_is_a_homomorphism(seed: u64) { check(support::lift_is_a_homomorphism(seed))?; }

    #[test]
    fn single_photon_sector_is_u(seed: u64) { check(support::single_photon_sector_is_u(seed))?; }

    #[test]
    fn forward_preserves_norm(seed: u64) { check(support::forward_preserves_norm(seed))?; }

    #[test]
    fn cost_bounds_and_phase_invariance(seed: u64) { check(support::cost_bounds_and_phase_invariance(seed))?; }

    #[test]
    fn kerr_inverse(seed: u64) { check(support::kerr_inverse(seed))?; }

    #[test]
    fn linear_layers_compose(seed: u64) { check(support::linear_layers_compose(seed))?; }

    #[test]
    fn evolution_composes(seed: u64) { check(support::evolution_composes(seed))?; }

    #[test]
    fn energy_is_conserved(seed: u64) { check(support::energy_is_conserved(seed))?; }

    #[test]
    fn bose_hubbard_structure(seed: u64) { check(support::bose_hubbard_structure(seed))?; }

    #[test]
    fn local_search_never_worsens(seed: u64) { check(support::local_search_never_worsens(seed))?; }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn autoencoder_cost_in_unit_interval(seed: u64) { check(support::autoencoder_cost_in_unit_interval(seed))?; }
}
