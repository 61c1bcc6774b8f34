//! Crate-level invariants: lossless serialization, banding partition,
//! validation determinism.

use epm_scenario::builtin::synthetic_corpus;
use epm_scenario::{
    fixtures, validate_scenario, BandingParams, DifficultyBand, QualityCriteria, Scenario,
};
use proptest::prelude::*;

#[test]
fn every_bundled_scenario_round_trips_losslessly() {
    let mut scenarios = synthetic_corpus();
    scenarios.push(fixtures::exemplar_scenario());
    for s in scenarios {
        let json = serde_json::to_string(&s).expect("serialize");
        let back: Scenario = serde_json::from_str(&json).expect("deserialize");
        assert_eq!(back, s, "{} did not survive the round trip", s.id);
    }
}

#[test]
fn validation_verdicts_are_stable_over_repeats() {
    let criteria = QualityCriteria::default();
    let good = fixtures::exemplar_scenario();
    let mut bad = fixtures::exemplar_scenario();
    bad.persona.story.development.clear();
    bad.domain_label = "unlisted".to_string();

    for scenario in [&good, &bad] {
        let first = validate_scenario(scenario, &criteria);
        for _ in 0..9 {
            assert_eq!(validate_scenario(scenario, &criteria), first);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn banding_covers_the_line_with_ordered_bands(
        r0 in 0.0f64..100.0,
        mu in 5.0f64..60.0,
        sigma in 0.1f64..10.0,
    ) {
        let params = BandingParams { mu, sigma };
        let band = params.band(r0);

        // Exactly one interval claims r0.
        let claims = [
            r0 > mu + sigma,
            r0 > mu && r0 <= mu + sigma,
            r0 >= mu - sigma && r0 <= mu,
            r0 < mu - sigma,
        ];
        prop_assert_eq!(claims.iter().filter(|c| **c).count(), 1);

        let expected = match claims.iter().position(|c| *c).unwrap() {
            0 => DifficultyBand::Extreme,
            1 => DifficultyBand::Hard,
            2 => DifficultyBand::Medium,
            _ => DifficultyBand::Easy,
        };
        prop_assert_eq!(band, expected);
    }

    #[test]
    fn banding_is_monotone_in_initial_resistance(
        a in 0.0f64..100.0,
        b in 0.0f64..100.0,
    ) {
        let params = BandingParams::default();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(params.band(lo) <= params.band(hi));
    }
}
