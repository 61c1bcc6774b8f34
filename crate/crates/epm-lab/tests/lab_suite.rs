//! End-to-end lab runs: bundled pair sets replayed through the marker
//! judge, with score directions and statistics checked against hand
//! arithmetic.

use epm_agents::ScriptedJudge;
use epm_lab::{
    case_level_aggregate, pair_diffs, paired_stats, score_pair_full, stats_report, LabError,
    PairContext, PairSet, PerturbationPair, ScorerKind, StatsConfig, SycophancyVariant,
};
use epm_lab::fixtures::{persona_flip_set, sycophancy_set};
use epm_scenario::fixtures::exemplar_scenario;

const TOL: f64 = 1e-12;

fn scored(mut set: PairSet) -> PairSet {
    let mut judge = ScriptedJudge::markers();
    for pair in &mut set.pairs {
        score_pair_full(pair, &mut judge).unwrap();
    }
    set
}

/// A flip keeps the words and inverts the card, so both text-only rules
/// tie exactly and only the state-aware score moves, downward on every
/// pair. The one-window pair is pinned to closed-form values: one unit
/// of forward motion against (-7,-18,-27) versus (-7,-18,-9).
#[test]
fn flip_pairs_drop_the_physics_score_and_tie_both_ablations() {
    let set = scored(persona_flip_set());
    assert_eq!(set.pairs.len(), 6);
    for pair in &set.pairs {
        let full = pair.diff(ScorerKind::FullEpm).unwrap();
        let flat = pair.diff(ScorerKind::NoPhysics).unwrap();
        let raw = pair.diff(ScorerKind::MagnitudeOnly).unwrap();
        assert!(full < 0.0, "{}: expected a drop, got {full}", pair.pair_id);
        assert_eq!(flat, 0.0, "{}: identical text must tie", pair.pair_id);
        assert_eq!(raw, 0.0, "{}: identical text must tie", pair.pair_id);
    }

    let first = &set.pairs[0];
    assert_eq!(first.pair_id, "flip-01");
    let expected = 9.0 / 454f64.sqrt() - 27.0 / 1102f64.sqrt();
    assert!((first.diff(ScorerKind::FullEpm).unwrap() - expected).abs() < TOL);
}

#[test]
fn flip_statistics_flag_a_unanimous_decrease() {
    let set = scored(persona_flip_set());
    let cfg = StatsConfig::default();
    let diffs = pair_diffs(&set.pairs, ScorerKind::FullEpm).unwrap();
    let stats = paired_stats(&diffs, &cfg).unwrap();
    assert_eq!(stats.n, 6);
    assert_eq!(stats.decrease_rate, 1.0);
    assert!((stats.p_value.unwrap() - 0.015625).abs() < TOL, "six of six is 2^-6");
    assert!(stats.ci_high < 0.0, "the interval must exclude zero");

    let report = stats_report(&set.pairs, ScorerKind::FullEpm, &cfg).unwrap();
    let cases = report.case_level.expect("three cases clear the floor");
    assert_eq!(cases.n, 3);
    assert_eq!(cases.decrease_rate, 1.0);
}

/// The swapped reply is louder and worse aimed, so raw intensity rises
/// while the state-aware score falls, on every pair of every variant.
/// The first pair is pinned: (1,1,1) versus (-4,3,-5) at (-7,-18,-27).
#[test]
fn sycophancy_pairs_split_the_full_score_from_raw_intensity() {
    let set = scored(sycophancy_set());
    assert_eq!(set.pairs.len(), 6);
    for pair in &set.pairs {
        let full = pair.diff(ScorerKind::FullEpm).unwrap();
        let raw = pair.diff(ScorerKind::MagnitudeOnly).unwrap();
        assert!(full < 0.0, "{}: expected a drop, got {full}", pair.pair_id);
        assert!(raw > 0.0, "{}: expected a rise, got {raw}", pair.pair_id);
    }

    let first = &set.pairs[0];
    assert_eq!(first.pair_id, "syc-01");
    let full = first.diff(ScorerKind::FullEpm).unwrap();
    let raw = first.diff(ScorerKind::MagnitudeOnly).unwrap();
    let flat = first.diff(ScorerKind::NoPhysics).unwrap();
    assert!((full - -161.0 / 1102f64.sqrt()).abs() < TOL);
    assert!((raw - (50f64.sqrt() - 3f64.sqrt())).abs() < TOL);
    assert!((flat - -9.0).abs() < TOL);
}

fn bare_pair(pair_id: &str, case_id: &str, diff: f64) -> PerturbationPair {
    let scenario = exemplar_scenario();
    let ctx = PairContext {
        persona: scenario.persona.clone(),
        crisis_event: scenario.crisis_event.clone(),
        dialogue: vec![],
        prompt: "p".into(),
    };
    let replacement = epm_lab::sycophancy_replacement(SycophancyVariant::PureEmpathy, &scenario.persona);
    let mut pair = PerturbationPair::sycophancy(
        pair_id,
        case_id,
        SycophancyVariant::PureEmpathy,
        ctx,
        "original",
        replacement,
    )
    .unwrap();
    pair.record_score(ScorerKind::FullEpm.id(), 0.0, diff);
    pair
}

#[test]
fn case_means_feed_the_same_statistics() {
    let pairs = vec![
        bare_pair("p1", "case-a", -1.0),
        bare_pair("p2", "case-a", -3.0),
        bare_pair("p3", "case-b", -2.0),
    ];
    let stats = case_level_aggregate(&pairs, ScorerKind::FullEpm, &StatsConfig::default()).unwrap();
    assert_eq!(stats.n, 2, "two cases, not three pairs");
    assert_eq!(stats.mean, -2.0);
    assert_eq!(stats.median, -2.0);

    let lone = vec![bare_pair("p1", "only", -1.0), bare_pair("p2", "only", -2.0)];
    match case_level_aggregate(&lone, ScorerKind::FullEpm, &StatsConfig::default()) {
        Err(LabError::InsufficientData { got: 1, need: 2 }) => {}
        other => panic!("expected an insufficient-data error, got {other:?}"),
    }
}

#[test]
fn scored_sets_round_trip_with_their_scores() {
    let set = scored(sycophancy_set());
    let json = set.to_json().unwrap();
    let back = PairSet::from_json(&json).unwrap();
    assert_eq!(back, set);
    assert_eq!(back.pairs[0].scores.len(), 3);
}
