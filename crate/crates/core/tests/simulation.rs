//! Statistical properties of the market simulator.

use slafc_core::market_sim::{
    measure_negotiation_range, provider_length_histogram, run_first_match_experiments,
    sweep_consumer_lengths, SimulationConfig,
};
use slafc_core::{Interval, MarketModel};

/// Closed form of the single-SLO overlap probability under uniform length and
/// flexible-boundary centre: `1 − (1 − l/100)·ln 2`.
fn overlap_oracle(length: f64) -> f64 {
    1.0 - (1.0 - length / 100.0) * std::f64::consts::LN_2
}

#[test]
fn clipped_lengths_skew_short() {
    let hist = provider_length_histogram(&MarketModel::default(), 1_000_000, 10, 17).unwrap();
    assert_eq!(hist.iter().sum::<u64>(), 1_000_000);
    assert!(hist.windows(2).all(|w| w[0] > w[1]), "{hist:?}");
    let hist20 = provider_length_histogram(&MarketModel::default(), 1_000_000, 20, 17).unwrap();
    assert!(hist20.windows(2).all(|w| w[0] > w[1]), "{hist20:?}");
}

#[test]
fn match_probability_tracks_closed_form() {
    let config = SimulationConfig::new(200_000, 101);
    for length in [5.0, 25.0, 60.0, 95.0] {
        let out = run_first_match_experiments(&[Interval::centered(length).unwrap()], &config).unwrap();
        let expected = overlap_oracle(length);
        let se = (expected * (1.0 - expected) / 200_000.0).sqrt();
        assert!(
            (out.match_probability - expected).abs() <= 4.0 * se,
            "length {length}: {} vs {expected}",
            out.match_probability
        );
    }
}

#[test]
fn first_matches_decay_geometrically() {
    // Length-20 consumer: successive first-match counts shrink by ≈ (1 − p).
    let config = SimulationConfig::new(1_000_000, 2024);
    let out = run_first_match_experiments(&[Interval::centered(20.0).unwrap()], &config).unwrap();
    let h = &out.first_match_histogram;
    let p = out.match_probability;
    for k in 1..4u64 {
        let ratio = h[&(k + 1)] as f64 / h[&k] as f64;
        assert!((ratio - (1.0 - p)).abs() < 0.01, "k={k} ratio={ratio}");
    }
    // Roughly 70% of first matches within the first two providers.
    let two = out.cumulative_curve(2)[1].1;
    assert!((two - 0.70).abs() < 0.02, "{two}");
}

#[test]
fn two_slo_probability_is_the_product() {
    let config = SimulationConfig::new(400_000, 77);
    let consumer = [Interval::centered(10.0).unwrap(), Interval::centered(20.0).unwrap()];
    let out = run_first_match_experiments(&consumer, &config).unwrap();
    let expected = overlap_oracle(10.0) * overlap_oracle(20.0);
    assert!((out.match_probability - expected).abs() < 0.003, "{}", out.match_probability);
    assert!((out.match_probability - 0.171).abs() < 0.005);
    assert_eq!(out.per_slo_negotiation_range.len(), 2);
}

#[test]
fn position_does_not_matter() {
    for (i, length) in [10.0, 40.0].into_iter().enumerate() {
        let placements = [
            Interval::new(0.0, length).unwrap(),
            Interval::centered(length).unwrap(),
            Interval::new(100.0 - length, 100.0).unwrap(),
        ];
        let estimates: Vec<(f64, f64)> = placements
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let config = SimulationConfig::new(100_000, 500 + 10 * i as u64 + j as u64);
                let out = run_first_match_experiments(&[*c], &config).unwrap();
                (out.match_probability, out.standard_error())
            })
            .collect();
        for a in 0..3 {
            for b in a + 1..3 {
                let (pa, sa) = estimates[a];
                let (pb, sb) = estimates[b];
                assert!((pa - pb).abs() <= 3.0 * (sa * sa + sb * sb).sqrt(), "{estimates:?}");
            }
        }
    }
}

#[test]
fn disjoint_seeds_agree_within_six_sigma() {
    let consumer = [Interval::centered(30.0).unwrap()];
    let a = run_first_match_experiments(&consumer, &SimulationConfig::new(100_000, 1)).unwrap();
    let b = run_first_match_experiments(&consumer, &SimulationConfig::new(100_000, 2)).unwrap();
    let p = a.match_probability;
    assert!((a.match_probability - b.match_probability).abs() <= 6.0 * (p * (1.0 - p) / 100_000.0).sqrt());
}

#[test]
fn sweep_is_monotone_in_length() {
    let lengths: Vec<f64> = (1..=10).map(|k| 10.0 * k as f64).collect();
    let rows = sweep_consumer_lengths(&lengths, &SimulationConfig::new(100_000, 9)).unwrap();
    for w in rows.windows(2) {
        let se = (w[0].match_probability * (1.0 - w[0].match_probability) / 100_000.0).sqrt();
        assert!(w[1].match_probability + 3.0 * se >= w[0].match_probability);
        assert!(w[1].mean_negotiation_range > w[0].mean_negotiation_range);
    }
    let last = rows.last().unwrap();
    assert_eq!(last.match_probability, 1.0);
    assert!((last.mean_negotiation_range - 30.69).abs() < 0.3);
}

#[test]
fn fixed_length_market() {
    // Fixed provider length 20 against a centred length-20 consumer:
    // overlap iff the centre lands in a window of width 40 out of 120.
    let config = SimulationConfig {
        market: MarketModel::fixed_length(20.0).unwrap(),
        ..SimulationConfig::new(200_000, 3)
    };
    let out = run_first_match_experiments(&[Interval::centered(20.0).unwrap()], &config).unwrap();
    assert!((out.match_probability - 40.0 / 120.0).abs() < 0.005);
    let range = measure_negotiation_range(20.0, &config).unwrap();
    // Intersection is triangular over the window, mean 10.
    assert!((range - 10.0).abs() < 0.1, "{range}");
}

#[test]
fn seeded_runs_repeat_exactly() {
    let consumer = [Interval::centered(15.0).unwrap(), Interval::new(0.0, 35.0).unwrap()];
    let config = SimulationConfig::new(50_000, 123);
    let a = run_first_match_experiments(&consumer, &config).unwrap();
    let b = run_first_match_experiments(&consumer, &config).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_csv(), b.to_csv());
    let c = run_first_match_experiments(&consumer, &SimulationConfig::new(50_000, 124)).unwrap();
    assert_ne!(a, c);
}
