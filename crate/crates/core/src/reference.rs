//! Published reference data: the simulated match probabilities and mean
//! negotiation ranges for consumer lengths 10..=100, and the two trend lines
//! fitted to them. Forecasts use these lines unless a refit is supplied.

use crate::regression::{DataSeries, Diagnostics, Transform, TrendLine};

/// Consumer interval lengths of the reference sweep.
pub const SWEEP_LENGTHS: [f64; 10] = [10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0, 100.0];

/// First-provider match probability per sweep length.
pub const MATCH_PROBABILITY: [f64; 10] =
    [0.381, 0.449, 0.517, 0.587, 0.656, 0.724, 0.793, 0.862, 0.932, 1.000];

/// Mean negotiation range (overlapping pairs only) per sweep length.
pub const NEGOTIATION_RANGE: [f64; 10] =
    [8.01, 13.56, 17.63, 20.76, 23.22, 25.00, 26.86, 28.23, 29.44, 30.43];

/// Provider ordinal → first-match count for a length-20 consumer interval
/// (first four ordinals of a 10⁶ experiment run).
pub const FIRST_MATCHES_LENGTH_20: [u64; 4] = [448_844, 247_577, 136_070, 75_437];

pub fn match_probability_series() -> DataSeries {
    DataSeries::from_xy(&SWEEP_LENGTHS, &MATCH_PROBABILITY, Transform::Identity)
}

pub fn negotiation_range_series() -> DataSeries {
    DataSeries::from_xy(&SWEEP_LENGTHS, &NEGOTIATION_RANGE, Transform::NaturalLogX)
}

/// `p = 0.00688667 · length + 0.31133315`
pub fn match_probability_line() -> TrendLine {
    TrendLine {
        slope: 0.00688667,
        intercept: 0.31133315,
        transform: Transform::Identity,
        diagnostics: Diagnostics {
            residual_sum: 0.0,
            sse: 2.9333e-6,
            var_observed: 0.03912689,
            var_predicted: 0.039126635,
            r2: 0.99999347,
        },
    }
}

/// `range = 10.01 · ln(length) − 15.85413`
pub fn negotiation_range_line() -> TrendLine {
    TrendLine {
        slope: 10.01,
        intercept: -15.85413,
        transform: Transform::NaturalLogX,
        diagnostics: Diagnostics {
            residual_sum: 0.0,
            sse: 1.607,
            var_observed: 48.594164,
            var_predicted: 48.4336221,
            r2: 0.9967,
        },
    }
}
