//! Monte Carlo market simulator.
//!
//! Provider intervals are drawn in two steps: a length (uniform over the
//! market width, or fixed), then a centre drawn uniformly from the widened
//! range `[min - length/2, max + length/2]`. The part sticking out of the
//! market is cut off. Widening the centre range makes the consumer
//! interval's position irrelevant to the overlap probability; clipping yields
//! many short and few long provider intervals.
//!
//! # Random streams
//!
//! Every experiment owns its own ChaCha8 stream. The 256-bit key is the
//! little-endian run seed followed by a little-endian domain tag (one tag per
//! kind of experiment) and zero padding; the stream id is the experiment
//! index. Results are therefore a pure function of `(seed, config)` no matter
//! how experiments are spread over worker threads. Experiments run in fixed
//! size chunks whose partial sums are merged in chunk order, so floating
//! point totals are bit-identical across thread counts too.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{intersection_length, overlaps, Interval, MarketModel, ProviderLengthLaw};
use crate::error::{Error, Result};

const CHUNK: u64 = 4096;

/// Stream domain for first-match experiments.
const DOMAIN_FIRST_MATCH: u64 = 1;
/// Stream domain for single consumer/provider pair draws.
const DOMAIN_PAIRS: u64 = 2;
/// Stream domain for provider length histograms.
const DOMAIN_LENGTHS: u64 = 3;

/// Independent RNG for experiment `index` of a run seeded with `seed`.
pub fn substream(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&domain.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub market: MarketModel,
    pub experiments: u64,
    pub max_providers_per_experiment: u64,
    pub seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            market: MarketModel::default(),
            experiments: 1_000_000,
            max_providers_per_experiment: 1000,
            seed: 42,
        }
    }
}

impl SimulationConfig {
    pub fn new(experiments: u64, seed: u64) -> Self {
        SimulationConfig {
            experiments,
            seed,
            ..SimulationConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.market.validate()?;
        if self.experiments < 1 {
            return Err(Error::InvalidConfig("experiments must be at least 1".into()));
        }
        if self.max_providers_per_experiment < 1 {
            return Err(Error::InvalidConfig(
                "max_providers_per_experiment must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Places a provider interval of `length` around `center` and cuts off
/// whatever sticks out of the market.
pub fn place_provider_interval(market: &MarketModel, length: f64, center: f64) -> Interval {
    let half = length / 2.0;
    let low = (center - half).max(market.domain_min);
    let high = (center + half).min(market.domain_max);
    Interval::clipped(low, high)
}

/// Draws one random provider interval.
pub fn generate_provider_interval<R: Rng + ?Sized>(rng: &mut R, market: &MarketModel) -> Interval {
    let width = market.width();
    let length = match market.provider_length_law {
        ProviderLengthLaw::UniformClipped => rng.random::<f64>() * width,
        ProviderLengthLaw::FixedLength(v) => v,
    };
    let lo = market.domain_min - length / 2.0;
    let center = lo + rng.random::<f64>() * (width + length);
    place_provider_interval(market, length, center)
}

/// Histogram of clipped provider interval lengths over `bins` equal-width
/// bins spanning the market width.
pub fn provider_length_histogram(
    market: &MarketModel,
    draws: u64,
    bins: usize,
    seed: u64,
) -> Result<Vec<u64>> {
    market.validate()?;
    if bins == 0 {
        return Err(Error::InvalidConfig("bins must be at least 1".into()));
    }
    let width = market.width();
    let partials: Vec<Vec<u64>> = chunks(draws)
        .into_par_iter()
        .map(|(start, end)| {
            let mut hist = vec![0u64; bins];
            for i in start..end {
                let mut rng = substream(seed, DOMAIN_LENGTHS, i);
                let len = generate_provider_interval(&mut rng, market).length();
                let bin = ((len / width) * bins as f64) as usize;
                hist[bin.min(bins - 1)] += 1;
            }
            hist
        })
        .collect();
    let mut hist = vec![0u64; bins];
    for p in partials {
        for (acc, c) in hist.iter_mut().zip(p) {
            *acc += c;
        }
    }
    Ok(hist)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationOutcome {
    /// Provider ordinal (1-based) of the first full match, and how many
    /// experiments stopped there.
    pub first_match_histogram: BTreeMap<u64, u64>,
    pub unmatched_count: u64,
    /// Share of experiments whose very first provider matched.
    pub match_probability: f64,
    /// Mean intersection length over every overlapping consumer/provider
    /// pair, all SLOs pooled.
    pub mean_negotiation_range: f64,
    /// The same mean restricted to each SLO; `None` if an SLO never overlapped.
    pub per_slo_negotiation_range: Vec<Option<f64>>,
    pub consumer_lengths: Vec<f64>,
    pub experiments: u64,
    pub seed: u64,
}

impl SimulationOutcome {
    /// Fraction of experiments that found a match within the first `n`
    /// providers, for `n = 1..=max_n`.
    pub fn cumulative_curve(&self, max_n: u64) -> Vec<(u64, f64)> {
        let total = self.experiments as f64;
        let mut running = 0u64;
        (1..=max_n)
            .map(|n| {
                running += self.first_match_histogram.get(&n).copied().unwrap_or(0);
                (n, running as f64 / total)
            })
            .collect()
    }

    /// Standard error of [`Self::match_probability`].
    pub fn standard_error(&self) -> f64 {
        let p = self.match_probability;
        (p * (1.0 - p) / self.experiments as f64).sqrt()
    }

    /// `ordinal,count` table preceded by `#`-prefixed metadata lines.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let lengths: Vec<String> = self.consumer_lengths.iter().map(|l| l.to_string()).collect();
        let _ = writeln!(out, "# seed={}", self.seed);
        let _ = writeln!(out, "# experiments={}", self.experiments);
        let _ = writeln!(out, "# lengths={}", lengths.join(";"));
        let _ = writeln!(out, "# unmatched={}", self.unmatched_count);
        out.push_str("ordinal,count\n");
        for (ordinal, count) in &self.first_match_histogram {
            let _ = writeln!(out, "{ordinal},{count}");
        }
        out
    }
}

#[derive(Default)]
struct Partial {
    histogram: Vec<u64>,
    unmatched: u64,
    range_sums: Vec<f64>,
    range_counts: Vec<u64>,
}

fn chunks(total: u64) -> Vec<(u64, u64)> {
    (0..total.div_ceil(CHUNK))
        .map(|c| (c * CHUNK, ((c + 1) * CHUNK).min(total)))
        .collect()
}

/// Runs the first-match experiment: providers are contacted in order, each
/// offering one random interval per consumer SLO, until one overlaps every
/// consumer interval or the provider cap is exhausted.
pub fn run_first_match_experiments(
    consumer: &[Interval],
    config: &SimulationConfig,
) -> Result<SimulationOutcome> {
    config.validate()?;
    if consumer.is_empty() {
        return Err(Error::InvalidRequest("at least one consumer interval is required".into()));
    }
    let slos = consumer.len();
    let cap = config.max_providers_per_experiment;

    let partials: Vec<Partial> = chunks(config.experiments)
        .into_par_iter()
        .map(|(start, end)| {
            let mut part = Partial {
                range_sums: vec![0.0; slos],
                range_counts: vec![0; slos],
                ..Partial::default()
            };
            for experiment in start..end {
                let mut rng = substream(config.seed, DOMAIN_FIRST_MATCH, experiment);
                let mut first_match = None;
                'providers: for provider in 1..=cap {
                    for (slo, wanted) in consumer.iter().enumerate() {
                        let offer = generate_provider_interval(&mut rng, &config.market);
                        if !overlaps(wanted, &offer) {
                            continue 'providers;
                        }
                        part.range_sums[slo] += intersection_length(wanted, &offer);
                        part.range_counts[slo] += 1;
                    }
                    first_match = Some(provider as usize);
                    break;
                }
                match first_match {
                    Some(ordinal) => {
                        if part.histogram.len() <= ordinal {
                            part.histogram.resize(ordinal + 1, 0);
                        }
                        part.histogram[ordinal] += 1;
                    }
                    None => part.unmatched += 1,
                }
            }
            part
        })
        .collect();

    let mut histogram = BTreeMap::new();
    let mut unmatched = 0;
    let mut sums = vec![0.0; slos];
    let mut counts = vec![0u64; slos];
    for part in partials {
        for (ordinal, &count) in part.histogram.iter().enumerate() {
            if count > 0 {
                *histogram.entry(ordinal as u64).or_insert(0) += count;
            }
        }
        unmatched += part.unmatched;
        for slo in 0..slos {
            sums[slo] += part.range_sums[slo];
            counts[slo] += part.range_counts[slo];
        }
    }

    let total_count: u64 = counts.iter().sum();
    let total_sum: f64 = sums.iter().sum();
    let first = histogram.get(&1).copied().unwrap_or(0);
    Ok(SimulationOutcome {
        first_match_histogram: histogram,
        unmatched_count: unmatched,
        match_probability: first as f64 / config.experiments as f64,
        mean_negotiation_range: if total_count > 0 {
            total_sum / total_count as f64
        } else {
            0.0
        },
        per_slo_negotiation_range: sums
            .iter()
            .zip(&counts)
            .map(|(&s, &c)| (c > 0).then(|| s / c as f64))
            .collect(),
        consumer_lengths: consumer.iter().map(Interval::length).collect(),
        experiments: config.experiments,
        seed: config.seed,
    })
}

/// Mean intersection length between `consumer` and fresh provider intervals,
/// over the overlapping pairs only. One provider per experiment.
pub fn measure_negotiation_range_at(consumer: &Interval, config: &SimulationConfig) -> Result<f64> {
    config.validate()?;
    let partials: Vec<(f64, u64)> = chunks(config.experiments)
        .into_par_iter()
        .map(|(start, end)| {
            let mut sum = 0.0;
            let mut count = 0u64;
            for experiment in start..end {
                let mut rng = substream(config.seed, DOMAIN_PAIRS, experiment);
                let offer = generate_provider_interval(&mut rng, &config.market);
                if overlaps(consumer, &offer) {
                    sum += intersection_length(consumer, &offer);
                    count += 1;
                }
            }
            (sum, count)
        })
        .collect();
    let (sum, count) = partials
        .into_iter()
        .fold((0.0, 0u64), |(s, c), (ps, pc)| (s + ps, c + pc));
    if count == 0 {
        return Err(Error::NoOverlap {
            experiments: config.experiments,
        });
    }
    Ok(sum / count as f64)
}

/// [`measure_negotiation_range_at`] for a consumer interval of the given
/// length centred on the market.
pub fn measure_negotiation_range(consumer_length: f64, config: &SimulationConfig) -> Result<f64> {
    let consumer = consumer_interval(consumer_length)?;
    measure_negotiation_range_at(&consumer, config)
}

fn consumer_interval(length: f64) -> Result<Interval> {
    if !(length > 0.0 && length <= 100.0) {
        return Err(Error::Domain {
            value: length,
            domain: "(0, 100]",
        });
    }
    Interval::centered(length)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub length: f64,
    pub match_probability: f64,
    pub mean_negotiation_range: f64,
}

/// One single-SLO simulation per consumer length (centred placement):
/// first-provider match probability plus conditional mean negotiation range.
pub fn sweep_consumer_lengths(lengths: &[f64], config: &SimulationConfig) -> Result<Vec<SweepRow>> {
    lengths
        .iter()
        .map(|&length| {
            let consumer = consumer_interval(length)?;
            let outcome = run_first_match_experiments(&[consumer], config)?;
            let range = measure_negotiation_range_at(&consumer, config)?;
            Ok(SweepRow {
                length,
                match_probability: outcome.match_probability,
                mean_negotiation_range: range,
            })
        })
        .collect()
}

pub fn sweep_to_csv(rows: &[SweepRow], config: &SimulationConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# seed={}", config.seed);
    let _ = writeln!(out, "# experiments={}", config.experiments);
    out.push_str("length,match_probability,mean_negotiation_range\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{}",
            r.length, r.match_probability, r.mean_negotiation_range
        );
    }
    out
}
