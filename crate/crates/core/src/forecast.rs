//! Analytical forecasts built on the trend lines.
//!
//! 1. Each SLO's single probability comes from the match-probability line.
//! 2. The SLA probability is the product of the single probabilities (SLO
//!    matches are treated as independent).
//! 3. Contacting `n` providers is a binomial experiment; the chance of at
//!    least one full match is `1 − (1 − p)^n`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize, Serializer};

use crate::domain::SlaRequest;
use crate::error::{Error, Result};
use crate::regression::{Transform, TrendLine};

/// Largest provider count [`min_providers`] searches by default.
pub const DEFAULT_PROVIDER_CAP: u64 = 1_000_000;
/// Largest service count accepted by [`combination_landscape`].
pub const LANDSCAPE_CAP: usize = 20;
/// Practical-certainty threshold for "at least one provider matches".
pub const SURE_THRESHOLD: f64 = 0.99;
/// Shortest length the reference sweep covered; below is extrapolation.
pub const FITTED_MIN_LENGTH: f64 = 10.0;

fn check_length(length: f64) -> Result<()> {
    if length > 0.0 && length <= 100.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            value: length,
            domain: "(0, 100]",
        })
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Domain {
            value: p,
            domain: "[0, 1]",
        })
    }
}

/// Probability that a consumer interval of `length` overlaps one random
/// provider interval, clamped into `[0, 1]`.
pub fn single_probability(length: f64, line: &TrendLine) -> Result<f64> {
    check_length(length)?;
    Ok(line.predict(length)?.clamp(0.0, 1.0))
}

/// Probability that one provider matches every SLO.
pub fn sla_probability(lengths: &[f64], line: &TrendLine) -> Result<f64> {
    if lengths.is_empty() {
        return Err(Error::InvalidRequest("at least one length is required".into()));
    }
    lengths
        .iter()
        .try_fold(1.0, |acc, &l| Ok(acc * single_probability(l, line)?))
}

fn ln_choose(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (1..=k)
        .map(|i| ((n - k + i) as f64 / i as f64).ln())
        .sum()
}

/// `C(n, k) · p^k · (1 − p)^(n − k)`.
pub fn binomial_pmf(k: u64, p: f64, n: u64) -> Result<f64> {
    check_probability(p)?;
    if k > n {
        return Err(Error::Domain {
            value: k as f64,
            domain: "k <= n",
        });
    }
    // 0^0 = 1 at the edges.
    if p == 0.0 {
        return Ok(if k == 0 { 1.0 } else { 0.0 });
    }
    if p == 1.0 {
        return Ok(if k == n { 1.0 } else { 0.0 });
    }
    let log = ln_choose(n, k) + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p();
    Ok(log.exp())
}

/// Probability of at least one success in `n` trials: `1 − (1 − p)^n`.
pub fn at_least_one(p: f64, n: u64) -> f64 {
    if p >= 1.0 {
        return if n > 0 { 1.0 } else { 0.0 };
    }
    if p <= 0.0 {
        return 0.0;
    }
    -(n as f64 * (-p).ln_1p()).exp_m1()
}

/// Smallest provider count reaching a threshold, or the search gave up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinProviders {
    Reached(u64),
    Unreachable,
}

impl MinProviders {
    pub fn count(self) -> Option<u64> {
        match self {
            MinProviders::Reached(n) => Some(n),
            MinProviders::Unreachable => None,
        }
    }
}

impl Serialize for MinProviders {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MinProviders::Reached(n) => s.serialize_u64(*n),
            MinProviders::Unreachable => s.serialize_str("unreachable"),
        }
    }
}

impl<'de> Deserialize<'de> for MinProviders {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(n) => Ok(MinProviders::Reached(n)),
            Raw::S(s) if s == "unreachable" => Ok(MinProviders::Unreachable),
            Raw::S(s) => Err(serde::de::Error::custom(format!("unexpected `{s}`"))),
        }
    }
}

/// Smallest `n` with `at_least_one(p, n) > threshold`, found by increasing
/// `n` one provider at a time up to `cap`.
pub fn min_providers(p: f64, threshold: f64, cap: u64) -> Result<MinProviders> {
    check_probability(p)?;
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Domain {
            value: threshold,
            domain: "(0, 1)",
        });
    }
    if p == 0.0 {
        return Ok(MinProviders::Unreachable);
    }
    Ok((1..=cap)
        .find(|&n| at_least_one(p, n) > threshold)
        .map_or(MinProviders::Unreachable, MinProviders::Reached))
}

/// Smallest integer `n` strictly above `ln(1 − threshold) / ln(1 − p)`.
pub fn min_providers_closed_form(p: f64, threshold: f64) -> f64 {
    let ratio = (-threshold).ln_1p() / (-p).ln_1p();
    ratio.floor() + 1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeEntry {
    pub services: Vec<String>,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinationLandscape {
    pub providers: u64,
    pub entries: Vec<LandscapeEntry>,
}

/// At-least-one probability at the request's provider count for every
/// nonempty subset of its services. Entries are ordered by subset size, then
/// lexicographically by (sorted) service names.
pub fn combination_landscape(request: &SlaRequest, line: &TrendLine) -> Result<CombinationLandscape> {
    let count = request.services().len();
    if count > LANDSCAPE_CAP {
        return Err(Error::TooManyServices {
            count,
            cap: LANDSCAPE_CAP,
        });
    }
    let mut named: Vec<(&str, f64)> = request
        .services()
        .iter()
        .map(|s| Ok((s.name.as_str(), single_probability(s.length(), line)?)))
        .collect::<Result<_>>()?;
    named.sort_by(|a, b| a.0.cmp(b.0));

    let n = request.providers();
    let mut entries = Vec::with_capacity((1usize << count) - 1);
    for size in 1..=count {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            let p: f64 = combo.iter().map(|&i| named[i].1).product();
            entries.push(LandscapeEntry {
                services: combo.iter().map(|&i| named[i].0.to_string()).collect(),
                probability: at_least_one(p, n),
            });
            if !next_combination(&mut combo, count) {
                break;
            }
        }
    }
    Ok(CombinationLandscape {
        providers: n,
        entries,
    })
}

/// Advances `combo` to the next k-combination of `0..n` in lexicographic
/// order. Returns false after the last one.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let Some(i) = (0..k).rev().find(|&i| combo[i] < n - k + i) else {
        return false;
    };
    combo[i] += 1;
    for j in i + 1..k {
        combo[j] = combo[j - 1] + 1;
    }
    true
}

/// Predicted negotiation range per length, clamped at zero, and their sum.
pub fn predict_negotiation_range(lengths: &[f64], log_line: &TrendLine) -> Result<(Vec<f64>, f64)> {
    if log_line.transform != Transform::NaturalLogX {
        return Err(Error::InvalidRequest(
            "negotiation ranges need a log-transformed trend line".into(),
        ));
    }
    let ranges = lengths
        .iter()
        .map(|&l| {
            if l <= 0.0 {
                return Err(Error::Domain {
                    value: l,
                    domain: "length > 0",
                });
            }
            Ok(log_line.predict(l)?.max(0.0))
        })
        .collect::<Result<Vec<_>>>()?;
    let total = ranges.iter().sum();
    Ok((ranges, total))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub providers: u64,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastReport {
    pub providers: u64,
    pub per_service: BTreeMap<String, f64>,
    pub sla_probability: f64,
    pub at_least_one: f64,
    pub curve: Vec<CurvePoint>,
    pub min_providers_99: MinProviders,
    pub negotiation_ranges: BTreeMap<String, f64>,
    pub negotiation_range_total: f64,
    /// Services shorter than the fitted range of the trend line.
    pub extrapolated: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub landscape: Option<CombinationLandscape>,
}

impl ForecastReport {
    pub fn curve_csv(&self) -> String {
        let mut out = String::from("providers,probability\n");
        for pt in &self.curve {
            let _ = writeln!(out, "{},{}", pt.providers, pt.probability);
        }
        out
    }
}

/// Full forecast for a request: single probabilities, SLA probability,
/// at-least-one probability and its curve over `1..=providers`, the provider
/// count needed for practical certainty, and predicted negotiation ranges.
pub fn forecast(request: &SlaRequest, prob_line: &TrendLine, log_line: &TrendLine) -> Result<ForecastReport> {
    let services = request.services();
    let mut per_service = BTreeMap::new();
    let mut extrapolated = Vec::new();
    for s in services {
        let p = single_probability(s.length(), prob_line).map_err(|e| Error::InvalidService {
            service: s.name.clone(),
            reason: e.to_string(),
        })?;
        if s.length() < FITTED_MIN_LENGTH {
            extrapolated.push(s.name.clone());
        }
        per_service.insert(s.name.clone(), p);
    }
    let sla = sla_probability(&request.lengths(), prob_line)?;
    let n = request.providers();
    let curve = (1..=n)
        .map(|k| CurvePoint {
            providers: k,
            probability: at_least_one(sla, k),
        })
        .collect();
    let (ranges, total) = predict_negotiation_range(&request.lengths(), log_line)?;
    Ok(ForecastReport {
        providers: n,
        per_service,
        sla_probability: sla,
        at_least_one: at_least_one(sla, n),
        curve,
        min_providers_99: min_providers(sla, SURE_THRESHOLD, DEFAULT_PROVIDER_CAP)?,
        negotiation_ranges: services
            .iter()
            .map(|s| s.name.clone())
            .zip(ranges)
            .collect(),
        negotiation_range_total: total,
        extrapolated,
        landscape: None,
    })
}
