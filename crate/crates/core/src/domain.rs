//! Value types shared by every module: market intervals, service
//! requirements, SLA requests and the provider market model.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower edge of every SLO market axis.
pub const MARKET_MIN: f64 = 0.0;
/// Upper edge of every SLO market axis.
pub const MARKET_MAX: f64 = 100.0;

/// Closed range `[low, high]` on the market axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInterval")]
pub struct Interval {
    low: f64,
    high: f64,
}

#[derive(Deserialize)]
struct RawInterval {
    low: f64,
    high: f64,
}

impl TryFrom<RawInterval> for Interval {
    type Error = Error;

    fn try_from(raw: RawInterval) -> Result<Self> {
        Interval::new(raw.low, raw.high)
    }
}

impl Interval {
    pub fn new(low: f64, high: f64) -> Result<Self> {
        let reason = if !(low.is_finite() && high.is_finite()) {
            Some("bounds must be finite")
        } else if low > high {
            Some("low exceeds high")
        } else if low < MARKET_MIN || high > MARKET_MAX {
            Some("bounds must lie within the market [0, 100]")
        } else {
            None
        };
        match reason {
            Some(reason) => Err(Error::InvalidInterval { low, high, reason }),
            None => Ok(Interval { low, high }),
        }
    }

    /// The whole market `[0, 100]`.
    pub fn full() -> Self {
        Interval {
            low: MARKET_MIN,
            high: MARKET_MAX,
        }
    }

    /// Interval of `length` centred on the middle of the market.
    pub fn centered(length: f64) -> Result<Self> {
        let mid = (MARKET_MIN + MARKET_MAX) / 2.0;
        Interval::new(mid - length / 2.0, mid + length / 2.0)
    }

    pub fn low(&self) -> f64 {
        self.low
    }

    pub fn high(&self) -> f64 {
        self.high
    }

    pub fn length(&self) -> f64 {
        self.high - self.low
    }

    pub fn contains(&self, other: &Interval) -> bool {
        self.low <= other.low && other.high <= self.high
    }

    /// Builds `[low, high]` after clipping both ends to the market edges.
    /// The raw interval may stick out on either side; it is never empty after
    /// clipping as long as it intersects the market.
    pub(crate) fn clipped(low: f64, high: f64) -> Self {
        let low = low.clamp(MARKET_MIN, MARKET_MAX);
        let high = high.clamp(MARKET_MIN, MARKET_MAX);
        Interval {
            low,
            high: high.max(low),
        }
    }
}

/// Closed-interval intersection test; touching endpoints count as a match.
pub fn overlaps(a: &Interval, b: &Interval) -> bool {
    a.low <= b.high && b.low <= a.high
}

/// Length of the intersection of two overlapping intervals.
pub fn negotiation_range(a: &Interval, b: &Interval) -> Result<f64> {
    if !overlaps(a, b) {
        return Err(Error::Disjoint {
            a_low: a.low,
            a_high: a.high,
            b_low: b.low,
            b_high: b.high,
        });
    }
    Ok(intersection_length(a, b))
}

#[inline]
pub(crate) fn intersection_length(a: &Interval, b: &Interval) -> f64 {
    (a.high.min(b.high) - a.low.max(b.low)).max(0.0)
}

/// What a consumer asks for on one SLO: either a bare length or a concrete
/// interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extent {
    Length(f64),
    Span(Interval),
}

impl Extent {
    pub fn length(&self) -> f64 {
        match self {
            Extent::Length(l) => *l,
            Extent::Span(i) => i.length(),
        }
    }

    /// Concrete placement; bare lengths sit at the centre of the market.
    pub fn interval(&self) -> Result<Interval> {
        match self {
            Extent::Length(l) => Interval::centered(*l),
            Extent::Span(i) => Ok(*i),
        }
    }
}

/// One consumer SLO. Priority 1 is the most important.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceRequirement {
    pub name: String,
    pub extent: Extent,
    pub priority: u32,
}

impl ServiceRequirement {
    pub fn new(name: impl Into<String>, extent: Extent, priority: u32) -> Result<Self> {
        let name = name.into();
        let invalid = |reason: String| Error::InvalidService {
            service: name.clone(),
            reason,
        };
        if name.trim().is_empty() {
            return Err(Error::InvalidRequest("service name must not be empty".into()));
        }
        if priority < 1 {
            return Err(invalid("priority must be at least 1".into()));
        }
        if let Extent::Length(l) = extent {
            if !l.is_finite() || !(MARKET_MIN..=MARKET_MAX - MARKET_MIN).contains(&l) {
                return Err(invalid(format!("length {l} outside [0, 100]")));
            }
        }
        Ok(ServiceRequirement {
            name,
            extent,
            priority,
        })
    }

    pub fn with_length(name: impl Into<String>, length: f64, priority: u32) -> Result<Self> {
        ServiceRequirement::new(name, Extent::Length(length), priority)
    }

    pub fn length(&self) -> f64 {
        self.extent.length()
    }
}

/// Ordered list of SLOs plus the number of providers the consumer will
/// contact.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlaRequest {
    services: Vec<ServiceRequirement>,
    providers: u64,
}

impl SlaRequest {
    pub fn new(services: Vec<ServiceRequirement>, providers: u64) -> Result<Self> {
        if services.is_empty() {
            return Err(Error::InvalidRequest("at least one service is required".into()));
        }
        if providers < 1 {
            return Err(Error::InvalidRequest("provider count must be at least 1".into()));
        }
        let mut seen = HashSet::new();
        for s in &services {
            if !seen.insert(s.name.as_str()) {
                return Err(Error::InvalidService {
                    service: s.name.clone(),
                    reason: "duplicate service name".into(),
                });
            }
        }
        Ok(SlaRequest {
            services,
            providers,
        })
    }

    pub fn services(&self) -> &[ServiceRequirement] {
        &self.services
    }

    pub fn providers(&self) -> u64 {
        self.providers
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.services.iter().map(ServiceRequirement::length).collect()
    }

    pub fn with_providers(&self, providers: u64) -> Result<Self> {
        SlaRequest::new(self.services.clone(), providers)
    }
}

/// How provider interval lengths are drawn before positioning.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderLengthLaw {
    /// Uniform length over the whole market, flexible-boundary centre, clipped.
    #[default]
    UniformClipped,
    /// Constant length, same positioning and clipping.
    FixedLength(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketModel {
    pub domain_min: f64,
    pub domain_max: f64,
    pub provider_length_law: ProviderLengthLaw,
}

impl Default for MarketModel {
    fn default() -> Self {
        MarketModel {
            domain_min: MARKET_MIN,
            domain_max: MARKET_MAX,
            provider_length_law: ProviderLengthLaw::UniformClipped,
        }
    }
}

impl MarketModel {
    pub fn fixed_length(length: f64) -> Result<Self> {
        let m = MarketModel {
            provider_length_law: ProviderLengthLaw::FixedLength(length),
            ..MarketModel::default()
        };
        m.validate()?;
        Ok(m)
    }

    pub fn width(&self) -> f64 {
        self.domain_max - self.domain_min
    }

    pub fn validate(&self) -> Result<()> {
        if self.domain_min.is_nan() || self.domain_max.is_nan() || self.domain_min >= self.domain_max {
            return Err(Error::InvalidMarket("domain_min must be below domain_max".into()));
        }
        if self.domain_min < MARKET_MIN || self.domain_max > MARKET_MAX {
            return Err(Error::InvalidMarket("domain must lie within [0, 100]".into()));
        }
        if let ProviderLengthLaw::FixedLength(v) = self.provider_length_law {
            if !(v > 0.0 && v <= self.width()) {
                return Err(Error::InvalidMarket(format!(
                    "fixed length {v} outside (0, {}]",
                    self.width()
                )));
            }
        }
        Ok(())
    }
}
