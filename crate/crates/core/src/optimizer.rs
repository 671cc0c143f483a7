//! Greedy interval widening by priority.
//!
//! Services are visited from least to most important. The current service is
//! widened one step at a time until either the at-least-one probability
//! exceeds the threshold or the service covers the whole market, in which
//! case the next service is taken. Equal priorities keep request order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domain::{Extent, Interval, SlaRequest, MARKET_MAX, MARKET_MIN};
use crate::error::{Error, Result};
use crate::forecast::{at_least_one, sla_probability};
use crate::regression::TrendLine;

pub const DEFAULT_THRESHOLD: f64 = 0.99;
pub const DEFAULT_STEP: f64 = 1.0;

/// How a widened length maps back onto a concrete interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlacementPolicy {
    /// Raise the upper bound; whatever does not fit below 100 lowers the
    /// lower bound instead.
    #[default]
    ExtendUpperOverflowLower,
}

impl PlacementPolicy {
    pub fn place(self, original: &Interval, length: f64) -> Interval {
        match self {
            PlacementPolicy::ExtendUpperOverflowLower => {
                let high = (original.low() + length).min(MARKET_MAX);
                let low = (high - length).max(MARKET_MIN);
                Interval::new(low, high).unwrap_or(*original)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub service: String,
    pub length: f64,
    /// At-least-one probability after this extension.
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub adjusted_lengths: BTreeMap<String, f64>,
    /// Concrete intervals for services that were requested as intervals.
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub adjusted_intervals: BTreeMap<String, Interval>,
    pub placement: PlacementPolicy,
    pub final_probability: f64,
    pub feasible: bool,
    pub steps: u64,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub trace: Vec<TraceStep>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerOptions {
    pub threshold: f64,
    pub step: f64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            threshold: DEFAULT_THRESHOLD,
            step: DEFAULT_STEP,
        }
    }
}

/// Visiting order: least important first, ties in request order.
fn visiting_order(request: &SlaRequest) -> Vec<usize> {
    let mut order: Vec<usize> = (0..request.services().len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(request.services()[i].priority));
    order
}

pub fn optimize(request: &SlaRequest, options: OptimizerOptions, line: &TrendLine) -> Result<OptimizationResult> {
    let OptimizerOptions { threshold, step } = options;
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Domain {
            value: threshold,
            domain: "threshold in (0, 1)",
        });
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Domain {
            value: step,
            domain: "step > 0",
        });
    }

    let services = request.services();
    let providers = request.providers();
    let mut lengths = request.lengths();
    let evaluate = |lengths: &[f64]| -> Result<f64> {
        Ok(at_least_one(sla_probability(lengths, line)?, providers))
    };

    let order = visiting_order(request);
    let mut cursor = 0;
    let mut probability = evaluate(&lengths)?;
    let mut steps = 0;
    let mut trace = Vec::new();
    let feasible = loop {
        if probability > threshold {
            break true;
        }
        let Some(&idx) = order.get(cursor) else {
            break false;
        };
        if lengths[idx] >= MARKET_MAX {
            cursor += 1;
            continue;
        }
        lengths[idx] = (lengths[idx] + step).min(MARKET_MAX);
        steps += 1;
        probability = evaluate(&lengths)?;
        trace.push(TraceStep {
            service: services[idx].name.clone(),
            length: lengths[idx],
            probability,
        });
    };

    let placement = PlacementPolicy::default();
    let adjusted_intervals = services
        .iter()
        .zip(&lengths)
        .filter_map(|(s, &len)| match s.extent {
            Extent::Span(original) => Some((s.name.clone(), placement.place(&original, len))),
            Extent::Length(_) => None,
        })
        .collect();

    Ok(OptimizationResult {
        adjusted_lengths: services.iter().map(|s| s.name.clone()).zip(lengths).collect(),
        adjusted_intervals,
        placement,
        final_probability: probability,
        feasible,
        steps,
        trace,
    })
}
