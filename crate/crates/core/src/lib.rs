//! Forecasting toolkit for consumer/provider SLA matching on a market of
//! randomly distributed provider offers.
//!
//! Every SLO parameter lives on a closed market axis `[0, 100]`. A consumer
//! requests one interval per SLO; a provider matches when each of its offered
//! intervals overlaps the corresponding consumer interval.
//!
//! * [`market_sim`] generates random provider intervals and measures match
//!   probabilities and negotiation ranges by Monte Carlo.
//! * [`regression`] fits the trend lines that turn simulated data into an
//!   analytical model.
//! * [`forecast`] combines single-SLO probabilities into SLA and
//!   at-least-one-provider probabilities.
//! * [`optimizer`] widens low-priority intervals until a match is practically
//!   guaranteed.

pub mod domain;
pub mod error;
pub mod forecast;
pub mod market_sim;
pub mod optimizer;
pub mod reference;
pub mod regression;
pub mod request;

pub use domain::{
    negotiation_range, overlaps, Extent, Interval, MarketModel, ProviderLengthLaw,
    ServiceRequirement, SlaRequest,
};
pub use error::{Error, Result};
