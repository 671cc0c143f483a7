//! JSON request documents.
//!
//! ```json
//! {
//!   "providers": 20,
//!   "services": [
//!     { "name": "A", "length": 20, "priority": 2 },
//!     { "name": "B", "min": 35, "max": 65, "priority": 1 }
//!   ],
//!   "market": { "fixed_length": 30 }
//! }
//! ```
//!
//! Each service gives either `length` or both `min` and `max`. `priority`
//! defaults to 1 (most important). `market` is optional and only matters to
//! the simulator.

use serde::{Deserialize, Serialize};

use crate::domain::{Extent, Interval, MarketModel, ServiceRequirement, SlaRequest};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceEntry {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    #[serde(default = "default_priority")]
    pub priority: u32,
}

fn default_priority() -> u32 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MarketOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_length: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlaRequestFile {
    pub providers: u64,
    pub services: Vec<ServiceEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub market: Option<MarketOverrides>,
}

impl ServiceEntry {
    fn to_requirement(&self) -> Result<ServiceRequirement> {
        let invalid = |reason: &str| Error::InvalidService {
            service: self.name.clone(),
            reason: reason.to_string(),
        };
        let extent = match (self.length, self.min, self.max) {
            (Some(l), None, None) => Extent::Length(l),
            (None, Some(lo), Some(hi)) => {
                Extent::Span(Interval::new(lo, hi).map_err(|e| invalid(&e.to_string()))?)
            }
            (None, None, None) => return Err(invalid("needs either `length` or `min` and `max`")),
            (Some(_), _, _) => return Err(invalid("give either `length` or `min`/`max`, not both")),
            _ => return Err(invalid("`min` and `max` must be given together")),
        };
        ServiceRequirement::new(self.name.clone(), extent, self.priority)
    }
}

impl SlaRequestFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidRequest(e.to_string()))
    }

    pub fn to_request(&self) -> Result<SlaRequest> {
        let services = self
            .services
            .iter()
            .map(ServiceEntry::to_requirement)
            .collect::<Result<Vec<_>>>()?;
        SlaRequest::new(services, self.providers)
    }

    pub fn market(&self) -> Result<MarketModel> {
        match self.market.and_then(|m| m.fixed_length) {
            Some(v) => MarketModel::fixed_length(v),
            None => Ok(MarketModel::default()),
        }
    }
}

impl From<&SlaRequest> for SlaRequestFile {
    fn from(r: &SlaRequest) -> Self {
        let services = r
            .services()
            .iter()
            .map(|s| {
                let (length, min, max) = match s.extent {
                    Extent::Length(l) => (Some(l), None, None),
                    Extent::Span(i) => (None, Some(i.low()), Some(i.high())),
                };
                ServiceEntry {
                    name: s.name.clone(),
                    length,
                    min,
                    max,
                    priority: s.priority,
                }
            })
            .collect();
        SlaRequestFile {
            providers: r.providers(),
            services,
            market: None,
        }
    }
}
