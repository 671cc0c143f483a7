//! Stateless HTTP/JSON facade over the forecasting toolkit.
//!
//! | method | path            | body     | response             |
//! |--------|-----------------|----------|----------------------|
//! | POST   | `/v1/forecast`  | envelope | `ForecastReport`     |
//! | POST   | `/v1/optimize`  | envelope | `OptimizationResult` |
//! | POST   | `/v1/simulate`  | envelope | `SimulationOutcome`  |
//! | GET    | `/v1/trendlines`| none     | both reference lines |
//!
//! The envelope is an SLA request document (`providers`, `services`,
//! optional `market`) plus operation options: `threshold`, `step`,
//! `experiments`, `seed`, `providers_cap`, `curve`, `landscape`, and optional
//! `probability_line` / `negotiation_line` trend-line overrides.
//!
//! Malformed bodies get 400 with the offending field path, semantically
//! invalid requests get 422 and simulations above the experiment cap get 413.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, State};
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::sync::Semaphore;
use tower_http::cors::{Any, CorsLayer};

use slafc_core::forecast::{combination_landscape, forecast, ForecastReport};
use slafc_core::market_sim::{run_first_match_experiments, SimulationConfig, SimulationOutcome};
use slafc_core::optimizer::{optimize, OptimizationResult, OptimizerOptions, DEFAULT_STEP, DEFAULT_THRESHOLD};
use slafc_core::reference::{match_probability_line, negotiation_range_line};
use slafc_core::regression::TrendLine;
use slafc_core::request::{MarketOverrides, ServiceEntry, SlaRequestFile};
use slafc_core::{Interval, SlaRequest};

pub const DEFAULT_EXPERIMENTS: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_PROVIDERS_CAP: u64 = 1000;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Largest `experiments` accepted by `/v1/simulate`.
    pub max_experiments: u64,
    /// Threads shared by all running simulations.
    pub simulation_workers: usize,
    /// Simulations allowed to run at once; later ones wait.
    pub concurrent_simulations: usize,
    /// Allowed browser origin; `*` allows any, `None` disables CORS headers.
    pub cors_origin: Option<String>,
    pub max_body_bytes: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
        ServiceConfig {
            max_experiments: 10_000_000,
            simulation_workers: (cores / 2).max(1),
            concurrent_simulations: 2,
            cors_origin: Some("http://localhost:5173".into()),
            max_body_bytes: 256 * 1024,
        }
    }
}

impl ServiceConfig {
    /// Defaults overridden by `SLAFC_CORS_ORIGIN`, `SLAFC_MAX_EXPERIMENTS`,
    /// `SLAFC_SIM_WORKERS` and `SLAFC_SIM_CONCURRENCY`.
    pub fn from_env() -> Result<Self, String> {
        fn var<T: std::str::FromStr>(name: &str) -> Result<Option<T>, String> {
            match std::env::var(name) {
                Ok(v) => v.parse().map(Some).map_err(|_| format!("{name}: cannot parse `{v}`")),
                Err(_) => Ok(None),
            }
        }
        let mut config = ServiceConfig::default();
        if let Ok(origin) = std::env::var("SLAFC_CORS_ORIGIN") {
            config.cors_origin = (!origin.is_empty()).then_some(origin);
        }
        if let Some(v) = var("SLAFC_MAX_EXPERIMENTS")? {
            config.max_experiments = v;
        }
        if let Some(v) = var::<usize>("SLAFC_SIM_WORKERS")? {
            config.simulation_workers = v.max(1);
        }
        if let Some(v) = var::<usize>("SLAFC_SIM_CONCURRENCY")? {
            config.concurrent_simulations = v.max(1);
        }
        Ok(config)
    }
}

#[derive(Clone)]
struct AppState {
    max_experiments: u64,
    simulation_slots: Arc<Semaphore>,
    pool: Arc<rayon::ThreadPool>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Envelope {
    pub providers: u64,
    pub services: Vec<ServiceEntry>,
    #[serde(default)]
    pub market: Option<MarketOverrides>,
    #[serde(default)]
    pub threshold: Option<f64>,
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default)]
    pub experiments: Option<u64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub providers_cap: Option<u64>,
    /// Include the providers-vs-probability curve in forecasts.
    #[serde(default)]
    pub curve: bool,
    /// Include the combination landscape in forecasts.
    #[serde(default)]
    pub landscape: bool,
    #[serde(default)]
    pub probability_line: Option<TrendLine>,
    #[serde(default)]
    pub negotiation_line: Option<TrendLine>,
}

impl Envelope {
    fn file(&self) -> SlaRequestFile {
        SlaRequestFile {
            providers: self.providers,
            services: self.services.clone(),
            market: self.market,
        }
    }

    fn request(&self) -> Result<SlaRequest, ApiError> {
        Ok(self.file().to_request()?)
    }

    fn probability_line(&self) -> TrendLine {
        self.probability_line.unwrap_or_else(match_probability_line)
    }
}

#[derive(Debug)]
pub enum ApiError {
    Malformed { path: String, message: String },
    Invalid(String),
    TooLarge(String),
    Internal(String),
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<&'a str>,
}

impl From<slafc_core::Error> for ApiError {
    fn from(e: slafc_core::Error) -> Self {
        ApiError::Invalid(e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, message, path) = match &self {
            ApiError::Malformed { path, message } => (StatusCode::BAD_REQUEST, message, Some(path.as_str())),
            ApiError::Invalid(m) => (StatusCode::UNPROCESSABLE_ENTITY, m, None),
            ApiError::TooLarge(m) => (StatusCode::PAYLOAD_TOO_LARGE, m, None),
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, m, None),
        };
        (status, Json(ErrorBody { error: message, path })).into_response()
    }
}

fn parse_envelope(body: &[u8]) -> Result<Envelope, ApiError> {
    let mut de = serde_json::Deserializer::from_slice(body);
    let envelope: Envelope = serde_path_to_error::deserialize(&mut de).map_err(|e| ApiError::Malformed {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    de.end().map_err(|e| ApiError::Malformed {
        path: ".".into(),
        message: e.to_string(),
    })?;
    Ok(envelope)
}

pub fn router(config: &ServiceConfig) -> Router {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.simulation_workers.max(1))
        .thread_name(|i| format!("slafc-sim-{i}"))
        .build()
        .expect("simulation thread pool");
    let state = AppState {
        max_experiments: config.max_experiments,
        simulation_slots: Arc::new(Semaphore::new(config.concurrent_simulations.max(1))),
        pool: Arc::new(pool),
    };
    let mut app = Router::new()
        .route("/v1/forecast", post(forecast_handler))
        .route("/v1/optimize", post(optimize_handler))
        .route("/v1/simulate", post(simulate_handler))
        .route("/v1/trendlines", get(trendlines_handler))
        .layer(DefaultBodyLimit::max(config.max_body_bytes))
        .with_state(state);
    if let Some(origin) = &config.cors_origin {
        let cors = CorsLayer::new().allow_methods(Any).allow_headers(Any);
        let cors = match origin.as_str() {
            "*" => cors.allow_origin(Any),
            o => cors.allow_origin(HeaderValue::from_str(o).expect("CORS origin is a valid header value")),
        };
        app = app.layer(cors);
    }
    app
}

async fn forecast_handler(body: Bytes) -> Result<Json<ForecastReport>, ApiError> {
    let env = parse_envelope(&body)?;
    let request = env.request()?;
    let prob_line = env.probability_line();
    let log_line = env.negotiation_line.unwrap_or_else(negotiation_range_line);
    let mut report = forecast(&request, &prob_line, &log_line)?;
    if !env.curve {
        report.curve.clear();
    }
    if env.landscape {
        report.landscape = Some(combination_landscape(&request, &prob_line)?);
    }
    Ok(Json(report))
}

async fn optimize_handler(body: Bytes) -> Result<Json<OptimizationResult>, ApiError> {
    let env = parse_envelope(&body)?;
    let request = env.request()?;
    let options = OptimizerOptions {
        threshold: env.threshold.unwrap_or(DEFAULT_THRESHOLD),
        step: env.step.unwrap_or(DEFAULT_STEP),
    };
    Ok(Json(optimize(&request, options, &env.probability_line())?))
}

async fn simulate_handler(State(state): State<AppState>, body: Bytes) -> Result<Json<SimulationOutcome>, ApiError> {
    let env = parse_envelope(&body)?;
    let experiments = env.experiments.unwrap_or(DEFAULT_EXPERIMENTS);
    if experiments > state.max_experiments {
        return Err(ApiError::TooLarge(format!(
            "experiments {experiments} exceeds the limit of {}",
            state.max_experiments
        )));
    }
    let file = env.file();
    let request = file.to_request()?;
    let consumer = request
        .services()
        .iter()
        .map(|s| s.extent.interval())
        .collect::<slafc_core::Result<Vec<Interval>>>()?;
    let config = SimulationConfig {
        market: file.market()?,
        max_providers_per_experiment: env.providers_cap.unwrap_or(DEFAULT_PROVIDERS_CAP),
        ..SimulationConfig::new(experiments, env.seed.unwrap_or(DEFAULT_SEED))
    };
    config.validate()?;

    let _permit = state
        .simulation_slots
        .acquire()
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?;
    let pool = state.pool.clone();
    let outcome = tokio::task::spawn_blocking(move || pool.install(|| run_first_match_experiments(&consumer, &config)))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))??;
    Ok(Json(outcome))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trendlines {
    pub probability_line: TrendLine,
    pub negotiation_line: TrendLine,
}

async fn trendlines_handler() -> Json<Trendlines> {
    Json(Trendlines {
        probability_line: match_probability_line(),
        negotiation_line: negotiation_range_line(),
    })
}
