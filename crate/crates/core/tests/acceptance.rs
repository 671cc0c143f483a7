//! Acceptance suite. Each test covers one criterion and prints one
//! `[PASS]`/`[FAIL]` summary line (plus per-item detail lines).
//!
//! Run with `cargo test -p slafc-core --test acceptance -- --nocapture`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use slafc_core::forecast::{
    at_least_one, binomial_pmf, combination_landscape, forecast, min_providers, sla_probability,
    MinProviders, DEFAULT_PROVIDER_CAP,
};
use slafc_core::market_sim::{
    measure_negotiation_range, run_first_match_experiments, SimulationConfig,
};
use slafc_core::optimizer::{optimize, OptimizerOptions};
use slafc_core::reference::{
    self, match_probability_line, negotiation_range_line, MATCH_PROBABILITY, NEGOTIATION_RANGE,
    SWEEP_LENGTHS,
};
use slafc_core::regression::{fit, DataSeries, Transform};
use slafc_core::{Interval, ServiceRequirement, SlaRequest};

/// Seed fixed for every simulated criterion.
const SEED: u64 = 42;
const FULL_EXPERIMENTS: u64 = 1_000_000;

const A1_TOL: f64 = 0.005;
const A2_TOL: f64 = 0.3;
const A3_SLOPE_TOL: f64 = 1e-6;
const A3_INTERCEPT_TOL: f64 = 1e-5;
const A3_R2_TOL: f64 = 1e-6;
const A3_SSE_TOL: f64 = 1e-8;
const A3_LOG_SLOPE_TOL: f64 = 0.01;
const A3_LOG_INTERCEPT_TOL: f64 = 0.01;
const A3_LOG_R2_TOL: f64 = 0.0005;
const A6_EXPERIMENTS: u64 = 100_000;
const A6_MODEL_ALLOWANCE: f64 = 0.02;
const A6_SIGMAS: f64 = 3.0;
const A7_SIGMAS: f64 = 3.0;
const A7_MIN_PROVIDER_CASES: usize = 10_000;
const IDENTITY_TOL: f64 = 1e-9;

struct Report {
    id: &'static str,
    failures: Vec<String>,
}

impl Report {
    fn new(id: &'static str) -> Self {
        Report {
            id,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, label: impl AsRef<str>, ok: bool) {
        let label = label.as_ref();
        println!("    {} {label}", if ok { "ok  " } else { "FAIL" });
        if !ok {
            self.failures.push(label.to_string());
        }
    }

    fn within(&mut self, label: &str, got: f64, want: f64, tol: f64) {
        let delta = (got - want).abs();
        self.check(
            format!("{label}: got {got:.8} want {want} |Δ|={delta:.3e} tol={tol:.1e}"),
            delta <= tol,
        );
    }

    fn finish(self, title: &str) {
        let status = if self.failures.is_empty() { "PASS" } else { "FAIL" };
        println!("[{status}] {} {title}", self.id);
        assert!(
            self.failures.is_empty(),
            "{} failed:\n  {}",
            self.id,
            self.failures.join("\n  ")
        );
    }
}

fn request(specs: &[(&str, f64, u32)], providers: u64) -> SlaRequest {
    let services = specs
        .iter()
        .map(|&(n, l, p)| ServiceRequirement::with_length(n, l, p).unwrap())
        .collect();
    SlaRequest::new(services, providers).unwrap()
}

fn examples_request() -> SlaRequest {
    request(&[("A", 20.0, 2), ("B", 30.0, 1), ("C", 10.0, 3)], 20)
}

fn use_case_request() -> SlaRequest {
    request(
        &[("A", 20.0, 1), ("B", 30.0, 2), ("C", 20.0, 3), ("D", 70.0, 4), ("E", 80.0, 5)],
        20,
    )
}

#[test]
fn a1_match_probability_table() {
    let mut r = Report::new("A1");
    let config = SimulationConfig::new(FULL_EXPERIMENTS, SEED);
    for (&length, &paper) in SWEEP_LENGTHS.iter().zip(&MATCH_PROBABILITY) {
        let consumer = Interval::centered(length).unwrap();
        let out = run_first_match_experiments(&[consumer], &config).unwrap();
        r.within(&format!("length {length:>3}"), out.match_probability, paper, A1_TOL);
    }
    r.finish("first-provider match probability per consumer length (10^6 experiments, ±0.5 pp)");
}

#[test]
fn a2_negotiation_range_table() {
    let mut r = Report::new("A2");
    let config = SimulationConfig::new(FULL_EXPERIMENTS, SEED);
    for (&length, &paper) in SWEEP_LENGTHS.iter().zip(&NEGOTIATION_RANGE) {
        let range = measure_negotiation_range(length, &config).unwrap();
        r.within(&format!("length {length:>3}"), range, paper, A2_TOL);
    }
    r.finish("conditional mean negotiation range per consumer length (10^6 experiments, ±0.3)");
}

#[test]
fn a3_regression_golden() {
    let mut r = Report::new("A3");
    let line = fit(&reference::match_probability_series()).unwrap();
    r.within("probability slope", line.slope, 0.00688667, A3_SLOPE_TOL);
    r.within("probability intercept", line.intercept, 0.31133315, A3_INTERCEPT_TOL);
    r.within("probability R²", line.diagnostics.r2, 0.99999347, A3_R2_TOL);
    r.within("probability SSE", line.diagnostics.sse, 2.9333e-6, A3_SSE_TOL);
    let log = fit(&reference::negotiation_range_series()).unwrap();
    r.within("log slope", log.slope, 10.01, A3_LOG_SLOPE_TOL);
    r.within("log intercept", log.intercept, -15.854, A3_LOG_INTERCEPT_TOL);
    r.within("log R²", log.diagnostics.r2, 0.9967, A3_LOG_R2_TOL);
    r.finish("trend-line fits of the published sweep tables");
}

#[test]
fn a4_worked_examples() {
    let mut r = Report::new("A4");
    let prob = match_probability_line();
    let log = negotiation_range_line();

    let p = sla_probability(&[20.0, 30.0, 10.0], &prob).unwrap();
    r.within("three-service SLA probability", p, 0.0884, 1e-4);
    r.within("three-service at-least-one, n=20", at_least_one(p, 20), 0.8429, 5e-4);

    let uc = use_case_request();
    let report = forecast(&uc, &prob, &log).unwrap();
    r.within("use-case SLA probability", report.sla_probability, 0.071423, 5e-5);
    r.within("use-case at-least-one, n=20", report.at_least_one, 0.773, 1e-3);
    r.check(
        format!("use-case min providers for 99%: {:?}", report.min_providers_99),
        report.min_providers_99 == MinProviders::Reached(63),
    );
    r.within("use-case negotiation range total", report.negotiation_range_total, 101.15, 0.05);
    let land = combination_landscape(&uc, &prob).unwrap();
    r.check(format!("landscape entries: {}", land.entries.len()), land.entries.len() == 31);
    r.finish("worked examples: SLA probability, binomial, provider count, ranges, landscape");
}

#[test]
fn a5_optimizer_golden() {
    let mut r = Report::new("A5");
    let prob = match_probability_line();

    let out = optimize(&examples_request(), OptimizerOptions::default(), &prob).unwrap();
    let l = &out.adjusted_lengths;
    r.check(format!("three-service A={} B={}", l["A"], l["B"]), l["A"] == 20.0 && l["B"] == 30.0);
    r.within("three-service C", l["C"], 84.0, 1.0);
    r.check(
        format!("three-service final probability {:.5} > 0.99", out.final_probability),
        out.feasible && out.final_probability > 0.99,
    );

    let out = optimize(&use_case_request(), OptimizerOptions::default(), &prob).unwrap();
    let l = &out.adjusted_lengths;
    r.check(format!("use-case A={} B={}", l["A"], l["B"]), l["A"] == 20.0 && l["B"] == 30.0);
    r.within("use-case C", l["C"], 84.0, 1.0);
    r.check(format!("use-case D={} E={}", l["D"], l["E"]), l["D"] == 100.0 && l["E"] == 100.0);
    r.check(
        format!("use-case final probability {:.5} > 0.99", out.final_probability),
        out.feasible && out.final_probability > 0.99,
    );
    r.finish("priority-ordered interval optimization");
}

#[test]
fn a6_forecast_matches_simulation() {
    let mut r = Report::new("A6");
    let req = examples_request();
    let consumer: Vec<Interval> = req
        .services()
        .iter()
        .map(|s| s.extent.interval().unwrap())
        .collect();
    let config = SimulationConfig::new(A6_EXPERIMENTS, SEED);
    let sim = run_first_match_experiments(&consumer, &config).unwrap();
    let p = sla_probability(&req.lengths(), &match_probability_line()).unwrap();
    for (n, empirical) in sim.cumulative_curve(20) {
        let analytic = at_least_one(p, n);
        let se = (empirical * (1.0 - empirical) / A6_EXPERIMENTS as f64).sqrt();
        let tol = A6_SIGMAS * se + A6_MODEL_ALLOWANCE;
        r.within(&format!("n={n:>2}"), analytic, empirical, tol);
    }
    r.finish("analytical at-least-one curve vs simulated cumulative first matches (10^5 experiments)");
}

#[test]
fn a7_property_suites() {
    let mut r = Report::new("A7");

    // Position independence.
    for length in [10.0, 30.0, 70.0] {
        let placements = [
            ("left", Interval::new(0.0, length).unwrap()),
            ("centre", Interval::centered(length).unwrap()),
            ("right", Interval::new(100.0 - length, 100.0).unwrap()),
        ];
        let est: Vec<(f64, f64)> = placements
            .iter()
            .enumerate()
            .map(|(i, (_, c))| {
                let config = SimulationConfig::new(200_000, SEED + 1 + i as u64);
                let out = run_first_match_experiments(&[*c], &config).unwrap();
                (out.match_probability, out.standard_error())
            })
            .collect();
        let worst = (0..3)
            .flat_map(|a| (a + 1..3).map(move |b| (a, b)))
            .map(|(a, b)| {
                let (pa, sa) = est[a];
                let (pb, sb) = est[b];
                (pa - pb).abs() / (sa * sa + sb * sb).sqrt()
            })
            .fold(0.0, f64::max);
        r.check(
            format!("position independence, length {length}: worst gap {worst:.2}σ ≤ {A7_SIGMAS}σ"),
            worst <= A7_SIGMAS,
        );
    }

    // Determinism across worker counts.
    let consumer = [Interval::centered(20.0).unwrap(), Interval::new(5.0, 15.0).unwrap()];
    let config = SimulationConfig::new(200_000, SEED);
    let runs: Vec<_> = [1, 4, 8]
        .into_iter()
        .map(|threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_first_match_experiments(&consumer, &config).unwrap())
        })
        .collect();
    let identical = runs.windows(2).all(|w| {
        w[0] == w[1]
            && w[0].mean_negotiation_range.to_bits() == w[1].mean_negotiation_range.to_bits()
    });
    r.check("bit-identical outcomes with 1, 4 and 8 worker threads", identical);

    // Iterative provider search against the closed form.
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut mismatches = 0;
    for _ in 0..A7_MIN_PROVIDER_CASES {
        let p: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
        let threshold: f64 = rng.random_range(0.01..0.9999);
        let closed = ((1.0 - threshold).ln() / (1.0 - p).ln()).floor() as u64 + 1;
        let closed = if p == 1.0 { 1 } else { closed };
        let iterative = min_providers(p, threshold, DEFAULT_PROVIDER_CAP).unwrap();
        if iterative != MinProviders::Reached(closed) {
            mismatches += 1;
        }
    }
    r.check(
        format!("min providers: iterative == closed form on {A7_MIN_PROVIDER_CASES} cases ({mismatches} mismatches)"),
        mismatches == 0,
    );

    // Regression identities on the reference tables and random series.
    let mut worst_residual: f64 = 0.0;
    let mut worst_r2_gap: f64 = 0.0;
    let mut series = vec![
        reference::match_probability_series(),
        reference::negotiation_range_series(),
    ];
    for _ in 0..200 {
        let n = rng.random_range(3..40);
        let slope = rng.random_range(-3.0..3.0);
        let pts = (0..n)
            .map(|_| {
                let x: f64 = rng.random_range(1.0..100.0);
                (x, slope * x + rng.random_range(-20.0..20.0))
            })
            .collect();
        let transform = if rng.random::<bool>() { Transform::NaturalLogX } else { Transform::Identity };
        series.push(DataSeries::new(pts, transform));
    }
    for s in &series {
        let d = fit(s).unwrap().diagnostics;
        let scale = s.points.iter().map(|p| p.1.abs()).fold(1.0, f64::max);
        worst_residual = worst_residual.max(d.residual_sum.abs() / scale);
        let sst = d.var_observed * s.points.len() as f64;
        worst_r2_gap = worst_r2_gap.max(((1.0 - d.sse / sst) - d.r2).abs());
    }
    r.check(
        format!("residual sum ≈ 0 (worst relative {worst_residual:.2e} ≤ {IDENTITY_TOL:.0e})"),
        worst_residual <= IDENTITY_TOL,
    );
    r.check(
        format!("1 − SSE/SSt == var ratio (worst gap {worst_r2_gap:.2e} ≤ {IDENTITY_TOL:.0e})"),
        worst_r2_gap <= IDENTITY_TOL,
    );

    // Landscape monotonicity: adding a service never raises the entry.
    let land = combination_landscape(&use_case_request(), &match_probability_line()).unwrap();
    let mut violations = 0;
    for small in &land.entries {
        for big in &land.entries {
            let superset = big.services.len() == small.services.len() + 1
                && small.services.iter().all(|s| big.services.contains(s));
            if superset && big.probability > small.probability {
                violations += 1;
            }
        }
    }
    r.check(format!("landscape monotone under adding services ({violations} violations)"), violations == 0);

    // Binomial normalization.
    let mut worst_norm: f64 = 0.0;
    for n in [1u64, 2, 5, 20, 63, 100] {
        for p in [0.0, 0.001, 0.071423, 0.0884, 0.3, 0.5, 0.9, 0.999, 1.0] {
            let total: f64 = (0..=n).map(|k| binomial_pmf(k, p, n).unwrap()).sum();
            worst_norm = worst_norm.max((total - 1.0).abs());
        }
    }
    r.check(
        format!("binomial PMF sums to 1 (worst |Σ − 1| {worst_norm:.2e} ≤ {IDENTITY_TOL:.0e})"),
        worst_norm <= IDENTITY_TOL,
    );

    r.finish("property suites: position, determinism, provider search, regression, landscape, binomial");
}
