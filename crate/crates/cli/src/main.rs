//! `slafc`: simulate provider markets, fit trend lines, forecast SLA match
//! probabilities and widen intervals until a match is practically certain.
//!
//! Exit status is 0 on success, 1 on I/O and other runtime failures and 2 on
//! usage or validation errors.

mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use slafc_core::forecast::{combination_landscape, forecast, MinProviders};
use slafc_core::market_sim::{
    run_first_match_experiments, sweep_consumer_lengths, sweep_to_csv, SimulationConfig, SweepRow,
};
use slafc_core::optimizer::{optimize, OptimizerOptions, DEFAULT_STEP, DEFAULT_THRESHOLD};
use slafc_core::reference::{match_probability_line, negotiation_range_line};
use slafc_core::regression::{fit, DataSeries, Transform, TrendLine};
use slafc_core::request::SlaRequestFile;
use slafc_core::{Error, Interval, MarketModel, SlaRequest};

use output::{sig6, Table};

const MATCH_PROBABILITY_FIXTURE: &str = include_str!("../fixtures/match_probability.csv");
const NEGOTIATION_RANGE_FIXTURE: &str = include_str!("../fixtures/negotiation_range.csv");

#[derive(Parser)]
#[command(name = "slafc", version, about = "SLA match probability forecasting toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo market simulation: a length sweep or a full SLA request.
    Simulate(SimulateArgs),
    /// Least-squares trend line through (length, value) pairs.
    Fit(FitArgs),
    /// Analytical match probabilities for an SLA request.
    Forecast(ForecastArgs),
    /// Widen low-priority intervals until a match is practically certain.
    Optimize(OptimizeArgs),
}

#[derive(Args)]
#[command(group(ArgGroup::new("consumer").required(true).args(["lengths", "sla"])))]
struct SimulateArgs {
    /// Single-SLO sweep over centred consumer intervals: `start:end:step`,
    /// a comma-separated list, or one length.
    #[arg(long, value_parser = parse_lengths)]
    lengths: Option<LengthSpec>,
    /// SLA request file; every service becomes one SLO of the consumer.
    #[arg(long)]
    sla: Option<PathBuf>,
    #[arg(long, default_value_t = 1_000_000)]
    experiments: u64,
    #[arg(long, env = "SLAFC_SEED", default_value_t = 42)]
    seed: u64,
    /// Providers contacted per experiment before giving up.
    #[arg(long, default_value_t = 1000)]
    providers_cap: u64,
    /// Give every provider interval this length instead of a uniform one.
    #[arg(long)]
    fixed_length: Option<f64>,
    /// Write the sweep table or first-match histogram as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the full result as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    /// With --sla: write the cumulative first-match curve as CSV.
    #[arg(long, requires = "sla")]
    curve: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fixture {
    /// First-provider match probability per consumer length.
    MatchProbability,
    /// Mean negotiation range per consumer length.
    NegotiationRange,
}

#[derive(Args)]
#[command(group(ArgGroup::new("data").required(true).args(["input", "fixture"])))]
struct FitArgs {
    /// Two-column CSV of x,y pairs (header optional).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Use a bundled reference table instead of --input.
    #[arg(long, value_enum)]
    fixture: Option<Fixture>,
    /// Fit against ln(x).
    #[arg(long)]
    log: bool,
    /// Write the trend line with diagnostics as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ForecastArgs {
    /// SLA request file.
    #[arg(long)]
    sla: PathBuf,
    /// Override the provider count from the request file.
    #[arg(long)]
    providers: Option<u64>,
    /// Match-probability trend line JSON (default: bundled reference line).
    #[arg(long)]
    trendline: Option<PathBuf>,
    /// Negotiation-range trend line JSON, log-transformed (default: bundled).
    #[arg(long)]
    log_trendline: Option<PathBuf>,
    /// Include the probability of every service combination.
    #[arg(long)]
    landscape: bool,
    /// Write the providers-vs-probability curve as CSV.
    #[arg(long)]
    curve: Option<PathBuf>,
    /// Write the report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the JSON report instead of the summary.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct OptimizeArgs {
    /// SLA request file.
    #[arg(long)]
    sla: PathBuf,
    /// Override the provider count from the request file.
    #[arg(long)]
    providers: Option<u64>,
    /// At-least-one probability that must be exceeded.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    /// Length added per widening step.
    #[arg(long, default_value_t = DEFAULT_STEP)]
    step: f64,
    /// Match-probability trend line JSON (default: bundled reference line).
    #[arg(long)]
    trendline: Option<PathBuf>,
    /// Write the result as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the JSON result instead of the summary.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Debug)]
struct LengthSpec(Vec<f64>);

fn parse_lengths(s: &str) -> Result<LengthSpec, String> {
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| format!("`{t}` is not a number"))
    };
    let lengths = match s.split(':').collect::<Vec<_>>().as_slice() {
        [start, end, step] => {
            let (start, end, step) = (num(start)?, num(end)?, num(step)?);
            if step.is_nan() || step <= 0.0 || start > end {
                return Err("expected start:end:step with step > 0 and start <= end".into());
            }
            let count = ((end - start) / step + 1e-9).floor() as u64;
            (0..=count).map(|k| start + k as f64 * step).collect()
        }
        [single] => single.split(',').map(num).collect::<Result<Vec<_>, _>>()?,
        _ => return Err("expected start:end:step or a comma-separated list".into()),
    };
    if let Some(bad) = lengths.iter().find(|&&l| !(l > 0.0 && l <= 100.0)) {
        return Err(format!("length {bad} outside (0, 100]"));
    }
    Ok(LengthSpec(lengths))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Fit(args) => fit_cmd(args),
        Command::Forecast(args) => forecast_cmd(args),
        Command::Optimize(args) => optimize_cmd(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let validation = err.chain().any(|c| c.is::<Error>());
            ExitCode::from(if validation { 2 } else { 1 })
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write(path, &text)
}

fn load_request(path: &Path, providers: Option<u64>) -> Result<(SlaRequest, SlaRequestFile)> {
    let file = SlaRequestFile::parse(&read(path)?).with_context(|| path.display().to_string())?;
    let mut request = file.to_request().with_context(|| path.display().to_string())?;
    if let Some(n) = providers {
        request = request.with_providers(n)?;
    }
    Ok((request, file))
}

fn load_line(path: Option<&Path>, default: TrendLine) -> Result<TrendLine> {
    let Some(path) = path else {
        return Ok(default);
    };
    serde_json::from_str(&read(path)?)
        .map_err(|e| Error::InvalidRequest(format!("trend line: {e}")))
        .with_context(|| path.display().to_string())
}

#[derive(Serialize)]
struct SweepReport<'a> {
    seed: u64,
    experiments: u64,
    providers_cap: u64,
    market: &'a MarketModel,
    rows: &'a [SweepRow],
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let mut config = SimulationConfig {
        max_providers_per_experiment: args.providers_cap,
        ..SimulationConfig::new(args.experiments, args.seed)
    };
    let sla = match &args.sla {
        Some(path) => Some(load_request(path, None)?),
        None => None,
    };
    if let Some((_, file)) = &sla {
        config.market = file.market()?;
    }
    if let Some(v) = args.fixed_length {
        config.market = MarketModel::fixed_length(v)?;
    }
    config.validate()?;

    if let Some((request, _)) = sla {
        let consumer = request
            .services()
            .iter()
            .map(|s| s.extent.interval())
            .collect::<slafc_core::Result<Vec<Interval>>>()?;
        let outcome = run_first_match_experiments(&consumer, &config)?;
        let curve = outcome.cumulative_curve(request.providers());

        println!("experiments             {} (seed {})", outcome.experiments, outcome.seed);
        println!(
            "match probability       {} ± {}",
            sig6(outcome.match_probability),
            sig6(outcome.standard_error())
        );
        println!("mean negotiation range  {}", sig6(outcome.mean_negotiation_range));
        println!("unmatched               {}", outcome.unmatched_count);
        let mut slos = Table::new(["service", "negotiation range"]);
        for (s, r) in request.services().iter().zip(&outcome.per_slo_negotiation_range) {
            slos.row([s.name.clone(), r.map_or("-".into(), sig6)]);
        }
        print!("\n{slos}");
        let mut table = Table::new(["providers", "matched within"]);
        for &(n, p) in &curve {
            table.row([n.to_string(), sig6(p)]);
        }
        print!("\n{table}");

        if let Some(path) = &args.csv {
            write(path, &outcome.to_csv())?;
        }
        if let Some(path) = &args.json {
            write_json(path, &outcome)?;
        }
        if let Some(path) = &args.curve {
            let mut text = String::from("providers,probability\n");
            for (n, p) in curve {
                text.push_str(&format!("{n},{p}\n"));
            }
            write(path, &text)?;
        }
        return Ok(());
    }

    let lengths = args.lengths.map(|l| l.0).unwrap_or_default();
    let rows = sweep_consumer_lengths(&lengths, &config)?;
    let mut table = Table::new(["length", "match probability", "negotiation range"]);
    for r in &rows {
        table.row([sig6(r.length), sig6(r.match_probability), sig6(r.mean_negotiation_range)]);
    }
    println!("experiments {} per length (seed {})\n", config.experiments, config.seed);
    print!("{table}");
    if let Some(path) = &args.csv {
        write(path, &sweep_to_csv(&rows, &config))?;
    }
    if let Some(path) = &args.json {
        write_json(
            path,
            &SweepReport {
                seed: config.seed,
                experiments: config.experiments,
                providers_cap: config.max_providers_per_experiment,
                market: &config.market,
                rows: &rows,
            },
        )?;
    }
    Ok(())
}

fn fit_cmd(args: FitArgs) -> Result<()> {
    let transform = if args.log { Transform::NaturalLogX } else { Transform::Identity };
    let (text, source) = match (&args.input, args.fixture) {
        (Some(path), _) => (read(path)?, path.display().to_string()),
        (None, Some(Fixture::MatchProbability)) => (MATCH_PROBABILITY_FIXTURE.into(), "match-probability".into()),
        (None, Some(Fixture::NegotiationRange)) => (NEGOTIATION_RANGE_FIXTURE.into(), "negotiation-range".into()),
        (None, None) => unreachable!("clap requires one data source"),
    };
    let series = DataSeries::parse_csv(&text, transform).with_context(|| source.clone())?;
    let line = fit(&series).with_context(|| source)?;
    let x = if args.log { "ln(x)" } else { "x" };
    let sign = if line.intercept < 0.0 { '-' } else { '+' };
    println!("y = {} · {x} {sign} {}", sig6(line.slope), sig6(line.intercept.abs()));
    println!("points     {}", series.points.len());
    println!("R²         {}", sig6(line.diagnostics.r2));
    println!("SSE        {}", sig6(line.diagnostics.sse));
    if let Some(path) = &args.out {
        write_json(path, &line)?;
    }
    Ok(())
}

fn forecast_cmd(args: ForecastArgs) -> Result<()> {
    let (request, _) = load_request(&args.sla, args.providers)?;
    let prob_line = load_line(args.trendline.as_deref(), match_probability_line())?;
    let log_line = load_line(args.log_trendline.as_deref(), negotiation_range_line())?;
    let mut report = forecast(&request, &prob_line, &log_line)?;
    if args.landscape {
        report.landscape = Some(combination_landscape(&request, &prob_line)?);
    }

    if let Some(path) = &args.out {
        write_json(path, &report)?;
    }
    if let Some(path) = &args.curve {
        write(path, &report.curve_csv())?;
    }
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
        return Ok(());
    }

    let mut table = Table::new(["service", "length", "priority", "probability", "negotiation range"]);
    for s in request.services() {
        table.row([
            s.name.clone(),
            sig6(s.length()),
            s.priority.to_string(),
            sig6(report.per_service[&s.name]),
            sig6(report.negotiation_ranges[&s.name]),
        ]);
    }
    print!("{table}");
    println!();
    println!("SLA probability            {}", sig6(report.sla_probability));
    println!("at least one of {:<10} {}", report.providers, sig6(report.at_least_one));
    match report.min_providers_99 {
        MinProviders::Reached(n) => println!("providers for > 99%        {n}"),
        MinProviders::Unreachable => println!("providers for > 99%        unreachable"),
    }
    println!("negotiation range total    {}", sig6(report.negotiation_range_total));
    if !report.extrapolated.is_empty() {
        println!(
            "note: {} below the fitted length range; values are extrapolated",
            report.extrapolated.join(", ")
        );
    }
    if let Some(landscape) = &report.landscape {
        let mut table = Table::new(["services", "probability"]);
        for e in &landscape.entries {
            table.row([e.services.join("+"), sig6(e.probability)]);
        }
        print!("\n{table}");
    }
    Ok(())
}

fn optimize_cmd(args: OptimizeArgs) -> Result<()> {
    let (request, _) = load_request(&args.sla, args.providers)?;
    let line = load_line(args.trendline.as_deref(), match_probability_line())?;
    let options = OptimizerOptions {
        threshold: args.threshold,
        step: args.step,
    };
    let result = optimize(&request, options, &line)?;

    if let Some(path) = &args.out {
        write_json(path, &result)?;
    }
    if args.json {
        println!("{}", serde_json::to_string_pretty(&result)?);
        return Ok(());
    }

    let mut table = Table::new(["service", "priority", "requested", "optimized", ""]);
    for s in request.services() {
        let adjusted = result.adjusted_lengths[&s.name];
        let changed = if adjusted != s.length() { "*" } else { "" };
        table.row([
            s.name.clone(),
            s.priority.to_string(),
            sig6(s.length()),
            sig6(adjusted),
            changed.into(),
        ]);
    }
    print!("{table}");
    println!();
    println!("at least one of {:<10} {}", request.providers(), sig6(result.final_probability));
    println!("steps                      {}", result.steps);
    if result.feasible {
        println!("threshold {} exceeded", sig6(args.threshold));
    } else {
        println!("infeasible: every interval covers the market and {} is not exceeded", sig6(args.threshold));
    }
    Ok(())
}
