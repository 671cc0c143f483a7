//! Ordinary least squares on a single regressor, with the diagnostic suite
//! used to judge the fit: residual sum, SSE, population variances of observed
//! and predicted values, and R².
//!
//! An optional natural-log transform of x turns the concave
//! negotiation-range curve into a straight line.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    #[default]
    Identity,
    NaturalLogX,
}

impl Transform {
    pub fn apply(self, x: f64) -> Result<f64> {
        match self {
            Transform::Identity => Ok(x),
            Transform::NaturalLogX if x > 0.0 => Ok(x.ln()),
            Transform::NaturalLogX => Err(Error::Domain {
                value: x,
                domain: "x > 0 for a log-transformed line",
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSeries {
    pub points: Vec<(f64, f64)>,
    pub transform: Transform,
}

impl DataSeries {
    pub fn new(points: Vec<(f64, f64)>, transform: Transform) -> Self {
        DataSeries { points, transform }
    }

    pub fn from_xy(xs: &[f64], ys: &[f64], transform: Transform) -> Self {
        DataSeries::new(xs.iter().copied().zip(ys.iter().copied()).collect(), transform)
    }

    /// Parses a two-column `x,y` CSV; an optional non-numeric header row and
    /// blank lines are skipped. Errors carry the 1-based line number.
    pub fn parse_csv(text: &str, transform: Transform) -> Result<Self> {
        let mut points = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let parsed = match fields.as_slice() {
                [x, y] => x.parse::<f64>().ok().zip(y.parse::<f64>().ok()),
                _ => None,
            };
            match parsed {
                Some(p) => points.push(p),
                // Header row.
                None if points.is_empty() && fields.len() == 2 && idx == 0 => {}
                None => {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("expected two numeric columns, got `{line}`"),
                    })
                }
            }
        }
        Ok(DataSeries { points, transform })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y\n");
        for (x, y) in &self.points {
            let _ = writeln!(out, "{x},{y}");
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub residual_sum: f64,
    pub sse: f64,
    pub var_observed: f64,
    pub var_predicted: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendLine {
    pub slope: f64,
    pub intercept: f64,
    #[serde(default)]
    pub transform: Transform,
    #[serde(default)]
    pub diagnostics: Diagnostics,
}

impl TrendLine {
    /// `slope · transform(x) + intercept`, unclamped.
    pub fn predict(&self, x: f64) -> Result<f64> {
        let x = self.transform.apply(x)?;
        Ok(self.slope * x + self.intercept)
    }
}

/// Least-squares fit of `y = slope · x' + intercept` where `x'` is the
/// transformed x.
pub fn fit(series: &DataSeries) -> Result<TrendLine> {
    let n = series.points.len();
    if n < 2 {
        return Err(Error::Degenerate(format!("need at least 2 points, got {n}")));
    }
    let xs = series
        .points
        .iter()
        .map(|&(x, _)| series.transform.apply(x))
        .collect::<Result<Vec<_>>>()?;
    let ys: Vec<f64> = series.points.iter().map(|&(_, y)| y).collect();
    if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
        return Err(Error::Degenerate("non-finite value in series".into()));
    }

    let count = n as f64;
    let x_mean = xs.iter().sum::<f64>() / count;
    let y_mean = ys.iter().sum::<f64>() / count;

    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - x_mean) * (y - y_mean))
        .sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all x values are equal".into()));
    }

    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let predicted: Vec<f64> = xs.iter().map(|x| slope * x + intercept).collect();

    let residual_sum = ys.iter().zip(&predicted).map(|(o, p)| o - p).sum();
    let sse = ys.iter().zip(&predicted).map(|(o, p)| (o - p).powi(2)).sum();
    let var_observed = ys.iter().map(|y| (y - y_mean).powi(2)).sum::<f64>() / count;
    let var_predicted = predicted.iter().map(|y| (y - y_mean).powi(2)).sum::<f64>() / count;
    // Constant y: the line explains everything there is to explain.
    let r2 = if var_observed > 0.0 {
        (var_predicted / var_observed).clamp(0.0, 1.0)
    } else {
        1.0
    };

    Ok(TrendLine {
        slope,
        intercept,
        transform: series.transform,
        diagnostics: Diagnostics {
            residual_sum,
            sse,
            var_observed,
            var_predicted,
            r2,
        },
    })
}
