//! Workload forecasting: pluggable models and the one-step-ahead reduction.
//!
//! A [`Forecaster`] turns an l-point history into an f-point forecast; the
//! estimator function `phi` then reduces the forecast to the single scalar
//! the planning loops consume. Forecasts are clamped to be non-negative,
//! and every model is a pure function of its inputs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::{window_at, TimeSeries, Window};

/// Everything a model may look at when forecasting.
///
/// `future` carries the realized continuation when the caller is driving
/// from a recorded trace; only the test-oriented perfect-oracle model reads
/// it, real models must ignore it.
#[derive(Debug, Clone, Copy)]
pub struct ForecastInput<'a> {
    pub history: &'a [f64],
    pub horizon: usize,
    pub future: Option<&'a [f64]>,
}

/// An f-step-ahead forecast anchored at history index `origin`.
#[derive(Debug, Clone, PartialEq)]
pub struct Forecast {
    pub values: Vec<f64>,
    pub origin: usize,
}

/// A deterministic forecasting model.
pub trait Forecaster: Send + Sync + fmt::Debug {
    fn id(&self) -> &str;

    /// Minimum history length the model can fit on.
    fn min_history(&self) -> usize;

    fn forecast(&self, input: &ForecastInput<'_>) -> Result<Vec<f64>>;
}

/// Runs a forecaster over a plain history (no realized future available).
pub fn predict(fc: &dyn Forecaster, history: &[f64], horizon: usize) -> Result<Forecast> {
    predict_with(
        fc,
        ForecastInput {
            history,
            horizon,
            future: None,
        },
    )
}

/// Runs a forecaster, validating the contract: enough history, horizon at
/// least 1, output of exactly `horizon` non-negative values.
pub fn predict_with(fc: &dyn Forecaster, input: ForecastInput<'_>) -> Result<Forecast> {
    if input.horizon == 0 {
        return Err(Error::Domain("forecast horizon must be at least 1".into()));
    }
    if input.history.len() < fc.min_history() {
        return Err(Error::InsufficientData {
            required: fc.min_history(),
            actual: input.history.len(),
        });
    }
    let mut values = fc.forecast(&input)?;
    if values.len() != input.horizon {
        return Err(Error::Domain(format!(
            "model {} returned {} values for horizon {}",
            fc.id(),
            values.len(),
            input.horizon
        )));
    }
    for v in &mut values {
        if !v.is_finite() {
            *v = 0.0;
        } else if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(Forecast {
        values,
        origin: input.history.len().saturating_sub(1),
    })
}

/// Repeats the last observed season verbatim.
#[derive(Debug, Clone)]
pub struct SeasonalNaive {
    period: usize,
}

impl SeasonalNaive {
    pub fn new(period: usize) -> Result<SeasonalNaive> {
        if period == 0 {
            return Err(Error::Config("seasonal period must be positive".into()));
        }
        Ok(SeasonalNaive { period })
    }
}

impl Forecaster for SeasonalNaive {
    fn id(&self) -> &str {
        "seasonal_naive"
    }

    fn min_history(&self) -> usize {
        self.period
    }

    fn forecast(&self, input: &ForecastInput<'_>) -> Result<Vec<f64>> {
        let n = input.history.len();
        let season = &input.history[n - self.period..];
        Ok((0..input.horizon)
            .map(|j| season[j % self.period])
            .collect())
    }
}

/// Additive Holt-Winters (triple exponential smoothing) with the smoothing
/// constants fitted by grid search over in-sample one-step RMSE.
///
/// The grid covers alpha, beta, gamma in {0.05, 0.20, ..., 0.95}, which is
/// coarse but deterministic and dependency-free.
#[derive(Debug, Clone)]
pub struct HoltWinters {
    period: usize,
}

const HW_GRID: [f64; 7] = [0.05, 0.20, 0.35, 0.50, 0.65, 0.80, 0.95];

impl HoltWinters {
    pub fn new(period: usize) -> Result<HoltWinters> {
        if period < 2 {
            return Err(Error::Config(
                "Holt-Winters period must be at least 2".into(),
            ));
        }
        Ok(HoltWinters { period })
    }

    /// One smoothing pass; returns the end state and in-sample RMSE.
    fn run(&self, y: &[f64], alpha: f64, beta: f64, gamma: f64) -> HwState {
        let m = self.period;
        let season1 = &y[..m];
        let season2 = &y[m..2 * m];
        let mean1: f64 = season1.iter().sum::<f64>() / m as f64;
        let mean2: f64 = season2.iter().sum::<f64>() / m as f64;
        let trend0 = (mean2 - mean1) / m as f64;
        // Level positioned just before the first observation, so the linear
        // part alone reproduces a pure trend exactly.
        let level0 = mean1 - trend0 * ((m as f64 - 1.0) / 2.0 + 1.0);
        let mut seasonal: Vec<f64> = (0..m)
            .map(|i| {
                let a = y[i] - (level0 + (i as f64 + 1.0) * trend0);
                let b = y[m + i] - (level0 + ((m + i) as f64 + 1.0) * trend0);
                (a + b) / 2.0
            })
            .collect();

        let mut level = level0;
        let mut trend = trend0;
        let mut sq_err = 0.0;
        for (t, &obs) in y.iter().enumerate() {
            let s = seasonal[t % m];
            let fitted = level + trend + s;
            sq_err += (fitted - obs) * (fitted - obs);
            let new_level = alpha * (obs - s) + (1.0 - alpha) * (level + trend);
            let new_trend = beta * (new_level - level) + (1.0 - beta) * trend;
            seasonal[t % m] = gamma * (obs - new_level) + (1.0 - gamma) * s;
            level = new_level;
            trend = new_trend;
        }
        HwState {
            level,
            trend,
            seasonal,
            rmse: (sq_err / y.len() as f64).sqrt(),
        }
    }
}

struct HwState {
    level: f64,
    trend: f64,
    seasonal: Vec<f64>,
    rmse: f64,
}

impl Forecaster for HoltWinters {
    fn id(&self) -> &str {
        "holt_winters"
    }

    fn min_history(&self) -> usize {
        2 * self.period
    }

    fn forecast(&self, input: &ForecastInput<'_>) -> Result<Vec<f64>> {
        let y = input.history;
        let mut best: Option<HwState> = None;
        for &alpha in &HW_GRID {
            for &beta in &HW_GRID {
                for &gamma in &HW_GRID {
                    let state = self.run(y, alpha, beta, gamma);
                    let better = match &best {
                        None => true,
                        Some(b) => state.rmse < b.rmse,
                    };
                    if better {
                        best = Some(state);
                    }
                }
            }
        }
        let state = best.expect("grid is non-empty");
        let n = y.len();
        let m = self.period;
        Ok((1..=input.horizon)
            .map(|h| state.level + h as f64 * state.trend + state.seasonal[(n - 1 + h) % m])
            .collect())
    }
}

/// Flat forecast at a rolling percentile of the recent window. A crude but
/// robust baseline.
#[derive(Debug, Clone)]
pub struct MovingPercentile {
    window: usize,
    percentile: f64,
}

impl MovingPercentile {
    pub fn new(window: usize, percentile: f64) -> Result<MovingPercentile> {
        if window == 0 {
            return Err(Error::Config("window must be positive".into()));
        }
        if !(percentile > 0.0 && percentile <= 100.0) {
            return Err(Error::Config(format!(
                "percentile must be in (0, 100], got {percentile}"
            )));
        }
        Ok(MovingPercentile { window, percentile })
    }
}

impl Forecaster for MovingPercentile {
    fn id(&self) -> &str {
        "moving_percentile"
    }

    fn min_history(&self) -> usize {
        self.window
    }

    fn forecast(&self, input: &ForecastInput<'_>) -> Result<Vec<f64>> {
        let n = input.history.len();
        let tail = &input.history[n - self.window..];
        let value = nearest_rank(tail, self.percentile);
        Ok(vec![value; input.horizon])
    }
}

/// Test-only model that returns the realized future. It threads through
/// every loop, enabling forecast-error-free system runs.
#[derive(Debug, Clone, Default)]
pub struct PerfectOracle;

impl Forecaster for PerfectOracle {
    fn id(&self) -> &str {
        "perfect_oracle"
    }

    fn min_history(&self) -> usize {
        0
    }

    fn forecast(&self, input: &ForecastInput<'_>) -> Result<Vec<f64>> {
        let future = input.future.ok_or_else(|| {
            Error::Domain("perfect_oracle needs the realized future; drive it from a trace".into())
        })?;
        if future.len() < input.horizon {
            return Err(Error::InsufficientData {
                required: input.horizon,
                actual: future.len(),
            });
        }
        Ok(future[..input.horizon].to_vec())
    }
}

/// The reduction from an f-step forecast to the scalar used for planning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum EstimatorFn {
    Max,
    Mean,
    Median,
    /// Nearest-rank percentile, `p` in (0, 100].
    Percentile(f64),
}

impl EstimatorFn {
    pub fn validate(&self) -> Result<()> {
        if let EstimatorFn::Percentile(p) = self {
            if !(*p > 0.0 && *p <= 100.0) {
                return Err(Error::Config(format!(
                    "percentile must be in (0, 100], got {p}"
                )));
            }
        }
        Ok(())
    }

    pub fn apply(&self, values: &[f64]) -> Result<f64> {
        if values.is_empty() {
            return Err(Error::Domain(
                "estimator applied to an empty forecast".into(),
            ));
        }
        Ok(match self {
            EstimatorFn::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            EstimatorFn::Mean => values.iter().sum::<f64>() / values.len() as f64,
            EstimatorFn::Median => {
                let mut sorted = values.to_vec();
                sorted.sort_by(f64::total_cmp);
                let n = sorted.len();
                if n % 2 == 1 {
                    sorted[n / 2]
                } else {
                    (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
                }
            }
            EstimatorFn::Percentile(p) => nearest_rank(values, *p),
        })
    }
}

impl fmt::Display for EstimatorFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimatorFn::Max => f.write_str("max"),
            EstimatorFn::Mean => f.write_str("mean"),
            EstimatorFn::Median => f.write_str("median"),
            EstimatorFn::Percentile(p) => write!(f, "p{p}"),
        }
    }
}

impl FromStr for EstimatorFn {
    type Err = Error;

    fn from_str(s: &str) -> Result<EstimatorFn> {
        let phi = match s {
            "max" => EstimatorFn::Max,
            "mean" => EstimatorFn::Mean,
            "median" => EstimatorFn::Median,
            _ => {
                let p = s
                    .strip_prefix('p')
                    .and_then(|rest| rest.parse::<f64>().ok())
                    .ok_or_else(|| {
                        Error::Config(format!(
                            "unknown estimator {s:?}; expected max, mean, median, or p<percentile>"
                        ))
                    })?;
                EstimatorFn::Percentile(p)
            }
        };
        phi.validate()?;
        Ok(phi)
    }
}

impl TryFrom<String> for EstimatorFn {
    type Error = Error;
    fn try_from(s: String) -> Result<EstimatorFn> {
        s.parse()
    }
}

impl From<EstimatorFn> for String {
    fn from(phi: EstimatorFn) -> String {
        phi.to_string()
    }
}

/// Nearest-rank percentile: with values sorted ascending, the value at rank
/// `ceil(p/100 * n)`. `p = 100` is exactly the maximum.
fn nearest_rank(values: &[f64], p: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let rank = ((p / 100.0) * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

/// Reduces a forecast to the one-step-ahead workload scalar.
pub fn estimate_one_step(forecast: &Forecast, phi: EstimatorFn) -> Result<f64> {
    phi.apply(&forecast.values)
}

/// Root-mean-square error between two equal-length sequences.
pub fn rmse(predicted: &[f64], actual: &[f64]) -> Result<f64> {
    if predicted.len() != actual.len() || predicted.is_empty() {
        return Err(Error::Domain(format!(
            "rmse needs equal non-empty lengths, got {} and {}",
            predicted.len(),
            actual.len()
        )));
    }
    let sq: f64 = predicted
        .iter()
        .zip(actual)
        .map(|(p, a)| (p - a) * (p - a))
        .sum();
    Ok((sq / predicted.len() as f64).sqrt())
}

/// One evaluated window position.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord {
    pub window_index: usize,
    pub omega_hat: f64,
    /// Maximum of the realized future values in the window.
    pub actual_max: u64,
    /// RMSE of the forecast against the realized future.
    pub rmse: f64,
}

/// Slides a window over the series, forecasting each position and recording
/// the estimate, the realized maximum, and the forecast RMSE.
pub fn rolling_evaluate(
    series: &TimeSeries,
    fc: &dyn Forecaster,
    win: &Window,
    phi: EstimatorFn,
) -> Result<Vec<EvalRecord>> {
    let needed = win.lookback + win.horizon;
    if series.len() < needed {
        return Err(Error::InsufficientData {
            required: needed,
            actual: series.len(),
        });
    }
    let as_f64 = series.to_f64();
    let mut records = Vec::new();
    let mut t = win.lookback - 1;
    let mut index = 0;
    while t + win.horizon < series.len() {
        let (_, future_raw) = window_at(series, t, win)?;
        let history = &as_f64[t + 1 - win.lookback..=t];
        let future = &as_f64[t + 1..=t + win.horizon];
        let forecast = predict_with(
            fc,
            ForecastInput {
                history,
                horizon: win.horizon,
                future: Some(future),
            },
        )?;
        records.push(EvalRecord {
            window_index: index,
            omega_hat: estimate_one_step(&forecast, phi)?,
            actual_max: *future_raw.iter().max().expect("horizon >= 1"),
            rmse: rmse(&forecast.values, future)?,
        });
        index += 1;
        t += win.slide;
    }
    Ok(records)
}

/// Per-row winner counts: for each row, the candidate with the smallest
/// absolute error gets one point (first listed wins ties). This is the
/// counting rule behind best-estimation / best-allocation comparisons.
pub fn count_winners(abs_errors: &[Vec<f64>]) -> Vec<usize> {
    let mut wins = vec![0usize; abs_errors.len()];
    if abs_errors.is_empty() {
        return wins;
    }
    let rows = abs_errors[0].len();
    for row in 0..rows {
        let mut best = 0;
        for (i, errs) in abs_errors.iter().enumerate() {
            if errs[row] < abs_errors[best][row] {
                best = i;
            }
        }
        wins[best] += 1;
    }
    wins
}
