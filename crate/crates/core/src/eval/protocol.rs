//! Rolling-origin evaluation: refit on a growing training window and score
//! the periods that follow it.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use log::warn;
use serde::{Deserialize, Serialize};

use super::metrics::{HorizonAccumulator, MetricsReport, Normalizers};
use crate::baselines::{croston, ses, wrap_gaussian, wrap_poisson, Smoothing};
use crate::dist::Predictive;
use crate::error::{Error, Result};
use crate::forecast::predictive;
use crate::laplace::{fit, FitOptions};
use crate::model::{GroupDataset, ModelConfig};

/// Produces predictives for the hidden horizon of a training window.
pub trait Forecaster: Sync {
    fn name(&self) -> String;

    /// One predictive per series and horizon step, indexed `[series][step − 1]`.
    fn forecast(&self, window: &GroupDataset) -> Result<Vec<Vec<Predictive>>>;
}

/// Applies `f` to `0..n` on up to `workers` threads; results keep index order.
pub fn parallel_map<T, F>(n: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = workers.clamp(1, n.max(1));
    if workers == 1 {
        return (0..n).map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..n).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let value = f(i);
                slots.lock().expect("result slots poisoned")[i] = Some(value);
            });
        }
    });
    slots
        .into_inner()
        .expect("result slots poisoned")
        .into_iter()
        .map(|v| v.expect("every index is processed"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub initial_train: usize,
    pub max_horizon: usize,
    /// Threads used for independent evaluation windows.
    pub workers: usize,
    /// Series to score; all when `None`.
    pub series: Option<Vec<usize>>,
}

impl EvalOptions {
    pub fn new(initial_train: usize, max_horizon: usize) -> Self {
        Self {
            initial_train,
            max_horizon,
            workers: 1,
            series: None,
        }
    }
}

/// Training lengths and horizons of the evaluation windows over `periods`
/// periods.
pub fn evaluation_windows(
    periods: usize,
    initial_train: usize,
    max_horizon: usize,
) -> Result<Vec<(usize, usize)>> {
    if initial_train == 0 || initial_train >= periods {
        return Err(Error::Data(format!(
            "initial training length {initial_train} must be between 1 and {}",
            periods.saturating_sub(1)
        )));
    }
    if max_horizon == 0 {
        return Err(Error::Data("maximum horizon must be at least 1".into()));
    }
    Ok((initial_train..periods)
        .map(|n| (n, max_horizon.min(periods - n)))
        .collect())
}

/// Adds the cells of one window to `acc`, indexed by horizon minus one.
/// Normalizers come from each series' observed training values.
pub fn score_window(
    predictives: &[Vec<Predictive>],
    data: &GroupDataset,
    train: usize,
    series: &[usize],
    acc: &mut [HorizonAccumulator],
) -> Result<()> {
    for &l in series {
        let row = predictives
            .get(l)
            .ok_or_else(|| Error::Dimension(format!("no forecasts for series {l}")))?;
        let history = data.series()[l].observed(train);
        let norm = Normalizers::from_values(&history).unwrap_or(Normalizers {
            mean: 0.0,
            variance: 0.0,
            mad: 0.0,
        });
        for (k, p) in row.iter().enumerate().take(acc.len()) {
            let t = train + k;
            if t >= data.n_periods() {
                break;
            }
            if let Some(y) = data.value(l, t) {
                acc[k].add(p, y, &norm);
            }
        }
    }
    Ok(())
}

/// Rolling-origin evaluation over the training periods of `data`: for each
/// training length `n` from `initial_train` to `T − 1`, forecasts
/// `min(max_horizon, T − n)` steps and scores observed actuals. A window on
/// which the forecaster fails is skipped and counted.
pub fn sequential_eval(
    forecaster: &dyn Forecaster,
    data: &GroupDataset,
    options: &EvalOptions,
) -> Result<MetricsReport> {
    let full = if data.horizon() > 0 {
        data.window(data.n_train(), 0)?
    } else {
        data.clone()
    };
    let windows = evaluation_windows(full.n_periods(), options.initial_train, options.max_horizon)?;
    let series: Vec<usize> = match &options.series {
        Some(s) => {
            if let Some(&bad) = s.iter().find(|&&l| l >= full.n_series()) {
                return Err(Error::Dimension(format!(
                    "series {bad} is not in the dataset"
                )));
            }
            s.clone()
        }
        None => (0..full.n_series()).collect(),
    };
    let max_h = options
        .max_horizon
        .min(full.n_periods() - options.initial_train);
    let name = forecaster.name();
    let outcomes = parallel_map(
        windows.len(),
        options.workers,
        |w| -> Result<Vec<HorizonAccumulator>> {
            let (train, h) = windows[w];
            let window = full.window(train, h)?;
            let forecasts = forecaster.forecast(&window)?;
            if forecasts.len() != full.n_series() || forecasts.iter().any(|r| r.len() != h) {
                return Err(Error::Dimension(format!(
                    "forecaster returned the wrong shape for {} series and {h} steps",
                    full.n_series()
                )));
            }
            let mut acc = vec![HorizonAccumulator::default(); h];
            score_window(&forecasts, &full, train, &series, &mut acc)?;
            Ok(acc)
        },
    );
    let mut totals = vec![HorizonAccumulator::default(); max_h];
    let mut failed = 0;
    for (w, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(acc) => {
                for (t, a) in totals.iter_mut().zip(&acc) {
                    t.merge(a);
                }
            }
            Err(e) => {
                warn!(
                    "{name}: window with {} training periods failed: {e}",
                    windows[w].0
                );
                failed += 1;
            }
        }
    }
    Ok(MetricsReport {
        model: name,
        horizons: totals
            .iter()
            .enumerate()
            .map(|(k, a)| a.finish(k + 1))
            .collect(),
        windows: windows.len(),
        failed_windows: failed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupMode {
    /// One joint fit sharing the global level and hyperparameters.
    Hierarchical,
    /// One fit per series.
    Independent,
}

/// Laplace-approximated model fitted on each window.
#[derive(Debug, Clone)]
pub struct HnbssForecaster {
    pub config: ModelConfig,
    pub options: FitOptions,
    pub mode: GroupMode,
    /// Threads for the per-series fits of independent mode.
    pub workers: usize,
}

impl HnbssForecaster {
    pub fn new(config: ModelConfig, mode: GroupMode) -> Self {
        Self {
            config,
            options: FitOptions::default(),
            mode,
            workers: 1,
        }
    }

    fn fit_group(&self, data: &GroupDataset) -> Result<Vec<Vec<Predictive>>> {
        let post = fit(data, &self.config, &self.options)?;
        let set = predictive(&post, data)?;
        Ok((0..data.n_series())
            .map(|l| {
                (1..=data.horizon())
                    .map(|k| Predictive::Zinb(set.get(l, k).expect("cell in range").predictive))
                    .collect()
            })
            .collect())
    }
}

impl Forecaster for HnbssForecaster {
    fn name(&self) -> String {
        match self.mode {
            GroupMode::Hierarchical => "hnbss-hierarchical".into(),
            GroupMode::Independent => "hnbss-independent".into(),
        }
    }

    fn forecast(&self, window: &GroupDataset) -> Result<Vec<Vec<Predictive>>> {
        match self.mode {
            GroupMode::Hierarchical => self.fit_group(window),
            GroupMode::Independent => {
                let rows = parallel_map(window.n_series(), self.workers, |l| {
                    let single = window.select(&[l])?;
                    self.fit_group(&single).map(|mut r| r.remove(0))
                });
                rows.into_iter().collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineMethod {
    Croston { smoothing: f64 },
    Ses { smoothing: Smoothing },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Wrapper {
    Gaussian,
    Poisson,
}

/// Point-forecast baseline wrapped in a predictive distribution; fitted per
/// series on its observed training values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineForecaster {
    pub method: BaselineMethod,
    pub wrapper: Wrapper,
}

impl Forecaster for BaselineForecaster {
    fn name(&self) -> String {
        let method = match self.method {
            BaselineMethod::Croston { .. } => "croston",
            BaselineMethod::Ses { .. } => "ses",
        };
        let wrapper = match self.wrapper {
            Wrapper::Gaussian => "gaussian",
            Wrapper::Poisson => "poisson",
        };
        format!("{method}-{wrapper}")
    }

    fn forecast(&self, window: &GroupDataset) -> Result<Vec<Vec<Predictive>>> {
        window
            .series()
            .iter()
            .map(|s| {
                let y: Vec<f64> = s
                    .observed(window.n_train())
                    .into_iter()
                    .map(|v| v as f64)
                    .collect();
                let pf = match self.method {
                    BaselineMethod::Croston { smoothing } => croston(&y, smoothing)?,
                    BaselineMethod::Ses { smoothing } => ses(&y, smoothing)?,
                };
                let p = match self.wrapper {
                    Wrapper::Gaussian => wrap_gaussian(&pf),
                    Wrapper::Poisson => wrap_poisson(&pf),
                };
                Ok(vec![p; window.horizon()])
            })
            .collect()
    }
}
