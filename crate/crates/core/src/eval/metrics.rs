//! Normalised negative log-likelihood and relative squared and absolute
//! errors.

use serde::{Deserialize, Serialize};

use crate::dist::Predictive;
use crate::error::{Error, Result};

/// In-sample scale of a training window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalizers {
    pub mean: f64,
    /// Population variance.
    pub variance: f64,
    /// Mean absolute deviation from the mean.
    pub mad: f64,
}

impl Normalizers {
    pub fn from_values(values: &[u64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Data(
                "normalizers need at least one in-sample value".into(),
            ));
        }
        let n = values.len() as f64;
        let mean = values.iter().map(|&v| v as f64).sum::<f64>() / n;
        let variance = values
            .iter()
            .map(|&v| (v as f64 - mean).powi(2))
            .sum::<f64>()
            / n;
        let mad = values.iter().map(|&v| (v as f64 - mean).abs()).sum::<f64>() / n;
        Ok(Self {
            mean,
            variance,
            mad,
        })
    }
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Dimension(format!("{a} forecasts for {b} actuals")));
    }
    if a == 0 {
        return Err(Error::Data("no evaluation cells".into()));
    }
    Ok(())
}

/// Mean squared error divided by the in-sample variance.
pub fn relative_mse(means: &[f64], actuals: &[u64], in_sample: &[u64]) -> Result<f64> {
    check_lengths(means.len(), actuals.len())?;
    let norm = Normalizers::from_values(in_sample)?;
    if norm.variance == 0.0 {
        return Err(Error::Data("in-sample variance is zero".into()));
    }
    let mse = means
        .iter()
        .zip(actuals)
        .map(|(m, &a)| (m - a as f64).powi(2))
        .sum::<f64>()
        / means.len() as f64;
    Ok(mse / norm.variance)
}

/// Mean absolute error divided by the in-sample mean absolute deviation.
pub fn relative_mae(means: &[f64], actuals: &[u64], in_sample: &[u64]) -> Result<f64> {
    check_lengths(means.len(), actuals.len())?;
    let norm = Normalizers::from_values(in_sample)?;
    if norm.mad == 0.0 {
        return Err(Error::Data(
            "in-sample mean absolute deviation is zero".into(),
        ));
    }
    let mae = means
        .iter()
        .zip(actuals)
        .map(|(m, &a)| (m - a as f64).abs())
        .sum::<f64>()
        / means.len() as f64;
    Ok(mae / norm.mad)
}

/// `−(1/n) Σ log p(y)`; infinite when some actual has zero probability.
pub fn normalized_nll(predictives: &[Predictive], actuals: &[u64]) -> Result<f64> {
    check_lengths(predictives.len(), actuals.len())?;
    let total: f64 = predictives
        .iter()
        .zip(actuals)
        .map(|(p, &y)| p.log_prob(y))
        .sum();
    Ok(-total / actuals.len() as f64)
}

/// Scores of one horizon across evaluation cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonMetrics {
    pub horizon: usize,
    pub cells: usize,
    /// Mean negative log-likelihood over cells with positive predicted mass.
    pub nll: f64,
    /// Cells whose actual received zero predicted mass; excluded from `nll`.
    pub zero_mass_cells: usize,
    pub relative_mse: f64,
    pub relative_mae: f64,
    /// Cells dropped from the relative metrics because the training window
    /// had zero variance (MSE) or zero mean absolute deviation (MAE).
    pub mse_excluded: usize,
    pub mae_excluded: usize,
}

impl HorizonMetrics {
    /// Whether every cell received positive predicted mass.
    pub fn nll_is_finite(&self) -> bool {
        self.zero_mass_cells == 0 && self.nll.is_finite()
    }
}

/// Running sums for one horizon.
#[derive(Debug, Clone, Default)]
pub struct HorizonAccumulator {
    cells: usize,
    nll_sum: f64,
    nll_cells: usize,
    zero_mass: usize,
    mse_sum: f64,
    mse_cells: usize,
    mae_sum: f64,
    mae_cells: usize,
}

impl HorizonAccumulator {
    pub fn add(&mut self, predictive: &Predictive, actual: u64, norm: &Normalizers) {
        self.cells += 1;
        let lp = predictive.log_prob(actual);
        if lp.is_finite() {
            self.nll_sum -= lp;
            self.nll_cells += 1;
        } else {
            self.zero_mass += 1;
        }
        let err = predictive.mean() - actual as f64;
        if norm.variance > 0.0 {
            self.mse_sum += err * err / norm.variance;
            self.mse_cells += 1;
        }
        if norm.mad > 0.0 {
            self.mae_sum += err.abs() / norm.mad;
            self.mae_cells += 1;
        }
    }

    pub fn merge(&mut self, other: &Self) {
        self.cells += other.cells;
        self.nll_sum += other.nll_sum;
        self.nll_cells += other.nll_cells;
        self.zero_mass += other.zero_mass;
        self.mse_sum += other.mse_sum;
        self.mse_cells += other.mse_cells;
        self.mae_sum += other.mae_sum;
        self.mae_cells += other.mae_cells;
    }

    pub fn finish(&self, horizon: usize) -> HorizonMetrics {
        let mean = |sum: f64, n: usize| if n == 0 { f64::NAN } else { sum / n as f64 };
        HorizonMetrics {
            horizon,
            cells: self.cells,
            nll: mean(self.nll_sum, self.nll_cells),
            zero_mass_cells: self.zero_mass,
            relative_mse: mean(self.mse_sum, self.mse_cells),
            relative_mae: mean(self.mae_sum, self.mae_cells),
            mse_excluded: self.cells - self.mse_cells,
            mae_excluded: self.cells - self.mae_cells,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub model: String,
    /// Indexed by horizon minus one.
    pub horizons: Vec<HorizonMetrics>,
    pub windows: usize,
    /// Windows on which the forecaster failed; their cells are not scored.
    pub failed_windows: usize,
}

impl MetricsReport {
    pub fn horizon(&self, k: usize) -> Option<&HorizonMetrics> {
        k.checked_sub(1).and_then(|i| self.horizons.get(i))
    }
}
