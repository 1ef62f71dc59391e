use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One count series on the shared period axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesData {
    pub id: String,
    /// `None` marks a missing observation or a horizon period.
    pub values: Vec<Option<u64>>,
    /// `covariates[t]` is the covariate vector of period `t`; empty rows when
    /// the model has no covariates.
    pub covariates: Vec<Vec<f64>>,
}

impl SeriesData {
    pub fn new(id: impl Into<String>, values: Vec<Option<u64>>) -> Self {
        let covariates = vec![Vec::new(); values.len()];
        Self {
            id: id.into(),
            values,
            covariates,
        }
    }

    pub fn from_counts(id: impl Into<String>, counts: &[u64]) -> Self {
        Self::new(id, counts.iter().map(|&y| Some(y)).collect())
    }

    pub fn with_covariates(mut self, covariates: Vec<Vec<f64>>) -> Self {
        self.covariates = covariates;
        self
    }

    /// Observed values among the first `len` periods.
    pub fn observed(&self, len: usize) -> Vec<u64> {
        self.values[..len.min(self.values.len())]
            .iter()
            .flatten()
            .copied()
            .collect()
    }
}

/// `L` aligned series of `T` periods, the last `horizon` of which are to be
/// forecast. Covariates are known for every period, horizon included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupDataset {
    series: Vec<SeriesData>,
    periods: usize,
    horizon: usize,
    covariate_names: Vec<String>,
}

impl GroupDataset {
    pub fn new(series: Vec<SeriesData>, horizon: usize) -> Result<Self> {
        let first = series
            .first()
            .ok_or_else(|| Error::Data("a dataset needs at least one series".into()))?;
        let periods = first.values.len();
        let n_cov = first.covariates.first().map_or(0, Vec::len);
        if horizon > periods {
            return Err(Error::Data(format!(
                "horizon {horizon} exceeds the {periods} available periods"
            )));
        }
        for s in &series {
            if s.values.len() != periods {
                return Err(Error::Data(format!(
                    "series '{}' has {} periods, expected {periods}",
                    s.id,
                    s.values.len()
                )));
            }
            if s.covariates.len() != periods {
                return Err(Error::Data(format!(
                    "series '{}' has covariates for {} of {periods} periods",
                    s.id,
                    s.covariates.len()
                )));
            }
            if let Some(t) = s.covariates.iter().position(|x| x.len() != n_cov) {
                return Err(Error::Data(format!(
                    "series '{}' period {t}: expected {n_cov} covariates",
                    s.id
                )));
            }
            if let Some(t) = s
                .covariates
                .iter()
                .position(|x| x.iter().any(|v| !v.is_finite()))
            {
                return Err(Error::Data(format!(
                    "series '{}' period {t}: non-finite covariate",
                    s.id
                )));
            }
            if s.values[periods - horizon..].iter().any(Option::is_some) {
                return Err(Error::Data(format!(
                    "series '{}' has values inside the forecast horizon",
                    s.id
                )));
            }
        }
        let covariate_names = (1..=n_cov).map(|j| format!("x{j}")).collect();
        Ok(Self {
            series,
            periods,
            horizon,
            covariate_names,
        })
    }

    pub fn with_covariate_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_covariates() {
            return Err(Error::Data(format!(
                "{} covariate names for {} covariates",
                names.len(),
                self.n_covariates()
            )));
        }
        self.covariate_names = names;
        Ok(self)
    }

    pub fn series(&self) -> &[SeriesData] {
        &self.series
    }

    pub fn n_series(&self) -> usize {
        self.series.len()
    }

    /// Total number of periods `T`, horizon included.
    pub fn n_periods(&self) -> usize {
        self.periods
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Number of training periods `T − h`.
    pub fn n_train(&self) -> usize {
        self.periods - self.horizon
    }

    pub fn n_covariates(&self) -> usize {
        self.covariate_names.len()
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    pub fn value(&self, series: usize, period: usize) -> Option<u64> {
        self.series[series].values[period]
    }

    pub fn x(&self, series: usize, period: usize) -> &[f64] {
        &self.series[series].covariates[period]
    }

    /// Number of observed training cells over all series.
    pub fn n_observed(&self) -> usize {
        self.series
            .iter()
            .map(|s| s.values.iter().flatten().count())
            .sum()
    }

    /// First `train` periods as training data followed by `horizon` forecast
    /// periods whose values are hidden.
    pub fn window(&self, train: usize, horizon: usize) -> Result<Self> {
        let end = train + horizon;
        if train == 0 || end > self.periods {
            return Err(Error::Data(format!(
                "window of {train} training and {horizon} horizon periods does not fit {} periods",
                self.periods
            )));
        }
        let series = self
            .series
            .iter()
            .map(|s| SeriesData {
                id: s.id.clone(),
                values: (0..end)
                    .map(|t| if t < train { s.values[t] } else { None })
                    .collect(),
                covariates: s.covariates[..end].to_vec(),
            })
            .collect();
        let mut out = Self::new(series, horizon)?;
        out.covariate_names = self.covariate_names.clone();
        Ok(out)
    }

    /// Hides every training value of `series` except the last `keep` observed ones.
    pub fn mask_series(&mut self, series: usize, keep: usize) {
        let train = self.n_train();
        let values = &mut self.series[series].values;
        let mut seen = 0;
        for t in (0..train).rev() {
            if values[t].is_some() {
                if seen >= keep {
                    values[t] = None;
                }
                seen += 1;
            }
        }
    }

    /// Subset of series, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let series = indices.iter().map(|&i| self.series[i].clone()).collect();
        let mut out = Self::new(series, self.horizon)?;
        out.covariate_names = self.covariate_names.clone();
        Ok(out)
    }
}
