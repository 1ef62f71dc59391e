use std::path::{Path, PathBuf};

use hnbss::baselines::Smoothing;
use hnbss::eval::{CovariateSpec, GroupMode, SeasonalEncoding, SeriesOverrides, StatsOptions};
use hnbss::laplace::FitOptions;
use hnbss::model::{GlobalParams, HyperBounds, ModelConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BaselineKind {
    Croston,
    Ses,
}

/// Keeps only the last `keep` observed training values of a series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mask {
    pub series: String,
    pub keep: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GroupConfig {
    /// Series fitted together, by id; every series when absent.
    pub series: Option<Vec<String>>,
    pub masks: Vec<Mask>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeasonalConfig {
    pub period: usize,
    #[serde(default = "SeasonalConfig::default_encoding")]
    pub encoding: SeasonalEncoding,
}

impl SeasonalConfig {
    pub fn default_encoding() -> SeasonalEncoding {
        SeasonalEncoding::Indicator
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    pub enabled: Vec<BaselineKind>,
    pub croston_smoothing: f64,
    pub ses_smoothing: Smoothing,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            enabled: vec![BaselineKind::Croston, BaselineKind::Ses],
            croston_smoothing: 0.1,
            ses_smoothing: Smoothing::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateConfig {
    /// First training length; 80% of the periods when absent.
    pub initial_train: Option<usize>,
    pub max_horizon: usize,
}

impl Default for EvaluateConfig {
    fn default() -> Self {
        Self {
            initial_train: None,
            max_horizon: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub n_series: usize,
    pub n_periods: usize,
    pub covariates: CovariateSpec,
    pub global: GlobalParams,
    pub overrides: SeriesOverrides,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            n_series: 24,
            n_periods: 66,
            covariates: CovariateSpec::None,
            global: GlobalParams::midpoints(&HyperBounds::default(), 0),
            overrides: SeriesOverrides::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub output_dir: PathBuf,
    /// Trailing periods to forecast.
    pub horizon: usize,
    pub seed: u64,
    pub workers: usize,
    pub group_mode: GroupMode,
    /// Central posterior mass of reported parameter intervals.
    pub interval_level: f64,
    /// Predictive quantile levels written by `forecast`.
    pub quantiles: Vec<f64>,
    pub group: GroupConfig,
    pub seasonal: Option<SeasonalConfig>,
    pub model: ModelConfig,
    pub fit: FitOptions,
    pub baselines: BaselineConfig,
    pub evaluate: EvaluateConfig,
    pub stats: StatsOptions,
    pub simulate: SimulateConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: None,
            output_dir: PathBuf::from("out"),
            horizon: 0,
            seed: 0,
            workers: 1,
            group_mode: GroupMode::Hierarchical,
            interval_level: 0.95,
            quantiles: vec![0.05, 0.25, 0.5, 0.75, 0.95],
            group: GroupConfig::default(),
            seasonal: None,
            model: ModelConfig::default(),
            fit: FitOptions::default(),
            baselines: BaselineConfig::default(),
            evaluate: EvaluateConfig::default(),
            stats: StatsOptions::default(),
            simulate: SimulateConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if !(self.interval_level > 0.0 && self.interval_level < 1.0) {
            return Err(CliError::Config(format!(
                "interval_level must lie in (0, 1), got {}",
                self.interval_level
            )));
        }
        if let Some(q) = self.quantiles.iter().find(|q| !(**q > 0.0 && **q < 1.0)) {
            return Err(CliError::Config(format!(
                "quantile levels must lie in (0, 1), got {q}"
            )));
        }
        if let Some(s) = &self.seasonal {
            if s.period < 2 {
                return Err(CliError::Config(format!(
                    "seasonal period must be at least 2, got {}",
                    s.period
                )));
            }
        }
        if self.workers == 0 {
            return Err(CliError::Config("workers must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = RunConfig::default();
        let text = c.to_toml().unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), c);
    }

    #[test]
    fn edited_config_round_trips() {
        let mut c = RunConfig::default();
        c.seasonal = Some(SeasonalConfig {
            period: 12,
            encoding: SeasonalEncoding::Fourier,
        });
        c.group.masks.push(Mask {
            series: "a".into(),
            keep: 4,
        });
        c.baselines.ses_smoothing = Smoothing::Fixed(0.3);
        c.model.bounds.tau_mu.upper = 7.25;
        c.simulate.covariates = CovariateSpec::Gaussian { columns: 2 };
        c.simulate.overrides.z = Some(0.1 + 0.2);
        c.input = Some(PathBuf::from("data/sales.csv"));
        let text = c.to_toml().unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), c);
    }

    #[test]
    fn defaults_carry_the_standard_hyperprior_bounds() {
        let c = RunConfig::from_toml("").unwrap();
        let b = c.model.bounds;
        assert_eq!((b.alpha_bar.lower, b.alpha_bar.upper), (0.001, 0.1));
        assert_eq!((b.tau_mu.lower, b.tau_mu.upper), (1.0, 10.0));
        assert_eq!((b.kappa_tau.lower, b.kappa_tau.upper), (5.0, 10.0));
        assert_eq!((b.beta_tau.lower, b.beta_tau.upper), (2.0, 25.0));
        assert_eq!((b.kappa_0tau.lower, b.kappa_0tau.upper), (1.0, 5.0));
        assert_eq!((b.beta_0tau.lower, b.beta_0tau.upper), (1.0, 10.0));
        assert_eq!((b.kappa_theta.lower, b.kappa_theta.upper), (5.0, 10.0));
        assert_eq!((b.beta_theta.lower, b.beta_theta.upper), (2.0, 25.0));
        assert_eq!((b.phi_plus.lower, b.phi_plus.upper), (1.0, 600.0));
        assert_eq!((b.phi_minus.lower, b.phi_minus.upper), (1.0, 50.0));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(RunConfig::from_toml("horizn = 3").is_err());
        assert!(RunConfig::from_toml("interval_level = 1.5").is_err());
        assert!(RunConfig::from_toml("[seasonal]\nperiod = 1").is_err());
    }
}
