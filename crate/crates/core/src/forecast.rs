//! Zero-inflated negative-binomial predictive distributions over the
//! forecast horizon from a Laplace posterior.

use serde::{Deserialize, Serialize};

use crate::dist::ZinbPredictive;
use crate::error::{Error, Result};
use crate::laplace::LaplacePosterior;
use crate::model::GroupDataset;

/// Relative tolerance below which a negative accumulated variance is treated
/// as rounding and set to zero.
const VARIANCE_TOLERANCE: f64 = 1e-10;

/// Posterior mean and variance of `η̃ = η + xᵀθ` at a horizon period.
pub fn eta_tilde_moments(
    post: &LaplacePosterior,
    series: usize,
    period: usize,
    x: &[f64],
) -> Result<(f64, f64)> {
    let m = post
        .moments()
        .get(series)
        .ok_or_else(|| Error::Dimension(format!("series {series} is not part of the posterior")))?;
    let h = m
        .horizon
        .iter()
        .find(|h| h.period == period)
        .ok_or_else(|| {
            Error::Dimension(format!("period {period} is not in the forecast horizon"))
        })?;
    if x.len() != m.theta_mean.len() {
        return Err(Error::Dimension(format!(
            "{} covariates for {} coefficients",
            x.len(),
            m.theta_mean.len()
        )));
    }
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
    let mean = h.eta_mean + dot(x, &m.theta_mean);
    let quad: f64 = m
        .theta_cov
        .iter()
        .zip(x)
        .map(|(row, xi)| xi * dot(row, x))
        .sum();
    let scale = h.eta_variance.abs() + quad.abs();
    let variance = h.eta_variance + quad + 2.0 * dot(x, &h.eta_theta_cov);
    if variance < 0.0 {
        if variance >= -VARIANCE_TOLERANCE * scale.max(1.0) {
            return Ok((mean, 0.0));
        }
        return Err(Error::Numerical(format!(
            "negative predictive variance {variance:e} for series {series}, period {period}"
        )));
    }
    Ok((mean, variance))
}

/// `E[exp X]` for `X ~ N(m, v)`.
pub fn lognormal_mean(m: f64, v: f64) -> f64 {
    (m + 0.5 * v).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastCell {
    pub series: usize,
    pub period: usize,
    /// Steps ahead of the last training period, starting at 1.
    pub step: usize,
    pub eta_tilde_mean: f64,
    pub eta_tilde_variance: f64,
    pub predictive: ZinbPredictive,
}

impl ForecastCell {
    pub fn quantiles(&self, levels: &[f64]) -> Result<Vec<u64>> {
        levels
            .iter()
            .map(|&q| self.predictive.quantile(q))
            .collect()
    }
}

/// One predictive per series and horizon period, series-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastSet {
    pub n_series: usize,
    pub horizon: usize,
    pub cells: Vec<ForecastCell>,
}

impl ForecastSet {
    pub fn get(&self, series: usize, step: usize) -> Option<&ForecastCell> {
        if step == 0 || step > self.horizon || series >= self.n_series {
            return None;
        }
        self.cells.get(series * self.horizon + step - 1)
    }
}

/// Negative binomial predictive for every horizon cell, with the posterior
/// mean of `exp η̃` as its mean and the modal `α̂`, `ẑ` of the series.
pub fn predictive(post: &LaplacePosterior, data: &GroupDataset) -> Result<ForecastSet> {
    let clamp = post.eta_clamp();
    let mut cells = Vec::with_capacity(data.n_series() * data.horizon());
    for l in 0..data.n_series() {
        let params = &post.mode().series[l];
        for (k, t) in (data.n_train()..data.n_periods()).enumerate() {
            let (m, v) = eta_tilde_moments(post, l, t, data.x(l, t))?;
            let mu = lognormal_mean(m, v).min(clamp.exp());
            cells.push(ForecastCell {
                series: l,
                period: t,
                step: k + 1,
                eta_tilde_mean: m,
                eta_tilde_variance: v,
                predictive: ZinbPredictive::new(mu, params.alpha, params.z)?,
            });
        }
    }
    Ok(ForecastSet {
        n_series: data.n_series(),
        horizon: data.horizon(),
        cells,
    })
}
