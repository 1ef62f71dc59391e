//! Posterior mode by quasi-Newton optimisation and a Gaussian approximation
//! around it.

mod hessian;
mod lbfgs;

use std::collections::BTreeMap;

use log::warn;
use serde::{Deserialize, Serialize};

pub use hessian::compute_hessian;
pub use lbfgs::{minimize, LbfgsOptions, LbfgsOutcome};

use crate::error::{Error, Result};
use crate::gmrf::{
    solve_columns_with, sparse_solve_columns, CholeskyFactor, ColumnMoments, SparsePrecision,
};
use crate::model::{
    initialize, GroupDataset, Layout, ModelConfig, Objective, ParameterState, Slot,
};
use lbfgs::inf_norm;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    pub lbfgs: LbfgsOptions,
    /// Step for the finite-difference part of the Hessian.
    pub hessian_step: f64,
    /// First diagonal ridge tried when the Hessian is not positive definite.
    pub initial_ridge: f64,
    /// Damped Newton steps attempted when the quasi-Newton run stops short
    /// of the gradient tolerance.
    pub newton_steps: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            lbfgs: LbfgsOptions::default(),
            hessian_step: 1e-5,
            initial_ridge: 1e-8,
            newton_steps: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub iterations: usize,
    pub evaluations: usize,
    pub newton_steps: usize,
    pub gradient_norm: f64,
    pub converged: bool,
    /// Ridge added to the Hessian diagonal, zero when none was needed.
    pub ridge: f64,
    /// Observations whose linear predictor hit the clamp at the mode.
    pub clamped: usize,
    pub log_posterior: f64,
}

/// Posterior moments of one horizon latent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonMoments {
    pub period: usize,
    pub eta_mean: f64,
    pub eta_variance: f64,
    /// `Cov[η_t, θ_j]` for each covariate.
    pub eta_theta_cov: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesMoments {
    pub mu_mean: f64,
    pub mu_variance: f64,
    pub theta_mean: Vec<f64>,
    pub theta_cov: Vec<Vec<f64>>,
    pub horizon: Vec<HorizonMoments>,
}

/// Gaussian approximation of the posterior in the unconstrained space.
#[derive(Debug, Clone)]
pub struct LaplacePosterior {
    mode: ParameterState,
    mode_vector: Vec<f64>,
    layout: Layout,
    free: Vec<usize>,
    hessian: SparsePrecision,
    factor: CholeskyFactor,
    moments: Vec<SeriesMoments>,
    diagnostics: Diagnostics,
    eta_clamp: f64,
}

impl LaplacePosterior {
    /// Bound on the linear predictor used by the model.
    pub fn eta_clamp(&self) -> f64 {
        self.eta_clamp
    }

    pub fn mode(&self) -> &ParameterState {
        &self.mode
    }

    /// Mode in the free unconstrained coordinates.
    pub fn mode_vector(&self) -> &[f64] {
        &self.mode_vector
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    /// Negative Hessian at the mode (before any ridge).
    pub fn hessian(&self) -> &SparsePrecision {
        &self.hessian
    }

    pub fn moments(&self) -> &[SeriesMoments] {
        &self.moments
    }

    pub fn diagnostics(&self) -> &Diagnostics {
        &self.diagnostics
    }

    fn free_position(&self, slot: Slot) -> Option<usize> {
        let i = self.layout.index(slot)?;
        self.free.binary_search(&i).ok()
    }

    /// Posterior variance of a slot in its unconstrained coordinate; `None`
    /// for fixed or absent slots.
    pub fn variance(&self, slot: Slot) -> Result<Option<f64>> {
        match self.free_position(slot) {
            Some(k) => Ok(Some(self.factor.inverse_column(k)?[k])),
            None => Ok(None),
        }
    }

    /// Central interval of posterior mass `level` for a slot, mapped back to
    /// its constrained scale. Fixed slots give a degenerate interval.
    pub fn interval(&self, slot: Slot, level: f64) -> Result<(f64, f64)> {
        let i = self
            .layout
            .index(slot)
            .ok_or_else(|| Error::Dimension(format!("{slot:?} is not part of this model")))?;
        let transform = self.layout.transform(i);
        let x = self.layout.flatten(&self.mode)?[i];
        let Some(var) = self.variance(slot)? else {
            return Ok((x, x));
        };
        let z = normal_quantile(0.5 + 0.5 * level);
        let u = transform.to_unconstrained(x);
        let half = z * var.max(0.0).sqrt();
        Ok((
            transform.to_constrained(u - half),
            transform.to_constrained(u + half),
        ))
    }
}

/// Standard normal quantile.
pub(crate) fn normal_quantile(p: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    Normal::standard().inverse_cdf(p)
}

/// Fits from the default initial state.
pub fn fit(
    data: &GroupDataset,
    config: &ModelConfig,
    options: &FitOptions,
) -> Result<LaplacePosterior> {
    let start = initialize(data, config)?;
    fit_from(data, config, start, options)
}

/// Fits from `start`; slots fixed by the configuration keep their values
/// from `start`.
pub fn fit_from(
    data: &GroupDataset,
    config: &ModelConfig,
    start: ParameterState,
    options: &FitOptions,
) -> Result<LaplacePosterior> {
    if data.n_observed() == 0 {
        return Err(Error::Data("no observed values to fit".into()));
    }
    let obj = Objective::new(data, config, &start)?;
    let v0 = obj.pack(&start)?;
    let (f0, _) = obj.value_and_gradient(&v0)?;
    if !f0.is_finite() {
        return Err(Error::Domain(
            "log posterior is not finite at the starting point".into(),
        ));
    }

    let negated = |v: &[f64]| match obj.value_and_gradient(v) {
        Ok((f, g)) if f.is_finite() => (-f, g.into_iter().map(|x| -x).collect()),
        _ => (f64::INFINITY, vec![0.0; v.len()]),
    };
    let outcome = minimize(negated, &v0, &options.lbfgs);
    let mut v = outcome.x;
    let mut value = -outcome.value;
    let mut grad: Vec<f64> = outcome.gradient.iter().map(|x| -x).collect();
    let tol = options.lbfgs.gradient_tolerance;
    let ordering = hessian::block_ordering(&obj);

    let mut newton_steps = 0;
    while inf_norm(&grad) >= tol && newton_steps < options.newton_steps {
        let h = compute_hessian(&obj, &v, options.hessian_step)?;
        let (factor, _) = factor_with_ridge(&h, &ordering, options.initial_ridge)?;
        let d = factor.solve(&grad)?;
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = v.iter().zip(&d).map(|(a, b)| a + step * b).collect();
            let (f, g) = obj.value_and_gradient(&trial)?;
            if f.is_finite()
                && (f > value
                    || (f >= value - 1e-12 * value.abs() && inf_norm(&g) < inf_norm(&grad)))
            {
                v = trial;
                value = f;
                grad = g;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        newton_steps += 1;
        if !accepted {
            break;
        }
    }
    let gradient_norm = inf_norm(&grad);
    let converged = gradient_norm < tol;

    let hessian = compute_hessian(&obj, &v, options.hessian_step)?;
    let (factor, ridge) = factor_with_ridge(&hessian, &ordering, options.initial_ridge)?;
    if ridge > 0.0 {
        warn!("negative Hessian is not positive definite at the returned point; added ridge {ridge:e}");
    }
    let mode = obj.state(&v)?;
    let clamped = obj.evaluate_full(&obj.constrained(&v)?).clamped;
    let moments = series_moments(&obj, &mode, &factor)?;
    Ok(LaplacePosterior {
        mode,
        mode_vector: v,
        layout: obj.layout().clone(),
        free: obj.free_slots().to_vec(),
        hessian,
        factor,
        moments,
        diagnostics: Diagnostics {
            iterations: outcome.iterations,
            evaluations: outcome.evaluations,
            newton_steps,
            gradient_norm,
            converged,
            ridge,
            clamped,
            log_posterior: value,
        },
        eta_clamp: config.eta_clamp,
    })
}

fn factor_with_ridge(
    h: &SparsePrecision,
    ordering: &[usize],
    initial: f64,
) -> Result<(CholeskyFactor, f64)> {
    match CholeskyFactor::with_ordering(h, ordering) {
        Ok(f) => return Ok((f, 0.0)),
        Err(Error::NotPositiveDefinite { .. }) => {}
        Err(e) => return Err(e),
    }
    let scale = h.diagonal().iter().fold(1.0f64, |m, d| m.max(d.abs()));
    let mut ridge = initial;
    while ridge <= 1e6 * scale {
        if let Ok(f) = CholeskyFactor::with_ordering(&h.with_ridge(ridge), ordering) {
            return Ok((f, ridge));
        }
        ridge *= 10.0;
    }
    Err(Error::Numerical(
        "negative Hessian could not be regularised to positive definite".into(),
    ))
}

/// Columns of the inverse negative Hessian for the requested coordinates.
pub fn extract_moments(
    hessian: &SparsePrecision,
    targets: &[usize],
) -> Result<BTreeMap<usize, ColumnMoments>> {
    sparse_solve_columns(hessian, targets)
}

fn series_moments(
    obj: &Objective,
    mode: &ParameterState,
    factor: &CholeskyFactor,
) -> Result<Vec<SeriesMoments>> {
    let layout = obj.layout();
    let free = obj.free_slots();
    let position = |slot: Slot| layout.index(slot).and_then(|i| free.binary_search(&i).ok());
    let data = obj.data();
    let n_cov = layout.n_covariates;
    let mut out = Vec::with_capacity(layout.n_series);
    for l in 0..layout.n_series {
        let theta_pos: Vec<Option<usize>> =
            (0..n_cov).map(|j| position(Slot::Theta(l, j))).collect();
        let mut targets: Vec<usize> = theta_pos.iter().flatten().copied().collect();
        let mu_pos = position(Slot::Mu(l));
        targets.extend(mu_pos);
        let horizon: Vec<usize> = (data.n_train()..data.n_periods()).collect();
        let eta_pos: Vec<usize> = horizon
            .iter()
            .map(|&t| position(Slot::Eta(l, t)).expect("latent paths are always free"))
            .collect();
        targets.extend(&eta_pos);
        let cols = solve_columns_with(factor, &targets)?;

        let entry = |a: Option<usize>, b: Option<usize>| match (a, b) {
            (Some(a), Some(b)) => cols.get(&a).map_or(0.0, |c| c.column[b]),
            _ => 0.0,
        };
        let theta_cov: Vec<Vec<f64>> = (0..n_cov)
            .map(|j| {
                (0..n_cov)
                    .map(|k| entry(theta_pos[j], theta_pos[k]))
                    .collect()
            })
            .collect();
        let horizon = horizon
            .iter()
            .zip(&eta_pos)
            .map(|(&t, &p)| {
                let column = &cols[&p].column;
                HorizonMoments {
                    period: t,
                    eta_mean: mode.eta[l][t],
                    eta_variance: column[p],
                    eta_theta_cov: theta_pos
                        .iter()
                        .map(|tp| tp.map_or(0.0, |q| column[q]))
                        .collect(),
                }
            })
            .collect();
        out.push(SeriesMoments {
            mu_mean: mode.series[l].mu,
            mu_variance: entry(mu_pos, mu_pos),
            theta_mean: mode.series[l].theta.clone(),
            theta_cov,
            horizon,
        });
    }
    Ok(out)
}
