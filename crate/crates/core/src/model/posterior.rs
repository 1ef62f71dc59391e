use statrs::function::beta::ln_beta;
use statrs::function::gamma::{digamma, ln_gamma};

use super::dataset::GroupDataset;
use super::params::{
    GlobalParams, Initialization, Layout, ModelConfig, ParameterState, SeriesParams, Slot,
};
use crate::dist::{digamma_diff, log_add_exp, nb_log_pmf_unchecked};
use crate::error::{Error, Result};
use crate::gmrf::{
    build_hierarchical_precision, gmrf_log_density_with_log_det, hierarchical_log_det,
    InitialPrecision, SeriesBlock,
};

const LN_2PI: f64 = 1.837_877_066_409_345_5;
const LN_PI: f64 = 1.144_729_885_849_400_2;

/// Sum of log-likelihood terms and the number of clamped linear predictors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LikelihoodValue {
    pub value: f64,
    pub clamped: usize,
}

/// Log-likelihood contribution of one observation and its derivatives with
/// respect to the linear predictor `u = η + xᵀθ`, `z` and `α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct CellTerms {
    pub value: f64,
    pub d_u: f64,
    /// Minus the second derivative in `u`.
    pub w: f64,
    pub d_z: f64,
    pub d_alpha: f64,
    pub clamped: bool,
}

pub(crate) fn cell_terms(y: u64, u: f64, z: f64, alpha: f64, clamp: f64) -> CellTerms {
    let clamped = u.abs() > clamp;
    let u = u.clamp(-clamp, clamp);
    let mu = u.exp();
    let s = mu + alpha;
    let (value, mut d_u, mut w, d_z, d_alpha);
    if y > 0 {
        let yf = y as f64;
        value = (1.0 - z).ln() + nb_log_pmf_unchecked(y, mu, alpha);
        d_u = alpha * (yf - mu) / s;
        w = (yf + alpha) * mu * alpha / (s * s);
        d_z = -1.0 / (1.0 - z);
        d_alpha = digamma_diff(alpha, y) + alpha.ln() - s.ln() + (mu - yf) / s;
    } else {
        let ln_p0 = -alpha * (mu / alpha).ln_1p();
        let p0 = ln_p0.exp();
        value = log_add_exp(z.ln(), (1.0 - z).ln() + ln_p0);
        let big_p0 = value.exp();
        let r = ((1.0 - z).ln() + ln_p0 - value).exp();
        let g1 = -alpha * mu / s;
        let g2 = -alpha * alpha * mu / (s * s);
        d_u = r * g1;
        w = -(r * g2 + r * (1.0 - r) * g1 * g1);
        d_z = (1.0 - p0) / big_p0;
        d_alpha = r * (alpha.ln() - s.ln() + mu / s);
    }
    if clamped {
        d_u = 0.0;
        w = 0.0;
    }
    CellTerms {
        value,
        d_u,
        w,
        d_z,
        d_alpha,
        clamped,
    }
}

fn linear_predictor(eta: f64, x: &[f64], theta: &[f64]) -> f64 {
    eta + x.iter().zip(theta).map(|(a, b)| a * b).sum::<f64>()
}

/// Zero-inflated negative binomial log-likelihood of every observed cell.
pub fn log_likelihood(
    state: &ParameterState,
    data: &GroupDataset,
    eta_clamp: f64,
) -> Result<LikelihoodValue> {
    check_state(state, data)?;
    let mut value = 0.0;
    let mut clamped = 0;
    for (l, s) in state.series.iter().enumerate() {
        for t in 0..data.n_periods() {
            if let Some(y) = data.value(l, t) {
                let u = linear_predictor(state.eta[l][t], data.x(l, t), &s.theta);
                let c = cell_terms(y, u, s.z, s.alpha, eta_clamp);
                value += c.value;
                clamped += usize::from(c.clamped);
            }
        }
    }
    Ok(LikelihoodValue { value, clamped })
}

fn check_state(state: &ParameterState, data: &GroupDataset) -> Result<()> {
    let ok = state.series.len() == data.n_series()
        && state.eta.len() == data.n_series()
        && state.eta.iter().all(|e| e.len() == data.n_periods())
        && state
            .series
            .iter()
            .all(|s| s.theta.len() == data.n_covariates())
        && state.global.theta_bar.len() == data.n_covariates();
    if ok {
        Ok(())
    } else {
        Err(Error::Dimension(
            "parameter state does not match the dataset shape".into(),
        ))
    }
}

fn gamma_ln_pdf(x: f64, shape: f64, scale: f64) -> f64 {
    (shape - 1.0) * x.ln() - x / scale - ln_gamma(shape) - shape * scale.ln()
}

fn beta_ln_pdf(x: f64, a: f64, b: f64) -> f64 {
    (a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln() - ln_beta(a, b)
}

fn normal_ln_pdf(x: f64, mean: f64, precision: f64) -> f64 {
    0.5 * (precision.ln() - LN_2PI) - 0.5 * precision * (x - mean) * (x - mean)
}

/// Uniform hyperpriors; `−∞` when any value leaves its support.
fn hyper_log_prior(g: &GlobalParams, layout: &Layout, config: &ModelConfig) -> f64 {
    let b = &config.bounds;
    let mut terms = vec![
        (g.alpha_bar, b.alpha_bar),
        (g.tau_mu, b.tau_mu),
        (g.kappa_tau, b.kappa_tau),
        (g.beta_tau, b.beta_tau),
        (g.phi_plus, b.phi_plus),
        (g.phi_minus, b.phi_minus),
    ];
    if layout.has_tau0() {
        terms.push((g.kappa_0tau, b.kappa_0tau));
        terms.push((g.beta_0tau, b.beta_0tau));
    }
    if layout.has_theta() {
        terms.push((g.kappa_theta, b.kappa_theta));
        terms.push((g.beta_theta, b.beta_theta));
    }
    let mut total = 0.0;
    for (x, interval) in terms {
        if !interval.contains(x) {
            return f64::NEG_INFINITY;
        }
        total -= interval.width().ln();
    }
    let theta_prec = 1.0 / config.theta_bar_variance;
    total
        + g.theta_bar
            .iter()
            .map(|&t| normal_ln_pdf(t, 0.0, theta_prec))
            .sum::<f64>()
}

/// Priors of one series' scalars and coefficients given the globals
/// (the latent path and `μ_ℓ` are covered by the GMRF term).
fn series_log_prior(s: &SeriesParams, g: &GlobalParams, layout: &Layout) -> f64 {
    let (a, b) = g.phi_prior();
    let mut v = -0.5 * s.z.ln() - 0.5 * (1.0 - s.z).ln() - LN_PI;
    v += g.alpha_bar.ln() - g.alpha_bar * s.alpha;
    v += gamma_ln_pdf(s.tau, g.kappa_tau, g.beta_tau);
    v += beta_ln_pdf(s.phi, a, b);
    if layout.has_tau0() {
        v += gamma_ln_pdf(s.tau_0, g.kappa_0tau, g.beta_0tau);
    }
    if layout.has_theta() {
        v += gamma_ln_pdf(s.tau_theta, g.kappa_theta, g.beta_theta);
        v += s
            .theta
            .iter()
            .zip(&g.theta_bar)
            .map(|(&t, &m)| normal_ln_pdf(t, m, s.tau_theta))
            .sum::<f64>();
    }
    v
}

fn series_block(
    s: &SeriesParams,
    g: &GlobalParams,
    periods: usize,
    init: Initialization,
) -> SeriesBlock {
    SeriesBlock {
        tau: s.tau,
        phi: s.phi,
        tau_mu: g.tau_mu,
        periods,
        initial: match init {
            Initialization::Stationary => InitialPrecision::Stationary,
            Initialization::Free => InitialPrecision::Free { tau0: s.tau_0 },
        },
    }
}

fn in_domain(state: &ParameterState) -> bool {
    state.series.iter().all(|s| {
        s.z > 0.0
            && s.z < 1.0
            && s.alpha > 0.0
            && s.tau > 0.0
            && s.phi > 0.0
            && s.phi < 1.0
            && s.tau_0 > 0.0
            && s.tau_theta > 0.0
            && s.alpha.is_finite()
            && s.tau.is_finite()
    })
}

/// Log prior density of a constrained state: uniform hyperpriors, the
/// series-level priors, and the joint Gaussian density of all latent paths,
/// series levels and the global level.
pub fn log_prior(state: &ParameterState, config: &ModelConfig) -> Result<f64> {
    let n_series = state.series.len();
    let periods = state.eta.first().map_or(0, Vec::len);
    let layout = Layout::new(n_series, periods, state.global.theta_bar.len(), config);
    layout.flatten(state)?;
    let g = &state.global;
    let hyper = hyper_log_prior(g, &layout, config);
    if hyper == f64::NEG_INFINITY || !in_domain(state) {
        return Ok(f64::NEG_INFINITY);
    }
    let mut total = hyper;
    for s in &state.series {
        total += series_log_prior(s, g, &layout);
    }
    let blocks: Vec<SeriesBlock> = state
        .series
        .iter()
        .map(|s| series_block(s, g, periods, config.initialization))
        .collect();
    let tau_mumu = 1.0 / config.mu_mu_variance;
    let q = build_hierarchical_precision(&blocks, tau_mumu)?;
    let mut x = Vec::with_capacity(q.dim());
    for (l, s) in state.series.iter().enumerate() {
        x.extend_from_slice(&state.eta[l]);
        x.push(s.mu);
    }
    x.push(g.mu_mu);
    let mean = vec![0.0; x.len()];
    total +=
        gmrf_log_density_with_log_det(&x, &mean, &q, hierarchical_log_det(&blocks, tau_mumu)?)?;
    Ok(total)
}

/// Log posterior (up to a constant) over the unconstrained free coordinates.
#[derive(Debug, Clone)]
pub struct Objective<'a> {
    data: &'a GroupDataset,
    config: &'a ModelConfig,
    layout: Layout,
    template: Vec<f64>,
    free: Vec<usize>,
}

/// Value and gradient with respect to every constrained slot of the layout.
#[derive(Debug, Clone)]
pub struct FullEvaluation {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub clamped: usize,
}

impl<'a> Objective<'a> {
    /// Objective with fixed slots taken from `template`.
    pub fn new(
        data: &'a GroupDataset,
        config: &'a ModelConfig,
        template: &ParameterState,
    ) -> Result<Self> {
        config.validate()?;
        check_state(template, data)?;
        let layout = Layout::new(
            data.n_series(),
            data.n_periods(),
            data.n_covariates(),
            config,
        );
        let template = layout.flatten(template)?;
        let free = layout.free_indices();
        Ok(Self {
            data,
            config,
            layout,
            template,
            free,
        })
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn data(&self) -> &GroupDataset {
        self.data
    }

    pub fn config(&self) -> &ModelConfig {
        self.config
    }

    pub fn dim(&self) -> usize {
        self.free.len()
    }

    /// Indices (into the full layout) of the free coordinates.
    pub fn free_slots(&self) -> &[usize] {
        &self.free
    }

    pub fn constrained(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.layout.unpack_into(v, &self.template)
    }

    pub fn state(&self, v: &[f64]) -> Result<ParameterState> {
        Ok(self.layout.unflatten(&self.constrained(v)?))
    }

    pub fn pack(&self, state: &ParameterState) -> Result<Vec<f64>> {
        self.layout.pack(state)
    }

    pub fn value(&self, v: &[f64]) -> Result<f64> {
        Ok(self.value_and_gradient(v)?.0)
    }

    /// Log posterior and its gradient in the unconstrained coordinates.
    /// Outside the support the value is `−∞` and the gradient zero.
    pub fn value_and_gradient(&self, v: &[f64]) -> Result<(f64, Vec<f64>)> {
        let x = self.constrained(v)?;
        let full = self.evaluate_full(&x);
        if full.value == f64::NEG_INFINITY || !full.value.is_finite() {
            return Ok((f64::NEG_INFINITY, vec![0.0; self.dim()]));
        }
        let mut value = full.value;
        let mut grad = Vec::with_capacity(self.dim());
        for &i in &self.free {
            let t = self.layout.transform(i);
            value += t.log_jacobian(x[i]);
            grad.push(full.gradient[i] * t.derivative(x[i]) + t.log_jacobian_derivative(x[i]));
        }
        Ok((value, grad))
    }

    /// Log prior plus log-likelihood of a full constrained vector, without
    /// Jacobian terms, with its gradient over every slot.
    pub fn evaluate_full(&self, x: &[f64]) -> FullEvaluation {
        let lay = &self.layout;
        let data = self.data;
        let n = lay.n_covariates;
        let periods = lay.n_periods;
        let mut grad = vec![0.0; lay.len()];
        let neg_inf = FullEvaluation {
            value: f64::NEG_INFINITY,
            gradient: vec![0.0; lay.len()],
            clamped: 0,
        };
        let idx = |s: Slot| lay.index(s).expect("slot in layout");

        let i_ab = idx(Slot::AlphaBar);
        let i_tm = idx(Slot::TauMu);
        let i_kt = idx(Slot::KappaTau);
        let i_bt = idx(Slot::BetaTau);
        let i_pp = idx(Slot::PhiPlus);
        let i_pm = idx(Slot::PhiMinus);
        let i_mm = idx(Slot::MuMu);
        let i_k0 = lay.index(Slot::Kappa0);
        let i_b0 = lay.index(Slot::Beta0);
        let i_kth = lay.index(Slot::KappaTheta);
        let i_bth = lay.index(Slot::BetaTheta);
        let theta_bar_start = lay.index(Slot::ThetaBar(0));

        let b = &self.config.bounds;
        let mut value = 0.0;
        let mut bounded = vec![
            (i_ab, b.alpha_bar),
            (i_tm, b.tau_mu),
            (i_kt, b.kappa_tau),
            (i_bt, b.beta_tau),
            (i_pp, b.phi_plus),
            (i_pm, b.phi_minus),
        ];
        if let (Some(k), Some(bb)) = (i_k0, i_b0) {
            bounded.push((k, b.kappa_0tau));
            bounded.push((bb, b.beta_0tau));
        }
        if let (Some(k), Some(bb)) = (i_kth, i_bth) {
            bounded.push((k, b.kappa_theta));
            bounded.push((bb, b.beta_theta));
        }
        for (i, interval) in bounded {
            if !interval.contains(x[i]) {
                return neg_inf;
            }
            value -= interval.width().ln();
        }

        let alpha_bar = x[i_ab];
        let tau_mu = x[i_tm];
        let (kt, bt) = (x[i_kt], x[i_bt]);
        let (pp, pm) = (x[i_pp], x[i_pm]);
        let (pa, pb) = (pp + pm, pm);
        let mu_mu = x[i_mm];
        let free_init = lay.has_tau0();
        let (k0, b0) = match (i_k0, i_b0) {
            (Some(k), Some(bb)) => (x[k], x[bb]),
            _ => (0.0, 0.0),
        };
        let (kth, bth) = match (i_kth, i_bth) {
            (Some(k), Some(bb)) => (x[k], x[bb]),
            _ => (0.0, 0.0),
        };

        let theta_prec = 1.0 / self.config.theta_bar_variance;
        if let Some(start) = theta_bar_start {
            for j in 0..n {
                let t = x[start + j];
                value += normal_ln_pdf(t, 0.0, theta_prec);
                grad[start + j] -= theta_prec * t;
            }
        }

        // μ_μ prior
        let tau_mumu = 1.0 / self.config.mu_mu_variance;
        value += normal_ln_pdf(mu_mu, 0.0, tau_mumu);
        grad[i_mm] -= tau_mumu * mu_mu;

        let dg_kt = digamma(kt);
        let lg_kt = ln_gamma(kt);
        let ln_bt = bt.ln();
        let psi_ab = digamma(pa + pb);
        let psi_a = digamma(pa);
        let psi_b = digamma(pb);
        let ln_beta_ab = ln_beta(pa, pb);
        let half_ln_2pi_t = 0.5 * periods as f64 * LN_2PI;
        let mut clamped = 0;

        for l in 0..lay.n_series {
            let i_z = idx(Slot::Z(l));
            let i_a = idx(Slot::Alpha(l));
            let i_t = idx(Slot::Tau(l));
            let i_p = idx(Slot::Phi(l));
            let i_mu = idx(Slot::Mu(l));
            let z = x[i_z];
            let alpha = x[i_a];
            let tau = x[i_t];
            let phi = x[i_p];
            let mu = x[i_mu];
            if !(z > 0.0 && z < 1.0 && alpha > 0.0 && tau > 0.0 && phi > 0.0 && phi < 1.0) {
                return neg_inf;
            }
            if !(alpha.is_finite() && tau.is_finite()) {
                return neg_inf;
            }

            // z ~ Beta(½, ½)
            value += -0.5 * z.ln() - 0.5 * (1.0 - z).ln() - LN_PI;
            grad[i_z] += -0.5 / z + 0.5 / (1.0 - z);
            // α ~ Exponential(rate ᾱ)
            value += alpha_bar.ln() - alpha_bar * alpha;
            grad[i_a] -= alpha_bar;
            grad[i_ab] += 1.0 / alpha_bar - alpha;
            // τ ~ Gamma(κ_τ, scale β_τ)
            value += (kt - 1.0) * tau.ln() - tau / bt - lg_kt - kt * ln_bt;
            grad[i_t] += (kt - 1.0) / tau - 1.0 / bt;
            grad[i_kt] += tau.ln() - dg_kt - ln_bt;
            grad[i_bt] += tau / (bt * bt) - kt / bt;
            // φ ~ Beta(φ_+ + φ_−, φ_−)
            value += (pa - 1.0) * phi.ln() + (pb - 1.0) * (1.0 - phi).ln() - ln_beta_ab;
            grad[i_p] += (pa - 1.0) / phi - (pb - 1.0) / (1.0 - phi);
            let d_a = phi.ln() - psi_a + psi_ab;
            let d_b = (1.0 - phi).ln() - psi_b + psi_ab;
            grad[i_pp] += d_a;
            grad[i_pm] += d_a + d_b;

            let mut tau0 = 0.0;
            if free_init {
                let i_t0 = idx(Slot::Tau0(l));
                tau0 = x[i_t0];
                if !(tau0 > 0.0 && tau0.is_finite()) {
                    return neg_inf;
                }
                let (ik, ib) = (i_k0.expect("free init"), i_b0.expect("free init"));
                value += gamma_ln_pdf(tau0, k0, b0);
                grad[i_t0] += (k0 - 1.0) / tau0 - 1.0 / b0;
                grad[ik] += tau0.ln() - digamma(k0) - b0.ln();
                grad[ib] += tau0 / (b0 * b0) - k0 / b0;
            }

            let theta_start = lay.index(Slot::Theta(l, 0));
            let theta: &[f64] = match theta_start {
                Some(s) => &x[s..s + n],
                None => &[],
            };
            if n > 0 {
                let i_tt = idx(Slot::TauTheta(l));
                let tt = x[i_tt];
                if !(tt > 0.0 && tt.is_finite()) {
                    return neg_inf;
                }
                let (ik, ib) = (i_kth.expect("covariates"), i_bth.expect("covariates"));
                value += gamma_ln_pdf(tt, kth, bth);
                grad[i_tt] += (kth - 1.0) / tt - 1.0 / bth;
                grad[ik] += tt.ln() - digamma(kth) - bth.ln();
                grad[ib] += tt / (bth * bth) - kth / bth;
                let ts = theta_start.expect("covariates");
                let tbs = theta_bar_start.expect("covariates");
                let mut ss = 0.0;
                for j in 0..n {
                    let d = theta[j] - x[tbs + j];
                    ss += d * d;
                    grad[ts + j] -= tt * d;
                    grad[tbs + j] += tt * d;
                }
                value += 0.5 * n as f64 * (tt.ln() - LN_2PI) - 0.5 * tt * ss;
                grad[i_tt] += 0.5 * n as f64 / tt - 0.5 * ss;
            }

            // μ_ℓ | μ_μ
            let dm = mu - mu_mu;
            value += normal_ln_pdf(mu, mu_mu, tau_mu);
            grad[i_mu] -= tau_mu * dm;
            grad[i_mm] += tau_mu * dm;
            grad[i_tm] += 0.5 / tau_mu - 0.5 * dm * dm;

            // latent AR(1) path around μ_ℓ
            let e0 = lay.eta_start(l);
            let eta = &x[e0..e0 + periods];
            let d = |t: usize| eta[t] - mu;
            let mut sum_r2 = 0.0;
            let mut sum_rd = 0.0;
            // ∂(Σ r²)/∂d_t accumulated into the η gradient below
            let mut dsum = vec![0.0; periods];
            for t in 1..periods {
                let r = d(t) - phi * d(t - 1);
                sum_r2 += r * r;
                sum_rd += r * d(t - 1);
                dsum[t] += 2.0 * r;
                dsum[t - 1] -= 2.0 * phi * r;
            }
            let d1 = d(0);
            let tf = periods as f64;
            let (p1, dp1_dtau, dp1_dtau0) = if free_init {
                let s = tau + tau0;
                (tau * tau0 / s, tau0 * tau0 / (s * s), tau * tau / (s * s))
            } else {
                (tau * (1.0 - phi * phi), 1.0 - phi * phi, 0.0)
            };
            value += -half_ln_2pi_t + 0.5 * p1.ln() + 0.5 * (tf - 1.0) * tau.ln()
                - 0.5 * p1 * d1 * d1
                - 0.5 * tau * sum_r2;
            let mut mu_grad = 0.0;
            for t in 0..periods {
                let mut gt = -0.5 * tau * dsum[t];
                if t == 0 {
                    gt -= p1 * d1;
                }
                grad[e0 + t] += gt;
                mu_grad -= gt;
            }
            grad[i_mu] += mu_grad;
            let d_p1 = 0.5 / p1 - 0.5 * d1 * d1;
            grad[i_t] += 0.5 * (tf - 1.0) / tau - 0.5 * sum_r2 + d_p1 * dp1_dtau;
            grad[i_p] += tau * sum_rd;
            if free_init {
                grad[idx(Slot::Tau0(l))] += d_p1 * dp1_dtau0;
            } else {
                grad[i_p] += d_p1 * (-2.0 * tau * phi);
            }

            // observations
            let mut ll = 0.0;
            for t in 0..periods {
                let Some(y) = data.value(l, t) else { continue };
                let xt = data.x(l, t);
                let u = linear_predictor(eta[t], xt, theta);
                let c = cell_terms(y, u, z, alpha, self.config.eta_clamp);
                ll += c.value;
                clamped += usize::from(c.clamped);
                grad[e0 + t] += c.d_u;
                if let Some(ts) = theta_start {
                    for j in 0..n {
                        grad[ts + j] += c.d_u * xt[j];
                    }
                }
                grad[i_z] += c.d_z;
                grad[i_a] += c.d_alpha;
            }
            value += ll;
        }
        FullEvaluation {
            value,
            gradient: grad,
            clamped,
        }
    }
}

/// Starting point for optimisation: each latent path halfway between the
/// log counts and their series mean, levels at the mean of the series means,
/// everything else at prior means or support midpoints.
pub fn initialize(data: &GroupDataset, config: &ModelConfig) -> Result<ParameterState> {
    config.validate()?;
    let c = config.continuity;
    let n = data.n_covariates();
    let mut means = Vec::with_capacity(data.n_series());
    for s in data.series() {
        let logs: Vec<f64> = s
            .values
            .iter()
            .flatten()
            .map(|&y| (y as f64 + c).ln())
            .collect();
        if logs.is_empty() {
            return Err(Error::Data(format!(
                "series '{}' has no observed values",
                s.id
            )));
        }
        means.push(logs.iter().sum::<f64>() / logs.len() as f64);
    }
    let level = means.iter().sum::<f64>() / means.len() as f64;
    let mut global = GlobalParams::midpoints(&config.bounds, n);
    global.mu_mu = level;
    let (a, b) = global.phi_prior();
    let series_template = SeriesParams {
        z: 0.1,
        alpha: 1.0 / global.alpha_bar,
        tau: global.kappa_tau * global.beta_tau,
        tau_0: global.kappa_0tau * global.beta_0tau,
        phi: a / (a + b),
        mu: level,
        theta: vec![0.0; n],
        tau_theta: global.kappa_theta * global.beta_theta,
    };
    let eta = data
        .series()
        .iter()
        .zip(&means)
        .map(|(s, &m)| {
            s.values
                .iter()
                .map(|v| match v {
                    Some(y) => 0.5 * ((*y as f64 + c).ln() + m),
                    None => m,
                })
                .collect()
        })
        .collect();
    Ok(ParameterState {
        global,
        series: vec![series_template; data.n_series()],
        eta,
    })
}
