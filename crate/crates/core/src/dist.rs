//! Probability kernels: negative binomial, zero-inflated negative binomial,
//! and the prior densities used by the hierarchical model.
//!
//! Everything is evaluated in log space through log-gamma functions.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;
use statrs::function::gamma::{digamma, ln_gamma};

use crate::error::{domain, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Below this count the rising factorial is summed term by term, which avoids
/// the cancellation in `ln Γ(y + α) − ln Γ(α)` when α is large.
const RISING_SUM_LIMIT: u64 = 64;

/// `ln Γ(y + α) − ln Γ(α)`.
pub(crate) fn ln_rising(alpha: f64, y: u64) -> f64 {
    if y <= RISING_SUM_LIMIT {
        (0..y).map(|k| (alpha + k as f64).ln()).sum()
    } else {
        ln_gamma(y as f64 + alpha) - ln_gamma(alpha)
    }
}

/// `ψ(y + α) − ψ(α)`.
pub(crate) fn digamma_diff(alpha: f64, y: u64) -> f64 {
    if y <= RISING_SUM_LIMIT {
        (0..y).map(|k| 1.0 / (alpha + k as f64)).sum()
    } else {
        digamma(y as f64 + alpha) - digamma(alpha)
    }
}

pub(crate) fn ln_factorial(y: u64) -> f64 {
    ln_gamma(y as f64 + 1.0)
}

/// Negative binomial log-pmf without argument validation.
#[inline]
pub(crate) fn nb_log_pmf_unchecked(y: u64, mu: f64, alpha: f64) -> f64 {
    let log_size_term = -alpha * (mu / alpha).ln_1p();
    let count_term = if y == 0 {
        0.0
    } else {
        y as f64 * (mu.ln() - (mu + alpha).ln())
    };
    ln_rising(alpha, y) - ln_factorial(y) + log_size_term + count_term
}

fn check_nb(mu: f64, alpha: f64) -> Result<()> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(domain(format!(
            "negative binomial mean must be positive and finite, got {mu}"
        )));
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(domain(format!(
            "negative binomial size must be positive and finite, got {alpha}"
        )));
    }
    Ok(())
}

/// Log-probability of `y` under a negative binomial with mean `mu` and size `alpha`.
pub fn nb_log_pmf(y: u64, mu: f64, alpha: f64) -> Result<f64> {
    check_nb(mu, alpha)?;
    Ok(nb_log_pmf_unchecked(y, mu, alpha))
}

pub fn poisson_log_pmf(y: u64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return if y == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    y as f64 * lambda.ln() - lambda - ln_factorial(y)
}

/// Zero-inflated negative binomial: structural zero with probability `z`,
/// otherwise a negative binomial draw with mean `mu` and size `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZinbPredictive {
    pub mu: f64,
    pub alpha: f64,
    pub z: f64,
}

impl ZinbPredictive {
    pub fn new(mu: f64, alpha: f64, z: f64) -> Result<Self> {
        check_nb(mu, alpha)?;
        if !(0.0..=1.0).contains(&z) {
            return Err(domain(format!(
                "structural-zero probability must lie in [0, 1], got {z}"
            )));
        }
        Ok(Self { mu, alpha, z })
    }

    pub fn log_pmf(&self, y: u64) -> f64 {
        let nb = nb_log_pmf_unchecked(y, self.mu, self.alpha);
        if y > 0 {
            return (1.0 - self.z).ln() + nb;
        }
        if self.z == 0.0 {
            return nb;
        }
        if self.z == 1.0 {
            return 0.0;
        }
        log_add_exp(self.z.ln(), (1.0 - self.z).ln() + nb)
    }

    pub fn pmf(&self, y: u64) -> f64 {
        self.log_pmf(y).exp()
    }

    pub fn mean(&self) -> f64 {
        (1.0 - self.z) * self.mu
    }

    pub fn variance(&self) -> f64 {
        let nb_var = self.mu + self.mu * self.mu / self.alpha;
        let nb_second = nb_var + self.mu * self.mu;
        (1.0 - self.z) * nb_second - self.mean().powi(2)
    }

    /// Smallest `y` beyond which the remaining probability mass is below `eps`.
    ///
    /// Uses the ratio `P(y+1)/P(y) = (y+α)/(y+1) · μ/(μ+α)`, which is
    /// eventually below one and monotone, to bound the geometric tail.
    pub fn truncation_point(&self, eps: f64) -> u64 {
        let p = self.mu / (self.mu + self.alpha);
        let mut y: u64 = 0;
        let mut log_pmf = nb_log_pmf_unchecked(0, self.mu, self.alpha);
        loop {
            let ratio = (y as f64 + self.alpha) / (y as f64 + 1.0) * p;
            let bound_ratio = if self.alpha >= 1.0 { ratio } else { p };
            if ratio < 1.0 && bound_ratio < 1.0 {
                let tail = log_pmf.exp() * bound_ratio / (1.0 - bound_ratio);
                if tail * (1.0 - self.z) < eps {
                    return y;
                }
            }
            log_pmf += ratio.ln();
            y += 1;
        }
    }

    pub fn cdf(&self, y: u64) -> f64 {
        (0..=y).map(|k| self.pmf(k)).sum::<f64>().min(1.0)
    }

    /// Smallest `y` with `CDF(y) ≥ q`.
    pub fn quantile(&self, q: f64) -> Result<u64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(domain(format!(
                "quantile level must lie in (0, 1), got {q}"
            )));
        }
        let limit = self.truncation_point(1e-15);
        let mut cdf = 0.0;
        for y in 0..=limit {
            cdf += self.pmf(y);
            if cdf >= q {
                return Ok(y);
            }
        }
        Ok(limit)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        if self.z > 0.0 && rng.random::<f64>() < self.z {
            return 0;
        }
        let gamma = Gamma::new(self.alpha, self.mu / self.alpha).expect("validated parameters");
        let lambda: f64 = gamma.sample(rng);
        if lambda <= 0.0 {
            return 0;
        }
        let poisson = Poisson::new(lambda).expect("positive rate");
        poisson.sample(rng) as u64
    }
}

pub fn zinb_log_pmf(y: u64, p: &ZinbPredictive) -> Result<f64> {
    ZinbPredictive::new(p.mu, p.alpha, p.z)?;
    Ok(p.log_pmf(y))
}

pub fn zinb_quantile(p: &ZinbPredictive, q: f64) -> Result<u64> {
    ZinbPredictive::new(p.mu, p.alpha, p.z)?;
    p.quantile(q)
}

pub fn zinb_sample<R: Rng + ?Sized>(p: &ZinbPredictive, rng: &mut R) -> Result<u64> {
    ZinbPredictive::new(p.mu, p.alpha, p.z)?;
    Ok(p.sample(rng))
}

pub(crate) fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Prior families. The gamma family is parametrised by shape and *scale*;
/// the exponential family by its rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PriorKind {
    Normal { mean: f64, variance: f64 },
    Gamma { shape: f64, scale: f64 },
    Beta { a: f64, b: f64 },
    Exponential { rate: f64 },
    Uniform { lower: f64, upper: f64 },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(domain(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

/// Exact log-density of `x`; `-inf` outside the support.
pub fn prior_log_density(kind: PriorKind, x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(domain("prior density evaluated at NaN"));
    }
    Ok(match kind {
        PriorKind::Normal { mean, variance } => {
            positive("normal variance", variance)?;
            let d = x - mean;
            -0.5 * (LN_2PI + variance.ln()) - 0.5 * d * d / variance
        }
        PriorKind::Gamma { shape, scale } => {
            positive("gamma shape", shape)?;
            positive("gamma scale", scale)?;
            if x <= 0.0 {
                f64::NEG_INFINITY
            } else {
                (shape - 1.0) * x.ln() - x / scale - ln_gamma(shape) - shape * scale.ln()
            }
        }
        PriorKind::Beta { a, b } => {
            positive("beta a", a)?;
            positive("beta b", b)?;
            if x <= 0.0 || x >= 1.0 {
                f64::NEG_INFINITY
            } else {
                (a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_beta(a, b)
            }
        }
        PriorKind::Exponential { rate } => {
            positive("exponential rate", rate)?;
            if x < 0.0 {
                f64::NEG_INFINITY
            } else {
                rate.ln() - rate * x
            }
        }
        PriorKind::Uniform { lower, upper } => {
            if !(lower.is_finite() && upper.is_finite() && upper > lower) {
                return Err(domain(format!(
                    "uniform bounds must satisfy lower < upper, got [{lower}, {upper}]"
                )));
            }
            if x < lower || x > upper {
                f64::NEG_INFINITY
            } else {
                -(upper - lower).ln()
            }
        }
    })
}

/// A per-period predictive distribution, as produced by the state-space
/// model or by a point-forecast baseline with a distributional wrapper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Predictive {
    Zinb(ZinbPredictive),
    /// Continuous normal density, evaluated at the integer outcome.
    Gaussian {
        mean: f64,
        variance: f64,
    },
    Poisson {
        mean: f64,
    },
}

impl Predictive {
    pub fn mean(&self) -> f64 {
        match *self {
            Predictive::Zinb(p) => p.mean(),
            Predictive::Gaussian { mean, .. } => mean,
            Predictive::Poisson { mean } => mean,
        }
    }

    pub fn log_prob(&self, y: u64) -> f64 {
        match *self {
            Predictive::Zinb(p) => p.log_pmf(y),
            Predictive::Gaussian { mean, variance } => {
                let d = y as f64 - mean;
                -0.5 * (LN_2PI + variance.ln()) - 0.5 * d * d / variance
            }
            Predictive::Poisson { mean } => poisson_log_pmf(y, mean),
        }
    }
}
