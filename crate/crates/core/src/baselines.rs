//! Croston's method and simple exponential smoothing, with Gaussian and
//! Poisson predictive wrappers.

use serde::{Deserialize, Serialize};

use crate::dist::Predictive;
use crate::error::{Error, Result};

/// Floor applied to the Gaussian wrapper variance.
pub const VARIANCE_FLOOR: f64 = 1e-6;
/// Floor applied to the Poisson wrapper mean.
pub const POISSON_FLOOR: f64 = 1e-6;

const SES_GRID_STEP: f64 = 0.01;
const SES_MIN: f64 = 0.01;
const SES_MAX: f64 = 0.99;

/// Flat point forecast with the in-sample one-step residual variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointForecast {
    pub level: f64,
    pub residual_variance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Smoothing {
    Fixed(f64),
    /// Chosen in `[0.01, 0.99]` to minimise the in-sample squared one-step error.
    Auto,
}

fn check_smoothing(a: f64) -> Result<()> {
    if a > 0.0 && a < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "smoothing constant must lie in (0, 1), got {a}"
        )))
    }
}

/// Final level and one-step residuals of exponential smoothing started at
/// the first value.
fn smooth(y: &[f64], a: f64) -> (f64, Vec<f64>) {
    let mut level = y[0];
    let mut residuals = Vec::with_capacity(y.len().saturating_sub(1));
    for &v in &y[1..] {
        residuals.push(v - level);
        level += a * (v - level);
    }
    (level, residuals)
}

fn sse(y: &[f64], a: f64) -> f64 {
    smooth(y, a).1.iter().map(|r| r * r).sum()
}

/// Smoothing constant minimising the in-sample squared one-step error: a
/// coarse grid locates the best bracket, golden-section search refines it.
pub fn optimal_smoothing(y: &[f64]) -> f64 {
    if y.len() < 2 {
        return SES_MIN;
    }
    let n = ((SES_MAX - SES_MIN) / SES_GRID_STEP).round() as usize;
    let grid: Vec<f64> = (0..=n)
        .map(|i| SES_MIN + i as f64 * SES_GRID_STEP)
        .collect();
    let best = (0..grid.len())
        .min_by(|&i, &j| sse(y, grid[i]).total_cmp(&sse(y, grid[j])))
        .expect("non-empty grid");
    let mut lo = grid[best.saturating_sub(1)];
    let mut hi = grid[(best + 1).min(n)];
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - ratio * (hi - lo);
    let mut d = lo + ratio * (hi - lo);
    let (mut fc, mut fd) = (sse(y, c), sse(y, d));
    while hi - lo > 1e-7 {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - ratio * (hi - lo);
            fc = sse(y, c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + ratio * (hi - lo);
            fd = sse(y, d);
        }
    }
    let a = 0.5 * (lo + hi);
    if sse(y, grid[best]) < sse(y, a) {
        grid[best]
    } else {
        a
    }
}

/// Simple exponential smoothing: `ℓ_t = a y_t + (1 − a) ℓ_{t−1}`, `ℓ_0 = y_1`.
pub fn ses(y: &[f64], smoothing: Smoothing) -> Result<PointForecast> {
    if y.is_empty() {
        return Err(Error::Data(
            "exponential smoothing needs at least one observation".into(),
        ));
    }
    let a = match smoothing {
        Smoothing::Fixed(a) => {
            check_smoothing(a)?;
            a
        }
        Smoothing::Auto => optimal_smoothing(y),
    };
    let (level, residuals) = smooth(y, a);
    Ok(PointForecast {
        level,
        residual_variance: mean_square(&residuals),
    })
}

fn mean_square(r: &[f64]) -> f64 {
    if r.is_empty() {
        0.0
    } else {
        r.iter().map(|v| v * v).sum::<f64>() / r.len() as f64
    }
}

/// Croston's method: demand sizes and inter-demand intervals are smoothed
/// separately at demand epochs and the forecast is their ratio. The first
/// interval counts periods up to and including the first demand.
pub fn croston(y: &[f64], a: f64) -> Result<PointForecast> {
    if y.is_empty() {
        return Err(Error::Data(
            "Croston's method needs at least one observation".into(),
        ));
    }
    check_smoothing(a)?;
    let mut size: Option<f64> = None;
    let mut interval = 0.0f64;
    let mut gap = 0.0f64;
    let mut residuals = Vec::new();
    for &v in y {
        gap += 1.0;
        if let Some(s) = size {
            residuals.push(v - s / interval);
        }
        if v != 0.0 {
            match size {
                None => {
                    size = Some(v);
                    interval = gap.max(1.0);
                }
                Some(s) => {
                    size = Some(s + a * (v - s));
                    interval += a * (gap - interval);
                }
            }
            gap = 0.0;
        }
    }
    Ok(PointForecast {
        level: size.map_or(0.0, |s| s / interval),
        residual_variance: mean_square(&residuals),
    })
}

/// Normal predictive with the residual variance, floored.
pub fn wrap_gaussian(pf: &PointForecast) -> Predictive {
    Predictive::Gaussian {
        mean: pf.level,
        variance: pf.residual_variance.max(VARIANCE_FLOOR),
    }
}

/// Poisson predictive with the point forecast as mean, floored.
pub fn wrap_poisson(pf: &PointForecast) -> Predictive {
    Predictive::Poisson {
        mean: pf.level.max(POISSON_FLOOR),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ses_examples() {
        let c = ses(&[3.0; 6], Smoothing::Fixed(0.3)).unwrap();
        assert_eq!(c.level, 3.0);
        assert_eq!(c.residual_variance, 0.0);
        let c = ses(&[3.0; 6], Smoothing::Auto).unwrap();
        assert_eq!(c.level, 3.0);
        assert_eq!(ses(&[0.0, 10.0], Smoothing::Fixed(0.5)).unwrap().level, 5.0);
        assert!(ses(&[], Smoothing::Auto).is_err());
        assert!(ses(&[1.0], Smoothing::Fixed(1.0)).is_err());
    }

    #[test]
    fn croston_examples() {
        assert_eq!(croston(&[2.0; 5], 0.1).unwrap().level, 2.0);
        assert_eq!(croston(&[0.0; 5], 0.1).unwrap().level, 0.0);
        // sizes 4, 4, 4 and intervals 3, 3, 3 keep both smoothers constant
        let f = croston(&[0.0, 0.0, 4.0, 0.0, 0.0, 4.0, 0.0, 0.0, 4.0], 0.1).unwrap();
        assert!((f.level - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn croston_hand_trace() {
        // y = [0, 3, 0, 0, 6], a = 0.5
        // first demand 3 after 2 periods: s = 3, q = 2
        // second demand 6 after 3 periods: s = 4.5, q = 2.5
        let f = croston(&[0.0, 3.0, 0.0, 0.0, 6.0], 0.5).unwrap();
        assert!((f.level - 1.8).abs() < 1e-15);
        // one-step residuals after the first demand: 0 - 1.5, 0 - 1.5, 6 - 1.5
        let expected = (1.5f64.powi(2) * 2.0 + 4.5f64.powi(2)) / 3.0;
        assert!((f.residual_variance - expected).abs() < 1e-12);
    }

    #[test]
    fn wrappers() {
        let pf = PointForecast {
            level: 1.0,
            residual_variance: 0.0,
        };
        assert!((wrap_poisson(&pf).log_prob(0) + 1.0).abs() < 1e-15);
        let g = wrap_gaussian(&PointForecast {
            level: 2.0,
            residual_variance: 0.5,
        });
        assert!((g.log_prob(2) + 0.5 * (2.0 * std::f64::consts::PI * 0.5).ln()).abs() < 1e-14);
        let zero = PointForecast {
            level: 0.0,
            residual_variance: 0.0,
        };
        assert!(wrap_poisson(&zero).log_prob(0).abs() < 1e-5);
        assert!(wrap_gaussian(&zero).log_prob(0).is_finite());
    }

    #[test]
    fn auto_smoothing_matches_fine_grid_on_random_walk() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let mut y = vec![50.0];
        for _ in 0..99 {
            let last = *y.last().unwrap();
            y.push(last + rng.random_range(-3.0..3.0));
        }
        let grid_best = (0..=9800)
            .map(|i| 0.01 + i as f64 * 1e-4)
            .min_by(|a, b| sse(&y, *a).total_cmp(&sse(&y, *b)))
            .unwrap();
        let a = optimal_smoothing(&y);
        assert!((a - grid_best).abs() < 1e-3, "{a} vs {grid_best}");
    }

    proptest! {
        #[test]
        fn scale_equivariance(y in prop::collection::vec(0u32..20, 1..30), k in 0.5f64..10.0) {
            let y: Vec<f64> = y.into_iter().map(f64::from).collect();
            let ky: Vec<f64> = y.iter().map(|v| v * k).collect();
            let a = ses(&y, Smoothing::Fixed(0.3)).unwrap().level;
            let b = ses(&ky, Smoothing::Fixed(0.3)).unwrap().level;
            prop_assert!((b - k * a).abs() < 1e-9 * (1.0 + b.abs()));
            let a = croston(&y, 0.1).unwrap().level;
            let b = croston(&ky, 0.1).unwrap().level;
            prop_assert!((b - k * a).abs() < 1e-9 * (1.0 + b.abs()));
        }

        #[test]
        fn croston_size_ignores_extra_zeros(y in prop::collection::vec(0u32..5, 1..20), at in 0usize..20) {
            let y: Vec<f64> = y.into_iter().map(f64::from).collect();
            let mut padded = y.clone();
            let pos = at.min(padded.len());
            padded.insert(pos, 0.0);
            // the size smoother sees the same demand sequence, so the forecast
            // changes only through the interval smoother
            let sizes = |v: &[f64]| v.iter().filter(|x| **x != 0.0).copied().collect::<Vec<_>>();
            prop_assert_eq!(sizes(&y), sizes(&padded));
            let base = croston(&y, 0.1).unwrap().level;
            let more = croston(&padded, 0.1).unwrap().level;
            if base == 0.0 {
                prop_assert_eq!(more, 0.0);
            } else {
                prop_assert!(more <= base + 1e-12);
            }
        }
    }
}
