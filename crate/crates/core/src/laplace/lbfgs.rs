//! Limited-memory BFGS minimiser with a strong Wolfe line search.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LbfgsOptions {
    /// Number of correction pairs kept.
    pub memory: usize,
    /// Stop when the largest absolute gradient component falls below this.
    pub gradient_tolerance: f64,
    pub max_iterations: usize,
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
    pub max_line_search: usize,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        Self {
            memory: 10,
            gradient_tolerance: 1e-6,
            max_iterations: 2000,
            c1: 1e-4,
            c2: 0.9,
            max_line_search: 40,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LbfgsOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimises `f`, which returns the value and gradient at a point. Non-finite
/// values are treated as an infinitely high barrier.
pub fn minimize<F>(mut f: F, x0: &[f64], options: &LbfgsOptions) -> LbfgsOutcome
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let mut x = x0.to_vec();
    let (mut fx, mut g) = f(&x);
    let mut evaluations = 1;
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(options.memory);
    let mut iterations = 0;
    let mut restarted = false;

    if !fx.is_finite() {
        return LbfgsOutcome {
            x,
            value: fx,
            gradient: g,
            iterations,
            evaluations,
            converged: false,
        };
    }

    while iterations < options.max_iterations {
        if inf_norm(&g) < options.gradient_tolerance {
            return LbfgsOutcome {
                x,
                value: fx,
                gradient: g,
                iterations,
                evaluations,
                converged: true,
            };
        }
        iterations += 1;

        let mut d = two_loop(&g, &history);
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            history.clear();
            d = g.iter().map(|v| -v).collect();
            slope = dot(&g, &d);
        }
        let initial_step = if history.is_empty() {
            (1.0 / inf_norm(&g)).min(1.0)
        } else {
            1.0
        };

        let search = line_search(&mut f, &x, fx, slope, &d, initial_step, options);
        evaluations += search.evaluations;
        let Some((step, f_new, g_new)) = search.accepted else {
            if restarted || history.is_empty() {
                break;
            }
            history.clear();
            restarted = true;
            continue;
        };
        restarted = false;

        let s: Vec<f64> = d.iter().map(|v| step * v).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        for (xi, si) in x.iter_mut().zip(&s) {
            *xi += si;
        }
        fx = f_new;
        g = g_new;
        if sy > 1e-12 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() {
            if history.len() == options.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
    }
    let converged = inf_norm(&g) < options.gradient_tolerance;
    LbfgsOutcome {
        x,
        value: fx,
        gradient: g,
        iterations,
        evaluations,
        converged,
    }
}

/// Search direction `−H g` from the stored correction pairs.
fn two_loop(g: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

struct SearchResult {
    accepted: Option<(f64, f64, Vec<f64>)>,
    evaluations: usize,
}

/// Strong Wolfe line search (bracketing then zoom). The sufficient-decrease
/// test allows a rounding-level slack so that steps near the optimum, where
/// function differences vanish in floating point, are not rejected.
fn line_search<F>(
    f: &mut F,
    x: &[f64],
    f0: f64,
    slope0: f64,
    d: &[f64],
    initial: f64,
    options: &LbfgsOptions,
) -> SearchResult
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let slack = 1e-12 * f0.abs().max(1.0);
    let mut evaluations = 0;
    let mut eval = |a: f64, evaluations: &mut usize| {
        let xa: Vec<f64> = x.iter().zip(d).map(|(xi, di)| xi + a * di).collect();
        *evaluations += 1;
        let (fa, ga) = f(&xa);
        let slope = if fa.is_finite() {
            dot(&ga, d)
        } else {
            f64::NAN
        };
        (fa, ga, slope)
    };
    let armijo = |a: f64, fa: f64| fa.is_finite() && fa <= f0 + options.c1 * a * slope0 + slack;
    let curvature = |s: f64| s.abs() <= options.c2 * slope0.abs();

    let mut a_prev = 0.0;
    let mut f_prev = f0;
    let mut s_prev = slope0;
    let mut a = initial;
    let mut budget = options.max_line_search;
    let (mut lo, mut hi);
    let (mut f_lo, mut s_lo, mut f_hi);
    let mut best: Option<(f64, f64, Vec<f64>)> = None;
    loop {
        if budget == 0 {
            return SearchResult {
                accepted: None,
                evaluations,
            };
        }
        budget -= 1;
        let (fa, ga, sa) = eval(a, &mut evaluations);
        if !fa.is_finite() {
            // shrink towards the last good point
            hi = a;
            f_hi = fa;
            lo = a_prev;
            f_lo = f_prev;
            s_lo = s_prev;
            break;
        }
        if !armijo(a, fa) || (a_prev > 0.0 && fa >= f_prev) {
            lo = a_prev;
            hi = a;
            f_hi = fa;
            f_lo = f_prev;
            s_lo = s_prev;
            break;
        }
        if curvature(sa) {
            return SearchResult {
                accepted: Some((a, fa, ga)),
                evaluations,
            };
        }
        if sa >= 0.0 {
            lo = a;
            hi = a_prev;
            f_hi = f_prev;
            f_lo = fa;
            s_lo = sa;
            best = Some((a, fa, ga));
            break;
        }
        a_prev = a;
        f_prev = fa;
        s_prev = sa;
        best = Some((a, fa, ga));
        a *= 2.0;
    }

    // zoom
    while budget > 0 {
        budget -= 1;
        let trial = interpolate(lo, f_lo, s_lo, hi, f_hi);
        let (fa, ga, sa) = eval(trial, &mut evaluations);
        if !armijo(trial, fa) || fa >= f_lo {
            hi = trial;
            f_hi = fa;
        } else {
            if curvature(sa) {
                return SearchResult {
                    accepted: Some((trial, fa, ga)),
                    evaluations,
                };
            }
            if best.as_ref().is_none_or(|b| fa < b.1) {
                best = Some((trial, fa, ga));
            }
            if sa * (hi - lo) >= 0.0 {
                hi = lo;
                f_hi = f_lo;
            }
            lo = trial;
            f_lo = fa;
            s_lo = sa;
        }
        if (hi - lo).abs() < 1e-16 * lo.abs().max(1e-16) {
            break;
        }
    }
    // fall back to the best point satisfying sufficient decrease
    SearchResult {
        accepted: best,
        evaluations,
    }
}

/// Minimiser of the quadratic matching the value and slope at `lo` and the
/// value at `hi`, kept away from the bracket ends; bisection when the
/// interpolant is unusable.
fn interpolate(lo: f64, f_lo: f64, s_lo: f64, hi: f64, f_hi: f64) -> f64 {
    let w = hi - lo;
    let (a, b) = if lo < hi { (lo, hi) } else { (hi, lo) };
    let margin = 0.1 * (b - a);
    let denom = 2.0 * (f_hi - f_lo - s_lo * w);
    let trial = lo - s_lo * w * w / denom;
    if f_hi.is_finite() && s_lo.is_finite() && denom > 0.0 && trial.is_finite() {
        trial.clamp(a + margin, b - margin)
    } else {
        lo + 0.5 * w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> (f64, Vec<f64>) {
        let (a, b) = (x[0], x[1]);
        let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
        let g = vec![
            -2.0 * (1.0 - a) - 400.0 * a * (b - a * a),
            200.0 * (b - a * a),
        ];
        (f, g)
    }

    #[test]
    fn minimises_rosenbrock() {
        let out = minimize(rosenbrock, &[-1.2, 1.0], &LbfgsOptions::default());
        assert!(out.converged, "{out:?}");
        assert!((out.x[0] - 1.0).abs() < 1e-6);
        assert!((out.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn minimises_ill_conditioned_quadratic() {
        let scales: Vec<f64> = (0..50).map(|i| 10f64.powf(i as f64 / 16.0)).collect();
        let f = |x: &[f64]| {
            let v = x
                .iter()
                .zip(&scales)
                .map(|(xi, s)| 0.5 * s * (xi - 1.0).powi(2))
                .sum();
            let g = x
                .iter()
                .zip(&scales)
                .map(|(xi, s)| s * (xi - 1.0))
                .collect();
            (v, g)
        };
        let out = minimize(f, &vec![0.0; 50], &LbfgsOptions::default());
        assert!(
            out.converged,
            "{} {} {}",
            out.iterations,
            out.evaluations,
            inf_norm(&out.gradient)
        );
        assert!(out.x.iter().all(|v| (v - 1.0).abs() < 1e-6));
    }

    #[test]
    fn respects_barrier() {
        // minimum of x - ln x at 1, infinite for x <= 0
        let f = |x: &[f64]| {
            if x[0] <= 0.0 {
                (f64::INFINITY, vec![0.0])
            } else {
                (x[0] - x[0].ln(), vec![1.0 - 1.0 / x[0]])
            }
        };
        let out = minimize(f, &[8.0], &LbfgsOptions::default());
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-6);
    }
}
