use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::gmrf::{build_series_precision, InitialPrecision, SeriesBlock, SparsePrecision, VarId};
use crate::model::{Initialization, Objective, Slot};

fn is_latent(slot: Slot) -> bool {
    matches!(
        slot,
        Slot::Eta(..) | Slot::Mu(_) | Slot::Theta(..) | Slot::MuMu
    )
}

fn var_id(slot: Slot, full_index: usize) -> VarId {
    match slot {
        Slot::Eta(series, period) => VarId::Eta { series, period },
        Slot::Mu(l) => VarId::SeriesMean(l),
        Slot::MuMu => VarId::GlobalMean,
        _ => VarId::Other(full_index),
    }
}

const SERIES_SCALARS: [fn(usize) -> Slot; 6] = [
    Slot::Z,
    Slot::Alpha,
    Slot::Tau,
    Slot::Tau0,
    Slot::Phi,
    Slot::TauTheta,
];

/// Negative Hessian of the log posterior at `v` over the free unconstrained
/// coordinates.
///
/// Rows and columns of latent paths, levels and coefficients are assembled
/// analytically: the Gaussian prior contributes its precision exactly and the
/// likelihood contributes `W_t = −∂²ℓ/∂u²` through `u = η + xᵀθ`. Columns of
/// the remaining scalars are central differences of the analytic gradient
/// with step `step`; one perturbation per scalar kind serves all series at
/// once, since series are conditionally independent given the globals.
pub fn compute_hessian(obj: &Objective, v: &[f64], step: f64) -> Result<SparsePrecision> {
    let layout = obj.layout();
    let free = obj.free_slots();
    let slots = layout.slots();
    let mut pos: Vec<Option<usize>> = vec![None; layout.len()];
    for (k, &i) in free.iter().enumerate() {
        pos[i] = Some(k);
    }
    let x = obj.constrained(v)?;
    let data = obj.data();
    let config = obj.config();
    let idx = |s: Slot| layout.index(s).expect("slot in layout");
    let n_cov = layout.n_covariates;
    let periods = layout.n_periods;

    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    let mut add = |i: usize, j: usize, value: f64| {
        if let (Some(a), Some(b)) = (pos[i], pos[j]) {
            entries.push((a, b, value));
        }
    };

    let tau_mu = x[idx(Slot::TauMu)];
    let i_mm = idx(Slot::MuMu);
    let mut corner = 1.0 / config.mu_mu_variance;
    for l in 0..layout.n_series {
        let block = SeriesBlock {
            tau: x[idx(Slot::Tau(l))],
            phi: x[idx(Slot::Phi(l))],
            tau_mu,
            periods,
            initial: match layout.initialization {
                Initialization::Stationary => InitialPrecision::Stationary,
                Initialization::Free => InitialPrecision::Free {
                    tau0: x[idx(Slot::Tau0(l))],
                },
            },
        };
        let q = build_series_precision(&block)?;
        let e0 = layout.eta_start(l);
        let i_mu = idx(Slot::Mu(l));
        let map = |r: usize| if r < periods { e0 + r } else { i_mu };
        for &(r, c, val) in q.entries() {
            add(map(r), map(c), val);
        }
        add(i_mm, i_mu, -tau_mu);
        corner += tau_mu;

        let z = x[idx(Slot::Z(l))];
        let alpha = x[idx(Slot::Alpha(l))];
        let theta_start = layout.index(Slot::Theta(l, 0));
        let theta: &[f64] = theta_start.map_or(&[], |s| &x[s..s + n_cov]);
        for t in 0..periods {
            let Some(y) = data.value(l, t) else { continue };
            let xt = data.x(l, t);
            let u = x[e0 + t] + xt.iter().zip(theta).map(|(a, b)| a * b).sum::<f64>();
            let w = crate::model::cell_terms(y, u, z, alpha, config.eta_clamp).w;
            add(e0 + t, e0 + t, w);
            if let Some(ts) = theta_start {
                for j in 0..n_cov {
                    add(ts + j, e0 + t, w * xt[j]);
                    for k in 0..=j {
                        add(ts + j, ts + k, w * xt[j] * xt[k]);
                    }
                }
            }
        }
        if let Some(ts) = theta_start {
            let tau_theta = x[idx(Slot::TauTheta(l))];
            for j in 0..n_cov {
                add(ts + j, ts + j, tau_theta);
            }
        }
    }
    add(i_mm, i_mm, corner);

    // finite-difference border
    let mut border: BTreeMap<(usize, usize), (f64, u32)> = BTreeMap::new();
    let mut record = |a: usize, b: usize, value: f64| {
        let key = if a >= b { (a, b) } else { (b, a) };
        let e = border.entry(key).or_insert((0.0, 0));
        e.0 += value;
        e.1 += 1;
    };
    let gradient = |w: &[f64]| -> Result<Vec<f64>> {
        let (f, g) = obj.value_and_gradient(w)?;
        if !f.is_finite() {
            return Err(Error::Numerical(
                "log posterior is not finite near the mode".into(),
            ));
        }
        Ok(g)
    };
    let column = |perturbed: &[usize]| -> Result<Vec<f64>> {
        let mut plus = v.to_vec();
        let mut minus = v.to_vec();
        for &k in perturbed {
            plus[k] += step;
            minus[k] -= step;
        }
        let gp = gradient(&plus)?;
        let gm = gradient(&minus)?;
        Ok(gp
            .iter()
            .zip(&gm)
            .map(|(a, b)| -(a - b) / (2.0 * step))
            .collect())
    };
    let mut series_rows: Vec<Vec<usize>> = vec![Vec::new(); layout.n_series];
    for (k, &i) in free.iter().enumerate() {
        if let Some(l) = slots[i].series() {
            series_rows[l].push(k);
        }
    }
    let check = |value: f64, row: usize, col: usize| -> Result<f64> {
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::Numerical(format!(
                "non-finite second difference at ({}, {})",
                slots[free[row]].name(),
                slots[free[col]].name()
            )))
        }
    };

    for kind in SERIES_SCALARS {
        let cols: Vec<(usize, usize)> = (0..layout.n_series)
            .filter_map(|l| layout.index(kind(l)).and_then(|i| pos[i]).map(|p| (l, p)))
            .collect();
        if cols.is_empty() {
            continue;
        }
        let perturbed: Vec<usize> = cols.iter().map(|&(_, p)| p).collect();
        let diff = column(&perturbed)?;
        for &(l, p) in &cols {
            for &r in &series_rows[l] {
                let value = check(diff[r], r, p)?;
                if value != 0.0 {
                    record(r, p, value);
                }
            }
        }
    }
    for (k, &i) in free.iter().enumerate() {
        if slots[i].series().is_some() || is_latent(slots[i]) {
            continue;
        }
        let diff = column(&[k])?;
        for (r, &value) in diff.iter().enumerate() {
            let value = check(value, r, k)?;
            if value != 0.0 {
                record(r, k, value);
            }
        }
    }
    for ((a, b), (sum, count)) in border {
        entries.push((a, b, sum / f64::from(count)));
    }

    let ids = free.iter().map(|&i| var_id(slots[i], i)).collect();
    SparsePrecision::from_entries(free.len(), entries, ids)
}

/// Elimination order for the sparse factorisation: each series' latent path,
/// level, coefficients and scalars together, the global parameters last.
pub(crate) fn block_ordering(obj: &Objective) -> Vec<usize> {
    let slots = obj.layout().slots();
    let free = obj.free_slots();
    let mut per_series: Vec<Vec<usize>> = vec![Vec::new(); obj.layout().n_series];
    let mut globals = Vec::new();
    let rank = |s: Slot| match s {
        Slot::Eta(_, t) => t,
        Slot::Mu(_) => usize::MAX - 2,
        Slot::Theta(..) => usize::MAX - 1,
        _ => usize::MAX,
    };
    for (k, &i) in free.iter().enumerate() {
        match slots[i].series() {
            Some(l) => per_series[l].push(k),
            None => globals.push(k),
        }
    }
    let mut order = Vec::with_capacity(free.len());
    for mut block in per_series {
        block.sort_by_key(|&k| (rank(slots[free[k]]), k));
        order.extend(block);
    }
    order.extend(globals);
    order
}
