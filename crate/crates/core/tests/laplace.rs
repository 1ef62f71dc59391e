use hnbss::eval::{simulate, CovariateSpec, SeriesOverrides, SimulationConfig};
use hnbss::forecast::{eta_tilde_moments, predictive};
use hnbss::gmrf::{build_hierarchical_precision, InitialPrecision, SeriesBlock, VarId};
use hnbss::laplace::{compute_hessian, fit, FitOptions};
use hnbss::model::{
    initialize, GlobalParams, GroupDataset, HyperBounds, ModelConfig, Objective, SeriesData, Slot,
};

fn sim(n_series: usize, periods: usize, covariates: CovariateSpec, seed: u64) -> GroupDataset {
    simulate(&SimulationConfig {
        n_series,
        n_periods: periods,
        covariates,
        global: GlobalParams::midpoints(&HyperBounds::default(), 0),
        overrides: SeriesOverrides::default(),
        seed,
    })
    .unwrap()
    .data
}

fn dense_inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut r = r.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs()))
            .unwrap();
        m.swap(c, p);
        let d = m[c][c];
        m[c].iter_mut().for_each(|v| *v /= d);
        let pivot = m[c].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != c {
                let f = row[c];
                row.iter_mut().zip(&pivot).for_each(|(x, y)| *x -= f * y);
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

#[test]
fn hessian_without_data_is_the_prior_precision() {
    let data = GroupDataset::new(
        vec![
            SeriesData::new("a", vec![None; 5]),
            SeriesData::new("b", vec![None; 5]),
        ],
        0,
    )
    .unwrap();
    let mut config = ModelConfig::default();
    config.fixed.hyper = true;
    config.fixed.series = true;
    let observed = GroupDataset::new(
        vec![
            SeriesData::from_counts("a", &[1; 5]),
            SeriesData::from_counts("b", &[2; 5]),
        ],
        0,
    )
    .unwrap();
    let mut state = initialize(&observed, &config).unwrap();
    state.series[0].phi = 0.4;
    state.series[1].tau = 3.0;
    let obj = Objective::new(&data, &config, &state).unwrap();
    let v = obj.pack(&state).unwrap();
    let h = compute_hessian(&obj, &v, 1e-5).unwrap();

    let blocks: Vec<SeriesBlock> = state
        .series
        .iter()
        .map(|s| SeriesBlock {
            tau: s.tau,
            phi: s.phi,
            tau_mu: state.global.tau_mu,
            periods: 5,
            initial: InitialPrecision::Stationary,
        })
        .collect();
    let q = build_hierarchical_precision(&blocks, 1.0 / config.mu_mu_variance).unwrap();
    assert_eq!(h.dim(), q.dim());
    let to_h: Vec<usize> = q
        .layout()
        .iter()
        .map(|id| h.layout().iter().position(|x| x == id).unwrap())
        .collect();
    for i in 0..q.dim() {
        for j in 0..q.dim() {
            let got = h.get(to_h[i], to_h[j]);
            assert!(
                (got - q.get(i, j)).abs() < 1e-12,
                "{:?} {:?}: {got} vs {}",
                q.layout()[i],
                q.layout()[j],
                q.get(i, j)
            );
        }
    }
}

#[test]
fn hessian_matches_dense_differences_of_the_gradient() {
    let data = sim(2, 5, CovariateSpec::Gaussian { columns: 1 }, 3)
        .window(4, 1)
        .unwrap();
    let config = ModelConfig::default();
    let post = fit(&data, &config, &FitOptions::default()).unwrap();
    let obj = Objective::new(&data, &config, post.mode()).unwrap();
    let v = post.mode_vector().to_vec();
    let h = post.hessian();
    let step = 1e-5;
    let mut worst: f64 = 0.0;
    for j in 0..v.len() {
        let mut vp = v.clone();
        let mut vm = v.clone();
        vp[j] += step;
        vm[j] -= step;
        let gp = obj.value_and_gradient(&vp).unwrap().1;
        let gm = obj.value_and_gradient(&vm).unwrap().1;
        for i in 0..v.len() {
            let fd = -(gp[i] - gm[i]) / (2.0 * step);
            worst = worst.max((h.get(i, j) - fd).abs() / fd.abs().max(1.0));
        }
    }
    assert!(worst < 1e-4, "{worst}");
}

#[test]
fn series_do_not_couple_directly() {
    let data = sim(3, 12, CovariateSpec::None, 4).window(10, 2).unwrap();
    let post = fit(&data, &ModelConfig::default(), &FitOptions::default()).unwrap();
    let h = post.hessian();
    for &(i, j, _) in h.entries() {
        let series = |id: VarId| match id {
            VarId::Eta { series, .. } => Some(series),
            VarId::SeriesMean(l) => Some(l),
            _ => None,
        };
        if let (Some(a), Some(b)) = (series(h.layout()[i]), series(h.layout()[j])) {
            assert_eq!(a, b, "entry ({i}, {j}) couples two series");
        }
    }
}

#[test]
fn horizon_mean_reverts_to_the_level() {
    let data = sim(1, 30, CovariateSpec::None, 5).window(24, 6).unwrap();
    let post = fit(&data, &ModelConfig::default(), &FitOptions::default()).unwrap();
    let s = &post.mode().series[0];
    let eta = &post.mode().eta[0];
    let last = eta[23] - s.mu;
    for (k, h) in post.moments()[0].horizon.iter().enumerate() {
        let expected = s.mu + s.phi.powi(k as i32 + 1) * last;
        assert!(
            (h.eta_mean - expected).abs() < 1e-5,
            "step {}: {} vs {expected}",
            k + 1,
            h.eta_mean
        );
    }
    let vars: Vec<f64> = post.moments()[0]
        .horizon
        .iter()
        .map(|h| h.eta_variance)
        .collect();
    assert!(vars.windows(2).all(|w| w[1] >= w[0]), "{vars:?}");
}

#[test]
fn moments_follow_series_permutation() {
    let data = sim(3, 14, CovariateSpec::Gaussian { columns: 1 }, 6)
        .window(12, 2)
        .unwrap();
    let swapped = data.select(&[2, 0, 1]).unwrap();
    let a = fit(&data, &ModelConfig::default(), &FitOptions::default()).unwrap();
    let b = fit(&swapped, &ModelConfig::default(), &FitOptions::default()).unwrap();
    for (from, to) in [(2, 0), (0, 1), (1, 2)] {
        let (x, y) = (&a.moments()[from], &b.moments()[to]);
        assert!((x.mu_mean - y.mu_mean).abs() < 1e-4);
        assert!((x.mu_variance - y.mu_variance).abs() < 1e-4 * x.mu_variance.max(1.0));
        for (p, q) in x.horizon.iter().zip(&y.horizon) {
            assert!((p.eta_mean - q.eta_mean).abs() < 1e-4);
            assert!((p.eta_variance - q.eta_variance).abs() < 1e-4 * p.eta_variance.max(1.0));
        }
    }
}

#[test]
fn predictive_moments_match_dense_covariance() {
    let data = sim(2, 16, CovariateSpec::Gaussian { columns: 2 }, 7)
        .window(13, 3)
        .unwrap();
    let post = fit(&data, &ModelConfig::default(), &FitOptions::default()).unwrap();
    let cov = dense_inverse(&post.hessian().to_dense());
    let layout = post.layout();
    let free = layout.free_indices();
    let pos = |slot: Slot| free.binary_search(&layout.index(slot).unwrap()).unwrap();
    let set = predictive(&post, &data).unwrap();
    for l in 0..2 {
        for t in 13..16 {
            let x = data.x(l, t);
            let mut idx = vec![pos(Slot::Eta(l, t))];
            let mut w = vec![1.0];
            for (j, &xj) in x.iter().enumerate() {
                idx.push(pos(Slot::Theta(l, j)));
                w.push(xj);
            }
            let var: f64 = (0..idx.len())
                .flat_map(|a| (0..idx.len()).map(move |b| (a, b)))
                .map(|(a, b)| w[a] * w[b] * cov[idx[a]][idx[b]])
                .sum();
            let theta = &post.mode().series[l].theta;
            let mean = post.mode().eta[l][t] + x.iter().zip(theta).map(|(a, b)| a * b).sum::<f64>();
            let (m, v) = eta_tilde_moments(&post, l, t, x).unwrap();
            assert!((m - mean).abs() < 1e-12);
            assert!((v - var).abs() < 1e-8 * var.max(1.0), "{v} vs {var}");
            let cell = set.get(l, t - 12).unwrap();
            assert_eq!(cell.period, t);
            assert!(
                (cell.predictive.mu - (mean + 0.5 * var).exp()).abs() < 1e-8 * cell.predictive.mu
            );
            assert_eq!(cell.predictive.alpha, post.mode().series[l].alpha);
        }
    }
}

#[test]
fn intervals_are_ordered_and_fixed_slots_degenerate() {
    let data = sim(1, 20, CovariateSpec::None, 8).window(18, 2).unwrap();
    let mut config = ModelConfig::default();
    config.fixed.series = true;
    let post = fit(&data, &config, &FitOptions::default()).unwrap();
    let (lo, hi) = post.interval(Slot::Mu(0), 0.95).unwrap();
    assert!(lo < post.mode().series[0].mu && post.mode().series[0].mu < hi);
    let (a, b) = post.interval(Slot::Alpha(0), 0.95).unwrap();
    assert_eq!(a, b);
    assert!(post.variance(Slot::Alpha(0)).unwrap().is_none());
    assert!(post.interval(Slot::Theta(0, 0), 0.95).is_err());
}
