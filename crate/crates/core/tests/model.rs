use hnbss::dist::{zinb_log_pmf, ZinbPredictive};
use hnbss::model::{
    initialize, log_likelihood, log_prior, GroupDataset, Initialization, ModelConfig, Objective,
    ParameterState, SeriesData,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::ln_gamma;

fn toy_dataset(
    n_series: usize,
    periods: usize,
    n_cov: usize,
    horizon: usize,
    seed: u64,
) -> GroupDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let series = (0..n_series)
        .map(|l| {
            let values = (0..periods)
                .map(|t| {
                    if t >= periods - horizon || rng.random::<f64>() < 0.1 {
                        None
                    } else if rng.random::<f64>() < 0.3 {
                        Some(0)
                    } else {
                        Some(rng.random_range(0..12))
                    }
                })
                .collect();
            let cov = (0..periods)
                .map(|_| (0..n_cov).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            SeriesData::new(format!("s{l}"), values).with_covariates(cov)
        })
        .collect();
    GroupDataset::new(series, horizon).unwrap()
}

fn random_state(data: &GroupDataset, config: &ModelConfig, rng: &mut ChaCha8Rng) -> ParameterState {
    let mut s = initialize(data, config).unwrap();
    let b = &config.bounds;
    let within = |i: hnbss::model::Interval, rng: &mut ChaCha8Rng| {
        i.lower + i.width() * rng.random_range(0.05..0.95)
    };
    s.global.alpha_bar = within(b.alpha_bar, rng);
    s.global.tau_mu = within(b.tau_mu, rng);
    s.global.kappa_tau = within(b.kappa_tau, rng);
    s.global.beta_tau = within(b.beta_tau, rng);
    s.global.kappa_0tau = within(b.kappa_0tau, rng);
    s.global.beta_0tau = within(b.beta_0tau, rng);
    s.global.kappa_theta = within(b.kappa_theta, rng);
    s.global.beta_theta = within(b.beta_theta, rng);
    s.global.phi_plus = within(b.phi_plus, rng);
    s.global.phi_minus = within(b.phi_minus, rng);
    s.global.mu_mu = rng.random_range(-1.0..2.0);
    for t in s.global.theta_bar.iter_mut() {
        *t = rng.random_range(-0.5..0.5);
    }
    for p in s.series.iter_mut() {
        p.z = rng.random_range(0.05..0.6);
        p.alpha = rng.random_range(0.5..20.0);
        p.tau = rng.random_range(0.5..10.0);
        p.tau_0 = rng.random_range(0.5..10.0);
        p.phi = rng.random_range(0.1..0.95);
        p.mu = rng.random_range(-0.5..2.0);
        p.tau_theta = rng.random_range(0.5..10.0);
        for t in p.theta.iter_mut() {
            *t = rng.random_range(-0.5..0.5);
        }
    }
    for path in s.eta.iter_mut() {
        for e in path.iter_mut() {
            *e = rng.random_range(-1.0..2.5);
        }
    }
    s
}

#[test]
fn gradient_matches_central_differences() {
    for init in [Initialization::Stationary, Initialization::Free] {
        let config = ModelConfig {
            initialization: init,
            ..ModelConfig::default()
        };
        let data = toy_dataset(2, 6, 2, 1, 7);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let state = random_state(&data, &config, &mut rng);
            let obj = Objective::new(&data, &config, &state).unwrap();
            let v = obj.pack(&state).unwrap();
            let (_, g) = obj.value_and_gradient(&v).unwrap();
            let h = 1e-5;
            for i in 0..v.len() {
                let mut vp = v.clone();
                let mut vm = v.clone();
                vp[i] += h;
                vm[i] -= h;
                let fd = (obj.value(&vp).unwrap() - obj.value(&vm).unwrap()) / (2.0 * h);
                let err = (g[i] - fd).abs() / fd.abs().max(1.0);
                assert!(
                    err < 1e-5,
                    "{init:?} coordinate {i} ({:?}): {} vs {fd}",
                    obj.layout().slots()[obj.free_slots()[i]],
                    g[i]
                );
            }
        }
    }
}

#[test]
fn objective_value_is_prior_plus_likelihood_plus_jacobian() {
    let config = ModelConfig::default();
    let data = toy_dataset(2, 5, 1, 1, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let state = random_state(&data, &config, &mut rng);
    let obj = Objective::new(&data, &config, &state).unwrap();
    let v = obj.pack(&state).unwrap();
    let x = obj.constrained(&v).unwrap();
    let jac: f64 = obj
        .free_slots()
        .iter()
        .map(|&i| obj.layout().transform(i).log_jacobian(x[i]))
        .sum();
    let direct = log_prior(&state, &config).unwrap()
        + log_likelihood(&state, &data, 30.0).unwrap().value
        + jac;
    let value = obj.value(&v).unwrap();
    assert!(
        (value - direct).abs() < 1e-8 * direct.abs().max(1.0),
        "{value} vs {direct}"
    );
}

fn ln_normal(x: f64, mean: f64, var: f64) -> f64 {
    -0.5 * (2.0 * std::f64::consts::PI * var).ln() - 0.5 * (x - mean).powi(2) / var
}

fn ln_gamma_pdf(x: f64, shape: f64, scale: f64) -> f64 {
    (shape - 1.0) * x.ln() - x / scale - ln_gamma(shape) - shape * scale.ln()
}

fn ln_beta_pdf(x: f64, a: f64, b: f64) -> f64 {
    (a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln() + ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b)
}

#[test]
fn log_prior_matches_term_by_term_sum() {
    let config = ModelConfig::default();
    let data = toy_dataset(2, 4, 1, 1, 9);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let s = random_state(&data, &config, &mut rng);
    let g = &s.global;
    let b = &config.bounds;
    let mut oracle = 0.0;
    for w in [
        b.alpha_bar.width(),
        b.tau_mu.width(),
        b.kappa_tau.width(),
        b.beta_tau.width(),
        b.kappa_theta.width(),
        b.beta_theta.width(),
        b.phi_plus.width(),
        b.phi_minus.width(),
    ] {
        oracle -= w.ln();
    }
    oracle += ln_normal(g.theta_bar[0], 0.0, 1.0);
    oracle += ln_normal(g.mu_mu, 0.0, 4.0);
    for (l, p) in s.series.iter().enumerate() {
        oracle += ln_beta_pdf(p.z, 0.5, 0.5);
        oracle += g.alpha_bar.ln() - g.alpha_bar * p.alpha;
        oracle += ln_gamma_pdf(p.tau, g.kappa_tau, g.beta_tau);
        oracle += ln_beta_pdf(p.phi, g.phi_plus + g.phi_minus, g.phi_minus);
        oracle += ln_gamma_pdf(p.tau_theta, g.kappa_theta, g.beta_theta);
        oracle += ln_normal(p.theta[0], g.theta_bar[0], 1.0 / p.tau_theta);
        oracle += ln_normal(p.mu, g.mu_mu, 1.0 / g.tau_mu);
        let eta = &s.eta[l];
        oracle += ln_normal(eta[0], p.mu, 1.0 / (p.tau * (1.0 - p.phi * p.phi)));
        for t in 1..eta.len() {
            oracle += ln_normal(eta[t], p.mu + p.phi * (eta[t - 1] - p.mu), 1.0 / p.tau);
        }
    }
    let value = log_prior(&s, &config).unwrap();
    assert!((value - oracle).abs() < 1e-9, "{value} vs {oracle}");
}

#[test]
fn log_prior_rejects_out_of_support_hyperparameters() {
    let config = ModelConfig::default();
    let data = toy_dataset(1, 4, 0, 1, 1);
    let mut s = initialize(&data, &config).unwrap();
    s.global.tau_mu = 20.0;
    assert_eq!(log_prior(&s, &config).unwrap(), f64::NEG_INFINITY);
}

#[test]
fn common_shift_changes_only_the_global_level_prior() {
    let config = ModelConfig::default();
    let data = toy_dataset(2, 5, 0, 1, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let s = random_state(&data, &config, &mut rng);
    let delta = 0.7;
    let mut shifted = s.clone();
    shifted.global.mu_mu += delta;
    for (p, e) in shifted.series.iter_mut().zip(shifted.eta.iter_mut()) {
        p.mu += delta;
        e.iter_mut().for_each(|v| *v += delta);
    }
    let diff = log_prior(&shifted, &config).unwrap() - log_prior(&s, &config).unwrap();
    let expected =
        ln_normal(s.global.mu_mu + delta, 0.0, 4.0) - ln_normal(s.global.mu_mu, 0.0, 4.0);
    assert!((diff - expected).abs() < 1e-10);
}

#[test]
fn likelihood_is_a_sum_of_cell_terms() {
    let config = ModelConfig::default();
    let data = toy_dataset(2, 3, 1, 0, 17);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let s = random_state(&data, &config, &mut rng);
    let mut oracle = 0.0;
    for l in 0..2 {
        for t in 0..3 {
            if let Some(y) = data.value(l, t) {
                let u = s.eta[l][t] + data.x(l, t)[0] * s.series[l].theta[0];
                let p = ZinbPredictive::new(u.exp(), s.series[l].alpha, s.series[l].z).unwrap();
                oracle += zinb_log_pmf(y, &p).unwrap();
            }
        }
    }
    let value = log_likelihood(&s, &data, 30.0).unwrap().value;
    assert!((value - oracle).abs() < 1e-12);

    let unobserved =
        GroupDataset::new(vec![SeriesData::new("a", vec![None, None, None])], 3).unwrap();
    let s = initialize(
        &GroupDataset::new(vec![SeriesData::from_counts("a", &[1, 2, 3])], 0).unwrap(),
        &config,
    )
    .unwrap();
    assert_eq!(log_likelihood(&s, &unobserved, 30.0).unwrap().value, 0.0);

    let single = GroupDataset::new(vec![SeriesData::from_counts("a", &[0])], 0).unwrap();
    let mut s1 = initialize(&single, &config).unwrap();
    s1.series[0].z = 1.0;
    assert_eq!(log_likelihood(&s1, &single, 30.0).unwrap().value, 0.0);
}

#[test]
fn covariate_rescaling_leaves_the_likelihood_unchanged() {
    let config = ModelConfig::default();
    let data = toy_dataset(2, 5, 2, 1, 23);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let s = random_state(&data, &config, &mut rng);
    let scale = 3.5;
    let series = data
        .series()
        .iter()
        .map(|sd| {
            let cov = sd
                .covariates
                .iter()
                .map(|x| vec![x[0] * scale, x[1]])
                .collect();
            sd.clone().with_covariates(cov)
        })
        .collect();
    let scaled = GroupDataset::new(series, 1).unwrap();
    let mut s2 = s.clone();
    for p in s2.series.iter_mut() {
        p.theta[0] /= scale;
    }
    let a = log_likelihood(&s, &data, 30.0).unwrap().value;
    let b = log_likelihood(&s2, &scaled, 30.0).unwrap().value;
    assert!((a - b).abs() < 1e-10);
}

#[test]
fn large_size_without_inflation_approaches_poisson() {
    let config = ModelConfig::default();
    let data = GroupDataset::new(vec![SeriesData::from_counts("a", &[0, 1, 3, 7, 2])], 0).unwrap();
    let mut s = initialize(&data, &config).unwrap();
    s.series[0].z = 0.0;
    s.series[0].alpha = 1e6;
    for (t, y) in [0u64, 1, 3, 7, 2].iter().enumerate() {
        let lambda = s.eta[0][t].exp();
        let nb = log_likelihood(
            &ParameterState {
                eta: vec![vec![s.eta[0][t]]],
                ..s.clone()
            },
            &GroupDataset::new(vec![SeriesData::from_counts("a", &[*y])], 0).unwrap(),
            30.0,
        )
        .unwrap()
        .value;
        let poisson = *y as f64 * lambda.ln() - lambda - ln_gamma(*y as f64 + 1.0);
        assert!((nb - poisson).abs() < 1e-4);
    }
}
