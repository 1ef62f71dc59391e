//! Subcommand implementations. Every command writes plain CSV files into
//! the output directory.

use std::fs;
use std::path::{Path, PathBuf};

use hnbss::eval::{
    parallel_map, sequential_eval, simulate, summary_stats, BaselineForecaster, BaselineMethod,
    DemandCategory, EvalOptions, Forecaster, GroupMode, HnbssForecaster, MetricsReport,
    SimulationConfig, Wrapper,
};
use hnbss::forecast::predictive;
use hnbss::laplace::{fit, Diagnostics, LaplacePosterior};
use hnbss::model::{GroupDataset, Layout, ParameterState, Slot};
use log::info;

use crate::config::{BaselineKind, RunConfig};
use crate::error::{CliError, Result};
use crate::ingest::{read_table, write_table, Table};

fn output_path(config: &RunConfig, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(&config.output_dir).map_err(|e| CliError::io(&config.output_dir, e))?;
    Ok(config.output_dir.join(name))
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
}

fn finish(mut w: csv::Writer<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| CliError::io(path, e))?;
    info!("wrote {}", path.display());
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

/// Saves the effective configuration next to the outputs.
pub fn write_config(config: &RunConfig) -> Result<()> {
    let path = output_path(config, "config.toml")?;
    fs::write(&path, config.to_toml()?).map_err(|e| CliError::io(&path, e))
}

/// Input table on the forecast axis and the dataset built from it, with
/// the group subset, seasonal columns and masks applied.
pub fn load(config: &RunConfig) -> Result<(Table, GroupDataset)> {
    let input = config.input.as_deref().ok_or_else(|| {
        CliError::Config("no input file; pass --input or set `input` in the config".into())
    })?;
    let mut table = read_table(input)?;
    if let Some(ids) = &config.group.series {
        table = table.select(ids)?;
    }
    let seasonal = config.seasonal.map(|s| (s.period, s.encoding));
    let (table, mut data) = table.to_dataset(config.horizon, seasonal)?;
    for mask in &config.group.masks {
        let l = table.position(&mask.series).ok_or_else(|| {
            CliError::Config(format!(
                "masked series '{}' is not in the input",
                mask.series
            ))
        })?;
        data.mask_series(l, mask.keep);
    }
    Ok((table, data))
}

/// Fits to run: the whole group, or one single-series group per series.
fn fit_groups(
    config: &RunConfig,
    data: &GroupDataset,
) -> Result<Vec<(Vec<usize>, LaplacePosterior)>> {
    let groups: Vec<Vec<usize>> = match config.group_mode {
        GroupMode::Hierarchical => vec![(0..data.n_series()).collect()],
        GroupMode::Independent => (0..data.n_series()).map(|l| vec![l]).collect(),
    };
    let fits = parallel_map(groups.len(), config.workers, |g| {
        let subset = data.select(&groups[g])?;
        fit(&subset, &config.model, &config.fit)
    });
    groups
        .into_iter()
        .zip(fits)
        .map(|(g, f)| {
            let post = f?;
            if !post.diagnostics().converged {
                log::warn!(
                    "optimiser stopped with gradient norm {:e} above tolerance",
                    post.diagnostics().gradient_norm
                );
            }
            Ok((g, post))
        })
        .collect()
}

const POSTERIOR_HEADER: [&str; 6] = [
    "scope",
    "series_id",
    "parameter",
    "estimate",
    "lower",
    "upper",
];

fn write_posterior_rows(
    w: &mut csv::Writer<fs::File>,
    post: &LaplacePosterior,
    ids: &[&str],
    level: f64,
) -> Result<()> {
    let layout = post.layout();
    let values = layout.flatten(post.mode())?;
    for (i, slot) in layout.slots().iter().enumerate() {
        if matches!(slot, Slot::Eta(..)) {
            continue;
        }
        let (scope, id) = match slot.series() {
            Some(l) => ("series", ids[l]),
            // per-series fits have their own globals
            None if ids.len() == 1 => ("global", ids[0]),
            None => ("global", ""),
        };
        let (lo, hi) = post.interval(*slot, level)?;
        w.write_record([
            scope,
            id,
            &slot.name(),
            &values[i].to_string(),
            &lo.to_string(),
            &hi.to_string(),
        ])?;
    }
    Ok(())
}

fn write_diagnostics(config: &RunConfig, rows: &[(String, &Diagnostics)]) -> Result<()> {
    let path = output_path(config, "diagnostics.csv")?;
    let mut w = writer(&path)?;
    w.write_record([
        "series_id",
        "iterations",
        "evaluations",
        "newton_steps",
        "gradient_norm",
        "converged",
        "ridge",
        "clamped",
        "log_posterior",
    ])?;
    for (id, d) in rows {
        w.write_record([
            id.clone(),
            d.iterations.to_string(),
            d.evaluations.to_string(),
            d.newton_steps.to_string(),
            d.gradient_norm.to_string(),
            d.converged.to_string(),
            d.ridge.to_string(),
            d.clamped.to_string(),
            d.log_posterior.to_string(),
        ])?;
    }
    finish(w, &path)
}

fn diagnostic_rows<'a>(
    fits: &'a [(Vec<usize>, LaplacePosterior)],
    table: &Table,
) -> Vec<(String, &'a Diagnostics)> {
    fits.iter()
        .map(|(g, post)| {
            let id = if g.len() == 1 && fits.len() > 1 {
                table.ids[g[0]].clone()
            } else {
                String::new()
            };
            (id, post.diagnostics())
        })
        .collect()
}

pub fn run_fit(config: &RunConfig) -> Result<()> {
    let (table, data) = load(config)?;
    let fits = fit_groups(config, &data)?;
    let path = output_path(config, "posterior.csv")?;
    let mut w = writer(&path)?;
    w.write_record(POSTERIOR_HEADER)?;
    for (g, post) in &fits {
        let ids: Vec<&str> = g.iter().map(|&l| table.ids[l].as_str()).collect();
        write_posterior_rows(&mut w, post, &ids, config.interval_level)?;
    }
    finish(w, &path)?;
    write_diagnostics(config, &diagnostic_rows(&fits, &table))
}

pub fn run_forecast(config: &RunConfig) -> Result<()> {
    if config.horizon == 0 {
        return Err(CliError::Config(
            "forecast needs a horizon of at least one period".into(),
        ));
    }
    let (table, data) = load(config)?;
    let fits = fit_groups(config, &data)?;
    let path = output_path(config, "forecast.csv")?;
    let mut w = writer(&path)?;
    let mut header: Vec<String> = ["series_id", "period", "step", "mean", "variance"]
        .map(String::from)
        .to_vec();
    header.extend(config.quantiles.iter().map(|q| format!("q{q}")));
    header.extend(["mu", "alpha", "z", "eta_mean", "eta_variance"].map(String::from));
    w.write_record(&header)?;
    for (g, post) in &fits {
        let subset = data.select(g)?;
        let set = predictive(post, &subset)?;
        for cell in &set.cells {
            let p = &cell.predictive;
            let mut rec = vec![
                table.ids[g[cell.series]].clone(),
                table.periods[cell.period].to_string(),
                cell.step.to_string(),
                p.mean().to_string(),
                p.variance().to_string(),
            ];
            rec.extend(
                cell.quantiles(&config.quantiles)?
                    .iter()
                    .map(u64::to_string),
            );
            rec.extend(
                [
                    p.mu,
                    p.alpha,
                    p.z,
                    cell.eta_tilde_mean,
                    cell.eta_tilde_variance,
                ]
                .map(|v| v.to_string()),
            );
            w.write_record(&rec)?;
        }
    }
    finish(w, &path)?;
    write_diagnostics(config, &diagnostic_rows(&fits, &table))
}

fn forecasters(config: &RunConfig) -> Vec<Box<dyn Forecaster>> {
    let mut hnbss = HnbssForecaster::new(config.model.clone(), config.group_mode);
    hnbss.options = config.fit;
    // windows are already spread over the workers
    hnbss.workers = 1;
    let mut out: Vec<Box<dyn Forecaster>> = vec![Box::new(hnbss)];
    for kind in &config.baselines.enabled {
        let method = match kind {
            BaselineKind::Croston => BaselineMethod::Croston {
                smoothing: config.baselines.croston_smoothing,
            },
            BaselineKind::Ses => BaselineMethod::Ses {
                smoothing: config.baselines.ses_smoothing,
            },
        };
        for wrapper in [Wrapper::Gaussian, Wrapper::Poisson] {
            out.push(Box::new(BaselineForecaster { method, wrapper }));
        }
    }
    out
}

pub fn run_evaluate(config: &RunConfig) -> Result<()> {
    let (_, data) = load(config)?;
    let train = data.n_train();
    let initial = config
        .evaluate
        .initial_train
        .unwrap_or((train * 4 / 5).max(1));
    let mut options = EvalOptions::new(initial, config.evaluate.max_horizon);
    options.workers = config.workers;
    let reports = forecasters(config)
        .iter()
        .map(|f| {
            info!("evaluating {}", f.name());
            sequential_eval(f.as_ref(), &data, &options)
        })
        .collect::<hnbss::Result<Vec<MetricsReport>>>()?;

    let path = output_path(config, "metrics.csv")?;
    let mut w = writer(&path)?;
    w.write_record(["model", "horizon", "metric", "value", "cells", "excluded"])?;
    for r in &reports {
        for h in &r.horizons {
            for (metric, value, excluded) in [
                ("nll", h.nll, h.zero_mass_cells),
                ("relative_mse", h.relative_mse, h.mse_excluded),
                ("relative_mae", h.relative_mae, h.mae_excluded),
            ] {
                w.write_record([
                    r.model.clone(),
                    h.horizon.to_string(),
                    metric.to_string(),
                    value.to_string(),
                    h.cells.to_string(),
                    excluded.to_string(),
                ])?;
            }
        }
    }
    finish(w, &path)?;

    let path = output_path(config, "evaluation.csv")?;
    let mut w = writer(&path)?;
    w.write_record(["model", "windows", "failed_windows"])?;
    for r in &reports {
        w.write_record([
            r.model.clone(),
            r.windows.to_string(),
            r.failed_windows.to_string(),
        ])?;
    }
    finish(w, &path)
}

fn write_truth(
    path: &Path,
    truth: &ParameterState,
    data: &GroupDataset,
    config: &RunConfig,
) -> Result<()> {
    let layout = Layout::new(
        data.n_series(),
        data.n_periods(),
        data.n_covariates(),
        &config.model,
    );
    let values = layout.flatten(truth)?;
    let mut w = writer(path)?;
    w.write_record(["scope", "series_id", "parameter", "value"])?;
    for (slot, v) in layout.slots().iter().zip(&values) {
        let (scope, id) = match slot.series() {
            Some(l) => (
                if matches!(slot, Slot::Eta(..)) {
                    "latent"
                } else {
                    "series"
                },
                data.series()[l].id.as_str(),
            ),
            None => ("global", ""),
        };
        w.write_record([scope, id, &slot.name(), &v.to_string()])?;
    }
    finish(w, path)
}

pub fn run_simulate(config: &RunConfig) -> Result<()> {
    let s = &config.simulate;
    let sim = simulate(&SimulationConfig {
        n_series: s.n_series,
        n_periods: s.n_periods,
        covariates: s.covariates.clone(),
        global: s.global.clone(),
        overrides: s.overrides.clone(),
        seed: config.seed,
    })?;
    let path = output_path(config, "dataset.csv")?;
    write_table(&path, &Table::from_dataset(&sim.data))?;
    info!("wrote {}", path.display());
    write_truth(
        &output_path(config, "truth.csv")?,
        &sim.truth,
        &sim.data,
        config,
    )
}

pub fn run_stats(config: &RunConfig) -> Result<()> {
    let (_, data) = load(config)?;
    let stats = summary_stats(&data, &config.stats);
    let path = output_path(config, "stats.csv")?;
    let mut w = writer(&path)?;
    w.write_record([
        "series_id",
        "observed",
        "mean_nonzero",
        "inter_period",
        "cv2",
        "category",
    ])?;
    for s in &stats.series {
        w.write_record([
            s.id.clone(),
            s.observed.to_string(),
            opt(s.mean_nonzero),
            opt(s.inter_period),
            opt(s.cv2),
            s.category.map_or(String::new(), |c| c.name().to_string()),
        ])?;
    }
    finish(w, &path)?;

    let path = output_path(config, "stats_summary.csv")?;
    let mut w = writer(&path)?;
    w.write_record(["statistic", "value"])?;
    let mut rows = vec![
        ("series".to_string(), stats.series.len().to_string()),
        ("mean_nonzero".into(), stats.mean_nonzero.to_string()),
        (
            "mean_inter_period".into(),
            stats.mean_inter_period.to_string(),
        ),
        ("mean_cv2".into(), stats.mean_cv2.to_string()),
    ];
    for (c, p) in DemandCategory::ALL.iter().zip(stats.percentages) {
        rows.push((format!("percent_{}", c.name()), p.to_string()));
    }
    rows.push(("uncategorized".into(), stats.uncategorized.to_string()));
    for (k, v) in rows {
        w.write_record([k, v])?;
    }
    finish(w, &path)
}
