//! Forecast evaluation: metrics, the rolling-origin protocol, demand-pattern
//! statistics and a simulator for the generative model.

mod metrics;
mod protocol;
mod simulate;
mod stats;

pub use metrics::{
    normalized_nll, relative_mae, relative_mse, HorizonAccumulator, HorizonMetrics, MetricsReport,
    Normalizers,
};
pub use protocol::{
    evaluation_windows, parallel_map, score_window, sequential_eval, BaselineForecaster,
    BaselineMethod, EvalOptions, Forecaster, GroupMode, HnbssForecaster, Wrapper,
};
pub use simulate::{
    seasonal_row, simulate, CovariateSpec, SeasonalEncoding, SeriesOverrides, Simulation,
    SimulationConfig,
};
pub use stats::{
    categorize, summary_stats, Cv2Convention, DemandCategory, DemandStats, SeriesStats,
    StatsOptions,
};
