//! Hierarchical zero-inflated negative-binomial state-space model: dataset,
//! parameter layout, and the log posterior with its analytic gradient.

mod dataset;
mod params;
mod posterior;

pub use dataset::{GroupDataset, SeriesData};
pub use params::{
    FixedBlocks, GlobalParams, HyperBounds, Initialization, Interval, Layout, ModelConfig,
    ParameterState, SeriesParams, Slot, Transform,
};
pub(crate) use posterior::cell_terms;
pub use posterior::{
    initialize, log_likelihood, log_prior, FullEvaluation, LikelihoodValue, Objective,
};
