pub mod baselines;
pub mod dist;
pub mod error;
pub mod eval;
pub mod forecast;
pub mod gmrf;
pub mod laplace;
pub mod model;

pub use error::{Error, Result};
