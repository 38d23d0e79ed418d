//! Monte Carlo, multilevel Monte Carlo and parametric-continuation MLMC
//! estimators for the mean and variance of the pressure head at the final time.

mod estimator;
mod levels;
mod sampling;
mod stats;

pub use estimator::{
    mlmc_variance_field, monte_carlo, pc_mlmc, CostModel, LevelTelemetry, MlmcConfig, MlmcResult,
    MlmcTelemetry,
};
pub use levels::{build_levels, HierarchySpec, LevelSpec};
pub use sampling::{CoupledSample, CoupledSampler, SampleCost};
pub use stats::{
    bias_proxy, fit_rate, l2_norm, level_variance, mean_field, mse_split, optimal_samples,
    variance_field, MseSplit, RateFit,
};
