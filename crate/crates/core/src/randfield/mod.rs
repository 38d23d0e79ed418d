//! Random soil-parameter fields.

pub mod chaos;
pub mod matern;
pub mod sampler;
pub mod soil;

pub use chaos::{gpc_weights, hermite, to_nongaussian, Marginal, MarginalSpec};
pub use matern::{bessel_k, matern_cov, MaternSpec};
pub use sampler::{build_sampler, upscale_noise, FieldSampler, WhiteNoise};
pub use soil::{
    sample_soil, NoiseBounds, FIELD_NAMES, Nonlinearity, Randomize, SoilBaseline, SoilGenerator, SoilModel,
    SoilNoise, SoilRealization,
};
