//! The hyperbolic GAF `f_L(z) = Σ_α a_α w_α z^α` and its truncations.

pub mod kernel;
pub mod layer;
pub mod sample;
pub mod series;
pub mod truncation;
pub mod weights;

pub use kernel::{first_intensity_density, kernel, normalized_kernel, rho, KernelEvaluator};
pub use layer::{coefficients_up_to, enumerate_layer, layer_count, LayerIndex};
pub use sample::{
    read_coefficients_csv, sample, trusted_radius, CoefficientDump, GafModel, GafSample,
    PointEvaluator,
};
pub use series::{circle_values_of, log_mean_sq, LayerScales, RadialSeries};
pub use truncation::{
    choose_truncation, envelope_level, log_tail_variance, tail_envelope,
    tail_envelope_unnormalized, TailPolicy,
};
pub use weights::{normalising_constant, WeightTable};
