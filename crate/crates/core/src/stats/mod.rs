//! Linear statistics, variance asymptotics, rare-event campaigns and identity checks.

pub mod campaign;
pub mod identities;
pub mod linear;
pub mod submean;
pub mod summary;
pub mod testfn;
pub mod variance;

pub use campaign::{
    fluctuation_trials, hole_campaign, intensity_campaign, large_deviation_campaign,
    normality_campaign, normality_summary, run_trials, CertificateOverlay, DecayCurve, DecayPoint,
    Deviation, ExceedanceTrial, FluctuationTrial, HoleResult, HoleTrial, IntensityResult,
    IntensityTrial, LargeDeviationResult, NormalityResult, NormalitySummary,
};
pub use identities::{
    condition_b_integral, identity_suite, invariant_suite, kernel_partial_sum, layer_sum_exact,
    layer_sum_grid, truncated_beta_closed, truncated_beta_variant, verify_identity, IdentityCheck,
    IdentityReport, IdentityStatus,
};
pub use linear::{
    dpsi_sq_integral, expected_linear_statistic, fluctuation, fluctuation_on_grid,
    linear_statistic, mu_integral, potential_weight, radial_pairing, root_sum, sphere_directions,
    Fluctuation, LinearStatSample, PotentialSettings, StatMethod,
};
pub use submean::{
    control_max_frequency, in_invariant_ball, max_log_on_ball, random_centre, submean_check,
    ControlPoint, SubmeanSettings, SubmeanSlack,
};
pub use summary::{
    ks_normal, ks_one_sample, ks_two_sample, least_squares, moments, wilson_interval, KsResult,
    LinearFit, Moments,
};
pub use testfn::{
    d_operator, finite_difference_hessian, radial_d, wedge_density, MollifiedIndicator, PseudoBump,
    RadialBump, TestFunction,
};
pub use variance::{
    radial_factor, self_averaging_slope, variance_asymptote, variance_monte_carlo,
    variance_quadrature, VarianceEstimate, VarianceRule,
};
