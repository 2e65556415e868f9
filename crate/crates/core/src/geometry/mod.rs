//! Geometry of the unit ball `𝔹ₙ ⊂ ℂⁿ`.

pub mod automorphism;
pub mod grid;
pub mod measures;
pub mod point;

pub use automorphism::{
    mobius_apply, one_minus_pseudo_distance_sq, pseudo_distance, pseudo_distance_sq, Automorphism,
};
pub use grid::{build_grid, simplex_rule, GridRule, QuadratureGrid};
pub use measures::{
    epsilon_mean, invariant_volume_ball, mu_density, omega_matrix, radial_nu_integral,
    MeasureDensities,
};
pub use point::Point;
