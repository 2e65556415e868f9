//! Zeros of samples: roots and certified counts in dimension one, line-by-line evidence
//! in higher dimension, and the coefficient events that force a hole.

pub mod certificate;
pub mod report;
pub mod roots;
pub mod winding;

pub use certificate::{
    certificate_bounds, certificate_log_probability, certificate_sample, min_modulus_on_disk,
    scan_constant, CertificateBounds, CertificateLogProbability, ConstantScan, HoleCertificateSpec,
};
pub use report::{
    count_disk, hole_from_roots, hole_indicator, roots_disk, truncation_roots, winding_disk,
    Certainty, CountMode, HoleCheck, HoleVerdict, ZeroReport,
};
pub use roots::{polynomial_roots, relative_residual};
pub use winding::{winding_count, WindingCount};
