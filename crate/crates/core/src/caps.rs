//! Resource caps. Defaults can be overridden through environment variables
//! (`HYPERGAF_MAX_DEGREE`, `HYPERGAF_MAX_COEFFICIENTS`, `HYPERGAF_MAX_GRID_NODES`,
//! `HYPERGAF_MAX_FFT`).

use crate::error::{GafError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    /// Largest truncation degree a sample may use.
    pub max_degree: usize,
    /// Largest number of coefficients (all layers) in one sample.
    pub max_coefficients: u64,
    /// Largest number of nodes in one quadrature grid.
    pub max_grid_nodes: u64,
    /// Largest FFT length used by circle evaluations.
    pub max_fft: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_degree: 20_000,
            max_coefficients: 5_000_000,
            max_grid_nodes: 50_000_000,
            max_fft: 1 << 16,
        }
    }
}

fn env_override<T: std::str::FromStr>(name: &str, fallback: T) -> T {
    std::env::var(name)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(fallback)
}

impl Caps {
    pub fn from_env() -> Self {
        let d = Caps::default();
        Caps {
            max_degree: env_override("HYPERGAF_MAX_DEGREE", d.max_degree),
            max_coefficients: env_override("HYPERGAF_MAX_COEFFICIENTS", d.max_coefficients),
            max_grid_nodes: env_override("HYPERGAF_MAX_GRID_NODES", d.max_grid_nodes),
            max_fft: env_override("HYPERGAF_MAX_FFT", d.max_fft),
        }
    }

    pub(crate) fn check(what: &'static str, requested: u64, cap: u64) -> Result<()> {
        if requested > cap {
            Err(GafError::Resource {
                what,
                requested,
                cap,
            })
        } else {
            Ok(())
        }
    }
}
