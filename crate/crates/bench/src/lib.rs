//! Shared fixtures for the criterion benchmarks.

use shc_core::sbm::{generate, SbmInstance, SbmParams};

/// SBM instance with about `avg_degree · n / 2` edges and `q = p/4`.
pub fn sbm_fixture(n: usize, k: usize, avg_degree: f64, seed: u64) -> SbmInstance {
    let block = (n / k) as f64;
    let p = (avg_degree / (block + (n as f64 - block) / 4.0)).min(1.0);
    generate(&SbmParams::new(n, k, p, p / 4.0, seed)).expect("valid fixture parameters")
}
