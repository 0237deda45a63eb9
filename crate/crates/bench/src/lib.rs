//! Shared fixtures for the benchmarks.

use emoblog::sim::{run, SimConfig, SimOutput};

/// A short constant-driving run used as benchmark input.
pub fn small_run(steps: u64) -> SimOutput {
    run(SimConfig {
        steps,
        seed: 7,
        ..SimConfig::default()
    })
    .expect("default configuration is valid")
}

/// Deterministic pseudo-random series in `[0, 1)` (a linear congruential
/// sequence), good enough as spectrum input.
pub fn lcg_series(n: usize) -> Vec<f64> {
    let mut x: u64 = 0x2545_f491_4f6c_dd1d;
    (0..n)
        .map(|_| {
            x = x.wrapping_mul(6_364_136_223_846_793_005).wrapping_add(1_442_695_040_888_963_407);
            (x >> 11) as f64 / (1u64 << 53) as f64
        })
        .collect()
}
