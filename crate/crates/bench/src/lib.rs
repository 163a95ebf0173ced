//! Fixtures shared by the criterion benchmarks.

use labelcut_core::generate::{generate_instance, GenConfig};
use labelcut_core::Instance;

/// Class-1 BA instance with `5 n` edges, 20 blockable labels and 50 scenarios.
pub fn ba_instance(nodes: usize, rng_seed: u64) -> Instance {
    let config = GenConfig {
        nodes,
        edges: 5 * nodes,
        rng_seed,
        ..GenConfig::default()
    };
    generate_instance(&config).expect("benchmark configuration is valid")
}

/// A fractional point that spreads the budget evenly over blockable labels.
pub fn even_point(instance: &Instance) -> Vec<f64> {
    let blockable = (0..instance.label_count() as u32)
        .filter(|&l| !instance.is_unblockable(l))
        .count()
        .max(1);
    let share = (instance.budget() / blockable as f64).min(1.0);
    (0..instance.label_count() as u32)
        .map(|l| if instance.is_unblockable(l) { 0.0 } else { share })
        .collect()
}
