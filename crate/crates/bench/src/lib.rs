//! Workload builders shared by the criterion benches.

use vprisk_core::synth::{generate, SimConfig};
use vprisk_core::{quantize::quantize_event, DecisionTable, QuantizedRecord};

/// Quantized table of `n` sampled events with the default planted rules.
pub fn sampled_table(n: usize, seed: u64, noise: f64) -> DecisionTable {
    let cfg = SimConfig {
        sample_count: n,
        seed,
        label_noise: noise,
        ..SimConfig::default()
    };
    let events = generate(&cfg).expect("default config is feasible");
    let records: Vec<QuantizedRecord> = events
        .iter()
        .map(|e| quantize_event(e).expect("generated events are valid"))
        .collect();
    DecisionTable::from_records(&records)
}
