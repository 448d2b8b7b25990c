//! The conditional data model: a label process emits `Y_1..Y_n`, then each
//! object `X_i` is drawn independently from `P_{Y_i}`.

mod labels;
mod pair;
mod sample;

pub use labels::{
    frequency_in_band, labels_from_str, occupancy_prob, occupancy_prob_mc, BlockRule, Label, LabelProcess, Occupancy,
    OccupancyMethod, DEFAULT_OCCUPANCY_RUNS, MARKOV_EXACT_MAX_N,
};
pub use pair::{AxisBox, ClassConditionalPair, Interval, WeightedPoint};
pub use sample::LabeledSample;

/// Draw `n` labels from `process`, then objects from `pair`.
///
/// Labels and objects use separate streams derived from `seed`.
pub fn generate(process: &LabelProcess, pair: &ClassConditionalPair, n: usize, seed: u64) -> LabeledSample {
    let labels = process.sample(n, crate::rng::derive_seed(seed, 0));
    pair.sample_objects(&labels, crate::rng::derive_seed(seed, 1))
}
