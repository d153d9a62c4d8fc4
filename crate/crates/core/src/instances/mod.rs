//! Built-in instances: the real school network, the seeded generator and
//! tiny toys for exhaustive checks.

mod generator;
pub mod real_case;
mod toy;

pub use generator::{
    generate_synthetic, round_ratio, GeneratedCounts, GeneratorConfig, GeneratorError,
    MAX_BINDING_RESAMPLES,
};
pub use real_case::build_real_case;
pub use toy::{generate_toy, ToySpec};
