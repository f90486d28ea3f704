//! Alphabets, rules, finite windows, evolution and sampling.

pub mod builtin;
mod config;
pub mod io;
mod measure;
mod rule;

pub use builtin::{coven_rule, example2_f2_rule, product_rule};
pub use config::{apply, evolve, shift_config, Config, SpaceTimeDiagram, Word};
pub(crate) use config::step_cells;
pub use measure::{sample_config, sample_config_keyed, MeasureSpec};
pub use rule::{make_rule, Alphabet, Rule, Symbol, MAX_ALPHABET, MAX_TABLE};

/// Splits a product-alphabet window into its two factor windows.
pub(crate) fn split_product(config: &Config, second_size: usize) -> (Config, Config) {
    let n = second_size as Symbol;
    (config.map(|s| s / n), config.map(|s| s % n))
}
