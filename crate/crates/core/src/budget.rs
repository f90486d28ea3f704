use serde::{Deserialize, Serialize};

/// Work limits for the exact (enumerating) code paths.
///
/// All counts are numbers of enumerated items. `Budgets::uniform` sets the
/// three enumeration limits at once, which is what the command line's
/// budget override does.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budgets {
    /// Perturbation assignments per exact propagation query (`|A|^(rn)`).
    pub enumeration: u64,
    /// Cylinder words times per-word cost for the exact exponent sequence.
    pub words: u64,
    /// Determining words for exact space-time pattern counts.
    pub patterns: u64,
    /// Subset states in the de Bruijn surjectivity construction.
    pub subset_states: u64,
    /// States of any single automaton built by the language engines.
    pub automaton_states: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            enumeration: 1 << 22,
            words: 1 << 24,
            patterns: 1 << 28,
            subset_states: 1_000_000,
            automaton_states: 2_000_000,
        }
    }
}

impl Budgets {
    pub fn uniform(limit: u64) -> Self {
        Budgets {
            enumeration: limit,
            words: limit,
            patterns: limit,
            ..Budgets::default()
        }
    }
}

/// `base^exp` saturating at `u128::MAX`.
pub(crate) fn pow_sat(base: usize, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base as u128);
    }
    acc
}

/// Budgets plus the worker count for data-parallel loops.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub budgets: Budgets,
    /// `None` uses rayon's global pool.
    pub workers: Option<usize>,
}
