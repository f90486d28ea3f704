use serde::{Deserialize, Serialize};

use crate::ca::{Config, Rule, Symbol};
use crate::error::{Error, Result};

/// Bit set of symbols; alphabets up to 64 symbols.
pub type SymbolSet = u64;

pub const MAX_SET_ALPHABET: usize = 64;

pub fn full_set(size: usize) -> SymbolSet {
    if size >= 64 {
        u64::MAX
    } else {
        (1u64 << size) - 1
    }
}

/// Per-cell symbol sets over a window. Cells outside the window are the
/// full alphabet.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SetConfig {
    sets: Vec<SymbolSet>,
    origin: i64,
    alphabet_size: usize,
}

impl SetConfig {
    pub fn new(sets: Vec<SymbolSet>, origin: i64, alphabet_size: usize) -> Result<Self> {
        if alphabet_size > MAX_SET_ALPHABET {
            return Err(Error::Invalid(format!(
                "set-valued evolution supports at most {MAX_SET_ALPHABET} symbols"
            )));
        }
        let full = full_set(alphabet_size);
        if let Some(k) = sets.iter().position(|&s| s == 0 || s & !full != 0) {
            return Err(Error::Invalid(format!(
                "cell {} has an empty or out-of-range set",
                origin + k as i64
            )));
        }
        Ok(SetConfig {
            sets,
            origin,
            alphabet_size,
        })
    }

    /// Singletons copied from a configuration window.
    pub fn from_config(config: &Config, alphabet_size: usize) -> Result<Self> {
        let sets = config.cells().iter().map(|&s| 1u64 << s).collect();
        SetConfig::new(sets, config.origin(), alphabet_size)
    }

    pub fn origin(&self) -> i64 {
        self.origin
    }

    pub fn end(&self) -> i64 {
        self.origin + self.sets.len() as i64 - 1
    }

    pub fn sets(&self) -> &[SymbolSet] {
        &self.sets
    }

    pub fn get(&self, coord: i64) -> SymbolSet {
        let k = coord - self.origin;
        if k < 0 || k as usize >= self.sets.len() {
            full_set(self.alphabet_size)
        } else {
            self.sets[k as usize]
        }
    }

    pub fn set(&mut self, coord: i64, set: SymbolSet) {
        let k = (coord - self.origin) as usize;
        self.sets[k] = set;
    }

    pub fn is_singleton(&self, coord: i64) -> bool {
        self.get(coord).count_ones() == 1
    }
}

/// Set-valued update over the same window.
///
/// The output set at `j` collects `f` over every choice of inputs from the
/// input sets at `j-r..=j+r`; correlations between cells are dropped, so the
/// result contains every symbol any consistent configuration can produce.
pub fn set_apply(rule: &Rule, config: &SetConfig) -> SetConfig {
    assert_eq!(rule.size(), config.alphabet_size, "alphabet mismatch");
    let r = rule.radius() as i64;
    let size = rule.size();
    let mut out = Vec::with_capacity(config.sets.len());
    let mut partial: Vec<usize> = Vec::new();
    for j in config.origin..=config.end() {
        // Table indices reachable from the chosen prefix, digit by digit.
        partial.clear();
        partial.push(0);
        for c in j - r..=j + r {
            let set = config.get(c);
            let mut next = Vec::with_capacity(partial.len() * set.count_ones() as usize);
            for &p in &partial {
                let mut bits = set;
                while bits != 0 {
                    let s = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    next.push(p * size + s);
                }
            }
            next.sort_unstable();
            next.dedup();
            partial = next;
        }
        let mut acc = 0u64;
        for &index in &partial {
            acc |= 1u64 << rule.output_at(index);
        }
        out.push(acc);
    }
    SetConfig {
        sets: out,
        origin: config.origin,
        alphabet_size: config.alphabet_size,
    }
}

/// Symbols of a set in increasing order.
pub fn members(set: SymbolSet) -> Vec<Symbol> {
    (0..64u8).filter(|&s| set >> s & 1 == 1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ca::{apply, builtin};

    #[test]
    fn singletons_follow_ordinary_evolution() {
        let rule = builtin::coven_rule(&[1, 0]).unwrap();
        let x = Config::from_fn(-10, 10, |c| ((c * c + 3 * c) % 5 == 0) as u8);
        let sx = SetConfig::from_config(&x, 2).unwrap();
        let fs = set_apply(&rule, &sx);
        let fx = apply(&rule, &x).unwrap();
        for c in fx.valid_lo()..=fx.valid_hi() {
            assert_eq!(fs.get(c), 1u64 << fx.at(c));
        }
    }

    #[test]
    fn shift_moves_uncertainty_left() {
        let mut s = SetConfig::new(vec![1; 9], -4, 2).unwrap();
        s.set(2, 0b11);
        let next = set_apply(&builtin::shift(), &s);
        assert_eq!(next.get(1), 0b11);
        assert!(next.is_singleton(2));
        assert!(next.is_singleton(0));
    }

    #[test]
    fn coven_000_centre_is_lost_by_cellwise_sets() {
        // The cellwise abstraction cannot keep the word's centre fixed: the
        // correlated right neighbourhood is forgotten after one step.
        let rule = builtin::coven_rule(&[1, 0]).unwrap();
        let mut s = SetConfig::new(vec![1, 1, 1], -1, 2).unwrap();
        let mut lost_at = None;
        for step in 1..=50 {
            s = set_apply(&rule, &s);
            if !s.is_singleton(0) {
                lost_at = Some(step);
                break;
            }
        }
        assert_eq!(lost_at, Some(2));
    }

    #[test]
    fn rejects_empty_sets() {
        assert!(SetConfig::new(vec![0b01, 0], 0, 2).is_err());
        assert!(SetConfig::new(vec![0b100], 0, 2).is_err());
        assert_eq!(members(0b101), vec![0, 2]);
    }
}
