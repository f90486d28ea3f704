//! Counting distinct space-time patterns of width `2p+1` and height `n+1`.
//!
//! Direct enumeration runs over every determining word of length
//! `2p+1+2rn`. Two reductions keep the exact count in reach:
//!
//! * a product rule's patterns are pairs of factor patterns, so counts
//!   multiply;
//! * for a rule reading only to the right, every column left of the last
//!   `r` pattern columns has `|A|` extensions per pattern (its time-0 value
//!   is free and the rest of its series follows), so only the series of an
//!   `r`-column strip need enumerating, over words of length `r(n+1)`.

use std::collections::HashSet;
use std::sync::atomic::{AtomicU64, Ordering};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::budget::{pow_sat, Budgets};
use crate::ca::{step_cells, Rule, Symbol};
use crate::error::Result;

const SAMPLED_WORDS: u64 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PatternCount {
    pub count: u128,
    /// False when `count` is a sampled lower bound.
    pub exact: bool,
    /// Words enumerated or sampled.
    pub words: u128,
}

enum Plan<'a> {
    Trivial,
    Product(Box<Plan<'a>>, Box<Plan<'a>>, &'a Rule, &'a Rule),
    Strip(Rule),
    Direct,
}

fn plan(rule: &Rule, p: usize) -> Plan<'_> {
    let r = rule.radius();
    if r == 0 {
        return Plan::Trivial;
    }
    if let Some((a, b)) = rule.factors() {
        return Plan::Product(Box::new(plan(a, p)), Box::new(plan(b, p)), a, b);
    }
    if 2 * p + 1 >= r {
        if rule.one_sided() {
            return Plan::Strip(rule.clone());
        }
        if rule.ignores_right() {
            return Plan::Strip(rule.mirror());
        }
    }
    Plan::Direct
}

/// Words the exact count would enumerate.
fn exact_cost(plan: &Plan<'_>, rule: &Rule, p: usize, n: usize) -> u128 {
    let (q, r) = (rule.size(), rule.radius());
    match plan {
        Plan::Trivial => 1,
        Plan::Product(pa, pb, a, b) => exact_cost(pa, a, p, n).max(exact_cost(pb, b, p, n)),
        Plan::Strip(_) => pow_sat(q, r * (n + 1)),
        Plan::Direct => pow_sat(q, 2 * p + 1 + 2 * r * n),
    }
}

/// Largest `n <= max_n` whose count is exact within the budget.
pub fn largest_feasible_pattern_n(rule: &Rule, p: usize, max_n: usize, budgets: &Budgets) -> Option<usize> {
    let pl = plan(rule, p);
    (1..=max_n)
        .take_while(|&n| exact_cost(&pl, rule, p, n) <= budgets.patterns as u128)
        .last()
}

pub fn count_patterns(rule: &Rule, p: usize, n: usize, budgets: &Budgets) -> Result<PatternCount> {
    Ok(run(&plan(rule, p), rule, p, n, budgets))
}

fn run(plan: &Plan<'_>, rule: &Rule, p: usize, n: usize, budgets: &Budgets) -> PatternCount {
    let q = rule.size();
    let width = 2 * p + 1;
    let limit = budgets.patterns as u128;
    match plan {
        Plan::Trivial => PatternCount {
            count: pow_sat(q, width),
            exact: true,
            words: pow_sat(q, width),
        },
        Plan::Product(pa, pb, a, b) => {
            let ca = run(pa, a, p, n, budgets);
            let cb = run(pb, b, p, n, budgets);
            PatternCount {
                count: ca.count.saturating_mul(cb.count),
                exact: ca.exact && cb.exact,
                words: ca.words + cb.words,
            }
        }
        Plan::Strip(oriented) => {
            let words = pow_sat(q, oriented.radius() * (n + 1));
            if words <= limit {
                let strips = strip_count(oriented, n);
                PatternCount {
                    count: strips.saturating_mul(pow_sat(q, width - oriented.radius())),
                    exact: true,
                    words,
                }
            } else {
                sampled(rule, p, n, budgets)
            }
        }
        Plan::Direct => {
            let words = pow_sat(q, width + 2 * rule.radius() * n);
            if words <= limit {
                PatternCount {
                    count: direct_count(rule, p, n),
                    exact: true,
                    words,
                }
            } else {
                sampled(rule, p, n, budgets)
            }
        }
    }
}

/// Central pattern of the evolution of a determining word on
/// `[-p-rn, p+rn]`.
fn central_pattern(rule: &Rule, word: &[Symbol], p: usize, n: usize) -> Vec<Symbol> {
    let r = rule.radius();
    let width = 2 * p + 1;
    let mut key = Vec::with_capacity(width * (n + 1));
    let mut row = word.to_vec();
    key.extend_from_slice(&row[r * n..r * n + width]);
    for t in 1..=n {
        row = step_cells(rule, &row, false, false);
        let off = r * (n - t);
        key.extend_from_slice(&row[off..off + width]);
    }
    key
}

fn direct_count(rule: &Rule, p: usize, n: usize) -> u128 {
    let q = rule.size() as u64;
    let len = 2 * p + 1 + 2 * rule.radius() * n;
    let total = q.pow(len as u32);
    let mut seen: HashSet<Vec<Symbol>> = HashSet::new();
    let mut word = vec![0 as Symbol; len];
    for m in 0..total {
        let mut v = m;
        for cell in word.iter_mut().rev() {
            *cell = (v % q) as Symbol;
            v /= q;
        }
        seen.insert(central_pattern(rule, &word, p, n));
    }
    seen.len() as u128
}

/// Distinct patterns among random determining words: a lower bound.
fn sampled(rule: &Rule, p: usize, n: usize, budgets: &Budgets) -> PatternCount {
    let q = rule.size() as u64;
    let len = 2 * p + 1 + 2 * rule.radius() * n;
    let words = budgets.patterns.min(SAMPLED_WORDS);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut seen: HashSet<Vec<Symbol>> = HashSet::new();
    let mut word = vec![0 as Symbol; len];
    for _ in 0..words {
        for cell in word.iter_mut() {
            *cell = (rng.next_u64() % q) as Symbol;
        }
        seen.insert(central_pattern(rule, &word, p, n));
    }
    PatternCount {
        count: seen.len() as u128,
        exact: false,
        words: words as u128,
    }
}

/// Distinct series `(T_0, ..., T_{r-1})` over times `0..=n` of the
/// leftmost `r` columns of a word of length `r(n+1)`, for a rule reading
/// only to the right. Every series tuple maps to a distinct index below
/// `q^(r(n+1))`, which is also the number of words, so a bitset suffices.
fn strip_count(rule: &Rule, n: usize) -> u128 {
    let (q, r) = (rule.size(), rule.radius());
    let len = r * (n + 1);
    let total = q.pow(len as u32);
    let qr = q.pow(r as u32);
    let g: Vec<Symbol> = (0..q * qr).map(|i| rule.output_at(i)).collect();
    let bits: Vec<AtomicU64> = (0..total.div_ceil(64)).map(|_| AtomicU64::new(0)).collect();
    let stride = n + 1;
    let horizon = |k: usize| n.min((len - 1 - k) / r);

    let column = |series: &mut [Symbol], k: usize, x: Symbol| {
        series[k * stride] = x;
        for t in 0..horizon(k) {
            let mut tuple = 0;
            for i in 1..=r {
                tuple = tuple * q + series[(k + i) * stride + t] as usize;
            }
            let cur = series[k * stride + t] as usize;
            series[k * stride + t + 1] = g[cur * qr + tuple];
        }
    };

    fn descend(
        k: usize,
        series: &mut [Symbol],
        q: usize,
        column: &dyn Fn(&mut [Symbol], usize, Symbol),
        leaf: &dyn Fn(&[Symbol]),
    ) {
        for x in 0..q as Symbol {
            column(series, k, x);
            if k == 0 {
                leaf(series);
            } else {
                descend(k - 1, series, q, column, leaf);
            }
        }
    }

    let leaf = |series: &[Symbol]| {
        let mut index = 0usize;
        for &s in &series[..r * stride] {
            index = index * q + s as usize;
        }
        bits[index / 64].fetch_or(1u64 << (index % 64), Ordering::Relaxed);
    };

    // Fix the rightmost `top` columns per task, then descend sequentially.
    let mut top = 0;
    while top < len && q.pow(top as u32) < 256 {
        top += 1;
    }
    (0..q.pow(top as u32)).into_par_iter().for_each(|task| {
        let mut series = vec![0 as Symbol; len * stride];
        let mut v = task;
        for k in (len - top..len).rev() {
            column(&mut series, k, (v % q) as Symbol);
            v /= q;
        }
        if top == len {
            leaf(&series);
        } else {
            descend(len - top - 1, &mut series, q, &column, &leaf);
        }
    });
    bits.iter().map(|b| b.load(Ordering::Relaxed).count_ones() as u128).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ca::builtin;

    #[test]
    fn strip_reduction_matches_direct_enumeration() {
        let coven = builtin::coven_rule(&[1, 0]).unwrap();
        let f2 = builtin::example2_f2_rule(1).unwrap();
        for (rule, p, n) in [(&coven, 2, 1), (&coven, 2, 3), (&coven, 1, 2), (&f2, 1, 2), (&f2, 2, 2)] {
            let direct = direct_count(rule, p, n);
            let fast = count_patterns(rule, p, n, &Budgets::default()).unwrap();
            assert!(fast.exact);
            assert_eq!(fast.count, direct, "p={p} n={n}");
        }
    }

    #[test]
    fn product_counts_multiply() {
        let prod = builtin::product_rule(&builtin::shift(), &builtin::example2_f2_rule(1).unwrap()).unwrap();
        let direct = direct_count(&prod, 1, 2);
        assert_eq!(count_patterns(&prod, 1, 2, &Budgets::default()).unwrap().count, direct);
    }

    #[test]
    fn coven_counts() {
        let coven = builtin::coven_rule(&[1, 0]).unwrap();
        let counts: Vec<u128> = (1..=4)
            .map(|n| count_patterns(&coven, 2, n, &Budgets::default()).unwrap().count)
            .collect();
        assert_eq!(counts, vec![80, 176, 368, 752]);
    }

    #[test]
    fn budget_overflow_samples_a_lower_bound() {
        let coven = builtin::coven_rule(&[1, 0]).unwrap();
        let tiny = Budgets::uniform(1 << 8);
        let c = count_patterns(&coven, 2, 6, &tiny).unwrap();
        assert!(!c.exact);
        assert!(c.count <= 3056);
        assert_eq!(largest_feasible_pattern_n(&coven, 2, 20, &tiny), Some(3));
    }
}
