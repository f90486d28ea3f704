//! Brute-force reference implementations, written straight from the
//! definitions: every perturbation of the relevant cells is enumerated and
//! every column of every time step is compared. No light-cone pruning, no
//! bisection, and a stepper of its own that only reads the rule table.

#![allow(dead_code)]

use std::collections::HashSet;

use lyapca::ca::{Alphabet, Config, Rule, Symbol};
use proptest::prelude::*;

/// Random rule and window with `|A| ≤ 3`, `r ≤ 2`, `n ≤ 4`.
pub fn small_instance() -> impl Strategy<Value = (Rule, Config, usize)> {
    (2usize..=3, 1usize..=2, 1usize..=4).prop_flat_map(|(q, r, n)| {
        let table_len = q.pow(2 * r as u32 + 1);
        let rn = (r * n) as i64;
        let width = (4 * rn + 1) as usize;
        (
            prop::collection::vec(0..q as Symbol, table_len),
            prop::collection::vec(0..q as Symbol, width),
        )
            .prop_map(move |(table, cells)| {
                let rule = Rule::from_table(Alphabet::new(q).unwrap(), r, table).unwrap();
                (rule, Config::new(cells, -2 * rn).unwrap(), n)
            })
    })
}

/// Cells of a window starting at `lo`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Window {
    pub lo: i64,
    pub cells: Vec<Symbol>,
}

impl Window {
    pub fn from_config(x: &Config, lo: i64, hi: i64) -> Window {
        Window {
            lo,
            cells: (lo..=hi).map(|c| x.at(c)).collect(),
        }
    }

    fn at(&self, c: i64) -> Symbol {
        self.cells[(c - self.lo) as usize]
    }

    fn set(&mut self, c: i64, s: Symbol) {
        let k = (c - self.lo) as usize;
        self.cells[k] = s;
    }

    fn hi(&self) -> i64 {
        self.lo + self.cells.len() as i64 - 1
    }
}

/// One step; the result loses `r` cells on each side.
pub fn step(rule: &Rule, w: &Window) -> Window {
    let r = rule.radius();
    let q = rule.size();
    let cells = w
        .cells
        .windows(2 * r + 1)
        .map(|nb| {
            let index = nb.iter().fold(0usize, |acc, &s| acc * q + s as usize);
            rule.table()[index]
        })
        .collect();
    Window {
        lo: w.lo + r as i64,
        cells,
    }
}

/// `w, F(w), ..., Fⁿ(w)`.
pub fn orbit(rule: &Rule, w: &Window, n: usize) -> Vec<Window> {
    let mut rows = vec![w.clone()];
    for _ in 0..n {
        let next = step(rule, rows.last().unwrap());
        rows.push(next);
    }
    rows
}

/// Every assignment of `cells` (in order) over an alphabet of size `q`.
fn assignments(q: usize, len: usize) -> impl Iterator<Item = Vec<Symbol>> {
    let total = q.pow(len as u32);
    (0..total).map(move |mut k| {
        let mut v = vec![0 as Symbol; len];
        for slot in v.iter_mut() {
            *slot = (k % q) as Symbol;
            k /= q;
        }
        v
    })
}

/// Columns `j` (at times `1..=n`) where some perturbation of the cells
/// `free` changes the orbit of `x`.
fn changed_columns(rule: &Rule, x: &Window, n: usize, free: &[i64]) -> Vec<i64> {
    let base = orbit(rule, x, n);
    let mut out = Vec::new();
    for values in assignments(rule.size(), free.len()) {
        let mut y = x.clone();
        for (&c, &v) in free.iter().zip(&values) {
            y.set(c, v);
        }
        let other = orbit(rule, &y, n);
        for (a, b) in base.iter().zip(&other).skip(1) {
            for c in a.lo..=a.hi() {
                if a.at(c) != b.at(c) {
                    out.push(c);
                }
            }
        }
    }
    out
}

fn window(x: &Config, rn: i64) -> Window {
    Window::from_config(x, -2 * rn, 2 * rn)
}

/// `min{s ≥ 0 : Fⁱ(W⁻₀(x)) ⊂ W⁻₋ₛ(Fⁱ(x)), 1 ≤ i ≤ n}`.
pub fn lambda_tilde_minus(rule: &Rule, x: &Config, n: usize) -> u64 {
    let rn = (rule.radius() * n) as i64;
    let w = window(x, rn);
    let free: Vec<i64> = (1..=rn).collect();
    changed_columns(rule, &w, n, &free)
        .into_iter()
        .map(|j| (1 - j).max(0) as u64)
        .max()
        .unwrap_or(0)
}

/// `min{s ≥ 0 : Fⁱ(W⁺₀(x)) ⊂ W⁺ₛ(Fⁱ(x)), 1 ≤ i ≤ n}`.
pub fn lambda_tilde_plus(rule: &Rule, x: &Config, n: usize) -> u64 {
    let rn = (rule.radius() * n) as i64;
    let w = window(x, rn);
    let free: Vec<i64> = (-rn..=-1).collect();
    changed_columns(rule, &w, n, &free)
        .into_iter()
        .map(|j| (j + 1).max(0) as u64)
        .max()
        .unwrap_or(0)
}

/// `min{s ≥ 0 : Fⁱ(W⁻ₛ(x)) ⊂ W⁻₀(Fⁱ(x)), 1 ≤ i ≤ n}`, trying every `s`.
pub fn i_minus(rule: &Rule, x: &Config, n: usize) -> u64 {
    let rn = (rule.radius() * n) as i64;
    let w = window(x, rn);
    (0..=rn)
        .find(|&s| {
            let free: Vec<i64> = (s + 1..=rn).collect();
            changed_columns(rule, &w, n, &free).iter().all(|&j| j > 0)
        })
        .expect("s = rn always works") as u64
}

/// `min{s ≥ 0 : Fⁱ(W⁺₋ₛ(x)) ⊂ W⁺₀(Fⁱ(x)), 1 ≤ i ≤ n}`.
pub fn i_plus(rule: &Rule, x: &Config, n: usize) -> u64 {
    let rn = (rule.radius() * n) as i64;
    let w = window(x, rn);
    (0..=rn)
        .find(|&s| {
            let free: Vec<i64> = (-rn..=-s - 1).collect();
            changed_columns(rule, &w, n, &free).iter().all(|&j| j < 0)
        })
        .expect("s = rn always works") as u64
}

/// Distinct `(n+1) × (2p+1)` space-time patterns, from every word that
/// determines one.
pub fn spacetime_patterns(rule: &Rule, p: usize, n: usize) -> usize {
    let r = rule.radius();
    let len = 2 * p + 1 + 2 * r * n;
    let lo = -((p + r * n) as i64);
    let mut seen = HashSet::new();
    for cells in assignments(rule.size(), len) {
        let rows = orbit(rule, &Window { lo, cells }, n);
        let pattern: Vec<Symbol> = rows
            .iter()
            .flat_map(|w| (-(p as i64)..=p as i64).map(move |c| w.at(c)))
            .collect();
        seen.insert(pattern);
    }
    seen.len()
}

/// `-Σ w log w` summed over independent tracks.
pub fn bernoulli_entropy(tracks: &[Vec<f64>]) -> f64 {
    tracks
        .iter()
        .flat_map(|t| t.iter())
        .filter(|&&w| w > 0.0)
        .map(|&w| -w * w.ln())
        .sum()
}
