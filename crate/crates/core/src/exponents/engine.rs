//! Dispatch between the exact engines, always on the minus side.

use rayon::prelude::*;

use super::column::ColumnScanner;
use crate::budget::{pow_sat, Budgets};
use crate::ca::{split_product, step_cells, Config, Rule, Symbol};
use crate::error::{Error, Result};

/// Rows `1..=n` of the evolution of `cells` (no padding; row `i` starts at
/// `lo + r*i`).
pub(crate) fn rows(rule: &Rule, cells: &[Symbol], n: usize) -> Vec<Vec<Symbol>> {
    let mut out = Vec::with_capacity(n);
    let mut cur = cells.to_vec();
    for _ in 0..n {
        cur = step_cells(rule, &cur, false, false);
        out.push(cur.clone());
    }
    out
}

/// Leftmost column `<= 0` where `ys` differs from `xs` at times `1..=n`.
/// Both row sets start at `lo + r*i`.
pub(crate) fn leftmost_difference(xs: &[Vec<Symbol>], ys: &[Vec<Symbol>], lo: i64, r: usize) -> Option<i64> {
    let mut best: Option<i64> = None;
    for (i, (a, b)) in xs.iter().zip(ys).enumerate() {
        let start = lo + (r * (i + 1)) as i64;
        let last = (-start).min(a.len() as i64 - 1);
        for k in 0..=last {
            if a[k as usize] != b[k as usize] {
                let c = start + k;
                best = Some(best.map_or(c, |v| v.min(c)));
                break;
            }
        }
    }
    best
}

/// Brute force over every assignment of the cells in `(s, rn]`.
pub(crate) struct Enumerator {
    rule: Rule,
    n: usize,
}

impl Enumerator {
    fn scan(&self, x: &Config, s: i64, first_only: bool) -> Result<Option<i64>> {
        let r = self.rule.radius();
        let rn = (r * self.n) as i64;
        let q = self.rule.size();
        let (lo, hi) = (-2 * rn, 2 * rn);
        let base: Vec<Symbol> = x.slice(lo, hi).to_vec();
        let base_rows = rows(&self.rule, &base, self.n);
        let free = (rn - s) as usize;
        let total = q.pow(free as u32) as u64;
        let eval = |m: u64| {
            let mut y = base.clone();
            let mut m = m;
            for c in (s + 1..=rn).rev() {
                y[(c - lo) as usize] = (m % q as u64) as Symbol;
                m /= q as u64;
            }
            leftmost_difference(&base_rows, &rows(&self.rule, &y, self.n), lo, r)
        };
        Ok(if first_only {
            (0..total).into_par_iter().find_map_any(eval)
        } else {
            (0..total).into_par_iter().filter_map(eval).min()
        })
    }
}

pub(crate) enum Engine {
    /// Perturbations on the right never reach the left half-line.
    Zero,
    Product(Box<Engine>, Box<Engine>, usize),
    Column(ColumnScanner),
    Enumerate(Enumerator),
}

impl Engine {
    pub fn build(rule: &Rule, n: usize, budgets: &Budgets) -> Result<Engine> {
        let r = rule.radius();
        if r * n == 0 || rule.ignores_right() {
            return Ok(Engine::Zero);
        }
        if let Some((a, b)) = rule.factors() {
            return Ok(Engine::Product(
                Box::new(Engine::build(a, n, budgets)?),
                Box::new(Engine::build(b, n, budgets)?),
                b.size(),
            ));
        }
        if rule.one_sided() {
            return Ok(Engine::Column(ColumnScanner::new(
                rule,
                n,
                budgets.automaton_states as usize,
            )?));
        }
        let needed = pow_sat(rule.size(), r * n);
        if needed > budgets.enumeration as u128 {
            return Err(Error::budget(
                "perturbation enumeration |A|^(rn)",
                needed,
                budgets.enumeration as u128,
                "use lambda_tilde_bounds for a bracket",
            ));
        }
        Ok(Engine::Enumerate(Enumerator {
            rule: rule.clone(),
            n,
        }))
    }

    /// Work per evaluation, in rough column-step units.
    pub fn cost(&self) -> u128 {
        match self {
            Engine::Zero => 1,
            Engine::Product(a, b, _) => a.cost() + b.cost(),
            Engine::Column(c) => 2 * c.span() as u128 + 1,
            Engine::Enumerate(e) => pow_sat(e.rule.size(), e.rule.radius() * e.n),
        }
    }

    /// Smallest `s` in `[floor, rn]` such that no perturbation of `(s, rn]`
    /// reaches a column `<= 0`. The predicate is monotone in `s`, so a
    /// gallop then bisection finds it; products take the larger factor
    /// value, searching the second factor only above the first.
    pub fn min_clear(&self, x: &Config, floor: i64, rn: i64) -> Result<i64> {
        if let Engine::Product(a, b, size) = self {
            let (xa, xb) = split_product(x, *size);
            let sa = a.min_clear(&xa, floor, rn)?;
            return b.min_clear(&xb, sa, rn);
        }
        let bad = |s: i64| -> Result<bool> { Ok(self.scan(x, s, true)?.is_some()) };
        if floor >= rn || !bad(floor)? {
            return Ok(floor.min(rn));
        }
        // bad(lo) holds; s = rn never fails.
        let mut lo = floor;
        let mut step = 1;
        let mut hi = loop {
            let c = lo + step;
            if c >= rn {
                break rn;
            }
            if !bad(c)? {
                break c;
            }
            lo = c;
            step *= 2;
        };
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if bad(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }

    /// Leftmost column `<= 0` some perturbation of `(s, rn]` changes
    /// within `n` steps.
    pub fn scan(&self, x: &Config, s: i64, first_only: bool) -> Result<Option<i64>> {
        match self {
            Engine::Zero => Ok(None),
            Engine::Product(a, b, size) => {
                let (xa, xb) = split_product(x, *size);
                let la = a.scan(&xa, s, first_only)?;
                if first_only && la.is_some() {
                    return Ok(la);
                }
                let lb = b.scan(&xb, s, first_only)?;
                Ok(match (la, lb) {
                    (Some(p), Some(q)) => Some(p.min(q)),
                    (p, q) => p.or(q),
                })
            }
            Engine::Column(c) => c.scan(x, s, first_only),
            Engine::Enumerate(e) => e.scan(x, s, first_only),
        }
    }
}
