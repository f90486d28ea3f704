//! Exact propagation depths for rules that read only to the right.
//!
//! For such a rule the time series of column `j` is a function of `x_j`
//! and the series of columns `j+1..=j+r`. The set of possible series tuples
//! `(T_j, ..., T_{j+r-1})` is a regular language over `A^r`, obtained from
//! the language for `j+1` by a transducer. Scanning columns from the
//! perturbed region toward the origin, a column `j <= 0` is unaffected by
//! every perturbation iff its own series is unique in the language.
//!
//! Times a column cannot pass on to column 0 within `n` steps are dropped
//! (the language becomes universal there), which keeps the automata small.

use crate::budget::pow_sat;
use crate::ca::{Config, Rule, Symbol};
use crate::error::{Error, Result};
use crate::set_dynamics::lang::{determinize, Dfa};

const UNIV: u64 = u64::MAX;
const MAX_TUPLES: u128 = 1 << 16;

#[inline]
fn enc(q: u32, cur: Symbol, depth: u32) -> u64 {
    (q as u64) << 24 | (cur as u64) << 16 | depth as u64
}

#[inline]
fn dec(e: u64) -> (u32, usize, u32) {
    ((e >> 24) as u32, ((e >> 16) & 0xff) as usize, (e & 0xffff) as u32)
}

pub(crate) struct ColumnScanner {
    q: usize,
    r: usize,
    n: usize,
    /// `q^r`, the tuple alphabet.
    k: usize,
    /// `q^(r-1)`.
    hi_pow: usize,
    /// `g[cur * k + tuple]`.
    g: Vec<Symbol>,
    /// `free[j]`: language for column `j` when every column `>= j` is free.
    free: Vec<Dfa>,
    max_states: usize,
}

impl ColumnScanner {
    pub fn new(rule: &Rule, n: usize, max_states: usize) -> Result<Self> {
        debug_assert!(rule.one_sided() && rule.radius() > 0);
        let (q, r) = (rule.size(), rule.radius());
        if pow_sat(q, r) > MAX_TUPLES {
            return Err(Error::budget(
                "column tuple alphabet",
                pow_sat(q, r),
                MAX_TUPLES,
                "use a smaller radius or alphabet",
            ));
        }
        if n >= 0xffff {
            return Err(Error::Invalid(format!("horizon {n} too large")));
        }
        let k = q.pow(r as u32);
        // Left inputs are ignored, so index `cur * q^r + tuple` reads them as 0.
        let g = (0..q * k).map(|i| rule.output_at(i)).collect();
        let mut scanner = ColumnScanner {
            q,
            r,
            n,
            k,
            hi_pow: k / q,
            g,
            free: Vec::new(),
            max_states,
        };
        let rn = r * n;
        let all: Vec<Symbol> = (0..q as Symbol).collect();
        let mut free = vec![Dfa::universal(k); rn + 2];
        for j in (1..=rn).rev() {
            free[j] = scanner.step(&free[j + 1], &all, scanner.horizon(j as i64))?;
        }
        scanner.free = free;
        Ok(scanner)
    }

    pub fn span(&self) -> usize {
        self.r * self.n
    }

    /// Last time at which column `j` can still influence column `<= 0` by
    /// time `n`.
    fn horizon(&self, j: i64) -> i64 {
        let (n, r) = (self.n as i64, self.r as i64);
        if j <= 0 {
            n
        } else {
            n - (j + r - 1) / r
        }
    }

    fn step(&self, input: &Dfa, init: &[Symbol], h: i64) -> Result<Dfa> {
        let k = self.k;
        if h < 0 {
            return Ok(Dfa::universal(k));
        }
        let start = init.iter().map(|&v| enc(0, v, 0)).collect();
        determinize(k, start, self.max_states, |set, buckets| {
            for &e in set {
                if e == UNIV {
                    for b in buckets.iter_mut() {
                        b.push(UNIV);
                    }
                    continue;
                }
                let (state, cur, d) = dec(e);
                let nd = d + 1;
                for a in 0..k {
                    if let Some(t) = input.next(state, a as u32) {
                        let out = cur * self.hi_pow + a / self.q;
                        let next = if nd as i64 > h {
                            UNIV
                        } else {
                            enc(t, self.g[cur * k + a], nd)
                        };
                        buckets[out].push(next);
                    }
                }
            }
        })
        .map_err(|_| {
            Error::budget(
                "column automaton states",
                self.max_states as u128 + 1,
                self.max_states as u128,
                "raise the automaton-state budget or lower n",
            )
        })
    }

    fn determined(&self, lang: &Dfa) -> bool {
        lang.symbols_by_depth(self.n + 1).iter().all(|level| {
            level
                .split_first()
                .map_or(true, |(first, rest)| rest.iter().all(|t| t / self.hi_pow as u32 == first / self.hi_pow as u32))
        })
    }

    /// Leftmost column `<= 0` reached by some perturbation of the cells
    /// right of `s`, or `None`. With `first_only` the scan stops at the
    /// first affected column found (the rightmost one).
    pub fn scan(&self, x: &Config, s: i64, first_only: bool) -> Result<Option<i64>> {
        let rn = (self.r * self.n) as i64;
        debug_assert!((0..=rn).contains(&s));
        let mut lang = self.free[(s + 1) as usize].clone();
        let mut run = 0;
        let mut leftmost = None;
        for j in ((1 - rn)..=s).rev() {
            lang = self.step(&lang, &[x.at(j)], self.horizon(j))?;
            if j > 0 {
                continue;
            }
            if self.determined(&lang) {
                run += 1;
                // Columns further left read only fixed, determined series.
                if run >= self.r {
                    break;
                }
            } else {
                run = 0;
                leftmost = Some(j);
                if first_only {
                    break;
                }
            }
        }
        Ok(leftmost)
    }
}
