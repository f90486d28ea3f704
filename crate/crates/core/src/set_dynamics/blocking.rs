//! Blocking-word certification.
//!
//! A word `w` on `[a, b]` is certified with centre width `i` when
//!
//! * some column `c` in `[-i, i]` has every column `<= c` independent of the
//!   cells right of `b`, for all time, and
//! * some column `c'` in `[-i, i]` has every column `>= c'` independent of
//!   the cells left of `a`.
//!
//! Each side is proved by iterating the language of reachable strip states
//! (pairs of configurations that agree up to `b`, or single configurations
//! for rules reading only to the right) until it cycles, or by finding an
//! inductive invariant through widening. Both give an all-time guarantee
//! from a finite computation. Refutations come only from concrete pairs of
//! configurations found by simulation.

use std::collections::HashMap;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use super::lang::{BlockMap, Dfa};
use crate::budget::{pow_sat, Budgets};
use crate::ca::{io, step_cells, Config, Rule, Symbol, Word};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertStatus {
    Certified,
    NotBlocking,
    HorizonExceeded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProofMethod {
    /// The rule never moves information across in this direction.
    OneWay,
    /// The exact strip language became periodic.
    Cycle,
    /// A widened language was closed under the update.
    Invariant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LeakSide {
    /// A change right of the word reached column `<= -i`.
    Right,
    /// A change left of the word reached column `>= i`.
    Left,
}

/// Two configurations that both carry the word, differ only on one side of
/// it, and differ at `(time, column)` beyond the centre.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub side: LeakSide,
    pub time: usize,
    pub column: i64,
    pub first: Config,
    pub second: Config,
}

impl Serialize for Witness {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Flat<'a> {
            side: LeakSide,
            time: usize,
            column: i64,
            first: &'a str,
            second: &'a str,
        }
        Flat {
            side: self.side,
            time: self.time,
            column: self.column,
            first: io::format_config(&self.first).trim_end(),
            second: io::format_config(&self.second).trim_end(),
        }
        .serialize(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockingCertificate {
    pub word: Word,
    pub center_width: usize,
    pub status: CertStatus,
    /// Steps before the proof's periodic part (for invariants, the number of
    /// widening rounds).
    pub preperiod: Option<usize>,
    /// Period of the cycle; 1 for an invariant.
    pub period: Option<usize>,
    pub method: Option<ProofMethod>,
    pub witness: Option<Witness>,
}

impl BlockingCertificate {
    pub fn is_certified(&self) -> bool {
        self.status == CertStatus::Certified
    }
}

impl Serialize for BlockingCertificate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Flat<'a> {
            word: String,
            anchor: i64,
            center_width: usize,
            status: CertStatus,
            preperiod: Option<usize>,
            period: Option<usize>,
            #[serde(skip_serializing_if = "Option::is_none")]
            method: Option<ProofMethod>,
            #[serde(skip_serializing_if = "Option::is_none")]
            witness: Option<&'a Witness>,
        }
        Flat {
            word: self.word.to_string(),
            anchor: self.word.anchor(),
            center_width: self.center_width,
            status: self.status,
            preperiod: self.preperiod,
            period: self.period,
            method: self.method,
            witness: self.witness.as_ref(),
        }
        .serialize(s)
    }
}

/// Smallest centre width allowed for radius `r` (`2i + 1 >= r`).
pub fn min_center_width(radius: usize) -> usize {
    radius / 2
}

const LEAK_TRIALS: usize = 256;
const LEAK_HORIZON: usize = 12;
const EXACT_STEPS: usize = 24;
const WIDEN_ROUNDS: usize = 8;
const WIDEN_ITERATIONS: usize = 64;
const MAX_BLOCK_TABLE: u128 = 1 << 22;

pub fn certify_blocking(
    rule: &Rule,
    word: &Word,
    center_width: usize,
    max_steps: usize,
) -> Result<BlockingCertificate> {
    certify_blocking_with(rule, word, center_width, max_steps, &Budgets::default())
}

pub fn certify_blocking_with(
    rule: &Rule,
    word: &Word,
    center_width: usize,
    max_steps: usize,
    budgets: &Budgets,
) -> Result<BlockingCertificate> {
    if 2 * center_width + 1 < rule.radius() {
        return Err(Error::CenterTooNarrow {
            center_width,
            radius: rule.radius(),
        });
    }
    word.check_alphabet(rule.alphabet())?;
    let mut cert = BlockingCertificate {
        word: word.clone(),
        center_width,
        status: CertStatus::HorizonExceeded,
        preperiod: None,
        period: None,
        method: None,
        witness: None,
    };

    let horizon = max_steps.min(LEAK_HORIZON);
    let leak = find_right_leak(rule, word, center_width, horizon).or_else(|| {
        find_right_leak(&rule.mirror(), &word.mirror(), center_width, horizon).map(|w| Witness {
            side: LeakSide::Left,
            time: w.time,
            column: -w.column,
            first: w.first.mirror(),
            second: w.second.mirror(),
        })
    });
    if let Some(w) = leak {
        cert.status = CertStatus::NotBlocking;
        cert.witness = Some(w);
        return Ok(cert);
    }

    let right = separate_right(rule, word, center_width, max_steps, budgets);
    let left = right
        .and_then(|_| separate_right(&rule.mirror(), &word.mirror(), center_width, max_steps, budgets));
    if let (Some(r), Some(l)) = (right, left) {
        cert.status = CertStatus::Certified;
        cert.preperiod = Some(r.preperiod.max(l.preperiod));
        cert.period = Some(lcm(r.period, l.period));
        cert.method = Some(if r.method == ProofMethod::OneWay { l.method } else { r.method });
    }
    Ok(cert)
}

fn lcm(a: usize, b: usize) -> usize {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

#[derive(Clone, Copy, Debug)]
struct Separation {
    preperiod: usize,
    period: usize,
    method: ProofMethod,
}

/// Proves that columns `<= c` never see cells right of the word, for some
/// `c` in `[-i, i]`.
fn separate_right(
    rule: &Rule,
    word: &Word,
    i: usize,
    max_steps: usize,
    budgets: &Budgets,
) -> Option<Separation> {
    let r = rule.radius();
    let b = word.end();
    let lo_c = -(i as i64);
    let hi_c = i as i64;
    if r == 0 || rule.ignores_right() {
        return (b >= lo_c).then_some(Separation {
            preperiod: 0,
            period: 1,
            method: ProofMethod::OneWay,
        });
    }
    let max_states = budgets.automaton_states as usize;
    if rule.one_sided() {
        if let Some(sep) = determined_columns(rule, word, lo_c, hi_c, max_steps, max_states) {
            return Some(sep);
        }
    }
    agreeing_pairs(rule, word, lo_c, hi_c, max_steps, max_states)
}

/// Right-reading rules: `r` consecutive columns inside the word whose values
/// never depend on anything.
fn determined_columns(
    rule: &Rule,
    word: &Word,
    lo_c: i64,
    hi_c: i64,
    max_steps: usize,
    max_states: usize,
) -> Option<Separation> {
    let r = rule.radius() as i64;
    let (a, b) = (word.anchor(), word.end());
    let candidates: Vec<i64> = (lo_c.max(a + r - 1)..=hi_c.min(b)).collect();
    if candidates.is_empty() {
        return None;
    }
    let k = rule.size();
    let map = right_reading_map(rule)?;
    let cells: Vec<Vec<u32>> = word.symbols().iter().map(|&s| vec![s as u32]).collect();
    let start = Dfa::from_cells(k, &cells);
    let depth = (b - a + 1) as usize;
    let holds = |lang: &Dfa, c: i64| {
        let levels = lang.symbols_by_depth(depth);
        ((c - r + 1 - a)..=(c - a)).all(|d| levels[d as usize].len() <= 1)
    };
    prove(start, candidates, &map, holds, max_steps, max_states)
}

/// Pairs of configurations equal up to the word's right end; proves that
/// `r` consecutive columns ending at `c` always agree.
fn agreeing_pairs(
    rule: &Rule,
    word: &Word,
    lo_c: i64,
    hi_c: i64,
    max_steps: usize,
    max_states: usize,
) -> Option<Separation> {
    let r = rule.radius();
    let ri = r as i64;
    let (a, b) = (word.anchor(), word.end());
    let candidates: Vec<i64> = (lo_c..=hi_c.min(b)).collect();
    if candidates.is_empty() {
        return None;
    }
    let q = rule.size();
    let k = q * q;
    let s0 = a.min(lo_c - ri + 1);
    let diagonal: Vec<u32> = (0..q as u32).map(|x| x * q as u32 + x).collect();
    let pair_image = |window: &[u32], f: &dyn Fn(&[Symbol]) -> Symbol| -> u32 {
        let xs: Vec<Symbol> = window.iter().map(|&p| (p / q as u32) as Symbol).collect();
        let ys: Vec<Symbol> = window.iter().map(|&p| (p % q as u32) as Symbol).collect();
        f(&xs) as u32 * q as u32 + f(&ys) as u32
    };
    let map = if rule.one_sided() {
        let g = |xs: &[Symbol]| {
            let mut full = vec![0 as Symbol; r];
            full.extend_from_slice(xs);
            rule.output(&full)
        };
        tabulate(k, 0, r, |w| pair_image(w, &g), vec![vec![]])?
    } else {
        let contexts = all_words(q, r)
            .into_iter()
            .map(|ctx| ctx.iter().map(|&x| diagonal[x as usize]).collect())
            .collect();
        tabulate(k, r, r, |w| pair_image(w, &|xs| rule.output(xs)), contexts)?
    };
    let mut cells = vec![diagonal.clone(); (a - s0) as usize];
    for &s in word.symbols() {
        cells.push(vec![diagonal[s as usize]]);
    }
    let start = Dfa::from_cells(k, &cells);
    let depth = (hi_c - s0 + 1).max(0) as usize;
    let is_diag = |p: u32| p / q as u32 == p % q as u32;
    let holds = |lang: &Dfa, c: i64| {
        let levels = lang.symbols_by_depth(depth);
        ((c - ri + 1 - s0)..=(c - s0)).all(|d| levels[d as usize].iter().all(|&p| is_diag(p)))
    };
    prove(start, candidates, &map, holds, max_steps, max_states)
}

fn right_reading_map(rule: &Rule) -> Option<BlockMap> {
    let (k, r) = (rule.size(), rule.radius());
    let g = |w: &[u32]| {
        let mut full = vec![0 as Symbol; r];
        full.extend(w.iter().map(|&s| s as Symbol));
        rule.output(&full) as u32
    };
    tabulate(k, 0, r, g, vec![vec![]])
}

fn tabulate(
    k: usize,
    left: usize,
    right: usize,
    f: impl Fn(&[u32]) -> u32,
    contexts: Vec<Vec<u32>>,
) -> Option<BlockMap> {
    let width = left + right + 1;
    if pow_sat(k, width) > MAX_BLOCK_TABLE {
        return None;
    }
    let table = all_words(k, width).iter().map(|w| f(w)).collect();
    Some(BlockMap {
        k,
        left,
        right,
        table,
        contexts,
    })
}

/// All words of length `len` in lexicographic order.
fn all_words(k: usize, len: usize) -> Vec<Vec<u32>> {
    let total = k.pow(len as u32);
    (0..total)
        .map(|mut n| {
            let mut w = vec![0u32; len];
            for slot in w.iter_mut().rev() {
                *slot = (n % k) as u32;
                n /= k;
            }
            w
        })
        .collect()
}

/// Exact iteration with cycle detection, then widening.
///
/// `holds(lang, c)` checks the separation property at column `c`; the set
/// of surviving candidates only shrinks.
fn prove(
    start: Dfa,
    mut candidates: Vec<i64>,
    map: &BlockMap,
    holds: impl Fn(&Dfa, i64) -> bool,
    max_steps: usize,
    max_states: usize,
) -> Option<Separation> {
    let mut seen: HashMap<Dfa, usize> = HashMap::new();
    let mut lang = start.clone();
    for t in 0..=max_steps.min(EXACT_STEPS) {
        candidates.retain(|&c| holds(&lang, c));
        if candidates.is_empty() {
            return None;
        }
        if let Some(&s) = seen.get(&lang) {
            return Some(Separation {
                preperiod: s,
                period: t - s,
                method: ProofMethod::Cycle,
            });
        }
        let next = map.image(&lang, max_states).ok()?;
        seen.insert(std::mem::replace(&mut lang, next), t);
    }

    for rounds in 1..=WIDEN_ROUNDS {
        let mut alive = candidates.clone();
        let mut inv = start.clone();
        for it in 0..WIDEN_ITERATIONS.min(max_steps.max(1)) {
            alive.retain(|&c| holds(&inv, c));
            if alive.is_empty() {
                break;
            }
            let Ok(img) = map.image(&inv, max_states) else { break };
            if img.is_subset_of(&inv) {
                return Some(Separation {
                    preperiod: it,
                    period: 1,
                    method: ProofMethod::Invariant,
                });
            }
            inv = inv.union(&img).widen(rounds);
            if inv.states() > max_states {
                break;
            }
        }
    }
    None
}

/// Random search for a change right of the word that reaches column `<= -i`.
fn find_right_leak(rule: &Rule, word: &Word, i: usize, horizon: usize) -> Option<Witness> {
    let r = rule.radius() as i64;
    if r == 0 || rule.ignores_right() {
        return None;
    }
    let q = rule.size() as u64;
    let (a, b) = (word.anchor(), word.end());
    let target = -(i as i64);
    let mut rng = ChaCha8Rng::seed_from_u64(0x6c65_616b);
    for t in 1..=horizon as i64 {
        let hi_pert = target + r * t;
        if hi_pert <= b {
            continue;
        }
        let lo = a.min(b + 1 - 2 * r * t);
        let hi = b.max(hi_pert + r * t);
        for _ in 0..LEAK_TRIALS {
            let mut x: Vec<Symbol> = (lo..=hi).map(|_| (rng.next_u64() % q) as Symbol).collect();
            for (k, &s) in word.symbols().iter().enumerate() {
                x[(a - lo) as usize + k] = s;
            }
            let mut y = x.clone();
            for c in b + 1..=hi_pert {
                y[(c - lo) as usize] = (rng.next_u64() % q) as Symbol;
            }
            if x == y {
                continue;
            }
            let (mut rx, mut ry) = (x.clone(), y.clone());
            let mut origin = lo;
            for s in 1..=t {
                rx = step_cells(rule, &rx, false, false);
                ry = step_cells(rule, &ry, false, false);
                origin += r;
                let last = target.min(origin + rx.len() as i64 - 1);
                for c in origin..=last {
                    let k = (c - origin) as usize;
                    if rx[k] != ry[k] {
                        return Some(Witness {
                            side: LeakSide::Right,
                            time: s as usize,
                            column: c,
                            first: Config::new(x, lo).expect("non-empty"),
                            second: Config::new(y, lo).expect("non-empty"),
                        });
                    }
                }
            }
        }
    }
    None
}

/// Result of enumerating candidate words.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockingSearch {
    pub certificates: Vec<BlockingCertificate>,
    /// The word budget stopped the enumeration early.
    pub partial: bool,
    pub words_tried: usize,
}

pub const DEFAULT_WORD_BUDGET: usize = 4096;

/// Certifies every word up to `max_word_len`, centred near the origin.
pub fn search_blocking_words(rule: &Rule, max_word_len: usize, max_steps: usize) -> Result<BlockingSearch> {
    search_blocking_words_with(rule, max_word_len, max_steps, DEFAULT_WORD_BUDGET, &Budgets::default())
}

pub fn search_blocking_words_with(
    rule: &Rule,
    max_word_len: usize,
    max_steps: usize,
    word_budget: usize,
    budgets: &Budgets,
) -> Result<BlockingSearch> {
    let q = rule.size();
    let mut out = BlockingSearch {
        certificates: Vec::new(),
        partial: false,
        words_tried: 0,
    };
    for len in 1..=max_word_len {
        for w in all_words(q, len) {
            if out.words_tried >= word_budget {
                out.partial = true;
                return Ok(out);
            }
            out.words_tried += 1;
            let anchor = -(((len - 1) / 2) as i64);
            let word = Word::new(w.iter().map(|&s| s as Symbol).collect(), anchor)?;
            let i = min_center_width(rule.radius()).max((len - 1) / 2);
            let cert = certify_blocking_with(rule, &word, i, max_steps, budgets)?;
            if cert.is_certified() {
                out.certificates.push(cert);
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "answer", rename_all = "snake_case")]
pub enum Equicontinuity {
    Yes { certificate: BlockingCertificate },
    Unknown { words_tried: usize },
}

/// Semi-decision: searches words of increasing length up to `max_word_len`.
pub fn has_equicontinuous_points(rule: &Rule, max_word_len: usize, max_steps: usize) -> Result<Equicontinuity> {
    let mut tried = 0;
    for len in 1..=max_word_len {
        let q = rule.size();
        if pow_sat(q, len) > DEFAULT_WORD_BUDGET as u128 {
            break;
        }
        for w in all_words(q, len) {
            tried += 1;
            let anchor = -(((len - 1) / 2) as i64);
            let word = Word::new(w.iter().map(|&s| s as Symbol).collect(), anchor)?;
            let i = min_center_width(rule.radius()).max((len - 1) / 2);
            let cert = certify_blocking(rule, &word, i, max_steps)?;
            if cert.is_certified() {
                return Ok(Equicontinuity::Yes { certificate: cert });
            }
        }
    }
    Ok(Equicontinuity::Unknown { words_tried: tried })
}
