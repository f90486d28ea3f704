//! The named rules used throughout the examples and the command line.

use super::rule::{Alphabet, Rule, Symbol, MAX_ALPHABET};
use crate::error::{Error, Result};

fn binary() -> Alphabet {
    Alphabet::new(2).expect("binary alphabet")
}

/// `F(x)_i = x_{i+1}` on `{0,1}` with radius 1.
pub fn shift() -> Rule {
    Rule::from_fn(binary(), 1, |t| t[2]).expect("shift table")
}

/// Identity on `{0,1}` with radius 0.
pub fn identity() -> Rule {
    Rule::from_fn(binary(), 0, |t| t[0]).expect("identity table")
}

/// Constant rule of the given radius on `{0,1}`.
pub fn constant(value: Symbol, radius: usize) -> Result<Rule> {
    Rule::from_fn(binary(), radius, |_| value)
}

/// True when no `p` in `1..len` satisfies `b[i+p] = b[i]` for all valid `i`.
pub fn is_aperiodic(word: &[Symbol]) -> bool {
    (1..word.len()).all(|p| (0..word.len() - p).any(|i| word[i + p] != word[i]))
}

/// Flips the centre cell when the `r` cells to its right spell `pattern`.
pub fn coven_rule(pattern: &[Symbol]) -> Result<Rule> {
    if pattern.is_empty() {
        return Err(Error::Rule("pattern must be non-empty".into()));
    }
    if let Some(s) = pattern.iter().find(|&&s| s > 1) {
        return Err(Error::Rule(format!("pattern symbol {s} is not binary")));
    }
    if !is_aperiodic(pattern) {
        return Err(Error::Rule(format!("pattern {pattern:?} is periodic")));
    }
    let r = pattern.len();
    Rule::from_fn(binary(), r, |t| {
        let centre = t[r];
        if &t[r + 1..] == pattern {
            centre ^ 1
        } else {
            centre
        }
    })
}

/// Rule on `{0,1,2}`: `x_0 + x_r mod 2` unless a `2` occurs in
/// `x_0..x_r`, in which case `x_0` is kept.
pub fn example2_f2_rule(radius: usize) -> Result<Rule> {
    if radius < 1 {
        return Err(Error::Rule("radius must be at least 1".into()));
    }
    let alphabet = Alphabet::new(3)?;
    Rule::from_fn(alphabet, radius, |t| {
        let right = &t[radius..];
        if right.contains(&2) {
            t[radius]
        } else {
            (t[radius] + t[2 * radius]) % 2
        }
    })
}

/// Componentwise product; symbol `s1 * |A2| + s2`.
pub fn product_rule(first: &Rule, second: &Rule) -> Result<Rule> {
    let size = first.size() * second.size();
    if size > MAX_ALPHABET {
        return Err(Error::Rule(format!(
            "product alphabet {size} exceeds the limit {MAX_ALPHABET}"
        )));
    }
    let radius = first.radius().max(second.radius());
    let a = first.widen(radius)?;
    let b = second.widen(radius)?;
    let s2 = second.size();
    let width = 2 * radius + 1;
    let mut left = vec![0 as Symbol; width];
    let mut right = vec![0 as Symbol; width];
    let rule = Rule::from_fn(Alphabet::new(size)?, radius, |t| {
        for (k, &s) in t.iter().enumerate() {
            left[k] = s / s2 as Symbol;
            right[k] = s % s2 as Symbol;
        }
        a.output(&left) * s2 as Symbol + b.output(&right)
    })?;
    Ok(rule.with_factors(a, b))
}

/// Resolves a builtin name: `shift`, `identity`, `coven:<B>`, `f2:<r>`,
/// `product:<a>,<b>` (the first comma separates the factors).
pub fn by_name(name: &str) -> Result<Rule> {
    let name = name.trim();
    let (head, arg) = match name.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (name, None),
    };
    match (head, arg) {
        ("shift", None) => Ok(shift()),
        ("identity", None) => Ok(identity()),
        ("coven", Some(b)) => {
            let pattern: Option<Vec<Symbol>> = b
                .chars()
                .map(|c| c.to_digit(10).map(|d| d as Symbol))
                .collect();
            coven_rule(&pattern.ok_or_else(|| Error::Rule(format!("bad pattern {b:?}")))?)
        }
        ("f2", Some(r)) => {
            let r = r
                .parse()
                .map_err(|_| Error::Rule(format!("bad radius {r:?}")))?;
            example2_f2_rule(r)
        }
        ("product", Some(args)) => {
            let (a, b) = args
                .split_once(',')
                .ok_or_else(|| Error::Rule("product needs two comma-separated rules".into()))?;
            product_rule(&by_name(a)?, &by_name(b)?)
        }
        _ => Err(Error::Rule(format!("unknown builtin rule {name:?}"))),
    }
}
