//! Surjectivity through subset reachability in the de Bruijn graph.
//!
//! Vertices are words of length `2r`; reading symbol `s` from vertex `u`
//! moves to the suffix of `u s` and emits `f(u s)`. The rule is onto iff no
//! finite word is missing from the image, i.e. iff the subset construction
//! started from all vertices never reaches the empty set.

use std::collections::HashSet;

use crate::budget::{pow_sat, Budgets};
use crate::ca::Rule;
use crate::error::{Error, Result};

const MAX_VERTICES: u128 = 1 << 20;

pub fn decide_surjective(rule: &Rule) -> Result<bool> {
    decide_surjective_with(rule, Budgets::default().subset_states)
}

pub fn decide_surjective_with(rule: &Rule, max_subsets: u64) -> Result<bool> {
    if let Some((a, b)) = rule.factors() {
        return Ok(decide_surjective_with(a, max_subsets)? && decide_surjective_with(b, max_subsets)?);
    }
    let q = rule.size();
    let vertices = pow_sat(q, 2 * rule.radius());
    if vertices > MAX_VERTICES {
        return Err(Error::budget(
            "de Bruijn vertices",
            vertices,
            MAX_VERTICES,
            "use a rule with a smaller radius or alphabet",
        ));
    }
    let v = vertices as usize;
    let words = v.div_ceil(64);
    // succ[(u * q + b)] lists the targets of u under output b.
    let mut succ: Vec<Vec<u32>> = vec![Vec::new(); v * q];
    for u in 0..v {
        for s in 0..q {
            let index = u * q + s;
            let out = rule.output_at(index) as usize;
            succ[u * q + out].push((index % v) as u32);
        }
    }
    let mut start = vec![u64::MAX; words];
    if v % 64 != 0 {
        start[words - 1] = (1u64 << (v % 64)) - 1;
    }
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut stack = vec![start.clone()];
    seen.insert(start);
    while let Some(set) = stack.pop() {
        for out in 0..q {
            let mut next = vec![0u64; words];
            for (w, &bits) in set.iter().enumerate() {
                let mut bits = bits;
                while bits != 0 {
                    let u = w * 64 + bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    for &t in &succ[u * q + out] {
                        next[t as usize / 64] |= 1u64 << (t % 64);
                    }
                }
            }
            if next.iter().all(|&w| w == 0) {
                return Ok(false);
            }
            if !seen.contains(&next) {
                if seen.len() as u64 >= max_subsets {
                    return Err(Error::budget(
                        "subset states",
                        seen.len() as u128 + 1,
                        max_subsets as u128,
                        "raise the subset-state budget",
                    ));
                }
                seen.insert(next.clone());
                stack.push(next);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ca::builtin;

    #[test]
    fn known_cases() {
        assert!(decide_surjective(&builtin::shift()).unwrap());
        assert!(decide_surjective(&builtin::identity()).unwrap());
        assert!(!decide_surjective(&builtin::constant(0, 1).unwrap()).unwrap());
        assert!(decide_surjective(&builtin::coven_rule(&[1, 0]).unwrap()).unwrap());
        for r in 1..=3 {
            assert!(decide_surjective(&builtin::example2_f2_rule(r).unwrap()).unwrap());
        }
    }

    #[test]
    fn tiny_budget_reports_budget_error() {
        let rule = builtin::example2_f2_rule(2).unwrap();
        let err = decide_surjective_with(&rule, 1).unwrap_err();
        assert!(err.is_budget());
    }
}
