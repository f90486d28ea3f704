//! Entropy of the shift and of the automaton: analytic values for product
//! Bernoulli measures, plug-in estimates from sampled blocks, and exact
//! space-time pattern counts. Natural logarithms throughout.

mod patterns;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::{pow_sat, Budgets, RunOptions};
use crate::ca::{sample_config_keyed, step_cells, MeasureSpec, Rule, Symbol};
use crate::error::{Error, Result};
use crate::exponents::{lambda_mu_exact_with, Side};
use crate::parallel::in_pool;
use crate::Real;

pub use patterns::{count_patterns, largest_feasible_pattern_n, PatternCount};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyKind {
    ShiftAnalytic,
    ShiftEmpirical,
    AutomatonEmpirical,
    TopologicalRate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyEstimate<T: Real> {
    pub kind: EntropyKind,
    pub value: T,
    pub p: Option<usize>,
    pub n: Option<usize>,
    pub block_len: Option<usize>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    /// Distinct patterns: observed ones for the empirical kinds, all of
    /// them for the topological rate.
    pub pattern_count: Option<u128>,
    /// False when a pattern count is only a sampled lower bound.
    pub exact: bool,
    /// `H(k,p) - H(k-1,p)` for `k = 1..=n` (automaton estimates only).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub increments: Vec<T>,
    pub warnings: Vec<String>,
}

impl<T: Real> EntropyEstimate<T> {
    fn new(kind: EntropyKind, value: T) -> Self {
        EntropyEstimate {
            kind,
            value,
            p: None,
            n: None,
            block_len: None,
            samples: None,
            seed: None,
            pattern_count: None,
            exact: true,
            increments: Vec::new(),
            warnings: Vec::new(),
        }
    }
}

fn real<T: Real>(v: f64) -> T {
    T::from_f64(v).expect("finite value")
}

/// Entropy rate of a product Bernoulli measure: the tracks add.
pub fn analytic_shift_entropy<T: Real>(measure: &MeasureSpec<T>) -> T {
    measure
        .tracks()
        .iter()
        .flat_map(|track| track.iter())
        .fold(T::zero(), |acc, &w| acc - w * w.ln())
}

/// Plug-in entropy of already sorted keys, for each prefix length in
/// `prefixes`.
fn plug_in_by_prefix(sorted: &[Vec<Symbol>], prefixes: &[usize]) -> (Vec<f64>, usize) {
    let total = sorted.len() as f64;
    let mut distinct_full = 0;
    let mut out = Vec::with_capacity(prefixes.len());
    for (i, &len) in prefixes.iter().enumerate() {
        let mut h = 0.0;
        let mut mass = 0.0;
        let mut groups = 0;
        let mut start = 0;
        while start < sorted.len() {
            let mut end = start + 1;
            while end < sorted.len() && sorted[end][..len] == sorted[start][..len] {
                end += 1;
            }
            let prob = (end - start) as f64 / total;
            h -= prob * prob.ln();
            mass += prob;
            groups += 1;
            start = end;
        }
        debug_assert!((mass - 1.0).abs() < 1e-9, "probabilities sum to {mass}");
        if i + 1 == prefixes.len() {
            distinct_full = groups;
        }
        out.push(h.max(0.0));
    }
    (out, distinct_full)
}

fn collect_samples(
    workers: Option<usize>,
    samples: u64,
    eval: impl Fn(u64) -> Result<Vec<Symbol>> + Sync,
) -> Result<Vec<Vec<Symbol>>> {
    let results: Vec<Result<Vec<Symbol>>> =
        in_pool(workers, || (0..samples).into_par_iter().map(&eval).collect())?;
    let mut keys = Vec::with_capacity(samples as usize);
    for (index, r) in results.into_iter().enumerate() {
        keys.push(r.map_err(|e| Error::Sample {
            index: index as u64,
            source: Box::new(e),
        })?);
    }
    keys.sort_unstable();
    Ok(keys)
}

/// Plug-in entropy of independent sampled blocks, divided by `block_len`.
pub fn empirical_shift_entropy<T: Real>(
    measure: &MeasureSpec<T>,
    block_len: usize,
    samples: u64,
    seed: u64,
) -> Result<EntropyEstimate<T>> {
    empirical_shift_entropy_with(measure, block_len, samples, seed, &RunOptions::default())
}

pub fn empirical_shift_entropy_with<T: Real>(
    measure: &MeasureSpec<T>,
    block_len: usize,
    samples: u64,
    seed: u64,
    opts: &RunOptions,
) -> Result<EntropyEstimate<T>> {
    if block_len == 0 || samples == 0 {
        return Err(Error::Invalid("block_len and samples must be positive".into()));
    }
    let keys = collect_samples(opts.workers, samples, |k| {
        Ok(sample_config_keyed(measure, 0, block_len as i64 - 1, seed, k)?.cells().to_vec())
    })?;
    let (h, distinct) = plug_in_by_prefix(&keys, &[block_len]);
    let mut est = EntropyEstimate::new(EntropyKind::ShiftEmpirical, real(h[0] / block_len as f64));
    est.block_len = Some(block_len);
    est.samples = Some(samples);
    est.seed = Some(seed);
    est.pattern_count = Some(distinct as u128);
    let recommended = pow_sat(measure.alphabet_size(), block_len).saturating_mul(10);
    if (samples as u128) < recommended {
        est.warnings.push(format!(
            "undersampled: {samples} samples for {} possible blocks (recommended {recommended})",
            recommended / 10
        ));
    }
    Ok(est)
}

/// Plug-in estimate of `h_μ(F, α_p)` from the central `(2p+1)`-blocks of
/// `x, F(x), ..., Fⁿ(x)`: reports `H(n,p)/n` and the increments.
pub fn empirical_automaton_entropy<T: Real>(
    rule: &Rule,
    measure: &MeasureSpec<T>,
    p: usize,
    n: usize,
    samples: u64,
    seed: u64,
) -> Result<EntropyEstimate<T>> {
    empirical_automaton_entropy_with(rule, measure, p, n, samples, seed, &RunOptions::default())
}

pub fn empirical_automaton_entropy_with<T: Real>(
    rule: &Rule,
    measure: &MeasureSpec<T>,
    p: usize,
    n: usize,
    samples: u64,
    seed: u64,
    opts: &RunOptions,
) -> Result<EntropyEstimate<T>> {
    let r = rule.radius();
    if p < r {
        return Err(Error::Invalid(format!("p = {p} must be at least the radius {r}")));
    }
    if n == 0 || samples == 0 {
        return Err(Error::Invalid("n and samples must be positive".into()));
    }
    if measure.alphabet_size() != rule.size() {
        return Err(Error::Measure(format!(
            "measure has {} symbols, rule has {}",
            measure.alphabet_size(),
            rule.size()
        )));
    }
    let width = 2 * p + 1;
    let reach = (r * n) as i64;
    let lo = -(p as i64) - reach;
    let keys = collect_samples(opts.workers, samples, |k| {
        let x = sample_config_keyed(measure, lo, p as i64 + reach, seed, k)?;
        let mut key = Vec::with_capacity(width * (n + 1));
        let mut row = x.cells().to_vec();
        key.extend_from_slice(&row[reach as usize..reach as usize + width]);
        for t in 1..=n {
            row = step_cells(rule, &row, false, false);
            let off = reach as usize - r * t;
            key.extend_from_slice(&row[off..off + width]);
        }
        Ok(key)
    })?;
    let prefixes: Vec<usize> = (0..=n).map(|k| (k + 1) * width).collect();
    let (h, distinct) = plug_in_by_prefix(&keys, &prefixes);
    let mut est = EntropyEstimate::new(EntropyKind::AutomatonEmpirical, real(h[n] / n as f64));
    est.p = Some(p);
    est.n = Some(n);
    est.samples = Some(samples);
    est.seed = Some(seed);
    est.pattern_count = Some(distinct as u128);
    est.increments = h.windows(2).map(|w| real(w[1] - w[0])).collect();
    if distinct as u64 > samples / 10 {
        est.warnings.push(format!(
            "undersampled: {distinct} distinct patterns from {samples} samples"
        ));
    }
    Ok(est)
}

/// `log(#patterns) / n` for space-time patterns of width `2p+1` and
/// height `n+1`.
pub fn count_spacetime_patterns<T: Real>(rule: &Rule, p: usize, n: usize) -> Result<EntropyEstimate<T>> {
    count_spacetime_patterns_with(rule, p, n, &Budgets::default())
}

pub fn count_spacetime_patterns_with<T: Real>(
    rule: &Rule,
    p: usize,
    n: usize,
    budgets: &Budgets,
) -> Result<EntropyEstimate<T>> {
    if n == 0 {
        return Err(Error::Invalid("n must be positive".into()));
    }
    let count = count_patterns(rule, p, n, budgets)?;
    let value = (count.count as f64).ln() / n as f64;
    let mut est = EntropyEstimate::new(EntropyKind::TopologicalRate, real(value));
    est.p = Some(p);
    est.n = Some(n);
    est.pattern_count = Some(count.count);
    est.exact = count.exact;
    if !count.exact {
        est.samples = Some(count.words as u64);
        est.warnings
            .push("pattern budget exceeded: sampled distinct count is a lower bound".into());
    }
    Ok(est)
}

/// `(λ⁺ + λ⁻)·log|A|` for the uniform measure at horizon `n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TopologicalBound<T: Real> {
    pub value: T,
    pub n: usize,
    pub lambda_plus: T,
    pub lambda_minus: T,
    /// Per side: exact maximum over cylinders, or the trivial bound `r`.
    pub plus_exact: bool,
    pub minus_exact: bool,
}

pub fn topological_upper_bound<T: Real>(rule: &Rule, n: usize) -> Result<TopologicalBound<T>> {
    topological_upper_bound_with(rule, n, &RunOptions::default())
}

pub fn topological_upper_bound_with<T: Real>(
    rule: &Rule,
    n: usize,
    opts: &RunOptions,
) -> Result<TopologicalBound<T>> {
    let uniform = MeasureSpec::<T>::uniform(rule.size())?;
    let side_value = |side: Side| -> Result<(T, bool)> {
        match lambda_mu_exact_with(rule, &uniform, n, side, opts) {
            Ok(v) => Ok((real(*v.numer() as f64 / *v.denom() as f64), true)),
            Err(e) if e.is_budget() => Ok((real(rule.radius() as f64), false)),
            Err(e) => Err(e),
        }
    };
    let (plus, plus_exact) = side_value(Side::Plus)?;
    let (minus, minus_exact) = side_value(Side::Minus)?;
    let log_a: T = real((rule.size() as f64).ln());
    Ok(TopologicalBound {
        value: (plus + minus) * log_a,
        n,
        lambda_plus: plus,
        lambda_minus: minus,
        plus_exact,
        minus_exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ca::builtin;
    use crate::Measure;

    #[test]
    fn analytic_values() {
        let ln = |x: f64| x.ln();
        assert!((analytic_shift_entropy(&Measure::uniform(2).unwrap()) - ln(2.0)).abs() < 1e-15);
        let prod = Measure::product_uniform(&[2, 3]).unwrap();
        assert!((analytic_shift_entropy(&prod) - ln(6.0)).abs() < 1e-12);
    }

    #[test]
    fn identity_patterns() {
        let est: EntropyEstimate<f64> = count_spacetime_patterns(&builtin::identity(), 1, 3).unwrap();
        assert_eq!(est.pattern_count, Some(8));
        assert!((est.value - 8f64.ln() / 3.0).abs() < 1e-12);
    }

    #[test]
    fn shift_patterns_p1_n2() {
        let est: EntropyEstimate<f64> = count_spacetime_patterns(&builtin::shift(), 1, 2).unwrap();
        assert_eq!(est.pattern_count, Some(32));
    }

    #[test]
    fn automaton_entropy_of_identity_decays() {
        let m = Measure::uniform(2).unwrap();
        let est = empirical_automaton_entropy(&builtin::identity(), &m, 1, 8, 2000, 5).unwrap();
        // Three fair bits, spread over eight steps.
        assert!((est.value - 3.0 * 2f64.ln() / 8.0).abs() < 0.01);
        assert!(est.increments.iter().all(|&d| d.abs() < 1e-12));
    }

    #[test]
    fn coven_topological_bound() {
        let rule = builtin::coven_rule(&[1, 0]).unwrap();
        let b: TopologicalBound<f64> = topological_upper_bound(&rule, 3).unwrap();
        assert!((b.value - 2.0 * 2f64.ln()).abs() < 1e-12);
        assert!(b.plus_exact && b.minus_exact);
    }
}
