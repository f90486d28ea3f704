//! Measure-level exponents: Monte Carlo averages, sampled maxima and the
//! exact maximum over cylinders.

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{max_over_shifts, shift_range, EstimateKind, ExactExponents, ExponentEstimate, Side};
use crate::budget::{pow_sat, Budgets, RunOptions};
use crate::ca::{sample_config_keyed, Config, MeasureSpec, Rule, Symbol};
use crate::error::{Error, Result};
use crate::parallel::in_pool;
use crate::{Rational, Real};

/// Each sampled window for [`lambda_mu_sampled`] admits this many shifts
/// beyond the one centred at the origin.
pub const SAMPLED_EXTRA_SHIFTS: i64 = 64;

fn check_inputs<T: Real>(rule: &Rule, measure: &MeasureSpec<T>, n: usize, samples: u64) -> Result<()> {
    if measure.alphabet_size() != rule.size() {
        return Err(Error::Measure(format!(
            "measure has {} symbols, rule has {}",
            measure.alphabet_size(),
            rule.size()
        )));
    }
    if n == 0 {
        return Err(Error::Invalid("n must be positive".into()));
    }
    if samples == 0 {
        return Err(Error::Invalid("samples must be positive".into()));
    }
    Ok(())
}

/// Runs `eval` on sample indices `0..samples` in parallel; the first
/// failing index (in index order) aborts the whole run.
fn per_sample(workers: Option<usize>, samples: u64, eval: impl Fn(u64) -> Result<u64> + Sync) -> Result<Vec<u64>> {
    let results: Vec<Result<u64>> =
        in_pool(workers, || (0..samples).into_par_iter().map(&eval).collect())?;
    results
        .into_iter()
        .enumerate()
        .map(|(index, r)| {
            r.map_err(|e| Error::Sample {
                index: index as u64,
                source: Box::new(e),
            })
        })
        .collect()
}

fn real<T: Real>(v: f64) -> T {
    T::from_f64(v).expect("finite value")
}

/// Monte Carlo mean of `Iₙ(x)/n`; sample `k` uses the configuration keyed
/// by `(seed, k)`, so the estimate does not depend on the worker count.
pub fn i_mu_estimate<T: Real>(
    rule: &Rule,
    measure: &MeasureSpec<T>,
    n: usize,
    samples: u64,
    seed: u64,
    side: Side,
) -> Result<ExponentEstimate<T>> {
    i_mu_estimate_with(rule, measure, n, samples, seed, side, &RunOptions::default())
}

pub fn i_mu_estimate_with<T: Real>(
    rule: &Rule,
    measure: &MeasureSpec<T>,
    n: usize,
    samples: u64,
    seed: u64,
    side: Side,
    opts: &RunOptions,
) -> Result<ExponentEstimate<T>> {
    check_inputs(rule, measure, n, samples)?;
    let exact = ExactExponents::new(rule, n, side, &opts.budgets)?;
    let w = 2 * (rule.radius() * n) as i64;
    let values = per_sample(opts.workers, samples, |k| {
        let x = sample_config_keyed(measure, -w, w, seed, k)?;
        exact.i_value(&x)
    })?;
    let sum: u128 = values.iter().map(|&v| v as u128).sum();
    let sum_sq: u128 = values.iter().map(|&v| (v as u128) * (v as u128)).sum();
    let m = samples as f64;
    let nf = n as f64;
    let mean = sum as f64 / m;
    let var = if samples > 1 {
        ((sum_sq as f64 - m * mean * mean) / (m - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(ExponentEstimate {
        n,
        value: real(mean / nf),
        stderr: real(var.sqrt() / nf / m.sqrt()),
        samples,
        seed,
        kind: EstimateKind::average(side),
        lower_bound: false,
    })
}

/// Maximum of `Λₙ(x)/n` over sampled windows; a lower bound on the
/// maximum over the measure's support.
pub fn lambda_mu_sampled<T: Real>(
    rule: &Rule,
    measure: &MeasureSpec<T>,
    n: usize,
    samples: u64,
    seed: u64,
    side: Side,
) -> Result<ExponentEstimate<T>> {
    lambda_mu_sampled_with(rule, measure, n, samples, seed, side, &RunOptions::default())
}

pub fn lambda_mu_sampled_with<T: Real>(
    rule: &Rule,
    measure: &MeasureSpec<T>,
    n: usize,
    samples: u64,
    seed: u64,
    side: Side,
    opts: &RunOptions,
) -> Result<ExponentEstimate<T>> {
    check_inputs(rule, measure, n, samples)?;
    let exact = ExactExponents::new(rule, n, side, &opts.budgets)?;
    let half = SAMPLED_EXTRA_SHIFTS / 2;
    let w = 2 * (rule.radius() * n) as i64 + half;
    let values = per_sample(opts.workers, samples, |k| {
        let x = sample_config_keyed(measure, -w, w, seed, k)?;
        let (first, last) = shift_range(&x, (rule.radius() * n) as i64)?;
        max_over_shifts(&exact, &x, first, last)
    })?;
    let best = values.into_iter().max().unwrap_or(0);
    Ok(ExponentEstimate {
        n,
        value: real(best as f64 / n as f64),
        stderr: T::zero(),
        samples,
        seed,
        kind: EstimateKind::lambda(side),
        lower_bound: true,
    })
}

/// `max Λ̃ₙ / n` over every cylinder word of length `2rn + r`, which is
/// the maximum over the support of any full-support measure.
///
/// Minus-side words end at coordinate 0; plus-side words start there.
pub fn lambda_mu_exact<T: Real>(rule: &Rule, measure: &MeasureSpec<T>, n: usize, side: Side) -> Result<Rational> {
    lambda_mu_exact_with(rule, measure, n, side, &RunOptions::default())
}

pub fn lambda_mu_exact_with<T: Real>(
    rule: &Rule,
    measure: &MeasureSpec<T>,
    n: usize,
    side: Side,
    opts: &RunOptions,
) -> Result<Rational> {
    check_inputs(rule, measure, n, 1)?;
    let oriented = match side {
        Side::Plus => rule.mirror(),
        Side::Minus => rule.clone(),
    };
    let best = in_pool(opts.workers, || max_over_words(&oriented, n, &opts.budgets))??;
    Ok(Ratio::new(best, n as u64))
}

fn max_over_words(rule: &Rule, n: usize, budgets: &Budgets) -> Result<u64> {
    let r = rule.radius();
    if r * n == 0 || rule.ignores_right() {
        return Ok(0);
    }
    if let Some((a, b)) = rule.factors() {
        return Ok(max_over_words(a, n, budgets)?.max(max_over_words(b, n, budgets)?));
    }
    let exact = ExactExponents::new(rule, n, Side::Minus, budgets)?;
    let q = rule.size();
    let rn = (r * n) as i64;
    let len = 2 * r * n + r;
    let words = pow_sat(q, len);
    let work = words.saturating_mul(exact.cost());
    if work > budgets.words as u128 {
        return Err(Error::budget(
            "cylinder words x per-word cost",
            work,
            budgets.words as u128,
            "use lambda_mu_sampled for a lower bound",
        ));
    }
    let lo = 1 - len as i64;
    let results: Vec<Result<u64>> = (0..words as u64)
        .into_par_iter()
        .map(|m| {
            let mut cells = vec![0 as Symbol; (2 * rn - lo + 1) as usize];
            let mut m = m;
            for k in (0..len).rev() {
                cells[k] = (m % q as u64) as Symbol;
                m /= q as u64;
            }
            exact.lambda_tilde(&Config::new(cells, lo)?)
        })
        .collect();
    let mut best = 0;
    for v in results {
        best = best.max(v?);
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Monte Carlo `Iₙ;μ / n`.
    IMu,
    /// Sampled maximum of `Λₙ / n`.
    LambdaSampled,
    /// Exact maximum over cylinders.
    LambdaExact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SequenceSpec {
    pub estimator: Estimator,
    pub side: Side,
    pub samples: u64,
    pub seed: u64,
}

/// One line of an exponent table; column names follow the CSV layout.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SequenceRow<T: Real> {
    pub n: usize,
    pub side: Side,
    pub method: Estimator,
    pub lower: Option<T>,
    pub exact: Option<T>,
    pub upper: Option<T>,
    pub value: T,
    pub stderr: T,
    pub samples: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentSequence<T: Real> {
    pub rows: Vec<SequenceRow<T>>,
    /// The values neither only rise nor only fall with n (diagnostic only).
    pub non_monotone: bool,
}

pub fn exponent_sequence<T: Real>(
    rule: &Rule,
    measure: &MeasureSpec<T>,
    n_list: &[usize],
    spec: &SequenceSpec,
) -> Result<ExponentSequence<T>> {
    exponent_sequence_with(rule, measure, n_list, spec, &RunOptions::default())
}

pub fn exponent_sequence_with<T: Real>(
    rule: &Rule,
    measure: &MeasureSpec<T>,
    n_list: &[usize],
    spec: &SequenceSpec,
    opts: &RunOptions,
) -> Result<ExponentSequence<T>> {
    if n_list.is_empty() {
        return Err(Error::Invalid("n list is empty".into()));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("n list must be strictly ascending".into()));
    }
    let exact_rate = |n: usize| -> Result<Option<T>> {
        match lambda_mu_exact_with(rule, measure, n, spec.side, opts) {
            Ok(v) => Ok(Some(real(*v.numer() as f64 / *v.denom() as f64))),
            Err(e) if e.is_budget() => Ok(None),
            Err(e) => Err(e),
        }
    };
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let row = match spec.estimator {
            Estimator::IMu => {
                let e = i_mu_estimate_with(rule, measure, n, spec.samples, spec.seed, spec.side, opts)?;
                SequenceRow {
                    n,
                    side: spec.side,
                    method: spec.estimator,
                    lower: None,
                    exact: None,
                    upper: None,
                    value: e.value,
                    stderr: e.stderr,
                    samples: e.samples,
                    seed: e.seed,
                }
            }
            Estimator::LambdaSampled => {
                let e = lambda_mu_sampled_with(rule, measure, n, spec.samples, spec.seed, spec.side, opts)?;
                let exact = exact_rate(n)?;
                SequenceRow {
                    n,
                    side: spec.side,
                    method: spec.estimator,
                    lower: Some(e.value),
                    exact,
                    upper: Some(exact.unwrap_or_else(|| real(rule.radius() as f64))),
                    value: e.value,
                    stderr: e.stderr,
                    samples: e.samples,
                    seed: e.seed,
                }
            }
            Estimator::LambdaExact => {
                let v = exact_rate(n)?.ok_or_else(|| {
                    Error::budget(
                        "cylinder words x per-word cost",
                        u128::MAX,
                        opts.budgets.words as u128,
                        "use the sampled estimator",
                    )
                })?;
                SequenceRow {
                    n,
                    side: spec.side,
                    method: spec.estimator,
                    lower: Some(v),
                    exact: Some(v),
                    upper: Some(v),
                    value: v,
                    stderr: T::zero(),
                    samples: 0,
                    seed: spec.seed,
                }
            }
        };
        rows.push(row);
    }
    let up = rows.windows(2).all(|w| w[0].value <= w[1].value);
    let down = rows.windows(2).all(|w| w[0].value >= w[1].value);
    Ok(ExponentSequence {
        rows,
        non_monotone: !(up || down),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ca::builtin;
    use crate::Measure;

    #[test]
    fn shift_average_is_one() {
        let m = Measure::uniform(2).unwrap();
        let e = i_mu_estimate(&builtin::shift(), &m, 6, 50, 3, Side::Minus).unwrap();
        assert_eq!(e.value, 1.0);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn coven_minus_exact_is_two() {
        let m = Measure::uniform(2).unwrap();
        let rule = builtin::coven_rule(&[1, 0]).unwrap();
        for n in 1..=3 {
            let v = lambda_mu_exact(&rule, &m, n, Side::Minus).unwrap();
            assert_eq!(v, Ratio::from_integer(2));
            assert_eq!(lambda_mu_exact(&rule, &m, n, Side::Plus).unwrap(), Ratio::from_integer(0));
        }
    }

    #[test]
    fn worker_count_does_not_change_estimates() {
        let m = Measure::uniform(2).unwrap();
        let rule = builtin::coven_rule(&[1, 0]).unwrap();
        let one = RunOptions {
            workers: Some(1),
            ..Default::default()
        };
        let four = RunOptions {
            workers: Some(4),
            ..Default::default()
        };
        let a = i_mu_estimate_with(&rule, &m, 5, 64, 9, Side::Minus, &one).unwrap();
        let b = i_mu_estimate_with(&rule, &m, 5, 64, 9, Side::Minus, &four).unwrap();
        assert_eq!(a, b);
    }
}
