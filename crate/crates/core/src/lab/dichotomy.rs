//! Finite-sample look at whether the two-sided agreement radius
//! `Iₙ⁺(σ^(-p)x) + Iₙ⁻(σ^p x)` stays bounded or grows with `n`, set beside
//! the blocking-word search.

use rayon::prelude::*;
use serde::Serialize;

use crate::budget::RunOptions;
use crate::ca::{sample_config_keyed, shift_config, MeasureSpec, Rule};
use crate::error::{Error, Result};
use crate::exponents::{ExactExponents, Side};
use crate::parallel::in_pool;
use crate::set_dynamics::{has_equicontinuous_points, Equicontinuity};
use crate::Real;

/// Mean growth per step above which the trend counts as growing.
pub const GROWTH_THRESHOLD: f64 = 0.25;
const WORD_LEN: usize = 3;
const CERT_STEPS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Bounded,
    Growing,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DichotomyRow {
    pub n: usize,
    pub mean: f64,
    pub max: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DichotomyReport {
    pub p: usize,
    pub samples: u64,
    pub seed: u64,
    pub rows: Vec<DichotomyRow>,
    /// Slope of the mean between the first and last horizon.
    pub growth_per_step: f64,
    pub trend: Trend,
    pub equicontinuity: Equicontinuity,
    /// False only when a blocking certificate meets a growing trend; a
    /// growing trend without a certificate is advisory.
    pub consistent: bool,
}

pub fn diagnose_dichotomy<T: Real>(
    rule: &Rule,
    measure: &MeasureSpec<T>,
    n_list: &[usize],
    samples: u64,
    seed: u64,
) -> Result<DichotomyReport> {
    diagnose_dichotomy_with(rule, measure, n_list, samples, seed, &RunOptions::default())
}

pub fn diagnose_dichotomy_with<T: Real>(
    rule: &Rule,
    measure: &MeasureSpec<T>,
    n_list: &[usize],
    samples: u64,
    seed: u64,
    opts: &RunOptions,
) -> Result<DichotomyReport> {
    if n_list.len() < 2 || n_list.windows(2).any(|w| w[0] >= w[1]) || n_list[0] == 0 {
        return Err(Error::Invalid(
            "n list needs at least two strictly ascending positive horizons".into(),
        ));
    }
    if samples == 0 {
        return Err(Error::Invalid("samples must be positive".into()));
    }
    let r = rule.radius();
    let p = r as i64;
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let plus = ExactExponents::new(rule, n, Side::Plus, &opts.budgets)?;
        let minus = ExactExponents::new(rule, n, Side::Minus, &opts.budgets)?;
        let w = p + 2 * (r * n) as i64;
        let values: Vec<Result<u64>> = in_pool(opts.workers, || {
            (0..samples)
                .into_par_iter()
                .map(|k| {
                    let x = sample_config_keyed(measure, -w, w, seed, k)?;
                    Ok(plus.i_value(&shift_config(&x, -p))? + minus.i_value(&shift_config(&x, p))?)
                })
                .collect()
        })?;
        let values = values.into_iter().collect::<Result<Vec<u64>>>()?;
        let sum: u64 = values.iter().sum();
        rows.push(DichotomyRow {
            n,
            mean: sum as f64 / samples as f64,
            max: values.into_iter().max().unwrap_or(0),
        });
    }
    let (first, last) = (&rows[0], &rows[rows.len() - 1]);
    let growth_per_step = (last.mean - first.mean) / (last.n - first.n) as f64;
    let trend = if growth_per_step > GROWTH_THRESHOLD {
        Trend::Growing
    } else {
        Trend::Bounded
    };
    let equicontinuity = has_equicontinuous_points(rule, WORD_LEN, CERT_STEPS)?;
    let certified = matches!(equicontinuity, Equicontinuity::Yes { .. });
    Ok(DichotomyReport {
        p: r,
        samples,
        seed,
        rows,
        growth_per_step,
        trend,
        equicontinuity,
        consistent: !(certified && trend == Trend::Growing),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ca::builtin;
    use crate::Measure;

    #[test]
    fn shift_grows_without_a_certificate() {
        let rep = diagnose_dichotomy(&builtin::shift(), &Measure::uniform(2).unwrap(), &[2, 4, 8], 50, 1).unwrap();
        assert_eq!(rep.trend, Trend::Growing);
        assert!((rep.growth_per_step - 1.0).abs() < 1e-12);
        assert!(matches!(rep.equicontinuity, Equicontinuity::Unknown { .. }));
        assert!(rep.consistent);
    }

    #[test]
    fn coven_is_bounded_and_certified() {
        let coven = builtin::coven_rule(&[1, 0]).unwrap();
        let rep = diagnose_dichotomy(&coven, &Measure::uniform(2).unwrap(), &[4, 8, 16], 200, 1).unwrap();
        assert_eq!(rep.trend, Trend::Bounded, "{rep:?}");
        assert!(matches!(rep.equicontinuity, Equicontinuity::Yes { .. }));
        assert!(rep.consistent);
    }
}
