//! Inequality checks, randomized property suites, the boundedness
//! diagnostic and end-to-end runs of the two worked examples.
//!
//! Checks compare point estimates against a declared tolerance; the
//! verdict depends on the margin and tolerance only.

mod dichotomy;
mod properties;
mod reproduce;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::budget::RunOptions;
use crate::ca::{MeasureSpec, Rule};
use crate::entropy::{
    analytic_shift_entropy, count_spacetime_patterns_with, empirical_automaton_entropy_with,
    largest_feasible_pattern_n, topological_upper_bound_with,
};
use crate::error::{Error, Result};
use crate::exponents::{i_mu_estimate_with, lambda_mu_exact_with, lambda_mu_sampled_with, Side};
use crate::Real;

pub use dichotomy::{diagnose_dichotomy, diagnose_dichotomy_with, DichotomyReport, DichotomyRow, Trend};
pub use properties::{
    check_independence_containment, check_independence_containment_with, run_property_suite,
    run_property_suite_with, Failure, PropertyReport, Status, SuiteOptions, SUITE,
};
pub use reproduce::{
    reproduce_example, reproduce_example_with, ExampleId, ReproduceOptions, ReproduceReport, ReproduceRow,
};

pub const METRIC_TOLERANCE: f64 = 0.1;
pub const TOPOLOGICAL_TOLERANCE: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityId {
    /// `h_μ(F) ≤ h_μ(σ)(I⁺ + I⁻)`.
    EntropyAverage,
    /// `h_μ(F) ≤ h_μ(σ)(λ⁺ + λ⁻)`.
    EntropyMaximal,
    /// `h_top(F) ≤ (λ⁺ + λ⁻) log|A|` for the uniform measure.
    EntropyTopological,
    /// `I± ≤ λ±`, summed over the sides.
    AverageBelowMaximal,
}

impl InequalityId {
    pub fn as_str(self) -> &'static str {
        match self {
            InequalityId::EntropyAverage => "entropy_average",
            InequalityId::EntropyMaximal => "entropy_maximal",
            InequalityId::EntropyTopological => "entropy_topological",
            InequalityId::AverageBelowMaximal => "average_below_maximal",
        }
    }
}

impl fmt::Display for InequalityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InequalityId {
    type Err = Error;

    /// Accepts the descriptive names and the short ids used by the command
    /// line interface (`thm_5_5`, `cor_5_6`, `prop_5_7`, `prop_3_2`).
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "entropy_average" | "thm_5_5" => Ok(InequalityId::EntropyAverage),
            "entropy_maximal" | "cor_5_6" => Ok(InequalityId::EntropyMaximal),
            "entropy_topological" | "prop_5_7" => Ok(InequalityId::EntropyTopological),
            "average_below_maximal" | "prop_3_2" => Ok(InequalityId::AverageBelowMaximal),
            _ => Err(Error::Invalid(format!("unknown inequality {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    HoldsWithinTolerance,
    Violated,
}

impl Verdict {
    /// `margin >= 0` holds; `margin >= -tolerance` holds within tolerance.
    pub fn from_margin<T: Real>(margin: T, tolerance: T) -> Verdict {
        if margin >= T::zero() {
            Verdict::Holds
        } else if margin >= -tolerance {
            Verdict::HoldsWithinTolerance
        } else {
            Verdict::Violated
        }
    }

    pub fn passed(self) -> bool {
        self != Verdict::Violated
    }
}

/// Which estimator produced a number, and with which seed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub op: String,
    pub seed: Option<u64>,
    pub method: String,
}

impl Provenance {
    fn new(op: &str, seed: Option<u64>, method: impl Into<String>) -> Self {
        Provenance {
            op: op.into(),
            seed,
            method: method.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrendPoint<T: Real> {
    pub n: usize,
    pub value: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalityReport<T: Real> {
    pub inequality_id: InequalityId,
    pub params: Value,
    pub lhs: T,
    pub rhs: T,
    pub lhs_method: String,
    pub rhs_method: String,
    /// `rhs - lhs`.
    pub margin: T,
    pub tolerance: T,
    pub verdict: Verdict,
    pub provenance: Vec<Provenance>,
    /// Left-hand side at smaller horizons, for the topological check.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trend: Vec<TrendPoint<T>>,
    pub warnings: Vec<String>,
}

impl<T: Real> InequalityReport<T> {
    fn new(id: InequalityId, params: Value, lhs: (T, String), rhs: (T, String), tolerance: T) -> Self {
        let margin = rhs.0 - lhs.0;
        InequalityReport {
            inequality_id: id,
            params,
            lhs: lhs.0,
            rhs: rhs.0,
            lhs_method: lhs.1,
            rhs_method: rhs.1,
            margin,
            tolerance,
            verdict: Verdict::from_margin(margin, tolerance),
            provenance: Vec::new(),
            trend: Vec::new(),
            warnings: Vec::new(),
        }
    }
}

/// Knobs shared by the inequality checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckOptions {
    /// Overrides the default tolerance of the check.
    pub tolerance: Option<f64>,
    /// Samples for the average exponents; defaults to the entropy sample
    /// count.
    pub exponent_samples: Option<u64>,
    /// Largest horizon tried for the exact maximal exponents.
    pub lambda_n: usize,
    pub run: RunOptions,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            tolerance: None,
            exponent_samples: None,
            lambda_n: 3,
            run: RunOptions::default(),
        }
    }
}

fn real<T: Real>(v: f64) -> T {
    T::from_f64(v).expect("finite value")
}

fn ratio_to<T: Real>(v: crate::Rational) -> T {
    real(*v.numer() as f64 / *v.denom() as f64)
}

/// `λ±` for the check: the exact cylinder maximum at the largest horizon
/// `<= lambda_n` that fits the budget (an upper estimate, the sequence being
/// subadditive), else a sampled lower bound at `lambda_n`.
fn maximal_exponent<T: Real>(
    rule: &Rule,
    measure: &MeasureSpec<T>,
    side: Side,
    samples: u64,
    seed: u64,
    opts: &CheckOptions,
) -> Result<(T, Provenance)> {
    for m in (1..=opts.lambda_n.max(1)).rev() {
        match lambda_mu_exact_with(rule, measure, m, side, &opts.run) {
            Ok(v) => {
                return Ok((
                    ratio_to(v),
                    Provenance::new(&format!("lambda_mu_exact[{side}]"), None, format!("exact n={m}")),
                ))
            }
            Err(e) if e.is_budget() => continue,
            Err(e) => return Err(e),
        }
    }
    let n = opts.lambda_n.max(1);
    let est = lambda_mu_sampled_with(rule, measure, n, samples, seed, side, &opts.run)?;
    Ok((
        est.value,
        Provenance::new(
            &format!("lambda_mu_sampled[{side}]"),
            Some(seed),
            format!("sampled lower bound n={n} samples={samples}"),
        ),
    ))
}

fn metric_entropy<T: Real>(
    rule: &Rule,
    measure: &MeasureSpec<T>,
    n: usize,
    p: usize,
    samples: u64,
    seed: u64,
    opts: &CheckOptions,
) -> Result<(T, Provenance, Vec<String>)> {
    let h = empirical_automaton_entropy_with(rule, measure, p, n, samples, seed, &opts.run)?;
    Ok((
        h.value,
        Provenance::new("empirical_automaton_entropy", Some(seed), format!("plug-in H(n,p)/n, p={p}")),
        h.warnings,
    ))
}

/// `h_μ(F)` against `h_μ(σ)(I⁺_μ + I⁻_μ)`.
pub fn check_average_inequality<T: Real>(
    rule: &Rule,
    measure: &MeasureSpec<T>,
    n: usize,
    p: usize,
    samples: u64,
    seed: u64,
) -> Result<InequalityReport<T>> {
    check_average_inequality_with(rule, measure, n, p, samples, seed, &CheckOptions::default())
}

pub fn check_average_inequality_with<T: Real>(
    rule: &Rule,
    measure: &MeasureSpec<T>,
    n: usize,
    p: usize,
    samples: u64,
    seed: u64,
    opts: &CheckOptions,
) -> Result<InequalityReport<T>> {
    let (lhs, lhs_prov, warnings) = metric_entropy(rule, measure, n, p, samples, seed, opts)?;
    let hs = analytic_shift_entropy(measure);
    let m = opts.exponent_samples.unwrap_or(samples);
    let plus = i_mu_estimate_with(rule, measure, n, m, seed, Side::Plus, &opts.run)?;
    let minus = i_mu_estimate_with(rule, measure, n, m, seed, Side::Minus, &opts.run)?;
    let tolerance = opts.tolerance.unwrap_or(METRIC_TOLERANCE);
    let params = json!({
        "n": n, "p": p, "samples": samples, "exponent_samples": m, "seed": seed,
        "shift_entropy": hs.to_f64(),
        "I_plus": plus.value.to_f64(), "I_plus_stderr": plus.stderr.to_f64(),
        "I_minus": minus.value.to_f64(), "I_minus_stderr": minus.stderr.to_f64(),
    });
    let mut report = InequalityReport::new(
        InequalityId::EntropyAverage,
        params,
        (lhs, "empirical_automaton_entropy".into()),
        (hs * (plus.value + minus.value), "analytic_shift_entropy*(I_plus+I_minus)".into()),
        real(tolerance),
    );
    report.provenance = vec![
        lhs_prov,
        Provenance::new("analytic_shift_entropy", None, "closed form"),
        Provenance::new("i_mu_estimate[plus]", Some(seed), format!("monte carlo samples={m}")),
        Provenance::new("i_mu_estimate[minus]", Some(seed), format!("monte carlo samples={m}")),
    ];
    report.warnings = warnings;
    Ok(report)
}

/// `h_μ(F)` against `h_μ(σ)(λ⁺_μ + λ⁻_μ)`.
pub fn check_max_inequality<T: Real>(
    rule: &Rule,
    measure: &MeasureSpec<T>,
    n: usize,
    p: usize,
    samples: u64,
    seed: u64,
) -> Result<InequalityReport<T>> {
    check_max_inequality_with(rule, measure, n, p, samples, seed, &CheckOptions::default())
}

pub fn check_max_inequality_with<T: Real>(
    rule: &Rule,
    measure: &MeasureSpec<T>,
    n: usize,
    p: usize,
    samples: u64,
    seed: u64,
    opts: &CheckOptions,
) -> Result<InequalityReport<T>> {
    let (lhs, lhs_prov, warnings) = metric_entropy(rule, measure, n, p, samples, seed, opts)?;
    let hs = analytic_shift_entropy(measure);
    let m = opts.exponent_samples.unwrap_or(samples);
    let (plus, plus_prov) = maximal_exponent(rule, measure, Side::Plus, m, seed, opts)?;
    let (minus, minus_prov) = maximal_exponent(rule, measure, Side::Minus, m, seed, opts)?;
    let tolerance = opts.tolerance.unwrap_or(METRIC_TOLERANCE);
    let params = json!({
        "n": n, "p": p, "samples": samples, "exponent_samples": m, "seed": seed,
        "lambda_n": opts.lambda_n, "shift_entropy": hs.to_f64(),
        "lambda_plus": plus.to_f64(), "lambda_minus": minus.to_f64(),
    });
    let mut report = InequalityReport::new(
        InequalityId::EntropyMaximal,
        params,
        (lhs, "empirical_automaton_entropy".into()),
        (hs * (plus + minus), "analytic_shift_entropy*(lambda_plus+lambda_minus)".into()),
        real(tolerance),
    );
    report.provenance = vec![
        lhs_prov,
        Provenance::new("analytic_shift_entropy", None, "closed form"),
        plus_prov,
        minus_prov,
    ];
    report.warnings = warnings;
    Ok(report)
}

/// Pattern-count rate against `(λ⁺ + λ⁻) log|A|` for the uniform measure.
///
/// The count is taken at the largest horizon `<= n` whose exact count fits
/// the pattern budget; the rates at smaller horizons are attached as the
/// trend. The maximal exponents use horizon `opts.lambda_n`.
pub fn check_topological_inequality<T: Real>(rule: &Rule, n: usize, p: usize) -> Result<InequalityReport<T>> {
    check_topological_inequality_with(rule, n, p, &CheckOptions::default())
}

pub fn check_topological_inequality_with<T: Real>(
    rule: &Rule,
    n: usize,
    p: usize,
    opts: &CheckOptions,
) -> Result<InequalityReport<T>> {
    if n == 0 {
        return Err(Error::Invalid("n must be positive".into()));
    }
    let budgets = &opts.run.budgets;
    let mut warnings = Vec::new();
    let top = match largest_feasible_pattern_n(rule, p, n, budgets) {
        Some(m) => {
            if m < n {
                warnings.push(format!("pattern budget allows exact counts up to n={m}; requested n={n}"));
            }
            m
        }
        None => {
            warnings.push("no exact pattern count fits the budget; using a sampled lower bound".into());
            n
        }
    };
    let mut trend = Vec::with_capacity(top);
    let mut last = None;
    for m in 1..=top {
        let est = count_spacetime_patterns_with::<T>(rule, p, m, budgets)?;
        trend.push(TrendPoint { n: m, value: est.value });
        last = Some(est);
    }
    let lhs_est = last.expect("top >= 1");
    warnings.extend(lhs_est.warnings.iter().cloned());
    // Largest horizon at which both sides are exact; else the trivial `r`.
    let mut bound = topological_upper_bound_with::<T>(rule, opts.lambda_n.max(1), &opts.run)?;
    for m in (1..opts.lambda_n).rev() {
        if bound.plus_exact && bound.minus_exact {
            break;
        }
        let lower = topological_upper_bound_with::<T>(rule, m, &opts.run)?;
        if lower.plus_exact && lower.minus_exact {
            bound = lower;
        }
    }
    let tolerance = opts.tolerance.unwrap_or(TOPOLOGICAL_TOLERANCE);
    let params = json!({
        "n": top, "requested_n": n, "p": p, "lambda_n": bound.n,
        "pattern_count": lhs_est.pattern_count.map(|c| c.to_string()),
        "pattern_count_exact": lhs_est.exact,
        "lambda_plus": bound.lambda_plus.to_f64(), "lambda_minus": bound.lambda_minus.to_f64(),
        "lambda_plus_exact": bound.plus_exact, "lambda_minus_exact": bound.minus_exact,
    });
    let side_method = |exact: bool| if exact { "exact" } else { "trivial r" };
    let mut report = InequalityReport::new(
        InequalityId::EntropyTopological,
        params,
        (lhs_est.value, "count_spacetime_patterns".into()),
        (bound.value, "topological_upper_bound".into()),
        real(tolerance),
    );
    report.provenance = vec![
        Provenance::new(
            "count_spacetime_patterns",
            None,
            if lhs_est.exact { "exact count" } else { "sampled lower bound" },
        ),
        Provenance::new("lambda_mu_exact[plus]", None, side_method(bound.plus_exact)),
        Provenance::new("lambda_mu_exact[minus]", None, side_method(bound.minus_exact)),
    ];
    report.trend = trend;
    report.warnings = warnings;
    Ok(report)
}

/// `I⁺_μ + I⁻_μ` against `λ⁺_μ + λ⁻_μ` at horizon `n`.
pub fn check_average_below_maximal<T: Real>(
    rule: &Rule,
    measure: &MeasureSpec<T>,
    n: usize,
    samples: u64,
    seed: u64,
) -> Result<InequalityReport<T>> {
    check_average_below_maximal_with(rule, measure, n, samples, seed, &CheckOptions::default())
}

pub fn check_average_below_maximal_with<T: Real>(
    rule: &Rule,
    measure: &MeasureSpec<T>,
    n: usize,
    samples: u64,
    seed: u64,
    opts: &CheckOptions,
) -> Result<InequalityReport<T>> {
    let m = opts.exponent_samples.unwrap_or(samples);
    let plus = i_mu_estimate_with(rule, measure, n, m, seed, Side::Plus, &opts.run)?;
    let minus = i_mu_estimate_with(rule, measure, n, m, seed, Side::Minus, &opts.run)?;
    let (lp, plus_prov) = maximal_exponent(rule, measure, Side::Plus, m, seed, opts)?;
    let (lm, minus_prov) = maximal_exponent(rule, measure, Side::Minus, m, seed, opts)?;
    let tolerance = opts.tolerance.unwrap_or(METRIC_TOLERANCE);
    let params = json!({
        "n": n, "samples": m, "seed": seed, "lambda_n": opts.lambda_n,
        "I_plus": plus.value.to_f64(), "I_minus": minus.value.to_f64(),
        "lambda_plus": lp.to_f64(), "lambda_minus": lm.to_f64(),
    });
    let mut report = InequalityReport::new(
        InequalityId::AverageBelowMaximal,
        params,
        (plus.value + minus.value, "i_mu_estimate(plus+minus)".into()),
        (lp + lm, "lambda_plus+lambda_minus".into()),
        real(tolerance),
    );
    report.provenance = vec![
        Provenance::new("i_mu_estimate[plus]", Some(seed), format!("monte carlo samples={m}")),
        Provenance::new("i_mu_estimate[minus]", Some(seed), format!("monte carlo samples={m}")),
        plus_prov,
        minus_prov,
    ];
    Ok(report)
}

/// Parameters for [`check`]; unused fields are ignored by each check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckParams {
    pub n: usize,
    pub p: usize,
    pub samples: u64,
    pub seed: u64,
}

/// Dispatches on the inequality id.
pub fn check<T: Real>(
    id: InequalityId,
    rule: &Rule,
    measure: &MeasureSpec<T>,
    params: &CheckParams,
    opts: &CheckOptions,
) -> Result<InequalityReport<T>> {
    let CheckParams { n, p, samples, seed } = *params;
    match id {
        InequalityId::EntropyAverage => check_average_inequality_with(rule, measure, n, p, samples, seed, opts),
        InequalityId::EntropyMaximal => check_max_inequality_with(rule, measure, n, p, samples, seed, opts),
        InequalityId::EntropyTopological => check_topological_inequality_with(rule, n, p, opts),
        InequalityId::AverageBelowMaximal => check_average_below_maximal_with(rule, measure, n, samples, seed, opts),
    }
}
