//! Randomized property suites. Every trial derives its instance from one
//! 64-bit seed, which is what a failure records.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::budget::{pow_sat, RunOptions};
use crate::ca::{apply, sample_config, shift_config, step_cells, Config, MeasureSpec, Rule, Symbol};
use crate::error::{Error, Result};
use crate::exponents::{capital_lambda_with, lambda_tilde_bounds_with, ExactExponents, PointMethod, Side};
use crate::parallel::in_pool;
use crate::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub seed: u64,
    pub input: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyReport {
    pub property_id: String,
    pub trials: u64,
    pub failures: Vec<Failure>,
    pub status: Status,
    /// Trials skipped for budget reasons, sampled completions and the like.
    pub flags: Vec<String>,
    pub params: Value,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuiteOptions {
    /// Instances keep `|A|^(rn)` at or below this.
    pub max_perturbations: u128,
    /// Boundary completions enumerated exhaustively up to this count.
    pub max_completions: u128,
    /// Random completions tried when exhaustive enumeration is too large.
    pub sampled_completions: usize,
    pub run: RunOptions,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            max_perturbations: 1 << 16,
            max_completions: 1 << 16,
            sampled_completions: 4096,
            run: RunOptions::default(),
        }
    }
}

/// Seed of trial `k`: a splitmix64 step away from the suite seed.
fn trial_seed(seed: u64, k: u64) -> u64 {
    let mut z = seed.wrapping_add(k.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn summary(x: &Config) -> String {
    let (lo, hi) = (x.valid_lo(), x.valid_hi());
    let cells = x.slice(lo, hi);
    let body: String = if cells.iter().all(|&s| s < 10) {
        cells.iter().map(|&s| char::from(b'0' + s)).collect()
    } else {
        cells.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")
    };
    format!("x[{lo}..{hi}]={body}")
}

/// Largest `n <= cap` with `|A|^(rn) <= limit` (at least 1).
fn horizon_cap(rule: &Rule, cap: usize, limit: u128) -> usize {
    let (q, r) = (rule.size(), rule.radius());
    (1..=cap).take_while(|&n| pow_sat(q, r * n) <= limit).last().unwrap_or(1)
}

fn pick_side(rng: &mut ChaCha8Rng) -> Side {
    if rng.next_u64() & 1 == 0 {
        Side::Plus
    } else {
        Side::Minus
    }
}

fn pick(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> usize {
    lo + (rng.next_u64() % (hi - lo + 1) as u64) as usize
}

type TrialOutcome = Result<Option<String>>;

struct Ctx<'a, T: Real> {
    rule: &'a Rule,
    measure: &'a MeasureSpec<T>,
    opts: &'a SuiteOptions,
    n_max: usize,
}

impl<T: Real> Ctx<'_, T> {
    fn rn(&self, n: usize) -> i64 {
        (self.rule.radius() * n) as i64
    }

    fn exact(&self, n: usize, side: Side) -> Result<ExactExponents> {
        ExactExponents::new(self.rule, n, side, &self.opts.run.budgets)
    }

    fn bounds(&self, t: u64) -> TrialOutcome {
        let mut rng = ChaCha8Rng::seed_from_u64(t);
        let n = pick(&mut rng, 1, self.n_max);
        let rn = self.rn(n);
        let x = sample_config(self.measure, -2 * rn, 2 * rn, t)?;
        for side in [Side::Plus, Side::Minus] {
            let e = self.exact(n, side)?;
            let (l, i) = (e.lambda_tilde(&x)?, e.i_value(&x)?);
            if l as i64 > rn || i as i64 > rn {
                return Ok(Some(format!("n={n} side={side} lambda={l} I={i} rn={rn} {}", summary(&x))));
            }
        }
        Ok(None)
    }

    fn lambda_dominates_i(&self, t: u64) -> TrialOutcome {
        let mut rng = ChaCha8Rng::seed_from_u64(t);
        let n = pick(&mut rng, 1, self.n_max);
        let side = pick_side(&mut rng);
        let rn = self.rn(n);
        let x = sample_config(self.measure, -3 * rn, 3 * rn, t)?;
        let i = self.exact(n, side)?.i_value(&x)?;
        let cap = capital_lambda_with(self.rule, &x, n, side, PointMethod::Exact, &self.opts.run.budgets)?;
        Ok((cap.value + 1 < i).then(|| format!("n={n} side={side} Lambda={} I={i} {}", cap.value, summary(&x))))
    }

    fn subadditivity(&self, t: u64) -> TrialOutcome {
        let mut rng = ChaCha8Rng::seed_from_u64(t);
        let total = self.n_max.max(2);
        let n = pick(&mut rng, 1, total - 1);
        let m = pick(&mut rng, 1, total - n);
        let side = pick_side(&mut rng);
        let w = 3 * self.rn(n + m);
        let x = sample_config(self.measure, -w, w, t)?;
        let whole = self.exact(n + m, side)?.lambda_tilde(&x)?;
        let a = self.exact(n, side)?.lambda_tilde(&x)?;
        let mut y = x.clone();
        for _ in 0..n {
            y = apply(self.rule, &y)?;
        }
        let k = match side {
            Side::Plus => a as i64,
            Side::Minus => -(a as i64),
        };
        let b = self.exact(m, side)?.lambda_tilde(&shift_config(&y, k))?;
        Ok((whole > a + b).then(|| {
            format!("n={n} m={m} side={side} whole={whole} first={a} rest={b} {}", summary(&x))
        }))
    }

    fn bracket(&self, t: u64) -> TrialOutcome {
        let mut rng = ChaCha8Rng::seed_from_u64(t);
        let n = pick(&mut rng, 1, self.n_max);
        let side = pick_side(&mut rng);
        let rn = self.rn(n);
        let x = sample_config(self.measure, -2 * rn, 2 * rn, t)?;
        let b = lambda_tilde_bounds_with(self.rule, &x, n, side, 16, t, &self.opts.run.budgets)?;
        let ok = match b.exact {
            Some(e) => b.lower <= e && e <= b.upper,
            None => return Err(Error::budget("exact bracket value", 0, 0, "skipped")),
        };
        Ok((!ok).then(|| {
            format!(
                "n={n} side={side} lower={} exact={:?} upper={} {}",
                b.lower,
                b.exact,
                b.upper,
                summary(&x)
            )
        }))
    }

    fn search_agreement(&self, t: u64) -> TrialOutcome {
        let mut rng = ChaCha8Rng::seed_from_u64(t);
        let n = pick(&mut rng, 1, self.n_max);
        let side = pick_side(&mut rng);
        let rn = self.rn(n);
        let x = sample_config(self.measure, -2 * rn, 2 * rn, t)?;
        let e = self.exact(n, side)?;
        let (fast, slow) = (e.i_value(&x)?, e.i_value_linear(&x)?);
        Ok((fast != slow).then(|| format!("n={n} side={side} search={fast} linear={slow} {}", summary(&x))))
    }

    /// On a spatially periodic point the window sees every shift, so the
    /// maximum over shifts must not change when the point is shifted.
    fn shift_invariance(&self, t: u64) -> TrialOutcome {
        let mut rng = ChaCha8Rng::seed_from_u64(t);
        let n = pick(&mut rng, 1, self.n_max);
        let side = pick_side(&mut rng);
        let period = pick(&mut rng, 1, 4);
        let q = self.rule.size() as u64;
        let word: Vec<Symbol> = (0..period).map(|_| (rng.next_u64() % q) as Symbol).collect();
        let k = pick(&mut rng, 1, period) as i64;
        let w = 2 * self.rn(n) + period as i64;
        let periodic = |offset: i64| {
            Config::from_fn(-w, w, |c| word[(c + offset).rem_euclid(period as i64) as usize])
        };
        let (x, y) = (periodic(0), periodic(k));
        let budgets = &self.opts.run.budgets;
        let a = capital_lambda_with(self.rule, &x, n, side, PointMethod::Exact, budgets)?.value;
        let b = capital_lambda_with(self.rule, &y, n, side, PointMethod::Exact, budgets)?.value;
        Ok((a != b).then(|| format!("n={n} side={side} shift={k} Lambda(x)={a} Lambda(shifted)={b} {}", summary(&x))))
    }

    fn trial(&self, id: &str, t: u64) -> TrialOutcome {
        match id {
            "bounds" => self.bounds(t),
            "lambda_dominates_i" => self.lambda_dominates_i(t),
            "subadditivity" => self.subadditivity(t),
            "bracket_consistency" => self.bracket(t),
            "i_search_agreement" => self.search_agreement(t),
            "shift_invariance" => self.shift_invariance(t),
            _ => self.containment(t),
        }
    }

    fn containment(&self, t: u64) -> TrialOutcome {
        let mut rng = ChaCha8Rng::seed_from_u64(t);
        let r = self.rule.radius();
        let q = self.rule.size();
        // Exhaustive completions need |A|^(2rn) within the completion limit.
        let n_cap = (1..=self.n_max)
            .take_while(|&n| pow_sat(q, 2 * r * n) <= self.opts.max_completions)
            .last()
            .unwrap_or(1);
        let n = pick(&mut rng, 1, n_cap);
        let p = pick(&mut rng, r.max(1), r.max(1) + 1);
        let (outcome, _) = containment_trial(self.rule, self.measure, p, n, t, self.opts)?;
        Ok(outcome)
    }
}

/// Checks the two-sided containment for one sampled point at every time
/// `i <= n`. Returns the failure summary, if any, and whether the boundary
/// completions had to be sampled.
fn containment_trial<T: Real>(
    rule: &Rule,
    measure: &MeasureSpec<T>,
    p: usize,
    n: usize,
    t: u64,
    opts: &SuiteOptions,
) -> Result<(Option<String>, bool)> {
    let r = rule.radius();
    let q = rule.size();
    let rn = (r * n) as i64;
    let pi = p as i64;
    let x = sample_config(measure, -pi - 3 * rn, pi + 3 * rn, t)?;
    let budgets = &opts.run.budgets;
    let s_plus = ExactExponents::new(rule, n, Side::Plus, budgets)?.i_value(&shift_config(&x, -pi))? as i64;
    let s_minus = ExactExponents::new(rule, n, Side::Minus, budgets)?.i_value(&shift_config(&x, pi))? as i64;

    // Cells of the light cone of [-p, p] outside [-p-s⁺, p+s⁻].
    let (lo, hi) = (-pi - rn, pi + rn);
    let free: Vec<usize> = (lo..-pi - s_plus)
        .chain(pi + s_minus + 1..=hi)
        .map(|c| (c - lo) as usize)
        .collect();
    let base: Vec<Symbol> = x.slice(lo, hi).to_vec();
    let width = 2 * p + 1;
    let central = |cells: &[Symbol]| -> Vec<Vec<Symbol>> {
        let mut out = Vec::with_capacity(n);
        let mut row = cells.to_vec();
        for i in 1..=n {
            row = step_cells(rule, &row, false, false);
            let off = r * (n - i);
            out.push(row[off..off + width].to_vec());
        }
        out
    };
    let reference = central(&base);
    let total = pow_sat(q, free.len());
    let sampled = total > opts.max_completions;
    let mut rng = ChaCha8Rng::seed_from_u64(t ^ 0x636f_6d70);
    let count = if sampled { opts.sampled_completions as u128 } else { total };
    let mut y = base.clone();
    for m in 0..count as u64 {
        let mut v = m;
        for &k in &free {
            y[k] = if sampled {
                (rng.next_u64() % q as u64) as Symbol
            } else {
                let s = (v % q as u64) as Symbol;
                v /= q as u64;
                s
            };
        }
        let rows = central(&y);
        if let Some(i) = rows.iter().zip(&reference).position(|(a, b)| a != b) {
            let failure = format!(
                "n={n} p={p} time={} s_plus={s_plus} s_minus={s_minus} completion={m} {}",
                i + 1,
                summary(&x)
            );
            return Ok((Some(failure), sampled));
        }
    }
    Ok((None, sampled))
}

fn run_trials(
    property_id: &str,
    trials: u64,
    seed: u64,
    params: Value,
    workers: Option<usize>,
    trial: impl Fn(u64) -> Result<(Option<String>, bool)> + Sync,
) -> Result<PropertyReport> {
    let outcomes: Vec<(u64, Result<(Option<String>, bool)>)> = in_pool(workers, || {
        (0..trials)
            .into_par_iter()
            .map(|k| {
                let t = trial_seed(seed, k);
                (t, trial(t))
            })
            .collect()
    })?;
    let mut failures = Vec::new();
    let (mut skipped, mut sampled) = (0u64, 0u64);
    for (t, outcome) in outcomes {
        match outcome {
            Ok((Some(input), s)) => {
                sampled += s as u64;
                failures.push(Failure { seed: t, input });
            }
            Ok((None, s)) => sampled += s as u64,
            Err(e) if e.is_budget() => skipped += 1,
            Err(e) => failures.push(Failure {
                seed: t,
                input: format!("error: {e}"),
            }),
        }
    }
    let mut flags = Vec::new();
    if skipped > 0 {
        flags.push(format!("{skipped} trials skipped: budget exceeded"));
    }
    if sampled > 0 {
        flags.push(format!("{sampled} trials used sampled boundary completions"));
    }
    Ok(PropertyReport {
        property_id: property_id.into(),
        trials: trials - skipped,
        status: if failures.is_empty() { Status::Pass } else { Status::Fail },
        failures,
        flags,
        params,
    })
}

/// Every `y` agreeing with `x` on `[-p-s⁺, p+s⁻]`, with
/// `s⁺ = I⁺ₙ(σ^(-p)x)` and `s⁻ = I⁻ₙ(σ^p x)`, keeps `Fⁱ(y) = Fⁱ(x)` on
/// `[-p, p]` for `i <= n`. Checked by simulating boundary completions.
pub fn check_independence_containment<T: Real>(
    rule: &Rule,
    measure: &MeasureSpec<T>,
    p: usize,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<PropertyReport> {
    check_independence_containment_with(rule, measure, p, n, trials, seed, &SuiteOptions::default())
}

pub fn check_independence_containment_with<T: Real>(
    rule: &Rule,
    measure: &MeasureSpec<T>,
    p: usize,
    n: usize,
    trials: u64,
    seed: u64,
    opts: &SuiteOptions,
) -> Result<PropertyReport> {
    if p < rule.radius() {
        return Err(Error::Invalid(format!("p = {p} must be at least the radius {}", rule.radius())));
    }
    if trials == 0 || n == 0 {
        return Err(Error::Invalid("trials and n must be positive".into()));
    }
    let params = json!({ "p": p, "n": n, "trials": trials, "seed": seed });
    run_trials("independence_containment", trials, seed, params, opts.run.workers, |t| {
        containment_trial(rule, measure, p, n, t, opts)
    })
}

/// Property ids run by [`run_property_suite`], in report order.
pub const SUITE: [&str; 7] = [
    "bounds",
    "lambda_dominates_i",
    "subadditivity",
    "bracket_consistency",
    "i_search_agreement",
    "shift_invariance",
    "independence_containment",
];

/// Runs every property of [`SUITE`] with `trials` randomized instances
/// each.
pub fn run_property_suite<T: Real>(
    rule: &Rule,
    measure: &MeasureSpec<T>,
    trials: u64,
    seed: u64,
) -> Result<Vec<PropertyReport>> {
    run_property_suite_with(rule, measure, trials, seed, &SuiteOptions::default())
}

pub fn run_property_suite_with<T: Real>(
    rule: &Rule,
    measure: &MeasureSpec<T>,
    trials: u64,
    seed: u64,
    opts: &SuiteOptions,
) -> Result<Vec<PropertyReport>> {
    if measure.alphabet_size() != rule.size() {
        return Err(Error::Measure(format!(
            "measure has {} symbols, rule has {}",
            measure.alphabet_size(),
            rule.size()
        )));
    }
    let ctx = Ctx {
        rule,
        measure,
        opts,
        n_max: horizon_cap(rule, 4, opts.max_perturbations),
    };
    let mut reports = Vec::with_capacity(SUITE.len());
    for (index, id) in SUITE.iter().enumerate() {
        let property_seed = trial_seed(seed, u64::MAX - index as u64);
        let params = json!({ "trials": trials, "seed": seed, "n_max": ctx.n_max });
        let report = run_trials(id, trials, property_seed, params, opts.run.workers, |t| {
            ctx.trial(id, t).map(|o| (o, false))
        })?;
        reports.push(report);
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ca::builtin;
    use crate::Measure;

    #[test]
    fn identity_containment_is_vacuous() {
        let rep = check_independence_containment(&builtin::identity(), &Measure::uniform(2).unwrap(), 0, 3, 10, 1)
            .unwrap();
        assert_eq!(rep.status, Status::Pass);
    }

    #[test]
    fn shift_and_coven_containment() {
        let m = Measure::uniform(2).unwrap();
        let rep = check_independence_containment(&builtin::shift(), &m, 1, 3, 100, 7).unwrap();
        assert_eq!(rep.status, Status::Pass, "{rep:?}");
        let coven = builtin::coven_rule(&[1, 0]).unwrap();
        let rep = check_independence_containment(&coven, &m, 2, 4, 100, 7).unwrap();
        assert_eq!(rep.status, Status::Pass, "{rep:?}");
        assert!(rep.flags.is_empty());
    }

    #[test]
    fn shift_agreement_radius_is_the_horizon() {
        let rule = builtin::shift();
        let m = Measure::uniform(2).unwrap();
        let x = sample_config(&m, -10, 10, 3).unwrap();
        let s = ExactExponents::new(&rule, 3, Side::Minus, &Default::default())
            .unwrap()
            .i_value(&shift_config(&x, 1))
            .unwrap();
        assert_eq!(s, 3);
    }

    #[test]
    fn suite_passes_on_small_rules() {
        let m = Measure::uniform(2).unwrap();
        for rule in [builtin::shift(), builtin::coven_rule(&[1, 0]).unwrap()] {
            for rep in run_property_suite(&rule, &m, 40, 11).unwrap() {
                assert_eq!(rep.status, Status::Pass, "{rep:?}");
                assert_eq!(rep.trials, 40);
            }
        }
    }

    #[test]
    fn trial_seeds_are_distinct() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|k| trial_seed(5, k)).collect();
        assert_eq!(seeds.len(), 1000);
    }
}
