//! Propagation depths of perturbations: the pointwise maps `Λ̃ₙ±`, `Λₙ±`,
//! `Iₙ±`, and the measure-level exponents built from them.
//!
//! Everything is computed on the minus side; the plus side mirrors the rule
//! and the configuration.

mod column;
mod engine;
mod estimate;

use std::fmt;
use std::str::FromStr;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::Budgets;
use crate::ca::{shift_config, Config, Rule, Symbol};
use crate::error::{Error, Result};
use crate::set_dynamics::{full_set, set_apply, SetConfig, MAX_SET_ALPHABET};
use crate::Real;

pub(crate) use engine::Engine;
use engine::{leftmost_difference, rows};
pub use estimate::{
    exponent_sequence, exponent_sequence_with, i_mu_estimate, i_mu_estimate_with, lambda_mu_exact,
    lambda_mu_exact_with, lambda_mu_sampled, lambda_mu_sampled_with, Estimator, ExponentSequence,
    SequenceRow, SequenceSpec, SAMPLED_EXTRA_SHIFTS,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Plus => "plus",
            Side::Minus => "minus",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" | "+" => Ok(Side::Plus),
            "minus" | "-" => Ok(Side::Minus),
            _ => Err(Error::Invalid(format!("side must be plus or minus, got {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    Enumeration,
    Sampling,
    SetValued,
    TrivialRn,
}

/// Lower and upper bounds on `Λ̃ₙ(x)`, plus the exact value when the
/// exact engines fit the budget.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExponentBracket {
    pub n: usize,
    pub side: Side,
    pub lower: u64,
    pub exact: Option<u64>,
    pub upper: u64,
    pub lower_method: BoundMethod,
    pub upper_method: BoundMethod,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EstimateKind {
    #[serde(rename = "lambda_plus")]
    LambdaPlus,
    #[serde(rename = "lambda_minus")]
    LambdaMinus,
    #[serde(rename = "I_plus")]
    IPlus,
    #[serde(rename = "I_minus")]
    IMinus,
}

impl EstimateKind {
    pub fn lambda(side: Side) -> Self {
        match side {
            Side::Plus => EstimateKind::LambdaPlus,
            Side::Minus => EstimateKind::LambdaMinus,
        }
    }

    pub fn average(side: Side) -> Self {
        match side {
            Side::Plus => EstimateKind::IPlus,
            Side::Minus => EstimateKind::IMinus,
        }
    }
}

/// A per-step rate (`quantity / n`) estimated from samples.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentEstimate<T: Real> {
    pub n: usize,
    pub value: T,
    pub stderr: T,
    pub samples: u64,
    pub seed: u64,
    pub kind: EstimateKind,
    /// The value is a maximum over samples, so it bounds the target from
    /// below.
    pub lower_bound: bool,
}

/// Exact `Λ̃ₙ` and `Iₙ` for one rule, horizon and side, reusable across
/// configurations.
pub struct ExactExponents {
    side: Side,
    n: usize,
    rn: i64,
    engine: Engine,
}

impl ExactExponents {
    pub fn new(rule: &Rule, n: usize, side: Side, budgets: &Budgets) -> Result<Self> {
        let oriented = match side {
            Side::Plus => rule.mirror(),
            Side::Minus => rule.clone(),
        };
        Ok(ExactExponents {
            side,
            n,
            rn: (rule.radius() * n) as i64,
            engine: Engine::build(&oriented, n, budgets)?,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub(crate) fn cost(&self) -> u128 {
        self.engine.cost()
    }

    fn orient(&self, x: &Config) -> Result<Config> {
        x.require_valid(-2 * self.rn, 2 * self.rn)?;
        Ok(match self.side {
            Side::Plus => x.mirror(),
            Side::Minus => x.clone(),
        })
    }

    pub fn lambda_tilde(&self, x: &Config) -> Result<u64> {
        let x = self.orient(x)?;
        Ok(self.engine.scan(&x, 0, false)?.map_or(0, |j| (1 - j) as u64))
    }

    /// `Iₙ(x)` by galloping then bisection on the monotone predicate.
    pub fn i_value(&self, x: &Config) -> Result<u64> {
        let x = self.orient(x)?;
        Ok(self.engine.min_clear(&x, 0, self.rn)? as u64)
    }

    /// `Iₙ(x)` by a linear scan; kept to cross-check [`Self::i_value`].
    pub fn i_value_linear(&self, x: &Config) -> Result<u64> {
        let x = self.orient(x)?;
        for s in 0..self.rn {
            if self.engine.scan(&x, s, true)?.is_none() {
                return Ok(s as u64);
            }
        }
        Ok(self.rn as u64)
    }
}

pub fn lambda_tilde_exact(rule: &Rule, x: &Config, n: usize, side: Side) -> Result<u64> {
    lambda_tilde_exact_with(rule, x, n, side, &Budgets::default())
}

pub fn lambda_tilde_exact_with(rule: &Rule, x: &Config, n: usize, side: Side, budgets: &Budgets) -> Result<u64> {
    x.check_alphabet(rule.alphabet())?;
    ExactExponents::new(rule, n, side, budgets)?.lambda_tilde(x)
}

pub fn i_exact(rule: &Rule, x: &Config, n: usize, side: Side) -> Result<u64> {
    i_exact_with(rule, x, n, side, &Budgets::default())
}

pub fn i_exact_with(rule: &Rule, x: &Config, n: usize, side: Side, budgets: &Budgets) -> Result<u64> {
    x.check_alphabet(rule.alphabet())?;
    ExactExponents::new(rule, n, side, budgets)?.i_value(x)
}

pub fn i_exact_linear(rule: &Rule, x: &Config, n: usize, side: Side, budgets: &Budgets) -> Result<u64> {
    x.check_alphabet(rule.alphabet())?;
    ExactExponents::new(rule, n, side, budgets)?.i_value_linear(x)
}

/// Bracket from sampled perturbations (lower) and set-valued evolution
/// (upper); the exact value is filled in when the budget allows.
pub fn lambda_tilde_bounds(
    rule: &Rule,
    x: &Config,
    n: usize,
    side: Side,
    sample_budget: usize,
    seed: u64,
) -> Result<ExponentBracket> {
    lambda_tilde_bounds_with(rule, x, n, side, sample_budget, seed, &Budgets::default())
}

pub fn lambda_tilde_bounds_with(
    rule: &Rule,
    x: &Config,
    n: usize,
    side: Side,
    sample_budget: usize,
    seed: u64,
    budgets: &Budgets,
) -> Result<ExponentBracket> {
    x.check_alphabet(rule.alphabet())?;
    let r = rule.radius();
    let rn = (r * n) as i64;
    x.require_valid(-2 * rn, 2 * rn)?;
    let mut bracket = ExponentBracket {
        n,
        side,
        lower: 0,
        exact: None,
        upper: 0,
        lower_method: BoundMethod::Sampling,
        upper_method: BoundMethod::SetValued,
    };
    if rn == 0 {
        bracket.exact = Some(0);
        return Ok(bracket);
    }
    let (rule_m, x_m) = match side {
        Side::Plus => (rule.mirror(), x.mirror()),
        Side::Minus => (rule.clone(), x.clone()),
    };
    let q = rule.size();
    let (lo, hi) = (-2 * rn, 2 * rn);
    let base: Vec<Symbol> = x_m.slice(lo, hi).to_vec();
    let base_rows = rows(&rule_m, &base, n);
    let depth = |y: &[Symbol]| {
        leftmost_difference(&base_rows, &rows(&rule_m, y, n), lo, r).map_or(0, |j| (1 - j) as u64)
    };
    let at = |c: i64| (c - lo) as usize;

    // Deterministic trials first: flip everything, then single cells.
    let mut y = base.clone();
    for c in 1..=rn {
        y[at(c)] = ((y[at(c)] as usize + 1) % q) as Symbol;
    }
    let mut lower = depth(&y);
    for c in 1..=rn {
        let mut y = base.clone();
        y[at(c)] = ((y[at(c)] as usize + 1) % q) as Symbol;
        lower = lower.max(depth(&y));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..sample_budget {
        let mut y = base.clone();
        for c in 1..=rn {
            y[at(c)] = (rng.next_u64() % q as u64) as Symbol;
        }
        lower = lower.max(depth(&y));
    }
    bracket.lower = lower;

    bracket.upper = if q <= MAX_SET_ALPHABET {
        let sets = (lo..=hi)
            .map(|c| if c >= 1 { full_set(q) } else { 1u64 << base[at(c)] })
            .collect();
        let mut state = SetConfig::new(sets, lo, q)?;
        let mut leftmost: Option<i64> = None;
        for i in 1..=n as i64 {
            state = set_apply(&rule_m, &state);
            // Cells within `r*i` of the left edge see the padding.
            for c in lo + r as i64 * i..=0 {
                if !state.is_singleton(c) {
                    leftmost = Some(leftmost.map_or(c, |v| v.min(c)));
                    break;
                }
            }
        }
        leftmost.map_or(0, |j| ((1 - j) as u64).min(rn as u64))
    } else {
        bracket.upper_method = BoundMethod::TrivialRn;
        rn as u64
    };

    bracket.exact = match ExactExponents::new(rule, n, side, budgets).and_then(|e| e.lambda_tilde(x)) {
        Ok(v) => Some(v),
        Err(e) if e.is_budget() => None,
        Err(e) => return Err(e),
    };
    Ok(bracket)
}

/// How [`capital_lambda`] evaluates each shift.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointMethod {
    Exact,
    /// Sampled lower bounds with this many random perturbations per shift.
    Sampled { samples: usize, seed: u64 },
}

/// `max_i Λ̃ₙ(σ^i x)` over the shifts the window admits; a lower bound for
/// the supremum over all of ℤ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CapitalLambda {
    pub n: usize,
    pub side: Side,
    pub value: u64,
    pub shifts: usize,
    pub first_shift: i64,
    pub last_shift: i64,
    pub lower_bound: bool,
}

pub fn capital_lambda(rule: &Rule, x: &Config, n: usize, side: Side, method: PointMethod) -> Result<CapitalLambda> {
    capital_lambda_with(rule, x, n, side, method, &Budgets::default())
}

pub fn capital_lambda_with(
    rule: &Rule,
    x: &Config,
    n: usize,
    side: Side,
    method: PointMethod,
    budgets: &Budgets,
) -> Result<CapitalLambda> {
    x.check_alphabet(rule.alphabet())?;
    let rn = (rule.radius() * n) as i64;
    let (first, last) = shift_range(x, rn)?;
    let value = match method {
        PointMethod::Exact => {
            let exact = ExactExponents::new(rule, n, side, budgets)?;
            max_over_shifts(&exact, x, first, last)?
        }
        PointMethod::Sampled { samples, seed } => (first..=last)
            .into_par_iter()
            .map(|i| {
                lambda_tilde_bounds_with(rule, &shift_config(x, i), n, side, samples, seed, &Budgets::uniform(0))
                    .map(|b| b.lower)
            })
            .collect::<Result<Vec<u64>>>()?
            .into_iter()
            .max()
            .unwrap_or(0),
    };
    Ok(CapitalLambda {
        n,
        side,
        value,
        shifts: (last - first + 1) as usize,
        first_shift: first,
        last_shift: last,
        lower_bound: true,
    })
}

fn shift_range(x: &Config, rn: i64) -> Result<(i64, i64)> {
    let (first, last) = (x.valid_lo() + 2 * rn, x.valid_hi() - 2 * rn);
    if first > last {
        return Err(Error::Width {
            need_lo: -2 * rn,
            need_hi: 2 * rn,
            have_lo: x.valid_lo(),
            have_hi: x.valid_hi(),
        });
    }
    Ok((first, last))
}

pub(crate) fn max_over_shifts(exact: &ExactExponents, x: &Config, first: i64, last: i64) -> Result<u64> {
    let mut best = 0;
    for i in first..=last {
        best = best.max(exact.lambda_tilde(&shift_config(x, i))?);
    }
    Ok(best)
}
