//! End-to-end runs of the two worked examples with pinned parameters,
//! tabulated against the published values.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::{
    check_average_inequality_with, check_max_inequality_with, check_topological_inequality_with, CheckOptions,
    InequalityReport, Verdict, METRIC_TOLERANCE,
};
use crate::budget::RunOptions;
use crate::ca::{builtin, Rule, Word};
use crate::entropy::{analytic_shift_entropy, empirical_automaton_entropy_with, empirical_shift_entropy_with};
use crate::error::{Error, Result};
use crate::exponents::{i_mu_estimate_with, lambda_mu_exact_with, Side};
use crate::set_dynamics::{certify_blocking_with, decide_surjective_with, CertStatus};
use crate::Measure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExampleId {
    /// Coven's automaton with pattern `10`.
    Coven,
    /// Shift on two letters times the radius-2 `f2` rule.
    Product,
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExampleId::Coven => "coven",
            ExampleId::Product => "product",
        })
    }
}

impl FromStr for ExampleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coven" => Ok(ExampleId::Coven),
            "product" => Ok(ExampleId::Product),
            _ => Err(Error::Invalid(format!("unknown example {s:?} (expected coven or product)"))),
        }
    }
}

/// One compared quantity; passes when `lower <= computed <= upper`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReproduceRow {
    pub quantity: String,
    pub computed: f64,
    pub expected: f64,
    pub lower: f64,
    pub upper: f64,
    pub method: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReproduceReport {
    pub example: ExampleId,
    pub rule: String,
    pub seed: u64,
    pub rows: Vec<ReproduceRow>,
    pub inequalities: Vec<InequalityReport<f64>>,
    pub all_pass: bool,
}

/// Pinned parameters; the defaults are the published comparison settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReproduceOptions {
    pub seed: u64,
    pub exponent_n: usize,
    pub exponent_samples: u64,
    pub entropy_n: usize,
    pub entropy_samples: u64,
    pub run: RunOptions,
}

impl Default for ReproduceOptions {
    fn default() -> Self {
        ReproduceOptions {
            seed: 20_240_601,
            exponent_n: 32,
            exponent_samples: 10_000,
            entropy_n: 10,
            entropy_samples: 100_000,
            run: RunOptions::default(),
        }
    }
}

struct Table {
    rows: Vec<ReproduceRow>,
}

impl Table {
    fn push(&mut self, quantity: impl Into<String>, computed: f64, expected: f64, band: (f64, f64), method: &str) {
        self.rows.push(ReproduceRow {
            quantity: quantity.into(),
            computed,
            expected,
            lower: band.0,
            upper: band.1,
            method: method.into(),
            pass: band.0 <= computed && computed <= band.1,
        });
    }

    fn exact(&mut self, quantity: impl Into<String>, computed: f64, expected: f64, method: &str) {
        self.push(quantity, computed, expected, (expected, expected), method);
    }

    fn relative(&mut self, quantity: impl Into<String>, computed: f64, expected: f64, rel: f64, method: &str) {
        let d = expected.abs() * rel;
        self.push(quantity, computed, expected, (expected - d, expected + d), method);
    }

    fn flag(&mut self, quantity: impl Into<String>, ok: bool, method: &str) {
        self.exact(quantity, ok as u8 as f64, 1.0, method);
    }
}

fn lambda_rows(table: &mut Table, rule: &Rule, m: &Measure, side: Side, ns: &[usize], expected: f64, run: &RunOptions) -> Result<()> {
    for &n in ns {
        let v = lambda_mu_exact_with(rule, m, n, side, run)?;
        let value = *v.numer() as f64 / *v.denom() as f64;
        table.exact(format!("lambda_{side} n={n}"), value, expected, "lambda_mu_exact");
    }
    Ok(())
}

pub fn reproduce_example(example: ExampleId) -> Result<ReproduceReport> {
    reproduce_example_with(example, &ReproduceOptions::default())
}

pub fn reproduce_example_with(example: ExampleId, opts: &ReproduceOptions) -> Result<ReproduceReport> {
    let run = &opts.run;
    let seed = opts.seed;
    let mut table = Table { rows: Vec::new() };
    let check_opts = CheckOptions {
        exponent_samples: Some(opts.exponent_samples),
        run: *run,
        ..CheckOptions::default()
    };
    let ln2 = 2f64.ln();
    let (name, rule, measure, block_len) = match example {
        ExampleId::Coven => ("coven:10", builtin::coven_rule(&[1, 0])?, Measure::uniform(2)?, 8),
        ExampleId::Product => ("product:shift,f2:2", builtin::by_name("product:shift,f2:2")?, Measure::product_uniform(&[2, 3])?, 6),
    };
    let r = rule.radius() as f64;
    let onto = decide_surjective_with(&rule, run.budgets.subset_states)?;
    table.flag("surjective", onto, "de Bruijn subset construction");

    let (n, m) = (opts.exponent_n, opts.exponent_samples);
    let ip = i_mu_estimate_with(&rule, &measure, n, m, seed, Side::Plus, run)?.value;
    let im = i_mu_estimate_with(&rule, &measure, n, m, seed, Side::Minus, run)?.value;
    let hs = analytic_shift_entropy(&measure);
    let hs_emp = empirical_shift_entropy_with(&measure, block_len, opts.entropy_samples, seed, run)?.value;
    let hf = empirical_automaton_entropy_with(&rule, &measure, 2, opts.entropy_n, opts.entropy_samples, seed, run)?.value;
    let mut inequalities = Vec::new();

    match example {
        ExampleId::Coven => {
            lambda_rows(&mut table, &rule, &measure, Side::Minus, &[1, 2, 3], 2.0, run)?;
            lambda_rows(&mut table, &rule, &measure, Side::Plus, &[1, 2, 3], 0.0, run)?;
            let cert = certify_blocking_with(&rule, &Word::parse("000", -1)?, 1, 100, &run.budgets)?;
            table.flag("blocking 000", cert.status == CertStatus::Certified, "language iteration");
            table.push(format!("I_plus n={n}"), ip, 0.0, (0.0, 0.2), "i_mu_estimate");
            table.push(format!("I_minus n={n}"), im, 0.0, (0.0, 0.2), "i_mu_estimate");
            table.exact("h_shift", hs, ln2, "analytic_shift_entropy");
            table.relative(format!("h_shift block={block_len}"), hs_emp, ln2, 0.02, "empirical_shift_entropy");
            table.push("h_F p=2", hf, 0.0, (0.0, METRIC_TOLERANCE), "empirical_automaton_entropy");
            let max = check_max_inequality_with(&rule, &measure, opts.entropy_n, 2, opts.entropy_samples, seed, &check_opts)?;
            let margin = 2.0 * ln2;
            table.push("maximal inequality margin", max.margin, margin, (margin - METRIC_TOLERANCE, margin + METRIC_TOLERANCE), "check_max_inequality");
            let top = check_topological_inequality_with::<f64>(&rule, 13, 2, &check_opts)?;
            table.exact("topological bound", top.rhs, 2.0 * ln2, "topological_upper_bound");
            inequalities.push(max);
            inequalities.push(top);
        }
        ExampleId::Product => {
            let f2 = builtin::example2_f2_rule(2)?;
            table.flag("f2 surjective", decide_surjective_with(&f2, run.budgets.subset_states)?, "de Bruijn subset construction");
            lambda_rows(&mut table, &rule, &measure, Side::Minus, &[1, 2], r, run)?;
            lambda_rows(&mut table, &rule, &measure, Side::Plus, &[1, 2], 0.0, run)?;
            table.push(format!("I_minus n={n}"), im, 1.0, (0.85, 1.10), "i_mu_estimate");
            table.exact(format!("I_plus n={n}"), ip, 0.0, "i_mu_estimate");
            let ln6 = 6f64.ln();
            table.relative("h_shift", hs, ln6, 1e-12, "analytic_shift_entropy");
            table.relative(format!("h_shift block={block_len}"), hs_emp, ln6, 0.02, "empirical_shift_entropy");
            table.relative("h_F p=2", hf, ln2, 0.15, "empirical_automaton_entropy");
            let avg = check_average_inequality_with(&rule, &measure, opts.entropy_n, 2, opts.entropy_samples, seed, &check_opts)?;
            let ln3 = 3f64.ln();
            table.push("average inequality margin", avg.margin, ln3, (ln3 - METRIC_TOLERANCE, ln3 + METRIC_TOLERANCE), "check_average_inequality");
            let max = check_max_inequality_with(&rule, &measure, opts.entropy_n, 2, opts.entropy_samples, seed, &check_opts)?;
            table.flag("maximal inequality holds", max.verdict == Verdict::Holds, "check_max_inequality");
            let top = check_topological_inequality_with::<f64>(&rule, 10, 2, &check_opts)?;
            table.flag("topological inequality strict", top.margin > top.tolerance, "check_topological_inequality");
            inequalities.extend([avg, max, top]);
        }
    }
    let all_pass = table.rows.iter().all(|row| row.pass);
    Ok(ReproduceReport {
        example,
        rule: name.into(),
        seed,
        rows: table.rows,
        inequalities,
        all_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_example_is_rejected() {
        assert!("glider".parse::<ExampleId>().is_err());
        assert_eq!("coven".parse::<ExampleId>().unwrap(), ExampleId::Coven);
    }
}
