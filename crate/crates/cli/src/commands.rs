use std::fs;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use serde_json::{json, Map, Value};

use lyapca::ca::{evolve, io, sample_config, Config, Rule, Word};
use lyapca::entropy::{
    analytic_shift_entropy, count_patterns, count_spacetime_patterns_with, empirical_automaton_entropy_with,
    empirical_shift_entropy_with, EntropyEstimate, EntropyKind,
};
use lyapca::exponents::{
    capital_lambda_with, exponent_sequence_with, i_exact_with, lambda_tilde_bounds_with, lambda_tilde_exact_with,
    Estimator, PointMethod, SequenceSpec, Side,
};
use lyapca::lab::{self, CheckOptions, CheckParams, ExampleId, InequalityId, ReproduceOptions, Status, SuiteOptions, Verdict};
use lyapca::set_dynamics::{
    certify_blocking_with, decide_surjective_with, min_center_width, search_blocking_words_with, DEFAULT_WORD_BUDGET,
};
use lyapca::{Measure, RunOptions};

use crate::config::{load_rule, resolve_measure, RunConfig};
use crate::output::{to_json, Report};

const EXPONENT_COLUMNS: &[&str] = &[
    "rule_id", "side", "n", "method", "lower", "exact", "upper", "value", "stderr", "samples", "seed",
];
const ENTROPY_COLUMNS: &[&str] = &[
    "rule_id", "kind", "p", "n", "block_len", "samples", "seed", "value", "pattern_count", "warnings",
];

/// Loaded configuration plus the resolved run options.
pub struct Ctx {
    pub cfg: RunConfig,
    pub run: RunOptions,
}

impl Ctx {
    fn rule(&self, flag: &Option<String>) -> Result<(String, Rule)> {
        let spec = flag
            .clone()
            .or_else(|| self.cfg.rule.clone())
            .ok_or_else(|| anyhow!("--rule is required"))?;
        let rule = load_rule(&spec)?;
        Ok((spec, rule))
    }

    fn measure(&self, flag: &Option<String>, rule: Option<&Rule>) -> Result<Measure> {
        let spec = flag.clone().map(Value::String).or_else(|| self.cfg.measure.clone());
        resolve_measure(spec.as_ref(), rule)
    }

    fn seed(&self, flag: Option<u64>) -> Result<u64> {
        flag.or(self.cfg.seed)
            .ok_or_else(|| anyhow!("--seed is required for sampling operations"))
    }

    fn side(&self, flag: &Option<String>) -> Option<String> {
        flag.clone().or_else(|| self.cfg.side.clone())
    }

    fn n_list(&self, n: Option<usize>, list: &Option<Vec<usize>>) -> Option<Vec<usize>> {
        list.clone()
            .or_else(|| n.map(|n| vec![n]))
            .or_else(|| self.cfg.n_list.clone())
            .or_else(|| self.cfg.n.map(|n| vec![n]))
    }
}

/// Minus first; `both` when unspecified.
fn sides(spec: Option<&str>) -> Result<Vec<Side>> {
    match spec {
        None | Some("both") => Ok(vec![Side::Minus, Side::Plus]),
        Some(s) => Ok(vec![s.parse()?]),
    }
}

fn read_config(path: &PathBuf) -> Result<Config> {
    let text = fs::read_to_string(path).with_context(|| format!("reading configuration {}", path.display()))?;
    io::parse_config(&text).with_context(|| format!("configuration file {}", path.display()))
}

/// A table of rows: one JSON object for a single row, otherwise an array.
fn table(rows: Vec<Value>, columns: &[&'static str]) -> Report {
    let json = if rows.len() == 1 {
        rows[0].clone()
    } else {
        Value::Array(rows.clone())
    };
    Report {
        json,
        rows,
        columns: Some(columns.to_vec()),
        text: None,
        exit: 0,
    }
}

fn with_rule_id(mut v: Value, rule_id: &str) -> Value {
    if let Value::Object(map) = &mut v {
        map.insert("rule_id".into(), Value::String(rule_id.into()));
    }
    v
}

/// Numbers print as JSON does, so `2.0` stays `2.0`.
fn num_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn value_lines(rows: &[Value]) -> String {
    if let [row] = rows {
        return num_text(&row["value"]);
    }
    rows.iter()
        .map(|r| format!("{} n={} {}", num_text(&r["side"]), r["n"], num_text(&r["value"])))
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// `builtin:<name>`, a bare builtin name, or a rule file.
    #[arg(long)]
    rule: Option<String>,
    /// uniform, uniform:k, bernoulli:w,.., tracks:w,..;w,.. or a file.
    #[arg(long)]
    measure: Option<String>,
    /// Initial configuration file.
    #[arg(long)]
    x: Option<PathBuf>,
    /// Sample the initial configuration instead of reading it.
    #[arg(long)]
    seed: Option<u64>,
    /// Half-width of a sampled configuration; defaults to `r*steps + 8`.
    #[arg(long)]
    width: Option<i64>,
    #[arg(long)]
    steps: Option<usize>,
}

pub fn simulate(ctx: &Ctx, a: &SimulateArgs) -> Result<Report> {
    let (rule_id, rule) = ctx.rule(&a.rule)?;
    let steps = a.steps.or(ctx.cfg.steps).unwrap_or(10);
    let x = match a.x.clone().or_else(|| ctx.cfg.x.clone()) {
        Some(path) => read_config(&path)?,
        None => {
            let seed = ctx.seed(a.seed)?;
            let measure = ctx.measure(&a.measure, Some(&rule))?;
            let w = a
                .width
                .or(ctx.cfg.width)
                .unwrap_or((rule.radius() * steps) as i64 + 8);
            sample_config(&measure, -w, w, seed)?
        }
    };
    let diagram = evolve(&rule, &x, steps)?;
    let rows: Vec<Value> = diagram
        .rows
        .iter()
        .enumerate()
        .map(|(t, c)| {
            let cells: Vec<String> = c.cells().iter().map(|s| s.to_string()).collect();
            json!({
                "rule_id": rule_id,
                "t": t,
                "origin": c.origin(),
                "valid_lo": c.valid_lo(),
                "valid_hi": c.valid_hi(),
                "cells": cells.join(" "),
            })
        })
        .collect();
    let report = Report::from_value(Value::Array(rows))
        .with_columns(&["rule_id", "t", "origin", "valid_lo", "valid_hi", "cells"])
        .with_text(io::format_diagram(&diagram).trim_end());
    Ok(report)
}

#[derive(Args, Debug)]
pub struct ExponentArgs {
    /// `builtin:<name>`, a bare builtin name, or a rule file.
    #[arg(long)]
    rule: Option<String>,
    /// uniform, uniform:k, bernoulli:w,.., tracks:w,..;w,.. or a file.
    #[arg(long)]
    measure: Option<String>,
    /// lambda (Λ̃ₙ), i (Iₙ), bracket (sampled and set-valued bounds) or
    /// capital (Λₙ over the admissible shifts).
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    side: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    x: Option<PathBuf>,
    /// Sample `x` from the measure when no file is given.
    #[arg(long)]
    seed: Option<u64>,
    /// Random perturbations for the sampled bounds.
    #[arg(long)]
    samples: Option<u64>,
}

pub fn exponent(ctx: &Ctx, a: &ExponentArgs) -> Result<Report> {
    let (rule_id, rule) = ctx.rule(&a.rule)?;
    let kind = a.kind.clone().or_else(|| ctx.cfg.kind.clone()).unwrap_or_else(|| "lambda".into());
    let side: Side = ctx
        .side(&a.side)
        .ok_or_else(|| anyhow!("--side is required"))?
        .parse()?;
    let n = a.n.or(ctx.cfg.n).ok_or_else(|| anyhow!("--n is required"))?;
    let rn = (rule.radius() * n) as i64;
    let x = match a.x.clone().or_else(|| ctx.cfg.x.clone()) {
        Some(path) => read_config(&path)?,
        None => {
            let seed = ctx.seed(a.seed)?;
            let measure = ctx.measure(&a.measure, Some(&rule))?;
            let w = if kind == "capital" { 3 * rn + 8 } else { 2 * rn };
            sample_config(&measure, -w, w, seed)?
        }
    };
    let budgets = &ctx.run.budgets;
    let base = json!({ "rule_id": rule_id, "kind": kind, "side": side, "n": n });
    let (json, text) = match kind.as_str() {
        "lambda" => {
            let v = lambda_tilde_exact_with(&rule, &x, n, side, budgets)?;
            (merge(base, json!({ "value": v })), v.to_string())
        }
        "i" => {
            let v = i_exact_with(&rule, &x, n, side, budgets)?;
            (merge(base, json!({ "value": v })), v.to_string())
        }
        "bracket" => {
            let samples = a.samples.or(ctx.cfg.samples).unwrap_or(1000) as usize;
            let seed = a.seed.or(ctx.cfg.seed).unwrap_or(0);
            let b = lambda_tilde_bounds_with(&rule, &x, n, side, samples, seed, budgets)?;
            let exact = b.exact.map_or("-".to_string(), |v| v.to_string());
            let text = format!("{} {} {}", b.lower, exact, b.upper);
            (merge(base, to_json(&b)?), text)
        }
        "capital" => {
            let c = capital_lambda_with(&rule, &x, n, side, PointMethod::Exact, budgets)?;
            let text = c.value.to_string();
            (merge(base, to_json(&c)?), text)
        }
        other => bail!("unknown exponent kind {other:?} (lambda, i, bracket, capital)"),
    };
    Ok(Report::from_value(json).with_text(text))
}

fn merge(base: Value, extra: Value) -> Value {
    let mut map: Map<String, Value> = match base {
        Value::Object(m) => m,
        _ => Map::new(),
    };
    if let Value::Object(e) = extra {
        for (k, v) in e {
            map.entry(k).or_insert(v);
        }
    }
    Value::Object(map)
}

#[derive(Args, Debug)]
pub struct SequenceArgs {
    /// `builtin:<name>`, a bare builtin name, or a rule file.
    #[arg(long)]
    rule: Option<String>,
    /// uniform, uniform:k, bernoulli:w,.., tracks:w,..;w,.. or a file.
    #[arg(long)]
    measure: Option<String>,
    /// plus, minus or both.
    #[arg(long)]
    side: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated ascending horizons.
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// exact or sampled (lambda-mu only).
    #[arg(long)]
    method: Option<String>,
}

fn sequence(ctx: &Ctx, a: &SequenceArgs, estimator: Estimator) -> Result<Report> {
    let (rule_id, rule) = ctx.rule(&a.rule)?;
    let measure = ctx.measure(&a.measure, Some(&rule))?;
    let n_list = ctx
        .n_list(a.n, &a.n_list)
        .ok_or_else(|| anyhow!("--n or --n-list is required"))?;
    let (samples, seed) = match estimator {
        Estimator::LambdaExact => (0, a.seed.or(ctx.cfg.seed).unwrap_or(0)),
        _ => (a.samples.or(ctx.cfg.samples).unwrap_or(10_000), ctx.seed(a.seed)?),
    };
    let mut rows = Vec::new();
    for side in sides(ctx.side(&a.side).as_deref())? {
        let spec = SequenceSpec { estimator, side, samples, seed };
        let seq = exponent_sequence_with(&rule, &measure, &n_list, &spec, &ctx.run)?;
        for row in &seq.rows {
            rows.push(with_rule_id(to_json(row)?, &rule_id));
        }
    }
    let text = value_lines(&rows);
    Ok(table(rows, EXPONENT_COLUMNS).with_text(text))
}

pub fn avg_exponent(ctx: &Ctx, a: &SequenceArgs) -> Result<Report> {
    sequence(ctx, a, Estimator::IMu)
}

pub fn lambda_mu(ctx: &Ctx, a: &SequenceArgs) -> Result<Report> {
    let method = a.method.clone().or_else(|| ctx.cfg.method.clone());
    let estimator = match method.as_deref() {
        None | Some("exact") => Estimator::LambdaExact,
        Some("sampled") => Estimator::LambdaSampled,
        Some(other) => bail!("unknown method {other:?} (exact, sampled)"),
    };
    sequence(ctx, a, estimator)
}

#[derive(Args, Debug)]
pub struct EntropyArgs {
    /// `builtin:<name>`, a bare builtin name, or a rule file.
    #[arg(long)]
    rule: Option<String>,
    /// uniform, uniform:k, bernoulli:w,.., tracks:w,..;w,.. or a file.
    #[arg(long)]
    measure: Option<String>,
    /// analytic, shift, automaton or topological.
    #[arg(long)]
    kind: Option<String>,
    /// Half-width of the observed window (automaton, topological).
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Block length of the shift estimate.
    #[arg(long)]
    block_len: Option<usize>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

pub fn entropy(ctx: &Ctx, a: &EntropyArgs) -> Result<Report> {
    let kind = a
        .kind
        .clone()
        .or_else(|| ctx.cfg.kind.clone())
        .ok_or_else(|| anyhow!("--kind is required (analytic, shift, automaton, topological)"))?;
    let rule_flag = a.rule.clone().or_else(|| ctx.cfg.rule.clone());
    let (rule_id, rule) = match &rule_flag {
        Some(spec) => (spec.clone(), Some(load_rule(spec)?)),
        None => (String::new(), None),
    };
    let need_rule = || rule.as_ref().ok_or_else(|| anyhow!("--rule is required for kind {kind}"));
    let p = a.p.or(ctx.cfg.p).unwrap_or(2);
    let n = a.n.or(ctx.cfg.n).unwrap_or(10);
    let samples = a.samples.or(ctx.cfg.samples).unwrap_or(100_000);
    let est: EntropyEstimate<f64> = match kind.as_str() {
        "analytic" => analytic_entropy(&ctx.measure(&a.measure, rule.as_ref())?),
        "shift" => {
            let block_len = a.block_len.or(ctx.cfg.block_len).unwrap_or(8);
            let measure = ctx.measure(&a.measure, rule.as_ref())?;
            empirical_shift_entropy_with(&measure, block_len, samples, ctx.seed(a.seed)?, &ctx.run)?
        }
        "automaton" => {
            let rule = need_rule()?;
            let measure = ctx.measure(&a.measure, Some(rule))?;
            empirical_automaton_entropy_with(rule, &measure, p, n, samples, ctx.seed(a.seed)?, &ctx.run)?
        }
        "topological" => count_spacetime_patterns_with(need_rule()?, p, n, &ctx.run.budgets)?,
        other => bail!("unknown entropy kind {other:?} (analytic, shift, automaton, topological)"),
    };
    let row = with_rule_id(to_json(&est)?, &rule_id);
    let text = num_text(&row["value"]);
    Ok(table(vec![row], ENTROPY_COLUMNS).with_text(text))
}

fn analytic_entropy(measure: &Measure) -> EntropyEstimate<f64> {
    EntropyEstimate {
        kind: EntropyKind::ShiftAnalytic,
        value: analytic_shift_entropy(measure),
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

#[derive(Args, Debug)]
pub struct PatternArgs {
    /// `builtin:<name>`, a bare builtin name, or a rule file.
    #[arg(long)]
    rule: Option<String>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
}

pub fn patterns(ctx: &Ctx, a: &PatternArgs) -> Result<Report> {
    let (rule_id, rule) = ctx.rule(&a.rule)?;
    let p = a.p.or(ctx.cfg.p).unwrap_or(rule.radius().max(1));
    let n_list = ctx
        .n_list(a.n, &a.n_list)
        .ok_or_else(|| anyhow!("--n or --n-list is required"))?;
    let mut rows = Vec::new();
    for n in n_list {
        if n == 0 {
            bail!("n must be positive");
        }
        let c = count_patterns(&rule, p, n, &ctx.run.budgets)?;
        let count = u64::try_from(c.count).map_or_else(|_| json!(c.count.to_string()), |v| json!(v));
        let words = u64::try_from(c.words).map_or_else(|_| json!(c.words.to_string()), |v| json!(v));
        rows.push(json!({
            "rule_id": rule_id,
            "p": p,
            "n": n,
            "count": count,
            "exact": c.exact,
            "words": words,
            "rate": (c.count as f64).ln() / n as f64,
        }));
    }
    let rows = rows.iter().map(to_json).collect::<Result<Vec<_>>>()?;
    let text = rows
        .iter()
        .map(|r| format!("n={} count={} rate={}", r["n"], num_text(&r["count"]), r["rate"]))
        .collect::<Vec<_>>()
        .join("\n");
    Ok(table(rows, &["rule_id", "p", "n", "count", "exact", "words", "rate"]).with_text(text))
}

#[derive(Args, Debug)]
pub struct BlockingArgs {
    /// `builtin:<name>`, a bare builtin name, or a rule file.
    #[arg(long)]
    rule: Option<String>,
    /// Symbols, e.g. `000` or `0 1 2`.
    #[arg(long)]
    word: Option<String>,
    /// Coordinate of the first symbol; centred by default.
    #[arg(long, allow_hyphen_values = true)]
    anchor: Option<i64>,
    /// Half-width `i` of the protected centre.
    #[arg(long)]
    center: Option<usize>,
    #[arg(long)]
    max_steps: Option<usize>,
    /// Enumerate words up to `--max-len` instead of certifying one.
    #[arg(long)]
    search: bool,
    #[arg(long)]
    max_len: Option<usize>,
}

pub fn blocking(ctx: &Ctx, a: &BlockingArgs) -> Result<Report> {
    let (rule_id, rule) = ctx.rule(&a.rule)?;
    let max_steps = a.max_steps.or(ctx.cfg.max_steps).unwrap_or(100);
    if a.search {
        let max_len = a.max_len.or(ctx.cfg.max_len).unwrap_or(4);
        let found = search_blocking_words_with(&rule, max_len, max_steps, DEFAULT_WORD_BUDGET, &ctx.run.budgets)?;
        let json = merge(json!({ "rule_id": rule_id }), to_json(&found)?);
        let text = found
            .certificates
            .iter()
            .map(|c| format!("{} anchor={}", c.word, c.word.anchor()))
            .collect::<Vec<_>>()
            .join("\n");
        let text = if text.is_empty() { "none".to_string() } else { text };
        return Ok(Report::from_value(json).with_text(text));
    }
    let text = a
        .word
        .clone()
        .or_else(|| ctx.cfg.word.clone())
        .ok_or_else(|| anyhow!("--word is required unless --search is given"))?;
    let len = Word::parse(&text, 0)?.len();
    let anchor = a.anchor.or(ctx.cfg.anchor).unwrap_or(-(((len.max(1) - 1) / 2) as i64));
    let word = Word::parse(&text, anchor)?;
    let center = a
        .center
        .or(ctx.cfg.center)
        .unwrap_or_else(|| min_center_width(rule.radius()).max((len.max(1) - 1) / 2));
    let cert = certify_blocking_with(&rule, &word, center, max_steps, &ctx.run.budgets)?;
    let text = match (cert.preperiod, cert.period) {
        (Some(pre), Some(per)) if cert.is_certified() => format!("certified preperiod={pre} period={per}"),
        _ => to_json(&cert.status)?.as_str().unwrap_or("unknown").to_string(),
    };
    let json = merge(json!({ "rule_id": rule_id }), to_json(&cert)?);
    Ok(Report::from_value(json).with_text(text))
}

#[derive(Args, Debug)]
pub struct SurjectiveArgs {
    /// `builtin:<name>`, a bare builtin name, or a rule file.
    #[arg(long)]
    rule: Option<String>,
}

pub fn surjective(ctx: &Ctx, a: &SurjectiveArgs) -> Result<Report> {
    let (rule_id, rule) = ctx.rule(&a.rule)?;
    let onto = decide_surjective_with(&rule, ctx.run.budgets.subset_states)?;
    Ok(Report::from_value(json!({ "rule_id": rule_id, "surjective": onto })).with_text(onto.to_string()))
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// entropy_average, entropy_maximal, entropy_topological or
    /// average_below_maximal.
    id: String,
    /// `builtin:<name>`, a bare builtin name, or a rule file.
    #[arg(long)]
    rule: Option<String>,
    /// uniform, uniform:k, bernoulli:w,.., tracks:w,..;w,.. or a file.
    #[arg(long)]
    measure: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    exponent_samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Largest horizon for the exact maximal exponents.
    #[arg(long)]
    lambda_n: Option<usize>,
    #[arg(long)]
    tolerance: Option<f64>,
}

pub fn check(ctx: &Ctx, a: &CheckArgs) -> Result<Report> {
    let id: InequalityId = a.id.parse()?;
    let (rule_id, rule) = ctx.rule(&a.rule)?;
    let measure = ctx.measure(&a.measure, Some(&rule))?;
    let topological = id == InequalityId::EntropyTopological;
    let seed = if topological { a.seed.or(ctx.cfg.seed).unwrap_or(0) } else { ctx.seed(a.seed)? };
    let params = CheckParams {
        n: a.n.or(ctx.cfg.n).unwrap_or(if topological { 16 } else { 10 }),
        p: a.p.or(ctx.cfg.p).unwrap_or(2.max(rule.radius())),
        samples: a.samples.or(ctx.cfg.samples).unwrap_or(100_000),
        seed,
    };
    let opts = CheckOptions {
        tolerance: a.tolerance.or(ctx.cfg.tolerance),
        exponent_samples: Some(a.exponent_samples.or(ctx.cfg.exponent_samples).unwrap_or(10_000)),
        lambda_n: a.lambda_n.or(ctx.cfg.lambda_n).unwrap_or(3),
        run: ctx.run,
    };
    let report = lab::check(id, &rule, &measure, &params, &opts)?;
    let exit = i32::from(report.verdict == Verdict::Violated);
    let json = with_rule_id(to_json(&report)?, &rule_id);
    let text = format!(
        "{} lhs={} rhs={} margin={} verdict={}",
        id.as_str(),
        json["lhs"],
        json["rhs"],
        json["margin"],
        num_text(&json["verdict"])
    );
    Ok(Report::from_value(json)
        .with_columns(&[
            "rule_id",
            "inequality_id",
            "lhs",
            "rhs",
            "margin",
            "tolerance",
            "verdict",
            "lhs_method",
            "rhs_method",
            "params",
            "provenance",
            "warnings",
        ])
        .with_text(text)
        .with_exit(exit))
}

#[derive(Args, Debug)]
pub struct PropertiesArgs {
    /// `builtin:<name>`, a bare builtin name, or a rule file.
    #[arg(long)]
    rule: Option<String>,
    /// uniform, uniform:k, bernoulli:w,.., tracks:w,..;w,.. or a file.
    #[arg(long)]
    measure: Option<String>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Run a single property instead of the whole suite.
    #[arg(long)]
    property: Option<String>,
    /// Window half-width for `independence_containment`.
    #[arg(long)]
    p: Option<usize>,
    /// Horizon for `independence_containment`.
    #[arg(long)]
    n: Option<usize>,
}

pub fn properties(ctx: &Ctx, a: &PropertiesArgs) -> Result<Report> {
    let (rule_id, rule) = ctx.rule(&a.rule)?;
    let measure = ctx.measure(&a.measure, Some(&rule))?;
    let trials = a.trials.or(ctx.cfg.trials).unwrap_or(1000);
    let seed = ctx.seed(a.seed)?;
    let property = a.property.clone().or_else(|| ctx.cfg.property.clone());
    let opts = SuiteOptions {
        run: ctx.run,
        ..SuiteOptions::default()
    };
    let p = a.p.or(ctx.cfg.p);
    let n = a.n.or(ctx.cfg.n);
    let reports = match (property.as_deref(), p, n) {
        (Some("independence_containment"), Some(p), Some(n)) => {
            vec![lab::check_independence_containment_with(&rule, &measure, p, n, trials, seed, &opts)?]
        }
        (Some(id), _, _) if !lab::SUITE.contains(&id) => {
            bail!("unknown property {id:?} (one of {})", lab::SUITE.join(", "))
        }
        (only, _, _) => lab::run_property_suite_with(&rule, &measure, trials, seed, &opts)?
            .into_iter()
            .filter(|r| only.map_or(true, |id| r.property_id == id))
            .collect(),
    };
    let failed = reports.iter().any(|r| r.status == Status::Fail);
    let rows = reports
        .iter()
        .map(|r| to_json(r).map(|v| with_rule_id(v, &rule_id)))
        .collect::<Result<Vec<_>>>()?;
    let text = rows
        .iter()
        .map(|r| {
            format!(
                "{} {} trials={} failures={}",
                num_text(&r["property_id"]),
                num_text(&r["status"]),
                r["trials"],
                r["failures"].as_array().map_or(0, Vec::len)
            )
        })
        .collect::<Vec<_>>()
        .join("\n");
    let columns = &["rule_id", "property_id", "trials", "status", "failures", "flags", "params"];
    Ok(table(rows, columns).with_text(text).with_exit(i32::from(failed)))
}

#[derive(Args, Debug)]
pub struct ReproduceArgs {
    /// coven or product.
    example: String,
    #[arg(long)]
    seed: Option<u64>,
    /// Horizon of the averaged exponents.
    #[arg(long)]
    n: Option<usize>,
    /// Samples for the averaged exponents.
    #[arg(long)]
    exponent_samples: Option<u64>,
    /// Samples for the entropy estimates.
    #[arg(long)]
    samples: Option<u64>,
}

pub fn reproduce(ctx: &Ctx, a: &ReproduceArgs) -> Result<Report> {
    let example: ExampleId = a.example.parse()?;
    let defaults = ReproduceOptions::default();
    let opts = ReproduceOptions {
        seed: a.seed.or(ctx.cfg.seed).unwrap_or(defaults.seed),
        exponent_n: a.n.or(ctx.cfg.n).unwrap_or(defaults.exponent_n),
        exponent_samples: a
            .exponent_samples
            .or(ctx.cfg.exponent_samples)
            .unwrap_or(defaults.exponent_samples),
        entropy_samples: a.samples.or(ctx.cfg.samples).unwrap_or(defaults.entropy_samples),
        run: ctx.run,
        ..defaults
    };
    let report = lab::reproduce_example_with(example, &opts)?;
    let json = to_json(&report)?;
    let mut text: Vec<String> = report
        .rows
        .iter()
        .map(|r| {
            format!(
                "{} {:<28} computed={:.6} expected={:.6} [{:.6}, {:.6}] {}",
                if r.pass { "PASS" } else { "FAIL" },
                r.quantity,
                r.computed,
                r.expected,
                r.lower,
                r.upper,
                r.method
            )
        })
        .collect();
    text.push(format!("all_pass={}", report.all_pass));
    let rows = json["rows"].as_array().cloned().unwrap_or_default();
    let mut out = Report::from_value(json)
        .with_columns(&["quantity", "computed", "expected", "lower", "upper", "method", "pass"])
        .with_text(text.join("\n"))
        .with_exit(i32::from(!report.all_pass));
    out.rows = rows;
    Ok(out)
}

#[derive(Args, Debug)]
pub struct DichotomyArgs {
    /// `builtin:<name>`, a bare builtin name, or a rule file.
    #[arg(long)]
    rule: Option<String>,
    /// uniform, uniform:k, bernoulli:w,.., tracks:w,..;w,.. or a file.
    #[arg(long)]
    measure: Option<String>,
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

pub fn dichotomy(ctx: &Ctx, a: &DichotomyArgs) -> Result<Report> {
    let (rule_id, rule) = ctx.rule(&a.rule)?;
    let measure = ctx.measure(&a.measure, Some(&rule))?;
    let n_list = a
        .n_list
        .clone()
        .or_else(|| ctx.cfg.n_list.clone())
        .unwrap_or_else(|| vec![4, 8, 16, 32]);
    let samples = a.samples.or(ctx.cfg.samples).unwrap_or(1000);
    let d = lab::diagnose_dichotomy_with(&rule, &measure, &n_list, samples, ctx.seed(a.seed)?, &ctx.run)?;
    let json = with_rule_id(to_json(&d)?, &rule_id);
    let text = format!(
        "trend={} growth_per_step={} consistent={}",
        num_text(&json["trend"]),
        json["growth_per_step"],
        d.consistent
    );
    let rows = json["rows"].as_array().cloned().unwrap_or_default();
    let mut out = Report::from_value(json)
        .with_columns(&["n", "mean", "max"])
        .with_text(text)
        .with_exit(i32::from(!d.consistent));
    out.rows = rows;
    Ok(out)
}
