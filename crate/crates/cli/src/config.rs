//! JSON run configuration and the rule/measure/budget resolvers shared by
//! the subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;
use serde_json::Value;

use lyapca::ca::{builtin, io, Rule};
use lyapca::{Budgets, Measure};

use crate::output::Format;

pub const BUDGET_ENV: &str = "CA_LYAPUNOV_BUDGET";

/// Every key a configuration file may set. Flags override these.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub operation: Option<String>,
    pub rule: Option<String>,
    /// A measure string (see [`resolve_measure`]) or `{"tracks": [[...]]}`.
    pub measure: Option<Value>,
    pub side: Option<String>,
    pub n: Option<usize>,
    pub n_list: Option<Vec<usize>>,
    pub p: Option<usize>,
    pub samples: Option<u64>,
    pub exponent_samples: Option<u64>,
    pub seed: Option<u64>,
    pub budget: Option<u64>,
    pub workers: Option<usize>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub x: Option<PathBuf>,
    pub word: Option<String>,
    pub anchor: Option<i64>,
    pub center: Option<usize>,
    pub max_steps: Option<usize>,
    pub max_len: Option<usize>,
    pub kind: Option<String>,
    pub method: Option<String>,
    pub block_len: Option<usize>,
    pub lambda_n: Option<usize>,
    pub tolerance: Option<f64>,
    pub trials: Option<u64>,
    pub property: Option<String>,
    pub steps: Option<usize>,
    pub width: Option<i64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| {
            anyhow!(
                "config {}: line {} column {}: {}",
                path.display(),
                e.line(),
                e.column(),
                e
            )
        })?;
        cfg.check_files(path)?;
        Ok(cfg)
    }

    fn check_files(&self, path: &Path) -> Result<()> {
        if let Some(x) = &self.x {
            if !x.exists() {
                bail!("config {}: field `x`: file {} does not exist", path.display(), x.display());
            }
        }
        if let Some(rule) = &self.rule {
            if !rule.starts_with("builtin:") && builtin::by_name(rule).is_err() && !Path::new(rule).exists() {
                bail!("config {}: field `rule`: {rule:?} is neither a builtin nor an existing file", path.display());
            }
        }
        Ok(())
    }
}

/// `builtin:<name>`, a bare builtin name, or a JSON rule file.
pub fn load_rule(spec: &str) -> Result<Rule> {
    if let Some(name) = spec.strip_prefix("builtin:") {
        return builtin::by_name(name).with_context(|| format!("rule {spec:?}"));
    }
    let path = Path::new(spec);
    if path.is_file() {
        let text = fs::read_to_string(path).with_context(|| format!("reading rule file {spec}"))?;
        return io::parse_rule_json(&text).with_context(|| format!("rule file {spec}"));
    }
    builtin::by_name(spec).map_err(|_| anyhow!("rule {spec:?} is neither a builtin nor an existing file"))
}

/// Alphabet sizes of the factor tracks of a (possibly nested) product.
fn track_sizes(rule: &Rule) -> Vec<usize> {
    match rule.factors() {
        Some((a, b)) => {
            let mut sizes = track_sizes(a);
            sizes.extend(track_sizes(b));
            sizes
        }
        None => vec![rule.size()],
    }
}

fn parse_weights(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|w| w.trim().parse::<f64>().with_context(|| format!("bad weight {w:?}")))
        .collect()
}

/// Measures: `uniform` (per factor track for products), `bernoulli:w,w,...`,
/// `tracks:w,w;w,w,w`, a JSON file, or an inline `{"tracks": ...}` object.
pub fn resolve_measure(spec: Option<&Value>, rule: Option<&Rule>) -> Result<Measure> {
    let measure = match spec {
        None => default_measure(rule)?,
        Some(Value::String(s)) => parse_measure_str(s, rule)?,
        Some(obj @ Value::Object(_)) => serde_json::from_value(obj.clone()).context("measure object")?,
        Some(other) => bail!("measure must be a string or an object, got {other}"),
    };
    if let Some(rule) = rule {
        if measure.alphabet_size() != rule.size() {
            bail!(
                "measure has {} symbols but the rule alphabet has {}",
                measure.alphabet_size(),
                rule.size()
            );
        }
    }
    Ok(measure)
}

fn default_measure(rule: Option<&Rule>) -> Result<Measure> {
    let rule = rule.ok_or_else(|| anyhow!("a --measure or a --rule is required"))?;
    Ok(Measure::product_uniform(&track_sizes(rule))?)
}

fn parse_measure_str(s: &str, rule: Option<&Rule>) -> Result<Measure> {
    if s == "uniform" {
        return default_measure(rule);
    }
    if let Some(rest) = s.strip_prefix("uniform:") {
        let size = rest.parse().with_context(|| format!("bad size in {s:?}"))?;
        return Ok(Measure::uniform(size)?);
    }
    if let Some(rest) = s.strip_prefix("bernoulli:") {
        return Ok(Measure::new(vec![parse_weights(rest)?])?);
    }
    if let Some(rest) = s.strip_prefix("tracks:") {
        let tracks = rest.split(';').map(parse_weights).collect::<Result<Vec<_>>>()?;
        return Ok(Measure::new(tracks)?);
    }
    let path = Path::new(s);
    if path.is_file() {
        let text = fs::read_to_string(path).with_context(|| format!("reading measure file {s}"))?;
        return serde_json::from_str(&text).with_context(|| format!("measure file {s}"));
    }
    bail!("unknown measure {s:?} (uniform, uniform:<k>, bernoulli:<w,...>, tracks:<w,...;w,...> or a file)")
}

/// Flag, then config, then `CA_LYAPUNOV_BUDGET`, then the defaults.
pub fn resolve_budgets(flag: Option<u64>, cfg: Option<u64>) -> Result<Budgets> {
    let env = match std::env::var(BUDGET_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse::<u64>()
                .map_err(|_| anyhow!("{BUDGET_ENV} must be a non-negative integer, got {v:?}"))?,
        ),
        Err(_) => None,
    };
    Ok(match flag.or(cfg).or(env) {
        Some(limit) => Budgets::uniform(limit),
        None => Budgets::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_default_measure_has_one_track_per_factor() {
        let rule = load_rule("builtin:product:shift,f2:2").unwrap();
        let m = resolve_measure(None, Some(&rule)).unwrap();
        assert_eq!(m.track_sizes(), vec![2, 3]);
    }

    #[test]
    fn measure_strings() {
        let rule = load_rule("coven:10").unwrap();
        let m = resolve_measure(Some(&Value::String("bernoulli:0.25,0.75".into())), Some(&rule)).unwrap();
        assert_eq!(m.alphabet_size(), 2);
        assert!(resolve_measure(Some(&Value::String("uniform:3".into())), Some(&rule)).is_err());
        assert!(resolve_measure(Some(&Value::String("gaussian".into())), Some(&rule)).is_err());
    }

    #[test]
    fn unknown_keys_are_rejected_with_a_position() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        fs::write(&path, "{\n  \"rule\": \"builtin:shift\",\n  \"colour\": 3\n}").unwrap();
        let err = RunConfig::load(&path).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
        assert!(err.contains("colour"), "{err}");
    }
}
