//! Rule files (JSON) and the plain-text window format.
//!
//! A window is written as a header line `origin=<int> valid=[<lo>,<hi>]`
//! followed by one line of space-separated decimal symbols. A space-time
//! diagram is the concatenation of its rows in that format.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::config::{Config, SpaceTimeDiagram};
use super::rule::{Alphabet, Rule, Symbol};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleFile {
    pub alphabet_size: usize,
    pub radius: usize,
    pub table: Vec<Symbol>,
}

impl RuleFile {
    pub fn from_rule(rule: &Rule) -> Self {
        RuleFile {
            alphabet_size: rule.size(),
            radius: rule.radius(),
            table: rule.table().to_vec(),
        }
    }

    pub fn into_rule(self) -> Result<Rule> {
        Rule::from_table(Alphabet::new(self.alphabet_size)?, self.radius, self.table)
    }
}

pub fn parse_rule_json(text: &str) -> Result<Rule> {
    let file: RuleFile = serde_json::from_str(text)?;
    file.into_rule()
}

pub fn rule_to_json(rule: &Rule) -> String {
    serde_json::to_string(&RuleFile::from_rule(rule)).expect("rule file serializes")
}

pub fn format_config(config: &Config) -> String {
    let mut out = String::new();
    write_row(&mut out, config);
    out
}

pub fn format_diagram(diagram: &SpaceTimeDiagram) -> String {
    let mut out = String::new();
    for row in &diagram.rows {
        write_row(&mut out, row);
    }
    out
}

fn write_row(out: &mut String, config: &Config) {
    let _ = writeln!(
        out,
        "origin={} valid=[{},{}]",
        config.origin(),
        config.valid_lo(),
        config.valid_hi()
    );
    let symbols: Vec<String> = config.cells().iter().map(|s| s.to_string()).collect();
    out.push_str(&symbols.join(" "));
    out.push('\n');
}

/// Parses every `(header, cells)` pair in `text`; blank lines are skipped.
pub fn parse_rows(text: &str) -> Result<Vec<Config>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let mut rows = Vec::new();
    while let Some((line, header)) = lines.next() {
        let (origin, lo, hi) = parse_header(header).ok_or_else(|| Error::Parse {
            line,
            msg: format!("expected `origin=<int> valid=[<int>,<int>]`, got {header:?}"),
        })?;
        let (cell_line, body) = lines.next().ok_or(Error::Parse {
            line,
            msg: "header without a row of symbols".into(),
        })?;
        let cells: Option<Vec<Symbol>> = body.split(' ').map(|t| t.parse().ok()).collect();
        let cells = cells.ok_or_else(|| Error::Parse {
            line: cell_line,
            msg: "symbols must be decimal integers separated by single spaces".into(),
        })?;
        let config = Config::with_validity(cells, origin, lo, hi).map_err(|e| Error::Parse {
            line: cell_line,
            msg: e.to_string(),
        })?;
        rows.push(config);
    }
    Ok(rows)
}

pub fn parse_config(text: &str) -> Result<Config> {
    let mut rows = parse_rows(text)?;
    match rows.len() {
        1 => Ok(rows.pop().expect("one row")),
        n => Err(Error::Parse {
            line: 1,
            msg: format!("expected exactly one configuration, found {n}"),
        }),
    }
}

fn parse_header(line: &str) -> Option<(i64, i64, i64)> {
    let rest = line.strip_prefix("origin=")?;
    let (origin, rest) = rest.split_once(' ')?;
    let inner = rest.strip_prefix("valid=[")?.strip_suffix(']')?;
    let (lo, hi) = inner.split_once(',')?;
    Some((origin.parse().ok()?, lo.parse().ok()?, hi.parse().ok()?))
}
