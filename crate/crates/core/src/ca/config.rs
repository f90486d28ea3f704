use serde::{Deserialize, Serialize};

use super::rule::{Alphabet, Rule, Symbol};
use crate::error::{Error, Result};

/// A finite window of a configuration.
///
/// `cells[k]` sits at coordinate `origin + k`. Only `[valid_lo, valid_hi]`
/// is guaranteed to agree with the bi-infinite point the window stands for;
/// each application of a radius-`r` rule shrinks that interval by `r` per
/// side.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Config {
    cells: Vec<Symbol>,
    origin: i64,
    valid_lo: i64,
    valid_hi: i64,
}

impl Config {
    /// A fully valid window.
    pub fn new(cells: Vec<Symbol>, origin: i64) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::Invalid("configuration window is empty".into()));
        }
        let hi = origin + cells.len() as i64 - 1;
        Ok(Config {
            cells,
            origin,
            valid_lo: origin,
            valid_hi: hi,
        })
    }

    pub fn with_validity(cells: Vec<Symbol>, origin: i64, valid_lo: i64, valid_hi: i64) -> Result<Self> {
        let mut config = Config::new(cells, origin)?;
        if valid_lo < origin || valid_hi > config.valid_hi || valid_lo > valid_hi {
            return Err(Error::Invalid(format!(
                "validity [{valid_lo}, {valid_hi}] does not fit window [{origin}, {}]",
                config.valid_hi
            )));
        }
        config.valid_lo = valid_lo;
        config.valid_hi = valid_hi;
        Ok(config)
    }

    /// Fully valid window over `[lo, hi]` filled by `f(coordinate)`.
    pub fn from_fn(lo: i64, hi: i64, f: impl FnMut(i64) -> Symbol) -> Self {
        assert!(lo <= hi, "empty window [{lo}, {hi}]");
        let cells = (lo..=hi).map(f).collect();
        Config {
            cells,
            origin: lo,
            valid_lo: lo,
            valid_hi: hi,
        }
    }

    pub fn cells(&self) -> &[Symbol] {
        &self.cells
    }

    pub fn origin(&self) -> i64 {
        self.origin
    }

    /// Last coordinate of the window.
    pub fn end(&self) -> i64 {
        self.origin + self.cells.len() as i64 - 1
    }

    pub fn valid_lo(&self) -> i64 {
        self.valid_lo
    }

    pub fn valid_hi(&self) -> i64 {
        self.valid_hi
    }

    pub fn valid_width(&self) -> i64 {
        self.valid_hi - self.valid_lo + 1
    }

    pub fn get(&self, coord: i64) -> Option<Symbol> {
        let k = coord - self.origin;
        if k < 0 {
            return None;
        }
        self.cells.get(k as usize).copied()
    }

    /// Cell at `coord`; panics outside the window.
    #[inline]
    pub fn at(&self, coord: i64) -> Symbol {
        self.cells[(coord - self.origin) as usize]
    }

    /// Cells on `[lo, hi]`, which must lie inside the window.
    pub fn slice(&self, lo: i64, hi: i64) -> &[Symbol] {
        &self.cells[(lo - self.origin) as usize..=(hi - self.origin) as usize]
    }

    pub fn is_valid_on(&self, lo: i64, hi: i64) -> bool {
        lo >= self.valid_lo && hi <= self.valid_hi
    }

    pub fn require_valid(&self, lo: i64, hi: i64) -> Result<()> {
        if self.is_valid_on(lo, hi) {
            Ok(())
        } else {
            Err(Error::Width {
                need_lo: lo,
                need_hi: hi,
                have_lo: self.valid_lo,
                have_hi: self.valid_hi,
            })
        }
    }

    pub fn check_alphabet(&self, alphabet: &Alphabet) -> Result<()> {
        match self.cells.iter().find(|&&s| !alphabet.contains(s)) {
            Some(s) => Err(Error::Invalid(format!(
                "cell symbol {s} outside alphabet of size {}",
                alphabet.size()
            ))),
            None => Ok(()),
        }
    }

    /// Copy restricted to `[lo, hi]`, which becomes fully valid.
    pub fn restrict(&self, lo: i64, hi: i64) -> Result<Config> {
        self.require_valid(lo, hi)?;
        Config::new(self.slice(lo, hi).to_vec(), lo)
    }

    /// Cell-wise image under `map`, keeping coordinates and validity.
    pub fn map(&self, mut map: impl FnMut(Symbol) -> Symbol) -> Config {
        Config {
            cells: self.cells.iter().map(|&s| map(s)).collect(),
            ..self.clone()
        }
    }

    /// The coordinate flip `i -> -i`.
    pub fn mirror(&self) -> Config {
        let mut cells = self.cells.clone();
        cells.reverse();
        Config {
            cells,
            origin: -self.end(),
            valid_lo: -self.valid_hi,
            valid_hi: -self.valid_lo,
        }
    }
}

/// `σ^k`: the cell at coordinate `i + k` moves to `i`.
pub fn shift_config(config: &Config, k: i64) -> Config {
    Config {
        cells: config.cells.clone(),
        origin: config.origin - k,
        valid_lo: config.valid_lo - k,
        valid_hi: config.valid_hi - k,
    }
}

/// One synchronous update.
///
/// Output cells are produced wherever every input the rule reads is inside
/// the window (rules that ignore the left inputs therefore keep the left
/// edge). Validity shrinks by exactly `r` on each side.
pub fn apply(rule: &Rule, config: &Config) -> Result<Config> {
    let r = rule.radius() as i64;
    if config.valid_width() <= 2 * r {
        return Err(Error::Width {
            need_lo: config.valid_lo,
            need_hi: config.valid_lo + 2 * r,
            have_lo: config.valid_lo,
            have_hi: config.valid_hi,
        });
    }
    config.check_alphabet(rule.alphabet())?;
    let keep_left = rule.one_sided() && r > 0;
    let keep_right = rule.ignores_right() && !keep_left && r > 0;
    let cells = step_cells(rule, &config.cells, keep_left, keep_right);
    let origin = if keep_left { config.origin } else { config.origin + r };
    Ok(Config {
        cells,
        origin,
        valid_lo: config.valid_lo + r,
        valid_hi: config.valid_hi - r,
    })
}

/// Raw update of a cell slice; output has `len - 2r` cells, or `len - r`
/// when one side is padded because the rule ignores it.
pub(crate) fn step_cells(rule: &Rule, cells: &[Symbol], pad_left: bool, pad_right: bool) -> Vec<Symbol> {
    let r = rule.radius();
    let size = rule.size();
    let width = 2 * r + 1;
    let modulus = size.pow(width as u32 - 1);
    let mut input: Vec<Symbol>;
    let src: &[Symbol] = if pad_left || pad_right {
        input = Vec::with_capacity(cells.len() + r);
        if pad_left {
            input.resize(r, 0);
        }
        input.extend_from_slice(cells);
        if pad_right {
            input.resize(input.len() + r, 0);
        }
        &input
    } else {
        cells
    };
    if src.len() < width {
        return Vec::new();
    }
    let table = rule.table();
    let mut out = Vec::with_capacity(src.len() + 1 - width);
    let mut index = src[..width - 1]
        .iter()
        .fold(0usize, |acc, &s| acc * size + s as usize);
    for &s in &src[width - 1..] {
        index = (index % modulus) * size + s as usize;
        out.push(table[index]);
    }
    out
}

/// Rows `x, F(x), ..., F^n(x)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceTimeDiagram {
    pub rows: Vec<Config>,
}

pub fn evolve(rule: &Rule, config: &Config, n: usize) -> Result<SpaceTimeDiagram> {
    let r = rule.radius() as i64;
    let need = 2 * r * n as i64 + 1;
    if config.valid_width() < need {
        return Err(Error::Width {
            need_lo: config.valid_lo,
            need_hi: config.valid_lo + need - 1,
            have_lo: config.valid_lo,
            have_hi: config.valid_hi,
        });
    }
    let mut rows = Vec::with_capacity(n + 1);
    rows.push(config.clone());
    for _ in 0..n {
        let next = apply(rule, rows.last().expect("non-empty"))?;
        rows.push(next);
    }
    Ok(SpaceTimeDiagram { rows })
}

/// A finite word placed at an absolute coordinate.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word {
    symbols: Vec<Symbol>,
    anchor: i64,
}

impl Word {
    pub fn new(symbols: Vec<Symbol>, anchor: i64) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::Word("word is empty".into()));
        }
        Ok(Word { symbols, anchor })
    }

    /// Parses digit strings such as `"000"` or space-separated labels.
    pub fn parse(text: &str, anchor: i64) -> Result<Self> {
        let text = text.trim();
        let parsed: Option<Vec<Symbol>> = if text.contains([' ', ',']) {
            text.split([' ', ','])
                .filter(|t| !t.is_empty())
                .map(|t| t.parse().ok())
                .collect()
        } else {
            text.chars()
                .map(|c| c.to_digit(10).map(|d| d as Symbol))
                .collect()
        };
        let symbols = parsed.ok_or_else(|| Error::Word(format!("cannot parse word {text:?}")))?;
        Word::new(symbols, anchor)
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn anchor(&self) -> i64 {
        self.anchor
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Last coordinate covered.
    pub fn end(&self) -> i64 {
        self.anchor + self.symbols.len() as i64 - 1
    }

    pub fn check_alphabet(&self, alphabet: &Alphabet) -> Result<()> {
        match self.symbols.iter().find(|&&s| !alphabet.contains(s)) {
            Some(s) => Err(Error::Word(format!("symbol {s} outside alphabet"))),
            None => Ok(()),
        }
    }

    pub fn mirror(&self) -> Word {
        let mut symbols = self.symbols.clone();
        symbols.reverse();
        Word {
            symbols,
            anchor: -self.end(),
        }
    }
}

impl std::fmt::Display for Word {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sep = if self.symbols.iter().any(|&s| s > 9) { " " } else { "" };
        let text: Vec<String> = self.symbols.iter().map(|s| s.to_string()).collect();
        write!(f, "{}", text.join(sep))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ca::builtin;

    #[test]
    fn shift_step_keeps_left_edge() {
        let x = Config::new(vec![0, 1, 1, 0], 0).unwrap();
        let y = apply(&builtin::shift(), &x).unwrap();
        assert_eq!(y.cells(), &[1, 1, 0]);
        assert_eq!(y.origin(), 0);
        assert_eq!((y.valid_lo(), y.valid_hi()), (1, 2));
    }

    #[test]
    fn too_narrow_window_names_required_width() {
        let x = Config::new(vec![0, 1], 0).unwrap();
        let err = apply(&builtin::shift(), &x).unwrap_err();
        assert!(err.to_string().contains("width 3"), "{err}");
        let err = evolve(&builtin::shift(), &Config::new(vec![0; 6], 0).unwrap(), 3).unwrap_err();
        assert!(err.to_string().contains("width 7"), "{err}");
    }

    #[test]
    fn coven_fixes_all_ones() {
        let rule = builtin::coven_rule(&[1, 0]).unwrap();
        let y = Config::new(vec![1; 12], -6).unwrap();
        let fy = apply(&rule, &y).unwrap();
        for c in fy.valid_lo()..=fy.valid_hi() {
            assert_eq!(fy.at(c), 1);
        }
    }

    #[test]
    fn coven_single_zero_spawns_110_moving_left() {
        let rule = builtin::coven_rule(&[1, 0]).unwrap();
        let z = Config::from_fn(-30, 30, |c| if c == 0 { 0 } else { 1 });
        let fz = apply(&rule, &z).unwrap();
        assert_eq!(fz.slice(-4, -2), &[1, 1, 0]);
        let d = evolve(&rule, &z, 3).unwrap();
        assert_eq!(d.rows[3].slice(-8, -6), &[1, 1, 0]);
    }

    #[test]
    fn identity_and_shift_evolution() {
        let x = Config::from_fn(-10, 10, |c| (c.rem_euclid(3) == 0) as u8);
        let d = evolve(&builtin::identity(), &x, 5).unwrap();
        for row in &d.rows {
            for c in row.valid_lo()..=row.valid_hi() {
                assert_eq!(row.at(c), x.at(c));
            }
        }
        let d = evolve(&builtin::shift(), &x, 4).unwrap();
        let shifted = shift_config(&x, 4);
        let row = &d.rows[4];
        for c in row.valid_lo()..=row.valid_hi() {
            assert_eq!(row.at(c), shifted.at(c));
        }
    }

    #[test]
    fn shift_config_round_trip() {
        let x = Config::from_fn(-3, 3, |c| (c & 1) as u8);
        assert_eq!(shift_config(&x, 0), x);
        assert_eq!(shift_config(&shift_config(&x, 1), -1), x);
    }

    #[test]
    fn word_parsing() {
        let w = Word::parse("000", -1).unwrap();
        assert_eq!(w.symbols(), &[0, 0, 0]);
        assert_eq!(w.end(), 1);
        assert_eq!(Word::parse("1 12 3", 0).unwrap().symbols(), &[1, 12, 3]);
        assert!(Word::parse("", 0).is_err());
        assert!(Word::parse("0a", 0).is_err());
        assert_eq!(w.mirror().anchor(), -1);
    }

    #[test]
    fn mirror_is_an_involution() {
        let x = Config::with_validity(vec![0, 1, 1, 0, 1], -2, -1, 2).unwrap();
        let m = x.mirror();
        assert_eq!(m.at(1), x.at(-1));
        assert_eq!((m.valid_lo(), m.valid_hi()), (-2, 1));
        assert_eq!(m.mirror(), x);
    }
}
