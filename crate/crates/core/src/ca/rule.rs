use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symbols are indices into an alphabet.
pub type Symbol = u8;

/// Largest alphabet a rule may use (symbols are stored as `u8`).
pub const MAX_ALPHABET: usize = 256;

/// Largest lookup table a rule may carry.
pub const MAX_TABLE: usize = 1 << 24;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 || size > MAX_ALPHABET {
            return Err(Error::Alphabet(format!(
                "size must be in 1..={MAX_ALPHABET}, got {size}"
            )));
        }
        Ok(Alphabet { size, labels: None })
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        let mut alphabet = Alphabet::new(labels.len())?;
        let mut seen = std::collections::HashSet::new();
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(Error::Alphabet(format!("duplicate label {label:?}")));
            }
        }
        alphabet.labels = Some(labels);
        Ok(alphabet)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn label(&self, symbol: Symbol) -> String {
        match &self.labels {
            Some(labels) => labels[symbol as usize].clone(),
            None => symbol.to_string(),
        }
    }

    pub fn contains(&self, symbol: Symbol) -> bool {
        (symbol as usize) < self.size
    }
}

/// A radius-`r` local rule stored as a lookup table over `(2r+1)`-tuples.
///
/// Table index of `(x_{-r}, ..., x_r)` is the base-`|A|` number with
/// `x_{-r}` as the most significant digit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    alphabet: Alphabet,
    radius: usize,
    table: Vec<Symbol>,
    one_sided: bool,
    ignores_right: bool,
    factors: Option<Box<(Rule, Rule)>>,
}

impl Rule {
    /// Builds a rule from a complete table in lexicographic tuple order.
    pub fn from_table(alphabet: Alphabet, radius: usize, table: Vec<Symbol>) -> Result<Self> {
        let expected = table_len(alphabet.size(), radius)?;
        if table.len() != expected {
            return Err(Error::Rule(format!(
                "table has {} entries, expected {}^{} = {expected}",
                table.len(),
                alphabet.size(),
                2 * radius + 1
            )));
        }
        if let Some(pos) = table.iter().position(|&s| !alphabet.contains(s)) {
            return Err(Error::Rule(format!(
                "table entry {pos} has output {} outside alphabet of size {}",
                table[pos],
                alphabet.size()
            )));
        }
        let one_sided = ignores_side(&table, alphabet.size(), radius, Side::Left);
        let ignores_right = ignores_side(&table, alphabet.size(), radius, Side::Right);
        Ok(Rule {
            alphabet,
            radius,
            table,
            one_sided,
            ignores_right,
            factors: None,
        })
    }

    /// Builds a rule by evaluating `f` on every neighbourhood.
    pub fn from_fn(
        alphabet: Alphabet,
        radius: usize,
        mut f: impl FnMut(&[Symbol]) -> Symbol,
    ) -> Result<Self> {
        let len = table_len(alphabet.size(), radius)?;
        let width = 2 * radius + 1;
        let mut tuple = vec![0 as Symbol; width];
        let mut table = Vec::with_capacity(len);
        for index in 0..len {
            decode_into(index, alphabet.size(), &mut tuple);
            table.push(f(&tuple));
        }
        Rule::from_table(alphabet, radius, table)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn size(&self) -> usize {
        self.alphabet.size
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn table(&self) -> &[Symbol] {
        &self.table
    }

    /// True when the output never depends on the `r` left inputs.
    pub fn one_sided(&self) -> bool {
        self.one_sided
    }

    /// True when the output never depends on the `r` right inputs.
    pub fn ignores_right(&self) -> bool {
        self.ignores_right
    }

    /// The two factors when this rule was built by [`product_rule`], both
    /// widened to this rule's radius.
    ///
    /// [`product_rule`]: crate::ca::product_rule
    pub fn factors(&self) -> Option<(&Rule, &Rule)> {
        self.factors.as_deref().map(|(a, b)| (a, b))
    }

    pub(crate) fn with_factors(mut self, first: Rule, second: Rule) -> Self {
        self.factors = Some(Box::new((first, second)));
        self
    }

    #[inline]
    pub fn output(&self, neighbourhood: &[Symbol]) -> Symbol {
        debug_assert_eq!(neighbourhood.len(), 2 * self.radius + 1);
        self.table[self.index_of(neighbourhood)]
    }

    #[inline]
    pub fn output_at(&self, index: usize) -> Symbol {
        self.table[index]
    }

    #[inline]
    pub fn index_of(&self, neighbourhood: &[Symbol]) -> usize {
        neighbourhood
            .iter()
            .fold(0usize, |acc, &s| acc * self.alphabet.size + s as usize)
    }

    /// The reflected rule `x -> f(reverse(x))`; conjugate to this rule by
    /// the coordinate flip `i -> -i`.
    pub fn mirror(&self) -> Rule {
        let size = self.size();
        let width = 2 * self.radius + 1;
        let mut tuple = vec![0 as Symbol; width];
        let table = (0..self.table.len())
            .map(|index| {
                decode_into(index, size, &mut tuple);
                tuple.reverse();
                self.output(&tuple)
            })
            .collect();
        let mut mirrored = Rule {
            alphabet: self.alphabet.clone(),
            radius: self.radius,
            table,
            one_sided: self.ignores_right,
            ignores_right: self.one_sided,
            factors: None,
        };
        if let Some((a, b)) = self.factors() {
            mirrored = mirrored.with_factors(a.mirror(), b.mirror());
        }
        mirrored
    }

    /// The same map expressed with a larger radius.
    pub fn widen(&self, radius: usize) -> Result<Rule> {
        if radius < self.radius {
            return Err(Error::Rule(format!(
                "cannot widen radius {} down to {radius}",
                self.radius
            )));
        }
        if radius == self.radius {
            return Ok(self.clone());
        }
        let pad = radius - self.radius;
        let inner = 2 * self.radius + 1;
        let widened = Rule::from_fn(self.alphabet.clone(), radius, |t| {
            self.output(&t[pad..pad + inner])
        })?;
        Ok(match self.factors() {
            Some((a, b)) => widened.with_factors(a.widen(radius)?, b.widen(radius)?),
            None => widened,
        })
    }
}

/// Validates a list of `(tuple, output)` entries covering every tuple once.
pub fn make_rule(
    alphabet: Alphabet,
    radius: usize,
    entries: impl IntoIterator<Item = (Vec<Symbol>, Symbol)>,
) -> Result<Rule> {
    let len = table_len(alphabet.size(), radius)?;
    let mut table: Vec<Option<Symbol>> = vec![None; len];
    for (tuple, out) in entries {
        if tuple.len() != 2 * radius + 1 {
            return Err(Error::Rule(format!(
                "tuple {tuple:?} has length {}, expected {}",
                tuple.len(),
                2 * radius + 1
            )));
        }
        if let Some(&bad) = tuple.iter().chain(std::iter::once(&out)).find(|&&s| !alphabet.contains(s)) {
            return Err(Error::Rule(format!(
                "symbol {bad} outside alphabet of size {}",
                alphabet.size()
            )));
        }
        let index = tuple
            .iter()
            .fold(0usize, |acc, &s| acc * alphabet.size() + s as usize);
        if table[index].replace(out).is_some() {
            return Err(Error::Rule(format!("duplicate entry for tuple {tuple:?}")));
        }
    }
    let missing = table.iter().filter(|e| e.is_none()).count();
    if missing > 0 {
        return Err(Error::Rule(format!(
            "{missing} of {len} tuples have no entry"
        )));
    }
    Rule::from_table(alphabet, radius, table.into_iter().map(Option::unwrap).collect())
}

fn table_len(size: usize, radius: usize) -> Result<usize> {
    let width = 2 * radius + 1;
    let mut len: usize = 1;
    for _ in 0..width {
        len = len
            .checked_mul(size)
            .filter(|&l| l <= MAX_TABLE)
            .ok_or_else(|| {
                Error::Rule(format!(
                    "table {size}^{width} exceeds the {MAX_TABLE}-entry limit"
                ))
            })?;
    }
    Ok(len)
}

pub(crate) fn decode_into(mut index: usize, size: usize, out: &mut [Symbol]) {
    for slot in out.iter_mut().rev() {
        *slot = (index % size) as Symbol;
        index /= size;
    }
}

#[derive(Clone, Copy)]
enum Side {
    Left,
    Right,
}

fn ignores_side(table: &[Symbol], size: usize, radius: usize, side: Side) -> bool {
    if radius == 0 {
        return true;
    }
    // Outputs must agree across every value of the r ignored digits.
    let block = size.pow(radius as u32);
    let inner = size.pow(radius as u32 + 1);
    match side {
        Side::Left => (0..inner).all(|rest| {
            let first = table[rest];
            (1..block).all(|hi| table[hi * inner + rest] == first)
        }),
        Side::Right => (0..inner).all(|head| {
            let base = head * block;
            let first = table[base];
            table[base..base + block].iter().all(|&s| s == first)
        }),
    }
}
