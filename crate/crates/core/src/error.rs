use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid alphabet: {0}")]
    Alphabet(String),

    #[error("invalid rule: {0}")]
    Rule(String),

    #[error("invalid measure: {0}")]
    Measure(String),

    #[error("invalid word: {0}")]
    Word(String),

    /// A window does not cover the coordinates an operation needs.
    #[error("window too narrow: need valid coordinates [{need_lo}, {need_hi}] (width {}), have [{have_lo}, {have_hi}]", need_hi - need_lo + 1)]
    Width {
        need_lo: i64,
        need_hi: i64,
        have_lo: i64,
        have_hi: i64,
    },

    #[error("{what}: budget exceeded ({needed} > {limit}); {advice}")]
    Budget {
        what: &'static str,
        needed: u128,
        limit: u128,
        advice: &'static str,
    },

    #[error("center width {center_width} too narrow for radius {radius} (need 2i+1 >= r)")]
    CenterTooNarrow { center_width: usize, radius: usize },

    #[error("sample {index} failed: {source}")]
    Sample {
        index: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn budget(what: &'static str, needed: u128, limit: u128, advice: &'static str) -> Self {
        Error::Budget {
            what,
            needed,
            limit,
            advice,
        }
    }

    pub fn is_budget(&self) -> bool {
        match self {
            Error::Budget { .. } => true,
            Error::Sample { source, .. } => source.is_budget(),
            _ => false,
        }
    }
}
