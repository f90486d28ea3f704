//! Blocking words, set-valued evolution and surjectivity.

mod blocking;
pub(crate) mod lang;
mod sets;
mod surjective;

pub use blocking::{
    certify_blocking, certify_blocking_with, has_equicontinuous_points, min_center_width,
    search_blocking_words, search_blocking_words_with, BlockingCertificate, BlockingSearch, CertStatus,
    Equicontinuity, LeakSide, ProofMethod, Witness, DEFAULT_WORD_BUDGET,
};
pub use sets::{full_set, members, set_apply, SetConfig, SymbolSet, MAX_SET_ALPHABET};
pub use surjective::{decide_surjective, decide_surjective_with};
