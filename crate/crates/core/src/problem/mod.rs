//! Analogy problem construction and the on-disk problem-set format.

mod catalog;
mod generate;
mod io;
mod types;

pub use catalog::SceneCatalog;
pub use generate::{
    build_corpus, build_test_set, build_test_set_with, corpus_problem, make_distractors,
    OptionSpec, CORPUS_FOIL_POOL, TEST_CAR_PAIRS, TEST_SET_SIZE,
};
pub use io::{
    content_hash, read_manifest, read_problem_set, write_problem_set, Manifest, FORMAT_VERSION, MANIFEST_FILE,
    MAPS_DIR, PROBLEMS_FILE,
};
pub use types::{AnalogyProblem, Condition, OptionKind, ProblemSet, SetKind};
