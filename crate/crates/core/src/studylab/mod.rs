//! Synthetic-study machinery: space-filling designs, prior-drawn truths,
//! dataset generation, and the generate-calibrate-score loop.

pub mod lhs;
pub mod study;
pub mod truth;

pub use lhs::lhs;
pub use study::{derived_seed, run_study, StudyReport};
pub use truth::{
    draw_truth, eval_blocks, generate_dataset, GeneratedData, MissingPattern, SyntheticTruth,
    TruthConfig,
};
