//! Reference-based summarization evaluation with atomic content units (ACUs).
//!
//! The crate covers three things:
//!
//! * [`pipeline`]: two-stage scoring. Units are extracted from one text and
//!   checked for entailment in another; the fraction entailed is a recall
//!   score, and recall in both directions gives an F1 score.
//! * [`rouge`]: ROUGE-1/2/L, used as a baseline metric and as the matcher in
//!   unit quality analysis.
//! * [`metaeval`]: summary- and system-level correlation with human scores,
//!   paired bootstrap significance, segment-level tau-like agreement, unit
//!   quality, and candidate similarity.
//!
//! [`dataset`] reads and writes benchmark files and [`pretrain`] builds
//! regression targets for one-stage scorers.
//!
//! ```
//! use acueval::pipeline::{two_stage_recall, backends::{LexicalChecker, SentenceExtractor}};
//!
//! let reference = "The storm closed schools. Power was cut in two towns.";
//! let candidate = "Schools were closed by the storm.";
//! let result = two_stage_recall(reference, candidate, &SentenceExtractor, &LexicalChecker::default())?;
//! assert_eq!(result.acus.len(), 2);
//! assert_eq!(result.recall, 0.5);
//! # Ok::<(), acueval::Error>(())
//! ```

pub mod dataset;
pub mod error;
pub mod metaeval;
pub mod pipeline;
pub mod pretrain;
pub mod rouge;
pub mod types;

pub use error::{Error, ErrorClass, Result};
pub use types::{
    harmonic_mean, Acu, DatasetSummary, EntailmentJudgment, EvalExample, RougeScore, ScoreMatrix,
};

// Runs the guide's code blocks as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/two-stage.md")]
    mod two_stage {}
    #[doc = include_str!("../../../book/src/rouge.md")]
    mod rouge {}
    #[doc = include_str!("../../../book/src/correlation.md")]
    mod correlation {}
    #[doc = include_str!("../../../book/src/significance.md")]
    mod significance {}
    #[doc = include_str!("../../../book/src/quality.md")]
    mod quality {}
    #[doc = include_str!("../../../book/src/pretrain.md")]
    mod pretrain {}
    #[doc = include_str!("../../../book/src/datasets.md")]
    mod datasets {}
}
