//! Meta-evaluation: how well automatic metric scores agree with human
//! judgments, plus analyses of extracted unit quality and candidate
//! diversity.

pub mod benchmark;
pub mod correlation;
pub mod levels;
pub mod quality;
pub mod significance;
pub mod similarity;
pub mod tau_like;

pub use benchmark::{benchmark, BenchmarkConfig, BenchmarkReport, BenchmarkRow};
pub use correlation::{correlate, fractional_ranks, kendall_b, pearson, spearman, Coefficient};
pub use levels::{
    correlation_at, summary_level, system_level, CorrelationReport, Level, ReportCoefficient,
};
pub use quality::{acu_quality, mean_quality, AcuQuality, Matcher};
pub use significance::{significance, SignificanceResult};
pub use similarity::{
    candidate_similarity, histogram, summarize, DistributionSummary, HistogramBin, PairSimilarity,
    SimilarityDistribution,
};
pub use tau_like::{tau_like, PreferencePair};
