//! Corpus analysis: counts, dialogue statistics, intent distributions,
//! inter-annotator agreement, supportive-fact statistics and topical
//! diversity. Every function here is pure; identical corpus bytes always
//! produce identical reports.

pub mod agreement;
pub mod diversity;
pub mod external;
pub mod facts;
pub mod intents;
pub mod stats;
pub mod tokenizer;

pub use agreement::{fleiss_kappa, krippendorff_alpha, AgreementError, AnnotationMatrix};
pub use diversity::{
    diversity_score, grouped_diversity, grouped_diversity_with, DiversityError, DiversityReport,
    EmbeddingProvider, GroupScores, DEFAULT_CLUSTER_THRESHOLD,
};
pub use external::ExternalCommandProvider;
pub use facts::{fact_chunk_histogram, fact_stats, ChunkHistogram, FactError, FactStats};
pub use intents::{intent_distribution, IntentDistribution, IntentError, IntentRow};
pub use stats::{corpus_counts, dialogue_stats, CorpusCounts, DialogueStats, StatsError};
pub use tokenizer::Tokenizer;
