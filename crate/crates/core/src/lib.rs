//! Region recommendation by two-stage similarity filtering.
//!
//! Given a table of regions described by nine indicators, and a target
//! region, the engine
//!
//! 1. min-max scales every indicator over the whole table ([`preprocess`]),
//! 2. keeps the `p` regions closest to the target on infection rate ([`neighbor`]),
//! 3. scores each of them against the target with a per-dimension Pearson
//!    similarity on the prevention-basis and social-resilience indicators
//!    ([`similarity`]),
//! 4. clusters those (alpha, beta) similarity points together with the target
//!    and recommends the regions that land in the target's cluster
//!    ([`clustering`]).
//!
//! A plain K-means over all regions serves as the comparison baseline, and
//! [`pipeline::run_stdsa`] ties everything into one report.

pub mod clustering;
pub mod dataset;
pub mod export;
pub mod ingest;
pub mod neighbor;
pub mod pipeline;
pub mod preprocess;
pub mod registry;
pub mod schema;
pub mod similarity;

pub use clustering::{ClusterCount, ClusterResult, KMeansConfig};
pub use dataset::{Dataset, IndicatorTable, RegionRecord};
pub use neighbor::{first_filter, NeighborSet};
pub use pipeline::{run_stdsa, RecommendationReport, StdsaOptions};
pub use preprocess::{normalize, NormalizedDataset};
pub use registry::StrategyRegistry;
pub use schema::{default_schema, Dimension, Indicator, IndicatorSchema};
pub use similarity::{dimension_similarity, pearson, similarity_profile, SimilarityProfile};
