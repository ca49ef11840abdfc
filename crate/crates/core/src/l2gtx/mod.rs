//! Class-wise global explanations assembled from local ones.
//!
//! Per class, the retained local clusters of the sampled instances are
//! merged kind by kind (agglomerative clustering of their centroids cut at a
//! percentile of the merge distances). The instance-cluster matrix `M` sums
//! the signed local importances falling in each global cluster, and the
//! global importance of a cluster is `sqrt(Σ_i |M[i][j]|)`. A greedy pass
//! then picks up to `B` instances maximising importance-weighted coverage,
//! and the events of the covered clusters are summarised attribute by
//! attribute. Global faithfulness is the mean surrogate R² of the picks.

pub mod aggregate;
pub mod merge;
pub mod pipeline;
pub mod select;

pub use aggregate::{aggregate_events, attribute_stats, global_faithfulness, mean_std, Aggregation, AttributeStats, Faithfulness};
pub use merge::{merge_clusters, GlobalCluster, MergeOptions, MergeResult};
pub use pipeline::{
    explain_locals, instance_seed, run_pipeline, synthesize, synthesize_class, ClassLocals, GlobalSummary, LocalBatch,
    PercentileRun, PipelineConfig, PipelineReport, SummaryCluster,
};
pub use select::{build_matrix, global_importance, marginal_gain, select_instances, InstanceClusterMatrix, SelectedSet};
