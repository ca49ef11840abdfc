//! Local explanations of a single prediction in terms of clusters of
//! parameterised events.
//!
//! The explainer runs four stages on one instance `X`:
//!
//! 1. **Neighbourhood.** `X` plus `n_samples - 1` copies with one random
//!    segment replaced (zeros, segment mean, series mean or noise).
//! 2. **Weights.** `exp(-d² / σ²)` with `d` the DTW distance to `X`.
//! 3. **Events.** Trends and extrema from every sample, clustered per kind
//!    by k-means with k chosen by silhouette, then counted per sample into a
//!    design matrix `Z`.
//! 4. **Surrogate.** A weighted ridge regression of the black box's
//!    probability for `X`'s predicted class on `Z`. Coefficients are the
//!    cluster importances, the weighted R² is the fidelity.

pub mod cluster;
pub mod events;
mod explain;
pub mod perturb;

use serde::{Deserialize, Serialize};

pub use cluster::{build_event_matrix, cluster_events, ClusterConfig, EventClustering, KindClustering};
pub use events::{extract_peps, Extraction, ParameterisedEvent, Pep, PepConfig, PepKind};
pub use explain::{explain_instance, explain_instance_traced, LocalClusterInfo, LocalExplanation, Trace};
pub use perturb::{perturb_neighbourhood, weigh_samples, Neighbourhood, PerturbMethod, SigmaMode};

use crate::numerics::{dtw, ridge};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LomatceConfig {
    /// Neighbourhood size including the original instance.
    pub n_samples: usize,
    pub n_segments: usize,
    pub sigma: SigmaMode,
    pub dtw_radius: usize,
    pub lambda: f64,
    /// Local clusters retained per instance.
    pub top_n: usize,
    /// Fit the surrogate on weighted z-scored count columns; coefficients
    /// are mapped back to raw count units either way.
    pub standardize_columns: bool,
    pub pep: PepConfig,
    pub clustering: ClusterConfig,
}

impl Default for LomatceConfig {
    fn default() -> Self {
        LomatceConfig {
            n_samples: 150,
            n_segments: 10,
            sigma: SigmaMode::Median,
            dtw_radius: dtw::DEFAULT_RADIUS,
            lambda: ridge::DEFAULT_LAMBDA,
            top_n: 5,
            standardize_columns: true,
            pep: PepConfig::default(),
            clustering: ClusterConfig::default(),
        }
    }
}
