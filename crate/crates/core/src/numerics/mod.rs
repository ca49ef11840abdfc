//! Numerical kernels shared by the local and global stages.

pub mod dtw;
pub mod kmeans;
pub mod linkage;
pub mod ridge;

pub use dtw::dtw_distance;
pub use kmeans::{kmeans, silhouette_select_k, KMeansResult, KSelection};
pub use linkage::{agglomerative, cut_at_percentile, percentile, Cut, Linkage, MergeStep};
pub use ridge::{r_squared, weighted_ridge, RidgeFit};
