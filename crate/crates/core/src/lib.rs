//! Event-primitive explanations for univariate time-series classifiers.
//!
//! The crate has two layers:
//!
//! * [`lomatce`] explains a single prediction. It perturbs the instance,
//!   weights the neighbourhood by DTW similarity, extracts parameterised
//!   event primitives (trends and local extrema), clusters them and fits a
//!   weighted ridge surrogate over per-cluster event counts.
//! * [`l2gtx`] lifts a batch of local explanations to class-wise global
//!   summaries: local clusters are merged across instances, an
//!   instance-cluster importance matrix drives a greedy budgeted selection of
//!   representative instances, and the events of the covered clusters are
//!   summarised per attribute.
//!
//! Supporting pieces live in [`io`] (UCR-style loading), [`predictor`]
//! (black-box interface, built-in baseline and an external-process wire
//! protocol) and [`numerics`] (DTW, k-means, silhouette, linkage, ridge).
//!
//! The runnable programs under `examples/` walk through each capability.

pub mod cli;
pub mod error;
pub mod io;
pub mod l2gtx;
pub mod lomatce;
pub mod numerics;
pub mod oracle;
pub mod predictor;
pub mod rng;
pub mod selftest;
pub mod synthetic;

pub use error::{Error, Result};
pub use io::{Dataset, InstanceSet, TimeSeries};
pub use l2gtx::{GlobalSummary, PipelineConfig, PipelineReport};
pub use lomatce::{LocalExplanation, LomatceConfig, ParameterisedEvent, Pep, PepKind};
pub use predictor::{ExternalPredictor, NearestCentroidModel, ProbMatrix, Predictor};
