//! SMOTE synthesis and graph semi-supervised relabeling of the synthetic samples.

mod graph;
mod gss;
mod smote;
mod soft;

pub use graph::{energy, graph_weights, propagate, Bandwidth, SimilarityGraph};
pub use gss::{gss_oversample, smote_oversample, GssConfig, GssOutcome, GssStatus};
pub use smote::{knn_table, smote_generate, SyntheticBatch};
pub use soft::{Origin, SoftLabeledDataset};
