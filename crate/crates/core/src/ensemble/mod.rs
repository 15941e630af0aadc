//! Bootstrapped sub-training sets and the shared-trunk, multi-head classifier.

mod bootstrap;
mod io;
mod network;

pub use bootstrap::{bootstrap_subsets, SubTrainingSet};
pub use io::{read_model, write_model, MODEL_FORMAT_VERSION};
pub use network::{
    build_network, ensemble_predict, head_weights_from_scores, score_heads, train_head, Dense,
    EnsembleModel, NetworkArch, Prediction, TrainConfig, TrainTrace,
};
