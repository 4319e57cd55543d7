//! Two-layer graph-convolutional regressor:
//!
//! ```text
//! H1 = ReLU(Â X W0)
//! H2 = ReLU(Â H1 W1)
//! ŷ  = H2 w_out + b
//! ```
//!
//! trained transductively (full-graph forward, loss on masked nodes) with
//! exact analytic gradients and Adam.

mod model;
mod train;

pub use model::{backward, forward, loss, DropoutMasks, ForwardCache, GcnDims, GcnGradients, GcnModel};
pub use train::{predict, train, TrainConfig, TrainedModel};

use crate::graph::GraphError;
use crate::persist::PersistError;

#[derive(Debug, thiserror::Error)]
pub enum GcnError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("non-finite loss at epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("loss mask is empty")]
    EmptyMask,
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("adjacency fingerprint {found} does not match the training graph {expected}")]
    FingerprintMismatch { expected: String, found: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Persist(#[from] PersistError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
