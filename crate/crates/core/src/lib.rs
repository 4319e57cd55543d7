//! Citation-count prediction toolkit.
//!
//! The pipeline runs bibliographic ingestion ([`corpus`]), topic modelling
//! ([`topics`]), citation-graph construction ([`graph`]), feature
//! engineering ([`features`]), a two-layer graph-convolutional regressor
//! ([`gcn`]) with four comparison models ([`baselines`]), and the
//! evaluation protocol ([`eval`]). [`synth`] generates corpora with planted
//! citation dynamics and [`pipeline`] strings the stages together.

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod corpus;
pub mod eval;
pub mod features;
pub mod gcn;
pub mod graph;
pub mod optim;
pub mod persist;
pub mod pipeline;
pub mod seed;
pub mod synth;
pub mod topics;
