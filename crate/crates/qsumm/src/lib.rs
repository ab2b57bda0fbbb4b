//! Query-focused extractive summarisation toolkit.
//!
//! Pipeline: pre-process sentences, represent them as tf-idf vectors with a
//! cosine-to-query feature, score or label them with linear SVR/SVM trained
//! by stochastic subgradient descent, select the top-n sentences, and
//! evaluate with a from-scratch F1 ROUGE-SU4 under k-fold cross-validation.
//! Training labels come from reference summaries via top-k, threshold,
//! dual-threshold or greedy core-extract annotation.
//!
//! The numeric core is generic over the scalar type (see [`real::Real`]);
//! the aliases below pin the `f64` instantiations used by the pipeline and
//! the CLI.

pub mod annotate;
pub mod chart;
pub mod cli;
pub mod config;
pub mod ingest;
pub mod manifest;
pub mod models;
pub mod pipeline;
pub mod real;
pub mod rouge;
pub mod textproc;
pub mod vectorspace;

/// Scalar type used by the pipeline and CLI.
pub type Score = f64;

pub type SparseVec = vectorspace::SparseVector<Score>;
pub type SparseVec32 = vectorspace::SparseVector<f32>;
pub type RougeScore = rouge::RougeScore<Score>;
pub type RougeScore32 = rouge::RougeScore<f32>;
pub type FeatureVec = models::FeatureVector<Score>;
pub type Model = models::LinearModel<Score>;
