//! Room-occupancy classification toolkit.
//!
//! End-to-end machinery for multiclass sensor classification: CSV ingestion
//! and stratified splitting, seven learners behind one classifier contract,
//! class-support-weighted metrics, grid-search cross-validation with timing
//! capture, Shapley-value explanations, and a temporal-redundancy analysis.
//!
//! All stochastic components are seeded and platform-stable (see [`rng`]);
//! with the default `parallel` feature the data-parallel inner loops run on
//! rayon, and results are identical for any thread count.

// numeric kernels index several arrays by one loop variable; iterator
// rewrites obscure that
#![allow(clippy::needless_range_loop)]

pub mod data;
pub mod eda;
pub mod explain;
pub mod exec;
pub mod matrix;
pub mod metrics;
pub mod models;
pub mod tuning;
pub mod report;
pub mod rng;
