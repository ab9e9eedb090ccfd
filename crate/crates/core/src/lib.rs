//! Evolutionary synthesis of quantum-inspired kernel classifiers.
//!
//! An individual is a bitstring describing an M×N grid of gates (plus an
//! optional PCA component count). Each individual is decoded into a
//! parameterized feature map, simulated on an ideal statevector to build a
//! kernel matrix, and scored by training a kernel SVM on it. A (μ+λ)
//! NSGA-II search trades test accuracy against weighted circuit size.
//!
//! Module map:
//!
//! - [`genome`]: bitstring ⇄ gate-grid encoding.
//! - [`circuit`]: statevector simulation, quantum kernels, complexity.
//! - [`svm`]: soft-margin SVM over a precomputed kernel.
//! - [`reduce`]: min-max standardization, PCA, stratified splits, feature CSVs.
//! - [`evolve`]: fitness, genetic operators, NSGA-II and the Pareto archive.
//! - [`baseline`]: one-hidden-layer MLP trained with Adam.
//! - [`pipeline`]: run configuration, image ingestion and report writing.

pub mod baseline;
pub mod circuit;
pub mod error;
pub mod evolve;
pub mod genome;
pub mod pipeline;
pub mod reduce;
pub mod svm;
pub mod synthetic;

pub use error::{Error, Result};
