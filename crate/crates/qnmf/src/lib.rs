//! Quaternion non-negative matrix factorization for polarized data.
//!
//! Spectro-polarimetric measurements pack four Stokes parameters per
//! (band, pixel) sample. Embedding each sample as the quaternion
//! `S0 + i·S3 + j·S1 + k·S2` turns physical admissibility into membership
//! of a second-order convex cone, and linear unmixing into a low-rank
//! factorization `X = WH` with cone-constrained quaternion sources `W`
//! and non-negative real activations `H`.
//!
//! The crate provides:
//!
//! - [`quat`] / [`matrix`]: quaternion scalars and dense real/quaternion
//!   matrices with the product, transposition and norm operations the
//!   factorization needs;
//! - [`stokes`]: the admissibility cone, its bijection onto 2x2 complex
//!   Hermitian matrices and the exact Euclidean projection via the
//!   closed-form eigendecomposition;
//! - [`solver`]: multi-restart alternating least squares with closed-form
//!   updates, gradients for verification, and factor alignment metrics;
//! - [`uniqueness`]: the rank-2 admissible-transform interval analysis
//!   plus sufficient/necessary uniqueness condition checkers;
//! - [`synth`]: reproducible generators of feasible synthetic instances;
//! - [`io`] / [`config`] / [`cli`]: file formats and the `qnmf` command
//!   line tool (`generate`, `factorize`, `uniqueness`, `evaluate`,
//!   `project`).
//!
//! The `examples/` directory walks through each capability; start with
//! `blind_unmixing`.

pub mod cli;
pub mod config;
pub mod io;
pub mod matrix;
pub mod quat;
pub mod solver;
pub mod stokes;
pub mod synth;
pub mod uniqueness;

pub use matrix::{MatrixError, QuaternionMatrix, RealMatrix};
pub use quat::Quaternion;
pub use solver::{QnmfFactors, SolveReport, SolverConfig};
pub use stokes::{PolarizationDescriptor, StokesSample};
