//! Sparse Jacobians and Hessians from a recorded computational graph.
//!
//! A [`graph::Graph`] is recorded once with [`graph::record`]. Sparsity
//! patterns come from full-graph set propagation ([`sparsity`]) or from
//! per-dependent subgraph searches ([`subgraph`]); values come from
//! compressed forward or reverse sweeps with a coloring ([`coloring`]), or
//! from one restricted reverse sweep per dependent. [`drivers`] ties the
//! pieces together.
//!
//! ```
//! use sparsead::drivers::{sparse_jacobian, Method, MethodConfig};
//! use sparsead::graph::record;
//!
//! let g = record(3, |x| {
//!     let s = x[0] + x[1];
//!     vec![s, x[2] * s]
//! })
//! .unwrap();
//! let j = sparse_jacobian(&g, &[1.0, 2.0, 3.0], MethodConfig::new(Method::Subgraph)).unwrap();
//! assert_eq!(j.values, vec![1.0, 1.0, 3.0, 3.0, 3.0]);
//! ```
//!
//! Node and variable indices are 0-based in the Rust API and 1-based in
//! every text format.

pub mod bench_cli;
pub mod coloring;
pub mod drivers;
pub mod error;
pub mod graph;
pub mod matrix;
pub mod parallel;
pub mod problems;
pub mod sparsity;
pub mod subgraph;
pub mod sweeps;
pub mod testing;

pub use error::{Error, Result};
