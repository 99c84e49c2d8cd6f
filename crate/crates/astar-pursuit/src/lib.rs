//! Sparse-signal recovery via best-first tree search over matching-pursuit
//! expansions, together with OMP and Subspace Pursuit baselines, synthetic
//! ensemble generation, block-image compression experiments and benchmark
//! metrics.
//!
//! The search engine ([`search::recover_astar_omp`]) grows candidate supports
//! as paths of a tree. Paths of different lengths are compared through one of
//! three cost models ([`cost::CostModel`]) and the tree is kept tractable by
//! per-path extension limits, a fixed-width beam and equivalent-path pruning
//! backed by a visited-set trie.

#![allow(clippy::needless_range_loop)] // dense kernels index row/column spans deliberately

pub mod baselines;
pub mod config;
pub mod cost;
pub mod error;
pub mod harness;
pub mod image;
pub mod linalg;
pub mod metrics;
pub mod search;
pub mod synth;
pub mod trie;

pub use error::{Error, Result};
pub use linalg::{Matrix, QrState, Vector};
pub use search::{recover_astar_omp, RecoveryResult, SearchParams};
pub use synth::ProblemInstance;
