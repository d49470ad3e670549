//! Query-accounting simulator for output-sensitive Boolean matrix multiplication.
//!
//! The crate simulates, classically, a quantum query algorithm that computes the
//! Boolean product `C = AB` by repeatedly searching for a witness index `k` and
//! then enumerating every graph collision that `k` certifies. Reads of `A` and `B`
//! are the only charged resource; they are counted in a [`QueryLedger`].
//!
//! # Layout
//! - [`matrix`] and [`oracle`]: bit matrices, the charged read interface and the
//!   uncharged brute-force ground truth.
//! - [`search`]: the four search primitives (fixed-schedule Grover search,
//!   random-schedule search, find-all and find-max) with repetition boosting and
//!   failure bookkeeping.
//! - [`graph_collision`]: finding all (or any) graph collisions in a dense
//!   bipartite graph given by the complement of a bit matrix.
//! - [`bmm`]: the witness-search driver, verification and the cost envelope.
//! - [`instances`]: seeded generators with controlled output density.
//! - [`scaling`]: log-log least squares used by the benchmark fit.
//!
//! The crate is `no_std` and only needs `alloc`.
//!
//! Indices in every public contract are 1-based: a matrix of dimension `n` is
//! addressed by `1..=n`.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bmm;
pub mod graph_collision;
pub mod instances;
pub mod matrix;
pub mod oracle;
pub mod scaling;
pub mod search;

pub use bmm::{bmm, cost_bound, solve_threshold_via_bmm, verify, RoundRecord, RunReport};
pub use graph_collision::{all_gc, brute_force_gc, has_gc, ComplementGraphView, GcInstance};
pub use matrix::{BooleanMatrix, DimensionMismatch, MatrixError};
pub use oracle::{brute_force_product, count_ones, QueryLedger};
pub use search::{Mode, PrimitiveOutcome, SearchConfig, SimContext, Soundness};
