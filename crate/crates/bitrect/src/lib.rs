//! Minimum rectangle partitions of binary matrices.
//!
//! A binary matrix is partitioned into *combinatorial rectangles*: products
//! of a row set and a column set on which the matrix is uniformly 1,
//! pairwise disjoint, covering every 1-entry. The minimum number of
//! rectangles (the binary rank) is what row-column addressing hardware,
//! biclique partitioning, and exact binary matrix factorization all ask
//! for.
//!
//! The crate provides:
//! - [`matrix`]: the matrix/rectangle/partition data model, text and JSON
//!   formats, and partition validity checking;
//! - [`bounds`]: exact lower bounds (rational rank in integer arithmetic,
//!   fooling sets);
//! - [`heuristics`]: upper bounds (duplicate grouping, multi-trial row
//!   packing);
//! - [`exact`]: a complete bounded decision procedure, an SMT-LIB v2
//!   emitter with external-solver support, and a brute-force oracle;
//! - [`sap`]: the combined anytime solver (warm start, descending exact
//!   bounds);
//! - [`benchgen`]: seeded benchmark families with known structure;
//! - [`tensor`]: Kronecker products of matrices and partitions with bound
//!   checks.

mod bits;
mod seeding;

pub mod benchgen;
pub mod bounds;
pub mod error;
pub mod exact;
pub mod heuristics;
pub mod matrix;
pub mod sap;
pub mod tensor;

pub use error::{Error, Result};
pub use matrix::{verify_partition, BinaryMatrix, Partition, Rectangle, ValidityReport};
