//! Implementation of the `bitrect` command-line tool; the binary in
//! `main.rs` is a thin dispatcher over these modules. Exposed as a library
//! so integration tests can drive the evaluation harness directly.

pub mod bench;
pub mod bounds;
pub mod eval;
pub mod kron;
pub mod schedule;
pub mod solve;
pub mod util;
pub mod verify;
