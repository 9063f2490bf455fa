//! Configuration parsing and result-document plumbing for the `sprint`
//! command-line tool. Kept as a library so integration tests can build and
//! compare the exact documents the binary writes.

pub mod config;
pub mod report;
