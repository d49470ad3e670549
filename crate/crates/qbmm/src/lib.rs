//! Std companion to `qbmm-core`: file formats, benchmark sweeps, scaling fits
//! and validation suites behind the `qbmm` command line.

pub mod bench;
pub mod format;
pub mod fit;
pub mod validate;
