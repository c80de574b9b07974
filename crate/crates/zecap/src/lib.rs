//! File formats and helpers for the `zecap` command line tool.
//!
//! The solver itself lives in `zecap-core`; this crate adds JSON channel
//! and candidate files, CSV bounds traces, and fixed-precision number
//! formatting so CLI output is reproducible byte for byte.

pub mod format;
