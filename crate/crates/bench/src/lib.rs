//! Benchmark-only crate; see the `benches/` directory.
//!
//! Kept as a separate workspace member so heavy measurement
//! dependencies never appear in the library or CLI build graphs.
