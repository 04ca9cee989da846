//! Benchmark crate; see `benches/kernels.rs` for the criterion harness.
