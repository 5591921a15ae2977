//! Benchmarks for the proving pipeline; see `benches/`.
