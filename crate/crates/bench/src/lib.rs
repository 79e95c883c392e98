//! Criterion benchmarks for `b92-core`; see `benches/`.
