//! Criterion benchmarks for the `codedcast` hot paths; see `benches/`.
