//! Criterion benchmarks for gramlax; see `benches/`.
