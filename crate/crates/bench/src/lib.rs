//! Benchmarks for potkit; see `benches/`.
