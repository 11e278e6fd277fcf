//! Criterion benchmarks for tailscore; see `benches/`.
