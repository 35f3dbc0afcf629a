//! Acceptance checks for `sselab` live in `tests/acceptance.rs`; run them
//! with `cargo test -p sselab-validation`.
