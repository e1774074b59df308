//! Doc-tested mirror of the guide under `book/`.
//!
//! mdbook cannot run example blocks against crate dependencies, so each
//! chapter is embedded here as a module doc and `cargo test --doc` runs
//! every Rust snippet in the book. One module per chapter keeps test
//! failures traceable to their source file.

#[doc = include_str!("../../../README.md")]
pub mod readme {}

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/systems-and-signals.md")]
pub mod systems_and_signals {}

#[doc = include_str!("../../../book/src/statistics.md")]
pub mod statistics {}

#[doc = include_str!("../../../book/src/certificates.md")]
pub mod certificates {}

#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}

#[doc = include_str!("../../../book/src/design.md")]
pub mod design {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
