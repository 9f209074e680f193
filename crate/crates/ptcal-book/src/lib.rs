//! Runs every Rust code block of the mdbook guide as a doc-test, so
//! `cargo test --doc` keeps the book and the library in sync. mdbook itself
//! cannot execute snippets against a dependency; including the chapters as
//! module documentation makes rustdoc do it instead.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/camera-model.md")]
pub mod camera_model {}

#[doc = include_str!("../../../book/src/focal-lengths.md")]
pub mod focal_lengths {}

#[doc = include_str!("../../../book/src/principal-point.md")]
pub mod principal_point {}

#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
