//! The user guide, one module per book chapter.
//!
//! Each chapter of `book/` is included here verbatim, so its code blocks
//! compile and run under `cargo test --doc` and the guide cannot drift from
//! the library.

#[doc = include_str!("../../../book/src/intro.md")]
pub mod intro {}

#[doc = include_str!("../../../book/src/problem-family.md")]
pub mod problem_family {}

#[doc = include_str!("../../../book/src/structured-solutions.md")]
pub mod structured_solutions {}

#[doc = include_str!("../../../book/src/power-allocation.md")]
pub mod power_allocation {}

#[doc = include_str!("../../../book/src/rotations.md")]
pub mod rotations {}

#[doc = include_str!("../../../book/src/robust-bounds.md")]
pub mod robust_bounds {}

#[doc = include_str!("../../../book/src/multihop.md")]
pub mod multihop {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
