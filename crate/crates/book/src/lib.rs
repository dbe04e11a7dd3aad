//! The chapters of the guide in `book/src`, included so that `cargo test`
//! runs their snippets.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/bridges.md")]
pub mod bridges {}

#[doc = include_str!("../../../book/src/kernels.md")]
pub mod kernels {}

#[doc = include_str!("../../../book/src/bonds.md")]
pub mod bonds {}

#[doc = include_str!("../../../book/src/options.md")]
pub mod options {}

#[doc = include_str!("../../../book/src/dynamics.md")]
pub mod dynamics {}

#[doc = include_str!("../../../book/src/contagion.md")]
pub mod contagion {}

#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
