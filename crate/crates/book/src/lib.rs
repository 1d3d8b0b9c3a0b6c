//! The guide in `book/src`, one module per chapter. Building the docs or
//! running `cargo test` executes every Rust snippet of the guide.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/fluid.md")]
pub mod fluid {}

#[doc = include_str!("../../../book/src/charges.md")]
pub mod charges {}

#[doc = include_str!("../../../book/src/brackets.md")]
pub mod brackets {}

#[doc = include_str!("../../../book/src/algebra.md")]
pub mod algebra {}

#[doc = include_str!("../../../book/src/conformal.md")]
pub mod conformal {}

#[doc = include_str!("../../../book/src/transforms.md")]
pub mod transforms {}

#[doc = include_str!("../../../book/src/emtensor.md")]
pub mod emtensor {}

#[doc = include_str!("../../../book/src/schrodinger.md")]
pub mod schrodinger {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
