//! Doc-tests every fenced Rust snippet in the book.
//!
//! Each chapter is included verbatim as the documentation of an empty
//! module, so `cargo test -p book-tests` compiles and runs the snippets
//! exactly as readers see them. A chapter edit that breaks a snippet breaks
//! this crate's doc tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/variables-and-closure.md")]
pub mod variables_and_closure {}

#[doc = include_str!("../../../book/src/symmetry-classes.md")]
pub mod symmetry_classes {}

#[doc = include_str!("../../../book/src/elementals-and-reduction.md")]
pub mod elementals_and_reduction {}

#[doc = include_str!("../../../book/src/exact-linear-programming.md")]
pub mod exact_linear_programming {}

#[doc = include_str!("../../../book/src/tradeoff-curve.md")]
pub mod tradeoff_curve {}

#[doc = include_str!("../../../book/src/dual-certificates.md")]
pub mod dual_certificates {}

#[doc = include_str!("../../../book/src/corner-codes.md")]
pub mod corner_codes {}

#[doc = include_str!("../../../book/src/command-line.md")]
pub mod command_line {}
