//! Exact mechanization of the (4,3,3) exact-repair storage/bandwidth region.
//!
//! Four storage nodes hold a file so that any three recover it and any
//! failed node is rebuilt exactly from the other three. Normalizing the file
//! to one unit, a per-node storage `alpha` and per-helper repair bandwidth
//! `beta` are achievable only inside a region this crate computes, certifies
//! and cross-checks, all in exact rational arithmetic:
//!
//! - [`constraints`] generates every elemental information inequality over
//!   the sixteen variables (four stored contents, twelve repair messages),
//!   folds in the problem's equalities and relabeling symmetry, and emits the
//!   reduced inequality system.
//! - [`sweep`] minimizes `beta` at fixed `alpha` over that system and traces
//!   the boundary curve; [`lp`] is the exact simplex engine underneath.
//! - [`proof`] extracts nonnegative multipliers that telescope reduced rows
//!   into a claimed boundary line, producing a certificate that re-verifies
//!   from nothing but the class table.
//! - [`codes`] builds the three corner constructions over GF(2), verifies
//!   them bit for bit, and computes their exact entropy vectors for
//!   cross-checking against the inequality system.
//!
//! The boundary it finds is `3 alpha >= 1`, `2 alpha + beta >= 1`,
//! `4 alpha + 6 beta >= 3` and `6 beta >= 1`.
//!
//! ```
//! use rate433::constraints::ReducedSystem;
//! use rate433::proof::{extract_certificate, verify_certificate, Facet};
//! use rate433::rational::rat;
//! use rate433::sweep::BetaSolver;
//!
//! let sys = ReducedSystem::build();
//! let mut solver = BetaSolver::new(&sys);
//!
//! // The interior corner: minimum bandwidth at storage 3/8 is exactly 1/4.
//! let point = solver.min_beta(&rat(3, 8))?;
//! assert_eq!(point.beta, Some(rat(1, 4)));
//!
//! // The line through that corner is a facet, provable by a certificate
//! // that any third party can re-verify against a fresh class table.
//! let cert = extract_certificate(&sys, &Facet::new(4, 6, 3)?)?;
//! let check = verify_certificate(&cert, &sys.table)?;
//! assert_eq!(check.l1, rat(16, 1));
//! # Ok::<(), rate433::Error>(())
//! ```

pub mod codes;
pub mod constraints;
pub mod entropy;
pub mod error;
pub mod lp;
pub mod proof;
pub mod rational;
pub mod sweep;

pub use error::{Error, Result};
