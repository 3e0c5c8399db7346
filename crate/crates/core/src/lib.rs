//! QAOA Max-Cut simulation and benchmarking.
//!
//! The crate is organized bottom-up:
//!
//! - [`graphs`]: problem instances, exact Max-Cut and exact graph edit distance.
//! - [`sim`]: statevector simulation of the alternating phase/mixer ansatz.
//! - [`optim`]: bound-constrained derivative-free trust-region optimizer and
//!   the multistart driver.
//! - [`bench`](mod@bench): benchmark generation, journaled (graph, depth) sweeps, resume.
//! - [`analysis`]: ratio statistics, ratio difference vs. edit distance,
//!   parameter concentration, SVG/CSV emission.
//! - [`cli`]: configuration and the `qaoa-bench` subcommands.
//!
//! Basis-state convention: qubit `i` is bit `i` of the basis index
//! (little-endian), and vertex `i` of a graph maps to qubit `i`.
//!
//! ```
//! use qaoa_core::graphs::{generate_er, maxcut_bruteforce};
//! use qaoa_core::optim::{multistart, Bounds, LocalOptions};
//! use qaoa_core::sim::{CutTable, Evaluator};
//!
//! let g = generate_er(10, 0.5, 7)?;
//! let table = CutTable::build(&g)?;
//! let mut ev = Evaluator::new(&table);
//! // the optimizer minimizes, so hand it -f over (β_1..β_p, γ_1..γ_p)
//! let r = multistart(
//!     |x: &[f64]| -ev.expectation_at(x).unwrap(),
//!     &Bounds::qaoa(2)?,
//!     20_000,
//!     1,
//!     &LocalOptions::default(),
//! )?;
//! let ratio = -r.best_value / maxcut_bruteforce(&g)?.max_value as f64;
//! assert!(ratio > 0.5 && ratio <= 1.0);
//! # Ok::<(), qaoa_core::Error>(())
//! ```

// `!(x > 0.0)` style checks deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bench;
pub mod cli;
pub mod error;
pub mod graphs;
pub mod optim;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
