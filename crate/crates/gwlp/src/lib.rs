//! Exact generalized word-length patterns (GWLP) for fractions of
//! mixed-level factorial designs, and search for the runs whose removal
//! keeps aberration as small as possible.
//!
//! The engine decomposes the GWLP over pairs of runs: for each order `j` an
//! integer matrix holds every pair's contribution, the full pattern is the
//! matrix sum over `n²`, and the pattern of any sub-fraction is the same sum
//! restricted to the surviving rows. This makes removal sweeps exact and
//! cheap: no pattern is ever recomputed from scratch.
//!
//! Modules:
//! - [`design`]: spaces, runs, fractions, exact GWLP vectors, GMA comparison.
//! - [`counting`]: floating-point reference path over the complex level
//!   coding, used as an oracle in tests, plus the strength checker.
//! - [`wstack`]: the exact integer matrix engine.
//! - [`removal`]: single-removal ranking, exhaustive subset search, greedy
//!   strategy.
//! - [`io`]: design file parsing and report emission.
//!
//! The `parallel` feature (on by default) runs matrix construction and
//! subset sweeps on rayon; reports are byte-identical for any thread count.

pub mod counting;
pub mod design;
pub mod error;
pub mod io;
pub mod removal;
pub mod wstack;

pub use design::{gma_compare, DesignSpace, Fraction, GmaOrdering, GwlpExact, Run};
pub use error::{Error, Result};
