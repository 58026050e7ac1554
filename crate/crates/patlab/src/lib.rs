//! Pattern languages with length and regular constraints.
//!
//! The crate is organised bottom-up: [`constraints`] and [`regular`] hold the
//! two constraint kinds, [`pattern`] the domain types, [`matcher`] the exact
//! membership search, [`langops`] bounded language comparison, [`automata`]
//! two-counter machines and their computation encodings, and [`reductions`]
//! the pattern-pair builders together with the suites that exercise them.

pub mod automata;
pub mod constraints;
pub mod error;
pub mod json;
pub mod langops;
pub mod matcher;
pub mod pattern;
pub mod reductions;
pub mod regular;
pub mod suites;

pub use error::{Error, Result};
