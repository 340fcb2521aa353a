//! Computational workbench for additive and multiplicative largeness in
//! (ℕ,+), (ℕ,·), (ℤ,+) and finite fields.
//!
//! Asymptotic notions (syndetic, thick, IP, density) are never proved by a
//! finite run. Every result here carries the horizon or bound it was checked
//! at, and a search that comes back empty is reported as inconclusive within
//! that bound.

pub mod arithfun;
pub mod certificate;
pub mod constructions;
pub mod density;
pub mod error;
pub mod experiment;
pub mod finitefield;
pub mod groundset;
pub mod largeness;
pub mod normform;
pub mod par;
pub mod patterns;
pub mod registry;
pub mod verify;

pub use error::{Error, Result};
pub use groundset::{GroundKind, GroundStructure, IntegerWindowSet, LazySet, Set, SetHandle};
