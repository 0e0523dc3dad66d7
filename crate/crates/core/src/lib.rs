//! Exact additive-category constructions over computable coefficient rings.
//!
//! Hom-sets are matrices over a [`ring::Ring`]; on top of that the crate
//! models direct sums and idempotent splittings ([`matcat`]), twisted
//! Laurent categories and Nil objects ([`twisted`]), regular-coherence
//! certificates ([`coherence`]), the characteristic sequence at a graded
//! truncation ([`charseq`]) and sequence/limit categories of nested
//! filtrations ([`nested`]). Every positive or negative verdict carries a
//! certificate that can be re-checked by plain matrix arithmetic.

pub mod charseq;
pub mod coherence;
pub mod error;
pub mod exec;
pub mod matcat;
pub mod nested;
pub mod report;
pub mod ring;
pub mod sample;
pub mod twisted;

pub use error::{Error, Result};
