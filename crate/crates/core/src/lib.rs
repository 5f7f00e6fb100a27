//! Construction and exact certification of q-ary Golay complementary pairs.
//!
//! A quaternary seed pair of length `M` expands into a `4h`-ary pair of
//! length `M·2^m` through an extended Boolean function, and the expansion is
//! complementary exactly when the seed is. Every complementarity check here
//! is exact: correlations live in the ring of integers extended by a root of
//! unity and are zero-tested modulo the matching cyclotomic polynomial.

pub mod cli;
pub mod construct;
pub mod cyclotomic;
pub mod document;
pub mod par;
pub mod search;
pub mod seeds;
pub mod sequence;

pub use construct::{construct_pair, verify_theorem, ExpansionParams, SeedPair};
pub use cyclotomic::CycloElem;
pub use par::Parallelism;
pub use sequence::{QarySeq, SeqPair};
