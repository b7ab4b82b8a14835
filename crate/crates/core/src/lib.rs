//! A toolkit for the first-order theory of hereditarily finite sets:
//! an executable model of the HF universe, formula syntax with
//! locally-nameless binding, a checkable Hilbert-style proof calculus,
//! Godel coding of syntax into HF sets, object-level coding predicates,
//! a synthesizer for proofs of true ground sigma sentences, and a
//! diagonalization constructor.

pub mod hf;
pub mod calculus;
pub mod coding;
pub mod derive;
pub mod object;
pub mod parser;
pub mod semantics;
pub mod sexpr;
pub mod synthesis;
pub mod syntax;
