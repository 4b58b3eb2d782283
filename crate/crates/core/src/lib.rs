//! Weighted ω-restricted one-counter automata over 𝔹 and ℕ^∞.
//!
//! An automaton has states `1..=n`, a single counter symbol `p`, and three
//! transition blocks: push (`A`), stay (`C`) and pop (`B`). Its behavior is a
//! pair: the finite-word series `I·(M*)_{p,ε}·P` and the ω-word series
//! `I·(M^{ω,k})_p` under the Büchi condition with repeated states `1..=k`.
//!
//! * [`weights`]: the two semirings and matrix algebra.
//! * [`automaton`]: the data model and text format.
//! * [`finite`]: finite behavior by truncated least fixpoints.
//! * [`omega`]: ω-membership of ultimately periodic words, with certificates.
//! * [`grammar`]: the triple-pair construction to a mixed context-free grammar.
//! * [`oracle`]: brute-force run enumeration used as ground truth.
//! * [`checks`]: the property suites behind `roc validate` and `roc compare`.

pub mod automaton;
pub mod checks;
pub mod corpus;
pub mod error;
pub mod finite;
pub mod fixtures;
mod forest;
pub mod grammar;
pub mod omega;
pub mod oracle;
pub mod weights;
pub mod words;

pub use automaton::{Label, LetterPolynomial, Move, MoveKind, RocAutomaton, Transition};
pub use error::{Error, Result};
pub use finite::{finite_behavior, finite_star_block, weight_of_word, StarBlock};
pub use weights::{DerivCount, SquareMatrix, Weight, WeightDomain};
pub use words::{Alphabet, TruncatedSeries, UPWord, Word, WordSpace};
