//! Reference automata shipped with the crate.

/// One state, push on `a`, pop on `b`: the Lukasiewicz language.
pub const C_L: &str = include_str!("../fixtures/lukasiewicz.roc");

/// `C_L` over ℕ^∞ with an extra ε stay loop.
pub const C_INF: &str = include_str!("../fixtures/lukasiewicz_pumped.roc");
