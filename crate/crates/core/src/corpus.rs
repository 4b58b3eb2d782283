//! Seeded random automata for the equivalence suites.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automaton::{MoveKind, RocAutomaton};
use crate::fixtures::{C_INF, C_L};
use crate::weights::{Weight, WeightDomain};
use crate::words::Alphabet;

/// Shape of generated automata.
#[derive(Debug, Clone)]
pub struct RandomSpec {
    pub max_states: usize,
    pub domain: WeightDomain,
    /// Nonzero ℕ weights to draw from (ignored over 𝔹).
    pub weights: Vec<u128>,
    /// Probability of a letter-labelled transition per (kind, i, j, letter).
    pub letter_density: f64,
    /// Probability of an ε-transition per (kind, i, j).
    pub epsilon_density: f64,
}

impl RandomSpec {
    pub fn new(domain: WeightDomain) -> Self {
        RandomSpec { max_states: 3, domain, weights: vec![1], letter_density: 0.3, epsilon_density: 0.06 }
    }

    pub fn with_weights(mut self, weights: &[u128]) -> Self {
        self.weights = weights.to_vec();
        self
    }
}

fn weight<R: Rng>(rng: &mut R, spec: &RandomSpec) -> Weight {
    match spec.domain {
        WeightDomain::Bool => Weight::Bool(true),
        WeightDomain::NatInf => Weight::Nat(*spec.weights.choose(rng).unwrap_or(&1)),
    }
}

/// One random automaton over `{a, b}`.
pub fn random_automaton<R: Rng>(rng: &mut R, spec: &RandomSpec) -> RocAutomaton {
    let n = rng.gen_range(1..=spec.max_states);
    let k = rng.gen_range(0..=n);
    let alphabet = Alphabet::new(["a", "b"]).expect("two distinct letters");
    let mut aut = RocAutomaton::new(spec.domain, n, alphabet, k).expect("k ≤ n");
    for kind in MoveKind::ALL {
        for i in 0..n {
            for j in 0..n {
                if rng.gen_bool(spec.epsilon_density) {
                    aut.add_transition(kind, i, j, None, weight(rng, spec)).expect("valid entry");
                }
                for a in 0..2 {
                    if rng.gen_bool(spec.letter_density) {
                        aut.add_transition(kind, i, j, Some(a), weight(rng, spec)).expect("valid entry");
                    }
                }
            }
        }
    }
    let first = rng.gen_range(0..n);
    aut.add_initial(first, None, weight(rng, spec)).expect("valid entry");
    for i in 0..n {
        if i != first && rng.gen_bool(0.3) {
            aut.add_initial(i, None, weight(rng, spec)).expect("valid entry");
        }
        if rng.gen_bool(0.1) {
            aut.add_initial(i, Some(rng.gen_range(0..2)), weight(rng, spec)).expect("valid entry");
        }
        if rng.gen_bool(0.5) {
            aut.add_final(i, None, weight(rng, spec)).expect("valid entry");
        }
        if rng.gen_bool(0.1) {
            aut.add_final(i, Some(rng.gen_range(0..2)), weight(rng, spec)).expect("valid entry");
        }
    }
    aut
}

/// `count` automata drawn from one seed.
pub fn random_corpus(seed: u64, count: usize, spec: &RandomSpec) -> Vec<RocAutomaton> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_automaton(&mut rng, spec)).collect()
}

/// A named corpus member.
#[derive(Debug, Clone)]
pub struct Sample {
    pub name: String,
    pub automaton: RocAutomaton,
}

fn named(prefix: &str, auts: Vec<RocAutomaton>) -> impl Iterator<Item = Sample> + '_ {
    auts.into_iter().enumerate().map(move |(i, a)| Sample { name: format!("{prefix}-{i}"), automaton: a })
}

/// The Lukasiewicz automaton and its ε-pumped variant.
pub fn fixtures() -> Vec<Sample> {
    vec![
        Sample { name: "lukasiewicz".into(), automaton: RocAutomaton::parse(C_L).expect("fixture parses") },
        Sample { name: "lukasiewicz-pumped".into(), automaton: RocAutomaton::parse(C_INF).expect("fixture parses") },
    ]
}

/// The standard equivalence corpus: the fixtures plus `per_domain` random
/// automata over each domain (ℕ^∞ weights in {1}, so run counts and
/// derivation counts coincide).
pub fn standard_corpus(seed: u64, per_domain: usize) -> Vec<Sample> {
    let mut out = fixtures();
    out.extend(named("bool", random_corpus(seed, per_domain, &RandomSpec::new(WeightDomain::Bool))));
    out.extend(named("natinf", random_corpus(seed.wrapping_add(1), per_domain, &RandomSpec::new(WeightDomain::NatInf))));
    out
}

/// Corpus for the fixpoint residual: weights in {1, 2} over ℕ^∞.
pub fn residual_corpus(seed: u64, per_domain: usize) -> Vec<Sample> {
    let mut out = fixtures();
    out.extend(named("bool", random_corpus(seed, per_domain, &RandomSpec::new(WeightDomain::Bool))));
    let spec = RandomSpec::new(WeightDomain::NatInf).with_weights(&[1, 2]);
    out.extend(named("natinf", random_corpus(seed.wrapping_add(1), per_domain, &spec)));
    out
}
