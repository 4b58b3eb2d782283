//! The ω-restricted one-counter automaton model and its text format.
//!
//! States are 1-based in the file format and 0-based in memory. The counter
//! starts at 1 (one symbol `p`); `push`, `stay` and `pop` entries are the
//! blocks `A = M_{p,p²}`, `C = M_{p,p}` and `B = M_{p,ε}`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weights::{SquareMatrix, Weight, WeightDomain};
use crate::words::Alphabet;

/// A letter or ε (`None`).
pub type Label = Option<usize>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MoveKind {
    Push,
    Stay,
    Pop,
}

impl MoveKind {
    pub const ALL: [MoveKind; 3] = [MoveKind::Push, MoveKind::Stay, MoveKind::Pop];

    pub fn delta(self) -> i64 {
        match self {
            MoveKind::Push => 1,
            MoveKind::Stay => 0,
            MoveKind::Pop => -1,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            MoveKind::Push => "push",
            MoveKind::Stay => "stay",
            MoveKind::Pop => "pop",
        }
    }
}

/// A single step of a run: a transition of the given kind from `from` to
/// `to` reading `label`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Move {
    pub kind: MoveKind,
    pub from: usize,
    pub to: usize,
    pub label: Label,
}

/// A polynomial in `S⟨Σ ∪ {ε}⟩`; absent labels are zero.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LetterPolynomial {
    terms: BTreeMap<Label, Weight>,
}

impl LetterPolynomial {
    pub fn coeff(&self, label: Label, domain: WeightDomain) -> Weight {
        self.terms.get(&label).copied().unwrap_or(Weight::zero(domain))
    }

    pub fn accumulate(&mut self, label: Label, w: Weight) -> Result<()> {
        let next = match self.terms.get(&label) {
            Some(cur) => cur.add(w)?,
            None => w,
        };
        if next.is_zero() {
            self.terms.remove(&label);
        } else {
            self.terms.insert(label, next);
        }
        Ok(())
    }

    /// Nonzero terms, ε first then alphabet order.
    pub fn terms(&self) -> impl Iterator<Item = (Label, Weight)> + '_ {
        self.terms.iter().map(|(l, w)| (*l, *w))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// One transition of the automaton.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transition {
    pub kind: MoveKind,
    pub to: usize,
    pub label: Label,
    pub weight: Weight,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RocAutomaton {
    n: usize,
    alphabet: Alphabet,
    domain: WeightDomain,
    k: usize,
    initial: Vec<LetterPolynomial>,
    finals: Vec<LetterPolynomial>,
    push: Vec<LetterPolynomial>,
    stay: Vec<LetterPolynomial>,
    pop: Vec<LetterPolynomial>,
}

const RESERVED: [&str; 3] = ["eps", "x0", "z0"];

fn check_letter(token: &str) -> std::result::Result<(), String> {
    if RESERVED.contains(&token) || token.contains(['.', '"', '[', ']', '#', ',']) {
        Err(format!("reserved letter token {token:?}"))
    } else {
        Ok(())
    }
}

impl RocAutomaton {
    /// An automaton with all-zero vectors and blocks.
    pub fn new(domain: WeightDomain, n: usize, alphabet: Alphabet, k: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::StateOutOfRange { state: 0, n });
        }
        if k > n {
            return Err(Error::KOutOfRange { k, n });
        }
        Ok(RocAutomaton {
            n,
            alphabet,
            domain,
            k,
            initial: vec![LetterPolynomial::default(); n],
            finals: vec![LetterPolynomial::default(); n],
            push: vec![LetterPolynomial::default(); n * n],
            stay: vec![LetterPolynomial::default(); n * n],
            pop: vec![LetterPolynomial::default(); n * n],
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn domain(&self) -> WeightDomain {
        self.domain
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// The same automaton with another repeated bound.
    pub fn with_k(&self, k: usize) -> Result<Self> {
        if k > self.n {
            return Err(Error::KOutOfRange { k, n: self.n });
        }
        let mut out = self.clone();
        out.k = k;
        Ok(out)
    }

    fn check_state(&self, i: usize) -> Result<()> {
        if i < self.n {
            Ok(())
        } else {
            Err(Error::StateOutOfRange { state: i + 1, n: self.n })
        }
    }

    fn check_weight(&self, w: Weight) -> Result<()> {
        if w.domain() == self.domain {
            Ok(())
        } else {
            Err(Error::DomainMismatch(self.domain, w.domain()))
        }
    }

    fn block_mut(&mut self, kind: MoveKind) -> &mut Vec<LetterPolynomial> {
        match kind {
            MoveKind::Push => &mut self.push,
            MoveKind::Stay => &mut self.stay,
            MoveKind::Pop => &mut self.pop,
        }
    }

    /// Adds `w` to the `(i, j)` entry of a block (0-based states).
    pub fn add_transition(&mut self, kind: MoveKind, i: usize, j: usize, label: Label, w: Weight) -> Result<()> {
        self.check_state(i)?;
        self.check_state(j)?;
        self.check_weight(w)?;
        let n = self.n;
        self.block_mut(kind)[i * n + j].accumulate(label, w)
    }

    pub fn add_initial(&mut self, i: usize, label: Label, w: Weight) -> Result<()> {
        self.check_state(i)?;
        self.check_weight(w)?;
        self.initial[i].accumulate(label, w)
    }

    pub fn add_final(&mut self, i: usize, label: Label, w: Weight) -> Result<()> {
        self.check_state(i)?;
        self.check_weight(w)?;
        self.finals[i].accumulate(label, w)
    }

    pub fn entry(&self, kind: MoveKind, i: usize, j: usize) -> &LetterPolynomial {
        let block = match kind {
            MoveKind::Push => &self.push,
            MoveKind::Stay => &self.stay,
            MoveKind::Pop => &self.pop,
        };
        &block[i * self.n + j]
    }

    pub fn initial(&self, i: usize) -> &LetterPolynomial {
        &self.initial[i]
    }

    pub fn final_entry(&self, i: usize) -> &LetterPolynomial {
        &self.finals[i]
    }

    /// The scalar matrix of `label` coefficients of one block.
    pub fn label_matrix(&self, kind: MoveKind, label: Label) -> SquareMatrix {
        let mut m = SquareMatrix::zero(self.n, self.domain);
        for i in 0..self.n {
            for j in 0..self.n {
                m.set(i, j, self.entry(kind, i, j).coeff(label, self.domain)).expect("domain checked on insert");
            }
        }
        m
    }

    /// Nonzero transitions leaving state `i`, ordered by kind, target, label.
    pub fn transitions_from(&self, i: usize) -> Vec<Transition> {
        let mut out = Vec::new();
        for kind in MoveKind::ALL {
            for j in 0..self.n {
                for (label, weight) in self.entry(kind, i, j).terms() {
                    out.push(Transition { kind, to: j, label, weight });
                }
            }
        }
        out
    }

    pub fn has_epsilon_push(&self) -> bool {
        self.push.iter().any(|p| !p.coeff(None, self.domain).is_zero())
    }

    pub fn has_epsilon_pop(&self) -> bool {
        self.pop.iter().any(|p| !p.coeff(None, self.domain).is_zero())
    }

    /// The ℕ^∞ automaton with every nonzero coefficient replaced by 1.
    pub fn support(&self) -> RocAutomaton {
        self.unit_weights(WeightDomain::NatInf)
    }

    /// The 𝔹 automaton with the same nonzero coefficients.
    pub fn boolean(&self) -> RocAutomaton {
        self.unit_weights(WeightDomain::Bool)
    }

    fn unit_weights(&self, d: WeightDomain) -> RocAutomaton {
        let one = Weight::one(d);
        let map = |p: &LetterPolynomial| {
            let mut q = LetterPolynomial::default();
            for (l, _) in p.terms() {
                q.terms.insert(l, one);
            }
            q
        };
        RocAutomaton {
            n: self.n,
            alphabet: self.alphabet.clone(),
            domain: d,
            k: self.k,
            initial: self.initial.iter().map(map).collect(),
            finals: self.finals.iter().map(map).collect(),
            push: self.push.iter().map(map).collect(),
            stay: self.stay.iter().map(map).collect(),
            pop: self.pop.iter().map(map).collect(),
        }
    }

    /// Whether every nonzero coefficient is 1 (a `{0,1}⟨Σ∪{ε}⟩` automaton).
    pub fn is_zero_one(&self) -> bool {
        let all = self.initial.iter().chain(&self.finals).chain(&self.push).chain(&self.stay).chain(&self.pop);
        let one = Weight::one(self.domain);
        all.flat_map(|p| p.terms()).all(|(_, w)| w == one)
    }

    /// The letter name, or `eps`.
    pub fn label_token(&self, label: Label) -> &str {
        match label {
            None => "eps",
            Some(s) => self.alphabet.name(s),
        }
    }

    /// Renders a move as `push 1->2 a` (1-based states).
    pub fn format_move(&self, m: &Move) -> String {
        format!("{} {}->{} {}", m.kind.keyword(), m.from + 1, m.to + 1, self.label_token(m.label))
    }

    /// Whether the move is a nonzero transition of this automaton.
    pub fn has_move(&self, m: &Move) -> bool {
        m.from < self.n && m.to < self.n && !self.entry(m.kind, m.from, m.to).coeff(m.label, self.domain).is_zero()
    }

    /// Parses the line-oriented automaton format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut domain = None;
        let mut n = None;
        let mut alphabet: Option<Alphabet> = None;
        let mut k = None;
        let mut body: Vec<(usize, Vec<&str>)> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |message: String| Error::Parse { line: line_no, message };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            match tokens[0] {
                "semiring" => {
                    let [_, d] = tokens[..] else {
                        return Err(err("expected `semiring bool|natinf`".into()));
                    };
                    domain = Some(d.parse::<WeightDomain>().map_err(|_| err(format!("unknown semiring {d:?}")))?);
                }
                "states" => {
                    let [_, v] = tokens[..] else {
                        return Err(err("expected `states <n>`".into()));
                    };
                    let v: usize = v.parse().map_err(|_| err(format!("bad state count {v:?}")))?;
                    if v == 0 {
                        return Err(err("state count must be positive".into()));
                    }
                    n = Some(v);
                }
                "alphabet" => {
                    for t in &tokens[1..] {
                        check_letter(t).map_err(err)?;
                    }
                    alphabet = Some(Alphabet::new(tokens[1..].iter().copied())?);
                }
                "repeated" => {
                    let [_, v] = tokens[..] else {
                        return Err(err("expected `repeated <k>`".into()));
                    };
                    k = Some((line_no, v.parse::<usize>().map_err(|_| err(format!("bad repeated bound {v:?}")))?));
                }
                "initial" | "final" | "push" | "stay" | "pop" => body.push((line_no, tokens)),
                other => return Err(err(format!("unknown directive {other:?}"))),
            }
        }

        let missing = |what: &str| Error::Parse { line: 0, message: format!("missing `{what}` directive") };
        let domain = domain.ok_or_else(|| missing("semiring"))?;
        let n = n.ok_or_else(|| missing("states"))?;
        let alphabet = alphabet.unwrap_or(Alphabet::new(Vec::<String>::new())?);
        let (k_line, k) = k.unwrap_or((0, 0));
        if k > n {
            return Err(Error::Parse { line: k_line, message: format!("k out of range: repeated {k} exceeds states {n}") });
        }
        let mut aut = RocAutomaton::new(domain, n, alphabet, k)?;

        for (line_no, tokens) in body {
            let err = |message: String| Error::Parse { line: line_no, message };
            let state = |t: &str| -> Result<usize> {
                let v: usize = t.parse().map_err(|_| err(format!("bad state index {t:?}")))?;
                if v == 0 || v > n {
                    return Err(err(format!("state index {v} out of range 1..={n}")));
                }
                Ok(v - 1)
            };
            let label = |t: &str| -> Result<Label> {
                if t == "eps" {
                    Ok(None)
                } else {
                    aut.alphabet.lookup(t).map(Some).map_err(|_| err(format!("letter not in alphabet: {t:?}")))
                }
            };
            let weight = |t: &str| Weight::parse_in(t, domain).map_err(|_| err(format!("malformed weight {t:?}")));
            match tokens[0] {
                "initial" | "final" => {
                    let [kw, i, l, w] = tokens[..] else {
                        return Err(err(format!("expected `{} <i> <letter|eps> <weight>`", tokens[0])));
                    };
                    let (i, l, w) = (state(i)?, label(l)?, weight(w)?);
                    if kw == "initial" {
                        aut.add_initial(i, l, w)?;
                    } else {
                        aut.add_final(i, l, w)?;
                    }
                }
                kw => {
                    let [_, i, j, l, w] = tokens[..] else {
                        return Err(err(format!("expected `{kw} <i> <j> <letter|eps> <weight>`")));
                    };
                    let kind = match kw {
                        "push" => MoveKind::Push,
                        "stay" => MoveKind::Stay,
                        _ => MoveKind::Pop,
                    };
                    let (i, j, l, w) = (state(i)?, state(j)?, label(l)?, weight(w)?);
                    aut.add_transition(kind, i, j, l, w)?;
                }
            }
        }
        Ok(aut)
    }

    /// Writes the automaton in the text format (canonical order).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "semiring {}", self.domain);
        let _ = writeln!(out, "states {}", self.n);
        let _ = writeln!(out, "alphabet {}", self.alphabet.letters().join(" "));
        let _ = writeln!(out, "repeated {}", self.k);
        for (kw, vec) in [("initial", &self.initial), ("final", &self.finals)] {
            for (i, p) in vec.iter().enumerate() {
                for (l, w) in p.terms() {
                    let _ = writeln!(out, "{kw} {} {} {w}", i + 1, self.label_token(l));
                }
            }
        }
        for kind in MoveKind::ALL {
            for i in 0..self.n {
                for j in 0..self.n {
                    for (l, w) in self.entry(kind, i, j).terms() {
                        let _ = writeln!(out, "{} {} {} {} {w}", kind.keyword(), i + 1, j + 1, self.label_token(l));
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn parses_lukasiewicz_automaton() {
        let aut = RocAutomaton::parse(fixtures::C_L).unwrap();
        let d = WeightDomain::Bool;
        assert_eq!(aut.n(), 1);
        assert_eq!(aut.k(), 1);
        assert_eq!(aut.alphabet().letters(), ["a", "b"]);
        assert_eq!(aut.entry(MoveKind::Push, 0, 0).coeff(Some(0), d), Weight::Bool(true));
        assert_eq!(aut.entry(MoveKind::Pop, 0, 0).coeff(Some(1), d), Weight::Bool(true));
        assert!(aut.entry(MoveKind::Stay, 0, 0).is_zero());
        assert_eq!(aut.initial(0).coeff(None, d), Weight::Bool(true));
        assert_eq!(aut.final_entry(0).coeff(None, d), Weight::Bool(true));
    }

    #[test]
    fn text_round_trip() {
        for src in [fixtures::C_L, fixtures::C_INF] {
            let aut = RocAutomaton::parse(src).unwrap();
            assert_eq!(RocAutomaton::parse(&aut.to_text()).unwrap(), aut);
        }
    }

    #[test]
    fn duplicate_lines_accumulate() {
        let src = "semiring natinf\nstates 1\nalphabet a\nrepeated 1\nstay 1 1 a 2\nstay 1 1 a 3\n";
        let aut = RocAutomaton::parse(src).unwrap();
        assert_eq!(aut.entry(MoveKind::Stay, 0, 0).coeff(Some(0), WeightDomain::NatInf), Weight::Nat(5));
    }

    fn parse_err(src: &str) -> (usize, String) {
        match RocAutomaton::parse(src) {
            Err(Error::Parse { line, message }) => (line, message),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_input_with_line_numbers() {
        let (line, msg) = parse_err("semiring bool\nstates 2\nalphabet a b\nrepeated 3\n");
        assert_eq!(line, 4);
        assert!(msg.contains("k out of range"));

        let (line, msg) = parse_err("semiring bool\nstates 1\nalphabet a b\nrepeated 1\npush 1 1 c 1\n");
        assert_eq!(line, 5);
        assert!(msg.contains("letter not in alphabet"));

        let (line, msg) = parse_err("semiring bool\nstates 1\nalphabet a\npop 1 2 a 1\n");
        assert_eq!(line, 4);
        assert!(msg.contains("out of range"));

        let (line, msg) = parse_err("semiring bool\nstates 1\nalphabet a\npop 1 1 a 2\n");
        assert_eq!(line, 4);
        assert!(msg.contains("malformed weight"));

        let (line, msg) = parse_err("semiring bool\nstates 1\nfrobnicate\n");
        assert_eq!(line, 3);
        assert!(msg.contains("unknown directive"));

        let (_, msg) = parse_err("semiring bool\nstates 1\nalphabet eps\n");
        assert!(msg.contains("reserved"));
    }

    #[test]
    fn degenerate_automaton_is_legal() {
        let aut = RocAutomaton::parse("semiring bool\nstates 1\nalphabet a\nrepeated 0\n").unwrap();
        assert!(aut.transitions_from(0).is_empty());
    }
}
