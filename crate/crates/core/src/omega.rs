//! ω-semantics: acceptance of ultimately periodic words `u·v^ω` by infinite
//! runs that keep the counter ≥ 1 and visit a repeated state (`< k`,
//! 0-based) infinitely often.
//!
//! Control points are pairs `(state, phase)`, where the phase is a position
//! in `u·v` (the last phase wraps to the start of `v`). Membership is
//! decided exactly with pop summaries:
//!
//! * `sum[x][y]`: from control `x` at counter `h` one can reach `y` at
//!   counter `h-1` without dipping lower before (plus which of "saw a
//!   repeated state" / "read a letter" can happen on the way);
//! * the *level graph* has stay edges, push edges (never matched) and
//!   push-then-summary edges. Any run segment that never goes below its
//!   starting counter is a path in it, and conversely.
//!
//! An infinite accepting run exists iff a reachable strongly connected
//! component of the level graph has internal edges that together read a
//! letter and touch a repeated state.
//!
//! Explicit certificates come from a separate, bounded breadth-first
//! search (see [`find_lasso`]) and are checked by [`check_lasso`].

use std::collections::{HashMap, HashSet, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::Serialize;

use crate::automaton::{Label, Move, MoveKind, RocAutomaton};
use crate::error::{Error, Result};
use crate::finite::check_word;
use crate::words::UPWord;

const REP: u8 = 1;
const LETTER: u8 = 2;
const FULL: u8 = REP | LETTER;
const SOME: u8 = 4;

/// A lasso-shaped run: `stem` from `(start, start_counter)` followed by
/// `cycle` repeated forever. The cycle returns to its entry state and phase
/// with the counter raised by `drift ≥ 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LassoCertificate {
    pub start: usize,
    pub start_counter: usize,
    pub stem: Vec<Move>,
    pub cycle: Vec<Move>,
    pub drift: i64,
}

/// A lasso for the behavior: the initial entry's letter (or ε) and a lasso
/// on the rest of the word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BehaviorLasso {
    pub initial_label: Label,
    pub lasso: LassoCertificate,
}

#[derive(Clone, Copy)]
struct Edge {
    kind: MoveKind,
    to: usize,
    letter: bool,
}

/// Transitions between control points `(state, phase)`.
struct ControlGraph {
    phases: usize,
    letters: Vec<usize>,
    rep: Vec<u8>,
    edges: Vec<Vec<Edge>>,
}

impl ControlGraph {
    fn new(aut: &RocAutomaton, w: &UPWord) -> Self {
        let p = w.phases();
        let n = aut.n();
        let mut edges = vec![Vec::new(); n * p];
        let mut rep = vec![0; n * p];
        for q in 0..n {
            let out = aut.transitions_from(q);
            for ph in 0..p {
                let x = q * p + ph;
                if q < aut.k() {
                    rep[x] = REP;
                }
                for t in &out {
                    let (nph, letter) = match t.label {
                        None => (ph, false),
                        Some(s) if s == w.letter_at_phase(ph) => (w.advance(ph, 1), true),
                        Some(_) => continue,
                    };
                    edges[x].push(Edge { kind: t.kind, to: t.to * p + nph, letter });
                }
            }
        }
        ControlGraph { phases: p, letters: (0..p).map(|ph| w.letter_at_phase(ph)).collect(), rep, edges }
    }

    fn len(&self) -> usize {
        self.edges.len()
    }

    fn node(&self, q: usize, ph: usize) -> usize {
        q * self.phases + ph
    }

    fn step_mask(&self, x: usize, e: &Edge) -> u8 {
        self.rep[x] | self.rep[e.to] | if e.letter { LETTER } else { 0 }
    }

    /// Least fixpoint of the pop summaries.
    fn summaries(&self) -> Vec<u8> {
        let n = self.len();
        let mut sum = vec![0u8; n * n];
        loop {
            let mut changed = false;
            for x in 0..n {
                for e in &self.edges[x] {
                    let base = self.step_mask(x, e);
                    match e.kind {
                        MoveKind::Pop => {
                            changed |= join(&mut sum[x * n + e.to], SOME | base);
                        }
                        MoveKind::Stay => {
                            for y in 0..n {
                                let s = sum[e.to * n + y];
                                if s != 0 {
                                    changed |= join(&mut sum[x * n + y], s | base);
                                }
                            }
                        }
                        MoveKind::Push => {
                            for mid in 0..n {
                                let s1 = sum[e.to * n + mid];
                                if s1 == 0 {
                                    continue;
                                }
                                for y in 0..n {
                                    let s2 = sum[mid * n + y];
                                    if s2 != 0 {
                                        changed |= join(&mut sum[x * n + y], s1 | s2 | base);
                                    }
                                }
                            }
                        }
                    }
                }
            }
            if !changed {
                return sum;
            }
        }
    }

    /// Edges of the level graph with their masks.
    fn level_edges(&self, sum: &[u8]) -> Vec<Vec<(usize, u8)>> {
        let n = self.len();
        let mut out = vec![Vec::new(); n];
        for x in 0..n {
            for e in &self.edges[x] {
                let base = self.step_mask(x, e);
                match e.kind {
                    MoveKind::Pop => {}
                    MoveKind::Stay | MoveKind::Push => out[x].push((e.to, base | SOME)),
                }
                if e.kind == MoveKind::Push {
                    for y in 0..n {
                        let s = sum[e.to * n + y];
                        if s != 0 {
                            out[x].push((y, s | base));
                        }
                    }
                }
            }
        }
        out
    }
}

fn join(slot: &mut u8, m: u8) -> bool {
    let next = *slot | m;
    let changed = next != *slot;
    *slot = next;
    changed
}

fn check_up(aut: &RocAutomaton, w: &UPWord) -> Result<()> {
    check_word(aut, w.prefix())?;
    check_word(aut, w.period())
}

fn check_start(aut: &RocAutomaton, i: usize, c: usize) -> Result<()> {
    if i >= aut.n() {
        return Err(Error::StateOutOfRange { state: i + 1, n: aut.n() });
    }
    if c == 0 {
        return Err(Error::ZeroCounter);
    }
    Ok(())
}

/// Whether an infinite run from state `i` (0-based) with counter `c`
/// reads `w`, keeps the counter ≥ 1 and visits states `< k` infinitely
/// often. Weights only matter through being nonzero.
pub fn omega_member_from(aut: &RocAutomaton, i: usize, c: usize, w: &UPWord) -> Result<bool> {
    check_start(aut, i, c)?;
    Ok(OmegaMembership::new(aut, w)?.accepts(i, 0, c))
}

/// Exact ω-membership of one word from every start configuration: the
/// summaries and the level graph are computed once.
pub struct OmegaMembership {
    g: ControlGraph,
    level: Vec<Vec<(usize, u8)>>,
    /// Control points inside a strongly connected component of the level
    /// graph whose internal edges read a letter and touch a repeated state.
    good: Vec<bool>,
}

impl OmegaMembership {
    pub fn new(aut: &RocAutomaton, w: &UPWord) -> Result<Self> {
        check_up(aut, w)?;
        let g = ControlGraph::new(aut, w);
        let n = g.len();
        if aut.k() == 0 {
            return Ok(OmegaMembership { g, level: vec![Vec::new(); n], good: vec![false; n] });
        }
        let sum = g.summaries();
        let level = g.level_edges(&sum);
        let mut graph: DiGraph<(), u8> = DiGraph::with_capacity(n, 0);
        for _ in 0..n {
            graph.add_node(());
        }
        for (x, out) in level.iter().enumerate() {
            for &(y, m) in out {
                graph.add_edge(NodeIndex::new(x), NodeIndex::new(y), m);
            }
        }
        let sccs = tarjan_scc(&graph);
        let mut comp = vec![0; n];
        for (ci, scc) in sccs.iter().enumerate() {
            for v in scc {
                comp[v.index()] = ci;
            }
        }
        let mut mask = vec![0u8; sccs.len()];
        for e in graph.raw_edges() {
            let (a, b) = (e.source().index(), e.target().index());
            if comp[a] == comp[b] {
                mask[comp[a]] |= e.weight & FULL;
            }
        }
        let good = (0..n).map(|x| mask[comp[x]] == FULL).collect();
        Ok(OmegaMembership { g, level, good })
    }

    /// Whether the suffix of the word from `phase` is accepted from state
    /// `i` with counter `c ≥ 1`. Out-of-range arguments are rejected.
    pub fn accepts(&self, i: usize, phase: usize, c: usize) -> bool {
        if c == 0 || phase >= self.g.phases || i * self.g.phases >= self.g.len() {
            return false;
        }
        // level-graph closure, with up to `c-1` pops below the starting
        // counter in between
        let n = self.g.len();
        let mut frontier = vec![self.g.node(i, phase)];
        for round in 0..c {
            let mut seen = vec![false; n];
            let mut layer = Vec::new();
            let mut stack = std::mem::take(&mut frontier);
            while let Some(x) = stack.pop() {
                if std::mem::replace(&mut seen[x], true) {
                    continue;
                }
                if self.good[x] {
                    return true;
                }
                layer.push(x);
                stack.extend(self.level[x].iter().map(|&(y, _)| y));
            }
            if round + 1 == c {
                break;
            }
            frontier = layer.iter().flat_map(|&x| self.g.edges[x].iter().filter(|e| e.kind == MoveKind::Pop).map(|e| e.to)).collect();
            if frontier.is_empty() {
                break;
            }
        }
        false
    }
}

/// ω-membership in the behavior: some initial entry `(I_m, a)` consumes
/// `a` (a letter or ε) and the rest is accepted from `m` with counter 1.
pub fn behavior_omega_member(aut: &RocAutomaton, w: &UPWord) -> Result<bool> {
    check_up(aut, w)?;
    if aut.k() == 0 {
        return Ok(false);
    }
    for (m, label) in initial_entries(aut) {
        let accepted = match label {
            None => omega_member_from(aut, m, 1, w)?,
            Some(a) if a == w.letter(0) => omega_member_from(aut, m, 1, &w.drop(1))?,
            Some(_) => false,
        };
        if accepted {
            return Ok(true);
        }
    }
    Ok(false)
}

fn initial_entries(aut: &RocAutomaton) -> Vec<(usize, Label)> {
    (0..aut.n()).flat_map(|m| aut.initial(m).terms().map(move |(l, _)| (m, l))).collect()
}

/// Counter cap of the certificate search from counter `c`.
pub fn lasso_counter_bound(n: usize, c: usize, w: &UPWord) -> usize {
    c + w.prefix().len() + n * w.period().len() * (n + 2)
}

/// A minimal certificate (shortest stem, then shortest cycle) for
/// [`omega_member_from`], found by breadth-first search over
/// configurations with the counter capped at [`lasso_counter_bound`].
pub fn find_lasso(aut: &RocAutomaton, i: usize, c: usize, w: &UPWord) -> Result<Option<LassoCertificate>> {
    check_up(aut, w)?;
    check_start(aut, i, c)?;
    if aut.k() == 0 {
        return Ok(None);
    }
    let g = ControlGraph::new(aut, w);
    let cb = lasso_counter_bound(aut.n(), c, w);

    // stems: BFS over (control, counter)
    type Cfg = (usize, usize);
    let mut parent: HashMap<Cfg, Option<(Cfg, Move)>> = HashMap::new();
    let mut best_base: Vec<Option<(usize, usize)>> = vec![None; g.len()];
    let mut depth: HashMap<Cfg, usize> = HashMap::new();
    let start = (g.node(i, 0), c);
    parent.insert(start, None);
    depth.insert(start, 0);
    let mut queue = VecDeque::from([start]);
    while let Some(cfg @ (x, h)) = queue.pop_front() {
        let d = depth[&cfg];
        if best_base[x].is_none() {
            best_base[x] = Some((h, d));
        }
        for e in &g.edges[x] {
            let nh = match e.kind {
                MoveKind::Push if h == cb => continue,
                MoveKind::Pop if h == 1 => continue,
                k => (h as i64 + k.delta()) as usize,
            };
            let next = (e.to, nh);
            if parent.contains_key(&next) {
                continue;
            }
            parent.insert(next, Some((cfg, to_move(&g, x, e))));
            depth.insert(next, d + 1);
            queue.push_back(next);
        }
    }

    let mut best: Option<(usize, usize, usize, Vec<Move>)> = None;
    for x in 0..g.len() {
        let Some((h, stem_len)) = best_base[x] else { continue };
        if best.as_ref().is_some_and(|b| b.0 < stem_len) {
            continue;
        }
        if let Some(cycle) = shortest_cycle(&g, x, cb) {
            let better = match &best {
                None => true,
                Some(b) => (stem_len, cycle.len()) < (b.0, b.3.len()),
            };
            if better {
                best = Some((stem_len, x, h, cycle));
            }
        }
    }
    let Some((_, x, h, cycle)) = best else { return Ok(None) };

    let mut stem = Vec::new();
    let mut cur = (x, h);
    while let Some(Some((prev, mv))) = parent.get(&cur) {
        stem.push(*mv);
        cur = *prev;
    }
    stem.reverse();
    let drift = cycle.iter().map(|m| m.kind.delta()).sum();
    Ok(Some(LassoCertificate { start: i, start_counter: c, stem, cycle, drift }))
}

fn to_move(g: &ControlGraph, x: usize, e: &Edge) -> Move {
    let (from, ph) = (x / g.phases, x % g.phases);
    let label = e.letter.then_some(g.letters[ph]);
    Move { kind: e.kind, from, to: e.to / g.phases, label }
}

/// Shortest cycle from control `x` back to `x`, never going below the
/// entry counter, rising at most `bound`, that reads a letter and touches a
/// repeated state.
fn shortest_cycle(g: &ControlGraph, x: usize, bound: usize) -> Option<Vec<Move>> {
    type Node = (usize, usize, u8);
    let start: Node = (x, 0, g.rep[x]);
    let mut parent: HashMap<Node, (Node, Move)> = HashMap::new();
    let mut queue = VecDeque::from([start]);
    let mut seen = HashSet::from([start]);
    while let Some(node @ (y, r, m)) = queue.pop_front() {
        for e in &g.edges[y] {
            let nr = match e.kind {
                MoveKind::Push if r == bound => continue,
                MoveKind::Pop if r == 0 => continue,
                k => (r as i64 + k.delta()) as usize,
            };
            let nm = m | g.step_mask(y, e);
            let next = (e.to, nr, nm);
            if !seen.insert(next) {
                continue;
            }
            parent.insert(next, (node, to_move(g, y, e)));
            if e.to == x && nm == FULL {
                let mut cycle = Vec::new();
                let mut cur = next;
                while cur != start {
                    let (prev, mv) = parent[&cur];
                    cycle.push(mv);
                    cur = prev;
                }
                cycle.reverse();
                return Some(cycle);
            }
            queue.push_back(next);
        }
    }
    None
}

/// Independent replay of a certificate against the automaton and word.
pub fn check_lasso(aut: &RocAutomaton, i: usize, c: usize, w: &UPWord, cert: &LassoCertificate) -> bool {
    if cert.start != i || cert.start_counter != c || c == 0 || cert.cycle.is_empty() {
        return false;
    }
    let mut state = i;
    let mut counter = c as i64;
    let mut phase = 0;
    let step = |m: &Move, state: &mut usize, counter: &mut i64, phase: &mut usize| -> bool {
        if m.from != *state || !aut.has_move(m) {
            return false;
        }
        if let Some(a) = m.label {
            if a != w.letter_at_phase(*phase) {
                return false;
            }
            *phase = w.advance(*phase, 1);
        }
        *counter += m.kind.delta();
        *state = m.to;
        *counter >= 1
    };
    for m in &cert.stem {
        if !step(m, &mut state, &mut counter, &mut phase) {
            return false;
        }
    }
    let (entry_state, entry_counter, entry_phase) = (state, counter, phase);
    let mut repeated = entry_state < aut.k();
    for m in &cert.cycle {
        if !step(m, &mut state, &mut counter, &mut phase) {
            return false;
        }
        repeated |= state < aut.k();
    }
    let drift = counter - entry_counter;
    state == entry_state
        && phase == entry_phase
        && drift == cert.drift
        && drift >= 0
        && repeated
        && cert.cycle.iter().any(|m| m.label.is_some())
}

/// A certificate for [`behavior_omega_member`].
pub fn find_behavior_lasso(aut: &RocAutomaton, w: &UPWord) -> Result<Option<BehaviorLasso>> {
    check_up(aut, w)?;
    for (m, label) in initial_entries(aut) {
        let rest = match label {
            None => w.clone(),
            Some(a) if a == w.letter(0) => w.drop(1),
            Some(_) => continue,
        };
        if let Some(lasso) = find_lasso(aut, m, 1, &rest)? {
            return Ok(Some(BehaviorLasso { initial_label: label, lasso }));
        }
    }
    Ok(None)
}

/// Replays a behavior certificate.
pub fn check_behavior_lasso(aut: &RocAutomaton, w: &UPWord, cert: &BehaviorLasso) -> bool {
    let m = cert.lasso.start;
    if m >= aut.n() || aut.initial(m).coeff(cert.initial_label, aut.domain()).is_zero() {
        return false;
    }
    let rest = match cert.initial_label {
        None => w.clone(),
        Some(a) if a == w.letter(0) => w.drop(1),
        Some(_) => return false,
    };
    check_lasso(aut, m, 1, &rest, &cert.lasso)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::C_L;
    use crate::oracle::oracle_omega_member_from;

    fn lukasiewicz() -> RocAutomaton {
        RocAutomaton::parse(C_L).unwrap()
    }

    fn up(aut: &RocAutomaton, u: &str, v: &str) -> UPWord {
        UPWord::new(aut.alphabet().parse_word(u).unwrap(), aut.alphabet().parse_word(v).unwrap()).unwrap()
    }

    #[test]
    fn lukasiewicz_membership() {
        let c = lukasiewicz();
        assert!(omega_member_from(&c, 0, 1, &up(&c, "", "a")).unwrap());
        assert!(!omega_member_from(&c, 0, 1, &up(&c, "b", "a")).unwrap());
        assert!(omega_member_from(&c, 0, 2, &up(&c, "b", "a")).unwrap());
        assert!(behavior_omega_member(&c, &up(&c, "", "a")).unwrap());
        assert!(behavior_omega_member(&c, &up(&c, "", "ab")).unwrap());
        assert!(!behavior_omega_member(&c, &up(&c, "b", "a")).unwrap());
        assert!(!behavior_omega_member(&c, &up(&c, "", "b")).unwrap());
        assert!(!behavior_omega_member(&c, &up(&c, "", "abb")).unwrap());
        assert!(behavior_omega_member(&c, &up(&c, "aabb", "aab")).unwrap());
        assert!(!behavior_omega_member(&c, &up(&c, "abb", "aab")).unwrap());
    }

    #[test]
    fn repeated_bound_zero_rejects() {
        let c = lukasiewicz().with_k(0).unwrap();
        for (u, v) in [("", "a"), ("", "ab"), ("a", "a")] {
            assert!(!behavior_omega_member(&c, &up(&c, u, v)).unwrap());
            assert!(find_lasso(&c, 0, 1, &up(&c, u, v)).unwrap().is_none());
        }
    }

    #[test]
    fn minimal_push_loop_certificate() {
        let c = lukasiewicz();
        let w = up(&c, "", "a");
        let cert = find_lasso(&c, 0, 1, &w).unwrap().unwrap();
        assert!(cert.stem.is_empty());
        assert_eq!(cert.cycle, vec![Move { kind: MoveKind::Push, from: 0, to: 0, label: Some(0) }]);
        assert_eq!(cert.drift, 1);
        assert!(check_lasso(&c, 0, 1, &w, &cert));
        assert!(find_lasso(&c, 0, 1, &up(&c, "b", "a")).unwrap().is_none());
    }

    #[test]
    fn flat_cycle_certificate() {
        let c = lukasiewicz();
        let w = up(&c, "", "ab");
        let cert = find_lasso(&c, 0, 1, &w).unwrap().unwrap();
        assert_eq!(cert.drift, 0);
        assert_eq!(cert.cycle.len(), 2);
        assert!(check_lasso(&c, 0, 1, &w, &cert));
        // tampering breaks the replay
        let mut bad = cert.clone();
        bad.drift = 1;
        assert!(!check_lasso(&c, 0, 1, &w, &bad));
        let mut bad = cert;
        bad.cycle.pop();
        assert!(!check_lasso(&c, 0, 1, &w, &bad));
    }

    #[test]
    fn no_transitions_rejects() {
        let c = RocAutomaton::parse("semiring bool\nstates 2\nalphabet a b\nrepeated 2\ninitial 1 eps 1\n").unwrap();
        let w = up(&c, "", "ab");
        assert!(!behavior_omega_member(&c, &w).unwrap());
        assert!(find_lasso(&c, 0, 1, &w).unwrap().is_none());
    }

    #[test]
    fn epsilon_only_cycles_do_not_count() {
        let c = RocAutomaton::parse("semiring bool\nstates 1\nalphabet a\nrepeated 1\ninitial 1 eps 1\nstay 1 1 eps 1\n").unwrap();
        let w = up(&c, "", "a");
        assert!(!omega_member_from(&c, 0, 1, &w).unwrap());
        assert!(find_lasso(&c, 0, 1, &w).unwrap().is_none());
    }

    #[test]
    fn errors() {
        let c = lukasiewicz();
        let w = up(&c, "", "a");
        assert!(matches!(omega_member_from(&c, 1, 1, &w), Err(Error::StateOutOfRange { .. })));
        assert!(matches!(omega_member_from(&c, 0, 0, &w), Err(Error::ZeroCounter)));
    }

    #[test]
    fn dip_below_entry_needs_rotation() {
        // state 1 pops on a then pushes on a: the cycle dips below its entry
        // counter; from counter 2 the run survives, from counter 1 it dies
        let text = "semiring bool\nstates 2\nalphabet a\nrepeated 2\ninitial 1 eps 1\npop 1 2 a 1\npush 2 1 a 1\n";
        let c = RocAutomaton::parse(text).unwrap();
        let w = up(&c, "", "a");
        assert!(!omega_member_from(&c, 0, 1, &w).unwrap());
        assert!(omega_member_from(&c, 0, 2, &w).unwrap());
        let cert = find_lasso(&c, 0, 2, &w).unwrap().unwrap();
        assert!(check_lasso(&c, 0, 2, &w, &cert));
        assert_eq!(oracle_omega_member_from(&c, 0, 2, &w, None, None).unwrap().accepted, true);
        assert_eq!(oracle_omega_member_from(&c, 0, 1, &w, None, None).unwrap().accepted, false);
    }
}
