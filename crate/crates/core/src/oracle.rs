//! Brute-force semantics used as ground truth: explicit enumeration of
//! accepting runs on the configuration graph `(state, counter, position)`,
//! and a plain lasso search for ω-words.
//!
//! Nothing here uses the matrix algebra; agreement with the solvers in
//! [`crate::finite`], [`crate::omega`] and [`crate::grammar`] is therefore
//! independent evidence.

use std::collections::{HashMap, HashSet, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::Serialize;

use crate::automaton::{Label, Move, MoveKind, RocAutomaton};
use crate::error::{Error, Result};
use crate::finite::check_word;
use crate::weights::DerivCount;
use crate::words::UPWord;

/// Default exploration budget (expanded configurations) of one run count.
pub const DEFAULT_BUDGET: usize = 5_000_000;

/// Search limits of [`oracle_count_runs`]. `None` picks the documented
/// defaults for the query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunBounds {
    pub counter: Option<usize>,
    pub steps: Option<usize>,
    pub witnesses: usize,
    pub budget: usize,
}

impl Default for RunBounds {
    fn default() -> Self {
        RunBounds { counter: None, steps: None, witnesses: 3, budget: DEFAULT_BUDGET }
    }
}

/// One accepting run: the initial entry, the moves, and the final entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunWitness {
    pub start: usize,
    pub start_counter: usize,
    /// Letter consumed by the initial entry (`None` for ε or block runs).
    pub initial_label: Label,
    pub moves: Vec<Move>,
    pub end: usize,
    /// Letter consumed by the final entry (`None` for ε or block runs).
    pub final_label: Label,
}

impl RunWitness {
    /// The letters read along the run, in order.
    pub fn letters(&self) -> Vec<usize> {
        self.initial_label.into_iter().chain(self.moves.iter().filter_map(|m| m.label)).chain(self.final_label).collect()
    }

    /// `(state, counter, position)` before the run and after every move.
    fn configs(&self) -> Vec<(usize, i64, usize)> {
        let mut out = Vec::with_capacity(self.moves.len() + 1);
        let mut c = self.start_counter as i64;
        let mut pos = self.initial_label.is_some() as usize;
        out.push((self.start, c, pos));
        for m in &self.moves {
            c += m.kind.delta();
            pos += m.label.is_some() as usize;
            out.push((m.to, c, pos));
        }
        out
    }
}

/// Why a count is infinite: an accepting run with pumpable ε-segments.
/// Indices refer to configurations of `run` (index `t` = after `t` moves).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Pump {
    /// `run` returns to the same configuration between `from` and `to`.
    Loop { run: RunWitness, from: usize, to: usize },
    /// ε-loop `rise` increases the counter and a later ε-loop `fall`
    /// decreases it; repeating both in proportion keeps the run valid.
    Balanced { run: RunWitness, rise: (usize, usize), fall: (usize, usize) },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunReport {
    pub count: DerivCount,
    /// Whether no bound cut the search (or ∞ is certified).
    pub complete: bool,
    pub witnesses: Vec<RunWitness>,
    pub pump: Option<Pump>,
}

type Config = (usize, usize, usize);

/// Tarjan's algorithm without recursion; components come out in reverse
/// topological order.
fn strongly_connected(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const NONE: usize = usize::MAX;
    let n = adj.len();
    let mut index = vec![NONE; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut next = 0;
    let mut call: Vec<(usize, usize)> = Vec::new();
    for root in 0..n {
        if index[root] != NONE {
            continue;
        }
        call.push((root, 0));
        while let Some(&mut (v, ref mut i)) = call.last_mut() {
            if *i == 0 && index[v] == NONE {
                index[v] = next;
                low[v] = next;
                next += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if let Some(&to) = adj[v].get(*i) {
                *i += 1;
                if index[to] == NONE {
                    call.push((to, 0));
                } else if on_stack[to] {
                    low[v] = low[v].min(index[to]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut scc = Vec::new();
                loop {
                    let x = stack.pop().expect("v is on the stack");
                    on_stack[x] = false;
                    scc.push(x);
                    if x == v {
                        break;
                    }
                }
                out.push(scc);
            }
        }
    }
    out
}

/// How a run ends once the counter reaches 0.
#[derive(Clone, Copy)]
enum Goal {
    /// A final entry consumes the rest of the word; one target (key 0).
    Behavior,
    /// The word is exhausted; the target key is the state.
    Block,
}

struct Start {
    node: usize,
    label: Label,
    weight: DerivCount,
}

/// The configuration graph reachable from the start configurations, with
/// the counter capped at `cb`.
struct ConfigGraph<'a> {
    aut: &'a RocAutomaton,
    w: &'a [usize],
    configs: Vec<Config>,
    /// Dense `(state, counter, position)` → node map (`usize::MAX` = absent).
    index: Vec<usize>,
    cb: usize,
    edges: Vec<Vec<(usize, Move, DerivCount)>>,
    starts: Vec<Start>,
    cut: bool,
    /// Both ε-pushes and ε-pops exist (needed for a balanced pump).
    eps_both: bool,
    rev: Vec<Vec<usize>>,
    /// Strongly connected components in reverse topological order.
    sccs: Vec<Vec<usize>>,
    cyclic: Vec<bool>,
}

impl<'a> ConfigGraph<'a> {
    fn build(aut: &'a RocAutomaton, w: &'a [usize], starts: &[(Config, Label, DerivCount)], cb: usize, budget: usize) -> Self {
        let mut g = ConfigGraph {
            aut,
            w,
            configs: Vec::new(),
            index: vec![usize::MAX; aut.n() * (cb + 1) * (w.len() + 1)],
            cb,
            edges: Vec::new(),
            starts: Vec::new(),
            cut: false,
            eps_both: aut.has_epsilon_push() && aut.has_epsilon_pop(),
            rev: Vec::new(),
            sccs: Vec::new(),
            cyclic: Vec::new(),
        };
        let prune = !aut.has_epsilon_pop();
        let mut queue = VecDeque::new();
        for &(cfg, label, weight) in starts {
            let node = g.intern(cfg, &mut queue);
            g.starts.push(Start { node, label, weight });
        }
        let transitions: Vec<_> = (0..aut.n()).map(|q| aut.transitions_from(q)).collect();
        while let Some(v) = queue.pop_front() {
            if g.configs.len() > budget {
                g.cut = true;
                break;
            }
            let (q, c, pos) = g.configs[v];
            if c == 0 {
                continue;
            }
            for t in &transitions[q] {
                let npos = match t.label {
                    None => pos,
                    Some(s) if w.get(pos) == Some(&s) => pos + 1,
                    Some(_) => continue,
                };
                let nc = (c as i64 + t.kind.delta()) as usize;
                // without ε-pops every remaining unit of counter costs a letter
                if prune && nc > w.len() - npos {
                    continue;
                }
                if nc > cb {
                    g.cut = true;
                    continue;
                }
                let to = g.intern((t.to, nc, npos), &mut queue);
                g.edges[v].push((to, Move { kind: t.kind, from: q, to: t.to, label: t.label }, t.weight.to_count()));
            }
        }
        g.components();
        g
    }

    fn components(&mut self) {
        let n = self.configs.len();
        self.rev = vec![Vec::new(); n];
        let adj: Vec<Vec<usize>> = self.edges.iter().map(|out| out.iter().map(|e| e.0).collect()).collect();
        for (v, out) in adj.iter().enumerate() {
            for &to in out {
                self.rev[to].push(v);
            }
        }
        for scc in strongly_connected(&adj) {
            let cyclic = scc.len() > 1 || adj[scc[0]].contains(&scc[0]);
            self.sccs.push(scc);
            self.cyclic.push(cyclic);
        }
    }

    fn intern(&mut self, cfg: Config, queue: &mut VecDeque<usize>) -> usize {
        let (q, c, pos) = cfg;
        let slot = (q * (self.cb + 1) + c) * (self.w.len() + 1) + pos;
        if self.index[slot] != usize::MAX {
            return self.index[slot];
        }
        let v = self.configs.len();
        self.configs.push(cfg);
        self.edges.push(Vec::new());
        self.index[slot] = v;
        queue.push_back(v);
        v
    }

    /// Terminal weight of a node for `key`, with the final entry's letter.
    fn terminal(&self, goal: Goal, key: usize, v: usize) -> Option<(DerivCount, Label)> {
        let (q, c, pos) = self.configs[v];
        if c != 0 {
            return None;
        }
        let rest = &self.w[pos..];
        match goal {
            Goal::Block => (q == key && rest.is_empty()).then_some((DerivCount::Finite(1), None)),
            Goal::Behavior => self.aut.final_entry(q).terms().find_map(|(label, pw)| {
                let fits = match label {
                    None => rest.is_empty(),
                    Some(s) => rest == [s],
                };
                fits.then(|| (pw.to_count(), label))
            }),
        }
    }

    /// Shortest path of moves from `from` to any node in `targets`, inside `allowed`.
    fn path(&self, from: usize, targets: &[bool], allowed: &[bool], nonempty: bool) -> Option<Vec<(usize, Move)>> {
        let mut parent: HashMap<usize, (usize, Move)> = HashMap::new();
        let mut seen = vec![false; self.configs.len()];
        let mut queue = VecDeque::from([from]);
        if !nonempty {
            if targets[from] {
                return Some(Vec::new());
            }
            seen[from] = true;
        }
        while let Some(v) = queue.pop_front() {
            for &(to, mv, _) in &self.edges[v] {
                if !allowed[to] {
                    continue;
                }
                if targets[to] {
                    let mut out = vec![(to, mv)];
                    let mut cur = v;
                    while cur != from || (nonempty && out.is_empty()) {
                        let Some(&(prev, m)) = parent.get(&cur) else { break };
                        out.push((cur, m));
                        cur = prev;
                    }
                    out.reverse();
                    return Some(out);
                }
                if !seen[to] {
                    seen[to] = true;
                    parent.insert(to, (v, mv));
                    queue.push_back(to);
                }
            }
        }
        None
    }

    fn report(&self, goal: Goal, key: usize, sb: usize, want: usize) -> Result<RunReport> {
        let n = self.configs.len();
        let term: Vec<Option<(DerivCount, Label)>> = (0..n).map(|v| self.terminal(goal, key, v)).collect();

        // useful = reachable (all explored nodes) and co-reachable; a
        // component of the explored graph is either wholly useful or not
        let mut useful = vec![false; n];
        let mut stack: Vec<usize> = (0..n).filter(|&v| term[v].is_some()).collect();
        while let Some(v) = stack.pop() {
            if std::mem::replace(&mut useful[v], true) {
                continue;
            }
            stack.extend(self.rev[v].iter().copied());
        }
        let sccs = &self.sccs;
        let mut pump = None;
        if let Some((scc, _)) = sccs.iter().zip(&self.cyclic).find(|(s, &c)| c && useful[s[0]]) {
            let y = *scc.iter().min().expect("nonempty component");
            let mut in_scc = vec![false; n];
            for &v in scc {
                in_scc[v] = true;
            }
            let mut at_y = vec![false; n];
            at_y[y] = true;
            let cycle = self.path(y, &at_y, &in_scc, true).expect("cyclic component");
            pump = self.splice(goal, key, &term, &useful, &[(y, cycle)]).map(|(run, marks)| Pump::Loop {
                run,
                from: marks[0].0,
                to: marks[0].1,
            });
        } else if let Some(p) = if self.eps_both { self.balanced(goal, key, &term, &useful) } else { None } {
            pump = Some(p);
        }

        let witnesses = self.witnesses(&term, &useful, want);
        if pump.is_some() {
            return Ok(RunReport { count: DerivCount::Infinite, complete: true, witnesses, pump });
        }

        // acyclic: count paths by dynamic programming in reverse topological order
        let order: Vec<usize> = sccs.iter().map(|s| s[0]).collect();
        let mut longest = vec![0usize; n];
        for &v in &order {
            if useful[v] {
                longest[v] = self.edges[v].iter().filter(|e| useful[e.0]).map(|e| longest[e.0] + 1).max().unwrap_or(0);
            }
        }
        let max_len = self.starts.iter().filter(|s| useful[s.node]).map(|s| longest[s.node]).max().unwrap_or(0);
        let mut cut = self.cut;
        let count_of = |limit: Option<usize>| -> Result<Vec<DerivCount>> {
            // limit: paths of at most `limit` moves (layered) or unlimited
            match limit {
                None => {
                    let mut cnt = vec![DerivCount::ZERO; n];
                    for &v in &order {
                        if !useful[v] {
                            continue;
                        }
                        let mut acc = term[v].map(|t| t.0).unwrap_or(DerivCount::ZERO);
                        for &(to, _, wt) in &self.edges[v] {
                            if useful[to] {
                                acc = acc.add(wt.mul(cnt[to])?)?;
                            }
                        }
                        cnt[v] = acc;
                    }
                    Ok(cnt)
                }
                Some(steps) => {
                    let mut cnt: Vec<DerivCount> = (0..n).map(|v| term[v].map(|t| t.0).unwrap_or(DerivCount::ZERO)).collect();
                    for _ in 0..steps {
                        let mut next = vec![DerivCount::ZERO; n];
                        for v in (0..n).filter(|&v| useful[v]) {
                            let mut acc = term[v].map(|t| t.0).unwrap_or(DerivCount::ZERO);
                            for &(to, _, wt) in &self.edges[v] {
                                if useful[to] {
                                    acc = acc.add(wt.mul(cnt[to])?)?;
                                }
                            }
                            next[v] = acc;
                        }
                        cnt = next;
                    }
                    Ok(cnt)
                }
            }
        };
        let cnt = if max_len > sb {
            cut = true;
            count_of(Some(sb))?
        } else {
            count_of(None)?
        };
        let mut count = DerivCount::ZERO;
        for s in &self.starts {
            count = count.add(s.weight.mul(cnt[s.node])?)?;
        }
        Ok(RunReport { count, complete: !cut, witnesses, pump: None })
    }

    /// An accepting run through the given loops (node, loop moves), in the
    /// order given; returns the run and the configuration index ranges of
    /// the loops.
    fn splice(
        &self,
        goal: Goal,
        key: usize,
        term: &[Option<(DerivCount, Label)>],
        useful: &[bool],
        loops: &[(usize, Vec<(usize, Move)>)],
    ) -> Option<(RunWitness, Vec<(usize, usize)>)> {
        let _ = goal;
        let n = self.configs.len();
        let first = loops.first()?.0;
        let mut at = vec![false; n];
        at[first] = true;
        let start = self.starts.iter().find(|s| useful[s.node] && self.path(s.node, &at, useful, false).is_some())?;
        let mut moves: Vec<Move> = self.path(start.node, &at, useful, false)?.into_iter().map(|x| x.1).collect();
        let mut marks = Vec::new();
        let mut cur = first;
        for (ix, (node, lp)) in loops.iter().enumerate() {
            if ix > 0 {
                let mut tgt = vec![false; n];
                tgt[*node] = true;
                moves.extend(self.path(cur, &tgt, useful, false)?.into_iter().map(|x| x.1));
            }
            let from = moves.len();
            moves.extend(lp.iter().map(|x| x.1));
            marks.push((from, moves.len()));
            cur = lp.last().map(|x| x.0).unwrap_or(*node);
        }
        let ends: Vec<bool> = (0..n).map(|v| term[v].is_some()).collect();
        let tail = self.path(cur, &ends, useful, false)?;
        let end = tail.last().map(|x| x.0).unwrap_or(cur);
        moves.extend(tail.into_iter().map(|x| x.1));
        let (q0, c0, _) = self.configs[start.node];
        let run = RunWitness {
            start: q0,
            start_counter: c0,
            initial_label: start.label,
            moves,
            end: self.configs[end].0,
            final_label: term[end].and_then(|t| t.1),
        };
        let _ = key;
        Some((run, marks))
    }

    /// A rising ε-loop followed (possibly much later) by a falling ε-loop
    /// on one accepting path.
    fn balanced(&self, goal: Goal, key: usize, term: &[Option<(DerivCount, Label)>], useful: &[bool]) -> Option<Pump> {
        let n = self.configs.len();
        // ε-reachability inside the useful part, per node
        let eps_reach = |v: usize| -> Vec<(usize, Vec<(usize, Move)>)> {
            let mut out = Vec::new();
            let mut parent: HashMap<usize, (usize, Move)> = HashMap::new();
            let mut queue = VecDeque::from([v]);
            let mut seen = HashSet::from([v]);
            while let Some(x) = queue.pop_front() {
                for &(to, mv, _) in &self.edges[x] {
                    if !useful[to] || mv.label.is_some() || !seen.insert(to) {
                        continue;
                    }
                    parent.insert(to, (x, mv));
                    queue.push_back(to);
                    let (q, _, _) = self.configs[to];
                    if q == self.configs[v].0 {
                        let mut path = Vec::new();
                        let mut cur = to;
                        while cur != v {
                            let (p, m) = parent[&cur];
                            path.push((cur, m));
                            cur = p;
                        }
                        path.reverse();
                        out.push((to, path));
                    }
                }
            }
            out
        };
        let mut rises: Vec<(usize, Vec<(usize, Move)>)> = Vec::new();
        let mut falls: Vec<(usize, Vec<(usize, Move)>)> = Vec::new();
        for v in (0..n).filter(|&v| useful[v] && self.configs[v].1 > 0) {
            for (z, path) in eps_reach(v) {
                if self.configs[z].1 > self.configs[v].1 && rises.iter().all(|r| r.0 != v) {
                    rises.push((v, path));
                } else if self.configs[z].1 < self.configs[v].1 && falls.iter().all(|f| f.0 != v) {
                    falls.push((v, path));
                }
            }
        }
        for (x, rise) in &rises {
            let z = rise.last().expect("nonempty loop").0;
            let mut tgt = vec![false; n];
            for (y, _) in &falls {
                tgt[*y] = true;
            }
            if let Some(p) = self.path(z, &tgt, useful, false) {
                let y = p.last().map(|e| e.0).unwrap_or(z);
                let fall = &falls.iter().find(|f| f.0 == y).expect("target is a fall start").1;
                let (run, marks) = self.splice(goal, key, term, useful, &[(*x, rise.clone()), (y, fall.clone())])?;
                return Some(Pump::Balanced { run, rise: marks[0], fall: marks[1] });
            }
        }
        None
    }

    fn witnesses(&self, term: &[Option<(DerivCount, Label)>], useful: &[bool], want: usize) -> Vec<RunWitness> {
        let mut out = Vec::new();
        if want == 0 {
            return out;
        }
        for s in &self.starts {
            if !useful[s.node] {
                continue;
            }
            let mut moves = Vec::new();
            let mut on_path = HashSet::new();
            self.collect(s, s.node, term, useful, want, &mut moves, &mut on_path, &mut out);
            if out.len() >= want {
                break;
            }
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn collect(
        &self,
        s: &Start,
        v: usize,
        term: &[Option<(DerivCount, Label)>],
        useful: &[bool],
        want: usize,
        moves: &mut Vec<Move>,
        on_path: &mut HashSet<usize>,
        out: &mut Vec<RunWitness>,
    ) {
        if out.len() >= want {
            return;
        }
        if let Some((_, fl)) = term[v] {
            let (q0, c0, _) = self.configs[s.node];
            out.push(RunWitness {
                start: q0,
                start_counter: c0,
                initial_label: s.label,
                moves: moves.clone(),
                end: self.configs[v].0,
                final_label: fl,
            });
            return;
        }
        on_path.insert(v);
        for &(to, mv, _) in &self.edges[v] {
            if useful[to] && !on_path.contains(&to) {
                moves.push(mv);
                self.collect(s, to, term, useful, want, moves, on_path, out);
                moves.pop();
            }
        }
        on_path.remove(&v);
    }
}

/// Counts the accepting runs of `aut` on `w`, weighted by the product of
/// the initial, transition and final coefficients (true counts as 1).
pub fn oracle_count_runs(aut: &RocAutomaton, w: &[usize], bounds: RunBounds) -> Result<RunReport> {
    check_word(aut, w)?;
    let n = aut.n();
    let cb = bounds.counter.unwrap_or(w.len() + n + 2).max(1);
    let sb = bounds.steps.unwrap_or((w.len() + 1) * n * cb).max(1);
    let mut starts = Vec::new();
    for i in 0..n {
        for (label, iw) in aut.initial(i).terms() {
            match label {
                None => starts.push(((i, 1, 0), label, iw.to_count())),
                Some(a) if w.first() == Some(&a) => starts.push(((i, 1, 1), label, iw.to_count())),
                Some(_) => {}
            }
        }
    }
    let g = ConfigGraph::build(aut, w, &starts, cb, bounds.budget);
    g.report(Goal::Behavior, 0, sb, bounds.witnesses)
}

/// Counts, for every pair of states `(s, t)`, the runs from state `s` with
/// counter `counter` that read exactly `w` and first reach counter 0 at
/// the end, in state `t`. Entry `[s][t]` of the result.
pub fn oracle_block_runs(aut: &RocAutomaton, counter: usize, w: &[usize], bounds: RunBounds) -> Result<Vec<Vec<RunReport>>> {
    check_word(aut, w)?;
    if counter == 0 {
        return Err(Error::ZeroCounter);
    }
    let n = aut.n();
    let cb = bounds.counter.unwrap_or(w.len() + n + 2 + counter).max(counter);
    let sb = bounds.steps.unwrap_or((w.len() + 1) * n * cb).max(1);
    let mut out = Vec::with_capacity(n);
    for s in 0..n {
        let g = ConfigGraph::build(aut, w, &[((s, counter, 0), None, DerivCount::Finite(1))], cb, bounds.budget);
        out.push((0..n).map(|t| g.report(Goal::Block, t, sb, bounds.witnesses)).collect::<Result<Vec<_>>>()?);
    }
    Ok(out)
}

/// Checks that a witness is a run of `aut` on `w` ending with counter 0
/// exactly at the end (and, for behavior runs, with nonzero initial and
/// final coefficients).
pub fn replay_run(aut: &RocAutomaton, w: &[usize], run: &RunWitness, behavior: bool) -> bool {
    if behavior && aut.initial(run.start).coeff(run.initial_label, aut.domain()).is_zero() {
        return false;
    }
    if behavior && aut.final_entry(run.end).coeff(run.final_label, aut.domain()).is_zero() {
        return false;
    }
    if run.start_counter == 0 {
        return false;
    }
    let mut state = run.start;
    let mut c = run.start_counter as i64;
    for m in &run.moves {
        if c == 0 || m.from != state || !aut.has_move(m) {
            return false;
        }
        c += m.kind.delta();
        state = m.to;
    }
    c == 0 && state == run.end && run.letters() == w
}

/// Checks a pump certificate: the run replays and the marked segments are
/// ε-loops with the claimed effect.
pub fn replay_pump(aut: &RocAutomaton, w: &[usize], pump: &Pump, behavior: bool) -> bool {
    let (run, ok) = match pump {
        Pump::Loop { run, from, to } => {
            let cfgs = run.configs();
            (run, from < to && *to < cfgs.len() && cfgs[*from] == cfgs[*to])
        }
        Pump::Balanced { run, rise, fall } => {
            let cfgs = run.configs();
            let same = |a: usize, b: usize| cfgs[a].0 == cfgs[b].0 && cfgs[a].2 == cfgs[b].2;
            let ok = rise.0 < rise.1
                && rise.1 <= fall.0
                && fall.0 < fall.1
                && fall.1 < cfgs.len()
                && same(rise.0, rise.1)
                && same(fall.0, fall.1)
                && cfgs[rise.1].1 > cfgs[rise.0].1
                && cfgs[fall.1].1 < cfgs[fall.0].1;
            (run, ok)
        }
    };
    ok && replay_run(aut, w, run, behavior)
}

/// Answer of the bounded ω-lasso search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OmegaReport {
    pub accepted: bool,
    pub complete: bool,
}

/// ω-membership of `w` in the behavior, by lasso detection on the
/// configuration graph with the counter saturated at the bound.
///
/// Saturating never invents runs (the abstract counter stays below the
/// real one), so `true` is always exact; `false` is exact when the
/// counter never reached the bound.
pub fn oracle_omega_member(aut: &RocAutomaton, w: &UPWord, counter_bound: Option<usize>, step_bound: Option<usize>) -> Result<OmegaReport> {
    check_up(aut, w)?;
    let n = aut.n();
    let cb = counter_bound.unwrap_or(1 + default_slack(n, w)).max(1);
    let mut starts = Vec::new();
    for m in 0..n {
        for (label, _) in aut.initial(m).terms() {
            match label {
                None => starts.push((m, 0, 1)),
                Some(a) if w.letter(0) == a => starts.push((m, w.advance(0, 1), 1)),
                Some(_) => {}
            }
        }
    }
    Ok(saturated_lasso(aut, w, &starts, cb, step_bound))
}

/// As [`oracle_omega_member`], from state `i` (0-based) and counter `c`.
pub fn oracle_omega_member_from(
    aut: &RocAutomaton,
    i: usize,
    c: usize,
    w: &UPWord,
    counter_bound: Option<usize>,
    step_bound: Option<usize>,
) -> Result<OmegaReport> {
    check_up(aut, w)?;
    if i >= aut.n() {
        return Err(Error::StateOutOfRange { state: i + 1, n: aut.n() });
    }
    if c == 0 {
        return Err(Error::ZeroCounter);
    }
    let cb = counter_bound.unwrap_or(c + default_slack(aut.n(), w)).max(c);
    Ok(saturated_lasso(aut, w, &[(i, 0, c)], cb, step_bound))
}

fn default_slack(n: usize, w: &UPWord) -> usize {
    w.prefix().len() + n * w.period().len() * (n + 2)
}

fn check_up(aut: &RocAutomaton, w: &UPWord) -> Result<()> {
    check_word(aut, w.prefix())?;
    check_word(aut, w.period())
}

fn saturated_lasso(aut: &RocAutomaton, w: &UPWord, starts: &[(usize, usize, usize)], cb: usize, step_bound: Option<usize>) -> OmegaReport {
    let limit = step_bound.unwrap_or(DEFAULT_BUDGET);
    let mut index: HashMap<(usize, usize, usize), NodeIndex> = HashMap::new();
    let mut graph: DiGraph<(usize, usize, usize), bool> = DiGraph::new();
    let mut queue = Vec::new();
    let mut saturated = false;
    let mut cut = false;
    let mut intern = |cfg, graph: &mut DiGraph<_, _>, queue: &mut Vec<NodeIndex>| {
        *index.entry(cfg).or_insert_with(|| {
            let ix = graph.add_node(cfg);
            queue.push(ix);
            ix
        })
    };
    for &(q, ph, c) in starts {
        intern((q, ph, c.min(cb)), &mut graph, &mut queue);
    }
    let transitions: Vec<_> = (0..aut.n()).map(|q| aut.transitions_from(q)).collect();
    while let Some(ix) = queue.pop() {
        if graph.node_count() > limit {
            cut = true;
            break;
        }
        let (q, ph, c) = graph[ix];
        for t in &transitions[q] {
            let (nph, letter) = match t.label {
                None => (ph, false),
                Some(s) if s == w.letter_at_phase(ph) => (w.advance(ph, 1), true),
                Some(_) => continue,
            };
            let nc = match t.kind {
                MoveKind::Push if c == cb => {
                    saturated = true;
                    cb
                }
                MoveKind::Push => c + 1,
                MoveKind::Stay => c,
                MoveKind::Pop if c == 1 => continue,
                MoveKind::Pop => c - 1,
            };
            let to = intern((t.to, nph, nc), &mut graph, &mut queue);
            graph.add_edge(ix, to, letter);
        }
    }
    let k = aut.k();
    let mut accepted = false;
    if !cut {
        let mut comp = vec![usize::MAX; graph.node_count()];
        let sccs = tarjan_scc(&graph);
        for (ci, scc) in sccs.iter().enumerate() {
            for v in scc {
                comp[v.index()] = ci;
            }
        }
        let mut has_letter = vec![false; sccs.len()];
        for e in graph.raw_edges() {
            let (a, b) = (e.source().index(), e.target().index());
            if comp[a] == comp[b] && e.weight {
                has_letter[comp[a]] = true;
            }
        }
        accepted = sccs.iter().enumerate().any(|(ci, scc)| has_letter[ci] && scc.iter().any(|v| graph[*v].0 < k));
    }
    OmegaReport { accepted, complete: accepted || (!saturated && !cut) }
}
