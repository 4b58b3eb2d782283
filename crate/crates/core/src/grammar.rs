//! The triple-pair grammar of an automaton: variables `[i,p,j]` derive the
//! words of counter-1-to-0 runs from `i` to `j`, variables `[i,p]` drive
//! infinite derivations from state `i`.
//!
//! Finite derivations are counted exactly on a shared parse forest; infinite
//! derivations of `u·v^ω` are searched as lassos over `([i,p], phase)` with
//! finite segments up to a given length.

use std::collections::HashMap;
use std::fmt::Write as _;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::Deserialize;

use crate::automaton::{Label, MoveKind, RocAutomaton};
use crate::error::{Error, Result};
use crate::forest::Forest;
use crate::weights::DerivCount;
use crate::words::{Alphabet, UPWord};

/// Default maximal length of a finite segment in ω-derivations.
pub const DEFAULT_SEGMENT_BOUND: usize = 12;

/// Variables for finite derivations (0-based indices).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum XSymbol {
    Start,
    Triple(usize, usize),
}

/// Variables for infinite derivations (0-based indices).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ZSymbol {
    Start,
    Pair(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum XItem {
    Letter(usize),
    Var(XSymbol),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProductionX {
    pub lhs: XSymbol,
    pub rhs: Vec<XItem>,
}

/// `lhs → letter? x? next`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProductionZ {
    pub lhs: ZSymbol,
    pub letter: Option<usize>,
    pub x: Option<XSymbol>,
    pub next: ZSymbol,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedGrammar {
    pub n: usize,
    pub alphabet: Alphabet,
    /// Variables `[i,p]` with `i < k` (0-based) are repeated.
    pub k: usize,
    pub productions_x: Vec<ProductionX>,
    pub productions_z: Vec<ProductionZ>,
}

fn letter_item(l: Label) -> Option<XItem> {
    l.map(XItem::Letter)
}

/// Builds the grammar `G_k` of `aut`. Only the support of the weights
/// matters.
pub fn triple_pair_construct(aut: &RocAutomaton) -> MixedGrammar {
    let n = aut.n();
    let terms = |kind: MoveKind, i: usize, j: usize| aut.entry(kind, i, j).terms().map(|(l, _)| l).collect::<Vec<_>>();
    let mut px = Vec::new();

    // x0 → a [m1,p,m2] b
    for m1 in 0..n {
        for m2 in 0..n {
            for (a, _) in aut.initial(m1).terms() {
                for (b, _) in aut.final_entry(m2).terms() {
                    let mut rhs: Vec<XItem> = letter_item(a).into_iter().collect();
                    rhs.push(XItem::Var(XSymbol::Triple(m1, m2)));
                    rhs.extend(letter_item(b));
                    px.push(ProductionX { lhs: XSymbol::Start, rhs });
                }
            }
        }
    }
    // [i,p,j] → a [m1,p,m2][m2,p,j]
    for i in 0..n {
        for j in 0..n {
            for m1 in 0..n {
                for m2 in 0..n {
                    for a in terms(MoveKind::Push, i, m1) {
                        let mut rhs: Vec<XItem> = letter_item(a).into_iter().collect();
                        rhs.push(XItem::Var(XSymbol::Triple(m1, m2)));
                        rhs.push(XItem::Var(XSymbol::Triple(m2, j)));
                        px.push(ProductionX { lhs: XSymbol::Triple(i, j), rhs });
                    }
                }
            }
        }
    }
    // [i,p,j] → a [m,p,j]
    for i in 0..n {
        for j in 0..n {
            for m in 0..n {
                for a in terms(MoveKind::Stay, i, m) {
                    let mut rhs: Vec<XItem> = letter_item(a).into_iter().collect();
                    rhs.push(XItem::Var(XSymbol::Triple(m, j)));
                    px.push(ProductionX { lhs: XSymbol::Triple(i, j), rhs });
                }
            }
        }
    }
    // [i,p,j] → a
    for i in 0..n {
        for j in 0..n {
            for a in terms(MoveKind::Pop, i, j) {
                px.push(ProductionX { lhs: XSymbol::Triple(i, j), rhs: letter_item(a).into_iter().collect() });
            }
        }
    }

    let mut pz: Vec<ProductionZ> = Vec::new();
    let mut add_z = |p: ProductionZ| {
        if !pz.contains(&p) {
            pz.push(p);
        }
    };
    // z0 → a [m,p]
    for m in 0..n {
        for (a, _) in aut.initial(m).terms() {
            add_z(ProductionZ { lhs: ZSymbol::Start, letter: a, x: None, next: ZSymbol::Pair(m) });
        }
    }
    // [i,p] → a [m,p] from pushes that are never matched
    for i in 0..n {
        for m in 0..n {
            for a in terms(MoveKind::Push, i, m) {
                add_z(ProductionZ { lhs: ZSymbol::Pair(i), letter: a, x: None, next: ZSymbol::Pair(m) });
            }
        }
    }
    // [i,p] → a [m1,p,m2][m2,p]
    for i in 0..n {
        for m1 in 0..n {
            for m2 in 0..n {
                for a in terms(MoveKind::Push, i, m1) {
                    add_z(ProductionZ { lhs: ZSymbol::Pair(i), letter: a, x: Some(XSymbol::Triple(m1, m2)), next: ZSymbol::Pair(m2) });
                }
            }
        }
    }
    // [i,p] → a [m,p] from stays
    for i in 0..n {
        for m in 0..n {
            for a in terms(MoveKind::Stay, i, m) {
                add_z(ProductionZ { lhs: ZSymbol::Pair(i), letter: a, x: None, next: ZSymbol::Pair(m) });
            }
        }
    }

    MixedGrammar { n, alphabet: aut.alphabet().clone(), k: aut.k(), productions_x: px, productions_z: pz }
}

impl MixedGrammar {
    /// Whether every production has one of the shapes the construction
    /// emits, with indices in range.
    pub fn well_formed(&self) -> bool {
        let n = self.n;
        let sigma = self.alphabet.len();
        let triple = |x: &XItem| matches!(x, XItem::Var(XSymbol::Triple(i, j)) if *i < n && *j < n);
        let letter = |x: &XItem| matches!(x, XItem::Letter(a) if *a < sigma);
        let x_ok = self.productions_x.iter().all(|p| {
            let rhs = &p.rhs;
            match p.lhs {
                XSymbol::Start => {
                    // a? [m1,p,m2] b?
                    let body: Vec<&XItem> = rhs.iter().filter(|x| !letter(x)).collect();
                    body.len() == 1
                        && triple(body[0])
                        && rhs.len() <= 3
                        && rhs.iter().position(&triple).is_some_and(|at| at <= 1 && rhs.len() - at <= 2)
                }
                XSymbol::Triple(i, j) if i < n && j < n => {
                    let vars = match rhs.first() {
                        Some(x) if letter(x) => &rhs[1..],
                        _ => &rhs[..],
                    };
                    match vars {
                        [] => true,
                        [XItem::Var(XSymbol::Triple(_, j2))] => *j2 == j && triple(&vars[0]),
                        [XItem::Var(XSymbol::Triple(_, m2)), XItem::Var(XSymbol::Triple(m2b, j2))] => {
                            m2 == m2b && *j2 == j && triple(&vars[0]) && triple(&vars[1])
                        }
                        _ => false,
                    }
                }
                XSymbol::Triple(..) => false,
            }
        });
        let z_ok = self.productions_z.iter().all(|p| {
            let pair_ok = |z: ZSymbol| matches!(z, ZSymbol::Pair(i) if i < n);
            let letter_ok = p.letter.is_none_or(|a| a < sigma);
            let shape = match (p.lhs, p.x, p.next) {
                (ZSymbol::Start, None, next) => pair_ok(next),
                (ZSymbol::Pair(i), None, next) => i < n && pair_ok(next),
                (ZSymbol::Pair(i), Some(XSymbol::Triple(m1, m2)), ZSymbol::Pair(m2b)) => i < n && m1 < n && m2 < n && m2 == m2b,
                _ => false,
            };
            letter_ok && shape
        });
        x_ok && z_ok
    }
}

/// `[i,p,j] → a [m1,p,m2][m2,p,j]` for one `(i, m1, a)`: per `m2`, the set
/// of `j` (bitmask) for which the production exists.
#[derive(Debug, Clone)]
struct PushGroup {
    i: usize,
    m1: usize,
    label: Label,
    masks: Vec<u64>,
}

/// A grammar prepared for repeated queries: X-productions grouped for
/// bit-parallel parsing, Z-productions kept as they are.
#[derive(Debug, Clone)]
pub struct GrammarParser {
    n: usize,
    k: usize,
    sigma: usize,
    productions_z: Vec<ProductionZ>,
    starts: Vec<(Label, usize, usize, Label)>,
    pops: Vec<(usize, usize, Label)>,
    /// `[i,p,j] → a [m,p,j]` as `(i, m, a, mask of j)`.
    stays: Vec<(usize, usize, Label, u64)>,
    pushes: Vec<PushGroup>,
}

/// Largest `n` handled by the bit-parallel tables.
pub const MAX_GRAMMAR_STATES: usize = 64;

impl GrammarParser {
    pub fn new(g: &MixedGrammar) -> Result<Self> {
        if g.n > MAX_GRAMMAR_STATES {
            return Err(Error::TooManyStates { n: g.n, max: MAX_GRAMMAR_STATES });
        }
        if !g.well_formed() {
            return Err(Error::GrammarDocument("production outside the triple-pair templates".into()));
        }
        let mut c = GrammarParser {
            n: g.n,
            k: g.k,
            sigma: g.alphabet.len(),
            productions_z: g.productions_z.clone(),
            starts: Vec::new(),
            pops: Vec::new(),
            stays: Vec::new(),
            pushes: Vec::new(),
        };
        for p in &g.productions_x {
            let (label, vars) = match p.rhs.first() {
                Some(XItem::Letter(a)) => (Some(*a), &p.rhs[1..]),
                _ => (None, &p.rhs[..]),
            };
            match (p.lhs, vars) {
                (XSymbol::Start, _) => {
                    let at = p.rhs.iter().position(|x| matches!(x, XItem::Var(_))).expect("well formed");
                    let XItem::Var(XSymbol::Triple(m1, m2)) = p.rhs[at] else { unreachable!() };
                    let a = if at == 1 { label } else { None };
                    let b = p.rhs.get(at + 1).map(|x| match x {
                        XItem::Letter(b) => *b,
                        XItem::Var(_) => unreachable!(),
                    });
                    c.starts.push((a, m1, m2, b));
                }
                (XSymbol::Triple(i, j), []) => c.pops.push((i, j, label)),
                (XSymbol::Triple(i, j), [XItem::Var(XSymbol::Triple(m, _))]) => {
                    match c.stays.iter_mut().find(|s| s.0 == i && s.1 == *m && s.2 == label) {
                        Some(s) => s.3 |= 1 << j,
                        None => c.stays.push((i, *m, label, 1 << j)),
                    }
                }
                (XSymbol::Triple(i, j), [XItem::Var(XSymbol::Triple(m1, m2)), _]) => {
                    let at = match c.pushes.iter().position(|s| s.i == i && s.m1 == *m1 && s.label == label) {
                        Some(at) => at,
                        None => {
                            c.pushes.push(PushGroup { i, m1: *m1, label, masks: vec![0; g.n] });
                            c.pushes.len() - 1
                        }
                    };
                    c.pushes[at].masks[*m2] |= 1 << j;
                }
                _ => unreachable!("checked by well_formed"),
            }
        }
        Ok(c)
    }
}

/// Derivability (and "some rewritten variable has first index < k") of
/// every `[i,p,j]` on every span of width ≤ `maxw` of a word.
struct Table {
    n: usize,
    maxw: usize,
    derivable: Vec<u64>,
    low: Vec<u64>,
}

impl Table {
    fn at(&self, s: usize, e: usize, i: usize) -> usize {
        (s * (self.maxw + 1) + (e - s)) * self.n + i
    }

    fn d(&self, s: usize, e: usize, i: usize) -> u64 {
        self.derivable[self.at(s, e, i)]
    }

    fn l(&self, s: usize, e: usize, i: usize) -> u64 {
        self.low[self.at(s, e, i)]
    }

    fn build(c: &GrammarParser, w: &[usize], maxw: usize) -> Table {
        let n = c.n;
        let len = w.len();
        let maxw = maxw.min(len);
        let size = (len + 1) * (maxw + 1) * n;
        let mut t = Table { n, maxw, derivable: vec![0; size], low: vec![0; size] };
        let after = |s: usize, e: usize, a: Label| -> Option<usize> {
            match a {
                None => Some(s),
                Some(a) if s < e && w[s] == a => Some(s + 1),
                Some(_) => None,
            }
        };
        // after the first pass over a span only ε-rules that read the
        // span itself can add anything
        let mut nd = vec![0u64; n];
        let mut nl = vec![0u64; n];
        for width in 0..=maxw {
            for s in 0..=len - width {
                let e = s + width;
                let mut first = true;
                loop {
                    let mut changed = false;
                    nd.fill(0);
                    nl.fill(0);
                    if first {
                        for &(i, j, a) in &c.pops {
                            if after(s, e, a) == Some(e) {
                                nd[i] |= 1 << j;
                            }
                        }
                    }
                    for &(i, m, a, mask) in &c.stays {
                        if !first && a.is_some() {
                            continue;
                        }
                        if let Some(s1) = after(s, e, a) {
                            nd[i] |= t.d(s1, e, m) & mask;
                            nl[i] |= t.l(s1, e, m) & mask;
                        }
                    }
                    for g in &c.pushes {
                        if !first && g.label.is_some() {
                            continue;
                        }
                        let Some(s1) = after(s, e, g.label) else { continue };
                        for mid in s1..=e {
                            if !first && mid != s1 && mid != e {
                                continue;
                            }
                            let (dm, lm) = (t.d(s1, mid, g.m1), t.l(s1, mid, g.m1));
                            let mut bits = dm;
                            while bits != 0 {
                                let m2 = bits.trailing_zeros() as usize;
                                bits &= bits - 1;
                                let r = t.d(mid, e, m2) & g.masks[m2];
                                nd[g.i] |= r;
                                if lm >> m2 & 1 == 1 {
                                    nl[g.i] |= r;
                                }
                                nl[g.i] |= t.l(mid, e, m2) & g.masks[m2];
                            }
                        }
                    }
                    for i in 0..n {
                        if i < c.k {
                            nl[i] |= nd[i];
                        }
                        let at = t.at(s, e, i);
                        let (d, l) = (t.derivable[at] | nd[i], t.low[at] | nl[i]);
                        if d != t.derivable[at] || l != t.low[at] {
                            t.derivable[at] = d;
                            t.low[at] = l;
                            changed = true;
                        }
                    }
                    first = false;
                    if !changed {
                        break;
                    }
                }
            }
        }
        t
    }
}

/// The exact number of distinct leftmost derivations `x0 ⇒* w` (`inf` when
/// the parse forest of `w` has a productive cycle).
pub fn count_finite_derivations(g: &MixedGrammar, w: &[usize]) -> Result<DerivCount> {
    count_derivations_from(g, XSymbol::Start, w)
}

/// As [`count_finite_derivations`], from any X-variable.
pub fn count_derivations_from(g: &MixedGrammar, root: XSymbol, w: &[usize]) -> Result<DerivCount> {
    Ok(derivation_counts(g, &[root], w)?[0])
}

/// Derivation counts of `w` from several X-variables, sharing one parse.
pub fn derivation_counts(g: &MixedGrammar, roots: &[XSymbol], w: &[usize]) -> Result<Vec<DerivCount>> {
    GrammarParser::new(g)?.derivation_counts(roots, w)
}

/// Whether `w` has a finite derivation.
pub fn finite_member(g: &MixedGrammar, w: &[usize]) -> Result<bool> {
    GrammarParser::new(g)?.finite_member(w)
}

/// Whether an infinite leftmost derivation from `z0` spells `w`, with
/// repeated variables (or variables of first index `< k` inside finite
/// segments) rewritten infinitely often. Finite segments derived from
/// `[m1,p,m2]` are limited to `segment_bound` letters.
pub fn omega_derivation_exists(g: &MixedGrammar, w: &UPWord, segment_bound: usize) -> Result<bool> {
    GrammarParser::new(g)?.omega_derivation_exists(w, segment_bound)
}

impl GrammarParser {
    fn check_word(&self, w: &[usize]) -> Result<()> {
        match w.iter().find(|&&s| s >= self.sigma) {
            Some(s) => Err(Error::ForeignLetter(format!("#{s}"))),
            None => Ok(()),
        }
    }

    /// See [`derivation_counts`].
    pub fn derivation_counts(&self, roots: &[XSymbol], w: &[usize]) -> Result<Vec<DerivCount>> {
        self.check_word(w)?;
        for root in roots {
            if let XSymbol::Triple(i, j) = *root {
                if i >= self.n || j >= self.n {
                    return Err(Error::StateOutOfRange { state: i.max(j) + 1, n: self.n });
                }
            }
        }
        let c = self;
        let len = w.len();
        let t = Table::build(c, w, len);
        let after = |s: usize, e: usize, a: Label| -> Option<usize> {
            match a {
                None => Some(s),
                Some(a) if s < e && w[s] == a => Some(s + 1),
                Some(_) => None,
            }
        };

        // nodes: None = x0 over the whole word, Some((i, j, s, e)) = [i,p,j] on w[s..e]
        type Node = Option<(usize, usize, usize, usize)>;
        let mut forest = Forest::default();
        let mut ids: HashMap<Node, usize> = HashMap::new();
        let root_nodes: Vec<Node> = roots
            .iter()
            .map(|r| match *r {
                XSymbol::Start => None,
                XSymbol::Triple(i, j) => Some((i, j, 0, len)),
            })
            .collect();
        let mut todo = Vec::new();
        for &r in &root_nodes {
            if let std::collections::hash_map::Entry::Vacant(e) = ids.entry(r) {
                e.insert(forest.add_node());
                todo.push(r);
            }
        }
        let child = |node: Node, ids: &mut HashMap<Node, usize>, forest: &mut Forest, todo: &mut Vec<Node>| -> usize {
            *ids.entry(node).or_insert_with(|| {
                todo.push(node);
                forest.add_node()
            })
        };
        let one = DerivCount::Finite(1);
        while let Some(node) = todo.pop() {
            let id = ids[&node];
            match node {
                None => {
                    for &(a, m1, m2, b) in &c.starts {
                        let Some(s1) = after(0, len, a) else { continue };
                        let e1 = match b {
                            None => len,
                            Some(b) if len > s1 && w[len - 1] == b => len - 1,
                            Some(_) => continue,
                        };
                        if t.d(s1, e1, m1) >> m2 & 1 == 1 {
                            let k = child(Some((m1, m2, s1, e1)), &mut ids, &mut forest, &mut todo);
                            forest.push(id, one, vec![k]);
                        }
                    }
                }
                Some((i, j, s, e)) => {
                    for &(pi, pj, a) in &c.pops {
                        if pi == i && pj == j && after(s, e, a) == Some(e) {
                            forest.push(id, one, vec![]);
                        }
                    }
                    for &(si, m, a, mask) in &c.stays {
                        if si != i || mask >> j & 1 == 0 {
                            continue;
                        }
                        if let Some(s1) = after(s, e, a) {
                            if t.d(s1, e, m) >> j & 1 == 1 {
                                let k = child(Some((m, j, s1, e)), &mut ids, &mut forest, &mut todo);
                                forest.push(id, one, vec![k]);
                            }
                        }
                    }
                    for gp in c.pushes.iter().filter(|gp| gp.i == i) {
                        let Some(s1) = after(s, e, gp.label) else { continue };
                        for mid in s1..=e {
                            let mut bits = t.d(s1, mid, gp.m1);
                            while bits != 0 {
                                let m2 = bits.trailing_zeros() as usize;
                                bits &= bits - 1;
                                if gp.masks[m2] >> j & 1 == 1 && t.d(mid, e, m2) >> j & 1 == 1 {
                                    let k1 = child(Some((gp.m1, m2, s1, mid)), &mut ids, &mut forest, &mut todo);
                                    let k2 = child(Some((m2, j, mid, e)), &mut ids, &mut forest, &mut todo);
                                    forest.push(id, one, vec![k1, k2]);
                                }
                            }
                        }
                    }
                }
            }
        }
        let values = forest.evaluate()?;
        Ok(root_nodes.iter().map(|r| values[ids[r]]).collect())
    }

    /// See [`finite_member`]; decided on the derivability table alone.
    pub fn finite_member(&self, w: &[usize]) -> Result<bool> {
        self.check_word(w)?;
        let len = w.len();
        let t = Table::build(self, w, len);
        Ok(self.starts.iter().any(|&(a, m1, m2, b)| {
            let s1 = match a {
                None => 0,
                Some(a) if w.first() == Some(&a) => 1,
                Some(_) => return false,
            };
            let e1 = match b {
                None => len,
                Some(b) if len > s1 && w[len - 1] == b => len - 1,
                Some(_) => return false,
            };
            s1 <= e1 && t.d(s1, e1, m1) >> m2 & 1 == 1
        }))
    }

    /// See [`omega_derivation_exists`].
    pub fn omega_derivation_exists(&self, w: &UPWord, segment_bound: usize) -> Result<bool> {
        self.check_word(w.prefix())?;
        self.check_word(w.period())?;
        if self.k == 0 {
            return Ok(false);
        }
        let c = self;
        let phases = w.phases();
        // position p < phases of the long word has phase p
        let long = w.take(phases + segment_bound);
        let t = Table::build(c, &long, segment_bound);

        const GOOD: u8 = 1;
        const LETTER: u8 = 2;
        let nodes = self.n * phases;
        let mut graph: DiGraph<(), u8> = DiGraph::with_capacity(nodes, 0);
        for _ in 0..nodes {
            graph.add_node(());
        }
        let mut starts = Vec::new();
        let consume = |ph: usize, a: Option<usize>| -> Option<usize> {
            match a {
                None => Some(ph),
                Some(a) if a == w.letter_at_phase(ph) => Some(w.advance(ph, 1)),
                Some(_) => None,
            }
        };
        for p in &self.productions_z {
            match p.lhs {
                ZSymbol::Start => {
                    if let (Some(ph), ZSymbol::Pair(m)) = (consume(0, p.letter), p.next) {
                        starts.push(m * phases + ph);
                    }
                }
                ZSymbol::Pair(i) => {
                    let ZSymbol::Pair(m) = p.next else { continue };
                    for ph in 0..phases {
                        let Some(ph1) = consume(ph, p.letter) else { continue };
                        let base = if p.letter.is_some() { LETTER } else { 0 } | if i < self.k || m < self.k { GOOD } else { 0 };
                        let from = NodeIndex::new(i * phases + ph);
                        match p.x {
                            None => {
                                graph.add_edge(from, NodeIndex::new(m * phases + ph1), base);
                            }
                            Some(XSymbol::Triple(m1, m2)) => {
                                for len in 0..=segment_bound {
                                    if t.d(ph1, ph1 + len, m1) >> m2 & 1 == 0 {
                                        continue;
                                    }
                                    let mut mask = base;
                                    if len > 0 {
                                        mask |= LETTER;
                                    }
                                    if t.l(ph1, ph1 + len, m1) >> m2 & 1 == 1 {
                                        mask |= GOOD;
                                    }
                                    graph.add_edge(from, NodeIndex::new(m * phases + w.advance(ph1, len)), mask);
                                }
                            }
                            Some(XSymbol::Start) => {}
                        }
                    }
                }
            }
        }

        // reachable nodes from the z0 successors
        let mut reach = vec![false; nodes];
        let mut stack = starts;
        while let Some(v) = stack.pop() {
            if std::mem::replace(&mut reach[v], true) {
                continue;
            }
            stack.extend(graph.neighbors(NodeIndex::new(v)).map(|x| x.index()));
        }
        let sccs = tarjan_scc(&graph);
        let mut comp = vec![0; nodes];
        for (ci, scc) in sccs.iter().enumerate() {
            for v in scc {
                comp[v.index()] = ci;
            }
        }
        let mut mask = vec![0u8; sccs.len()];
        for e in graph.raw_edges() {
            let (a, b) = (e.source().index(), e.target().index());
            if reach[a] && comp[a] == comp[b] {
                mask[comp[a]] |= e.weight;
            }
        }
        Ok(mask.contains(&(GOOD | LETTER)))
    }
}

fn x_token(v: XSymbol) -> String {
    match v {
        XSymbol::Start => "x0".into(),
        XSymbol::Triple(i, j) => format!("[{},p,{}]", i + 1, j + 1),
    }
}

fn z_token(v: ZSymbol) -> String {
    match v {
        ZSymbol::Start => "z0".into(),
        ZSymbol::Pair(i) => format!("[{},p]", i + 1),
    }
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialize")
}

fn token_array(tokens: &[String]) -> String {
    let quoted: Vec<String> = tokens.iter().map(|t| json_str(t)).collect();
    format!("[{}]", quoted.join(", "))
}

impl MixedGrammar {
    fn x_tokens(&self, p: &ProductionX) -> Vec<String> {
        std::iter::once(x_token(p.lhs))
            .chain(p.rhs.iter().map(|it| match it {
                XItem::Letter(a) => self.alphabet.name(*a).to_string(),
                XItem::Var(v) => x_token(*v),
            }))
            .collect()
    }

    fn z_tokens(&self, p: &ProductionZ) -> Vec<String> {
        let mut out = vec![z_token(p.lhs)];
        out.extend(p.letter.map(|a| self.alphabet.name(a).to_string()));
        out.extend(p.x.map(x_token));
        out.push(z_token(p.next));
        out
    }
}

/// Writes the grammar as a JSON document, one production per line.
pub fn export_grammar(g: &MixedGrammar) -> String {
    let mut out = String::new();
    let letters: Vec<String> = g.alphabet.letters().iter().map(|l| json_str(l)).collect();
    let _ = writeln!(out, "{{");
    let _ = writeln!(out, "  \"n\": {},", g.n);
    let _ = writeln!(out, "  \"alphabet\": [{}],", letters.join(", "));
    let _ = writeln!(out, "  \"k\": {},", g.k);
    let section = |out: &mut String, name: &str, rows: Vec<String>, last: bool| {
        let tail = if last { "" } else { "," };
        if rows.is_empty() {
            let _ = writeln!(out, "  \"{name}\": []{tail}");
            return;
        }
        let _ = writeln!(out, "  \"{name}\": [");
        let count = rows.len();
        for (ix, r) in rows.into_iter().enumerate() {
            let sep = if ix + 1 < count { "," } else { "" };
            let _ = writeln!(out, "    {r}{sep}");
        }
        let _ = writeln!(out, "  ]{tail}");
    };
    section(&mut out, "productions_x", g.productions_x.iter().map(|p| token_array(&g.x_tokens(p))).collect(), false);
    section(&mut out, "productions_z", g.productions_z.iter().map(|p| token_array(&g.z_tokens(p))).collect(), true);
    let _ = writeln!(out, "}}");
    out
}

#[derive(Deserialize)]
struct Document {
    n: usize,
    alphabet: Vec<String>,
    k: usize,
    productions_x: Vec<Vec<String>>,
    productions_z: Vec<Vec<String>>,
}

fn parse_var(tok: &str, n: usize) -> Option<std::result::Result<(usize, Option<usize>), String>> {
    let inner = tok.strip_prefix('[')?.strip_suffix(']')?;
    let parts: Vec<&str> = inner.split(',').collect();
    let index = |s: &str| -> std::result::Result<usize, String> {
        match s.parse::<usize>() {
            Ok(v) if v >= 1 && v <= n => Ok(v - 1),
            _ => Err(format!("bad variable index in {tok:?}")),
        }
    };
    Some(match parts[..] {
        [i, "p"] => index(i).map(|i| (i, None)),
        [i, "p", j] => index(i).and_then(|i| index(j).map(|j| (i, Some(j)))),
        _ => Err(format!("malformed variable {tok:?}")),
    })
}

/// Parses a document written by [`export_grammar`].
pub fn parse_grammar(text: &str) -> Result<MixedGrammar> {
    let bad = |m: String| Error::GrammarDocument(m);
    let doc: Document = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    let n = doc.n;
    let alphabet = Alphabet::new(doc.alphabet)?;
    if doc.k > n {
        return Err(Error::KOutOfRange { k: doc.k, n });
    }
    let x_sym = |tok: &str| -> std::result::Result<Option<XSymbol>, String> {
        if tok == "x0" {
            return Ok(Some(XSymbol::Start));
        }
        match parse_var(tok, n) {
            None => Ok(None),
            Some(Ok((i, Some(j)))) => Ok(Some(XSymbol::Triple(i, j))),
            Some(Ok((_, None))) => Err(format!("pair {tok:?} where a triple was expected")),
            Some(Err(e)) => Err(e),
        }
    };
    let z_sym = |tok: &str| -> std::result::Result<Option<ZSymbol>, String> {
        if tok == "z0" {
            return Ok(Some(ZSymbol::Start));
        }
        match parse_var(tok, n) {
            Some(Ok((i, None))) => Ok(Some(ZSymbol::Pair(i))),
            _ => Ok(None),
        }
    };
    let mut productions_x = Vec::new();
    for row in &doc.productions_x {
        let (lhs, rest) = row.split_first().ok_or_else(|| bad("empty production".into()))?;
        let lhs = x_sym(lhs).map_err(bad)?.ok_or_else(|| bad(format!("bad left-hand side {lhs:?}")))?;
        let mut rhs = Vec::new();
        for tok in rest {
            match x_sym(tok).map_err(bad)? {
                Some(v) => rhs.push(XItem::Var(v)),
                None => rhs.push(XItem::Letter(alphabet.lookup(tok)?)),
            }
        }
        productions_x.push(ProductionX { lhs, rhs });
    }
    let mut productions_z = Vec::new();
    for row in &doc.productions_z {
        let malformed = || bad(format!("malformed production {row:?}"));
        let (lhs, rest) = row.split_first().ok_or_else(malformed)?;
        let (next, mid) = rest.split_last().ok_or_else(malformed)?;
        let lhs = z_sym(lhs).map_err(bad)?.ok_or_else(malformed)?;
        let next = z_sym(next).map_err(bad)?.ok_or_else(malformed)?;
        let (mut letter, mut x) = (None, None);
        for tok in mid {
            match x_sym(tok).map_err(bad)? {
                Some(v) if x.is_none() => x = Some(v),
                Some(_) => return Err(malformed()),
                None if letter.is_none() && x.is_none() => letter = Some(alphabet.lookup(tok)?),
                None => return Err(malformed()),
            }
        }
        productions_z.push(ProductionZ { lhs, letter, x, next });
    }
    Ok(MixedGrammar { n, alphabet, k: doc.k, productions_x, productions_z })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{C_INF, C_L};

    fn lukasiewicz() -> (RocAutomaton, MixedGrammar) {
        let c = RocAutomaton::parse(C_L).unwrap();
        let g = triple_pair_construct(&c);
        (c, g)
    }

    fn w(c: &RocAutomaton, s: &str) -> Vec<usize> {
        c.alphabet().parse_word(s).unwrap()
    }

    #[test]
    fn lukasiewicz_productions() {
        let (_, g) = lukasiewicz();
        let s = XSymbol::Triple(0, 0);
        assert_eq!(
            g.productions_x,
            vec![
                ProductionX { lhs: XSymbol::Start, rhs: vec![XItem::Var(s)] },
                ProductionX { lhs: s, rhs: vec![XItem::Letter(0), XItem::Var(s), XItem::Var(s)] },
                ProductionX { lhs: s, rhs: vec![XItem::Letter(1)] },
            ]
        );
        let z = ZSymbol::Pair(0);
        assert_eq!(
            g.productions_z,
            vec![
                ProductionZ { lhs: ZSymbol::Start, letter: None, x: None, next: z },
                ProductionZ { lhs: z, letter: Some(0), x: None, next: z },
                ProductionZ { lhs: z, letter: Some(0), x: Some(s), next: z },
            ]
        );
        assert!(g.well_formed());
    }

    #[test]
    fn lukasiewicz_counts() {
        let (c, g) = lukasiewicz();
        for (s, d) in [("b", 1), ("abb", 1), ("aabbb", 1), ("ababb", 1), ("ab", 0), ("", 0), ("ba", 0)] {
            assert_eq!(count_finite_derivations(&g, &w(&c, s)).unwrap(), DerivCount::Finite(d), "{s}");
        }
        assert!(finite_member(&g, &w(&c, "aabbb")).unwrap());
        assert!(!finite_member(&g, &w(&c, "")).unwrap());
    }

    #[test]
    fn epsilon_stay_gives_infinitely_many_derivations() {
        let c = RocAutomaton::parse(C_INF).unwrap();
        let g = triple_pair_construct(&c);
        assert_eq!(count_finite_derivations(&g, &w(&c, "b")).unwrap(), DerivCount::Infinite);
        assert_eq!(count_finite_derivations(&g, &w(&c, "ab")).unwrap(), DerivCount::ZERO);
    }

    #[test]
    fn omega_derivations() {
        let (c, g) = lukasiewicz();
        let up = |u: &str, v: &str| UPWord::new(w(&c, u), w(&c, v)).unwrap();
        assert!(omega_derivation_exists(&g, &up("", "a"), 4).unwrap());
        assert!(omega_derivation_exists(&g, &up("", "ab"), 4).unwrap());
        assert!(!omega_derivation_exists(&g, &up("b", "a"), 4).unwrap());
        assert!(!omega_derivation_exists(&g, &up("", "b"), 4).unwrap());
        let g0 = triple_pair_construct(&c.with_k(0).unwrap());
        assert!(!omega_derivation_exists(&g0, &up("", "a"), 4).unwrap());
    }

    #[test]
    fn zero_initial_or_stay_vectors() {
        let text = "semiring bool\nstates 2\nalphabet a b\nrepeated 1\nfinal 1 eps 1\npush 1 2 a 1\npop 2 1 b 1\n";
        let g = triple_pair_construct(&RocAutomaton::parse(text).unwrap());
        assert!(g.productions_x.iter().all(|p| p.lhs != XSymbol::Start));
        assert!(g.productions_z.iter().all(|p| p.lhs != ZSymbol::Start));
        // no stays: every [i,p,j] production has 0 or 2 variables
        assert!(g.productions_x.iter().all(|p| p.rhs.iter().filter(|x| matches!(x, XItem::Var(_))).count() != 1));
    }

    #[test]
    fn export_round_trip() {
        let (_, g) = lukasiewicz();
        let text = export_grammar(&g);
        let expected = r#"{
  "n": 1,
  "alphabet": ["a", "b"],
  "k": 1,
  "productions_x": [
    ["x0", "[1,p,1]"],
    ["[1,p,1]", "a", "[1,p,1]", "[1,p,1]"],
    ["[1,p,1]", "b"]
  ],
  "productions_z": [
    ["z0", "[1,p]"],
    ["[1,p]", "a", "[1,p]"],
    ["[1,p]", "a", "[1,p,1]", "[1,p]"]
  ]
}
"#;
        assert_eq!(text, expected);
        let back = parse_grammar(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(export_grammar(&back), text);
    }

    #[test]
    fn empty_grammar_export() {
        let c = RocAutomaton::parse("semiring bool\nstates 1\nalphabet a\n").unwrap();
        let g = triple_pair_construct(&c);
        let text = export_grammar(&g);
        assert!(text.contains("\"productions_x\": [],"));
        assert!(text.contains("\"productions_z\": []\n"));
        assert_eq!(export_grammar(&parse_grammar(&text).unwrap()), text);
    }
}
