//! Property suites behind `roc validate` (eight named checks on one
//! automaton) and `roc compare` (grammar versus automaton semantics).
//!
//! Every check compares two independently computed sides and counts the
//! cases it could decide; oracle reports cut by a bound are skipped, never
//! counted as agreement.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::automaton::{Label, MoveKind, RocAutomaton};
use crate::error::Result;
use crate::finite::{behavior_coefficient, solve_star_block, SpanSupport, StarBlock};
use crate::grammar::{triple_pair_construct, GrammarParser, XSymbol};
use crate::omega::{behavior_omega_member, OmegaMembership};
use crate::oracle::{oracle_block_runs, oracle_count_runs, RunBounds, RunReport};
use crate::weights::{DerivCount, SquareMatrix, Weight};
use crate::words::{UPWord, Word, WordSpace};

/// Names of the validation checks, in report order.
pub const CHECK_NAMES: [&str; 8] = [
    "power-identity",
    "power-factorization",
    "omega-counter-split",
    "omega-unfolding",
    "least-fixpoint",
    "grammar-membership",
    "grammar-behavior",
    "derivation-count",
];

/// Failure messages kept per check (the count is always exact).
const KEPT_FAILURES: usize = 5;

#[derive(Debug, Clone)]
pub struct CheckOptions {
    /// Finite words up to this length.
    pub max_len: usize,
    /// `|u|, |v|` bound for grammar ω-membership.
    pub up_len: usize,
    /// `|u|, |v|` bound for the counter-split and unfolding checks.
    pub split_len: usize,
    pub segment_bound: usize,
    pub bounds: RunBounds,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            max_len: 8,
            up_len: 4,
            split_len: 3,
            segment_bound: crate::grammar::DEFAULT_SEGMENT_BOUND,
            bounds: RunBounds { witnesses: 0, ..RunBounds::default() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    /// Cases decided by both sides.
    pub cases: usize,
    /// Cases skipped because an oracle bound cut the search.
    pub skipped: usize,
    pub failed: usize,
    /// The first few failures, human-readable.
    pub failures: Vec<String>,
}

impl CheckResult {
    fn new(name: &'static str) -> Self {
        CheckResult { name, cases: 0, skipped: 0, failed: 0, failures: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.failed == 0
    }

    fn expect(&mut self, ok: bool, message: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failed += 1;
            if self.failures.len() < KEPT_FAILURES {
                self.failures.push(message());
            }
        }
    }
}

/// All words over `sigma` letters with `|u| ≤ max` and `1 ≤ |v| ≤ max`.
pub fn up_words(sigma: usize, max: usize) -> Vec<UPWord> {
    let space = WordSpace::all_up_to(sigma, max);
    let mut out = Vec::new();
    for (_, u) in space.words() {
        for (_, v) in space.words().filter(|(_, v)| !v.is_empty()) {
            out.push(UPWord::new(u.to_vec(), v.to_vec()).expect("nonempty period"));
        }
    }
    out
}

/// `Σ_{x·y = w} a[x]·b[y]` on every word of a factor-closed space.
fn convolve(space: &WordSpace, a: &[SquareMatrix], b: &[SquareMatrix]) -> Result<Vec<SquareMatrix>> {
    let mut out = Vec::with_capacity(space.len());
    for id in 0..space.len() {
        let mut acc = SquareMatrix::zero(a[id].n(), a[id].domain());
        for (x, y) in space.splits(id) {
            acc = acc.add(&a[x].mul(&b[y])?)?;
        }
        out.push(acc);
    }
    Ok(out)
}

fn report_matrix(reports: &[Vec<RunReport>], aut: &RocAutomaton) -> Result<Option<SquareMatrix>> {
    if reports.iter().flatten().any(|r| !r.complete) {
        return Ok(None);
    }
    let rows = reports.iter().map(|row| row.iter().map(|r| r.count.to_weight(aut.domain())).collect()).collect();
    SquareMatrix::from_rows(rows).map(Some)
}

fn pair(i: usize, j: usize) -> String {
    format!("[{},{}]", i + 1, j + 1)
}

/// Shared, lazily built data of one validation run.
struct Context<'a> {
    aut: &'a RocAutomaton,
    opts: &'a CheckOptions,
    block: StarBlock,
    grammar: GrammarParser,
    /// Oracle counter-`i`-to-0 reports (`i = 1..=3`) per word id.
    oracle_blocks: Option<Vec<Vec<Vec<Vec<RunReport>>>>>,
    /// 𝔹 version of the automaton and its ω-tables per split word.
    omega: Option<(RocAutomaton, Vec<OmegaTables>)>,
}

impl<'a> Context<'a> {
    fn new(aut: &'a RocAutomaton, opts: &'a CheckOptions) -> Result<Self> {
        let space = WordSpace::all_up_to(aut.alphabet().len(), opts.max_len);
        Ok(Context {
            aut,
            opts,
            block: solve_star_block(aut, space)?,
            grammar: GrammarParser::new(&triple_pair_construct(aut))?,
            oracle_blocks: None,
            omega: None,
        })
    }

    fn space(&self) -> &WordSpace {
        self.block.space()
    }

    fn x(&self) -> Vec<SquareMatrix> {
        (0..self.space().len()).map(|id| self.block.at_id(id).clone()).collect()
    }

    fn word(&self, id: usize) -> String {
        self.aut.alphabet().format_word(self.space().word(id))
    }

    fn oracle_blocks(&mut self) -> Result<&Vec<Vec<Vec<Vec<RunReport>>>>> {
        if self.oracle_blocks.is_none() {
            let mut all = Vec::new();
            for i in 1..=3 {
                let per_word =
                    self.space().words().map(|(_, w)| oracle_block_runs(self.aut, i, w, self.opts.bounds)).collect::<Result<Vec<_>>>()?;
                all.push(per_word);
            }
            self.oracle_blocks = Some(all);
        }
        Ok(self.oracle_blocks.as_ref().expect("just filled"))
    }

    fn omega_tables(&mut self) -> Result<&(RocAutomaton, Vec<OmegaTables>)> {
        if self.omega.is_none() {
            let aut = self.aut.boolean();
            let tables = up_words(aut.alphabet().len(), self.opts.split_len)
                .into_iter()
                .map(|w| OmegaTables::new(&aut, w))
                .collect::<Result<Vec<_>>>()?;
            self.omega = Some((aut, tables));
        }
        Ok(self.omega.as_ref().expect("just filled"))
    }
}

/// Runs the eight checks of [`CHECK_NAMES`] on `aut`.
pub fn validate(aut: &RocAutomaton, opts: &CheckOptions) -> Result<Vec<CheckResult>> {
    run_checks(aut, opts, &CHECK_NAMES)
}

/// Runs the named checks (in the given order); unknown names are ignored.
pub fn run_checks(aut: &RocAutomaton, opts: &CheckOptions, names: &[&str]) -> Result<Vec<CheckResult>> {
    let mut cx = Context::new(aut, opts)?;
    let mut out = Vec::new();
    for &name in names {
        out.push(match name {
            "power-identity" => power_identity(&mut cx)?,
            "power-factorization" => power_factorization(&mut cx)?,
            "omega-counter-split" => omega_counter_split(&mut cx)?,
            "omega-unfolding" => omega_unfolding(&mut cx)?,
            "least-fixpoint" => least_fixpoint(&cx)?,
            "grammar-membership" => grammar_membership(&cx)?,
            "grammar-behavior" => grammar_behavior(&cx)?,
            "derivation-count" => derivation_count(&cx)?,
            _ => continue,
        });
    }
    Ok(out)
}

/// Only the residual half of `least-fixpoint`: the block solves
/// `X = A⋄X⋄X + C⋄X + B` on every word up to `max_len`.
pub fn fixpoint_residual(aut: &RocAutomaton, max_len: usize) -> Result<CheckResult> {
    let opts = CheckOptions { max_len, ..CheckOptions::default() };
    let cx = Context::new(aut, &opts)?;
    let mut res = CheckResult::new(CHECK_NAMES[4]);
    residual(&cx, &mut res)?;
    Ok(res)
}

/// Runs from counter `i` to 0 (by the oracle) weigh the `i`-th convolution
/// power of the counter-1 block, `i = 1, 2, 3`.
fn power_identity(cx: &mut Context) -> Result<CheckResult> {
    let mut res = CheckResult::new(CHECK_NAMES[0]);
    let x = cx.x();
    let x2 = convolve(cx.space(), &x, &x)?;
    let x3 = convolve(cx.space(), &x2, &x)?;
    let powers = [x, x2, x3];
    let n = cx.aut.n();
    let d = cx.aut.domain();
    let blocks = cx.oracle_blocks()?.clone();
    for (i, power) in powers.iter().enumerate() {
        for (id, reports) in blocks[i].iter().enumerate() {
            for s in 0..n {
                for t in 0..n {
                    let r = &reports[s][t];
                    if !r.complete {
                        res.skipped += 1;
                        continue;
                    }
                    let (o, p) = (r.count.to_weight(d), power[id].get(s, t));
                    res.expect(o == p, || format!("counter {}, word {}, {}: oracle {o}, power {p}", i + 1, cx.word(id), pair(s, t)));
                }
            }
        }
    }
    Ok(res)
}

/// Oracle runs from counter `i+1` split at the first return to counter
/// `i` into a counter-1 block run and a counter-`i` run, `i = 1, 2`.
fn power_factorization(cx: &mut Context) -> Result<CheckResult> {
    let mut res = CheckResult::new(CHECK_NAMES[1]);
    let x = cx.x();
    let aut = cx.aut;
    let blocks = cx.oracle_blocks()?.clone();
    for i in 0..2 {
        let lower: Vec<Option<SquareMatrix>> = blocks[i].iter().map(|r| report_matrix(r, aut)).collect::<Result<_>>()?;
        let upper: Vec<Option<SquareMatrix>> = blocks[i + 1].iter().map(|r| report_matrix(r, aut)).collect::<Result<_>>()?;
        'word: for id in 0..cx.space().len() {
            let Some(lhs) = &upper[id] else {
                res.skipped += 1;
                continue;
            };
            let mut rhs = SquareMatrix::zero(aut.n(), aut.domain());
            for (a, b) in cx.space().splits(id) {
                let Some(low) = &lower[b] else {
                    res.skipped += 1;
                    continue 'word;
                };
                rhs = rhs.add(&x[a].mul(low)?)?;
            }
            res.expect(*lhs == rhs, || format!("counter {}, word {}: oracle\n{lhs}\nfactorized\n{rhs}", i + 2, cx.word(id)));
        }
    }
    Ok(res)
}

/// Longest finite detour considered by the ω-decompositions.
fn detour_bound(n: usize, w: &UPWord) -> usize {
    w.prefix().len() + n * w.period().len() * (n + 2)
}

/// Membership of one word from every `(state, phase, counter)`, and the
/// support of the counter-1 block on the segments that start at a phase.
struct OmegaTables {
    w: UPWord,
    member: OmegaMembership,
    spans: SpanSupport,
    bound: usize,
}

impl OmegaTables {
    fn new(aut: &RocAutomaton, w: UPWord) -> Result<Self> {
        let bound = detour_bound(aut.n(), &w);
        // position p < phases of the long word has phase p
        let long = w.take(w.phases() + bound);
        let spans = SpanSupport::new(aut, &long, bound)?;
        Ok(OmegaTables { member: OmegaMembership::new(aut, &w)?, spans, bound, w })
    }

    /// Whether a counter-1-to-0 run from `m` reads a segment starting at
    /// `phase` and then the rest is accepted from its end state.
    fn detour(&self, n: usize, m: usize, phase: usize) -> bool {
        (0..=self.bound).any(|len| {
            let after = self.w.advance(phase, len);
            (0..n).any(|j| self.spans.get(phase, phase + len, m, j) && self.member.accepts(j, after, 1))
        })
    }

    fn describe(&self, aut: &RocAutomaton) -> String {
        let a = aut.alphabet();
        format!("u={} v={}", a.format_word(self.w.prefix()), a.format_word(self.w.period()))
    }
}

/// From counter 2 a run either never returns to counter 1, or returns after
/// a finite counter-1 block run and continues from counter 1.
fn omega_counter_split(cx: &mut Context) -> Result<CheckResult> {
    let mut res = CheckResult::new(CHECK_NAMES[2]);
    let (aut, tables) = cx.omega_tables()?;
    for t in tables {
        for i in 0..aut.n() {
            let lhs = t.member.accepts(i, 0, 2);
            let rhs = t.member.accepts(i, 0, 1) || t.detour(aut.n(), i, 0);
            res.expect(lhs == rhs, || format!("state {}, {}: counter 2 {lhs}, split {rhs}", i + 1, t.describe(aut)));
        }
    }
    Ok(res)
}

/// Acceptance from counter 1 unfolds into the first move: a push followed
/// by an ω-run at counter 2 (never returning, or returning through a block
/// run), or a stay followed by an ω-run at counter 1.
fn omega_unfolding(cx: &mut Context) -> Result<CheckResult> {
    let mut res = CheckResult::new(CHECK_NAMES[3]);
    let (aut, tables) = cx.omega_tables()?;
    let n = aut.n();
    for t in tables {
        for i in 0..n {
            let lhs = t.member.accepts(i, 0, 1);
            let mut rhs = false;
            for tr in aut.transitions_from(i) {
                let ph = match tr.label {
                    None => 0,
                    Some(a) if a == t.w.letter_at_phase(0) => t.w.advance(0, 1),
                    Some(_) => continue,
                };
                rhs |= match tr.kind {
                    MoveKind::Push => t.member.accepts(tr.to, ph, 1) || t.detour(n, tr.to, ph),
                    MoveKind::Stay => t.member.accepts(tr.to, ph, 1),
                    MoveKind::Pop => false,
                };
            }
            res.expect(lhs == rhs, || format!("state {}, {}: engine {lhs}, unfolded {rhs}", i + 1, t.describe(aut)));
        }
    }
    Ok(res)
}

fn letter_matrix(aut: &RocAutomaton, kind: MoveKind, label: Label) -> SquareMatrix {
    aut.label_matrix(kind, label)
}

/// The block satisfies `X = A⋄X⋄X + C⋄X + B` on every word, and it is the
/// least solution: the behavior it induces equals the oracle run weight.
fn least_fixpoint(cx: &Context) -> Result<CheckResult> {
    let mut res = CheckResult::new(CHECK_NAMES[4]);
    residual(cx, &mut res)?;
    let aut = cx.aut;
    for (id, w) in cx.space().words() {
        let r = oracle_count_runs(aut, w, cx.opts.bounds)?;
        if !r.complete {
            res.skipped += 1;
            continue;
        }
        let (o, c) = (r.count.to_weight(aut.domain()), behavior_coefficient(aut, &cx.block, w)?);
        res.expect(o == c, || format!("word {}: oracle {o}, behavior {c}", cx.word(id)));
    }
    Ok(res)
}

fn residual(cx: &Context, res: &mut CheckResult) -> Result<()> {
    let aut = cx.aut;
    let space = cx.space();
    let (n, d) = (aut.n(), aut.domain());
    let x = cx.x();
    let xx = convolve(space, &x, &x)?;
    for (id, w) in space.words() {
        let mut rhs = SquareMatrix::zero(n, d);
        let mut labels: Vec<(Label, usize)> = vec![(None, id)];
        if let Some(&a) = w.first() {
            labels.push((Some(a), space.suffix(id, 1)));
        }
        for &(label, rest) in &labels {
            rhs = rhs.add(&letter_matrix(aut, MoveKind::Push, label).mul(&xx[rest])?)?;
            rhs = rhs.add(&letter_matrix(aut, MoveKind::Stay, label).mul(&x[rest])?)?;
            if space.word(rest).is_empty() {
                rhs = rhs.add(&letter_matrix(aut, MoveKind::Pop, label))?;
            }
        }
        res.expect(rhs == x[id], || format!("word {}: block\n{}\nright-hand side\n{rhs}", cx.word(id), x[id]));
    }
    Ok(())
}

fn all_roots(n: usize) -> Vec<XSymbol> {
    let mut roots = vec![XSymbol::Start];
    for i in 0..n {
        for j in 0..n {
            roots.push(XSymbol::Triple(i, j));
        }
    }
    roots
}

/// Same value, or (for automata with weights other than 0/1) both zero or
/// both nonzero.
fn matches(count: DerivCount, w: Weight, exact: bool) -> bool {
    if exact {
        count.to_weight(w.domain()) == w
    } else {
        count.is_zero() == w.is_zero()
    }
}

/// Derivations from `[i,p,j]` and from `x0` account for the block entries
/// and the behavior coefficients.
fn grammar_membership(cx: &Context) -> Result<CheckResult> {
    let mut res = CheckResult::new(CHECK_NAMES[5]);
    let aut = cx.aut;
    let n = aut.n();
    let exact = aut.is_zero_one();
    let roots = all_roots(n);
    for (id, w) in cx.space().words() {
        let counts = cx.grammar.derivation_counts(&roots, w)?;
        let coeff = behavior_coefficient(aut, &cx.block, w)?;
        res.expect(matches(counts[0], coeff, exact), || format!("word {}: x0 derivations {}, behavior {coeff}", cx.word(id), counts[0]));
        let x = cx.block.at_id(id);
        for i in 0..n {
            for j in 0..n {
                let (c, e) = (counts[1 + i * n + j], x.get(i, j));
                res.expect(matches(c, e, exact), || format!("word {}, {}: derivations {c}, block {e}", cx.word(id), pair(i, j)));
            }
        }
    }
    Ok(res)
}

/// The grammar generates the support of the behavior: finite words and
/// ultimately periodic ω-words.
fn grammar_behavior(cx: &Context) -> Result<CheckResult> {
    let mut res = CheckResult::new(CHECK_NAMES[6]);
    let aut = cx.aut;
    for (id, w) in cx.space().words() {
        let g = cx.grammar.finite_member(w)?;
        let a = !behavior_coefficient(aut, &cx.block, w)?.is_zero();
        res.expect(g == a, || format!("word {}: grammar {g}, automaton {a}", cx.word(id)));
    }
    let boolean = aut.boolean();
    for w in up_words(aut.alphabet().len(), cx.opts.up_len) {
        let g = cx.grammar.omega_derivation_exists(&w, cx.opts.segment_bound)?;
        let a = behavior_omega_member(&boolean, &w)?;
        res.expect(g == a, || {
            let al = aut.alphabet();
            format!("u={} v={}: grammar {g}, automaton {a}", al.format_word(w.prefix()), al.format_word(w.period()))
        });
    }
    Ok(res)
}

/// The number of leftmost derivations of `w` equals the number of
/// accepting runs of the support automaton; in particular the grammar is
/// unambiguous on the tested words iff the automaton is.
fn derivation_count(cx: &Context) -> Result<CheckResult> {
    let mut res = CheckResult::new(CHECK_NAMES[7]);
    let support = cx.aut.support();
    let mut grammar_unambiguous = true;
    let mut oracle_unambiguous = true;
    let one = DerivCount::Finite(1);
    for (id, w) in cx.space().words() {
        let d = cx.grammar.derivation_counts(&[XSymbol::Start], w)?[0];
        grammar_unambiguous &= d <= one;
        let r = oracle_count_runs(&support, w, cx.opts.bounds)?;
        if !r.complete {
            res.skipped += 1;
            continue;
        }
        oracle_unambiguous &= r.count <= one;
        res.expect(d == r.count, || format!("word {}: derivations {d}, runs {}", cx.word(id), r.count));
    }
    if res.skipped == 0 {
        res.expect(grammar_unambiguous == oracle_unambiguous, || {
            format!("unambiguity: grammar {grammar_unambiguous}, automaton {oracle_unambiguous}")
        });
    }
    Ok(res)
}

/// Outcome of [`compare`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "lowercase")]
pub enum Comparison {
    Equivalent { finite_words: usize, omega_words: usize },
    Disagreement { query: String, grammar: bool, automaton: bool },
}

/// Random ultimately periodic words checked by [`compare`] on top of the
/// exhaustive ones.
pub const RANDOM_OMEGA_WORDS: usize = 200;
/// `|u|, |v|` bound of the random words.
pub const RANDOM_OMEGA_LEN: usize = 6;

/// Grammar versus automaton membership: every finite word up to
/// `max_len`, every ω-word with `|u|, |v| ≤ up_len`, then seeded random
/// ω-words. Stops at the first disagreement.
pub fn compare(aut: &RocAutomaton, opts: &CheckOptions, seed: u64) -> Result<Comparison> {
    let sigma = aut.alphabet().len();
    let grammar = GrammarParser::new(&triple_pair_construct(aut))?;
    let block = solve_star_block(aut, WordSpace::all_up_to(sigma, opts.max_len))?;
    let al = aut.alphabet();
    let mut finite_words = 0;
    for (_, w) in block.space().words() {
        let g = grammar.finite_member(w)?;
        let a = !behavior_coefficient(aut, &block, w)?.is_zero();
        if g != a {
            return Ok(Comparison::Disagreement { query: al.format_word(w), grammar: g, automaton: a });
        }
        finite_words += 1;
    }
    let mut words = up_words(sigma, opts.up_len);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RANDOM_OMEGA_WORDS {
        let ul = rng.gen_range(0..=RANDOM_OMEGA_LEN);
        let vl = rng.gen_range(1..=RANDOM_OMEGA_LEN);
        let u: Word = (0..ul).map(|_| rng.gen_range(0..sigma)).collect();
        let v: Word = (0..vl).map(|_| rng.gen_range(0..sigma)).collect();
        words.push(UPWord::new(u, v).expect("nonempty period"));
    }
    let boolean = aut.boolean();
    let mut omega_words = 0;
    for w in &words {
        let g = grammar.omega_derivation_exists(w, opts.segment_bound)?;
        let a = behavior_omega_member(&boolean, w)?;
        if g != a {
            let query = format!("u={} v={}", al.format_word(w.prefix()), al.format_word(w.period()));
            return Ok(Comparison::Disagreement { query, grammar: g, automaton: a });
        }
        omega_words += 1;
    }
    Ok(Comparison::Equivalent { finite_words, omega_words })
}
