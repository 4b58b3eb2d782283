//! Finite behavior: the truncated least solution of
//! `X = A·X·X + C·X + B` (entries `[i,p,j]` are the weights of counter-1-to-0
//! runs from state `i` to state `j`) and the series `I·X·P`.
//!
//! The coefficient of a word `w` depends only on words no longer than `w`,
//! and words of equal length interact only with themselves (through ε
//! moves). The solver therefore walks a factor-closed [`WordSpace`] by
//! length, solving one small system per word:
//!
//! * ε itself satisfies the quadratic system `X = Aε·X·X + Cε·X + Bε`;
//! * every longer word satisfies a linear system `Y = K + Aε·Xε·Y + Aε·Y·Xε + Cε·Y`
//!   where `K` collects contributions of strictly shorter words.
//!
//! Over 𝔹 both are solved by Kleene iteration (finite lattice). Over ℕ^∞
//! the ε system is evaluated as an exact derivation count with cycle
//! detection, and each linear system as `T*·K` with the block-decomposition
//! star, so ∞ entries are exact.

use crate::automaton::{Label, MoveKind, RocAutomaton};
use crate::error::{Error, Result};
use crate::forest::Forest;
use crate::weights::{SquareMatrix, Weight, WeightDomain};
use crate::words::{TruncatedSeries, Word, WordSpace};

/// Letter-indexed coefficient matrices of one block.
struct LabelMatrices {
    eps: SquareMatrix,
    letters: Vec<SquareMatrix>,
}

impl LabelMatrices {
    fn new(aut: &RocAutomaton, kind: MoveKind) -> Self {
        LabelMatrices {
            eps: aut.label_matrix(kind, None),
            letters: (0..aut.alphabet().len()).map(|s| aut.label_matrix(kind, Some(s))).collect(),
        }
    }
}

/// The matrix `(M*)_{p,ε}` evaluated on every word of a factor-closed space.
#[derive(Debug, Clone)]
pub struct StarBlock {
    space: WordSpace,
    values: Vec<SquareMatrix>,
}

impl StarBlock {
    pub fn space(&self) -> &WordSpace {
        &self.space
    }

    pub fn at_id(&self, id: usize) -> &SquareMatrix {
        &self.values[id]
    }

    /// The matrix of coefficients of `w`, if `w` is in the space.
    pub fn get(&self, w: &[usize]) -> Option<&SquareMatrix> {
        self.space.id(w).map(|id| &self.values[id])
    }
}

fn kleene_epsilon(a: &SquareMatrix, c: &SquareMatrix, b: &SquareMatrix) -> Result<SquareMatrix> {
    let mut x = SquareMatrix::zero(a.n(), a.domain());
    loop {
        let next = a.mul(&x)?.mul(&x)?.add(&c.mul(&x)?)?.add(b)?;
        if next == x {
            return Ok(x);
        }
        x = next;
    }
}

fn counted_epsilon(a: &SquareMatrix, c: &SquareMatrix, b: &SquareMatrix) -> Result<SquareMatrix> {
    let n = a.n();
    let node = |i: usize, j: usize| i * n + j;
    let mut forest = Forest::with_nodes(n * n);
    for i in 0..n {
        for j in 0..n {
            forest.push(node(i, j), b.get(i, j).to_count(), vec![]);
            for m in 0..n {
                forest.push(node(i, j), c.get(i, m).to_count(), vec![node(m, j)]);
                for m2 in 0..n {
                    forest.push(node(i, j), a.get(i, m).to_count(), vec![node(m, m2), node(m2, j)]);
                }
            }
        }
    }
    let values = forest.evaluate()?;
    let mut x = SquareMatrix::zero(n, a.domain());
    for i in 0..n {
        for j in 0..n {
            x.set(i, j, values[node(i, j)].to_weight(a.domain()))?;
        }
    }
    Ok(x)
}

/// The `n²×n²` matrix of `Y ↦ Aε·Xε·Y + Aε·Y·Xε + Cε·Y` on row-major `Y`.
fn linear_operator(a: &SquareMatrix, c: &SquareMatrix, x_eps: &SquareMatrix) -> Result<SquareMatrix> {
    let n = a.n();
    let d = a.domain();
    let ax = a.mul(x_eps)?;
    let mut t = SquareMatrix::zero(n * n, d);
    let idx = |i: usize, j: usize| i * n + j;
    let bump = |t: &mut SquareMatrix, r: usize, col: usize, w: Weight| -> Result<()> {
        let cur = t.get(r, col);
        t.set(r, col, cur.add(w)?)
    };
    for i in 0..n {
        for j in 0..n {
            let r = idx(i, j);
            for m in 0..n {
                bump(&mut t, r, idx(m, j), ax.get(i, m))?;
                bump(&mut t, r, idx(m, j), c.get(i, m))?;
                for m2 in 0..n {
                    bump(&mut t, r, idx(m, m2), a.get(i, m).mul(x_eps.get(m2, j))?)?;
                }
            }
        }
    }
    Ok(t)
}

/// Solves for `(M*)_{p,ε}` on every word of `space`.
pub fn solve_star_block(aut: &RocAutomaton, space: WordSpace) -> Result<StarBlock> {
    let n = aut.n();
    let d = aut.domain();
    let push = LabelMatrices::new(aut, MoveKind::Push);
    let stay = LabelMatrices::new(aut, MoveKind::Stay);
    let pop = LabelMatrices::new(aut, MoveKind::Pop);
    let zero = SquareMatrix::zero(n, d);

    let eps_id = space.id(&[]).expect("word spaces contain ε");
    let x_eps = match d {
        WeightDomain::Bool => kleene_epsilon(&push.eps, &stay.eps, &pop.eps)?,
        WeightDomain::NatInf => counted_epsilon(&push.eps, &stay.eps, &pop.eps)?,
    };
    let t_star = match d {
        WeightDomain::Bool => None,
        WeightDomain::NatInf => Some(linear_operator(&push.eps, &stay.eps, &x_eps)?.star()?),
    };

    let mut values = vec![zero.clone(); space.len()];
    values[eps_id] = x_eps.clone();

    for (id, w) in space.words() {
        if w.is_empty() {
            continue;
        }
        let first = w[0];
        let tail = space.suffix(id, 1);

        // contributions of strictly shorter words
        let mut pairs_tail = zero.clone();
        for (x, y) in space.splits(tail) {
            pairs_tail = pairs_tail.add(&values[x].mul(&values[y])?)?;
        }
        let mut k = push.letters[first].mul(&pairs_tail)?;
        k = k.add(&stay.letters[first].mul(&values[tail])?)?;
        if w.len() == 1 {
            k = k.add(&pop.letters[first])?;
        }
        let mut inner_pairs = zero.clone();
        for t in 1..w.len() {
            let (x, y) = (space.prefix(id, t), space.suffix(id, t));
            inner_pairs = inner_pairs.add(&values[x].mul(&values[y])?)?;
        }
        k = k.add(&push.eps.mul(&inner_pairs)?)?;

        values[id] = match &t_star {
            None => {
                let mut y = zero.clone();
                loop {
                    let next = k.add(&push.eps.mul(&x_eps)?.mul(&y)?)?.add(&push.eps.mul(&y)?.mul(&x_eps)?)?.add(&stay.eps.mul(&y)?)?;
                    if next == y {
                        break y;
                    }
                    y = next;
                }
            }
            Some(ts) => {
                let flat: Vec<Weight> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| k.get(i, j)).collect();
                let solved = ts.apply(&flat)?;
                let mut y = zero.clone();
                for i in 0..n {
                    for j in 0..n {
                        y.set(i, j, solved[i * n + j])?;
                    }
                }
                y
            }
        };
    }
    Ok(StarBlock { space, values })
}

/// The coefficient of `w` in `I·X·P`, where the initial and final
/// polynomials contribute their letters at the ends of the word.
pub fn behavior_coefficient(aut: &RocAutomaton, block: &StarBlock, w: &[usize]) -> Result<Weight> {
    let n = aut.n();
    let d = aut.domain();
    let mut acc = Weight::zero(d);
    let heads: Vec<Label> = std::iter::once(None).chain(w.first().map(|&s| Some(s))).collect();
    let tails: Vec<Label> = std::iter::once(None).chain(w.last().map(|&s| Some(s))).collect();
    for &a in &heads {
        for &b in &tails {
            let start = a.is_some() as usize;
            let end = w.len() - b.is_some() as usize;
            if start > end {
                continue;
            }
            let Some(x) = block.get(&w[start..end]) else { continue };
            for m1 in 0..n {
                let i = aut.initial(m1).coeff(a, d);
                if i.is_zero() {
                    continue;
                }
                for m2 in 0..n {
                    let p = aut.final_entry(m2).coeff(b, d);
                    acc = acc.add(i.mul(x.get(m1, m2))?.mul(p)?)?;
                }
            }
        }
    }
    Ok(acc)
}

/// `(M*)_{p,ε}` truncated to length `max_len`, as an `n×n` matrix of series.
pub fn finite_star_block(aut: &RocAutomaton, max_len: usize) -> Result<Vec<Vec<TruncatedSeries>>> {
    let block = solve_star_block(aut, WordSpace::all_up_to(aut.alphabet().len(), max_len))?;
    let n = aut.n();
    let mut out = vec![vec![TruncatedSeries::zero(aut.domain(), max_len); n]; n];
    for (id, w) in block.space().words() {
        let m = block.at_id(id);
        for (i, row) in out.iter_mut().enumerate() {
            for (j, series) in row.iter_mut().enumerate() {
                series.set(w.to_vec(), m.get(i, j));
            }
        }
    }
    Ok(out)
}

/// The finite behavior `I·(M*)_{p,ε}·P` truncated to length `max_len`.
pub fn finite_behavior(aut: &RocAutomaton, max_len: usize) -> Result<TruncatedSeries> {
    let block = solve_star_block(aut, WordSpace::all_up_to(aut.alphabet().len(), max_len))?;
    let mut out = TruncatedSeries::zero(aut.domain(), max_len);
    for (_, w) in block.space().words() {
        out.set(w.to_vec(), behavior_coefficient(aut, &block, w)?);
    }
    Ok(out)
}

/// The coefficient `(⟦C⟧, w)` of the finite behavior.
pub fn weight_of_word(aut: &RocAutomaton, w: &[usize]) -> Result<Weight> {
    check_word(aut, w)?;
    let block = solve_star_block(aut, WordSpace::factors_of(w))?;
    behavior_coefficient(aut, &block, w)
}

pub(crate) fn check_word(aut: &RocAutomaton, w: &[usize]) -> Result<()> {
    match w.iter().find(|&&s| s >= aut.alphabet().len()) {
        Some(s) => Err(Error::ForeignLetter(format!("#{s}"))),
        None => Ok(()),
    }
}

/// Convenience: the series of one word list in a shared space.
pub fn weights_of_words(aut: &RocAutomaton, words: &[Word]) -> Result<Vec<Weight>> {
    for w in words {
        check_word(aut, w)?;
    }
    let block = solve_star_block(aut, WordSpace::factors_of_all(words.iter().map(|w| w.as_slice())))?;
    words.iter().map(|w| behavior_coefficient(aut, &block, w)).collect()
}

/// Largest `n` handled by [`SpanSupport`].
pub const MAX_SPAN_STATES: usize = 64;

/// Which entries of `(M*)_{p,ε}` are nonzero on every factor `w[s..e]` of
/// one word with `e - s ≤ width`; rows are bitmasks over the target state.
///
/// Much cheaper than a [`StarBlock`] when only the support over the
/// factors of a single long word is needed.
#[derive(Debug, Clone)]
pub struct SpanSupport {
    n: usize,
    len: usize,
    width: usize,
    rows: Vec<u64>,
}

impl SpanSupport {
    pub fn new(aut: &RocAutomaton, w: &[usize], width: usize) -> Result<Self> {
        check_word(aut, w)?;
        let n = aut.n();
        if n > MAX_SPAN_STATES {
            return Err(Error::TooManyStates { n, max: MAX_SPAN_STATES });
        }
        let len = w.len();
        let width = width.min(len);
        let mut t = SpanSupport { n, len, width, rows: vec![0; (len + 1) * (width + 1) * n] };
        let nonzero = |kind: MoveKind| -> Vec<(usize, usize, Label)> {
            let mut out = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    out.extend(aut.entry(kind, i, j).terms().filter(|(_, c)| !c.is_zero()).map(|(l, _)| (i, j, l)));
                }
            }
            out
        };
        let (push, stay, pop) = (nonzero(MoveKind::Push), nonzero(MoveKind::Stay), nonzero(MoveKind::Pop));
        let after = |s: usize, e: usize, a: Label| match a {
            None => Some(s),
            Some(a) if s < e && w[s] == a => Some(s + 1),
            Some(_) => None,
        };
        for width in 0..=width {
            for s in 0..=len - width {
                let e = s + width;
                // after the first pass only ε-moves that read the span
                // itself can add anything
                let mut first = true;
                loop {
                    let mut changed = false;
                    if first {
                        for &(i, j, a) in &pop {
                            if after(s, e, a) == Some(e) {
                                changed |= t.join(s, e, i, 1 << j);
                            }
                        }
                    }
                    for &(i, m, a) in &stay {
                        if !first && a.is_some() {
                            continue;
                        }
                        if let Some(s1) = after(s, e, a) {
                            let r = t.row(s1, e, m);
                            changed |= t.join(s, e, i, r);
                        }
                    }
                    for &(i, m1, a) in &push {
                        if !first && a.is_some() {
                            continue;
                        }
                        let Some(s1) = after(s, e, a) else { continue };
                        for mid in s1..=e {
                            if !first && mid != s1 && mid != e {
                                continue;
                            }
                            let mut mids = t.row(s1, mid, m1);
                            while mids != 0 {
                                let m2 = mids.trailing_zeros() as usize;
                                mids &= mids - 1;
                                let r = t.row(mid, e, m2);
                                changed |= t.join(s, e, i, r);
                            }
                        }
                    }
                    first = false;
                    if !changed {
                        break;
                    }
                }
            }
        }
        Ok(t)
    }

    fn at(&self, s: usize, e: usize, i: usize) -> usize {
        (s * (self.width + 1) + (e - s)) * self.n + i
    }

    fn row(&self, s: usize, e: usize, i: usize) -> u64 {
        self.rows[self.at(s, e, i)]
    }

    fn join(&mut self, s: usize, e: usize, i: usize, bits: u64) -> bool {
        let at = self.at(s, e, i);
        let old = self.rows[at];
        self.rows[at] |= bits;
        self.rows[at] != old
    }

    /// Whether entry `(i, j)` is nonzero on `w[s..e]`; `false` outside the
    /// tabulated spans.
    pub fn get(&self, s: usize, e: usize, i: usize, j: usize) -> bool {
        s <= e && e <= self.len && e - s <= self.width && i < self.n && j < self.n && self.row(s, e, i) >> j & 1 == 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{random_corpus, RandomSpec};
    use crate::fixtures::{C_INF, C_L};
    use crate::words::Alphabet;

    fn lukasiewicz(w: &[usize]) -> bool {
        // one more b (1) than a (0), every proper prefix has #b ≤ #a
        let mut h = 1i64;
        for (t, &s) in w.iter().enumerate() {
            h += if s == 0 { 1 } else { -1 };
            if h == 0 && t + 1 != w.len() {
                return false;
            }
        }
        h == 0
    }

    #[test]
    fn lukasiewicz_support_up_to_five() {
        let aut = RocAutomaton::parse(C_L).unwrap();
        let series = finite_behavior(&aut, 5).unwrap();
        let got: Vec<String> = series.support().into_iter().map(|(w, _)| aut.alphabet().format_word(w)).collect();
        assert_eq!(got, ["b", "abb", "aabbb", "ababb"]);
        for (_, w) in WordSpace::all_up_to(2, 8).words() {
            assert_eq!(weight_of_word(&aut, w).unwrap() == Weight::Bool(true), lukasiewicz(w), "{w:?}");
        }
    }

    #[test]
    fn fixture_coefficients() {
        let aut = RocAutomaton::parse(C_L).unwrap();
        assert_eq!(weight_of_word(&aut, &[0, 1]).unwrap(), Weight::Bool(false));
        assert_eq!(weight_of_word(&aut, &[1, 0]).unwrap(), Weight::Bool(false));
        let inf = RocAutomaton::parse(C_INF).unwrap();
        assert_eq!(weight_of_word(&inf, &[1]).unwrap(), Weight::Inf);
        let series = finite_behavior(&inf, 1).unwrap();
        assert_eq!(series.support(), vec![(&vec![1], Weight::Inf)]);
        assert!(matches!(weight_of_word(&aut, &[2]), Err(Error::ForeignLetter(_))));
    }

    #[test]
    fn no_pops_or_no_initials_give_zero() {
        let alphabet = Alphabet::new(["a", "b"]).unwrap();
        let mut no_pop = RocAutomaton::new(WeightDomain::NatInf, 2, alphabet.clone(), 1).unwrap();
        no_pop.add_transition(MoveKind::Push, 0, 1, Some(0), Weight::Nat(2)).unwrap();
        no_pop.add_transition(MoveKind::Stay, 1, 0, None, Weight::Nat(1)).unwrap();
        no_pop.add_initial(0, None, Weight::Nat(1)).unwrap();
        no_pop.add_final(0, None, Weight::Nat(1)).unwrap();
        assert!(finite_star_block(&no_pop, 4).unwrap().iter().flatten().all(|s| s.is_zero()));
        let mut no_init = RocAutomaton::parse(C_L).unwrap();
        no_init = RocAutomaton::parse(&no_init.to_text().replace("initial 1 eps 1", "")).unwrap();
        assert!(finite_behavior(&no_init, 6).unwrap().is_zero());
    }

    #[test]
    fn weighted_counts_multiply() {
        let text = C_L.replace("semiring bool", "semiring natinf").replace("push 1 1 a 1", "push 1 1 a 3");
        let aut = RocAutomaton::parse(&text).unwrap();
        assert_eq!(weight_of_word(&aut, &[0, 0, 1, 1, 1]).unwrap(), Weight::Nat(9));
    }

    #[test]
    fn span_support_matches_star_block() {
        for domain in [WeightDomain::Bool, WeightDomain::NatInf] {
            for aut in random_corpus(11, 30, &RandomSpec::new(domain)) {
                let w = [0, 1, 1, 0, 1, 0, 0];
                let spans = SpanSupport::new(&aut, &w, 5).unwrap();
                let block = solve_star_block(&aut, WordSpace::factors_of(&w)).unwrap();
                for s in 0..=w.len() {
                    for e in s..=w.len().min(s + 5) {
                        let x = block.get(&w[s..e]).unwrap();
                        for i in 0..aut.n() {
                            for j in 0..aut.n() {
                                assert_eq!(spans.get(s, e, i, j), !x.get(i, j).is_zero(), "{}", aut.to_text());
                            }
                        }
                    }
                }
            }
        }
    }
}
