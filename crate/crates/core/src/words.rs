//! Alphabets, finite words, ultimately periodic words and truncated series.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::weights::{Weight, WeightDomain};

/// A finite word as a sequence of alphabet indices.
pub type Word = Vec<usize>;

/// An ordered alphabet of non-space letter tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    letters: Vec<String>,
    index: HashMap<String, usize>,
}

impl Alphabet {
    pub fn new<I, S>(letters: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut out = Alphabet { letters: Vec::new(), index: HashMap::new() };
        for l in letters {
            let l = l.into();
            if out.index.contains_key(&l) {
                continue;
            }
            out.index.insert(l.clone(), out.letters.len());
            out.letters.push(l);
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[String] {
        &self.letters
    }

    pub fn name(&self, sym: usize) -> &str {
        &self.letters[sym]
    }

    pub fn lookup(&self, token: &str) -> Result<usize> {
        self.index.get(token).copied().ok_or_else(|| Error::ForeignLetter(token.to_string()))
    }

    fn single_chars(&self) -> bool {
        self.letters.iter().all(|l| l.chars().count() == 1)
    }

    /// Parses the CLI word syntax: `.`-separated tokens, or plain
    /// concatenation when every letter is a single character. `""` is ε.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let text = text.trim();
        let text = if text == "\"\"" { "" } else { text };
        if text.is_empty() {
            return Ok(Vec::new());
        }
        if text.contains('.') {
            text.split('.').map(|t| self.lookup(t)).collect()
        } else if self.single_chars() {
            text.chars().map(|c| self.lookup(&c.to_string())).collect()
        } else {
            Ok(vec![self.lookup(text)?])
        }
    }

    pub fn format_word(&self, w: &[usize]) -> String {
        if w.is_empty() {
            return "\"\"".to_string();
        }
        let sep = if self.single_chars() { "" } else { "." };
        w.iter().map(|&s| self.letters[s].as_str()).collect::<Vec<_>>().join(sep)
    }
}

/// An ultimately periodic ω-word `u·v^ω` with `|v| ≥ 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UPWord {
    prefix: Word,
    period: Word,
}

impl UPWord {
    pub fn new(prefix: Word, period: Word) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::EmptyPeriod);
        }
        Ok(UPWord { prefix, period })
    }

    pub fn prefix(&self) -> &[usize] {
        &self.prefix
    }

    pub fn period(&self) -> &[usize] {
        &self.period
    }

    /// Number of distinct positions (phases): `|u| + |v|`.
    pub fn phases(&self) -> usize {
        self.prefix.len() + self.period.len()
    }

    pub fn letter_at_phase(&self, phase: usize) -> usize {
        if phase < self.prefix.len() {
            self.prefix[phase]
        } else {
            self.period[phase - self.prefix.len()]
        }
    }

    /// Phase reached after consuming `steps` letters from `phase`.
    pub fn advance(&self, phase: usize, steps: usize) -> usize {
        let p = phase + steps;
        let u = self.prefix.len();
        if p < self.phases() {
            p
        } else {
            u + (p - u) % self.period.len()
        }
    }

    /// The letter at absolute position `i` of the infinite word.
    pub fn letter(&self, i: usize) -> usize {
        self.letter_at_phase(self.advance(0, i))
    }

    /// The first `len` letters.
    pub fn take(&self, len: usize) -> Word {
        (0..len).map(|i| self.letter(i)).collect()
    }

    /// The `len` letters starting at `phase`.
    pub fn segment(&self, phase: usize, len: usize) -> Word {
        (0..len).map(|i| self.letter_at_phase(self.advance(phase, i))).collect()
    }

    /// The suffix starting at the given phase, as an ultimately periodic word.
    pub fn from_phase(&self, phase: usize) -> UPWord {
        let u = self.prefix.len();
        if phase < u {
            UPWord { prefix: self.prefix[phase..].to_vec(), period: self.period.clone() }
        } else {
            let r = phase - u;
            let mut period = self.period[r..].to_vec();
            period.extend_from_slice(&self.period[..r]);
            UPWord { prefix: Vec::new(), period }
        }
    }

    /// The suffix after `n` letters.
    pub fn drop(&self, n: usize) -> UPWord {
        self.from_phase(self.advance(0, n))
    }
}

/// A finite set of words closed under factors, indexed by length then
/// lexicographic order. Every prefix and suffix of a member is a member.
#[derive(Debug, Clone)]
pub struct WordSpace {
    words: Vec<Word>,
    index: HashMap<Word, usize>,
    prefix_ids: Vec<Vec<usize>>,
    suffix_ids: Vec<Vec<usize>>,
}

impl WordSpace {
    /// All words of length `≤ max_len` over an alphabet of `sigma` letters.
    pub fn all_up_to(sigma: usize, max_len: usize) -> Self {
        let mut words = vec![Vec::new()];
        let mut layer: Vec<Word> = vec![Vec::new()];
        for _ in 0..max_len {
            let mut next = Vec::with_capacity(layer.len() * sigma);
            for w in &layer {
                for s in 0..sigma {
                    let mut x = w.clone();
                    x.push(s);
                    next.push(x);
                }
            }
            words.extend(next.iter().cloned());
            layer = next;
        }
        Self::build(words)
    }

    /// All factors of `w` (including ε and `w`).
    pub fn factors_of(w: &[usize]) -> Self {
        Self::factors_of_all(std::iter::once(w))
    }

    /// All factors of every given word.
    pub fn factors_of_all<'a, I>(ws: I) -> Self
    where
        I: IntoIterator<Item = &'a [usize]>,
    {
        let mut set: HashSet<Word> = HashSet::new();
        set.insert(Vec::new());
        for w in ws {
            for s in 0..w.len() {
                for t in s + 1..=w.len() {
                    if !set.contains(&w[s..t]) {
                        set.insert(w[s..t].to_vec());
                    }
                }
            }
        }
        Self::build(set.into_iter().collect())
    }

    fn build(mut words: Vec<Word>) -> Self {
        words.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        words.dedup();
        let index: HashMap<Word, usize> = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        let prefix_ids = words.iter().map(|w| (0..=w.len()).map(|t| index[&w[..t]]).collect()).collect();
        let suffix_ids = words.iter().map(|w| (0..=w.len()).map(|t| index[&w[t..]]).collect()).collect();
        WordSpace { words, index, prefix_ids, suffix_ids }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn word(&self, id: usize) -> &[usize] {
        &self.words[id]
    }

    pub fn words(&self) -> impl Iterator<Item = (usize, &[usize])> {
        self.words.iter().enumerate().map(|(i, w)| (i, w.as_slice()))
    }

    pub fn id(&self, w: &[usize]) -> Option<usize> {
        self.index.get(w).copied()
    }

    /// Id of the prefix of length `t` of word `id`.
    pub fn prefix(&self, id: usize, t: usize) -> usize {
        self.prefix_ids[id][t]
    }

    /// Id of the suffix starting at `t` of word `id`.
    pub fn suffix(&self, id: usize, t: usize) -> usize {
        self.suffix_ids[id][t]
    }

    /// All `(x, y)` with `x·y = word(id)`, as ids.
    pub fn splits(&self, id: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let len = self.words[id].len();
        (0..=len).map(move |t| (self.prefix_ids[id][t], self.suffix_ids[id][t]))
    }
}

/// A power series truncated to words of length `≤ max_len`; absent keys
/// have coefficient zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    max_len: usize,
    domain: WeightDomain,
    coeffs: BTreeMap<Word, Weight>,
}

impl TruncatedSeries {
    pub fn zero(domain: WeightDomain, max_len: usize) -> Self {
        TruncatedSeries { max_len, domain, coeffs: BTreeMap::new() }
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn domain(&self) -> WeightDomain {
        self.domain
    }

    /// Sets a coefficient; zero removes the key. Words longer than the
    /// truncation bound are ignored.
    pub fn set(&mut self, w: Word, c: Weight) {
        if w.len() > self.max_len {
            return;
        }
        if c.is_zero() {
            self.coeffs.remove(&w);
        } else {
            self.coeffs.insert(w, c);
        }
    }

    pub fn get(&self, w: &[usize]) -> Weight {
        self.coeffs.get(w).copied().unwrap_or(Weight::zero(self.domain))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Nonzero coefficients ordered by length, then lexicographically.
    pub fn support(&self) -> Vec<(&Word, Weight)> {
        let mut v: Vec<_> = self.coeffs.iter().map(|(w, c)| (w, *c)).collect();
        v.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(b.0)));
        v
    }

    pub fn restrict(&self, max_len: usize) -> TruncatedSeries {
        let max_len = max_len.min(self.max_len);
        TruncatedSeries {
            max_len,
            domain: self.domain,
            coeffs: self.coeffs.iter().filter(|(w, _)| w.len() <= max_len).map(|(w, c)| (w.clone(), *c)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_syntax() {
        let ab = Alphabet::new(["a", "b"]).unwrap();
        assert_eq!(ab.parse_word("abb").unwrap(), vec![0, 1, 1]);
        assert_eq!(ab.parse_word("a.b").unwrap(), vec![0, 1]);
        assert_eq!(ab.parse_word("\"\"").unwrap(), Vec::<usize>::new());
        assert_eq!(ab.parse_word("").unwrap(), Vec::<usize>::new());
        assert!(matches!(ab.parse_word("ac"), Err(Error::ForeignLetter(_))));
        assert_eq!(ab.format_word(&[0, 1]), "ab");

        let multi = Alphabet::new(["go", "stop"]).unwrap();
        assert_eq!(multi.parse_word("go.stop.go").unwrap(), vec![0, 1, 0]);
        assert_eq!(multi.parse_word("stop").unwrap(), vec![1]);
        assert_eq!(multi.format_word(&[0, 1]), "go.stop");
    }

    #[test]
    fn up_word_positions() {
        let w = UPWord::new(vec![1], vec![0, 1]).unwrap();
        assert_eq!(w.take(6), vec![1, 0, 1, 0, 1, 0]);
        assert_eq!(w.advance(2, 1), 1);
        assert_eq!(w.drop(2), UPWord::new(vec![], vec![1, 0]).unwrap());
        assert_eq!(w.drop(0), w);
        assert_eq!(w.segment(2, 3), vec![1, 0, 1]);
        assert!(matches!(UPWord::new(vec![0], vec![]), Err(Error::EmptyPeriod)));
    }

    #[test]
    fn spaces_are_factor_closed() {
        let s = WordSpace::all_up_to(2, 3);
        assert_eq!(s.len(), 15);
        let f = WordSpace::factors_of(&[0, 1, 0]);
        // ε, a, b, ab, ba, aba
        assert_eq!(f.len(), 6);
        let id = f.id(&[0, 1, 0]).unwrap();
        let splits: Vec<_> = f.splits(id).map(|(x, y)| (f.word(x).to_vec(), f.word(y).to_vec())).collect();
        assert_eq!(splits.len(), 4);
        assert_eq!(splits[1], (vec![0], vec![1, 0]));
    }

    #[test]
    fn truncation() {
        let mut s = TruncatedSeries::zero(WeightDomain::Bool, 3);
        s.set(vec![0], Weight::Bool(true));
        s.set(vec![0, 1, 1], Weight::Bool(true));
        s.set(vec![0, 1, 1, 1], Weight::Bool(true));
        assert_eq!(s.support().len(), 2);
        assert_eq!(s.restrict(1).support().len(), 1);
        assert_eq!(s.get(&[1]), Weight::Bool(false));
    }
}
