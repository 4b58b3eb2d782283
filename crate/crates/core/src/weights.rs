//! The two weight domains 𝔹 and ℕ^∞ and square-matrix algebra over them.
//!
//! `∞` is a distinct value of [`Weight`], never a large integer. Finite
//! naturals are `u128`; an operation whose finite result does not fit is an
//! [`Error::Overflow`], not a saturation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightDomain {
    Bool,
    NatInf,
}

impl fmt::Display for WeightDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightDomain::Bool => f.write_str("bool"),
            WeightDomain::NatInf => f.write_str("natinf"),
        }
    }
}

impl FromStr for WeightDomain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bool" => Ok(WeightDomain::Bool),
            "natinf" => Ok(WeightDomain::NatInf),
            other => Err(Error::Parse { line: 0, message: format!("unknown semiring {other:?}") }),
        }
    }
}

/// An element of 𝔹 or ℕ^∞.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Weight {
    Bool(bool),
    Nat(u128),
    Inf,
}

impl Weight {
    pub fn zero(domain: WeightDomain) -> Self {
        match domain {
            WeightDomain::Bool => Weight::Bool(false),
            WeightDomain::NatInf => Weight::Nat(0),
        }
    }

    pub fn one(domain: WeightDomain) -> Self {
        match domain {
            WeightDomain::Bool => Weight::Bool(true),
            WeightDomain::NatInf => Weight::Nat(1),
        }
    }

    pub fn domain(self) -> WeightDomain {
        match self {
            Weight::Bool(_) => WeightDomain::Bool,
            Weight::Nat(_) | Weight::Inf => WeightDomain::NatInf,
        }
    }

    pub fn is_zero(self) -> bool {
        matches!(self, Weight::Bool(false) | Weight::Nat(0))
    }

    fn same_domain(self, other: Weight) -> Result<WeightDomain> {
        let (d1, d2) = (self.domain(), other.domain());
        if d1 == d2 {
            Ok(d1)
        } else {
            Err(Error::DomainMismatch(d1, d2))
        }
    }

    /// Semiring addition: `or` over 𝔹, extended natural addition over ℕ^∞.
    pub fn add(self, other: Weight) -> Result<Weight> {
        self.same_domain(other)?;
        Ok(match (self, other) {
            (Weight::Bool(a), Weight::Bool(b)) => Weight::Bool(a || b),
            (Weight::Inf, _) | (_, Weight::Inf) => Weight::Inf,
            (Weight::Nat(a), Weight::Nat(b)) => Weight::Nat(a.checked_add(b).ok_or(Error::Overflow)?),
            _ => unreachable!("domains checked"),
        })
    }

    /// Semiring multiplication; `0·∞ = ∞·0 = 0`.
    pub fn mul(self, other: Weight) -> Result<Weight> {
        self.same_domain(other)?;
        Ok(match (self, other) {
            (Weight::Bool(a), Weight::Bool(b)) => Weight::Bool(a && b),
            (Weight::Nat(0), _) | (_, Weight::Nat(0)) => Weight::Nat(0),
            (Weight::Inf, _) | (_, Weight::Inf) => Weight::Inf,
            (Weight::Nat(a), Weight::Nat(b)) => Weight::Nat(a.checked_mul(b).ok_or(Error::Overflow)?),
            _ => unreachable!("domains checked"),
        })
    }

    /// `a* = Σ_{j≥0} aʲ`: `0* = 1* = 1` over 𝔹; over ℕ^∞ `0* = 1` and every
    /// nonzero element (including ∞) has star ∞.
    pub fn star(self) -> Weight {
        match self {
            Weight::Bool(_) => Weight::Bool(true),
            Weight::Nat(0) => Weight::Nat(1),
            Weight::Nat(_) | Weight::Inf => Weight::Inf,
        }
    }

    /// Parses a weight literal (decimal natural or `inf`) in the given domain.
    pub fn parse_in(text: &str, domain: WeightDomain) -> Result<Weight> {
        let bad = || Error::MalformedWeight(text.to_string());
        match domain {
            WeightDomain::Bool => match text {
                "0" => Ok(Weight::Bool(false)),
                "1" => Ok(Weight::Bool(true)),
                _ => Err(bad()),
            },
            WeightDomain::NatInf => {
                if text == "inf" {
                    Ok(Weight::Inf)
                } else if !text.is_empty() && text.bytes().all(|b| b.is_ascii_digit()) {
                    text.parse::<u128>().map(Weight::Nat).map_err(|_| bad())
                } else {
                    Err(bad())
                }
            }
        }
    }

    /// Maps into ℕ^∞ (true ↦ 1).
    pub fn to_count(self) -> DerivCount {
        match self {
            Weight::Bool(b) => DerivCount::Finite(b as u128),
            Weight::Nat(n) => DerivCount::Finite(n),
            Weight::Inf => DerivCount::Infinite,
        }
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Bool(b) => write!(f, "{}", *b as u8),
            Weight::Nat(n) => write!(f, "{n}"),
            Weight::Inf => f.write_str("inf"),
        }
    }
}

/// A count in ℕ ∪ {∞}, exact and never saturated from a finite bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DerivCount {
    Finite(u128),
    Infinite,
}

impl DerivCount {
    pub const ZERO: DerivCount = DerivCount::Finite(0);

    pub fn is_zero(self) -> bool {
        self == DerivCount::ZERO
    }

    pub fn add(self, other: DerivCount) -> Result<DerivCount> {
        match (self, other) {
            (DerivCount::Finite(a), DerivCount::Finite(b)) => a.checked_add(b).map(DerivCount::Finite).ok_or(Error::Overflow),
            _ => Ok(DerivCount::Infinite),
        }
    }

    pub fn mul(self, other: DerivCount) -> Result<DerivCount> {
        match (self, other) {
            (DerivCount::Finite(0), _) | (_, DerivCount::Finite(0)) => Ok(DerivCount::ZERO),
            (DerivCount::Finite(a), DerivCount::Finite(b)) => a.checked_mul(b).map(DerivCount::Finite).ok_or(Error::Overflow),
            _ => Ok(DerivCount::Infinite),
        }
    }

    pub fn to_weight(self, domain: WeightDomain) -> Weight {
        match (domain, self) {
            (WeightDomain::Bool, c) => Weight::Bool(!c.is_zero()),
            (WeightDomain::NatInf, DerivCount::Finite(n)) => Weight::Nat(n),
            (WeightDomain::NatInf, DerivCount::Infinite) => Weight::Inf,
        }
    }
}

impl Default for DerivCount {
    fn default() -> Self {
        DerivCount::ZERO
    }
}

impl fmt::Display for DerivCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DerivCount::Finite(n) => write!(f, "{n}"),
            DerivCount::Infinite => f.write_str("inf"),
        }
    }
}

// Both serialize as their text form ("0", "1", "17", "inf"), matching the
// line-oriented output.
impl Serialize for DerivCount {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl Serialize for Weight {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Rectangular matrix used for block arithmetic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Block {
    rows: usize,
    cols: usize,
    data: Vec<Weight>,
}

impl Block {
    fn filled(rows: usize, cols: usize, w: Weight) -> Self {
        Block { rows, cols, data: vec![w; rows * cols] }
    }

    fn get(&self, i: usize, j: usize) -> Weight {
        self.data[i * self.cols + j]
    }

    fn set(&mut self, i: usize, j: usize, w: Weight) {
        self.data[i * self.cols + j] = w;
    }

    fn sub(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Block {
        let mut out = Block::filled(r1 - r0, c1 - c0, self.data[0]);
        for i in r0..r1 {
            for j in c0..c1 {
                out.set(i - r0, j - c0, self.get(i, j));
            }
        }
        out
    }

    fn add(&self, other: &Block) -> Result<Block> {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.add(*b)).collect::<Result<Vec<_>>>()?;
        Ok(Block { rows: self.rows, cols: self.cols, data })
    }

    fn mul(&self, other: &Block, domain: WeightDomain) -> Result<Block> {
        let mut out = Block::filled(self.rows, other.cols, Weight::zero(domain));
        for i in 0..self.rows {
            for m in 0..self.cols {
                let a = self.get(i, m);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(m, j);
                    if !b.is_zero() {
                        let cur = out.get(i, j);
                        out.set(i, j, cur.add(a.mul(b)?)?);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Kleene star by 2×2 block decomposition:
    /// `[[A,B],[C,D]]* = [[F, F B D*], [D* C F, D* + D* C F B D*]]` with
    /// `F = (A + B D* C)*`.
    fn star(&self, domain: WeightDomain) -> Result<Block> {
        let n = self.rows;
        if n == 1 {
            return Ok(Block { rows: 1, cols: 1, data: vec![self.data[0].star()] });
        }
        let h = n / 2;
        let a = self.sub(0, h, 0, h);
        let b = self.sub(0, h, h, n);
        let c = self.sub(h, n, 0, h);
        let d = self.sub(h, n, h, n);
        let d_star = d.star(domain)?;
        let b_ds = b.mul(&d_star, domain)?;
        let ds_c = d_star.mul(&c, domain)?;
        let f = a.add(&b_ds.mul(&c, domain)?)?.star(domain)?;
        let top_right = f.mul(&b_ds, domain)?;
        let bottom_left = ds_c.mul(&f, domain)?;
        let bottom_right = d_star.add(&bottom_left.mul(&b_ds, domain)?)?;

        let mut out = Block::filled(n, n, Weight::zero(domain));
        for i in 0..n {
            for j in 0..n {
                let w = match (i < h, j < h) {
                    (true, true) => f.get(i, j),
                    (true, false) => top_right.get(i, j - h),
                    (false, true) => bottom_left.get(i - h, j),
                    (false, false) => bottom_right.get(i - h, j - h),
                };
                out.set(i, j, w);
            }
        }
        Ok(out)
    }
}

/// An `n×n` matrix over a single weight domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SquareMatrix {
    domain: WeightDomain,
    inner: Block,
}

impl SquareMatrix {
    pub fn zero(n: usize, domain: WeightDomain) -> Self {
        assert!(n >= 1, "matrix dimension must be positive");
        SquareMatrix { domain, inner: Block::filled(n, n, Weight::zero(domain)) }
    }

    pub fn identity(n: usize, domain: WeightDomain) -> Self {
        let mut m = Self::zero(n, domain);
        for i in 0..n {
            m.inner.set(i, i, Weight::one(domain));
        }
        m
    }

    /// Builds a matrix from rows; all entries must share one domain.
    pub fn from_rows(rows: Vec<Vec<Weight>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::SizeMismatch(0, 1));
        }
        let domain = rows[0][0].domain();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::SizeMismatch(row.len(), n));
            }
            for w in row {
                if w.domain() != domain {
                    return Err(Error::DomainMismatch(domain, w.domain()));
                }
                data.push(w);
            }
        }
        Ok(SquareMatrix { domain, inner: Block { rows: n, cols: n, data } })
    }

    /// Convenience constructor from naturals (`u128::MAX` is read as ∞ when
    /// the domain is ℕ^∞; over 𝔹 nonzero is 1).
    pub fn from_nats(domain: WeightDomain, rows: &[&[u128]]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&x| match domain {
                        WeightDomain::Bool => Weight::Bool(x != 0),
                        WeightDomain::NatInf if x == u128::MAX => Weight::Inf,
                        WeightDomain::NatInf => Weight::Nat(x),
                    })
                    .collect()
            })
            .collect();
        Self::from_rows(rows)
    }

    pub fn n(&self) -> usize {
        self.inner.rows
    }

    pub fn domain(&self) -> WeightDomain {
        self.domain
    }

    pub fn get(&self, i: usize, j: usize) -> Weight {
        self.inner.get(i, j)
    }

    pub fn set(&mut self, i: usize, j: usize, w: Weight) -> Result<()> {
        if w.domain() != self.domain {
            return Err(Error::DomainMismatch(self.domain, w.domain()));
        }
        self.inner.set(i, j, w);
        Ok(())
    }

    pub fn rows(&self) -> Vec<Vec<Weight>> {
        (0..self.n()).map(|i| (0..self.n()).map(|j| self.get(i, j)).collect()).collect()
    }

    fn compatible(&self, other: &SquareMatrix) -> Result<()> {
        if self.n() != other.n() {
            return Err(Error::SizeMismatch(self.n(), other.n()));
        }
        if self.domain != other.domain {
            return Err(Error::DomainMismatch(self.domain, other.domain));
        }
        Ok(())
    }

    pub fn add(&self, other: &SquareMatrix) -> Result<SquareMatrix> {
        self.compatible(other)?;
        Ok(SquareMatrix { domain: self.domain, inner: self.inner.add(&other.inner)? })
    }

    pub fn mul(&self, other: &SquareMatrix) -> Result<SquareMatrix> {
        self.compatible(other)?;
        Ok(SquareMatrix { domain: self.domain, inner: self.inner.mul(&other.inner, self.domain)? })
    }

    /// Least solution of `X = I + A·X`.
    pub fn star(&self) -> Result<SquareMatrix> {
        Ok(SquareMatrix { domain: self.domain, inner: self.inner.star(self.domain)? })
    }

    /// Applies the matrix to a column vector.
    pub fn apply(&self, v: &[Weight]) -> Result<Vec<Weight>> {
        if v.len() != self.n() {
            return Err(Error::SizeMismatch(v.len(), self.n()));
        }
        (0..self.n())
            .map(|i| {
                let mut acc = Weight::zero(self.domain);
                for (j, x) in v.iter().enumerate() {
                    acc = acc.add(self.get(i, j).mul(*x)?)?;
                }
                Ok(acc)
            })
            .collect()
    }

    /// `A^{ω,k}` over 𝔹: entry `j` is 1 iff the graph of nonzero entries has
    /// an infinite path from `j` visiting some state `≤ k` (1-based)
    /// infinitely often.
    pub fn omega_k(&self, k: usize) -> Result<Vec<Weight>> {
        if self.domain != WeightDomain::Bool {
            return Err(Error::Unsupported(self.domain, "omega_k is defined over bool only"));
        }
        let n = self.n();
        if k > n {
            return Err(Error::KOutOfRange { k, n });
        }
        let star = self.star()?;
        let plus = self.mul(&star)?;
        Ok((0..n)
            .map(|j| {
                let hit = (0..k).any(|m| !star.get(j, m).is_zero() && !plus.get(m, m).is_zero());
                Weight::Bool(hit)
            })
            .collect())
    }
}

impl fmt::Display for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n() {
            let row: Vec<String> = (0..self.n()).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

pub fn w_add(a: Weight, b: Weight) -> Result<Weight> {
    a.add(b)
}

pub fn w_mul(a: Weight, b: Weight) -> Result<Weight> {
    a.mul(b)
}

pub fn w_star(a: Weight) -> Weight {
    a.star()
}

pub fn mat_mul(a: &SquareMatrix, b: &SquareMatrix) -> Result<SquareMatrix> {
    a.mul(b)
}

pub fn mat_star(a: &SquareMatrix) -> Result<SquareMatrix> {
    a.star()
}

pub fn mat_omega_k(a: &SquareMatrix, k: usize) -> Result<Vec<Weight>> {
    a.omega_k(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    const B0: Weight = Weight::Bool(false);
    const B1: Weight = Weight::Bool(true);

    fn nat(x: u128) -> Weight {
        Weight::Nat(x)
    }

    #[test]
    fn scalar_examples() {
        assert_eq!(w_add(B1, B1).unwrap(), B1);
        assert_eq!(w_add(nat(2), nat(3)).unwrap(), nat(5));
        assert_eq!(w_add(Weight::Inf, nat(0)).unwrap(), Weight::Inf);
        assert_eq!(w_mul(B1, B0).unwrap(), B0);
        assert_eq!(w_mul(nat(0), Weight::Inf).unwrap(), nat(0));
        assert_eq!(w_mul(nat(2), Weight::Inf).unwrap(), Weight::Inf);
    }

    #[test]
    fn star_examples() {
        assert_eq!(w_star(B0), B1);
        assert_eq!(w_star(B1), B1);
        assert_eq!(w_star(nat(0)), nat(1));
        assert_eq!(w_star(Weight::Inf), Weight::Inf);
        // partial sums of 3^j exceed any bound
        let mut sum = 0u128;
        for j in 0..60 {
            sum += 3u128.pow(j);
        }
        assert!(sum > u64::MAX as u128);
        assert_eq!(w_star(nat(3)), Weight::Inf);
    }

    #[test]
    fn domain_mismatch_rejected() {
        assert_eq!(w_add(B1, nat(1)), Err(Error::DomainMismatch(WeightDomain::Bool, WeightDomain::NatInf)));
        assert!(w_mul(nat(1), B0).is_err());
    }

    #[test]
    fn overflow_is_an_error() {
        assert_eq!(w_add(nat(u128::MAX), nat(1)), Err(Error::Overflow));
        assert_eq!(w_mul(nat(u128::MAX), nat(2)), Err(Error::Overflow));
    }

    #[test]
    fn literals() {
        assert_eq!(Weight::parse_in("inf", WeightDomain::NatInf).unwrap(), Weight::Inf);
        assert_eq!(Weight::parse_in("17", WeightDomain::NatInf).unwrap(), nat(17));
        assert!(Weight::parse_in("2", WeightDomain::Bool).is_err());
        assert!(Weight::parse_in("inf", WeightDomain::Bool).is_err());
        assert!(Weight::parse_in("-1", WeightDomain::NatInf).is_err());
        assert!(Weight::parse_in("", WeightDomain::NatInf).is_err());
    }

    #[test]
    fn matrix_examples() {
        let d = WeightDomain::Bool;
        let m = SquareMatrix::from_nats(d, &[&[0, 1], &[0, 0]]).unwrap();
        assert_eq!(mat_mul(&m, &m).unwrap(), SquareMatrix::zero(2, d));
        assert_eq!(mat_mul(&SquareMatrix::identity(2, d), &m).unwrap(), m);
        assert_eq!(mat_star(&m).unwrap(), SquareMatrix::from_nats(d, &[&[1, 1], &[0, 1]]).unwrap());
        let swap = SquareMatrix::from_nats(d, &[&[0, 1], &[1, 0]]).unwrap();
        assert_eq!(mat_star(&swap).unwrap(), SquareMatrix::from_nats(d, &[&[1, 1], &[1, 1]]).unwrap());

        let u = SquareMatrix::from_nats(WeightDomain::NatInf, &[&[1, 1], &[0, 1]]).unwrap();
        assert_eq!(mat_mul(&u, &u).unwrap(), SquareMatrix::from_nats(WeightDomain::NatInf, &[&[1, 2], &[0, 1]]).unwrap());
        assert_eq!(mat_star(&SquareMatrix::zero(1, WeightDomain::NatInf)).unwrap(), SquareMatrix::identity(1, WeightDomain::NatInf));
    }

    #[test]
    fn natinf_star_counts_paths() {
        // single edge 0 -> 1, no cycles: star counts exactly one path
        let m = SquareMatrix::from_nats(WeightDomain::NatInf, &[&[0, 2, 0], &[0, 0, 3], &[0, 0, 0]]).unwrap();
        let s = mat_star(&m).unwrap();
        assert_eq!(s, SquareMatrix::from_nats(WeightDomain::NatInf, &[&[1, 2, 6], &[0, 1, 3], &[0, 0, 1]]).unwrap());
        // a cycle makes every entry reaching it infinite
        let c = SquareMatrix::from_nats(WeightDomain::NatInf, &[&[0, 1], &[1, 0]]).unwrap();
        let s = mat_star(&c).unwrap();
        assert!(s.rows().iter().flatten().all(|w| *w == Weight::Inf));
    }

    #[test]
    fn omega_k_examples() {
        let d = WeightDomain::Bool;
        let one = SquareMatrix::from_nats(d, &[&[1]]).unwrap();
        assert_eq!(mat_omega_k(&one, 1).unwrap(), vec![B1]);
        assert_eq!(mat_omega_k(&one, 0).unwrap(), vec![B0]);
        let chain = SquareMatrix::from_nats(d, &[&[0, 1], &[0, 0]]).unwrap();
        assert_eq!(mat_omega_k(&chain, 2).unwrap(), vec![B0, B0]);
        assert!(matches!(mat_omega_k(&chain, 3), Err(Error::KOutOfRange { .. })));
        // 1 -> 2 <-> 3 with k = 2: only the cycle through 2 counts
        let m = SquareMatrix::from_nats(d, &[&[0, 1, 0], &[0, 0, 1], &[0, 1, 0]]).unwrap();
        assert_eq!(mat_omega_k(&m, 1).unwrap(), vec![B0, B0, B0]);
        assert_eq!(mat_omega_k(&m, 2).unwrap(), vec![B1, B1, B1]);
        assert!(mat_omega_k(&SquareMatrix::zero(1, WeightDomain::NatInf), 1).is_err());
    }
}
