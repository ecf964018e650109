//! Permutations of distinct integers, similarity and canonical patterns.
//!
//! A [`Permutation`] is any finite sequence of distinct integers; most
//! hosts are permutations of `[n] = {1, ..., n}`, but sub-permutations of an
//! arbitrary value set are first-class because the block constructions work
//! on subsets of `[n]`.
//!
//! All positions in the Rust API are 0-based. Text, JSON and certificate
//! files use 1-based positions; conversion happens at the I/O boundary.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TwinsError};

/// A sequence of distinct integers with inverse lookup.
#[derive(Clone, PartialEq, Eq)]
pub struct Permutation {
    values: Vec<i64>,
    // values sorted ascending, and for each rank the position holding it
    sorted: Vec<i64>,
    inverse: Vec<usize>,
    dense: bool,
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Permutation").field(&self.values).finish()
    }
}

impl Permutation {
    /// Builds a permutation, rejecting repeated values.
    pub fn new(values: Vec<i64>) -> Result<Self> {
        let mut inverse: Vec<usize> = (0..values.len()).collect();
        inverse.sort_unstable_by_key(|&p| values[p]);
        let sorted: Vec<i64> = inverse.iter().map(|&p| values[p]).collect();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(TwinsError::DuplicateValue(w[0]));
        }
        let dense = sorted.first() == Some(&1) && sorted.last() == Some(&(sorted.len() as i64));
        Ok(Self { values, sorted, inverse, dense })
    }

    /// The identity permutation `(1, 2, ..., n)`.
    pub fn identity(n: usize) -> Self {
        Self::from_vec_unchecked((1..=n as i64).collect())
    }

    /// The decreasing permutation `(n, n-1, ..., 1)`.
    pub fn reversal(n: usize) -> Self {
        Self::from_vec_unchecked((1..=n as i64).rev().collect())
    }

    pub(crate) fn from_vec_unchecked(values: Vec<i64>) -> Self {
        Self::new(values).expect("values are distinct")
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<i64> {
        self.values
    }

    /// Value at a 0-based position.
    pub fn get(&self, pos: usize) -> Option<i64> {
        self.values.get(pos).copied()
    }

    /// True when the value set is exactly `{1, ..., n}`.
    pub fn is_over_range(&self) -> bool {
        self.dense || self.is_empty()
    }

    /// Rank of `v` among the values (0 for the smallest).
    pub fn rank_of(&self, v: i64) -> Option<usize> {
        if self.dense {
            let r = v - 1;
            (r >= 0 && (r as usize) < self.len()).then_some(r as usize)
        } else {
            self.sorted.binary_search(&v).ok()
        }
    }

    /// 0-based position holding `v`.
    pub fn position_of(&self, v: i64) -> Option<usize> {
        self.rank_of(v).map(|r| self.inverse[r])
    }

    /// Values in ascending order.
    pub fn sorted_values(&self) -> &[i64] {
        &self.sorted
    }

    /// Positions listed by ascending value.
    pub fn positions_by_value(&self) -> &[usize] {
        &self.inverse
    }

    pub fn reverse(&self) -> Self {
        let mut v = self.values.clone();
        v.reverse();
        Self::from_vec_unchecked(v)
    }

    /// Maps each value to `min + max - value`.
    pub fn complement(&self) -> Self {
        let (lo, hi) = match (self.sorted.first(), self.sorted.last()) {
            (Some(&lo), Some(&hi)) => (lo, hi),
            _ => return self.clone(),
        };
        Self::from_vec_unchecked(self.values.iter().map(|&v| lo + hi - v).collect())
    }

    /// Values at the given 0-based positions, in the given order.
    pub fn subsequence(&self, positions: &[usize]) -> Vec<i64> {
        positions.iter().map(|&p| self.values[p]).collect()
    }

    pub fn pattern(&self) -> Result<Pattern> {
        canonical_pattern(&self.values)
    }
}

/// The unique permutation of `{1, ..., k}` similar to a length-k sequence.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Pattern(Vec<u32>);

impl Pattern {
    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The pattern shifted to `{0, ..., k-1}`.
    pub fn zero_based(&self) -> Vec<u32> {
        self.0.iter().map(|&x| x - 1).collect()
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// Reduces a sequence of distinct integers to its canonical pattern.
///
/// Distinctness is assumed; ties are ranked by position.
pub fn canonical_pattern(seq: &[i64]) -> Result<Pattern> {
    if seq.is_empty() {
        return Err(TwinsError::EmptySequence);
    }
    Ok(Pattern(ranks(seq)))
}

pub(crate) fn ranks(seq: &[i64]) -> Vec<u32> {
    let mut order: Vec<usize> = (0..seq.len()).collect();
    order.sort_unstable_by_key(|&i| (seq[i], i));
    let mut out = vec![0u32; seq.len()];
    for (rank, &i) in order.iter().enumerate() {
        out[i] = rank as u32 + 1;
    }
    out
}

/// True iff `x` and `y` have equal length and the same relative order.
pub fn is_similar(x: &[i64], y: &[i64]) -> bool {
    if x.len() != y.len() {
        return false;
    }
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_unstable_by_key(|&i| x[i]);
    order.windows(2).all(|w| y[w[0]] < y[w[1]])
}

/// A uniformly random permutation of `[n]`, reproducible from `seed`.
///
/// The generator is ChaCha8 seeded with `seed_from_u64`, driving a
/// Fisher–Yates shuffle of `(1, ..., n)` from the last slot down. Indices
/// are drawn as `u64` so the stream does not depend on pointer width.
pub fn random_permutation(n: usize, seed: u64) -> Result<Permutation> {
    if n == 0 {
        return Err(TwinsError::EmptySequence);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values: Vec<i64> = (1..=n as i64).collect();
    shuffle(&mut values, &mut rng);
    Ok(Permutation::from_vec_unchecked(values))
}

pub(crate) fn shuffle<T, R: Rng>(values: &mut [T], rng: &mut R) {
    for i in (1..values.len()).rev() {
        let j = rng.gen_range(0..=i as u64) as usize;
        values.swap(i, j);
    }
}

/// The `index`-th permutation of `[n]` in lexicographic order.
pub fn nth_permutation(n: usize, mut index: u64) -> Permutation {
    let mut pool: Vec<i64> = (1..=n as i64).collect();
    let mut fact: Vec<u64> = vec![1; n + 1];
    for i in 1..=n {
        fact[i] = fact[i - 1].saturating_mul(i as u64);
    }
    let mut out = Vec::with_capacity(n);
    for i in (0..n).rev() {
        let q = (index / fact[i]) as usize;
        index %= fact[i];
        out.push(pool.remove(q));
    }
    Permutation::from_vec_unchecked(out)
}

/// `n!` as `u64`, saturating.
pub fn factorial_u64(n: usize) -> u64 {
    (1..=n as u64).fold(1u64, |acc, x| acc.saturating_mul(x))
}

/// Parses one permutation per non-empty line of whitespace-separated integers.
pub fn parse_text(input: &str) -> Result<Vec<Permutation>> {
    input
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|line| {
            let values = line
                .split_whitespace()
                .map(|tok| tok.parse::<i64>().map_err(|e| TwinsError::Parse(format!("{tok:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            Permutation::new(values)
        })
        .collect()
}

/// Parses either a single JSON array of integers or an array of such arrays.
pub fn parse_json(input: &str) -> Result<Vec<Permutation>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Doc {
        One(Vec<i64>),
        Many(Vec<Vec<i64>>),
    }
    let doc: Doc = serde_json::from_str(input).map_err(|e| TwinsError::Parse(e.to_string()))?;
    match doc {
        Doc::One(v) => Ok(vec![Permutation::new(v)?]),
        Doc::Many(vs) => vs.into_iter().map(Permutation::new).collect(),
    }
}

/// Dispatches on the first non-blank character: `[` means JSON, otherwise text.
pub fn parse_any(input: &str) -> Result<Vec<Permutation>> {
    if input.trim_start().starts_with('[') {
        parse_json(input)
    } else {
        parse_text(input)
    }
}

pub fn to_text(p: &Permutation) -> String {
    let parts: Vec<String> = p.values.iter().map(i64::to_string).collect();
    parts.join(" ")
}

pub fn to_json(p: &Permutation) -> String {
    serde_json::to_string(&p.values).expect("integer arrays serialize")
}

impl Serialize for Permutation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.values.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let values = Vec::<i64>::deserialize(d)?;
        Permutation::new(values).map_err(serde::de::Error::custom)
    }
}
