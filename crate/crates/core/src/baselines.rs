//! Baselines built on monotone subsequences: twins cut from one longest
//! monotone subsequence, and squares assembled from repeated extractions.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TwinsError};
use crate::lcs::longest_increasing;
use crate::perm::Permutation;
use crate::twins::TwinsCertificate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Increasing,
    Decreasing,
}

/// A strictly monotone subsequence, as increasing positions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotoneWitness {
    pub direction: Direction,
    pub positions: Vec<usize>,
}

impl MonotoneWitness {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Longest monotone subsequence among the given positions, in one direction.
fn longest_in(host: &Permutation, positions: &[usize], dir: Direction) -> Vec<usize> {
    let key: Vec<i64> = positions
        .iter()
        .map(|&p| match dir {
            Direction::Increasing => host.values()[p],
            Direction::Decreasing => -host.values()[p],
        })
        .collect();
    longest_increasing(&key).into_iter().map(|i| positions[i]).collect()
}

/// A longest monotone subsequence of `p` in O(n log n). Ties go to increasing.
pub fn longest_monotone(p: &Permutation) -> MonotoneWitness {
    let all: Vec<usize> = (0..p.len()).collect();
    let inc = longest_in(p, &all, Direction::Increasing);
    let dec = longest_in(p, &all, Direction::Decreasing);
    if inc.len() >= dec.len() {
        MonotoneWitness { direction: Direction::Increasing, positions: inc }
    } else {
        MonotoneWitness { direction: Direction::Decreasing, positions: dec }
    }
}

/// r-twins of length `floor(L/r)` from consecutive chunks of a longest
/// monotone subsequence of length L.
pub fn es_twins(p: &Permutation, r: usize) -> Result<TwinsCertificate> {
    if r < 2 {
        return Err(TwinsError::InvalidMultiplicity(r));
    }
    let w = longest_monotone(p);
    if w.len() < r {
        return Err(TwinsError::TooShort { len: w.len(), r });
    }
    let k = w.len() / r;
    let lists = w.positions.chunks_exact(k).take(r).map(<[usize]>::to_vec).collect();
    TwinsCertificate::new(p, lists)
}

/// The extraction lengths behind a greedy square, for reporting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SquareTrace {
    pub direction: Direction,
    /// Lengths of the monotone runs found before each removal.
    pub extracted_lengths: Vec<usize>,
    pub side: usize,
}

/// Tries to peel off `side` disjoint monotone runs of length `side` in one
/// direction, each taken as the first `side` entries of a longest run among
/// the positions still available.
fn peel(p: &Permutation, side: usize, direction: Direction) -> Option<(Vec<Vec<usize>>, Vec<usize>)> {
    let mut alive: Vec<usize> = (0..p.len()).collect();
    let mut lists = Vec::with_capacity(side);
    let mut lengths = Vec::with_capacity(side);
    while lists.len() < side {
        let run = longest_in(p, &alive, direction);
        lengths.push(run.len());
        if run.len() < side {
            return None;
        }
        let chunk = run[..side].to_vec();
        alive.retain(|q| chunk.binary_search(q).is_err());
        lists.push(chunk);
    }
    Some((lists, lengths))
}

/// An r-square (r lists of length r) built from repeated monotone extractions.
pub fn greedy_square(p: &Permutation) -> Result<TwinsCertificate> {
    greedy_square_traced(p).map(|(c, _)| c)
}

/// [`greedy_square`] with its extraction record.
///
/// The side is binary searched over `1..=floor(sqrt(n))`; each probe peels
/// in the direction of the longest monotone subsequence first, then the other.
pub fn greedy_square_traced(p: &Permutation) -> Result<(TwinsCertificate, SquareTrace)> {
    if p.is_empty() {
        return Err(TwinsError::EmptySequence);
    }
    let first = longest_monotone(p).direction;
    let other = match first {
        Direction::Increasing => Direction::Decreasing,
        Direction::Decreasing => Direction::Increasing,
    };
    let probe = |s: usize| {
        [first, other].into_iter().find_map(|d| {
            peel(p, s, d)
                .map(|(lists, lengths)| (lists, SquareTrace { direction: d, extracted_lengths: lengths, side: s }))
        })
    };
    let mut best = probe(1).expect("a single entry is a 1-square");
    let (mut lo, mut hi) = (2, p.len().isqrt());
    while lo <= hi {
        let mid = (lo + hi) / 2;
        match probe(mid) {
            Some(found) => {
                best = found;
                lo = mid + 1;
            }
            None => hi = mid - 1,
        }
    }
    let (lists, trace) = best;
    Ok((TwinsCertificate::new(p, lists)?, trace))
}
