//! Independent reference code for integration tests. Nothing here calls into
//! the library's search or pattern routines.
#![allow(dead_code)]

use itertools::Itertools;

/// Order-isomorphism by comparing every pair of indices.
pub fn naive_similar(a: &[i64], b: &[i64]) -> bool {
    a.len() == b.len() && (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] < a[j]) == (b[i] < b[j])))
}

/// All permutations of `1..=n`, lexicographic.
pub fn all_perms(n: usize) -> Vec<Vec<i64>> {
    (1..=n as i64).permutations(n).collect()
}

/// Maximum length of r-twins, by trying every labelling of positions with
/// `0` (unused) or one of `1..=r`.
pub fn naive_max_twins(values: &[i64], r: usize) -> usize {
    let n = values.len();
    let mut labels = vec![0usize; n];
    let mut best = 0;
    loop {
        let mut sizes = vec![0usize; r + 1];
        for &l in &labels {
            sizes[l] += 1;
        }
        let k = sizes[1];
        if k > best && sizes[1..].iter().all(|&s| s == k) {
            let class = |c: usize| -> Vec<i64> { (0..n).filter(|&i| labels[i] == c).map(|i| values[i]).collect() };
            let first = class(1);
            if (2..=r).all(|c| naive_similar(&first, &class(c))) {
                best = k;
            }
        }
        // next labelling in base r+1
        let mut i = 0;
        while i < n && labels[i] == r {
            labels[i] = 0;
            i += 1;
        }
        if i == n {
            return best;
        }
        labels[i] += 1;
    }
}

/// Largest s such that the host holds s-twins of length at least s.
pub fn naive_max_square(values: &[i64]) -> usize {
    (1..=values.len())
        .take_while(|s| s * s <= values.len())
        .filter(|&s| naive_max_twins(values, s) >= s)
        .max()
        .unwrap_or(0)
}

/// Number of unordered families of r disjoint k-sets of positions carrying
/// pairwise similar values.
pub fn naive_twin_count(values: &[i64], k: usize, r: usize) -> u64 {
    let sets: Vec<Vec<usize>> = (0..values.len()).combinations(k).collect();
    sets.iter()
        .combinations(r)
        .filter(|fam| {
            let disjoint = fam.iter().flat_map(|s| s.iter()).all_unique();
            let vals: Vec<Vec<i64>> = fam.iter().map(|s| s.iter().map(|&p| values[p]).collect()).collect();
            disjoint && vals[1..].iter().all(|v| naive_similar(&vals[0], v))
        })
        .count() as u64
}

/// Smallest t with `t^big_r >= m`.
pub fn naive_lemma_bound(m: usize, big_r: usize) -> usize {
    (0..).find(|&t: &usize| (t as u128).pow(big_r as u32) >= m as u128).expect("terminates")
}

/// Whether `seq` occurs as a subsequence of `host`.
pub fn is_subsequence(seq: &[i64], host: &[i64]) -> bool {
    let mut it = host.iter();
    seq.iter().all(|x| it.any(|y| y == x))
}

/// 0-based relabelling preserving order.
pub fn zero_based(seq: &[i64]) -> Vec<i64> {
    seq.iter().map(|&x| seq.iter().filter(|&&y| y < x).count() as i64).collect()
}

pub const WORKED_HOST: [i64; 30] =
    [26, 16, 28, 29, 10, 5, 24, 27, 1, 22, 11, 8, 2, 23, 15, 19, 25, 21, 20, 13, 9, 30, 17, 12, 18, 7, 3, 14, 4, 6];
