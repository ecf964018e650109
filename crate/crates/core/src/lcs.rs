//! Longest common sub-permutation of several permutations of one set, and the
//! best r-subset among 2r-1 permutations.
//!
//! For permutations, a common subsequence is a chain in the product of the
//! position orders: element `e` precedes `f` in every input. Two inputs reduce
//! to a longest increasing subsequence; more inputs use an O(m^2 r) chain DP.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, TwinsError};
use crate::perm::Permutation;

/// A longest common sub-permutation, with where it sits in each input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommonSubpermResult {
    pub length: usize,
    /// The common elements, in their shared order.
    pub elements: Vec<i64>,
    /// For each input, the increasing 0-based positions of `elements`.
    pub per_perm_positions: Vec<Vec<usize>>,
}

/// The chosen r inputs (0-based, increasing) and their common sub-permutation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubsetSelection {
    pub chosen_indices: Vec<usize>,
    pub result: CommonSubpermResult,
}

/// Default cap on DP work, counted as `m * m * r` comparisons.
pub const DEFAULT_MAX_WORK: u64 = 4_000_000_000;

/// `R = C(2r-1, r)`.
pub fn big_r(r: usize) -> usize {
    binomial(2 * r - 1, r) as usize
}

pub(crate) fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Smallest integer `t` with `t^R >= m`, i.e. `ceil(m^(1/R))` computed exactly.
pub fn lemma_bound(m: usize, r: usize) -> usize {
    let big = big_r(r) as u32;
    let mut t = 0usize;
    loop {
        match (t as u128).checked_pow(big) {
            Some(p) if p < m as u128 => t += 1,
            _ => return t,
        }
    }
}

pub fn common_subperm(perms: &[Permutation]) -> Result<CommonSubpermResult> {
    common_subperm_with_budget(perms, DEFAULT_MAX_WORK)
}

pub fn common_subperm_with_budget(perms: &[Permutation], max_work: u64) -> Result<CommonSubpermResult> {
    let first = perms.first().ok_or(TwinsError::ArityMismatch { expected: 2, got: 0 })?;
    if perms.iter().any(|p| p.sorted_values() != first.sorted_values()) {
        return Err(TwinsError::SetMismatch);
    }
    let m = first.len();
    let elements = match perms.len() {
        1 => first.values().to_vec(),
        2 => lis_route(&perms[0], &perms[1]),
        r => {
            let work = (m as u64).saturating_mul(m as u64).saturating_mul(r as u64);
            if work > max_work {
                return Err(TwinsError::BudgetExceeded { lower_bound: None });
            }
            chain_dp(perms)
        }
    };
    let per_perm_positions =
        perms.iter().map(|p| elements.iter().map(|&e| p.position_of(e).expect("common set")).collect()).collect();
    Ok(CommonSubpermResult { length: elements.len(), elements, per_perm_positions })
}

// Relabel the second permutation by positions in the first; a common
// subsequence is then an increasing subsequence.
fn lis_route(a: &Permutation, b: &Permutation) -> Vec<i64> {
    let seq: Vec<usize> = b.values().iter().map(|&v| a.position_of(v).expect("common set")).collect();
    longest_increasing(&seq).into_iter().map(|i| b.values()[i]).collect()
}

/// Indices of a longest strictly increasing subsequence, by patience sorting.
pub(crate) fn longest_increasing<T: Ord + Copy>(seq: &[T]) -> Vec<usize> {
    // tails[l] = index of the smallest tail of an increasing run of length l+1
    let mut tails: Vec<usize> = Vec::new();
    let mut prev = vec![usize::MAX; seq.len()];
    for i in 0..seq.len() {
        let l = tails.partition_point(|&t| seq[t] < seq[i]);
        if l > 0 {
            prev[i] = tails[l - 1];
        }
        if l == tails.len() {
            tails.push(i);
        } else {
            tails[l] = i;
        }
    }
    let mut out = Vec::with_capacity(tails.len());
    let mut cur = tails.last().copied();
    while let Some(i) = cur {
        out.push(i);
        cur = (prev[i] != usize::MAX).then_some(prev[i]);
    }
    out.reverse();
    out
}

pub(crate) fn chain_dp(perms: &[Permutation]) -> Vec<i64> {
    let order = perms[0].values();
    let m = order.len();
    let pos: Vec<Vec<usize>> =
        order.iter().map(|&e| perms[1..].iter().map(|p| p.position_of(e).expect("common set")).collect()).collect();
    let mut best = vec![1usize; m];
    let mut prev = vec![usize::MAX; m];
    for i in 0..m {
        for j in 0..i {
            if best[j] + 1 > best[i] && pos[j].iter().zip(&pos[i]).all(|(a, b)| a < b) {
                best[i] = best[j] + 1;
                prev[i] = j;
            }
        }
    }
    let Some(end) = (0..m).max_by_key(|&i| (best[i], std::cmp::Reverse(i))) else {
        return Vec::new();
    };
    let mut out = vec![order[end]];
    let mut cur = end;
    while prev[cur] != usize::MAX {
        cur = prev[cur];
        out.push(order[cur]);
    }
    out.reverse();
    out
}

/// All r-subsets of `0..n` in lexicographic order.
pub(crate) fn subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..r).collect();
    if r > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..r).rev().find(|&i| cur[i] < n - r + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..r {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Among 2r-1 permutations of one m-element set, the r of them with the
/// longest common sub-permutation; ties go to the lexicographically smallest
/// index tuple.
///
/// Any r of 2r-1 permutations of an m-set are known to share a
/// sub-permutation of length at least `m^(1/R)`, `R = C(2r-1, r)`. A result
/// below that is returned as [`TwinsError::LemmaViolation`].
pub fn best_r_of_2r_minus_1(perms: &[Permutation], r: usize) -> Result<SubsetSelection> {
    if r < 2 {
        return Err(TwinsError::InvalidMultiplicity(r));
    }
    if perms.len() != 2 * r - 1 {
        return Err(TwinsError::ArityMismatch { expected: 2 * r - 1, got: perms.len() });
    }
    let candidates = subsets(perms.len(), r);
    let results = candidates
        .par_iter()
        .map(|idx| {
            let chosen: Vec<Permutation> = idx.iter().map(|&i| perms[i].clone()).collect();
            common_subperm(&chosen)
        })
        .collect::<Result<Vec<_>>>()?;
    let (best, result) = candidates
        .into_iter()
        .zip(results)
        .reduce(|a, b| if b.1.length > a.1.length { b } else { a })
        .expect("at least one subset");
    let m = perms[0].len();
    let bound = lemma_bound(m, r);
    if result.length < bound {
        return Err(TwinsError::LemmaViolation { found: result.length, bound, m, big_r: big_r(r) });
    }
    Ok(SubsetSelection { chosen_indices: best, result })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::random_permutation;

    fn p(v: &[i64]) -> Permutation {
        Permutation::new(v.to_vec()).unwrap()
    }

    // Classical quadratic LCS on sequences, kept independent of the LIS route.
    fn lcs_len(a: &[i64], b: &[i64]) -> usize {
        let mut dp = vec![vec![0usize; b.len() + 1]; a.len() + 1];
        for i in 1..=a.len() {
            for j in 1..=b.len() {
                dp[i][j] = if a[i - 1] == b[j - 1] { dp[i - 1][j - 1] + 1 } else { dp[i - 1][j].max(dp[i][j - 1]) };
            }
        }
        dp[a.len()][b.len()]
    }

    fn check_witness(perms: &[Permutation], res: &CommonSubpermResult) {
        for (perm, positions) in perms.iter().zip(&res.per_perm_positions) {
            assert!(positions.windows(2).all(|w| w[0] < w[1]));
            assert_eq!(perm.subsequence(positions), res.elements);
        }
    }

    #[test]
    fn constants() {
        assert_eq!(big_r(2), 3);
        assert_eq!(big_r(3), 10);
        assert_eq!(big_r(4), 35);
        assert_eq!(lemma_bound(27, 2), 3);
        assert_eq!(lemma_bound(28, 2), 4);
        assert_eq!(lemma_bound(1, 3), 1);
        assert_eq!(lemma_bound(30, 3), 2);
        assert_eq!(lemma_bound(0, 2), 0);
    }

    #[test]
    fn subsets_are_lexicographic() {
        assert_eq!(subsets(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(subsets(5, 3).len(), 10);
    }

    #[test]
    fn trivial_cases() {
        let id = Permutation::identity(7);
        let res = common_subperm(&[id.clone(), id.clone(), id.clone()]).unwrap();
        assert_eq!(res.length, 7);
        let res = common_subperm(&[id.clone(), Permutation::reversal(7)]).unwrap();
        assert_eq!(res.length, 1);
        assert_eq!(common_subperm(&[id, p(&[1, 2, 3, 4, 5, 6, 8])]), Err(TwinsError::SetMismatch));
    }

    #[test]
    fn worked_example_selection() {
        let bars: Vec<Permutation> =
            [[5, 3, 0, 2, 4, 1], [5, 4, 0, 3, 2, 1], [5, 1, 4, 2, 3, 0], [5, 4, 3, 1, 2, 0], [1, 0, 2, 4, 3, 5]]
                .iter()
                .map(|v| p(v))
                .collect();
        let sel = best_r_of_2r_minus_1(&bars, 3).unwrap();
        assert_eq!(sel.result.length, 3);
        let trio = [bars[0].clone(), bars[2].clone(), bars[3].clone()];
        let res = common_subperm(&trio).unwrap();
        assert_eq!(res.length, 3);
        check_witness(&trio, &res);
        for q in &trio {
            let pos: Vec<usize> = [5, 3, 0].iter().map(|&v| q.position_of(v).unwrap()).collect();
            assert!(pos.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn five_copies() {
        let q = random_permutation(6, 3).unwrap();
        let sel = best_r_of_2r_minus_1(&vec![q; 5], 3).unwrap();
        assert_eq!(sel.result.length, 6);
        assert_eq!(sel.chosen_indices, vec![0, 1, 2]);
    }

    #[test]
    fn arity_checked() {
        let q = Permutation::identity(3);
        assert_eq!(
            best_r_of_2r_minus_1(&[q.clone(), q.clone()], 2),
            Err(TwinsError::ArityMismatch { expected: 3, got: 2 })
        );
    }

    #[test]
    fn budget_is_enforced() {
        let q = Permutation::identity(50);
        assert!(matches!(
            common_subperm_with_budget(&[q.clone(), q.clone(), q], 100),
            Err(TwinsError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn lemma_holds_on_random_triples() {
        for seed in 0..100u64 {
            let perms: Vec<Permutation> = (0..3).map(|i| random_permutation(27, seed * 3 + i).unwrap()).collect();
            let sel = best_r_of_2r_minus_1(&perms, 2).unwrap();
            assert!(sel.result.length >= 3);
        }
    }

    proptest::proptest! {
        #[test]
        fn two_perms_match_classical_lcs(m in 1usize..50, s1 in 0u64..1000, s2 in 0u64..1000) {
            let a = random_permutation(m, s1).unwrap();
            let b = random_permutation(m, s2).unwrap();
            let res = common_subperm(&[a.clone(), b.clone()]).unwrap();
            proptest::prop_assert_eq!(res.length, lcs_len(a.values(), b.values()));
            proptest::prop_assert_eq!(chain_dp(&[a.clone(), b.clone()]).len(), res.length);
            check_witness(&[a, b], &res);
        }

        #[test]
        fn adding_a_permutation_never_lengthens(m in 1usize..30, seed in 0u64..10_000) {
            let perms: Vec<Permutation> = (0..4).map(|i| random_permutation(m, seed * 4 + i).unwrap()).collect();
            let mut last = usize::MAX;
            for r in 1..=4 {
                let res = common_subperm(&perms[..r]).unwrap();
                check_witness(&perms[..r], &res);
                proptest::prop_assert!(res.length <= last);
                last = res.length;
            }
        }
    }
}
