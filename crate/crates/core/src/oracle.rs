//! Exact, exponential-time ground truth for small hosts: the maximum twin
//! length of a permutation, its minimum over all permutations of `[n]`, and
//! the largest square.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TwinsError};
use crate::perm::{factorial_u64, nth_permutation, Permutation};
use crate::twins::TwinsCertificate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OnExceed {
    Fail,
    ReturnLowerBound,
}

/// Limits for the exhaustive searches. `max_nodes` applies per host.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleBudget {
    pub max_n: usize,
    pub max_nodes: u64,
    pub on_exceed: OnExceed,
}

impl Default for OracleBudget {
    fn default() -> Self {
        Self { max_n: 16, max_nodes: 200_000_000, on_exceed: OnExceed::Fail }
    }
}

/// Result of an oracle search. `exact` is false only when the budget ran out
/// under [`OnExceed::ReturnLowerBound`]; `k` is then a lower bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleOutcome {
    pub k: usize,
    pub witness: TwinsCertificate,
    pub exact: bool,
}

struct Search<'a> {
    vals: &'a [i64],
    r: usize,
    k: usize,
    used: Vec<bool>,
    lists: Vec<Vec<usize>>,
    nodes: u64,
    max_nodes: u64,
}

impl Search<'_> {
    fn tick(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            return Err(TwinsError::BudgetExceeded { lower_bound: None });
        }
        Ok(())
    }

    // Lists are filled one after another, each in increasing position order,
    // so the first complete assignment found is the lexicographically
    // smallest concatenation. List t starts after list t-1 starts.
    fn fill_list(&mut self, t: usize) -> Result<bool> {
        if t == self.r {
            return Ok(true);
        }
        let start = if t == 0 { 0 } else { self.lists[t - 1][0] + 1 };
        let free = (start..self.vals.len()).filter(|&q| !self.used[q]).count();
        if free < (self.r - t) * self.k {
            return Ok(false);
        }
        self.extend(t, start)
    }

    fn extend(&mut self, t: usize, start: usize) -> Result<bool> {
        self.tick()?;
        let c = self.lists[t].len();
        if c == self.k {
            return self.fill_list(t + 1);
        }
        let n = self.vals.len();
        let need = self.k - c;
        for q in start..n {
            if n - q < need {
                break;
            }
            if self.used[q] || !self.consistent(t, c, q) {
                continue;
            }
            self.used[q] = true;
            self.lists[t].push(q);
            if self.extend(t, q + 1)? {
                return Ok(true);
            }
            self.lists[t].pop();
            self.used[q] = false;
        }
        Ok(false)
    }

    fn consistent(&self, t: usize, c: usize, q: usize) -> bool {
        if t == 0 {
            return true;
        }
        let lead = &self.lists[0];
        let v = self.vals[q];
        self.lists[t].iter().zip(lead).all(|(&p, &lp)| (v > self.vals[p]) == (self.vals[lead[c]] > self.vals[lp]))
    }
}

/// Looks for r-twins of length `k`, returning the lexicographically smallest
/// concatenated position lists. `nodes` accumulates search nodes across calls.
fn twins_of_length(
    vals: &[i64],
    r: usize,
    k: usize,
    nodes: &mut u64,
    max_nodes: u64,
) -> Result<Option<Vec<Vec<usize>>>> {
    if r * k > vals.len() {
        return Ok(None);
    }
    if k == 0 {
        return Ok(Some(vec![Vec::new(); r]));
    }
    let mut s = Search {
        vals,
        r,
        k,
        used: vec![false; vals.len()],
        lists: vec![Vec::with_capacity(k); r],
        nodes: *nodes,
        max_nodes,
    };
    let found = s.fill_list(0);
    *nodes = s.nodes;
    Ok(if found? { Some(s.lists) } else { None })
}

/// Exact maximum length of r-twins in `p`, with a witness.
///
/// Iterative deepening on the length: existence is monotone because truncating
/// every list to a common prefix keeps them similar. Hosts shorter than `r`
/// get `k = 0` and an empty witness.
pub fn exact_twins_length(p: &Permutation, r: usize, budget: &OracleBudget) -> Result<OracleOutcome> {
    if r < 2 {
        return Err(TwinsError::InvalidMultiplicity(r));
    }
    deepen(p, budget, |k| (r, k), p.len() / r)
}

/// Largest s such that `p` contains s-twins of length s.
pub fn exact_square(p: &Permutation, budget: &OracleBudget) -> Result<OracleOutcome> {
    if p.is_empty() {
        return Err(TwinsError::EmptySequence);
    }
    let max_s = (1..=p.len()).take_while(|s| s * s <= p.len()).last().unwrap_or(1);
    deepen(p, budget, |s| (s, s), max_s)
}

fn deepen(
    p: &Permutation,
    budget: &OracleBudget,
    shape: impl Fn(usize) -> (usize, usize),
    max_k: usize,
) -> Result<OracleOutcome> {
    if p.len() > budget.max_n {
        return Err(TwinsError::BudgetExceeded { lower_bound: None });
    }
    let mut nodes = 0u64;
    let (r0, _) = shape(0);
    let mut best = TwinsCertificate::empty(p, r0);
    let mut best_k = 0;
    for k in 1..=max_k {
        let (r, len) = shape(k);
        match twins_of_length(p.values(), r, len, &mut nodes, budget.max_nodes) {
            Ok(Some(lists)) => {
                best = TwinsCertificate::new(p, lists)?;
                best_k = k;
            }
            Ok(None) => break,
            Err(TwinsError::BudgetExceeded { .. }) => {
                return match budget.on_exceed {
                    OnExceed::Fail => Err(TwinsError::BudgetExceeded { lower_bound: Some(best_k) }),
                    OnExceed::ReturnLowerBound => Ok(OracleOutcome { k: best_k, witness: best, exact: false }),
                };
            }
            Err(e) => return Err(e),
        }
    }
    Ok(OracleOutcome { k: best_k, witness: best, exact: true })
}

/// Minimum of [`exact_twins_length`] over all permutations of `[n]`.
///
/// Hosts are scanned in parallel; the returned argmin is the lexicographically
/// first permutation attaining the minimum.
pub fn exact_t_r_n(n: usize, r: usize, budget: &OracleBudget) -> Result<(usize, Permutation)> {
    if n == 0 {
        return Err(TwinsError::EmptySequence);
    }
    if n > budget.max_n || n > 20 {
        return Err(TwinsError::BudgetExceeded { lower_bound: None });
    }
    let strict = OracleBudget { on_exceed: OnExceed::Fail, ..*budget };
    let total = factorial_u64(n);
    let (k, idx) = (0..total)
        .into_par_iter()
        .map(|i| exact_twins_length(&nth_permutation(n, i), r, &strict).map(|o| (o.k, i)))
        .try_reduce(|| (usize::MAX, u64::MAX), |a, b| Ok(a.min(b)))?;
    Ok((k, nth_permutation(n, idx)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::twins::verify;

    fn b() -> OracleBudget {
        OracleBudget::default()
    }

    #[test]
    fn identity_gives_half() {
        for n in 1..=12 {
            let p = Permutation::identity(n);
            let o = exact_twins_length(&p, 2, &b()).unwrap();
            assert_eq!(o.k, n / 2);
            assert!(verify(&p, &o.witness).unwrap());
        }
    }

    #[test]
    fn small_cases() {
        let p = Permutation::new(vec![2, 1]).unwrap();
        assert_eq!(exact_twins_length(&p, 2, &b()).unwrap().k, 1);
        let short = Permutation::new(vec![1]).unwrap();
        let o = exact_twins_length(&short, 2, &b()).unwrap();
        assert_eq!(o.k, 0);
        assert!(o.witness.is_empty());
        assert!(verify(&short, &o.witness).unwrap());
        assert_eq!(exact_twins_length(&p, 1, &b()), Err(TwinsError::InvalidMultiplicity(1)));
    }

    #[test]
    fn t_r_n_small_values() {
        assert_eq!(exact_t_r_n(2, 2, &b()).unwrap().0, 1);
        // (1,4,3,2): the three ways to split four positions into two pairs
        // give an increasing pair against a decreasing one
        let (k4, arg4) = exact_t_r_n(4, 2, &b()).unwrap();
        assert_eq!(k4, 1);
        assert_eq!(arg4.values(), &[1, 4, 3, 2]);
        assert_eq!(exact_t_r_n(5, 2, &b()).unwrap().0, 2);
        assert_eq!(exact_t_r_n(3, 3, &b()).unwrap().0, 1);
    }

    #[test]
    fn witness_is_lexicographically_smallest() {
        let p = Permutation::identity(4);
        let o = exact_twins_length(&p, 2, &b()).unwrap();
        assert_eq!(o.witness.index_lists, vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn squares() {
        let o = exact_square(&Permutation::identity(9), &b()).unwrap();
        assert_eq!(o.k, 3);
        assert_eq!(o.witness.r, 3);
        assert_eq!(exact_square(&Permutation::identity(1), &b()).unwrap().k, 1);
        let p = Permutation::new(vec![3, 6, 2, 5, 1, 4]).unwrap();
        assert_eq!(exact_square(&p, &b()).unwrap().k, 2);
        assert!(exact_twins_length(&p, 2, &b()).unwrap().k >= 2);
        assert!(exact_twins_length(&p, 3, &b()).unwrap().k < 3);
    }

    #[test]
    fn budget_handling() {
        let p = crate::perm::random_permutation(12, 5).unwrap();
        let tight = OracleBudget { max_nodes: 10, ..b() };
        assert!(matches!(exact_twins_length(&p, 2, &tight), Err(TwinsError::BudgetExceeded { lower_bound: Some(_) })));
        let lenient = OracleBudget { on_exceed: OnExceed::ReturnLowerBound, ..tight };
        let o = exact_twins_length(&p, 2, &lenient).unwrap();
        assert!(!o.exact);
        assert!(verify(&p, &o.witness).unwrap());
        let small = OracleBudget { max_n: 5, ..b() };
        assert!(matches!(exact_twins_length(&p, 2, &small), Err(TwinsError::BudgetExceeded { .. })));
    }
}
