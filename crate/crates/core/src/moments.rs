//! First-moment quantities for the number X of r-twins of length k in a
//! uniformly random permutation of `[n]`, and exhaustive counting of X in a
//! fixed host.
//!
//! `E X = n! / (r! (k!)^(2r-1) (n-rk)!)`: there are `n! / (k!^r r! (n-rk)!)`
//! unordered families of r disjoint k-sets of positions, and each carries
//! similar subsequences with probability `1 / k!^(r-1)`.
//!
//! Values are exact rationals up to [`EXACT_LOG_LIMIT`]; above that
//! [`log_expected_twin_count`] switches to log-gamma.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use statrs::function::gamma::ln_gamma;

use crate::error::{Result, TwinsError};
use crate::perm::{ranks, Permutation};

/// Largest `n` for which logs are taken of the exact rational.
pub const EXACT_LOG_LIMIT: usize = 2_000;

fn factorial(n: usize) -> BigUint {
    (2..=n as u64).fold(BigUint::one(), |acc, x| acc * x)
}

fn falling(n: usize, len: usize) -> BigUint {
    (0..len as u64).fold(BigUint::one(), |acc, i| acc * (n as u64 - i))
}

fn check_length(n: usize, k: usize, r: usize) -> Result<()> {
    if r < 2 {
        return Err(TwinsError::InvalidMultiplicity(r));
    }
    if r * k > n {
        return Err(TwinsError::InfeasibleLength { n, k, rk: r * k });
    }
    Ok(())
}

/// `E X = n(n-1)...(n-rk+1) / (r! (k!)^(2r-1))`, exactly.
pub fn expected_twin_count(n: usize, k: usize, r: usize) -> Result<BigRational> {
    check_length(n, k, r)?;
    let num = falling(n, r * k);
    let den = factorial(r) * factorial(k).pow(2 * r as u32 - 1);
    Ok(BigRational::new(BigInt::from(num), BigInt::from(den)))
}

/// `1 / (k!)^(r-1)`: the chance that r fixed disjoint k-sets of positions
/// carry pairwise similar subsequences.
pub fn position_match_probability(k: usize, r: usize) -> BigRational {
    let den = factorial(k).pow(r.saturating_sub(1) as u32);
    BigRational::new(BigInt::one(), BigInt::from(den))
}

/// Natural log of a positive big integer, accurate to double precision.
pub(crate) fn ln_big(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64 bits");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn ln_rational(q: &BigRational) -> f64 {
    if q.is_zero() {
        return f64::NEG_INFINITY;
    }
    ln_big(q.numer()) - ln_big(q.denom())
}

/// `ln E X`; negative infinity when `rk > n` (no r-twins of that length fit).
pub fn log_expected_twin_count(n: usize, k: usize, r: usize) -> f64 {
    if r * k > n {
        return f64::NEG_INFINITY;
    }
    if n <= EXACT_LOG_LIMIT {
        return ln_rational(&expected_twin_count(n, k, r).expect("length checked"));
    }
    let ln_fact = |m: usize| ln_gamma(m as f64 + 1.0);
    ln_fact(n) - ln_fact(n - r * k) - ln_fact(r) - (2 * r - 1) as f64 * ln_fact(k)
}

/// `ceil(2e * n^(r/(2r-1)))`: beyond this length the expected number of
/// r-twins drops below `2^(-(2r-1)k)`.
pub fn upper_threshold(n: usize, r: usize) -> u64 {
    let exponent = r as f64 / (2.0 * r as f64 - 1.0);
    (2.0 * std::f64::consts::E * (n as f64).powf(exponent)).ceil() as u64
}

/// Whether `ln E X < -(2r-1) k ln 2` at `k = upper_threshold(n, r)`.
pub fn threshold_bound_holds(n: usize, r: usize) -> bool {
    let k = upper_threshold(n, r) as usize;
    log_expected_twin_count(n, k, r) < -((2 * r - 1) as f64) * k as f64 * std::f64::consts::LN_2
}

/// Limits for [`count_twins`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountBudget {
    pub max_subsets: u64,
    pub max_nodes: u64,
}

impl Default for CountBudget {
    fn default() -> Self {
        Self { max_subsets: 5_000_000, max_nodes: 200_000_000 }
    }
}

/// Number of unordered families of r pairwise disjoint k-sets of positions
/// whose subsequences in `host` are pairwise similar.
pub fn count_twins(host: &Permutation, k: usize, r: usize, budget: &CountBudget) -> Result<u64> {
    let n = host.len();
    check_length(n, k, r)?;
    if n > 128 || crate::lcs::binomial(n, k) > budget.max_subsets {
        return Err(TwinsError::BudgetExceeded { lower_bound: None });
    }
    let mut classes: HashMap<Vec<u32>, Vec<u128>> = HashMap::new();
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        let vals: Vec<i64> = subset.iter().map(|&p| host.values()[p]).collect();
        let mask = subset.iter().fold(0u128, |m, &p| m | (1u128 << p));
        classes.entry(ranks(&vals)).or_default().push(mask);
        let Some(i) = (0..k).rev().find(|&i| subset[i] < n - k + i) else { break };
        subset[i] += 1;
        for j in i + 1..k {
            subset[j] = subset[j - 1] + 1;
        }
    }
    let mut nodes = 0u64;
    let mut total = 0u64;
    for masks in classes.values() {
        total += count_disjoint(masks, 0, 0, r, &mut nodes, budget.max_nodes)?;
    }
    Ok(total)
}

fn count_disjoint(masks: &[u128], from: usize, taken: u128, left: usize, nodes: &mut u64, max: u64) -> Result<u64> {
    if left == 0 {
        return Ok(1);
    }
    *nodes += 1;
    if *nodes > max {
        return Err(TwinsError::BudgetExceeded { lower_bound: None });
    }
    let mut total = 0;
    for i in from..masks.len() {
        if masks[i] & taken == 0 {
            total += count_disjoint(masks, i + 1, taken | masks[i], left - 1, nodes, max)?;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::random_permutation;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn expected_counts() {
        assert_eq!(expected_twin_count(4, 1, 2).unwrap(), q(6, 1));
        assert_eq!(expected_twin_count(6, 2, 2).unwrap(), q(45, 2));
        // n = rk: (rk)! / (r! (k!)^(2r-1)); 9! / (3! 6^5) = 362880 / 46656
        assert_eq!(expected_twin_count(9, 3, 3).unwrap(), q(362_880, 6 * 7776));
        assert_eq!(expected_twin_count(5, 3, 2), Err(TwinsError::InfeasibleLength { n: 5, k: 3, rk: 6 }));
    }

    #[test]
    fn match_probabilities() {
        assert_eq!(position_match_probability(1, 5), q(1, 1));
        assert_eq!(position_match_probability(2, 2), q(1, 2));
        assert_eq!(position_match_probability(3, 3), q(1, 36));
    }

    #[test]
    fn thresholds() {
        assert_eq!(upper_threshold(1, 2), 6);
        assert_eq!(upper_threshold(1, 3), 6);
        let mut last = 0;
        for n in (1..100_000).step_by(997) {
            let t = upper_threshold(n, 2);
            assert!(t >= last);
            last = t;
        }
        assert!(threshold_bound_holds(1_000_000, 2));
    }

    #[test]
    fn log_routes_agree_near_switchover() {
        let n = EXACT_LOG_LIMIT;
        for (k, r) in [(10, 2), (50, 2), (30, 3), (200, 3)] {
            let exact = ln_rational(&expected_twin_count(n, k, r).unwrap());
            let ln_fact = |m: usize| ln_gamma(m as f64 + 1.0);
            let approx = ln_fact(n) - ln_fact(n - r * k) - ln_fact(r) - (2 * r - 1) as f64 * ln_fact(k);
            assert!((exact - approx).abs() < 1e-9 * exact.abs().max(1.0), "{exact} vs {approx}");
        }
        assert_eq!(log_expected_twin_count(10, 6, 2), f64::NEG_INFINITY);
    }

    #[test]
    fn counting_singletons_is_binomial() {
        let host = random_permutation(4, 9).unwrap();
        assert_eq!(count_twins(&host, 1, 2, &CountBudget::default()).unwrap(), 6);
        let host = random_permutation(7, 2).unwrap();
        // C(7,3) choices of three singletons
        assert_eq!(count_twins(&host, 1, 3, &CountBudget::default()).unwrap(), 35);
    }

    #[test]
    fn exhaustive_average_matches_expectation() {
        let total: u64 = (0..720)
            .map(|i| count_twins(&crate::perm::nth_permutation(6, i), 2, 2, &CountBudget::default()).unwrap())
            .sum();
        assert_eq!(BigRational::new(BigInt::from(total), BigInt::from(720)), q(45, 2));
    }

    #[test]
    fn count_budget() {
        let host = random_permutation(40, 1).unwrap();
        let tiny = CountBudget { max_subsets: 10, ..Default::default() };
        assert!(matches!(count_twins(&host, 3, 2, &tiny), Err(TwinsError::BudgetExceeded { .. })));
    }
}
