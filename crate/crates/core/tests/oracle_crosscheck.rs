mod common;

use common::*;
use permtwins::moments::{count_twins, CountBudget};
use permtwins::oracle::{exact_square, exact_t_r_n, exact_twins_length, OracleBudget};
use permtwins::perm::random_permutation;
use permtwins::{verify, Permutation};

#[test]
fn twins_length_matches_labelling_enumerator() {
    let budget = OracleBudget::default();
    for n in 1..=6 {
        for v in all_perms(n) {
            let p = Permutation::new(v.clone()).unwrap();
            for r in 2..=4 {
                let o = exact_twins_length(&p, r, &budget).unwrap();
                assert_eq!(o.k, naive_max_twins(&v, r), "{v:?} r={r}");
                assert!(verify(&p, &o.witness).unwrap());
                assert_eq!(o.witness.k, o.k);
            }
        }
    }
}

#[test]
fn squares_match_labelling_enumerator() {
    let budget = OracleBudget::default();
    for n in 1..=7 {
        for v in all_perms(n) {
            let o = exact_square(&Permutation::new(v.clone()).unwrap(), &budget).unwrap();
            assert_eq!(o.k, naive_max_square(&v), "{v:?}");
        }
    }
}

#[test]
fn minimum_over_hosts() {
    // frozen from the labelling enumerator: n = 2..=7, r = 2
    let expected = [1, 1, 1, 2, 2, 2];
    let budget = OracleBudget::default();
    for (n, want) in (2..=7).zip(expected) {
        let naive = all_perms(n).iter().map(|v| naive_max_twins(v, 2)).min().unwrap();
        assert_eq!(naive, want);
        let (k, argmin) = exact_t_r_n(n, 2, &budget).unwrap();
        assert_eq!(k, want, "n={n}");
        assert_eq!(naive_max_twins(argmin.values(), 2), want);
    }
}

#[test]
fn twin_counts_match_enumeration() {
    for seed in 0..40 {
        let n = 5 + (seed % 4) as usize;
        let host = random_permutation(n, seed).unwrap();
        for (k, r) in [(1, 2), (2, 2), (3, 2), (2, 3), (1, 4)] {
            if r * k > n {
                continue;
            }
            let got = count_twins(&host, k, r, &CountBudget::default()).unwrap();
            assert_eq!(got, naive_twin_count(host.values(), k, r), "{host:?} k={k} r={r}");
        }
    }
}

#[test]
fn oracle_dominates_random_hosts() {
    let budget = OracleBudget::default();
    for seed in 0..30 {
        let host = random_permutation(10, 500 + seed).unwrap();
        let exact = exact_twins_length(&host, 2, &budget).unwrap();
        for r in [2, 3] {
            let c = permtwins::constructive::find(&host, r).unwrap().cert;
            assert!(c.k <= exact_twins_length(&host, r, &budget).unwrap().k);
        }
        assert!(exact.k >= 2);
    }
}
