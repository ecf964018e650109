//! Deterministic lower-bound construction.
//!
//! Each round takes the `(2r-1)N` leftmost remaining elements, sorts their
//! values into `N` blocks of `2r-1` consecutive values, keeps the blocks of
//! width at most `2M`, and reads off `2r-1` permutations of the kept block
//! indices (the j-th smallest element of every block, in position order).
//! A longest common sub-permutation of the best r of them yields `2M`-narrow
//! r-twins. The round then removes its elements plus a value window of
//! length `2M` above each column minimum, so later rounds sit to the right
//! and clear of every earlier column, and all round certificates concatenate.

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::{Result, TwinsError};
use crate::lcs::{best_r_of_2r_minus_1, big_r, SubsetSelection};
use crate::perm::Permutation;
use crate::twins::{can_concatenate, column_widths, concatenate, TwinsCertificate};

/// Round parameters for a host of length `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundPlan {
    pub n: usize,
    pub r: usize,
    pub big_r: usize,
    /// `M = ceil(n^((R-1)/(2R-1)))`.
    pub m: usize,
    /// Blocks per round, `N = floor(n/M)`.
    pub blocks: usize,
    /// `2M`; `None` disables the width filter.
    pub block_width_cap: Option<u64>,
    /// `2rN`.
    pub per_round_consumption_cap: usize,
    /// `floor(M / 2r)`, the number of rounds the counting argument promises.
    pub rounds_target: usize,
}

impl RoundPlan {
    pub fn for_host(n: usize, r: usize) -> Self {
        let big = big_r(r);
        let m = ceil_root_of_power(n, big - 1, 2 * big - 1).max(1);
        Self::custom(n, r, m, n / m)
    }

    /// A plan with explicit `M` and `N`.
    pub fn custom(n: usize, r: usize, m: usize, blocks: usize) -> Self {
        Self {
            n,
            r,
            big_r: big_r(r),
            m,
            blocks,
            block_width_cap: Some(2 * m as u64),
            per_round_consumption_cap: 2 * r * blocks,
            rounds_target: m / (2 * r),
        }
    }

    pub fn block_size(&self) -> usize {
        2 * self.r - 1
    }

    pub fn round_size(&self) -> usize {
        self.block_size() * self.blocks
    }
}

/// Smallest integer `x` with `x^den >= n^num`.
fn ceil_root_of_power(n: usize, num: usize, den: usize) -> usize {
    let target = BigUint::from(n).pow(num as u32);
    let approx = (n as f64).powf(num as f64 / den as f64).floor() as usize;
    let mut x = approx.saturating_sub(2);
    while BigUint::from(x).pow(den as u32) < target {
        x += 1;
    }
    x
}

/// Elements still available, tracked by position.
#[derive(Debug, Clone)]
pub struct Remaining {
    alive: Vec<bool>,
    count: usize,
    // every position before `start` is dead
    start: usize,
}

impl Remaining {
    pub fn full(n: usize) -> Self {
        Self { alive: vec![true; n], count: n, start: 0 }
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn contains(&self, pos: usize) -> bool {
        self.alive.get(pos).copied().unwrap_or(false)
    }

    fn leftmost(&self, count: usize) -> Vec<usize> {
        (self.start..self.alive.len()).filter(|&p| self.alive[p]).take(count).collect()
    }

    fn remove(&mut self, host: &Permutation, values: &[i64]) {
        for &v in values {
            let p = host.position_of(v).expect("value in host");
            if std::mem::replace(&mut self.alive[p], false) {
                self.count -= 1;
            }
        }
        while self.start < self.alive.len() && !self.alive[self.start] {
            self.start += 1;
        }
    }
}

/// The value blocks of one round and the permutations of block indices read
/// off them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockRenaming {
    /// The round's elements, sorted by value.
    pub a_set: Vec<i64>,
    /// `a_set` cut into consecutive runs of `2r-1` values.
    pub blocks: Vec<Vec<i64>>,
    /// Indices of blocks whose width is within the cap.
    pub narrow: Vec<usize>,
    /// For each offset `j`, the block indices of the j-th block elements in
    /// position order; each is a permutation of `narrow`.
    pub renamed: Vec<Vec<i64>>,
}

/// Splits the elements at `positions` into blocks and renames them.
pub fn block_renaming(host: &Permutation, positions: &[usize], r: usize, width_cap: Option<u64>) -> BlockRenaming {
    let b = 2 * r - 1;
    let mut a_set: Vec<i64> = positions.iter().map(|&p| host.values()[p]).collect();
    a_set.sort_unstable();
    let blocks: Vec<Vec<i64>> = a_set.chunks_exact(b).map(<[i64]>::to_vec).collect();
    let narrow: Vec<usize> = blocks
        .iter()
        .enumerate()
        .filter(|(_, blk)| width_cap.is_none_or(|cap| ((blk[b - 1] - blk[0]) as u64) <= cap))
        .map(|(i, _)| i)
        .collect();
    let mut is_narrow = vec![false; blocks.len()];
    for &i in &narrow {
        is_narrow[i] = true;
    }
    let mut renamed = vec![Vec::with_capacity(narrow.len()); b];
    for &p in positions {
        let rank = a_set.binary_search(&host.values()[p]).expect("element of a_set");
        let (i, j) = (rank / b, rank % b);
        if i < blocks.len() && is_narrow[i] {
            renamed[j].push(i as i64);
        }
    }
    BlockRenaming { a_set, blocks, narrow, renamed }
}

/// Everything one round did.
#[derive(Debug, Clone, Serialize)]
pub struct RoundTrace {
    pub renaming: BlockRenaming,
    pub selection: SubsetSelection,
    pub round_cert: TwinsCertificate,
    /// Values removed after the round (only those still present).
    pub removed: Vec<i64>,
    pub k: usize,
    /// Whether `removed` stayed within `2rN`. The exact common
    /// sub-permutation can be long enough that the `2M` windows push a round
    /// past it; the hard limit checked by [`find`] is `(2r-1)N + 2Mk`.
    pub within_consumption_cap: bool,
    pub warning: Option<String>,
}

/// Runs one round on the leftmost `(2r-1)N` remaining elements.
pub fn run_round(host: &Permutation, remaining: &Remaining, plan: &RoundPlan) -> Result<RoundTrace> {
    let r = plan.r;
    if remaining.len() < plan.round_size() || plan.blocks == 0 {
        return Err(TwinsError::ConstructionBug(format!(
            "round needs {} elements, {} remain",
            plan.round_size(),
            remaining.len()
        )));
    }
    let positions = remaining.leftmost(plan.round_size());
    let renaming = block_renaming(host, &positions, r, plan.block_width_cap);
    if renaming.narrow.is_empty() {
        return Err(TwinsError::NoNarrowBlocks { cap: plan.block_width_cap.unwrap_or(u64::MAX) as usize });
    }
    let warning = (2 * renaming.narrow.len() < plan.blocks)
        .then(|| format!("only {} of {} blocks are narrow", renaming.narrow.len(), plan.blocks));

    let bars = renaming.renamed.iter().map(|v| Permutation::new(v.clone())).collect::<Result<Vec<_>>>()?;
    let selection = best_r_of_2r_minus_1(&bars, r)?;

    let lists: Vec<Vec<usize>> = selection
        .chosen_indices
        .iter()
        .map(|&j| {
            selection
                .result
                .elements
                .iter()
                .map(|&i| host.position_of(renaming.blocks[i as usize][j]).expect("value in host"))
                .collect()
        })
        .collect();
    let round_cert = TwinsCertificate::new(host, lists)?;

    let mut removed: Vec<i64> = renaming.a_set.clone();
    if let Some(cap) = plan.block_width_cap {
        for c in 0..round_cert.k {
            let lo = *round_cert.column(host, c).iter().min().expect("r >= 2");
            for v in lo..lo + cap as i64 {
                if let Some(p) = host.position_of(v) {
                    if remaining.contains(p) {
                        removed.push(v);
                    }
                }
            }
        }
    }
    removed.sort_unstable();
    removed.dedup();
    let within_consumption_cap = removed.len() <= plan.per_round_consumption_cap;
    Ok(RoundTrace { k: round_cert.k, renaming, selection, round_cert, removed, within_consumption_cap, warning })
}

/// Output of [`find`].
#[derive(Debug, Clone, Serialize)]
pub struct ConstructiveOutput {
    pub cert: TwinsCertificate,
    pub plan: RoundPlan,
    pub traces: Vec<RoundTrace>,
    /// True when the host was too short for the round plan and a single
    /// unfiltered round over the whole host was used instead.
    pub fallback: bool,
}

/// Runs rounds until fewer than `(2r-1)N` elements remain and concatenates
/// the round certificates.
///
/// Every round certificate is checked to be `2M`-narrow, the removal size to
/// stay within `(2r-1)N + 2Mk`, and each concatenation to be valid; a failure
/// of any of these is a [`TwinsError::ConstructionBug`].
pub fn find(host: &Permutation, r: usize) -> Result<ConstructiveOutput> {
    if r < 2 {
        return Err(TwinsError::InvalidMultiplicity(r));
    }
    if host.is_empty() {
        return Err(TwinsError::EmptySequence);
    }
    let n = host.len();
    let b = 2 * r - 1;
    let plan = RoundPlan::for_host(n, r);
    if n < 4 * b || plan.blocks == 0 || plan.round_size() > n {
        return fallback(host, r);
    }

    let mut remaining = Remaining::full(n);
    let mut cert = TwinsCertificate::empty(host, r);
    let mut traces = Vec::new();
    while remaining.len() >= plan.round_size() {
        let trace = run_round(host, &remaining, &plan)?;
        let cap = plan.block_width_cap.expect("plan has a width cap");
        if column_widths(host, &trace.round_cert)?.max() > cap {
            return Err(TwinsError::ConstructionBug("round certificate is not 2M-narrow".into()));
        }
        if host.is_over_range() && trace.warning.is_some() {
            return Err(TwinsError::ConstructionBug("fewer than N/2 narrow blocks on a host over [n]".into()));
        }
        if trace.removed.len() > plan.round_size() + trace.k * cap as usize {
            return Err(TwinsError::ConstructionBug("round removed too many elements".into()));
        }
        if !can_concatenate(host, &cert, &trace.round_cert)? {
            return Err(TwinsError::ConstructionBug(format!("round {} does not concatenate", traces.len())));
        }
        cert = concatenate(host, &cert, &trace.round_cert)?;
        remaining.remove(host, &trace.removed);
        traces.push(trace);
    }
    Ok(ConstructiveOutput { cert, plan, traces, fallback: false })
}

// One unfiltered round over as much of the host as fits in whole blocks.
fn fallback(host: &Permutation, r: usize) -> Result<ConstructiveOutput> {
    let n = host.len();
    let b = 2 * r - 1;
    let mut plan = RoundPlan::custom(n, r, 1, n / b);
    plan.block_width_cap = None;
    if plan.blocks == 0 {
        let cert = if n >= r {
            TwinsCertificate::new(host, (0..r).map(|p| vec![p]).collect())?
        } else {
            TwinsCertificate::empty(host, r)
        };
        return Ok(ConstructiveOutput { cert, plan, traces: Vec::new(), fallback: true });
    }
    let trace = run_round(host, &Remaining::full(n), &plan)?;
    Ok(ConstructiveOutput { cert: trace.round_cert.clone(), plan, traces: vec![trace], fallback: true })
}
