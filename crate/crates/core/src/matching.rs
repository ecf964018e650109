//! Block-grid matching construction.
//!
//! Positions and values are both cut into blocks of `a` consecutive entries.
//! `counts[i][j]` is the number of values from value-block `j` that the host
//! places in position-block `i`; the bipartite graph B joins `i` and `j` when
//! that count reaches `r`. Any matching of B gives r-twins: for each matched
//! edge pick r positions in block `i` with values in block `j`; the t-th pick
//! of every edge forms twin t, and every twin orders its columns by the value
//! blocks `j`, so all twins are similar.

use serde::Serialize;

use crate::error::{Result, TwinsError};
use crate::perm::Permutation;
use crate::twins::TwinsCertificate;

/// Vertices of degree at least this are dropped before the greedy matching.
pub const DEFAULT_DEGREE_CUTOFF: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GridParams {
    pub n: usize,
    pub r: usize,
    pub a: usize,
    pub num_blocks: usize,
    pub degree_cutoff: usize,
}

impl GridParams {
    /// `a = max(r, round(r!^(1/(2r-1)) * n^((r-1)/(2r-1))))`, cutoff 7.
    pub fn for_host(n: usize, r: usize) -> Result<Self> {
        let e = 2.0 * r as f64 - 1.0;
        let r_fact: f64 = (1..=r).map(|x| x as f64).product();
        let a = (r_fact.powf(1.0 / e) * (n as f64).powf((r as f64 - 1.0) / e)).round() as usize;
        Self::new(n, r, a.max(r).min(n.max(r)), DEFAULT_DEGREE_CUTOFF)
    }

    pub fn new(n: usize, r: usize, a: usize, degree_cutoff: usize) -> Result<Self> {
        if r < 2 {
            return Err(TwinsError::InvalidMultiplicity(r));
        }
        if a < r {
            return Err(TwinsError::BlockTooSmall { a, r });
        }
        if a > n {
            return Err(TwinsError::BlockTooLarge { a, n });
        }
        Ok(Self { n, r, a, num_blocks: n / a, degree_cutoff: degree_cutoff.max(1) })
    }
}

/// The occupancy matrix and the graph B derived from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchingGraph {
    pub num_blocks: usize,
    pub r: usize,
    /// Row-major `num_blocks x num_blocks`.
    counts: Vec<u32>,
    /// Edges `(position block, value block)` in lexicographic order.
    pub edges: Vec<(usize, usize)>,
    pub left_degree: Vec<usize>,
    pub right_degree: Vec<usize>,
}

impl MatchingGraph {
    pub fn count(&self, i: usize, j: usize) -> u32 {
        self.counts[i * self.num_blocks + j]
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// `hist[d]` = number of vertices on either side with degree `d`.
    pub fn degree_histogram(&self) -> Vec<usize> {
        let max = self.left_degree.iter().chain(&self.right_degree).copied().max().unwrap_or(0);
        let mut hist = vec![0; max + 1];
        for &d in self.left_degree.iter().chain(&self.right_degree) {
            hist[d] += 1;
        }
        hist
    }

    pub fn max_degree(&self) -> usize {
        self.left_degree.iter().chain(&self.right_degree).copied().max().unwrap_or(0)
    }
}

/// Counts occupancies over complete blocks; a trailing partial block on
/// either axis is ignored. Values are bucketed by rank, so hosts over any
/// value set work.
pub fn build_graph(host: &Permutation, params: &GridParams) -> Result<MatchingGraph> {
    if params.a < params.r {
        return Err(TwinsError::BlockTooSmall { a: params.a, r: params.r });
    }
    let (a, nb) = (params.a, params.num_blocks);
    let mut counts = vec![0u32; nb * nb];
    let covered = nb * a;
    for (pos, &v) in host.values().iter().enumerate().take(covered) {
        let rank = host.rank_of(v).expect("host value");
        if rank < covered {
            counts[(pos / a) * nb + rank / a] += 1;
        }
    }
    let mut edges = Vec::new();
    let mut left_degree = vec![0; nb];
    let mut right_degree = vec![0; nb];
    for i in 0..nb {
        for j in 0..nb {
            if counts[i * nb + j] as usize >= params.r {
                edges.push((i, j));
                left_degree[i] += 1;
                right_degree[j] += 1;
            }
        }
    }
    Ok(MatchingGraph { num_blocks: nb, r: params.r, counts, edges, left_degree, right_degree })
}

/// A matching in B', the subgraph left after deleting high-degree vertices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Matching {
    pub edges: Vec<(usize, usize)>,
    /// `|E(B')|`.
    pub pruned_edges: usize,
    /// `Δ(B')`.
    pub pruned_max_degree: usize,
}

impl Matching {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// `|E(B')| / (2 Δ(B'))`, or 0 for an empty B'.
    pub fn greedy_bound(&self) -> f64 {
        if self.pruned_max_degree == 0 {
            0.0
        } else {
            self.pruned_edges as f64 / (2.0 * self.pruned_max_degree as f64)
        }
    }
}

/// Deletes every vertex of degree `>= cutoff` in B, then takes edges greedily
/// in `(i, j)` order. The result is maximal in B', hence at least
/// `|E(B')| / (2 Δ(B'))`.
pub fn greedy_matching(g: &MatchingGraph, cutoff: usize) -> Matching {
    let keep_left: Vec<bool> = g.left_degree.iter().map(|&d| d < cutoff).collect();
    let keep_right: Vec<bool> = g.right_degree.iter().map(|&d| d < cutoff).collect();
    let pruned: Vec<(usize, usize)> = g.edges.iter().copied().filter(|&(i, j)| keep_left[i] && keep_right[j]).collect();

    let mut deg_l = vec![0usize; g.num_blocks];
    let mut deg_r = vec![0usize; g.num_blocks];
    for &(i, j) in &pruned {
        deg_l[i] += 1;
        deg_r[j] += 1;
    }
    let pruned_max_degree = deg_l.iter().chain(&deg_r).copied().max().unwrap_or(0);

    let mut used_l = vec![false; g.num_blocks];
    let mut used_r = vec![false; g.num_blocks];
    let mut edges = Vec::new();
    for &(i, j) in &pruned {
        if !used_l[i] && !used_r[j] {
            used_l[i] = true;
            used_r[j] = true;
            edges.push((i, j));
        }
    }
    Matching { edges, pruned_edges: pruned.len(), pruned_max_degree }
}

/// Turns a matching into r-twins of length `matching.len()`, taking the r
/// leftmost qualifying positions of each matched edge.
pub fn extract_twins(host: &Permutation, params: &GridParams, matching: &[(usize, usize)]) -> Result<TwinsCertificate> {
    let (a, nb, r) = (params.a, params.num_blocks, params.r);
    let mut edges = matching.to_vec();
    edges.sort_unstable();
    let mut seen_l = vec![false; nb];
    let mut seen_r = vec![false; nb];
    for &(i, j) in &edges {
        if i >= nb || j >= nb {
            return Err(TwinsError::InvalidMatching(format!("edge ({i}, {j}) outside {nb} blocks")));
        }
        if std::mem::replace(&mut seen_l[i], true) || std::mem::replace(&mut seen_r[j], true) {
            return Err(TwinsError::InvalidMatching(format!("edge ({i}, {j}) shares a vertex")));
        }
    }
    let mut lists = vec![Vec::with_capacity(edges.len()); r];
    for &(i, j) in &edges {
        let picks: Vec<usize> = (i * a..(i + 1) * a)
            .filter(|&p| host.rank_of(host.values()[p]).expect("host value") / a == j)
            .take(r)
            .collect();
        if picks.len() < r {
            return Err(TwinsError::InvalidMatching(format!("edge ({i}, {j}) has fewer than {r} entries")));
        }
        for (list, p) in lists.iter_mut().zip(picks) {
            list.push(p);
        }
    }
    if edges.is_empty() {
        return Ok(TwinsCertificate::empty(host, r));
    }
    TwinsCertificate::new(host, lists)
}

/// Certificate plus the graph statistics the CLI reports.
#[derive(Debug, Clone, Serialize)]
pub struct MatchingOutput {
    pub cert: TwinsCertificate,
    pub params: GridParams,
    pub edge_count: usize,
    pub degree_histogram: Vec<usize>,
    pub matching: Matching,
    pub matching_size: usize,
}

/// Builds B, matches greedily and extracts twins.
pub fn find(host: &Permutation, params: &GridParams) -> Result<MatchingOutput> {
    let g = build_graph(host, params)?;
    let matching = greedy_matching(&g, params.degree_cutoff);
    let cert = extract_twins(host, params, &matching.edges)?;
    Ok(MatchingOutput {
        cert,
        params: *params,
        edge_count: g.edge_count(),
        degree_histogram: g.degree_histogram(),
        matching_size: matching.len(),
        matching,
    })
}
