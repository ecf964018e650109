//! The r-twins certificate: r disjoint, pairwise similar subsequences of a
//! host permutation, stored as position lists.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TwinsError};
use crate::perm::{canonical_pattern, is_similar, Pattern, Permutation};

/// r strictly increasing, pairwise disjoint position lists of common length k.
///
/// Positions are 0-based. Column `c` is the c-th entry of every list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwinsCertificate {
    pub host_n: usize,
    pub r: usize,
    pub k: usize,
    pub index_lists: Vec<Vec<usize>>,
    pub pattern: Pattern,
}

impl TwinsCertificate {
    /// Wraps position lists, reading the shared pattern off the first list.
    ///
    /// No validation beyond range checks; call [`verify`] for that.
    pub fn new(host: &Permutation, index_lists: Vec<Vec<usize>>) -> Result<Self> {
        for &i in index_lists.iter().flatten() {
            if i >= host.len() {
                return Err(TwinsError::InvalidIndex { index: i, len: host.len() });
            }
        }
        let r = index_lists.len();
        let k = index_lists.first().map_or(0, Vec::len);
        let pattern = match index_lists.first() {
            Some(first) if !first.is_empty() => canonical_pattern(&host.subsequence(first))?,
            _ => Pattern::default(),
        };
        Ok(Self { host_n: host.len(), r, k, index_lists, pattern })
    }

    /// An empty certificate: r empty lists.
    pub fn empty(host: &Permutation, r: usize) -> Self {
        Self { host_n: host.len(), r, k: 0, index_lists: vec![Vec::new(); r], pattern: Pattern::default() }
    }

    pub fn len(&self) -> usize {
        self.k
    }

    pub fn is_empty(&self) -> bool {
        self.k == 0
    }

    /// The value subsequences, one per list.
    pub fn values(&self, host: &Permutation) -> Vec<Vec<i64>> {
        self.index_lists.iter().map(|l| host.subsequence(l)).collect()
    }

    /// Values of column `c` across the r lists.
    pub fn column(&self, host: &Permutation, c: usize) -> Vec<i64> {
        self.index_lists.iter().map(|l| host.values()[l[c]]).collect()
    }

    fn column_range(&self, host: &Permutation, c: usize) -> (i64, i64) {
        let col = self.column(host, c);
        let lo = *col.iter().min().expect("r >= 1");
        let hi = *col.iter().max().expect("r >= 1");
        (lo, hi)
    }

    pub fn all_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.index_lists.iter().flatten().copied()
    }

    pub fn to_json(&self) -> CertificateJson {
        CertificateJson {
            r: self.r,
            k: self.k,
            indices: self.index_lists.iter().map(|l| l.iter().map(|&i| i + 1).collect()).collect(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("certificate serializes")
    }
}

impl Serialize for TwinsCertificate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

/// On-disk certificate: `{ "r": int, "k": int, "indices": [[int, ...], ...] }`
/// with 1-based positions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub r: usize,
    pub k: usize,
    pub indices: Vec<Vec<usize>>,
}

impl CertificateJson {
    pub fn parse(input: &str) -> Result<Self> {
        serde_json::from_str(input).map_err(|e| TwinsError::Parse(e.to_string()))
    }

    /// Converts to 0-based positions against `host`. The declared `r` and `k`
    /// are kept as written so that [`verify`] can reject inconsistent files.
    pub fn into_certificate(self, host: &Permutation) -> Result<TwinsCertificate> {
        let lists = self
            .indices
            .iter()
            .map(|l| {
                l.iter()
                    .map(|&i| {
                        if i == 0 || i > host.len() {
                            Err(TwinsError::InvalidIndex { index: i, len: host.len() })
                        } else {
                            Ok(i - 1)
                        }
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let mut cert = TwinsCertificate::new(host, lists)?;
        cert.r = self.r;
        cert.k = self.k;
        Ok(cert)
    }
}

/// Per-column value widths `max - min`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColumnWidths(pub Vec<u64>);

impl ColumnWidths {
    pub fn max(&self) -> u64 {
        self.0.iter().copied().max().unwrap_or(0)
    }
}

/// Checks every certificate invariant against `host`.
///
/// Out-of-range positions are an error; any other defect yields `Ok(false)`.
pub fn verify(host: &Permutation, cert: &TwinsCertificate) -> Result<bool> {
    for &i in cert.index_lists.iter().flatten() {
        if i >= host.len() {
            return Err(TwinsError::InvalidIndex { index: i, len: host.len() });
        }
    }
    if cert.host_n != host.len() || cert.r == 0 || cert.index_lists.len() != cert.r {
        return Ok(false);
    }
    if cert.index_lists.iter().any(|l| l.len() != cert.k) {
        return Ok(false);
    }
    if cert.index_lists.iter().any(|l| l.windows(2).any(|w| w[0] >= w[1])) {
        return Ok(false);
    }
    let mut seen = vec![false; host.len()];
    for i in cert.all_positions() {
        if std::mem::replace(&mut seen[i], true) {
            return Ok(false);
        }
    }
    if cert.k == 0 {
        return Ok(cert.pattern.is_empty());
    }
    let first = host.subsequence(&cert.index_lists[0]);
    if canonical_pattern(&first)? != cert.pattern {
        return Ok(false);
    }
    Ok(cert.index_lists[1..].iter().all(|l| is_similar(&first, &host.subsequence(l))))
}

fn ensure_valid(host: &Permutation, cert: &TwinsCertificate) -> Result<()> {
    if verify(host, cert)? {
        Ok(())
    } else {
        Err(TwinsError::InvalidCertificate("certificate does not verify against host".into()))
    }
}

pub fn column_widths(host: &Permutation, cert: &TwinsCertificate) -> Result<ColumnWidths> {
    ensure_valid(host, cert)?;
    Ok(ColumnWidths(
        (0..cert.k)
            .map(|c| {
                let (lo, hi) = cert.column_range(host, c);
                (hi - lo) as u64
            })
            .collect(),
    ))
}

/// True iff every column has width at most `w`.
pub fn is_w_narrow(host: &Permutation, cert: &TwinsCertificate, w: u64) -> Result<bool> {
    Ok(column_widths(host, cert)?.max() <= w)
}

/// Whether `left` followed by `right` is again a set of r-twins by the
/// position and value-separation rule.
///
/// Positions: every position of `left` precedes every position of `right`.
/// Values: for each column of `left` and each column of `right`, the right
/// column lies entirely below the left column's minimum or entirely above its
/// maximum. All `s * t` column pairs are checked.
pub fn can_concatenate(host: &Permutation, left: &TwinsCertificate, right: &TwinsCertificate) -> Result<bool> {
    if left.r != right.r {
        return Err(TwinsError::MultiplicityMismatch { left: left.r, right: right.r });
    }
    ensure_valid(host, left)?;
    ensure_valid(host, right)?;
    let left_last = left.all_positions().max();
    let right_first = right.all_positions().min();
    if let (Some(a), Some(b)) = (left_last, right_first) {
        if a >= b {
            return Ok(false);
        }
    }
    let left_cols: Vec<(i64, i64)> = (0..left.k).map(|c| left.column_range(host, c)).collect();
    let right_cols: Vec<(i64, i64)> = (0..right.k).map(|c| right.column_range(host, c)).collect();
    for &(x_lo, x_hi) in &left_cols {
        for &(y_lo, y_hi) in &right_cols {
            if !(y_hi < x_lo || y_lo > x_hi) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

pub fn concatenate(host: &Permutation, left: &TwinsCertificate, right: &TwinsCertificate) -> Result<TwinsCertificate> {
    if !can_concatenate(host, left, right)? {
        return Err(TwinsError::ConcatenationInvalid);
    }
    let lists =
        left.index_lists.iter().zip(&right.index_lists).map(|(a, b)| a.iter().chain(b).copied().collect()).collect();
    let mut out = TwinsCertificate::new(host, lists)?;
    out.r = left.r;
    Ok(out)
}
