//! Construction, verification and measurement of r-twins in permutations.
//!
//! r-twins in a permutation are r pairwise disjoint subsequences that are
//! pairwise similar (order-isomorphic). This crate provides:
//!
//! - [`perm`]: permutations, canonical patterns, seeded random generation;
//! - [`twins`]: the [`TwinsCertificate`] proof object and the concatenation rule;
//! - [`oracle`]: exhaustive ground truth for small hosts;
//! - [`lcs`]: exact longest common sub-permutation of several permutations;
//! - [`constructive`]: the deterministic block-and-remove construction;
//! - [`matching`]: the block-grid matching construction;
//! - [`moments`]: first-moment formulas and exhaustive twin counting;
//! - [`baselines`]: monotone-subsequence twins and squares;
//! - [`experiments`]: scaling, concentration and moment harnesses.

pub mod baselines;
pub mod constructive;
pub mod error;
pub mod experiments;
pub mod lcs;
pub mod matching;
pub mod moments;
pub mod oracle;
pub mod perm;
pub mod twins;

pub use error::{Result, TwinsError};
pub use perm::{canonical_pattern, is_similar, random_permutation, Pattern, Permutation};
pub use twins::{verify, TwinsCertificate};
