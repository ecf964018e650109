//! Experiment harness: scaling runs with log-log exponent fits, spread of
//! the matching size across random hosts, and Monte Carlo checks of the
//! first-moment formula.
//!
//! Every cell is keyed by its own seed, so parallel scheduling never changes
//! results. Certificates are re-verified here before they are counted.

use std::fs;
use std::io;
use std::path::Path;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TwinsError};
use crate::matching::{self, GridParams};
use crate::moments::{count_twins, expected_twin_count, position_match_probability, CountBudget};
use crate::oracle::{exact_twins_length, OracleBudget};
use crate::perm::{factorial_u64, nth_permutation, random_permutation, Permutation};
use crate::twins::{verify, TwinsCertificate};
use crate::{baselines, constructive};

/// Spread above which a concentration run is flagged.
pub const SPREAD_FLAG: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Finder {
    Constructive,
    Matching,
    Baseline,
    Exact,
}

impl std::str::FromStr for Finder {
    type Err = TwinsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constructive" => Ok(Self::Constructive),
            "matching" => Ok(Self::Matching),
            "baseline" => Ok(Self::Baseline),
            "exact" => Ok(Self::Exact),
            other => Err(TwinsError::Parse(format!("unknown finder {other:?}"))),
        }
    }
}

impl std::fmt::Display for Finder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Constructive => "constructive",
            Self::Matching => "matching",
            Self::Baseline => "baseline",
            Self::Exact => "exact",
        })
    }
}

/// splitmix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th host of length `n` in a run with base seed `base`.
pub fn cell_seed(base: u64, n: usize, index: usize) -> u64 {
    mix(mix(mix(base) ^ n as u64) ^ index as u64)
}

/// Runs one finder on `host` and re-verifies the certificate.
pub fn run_finder(finder: Finder, host: &Permutation, r: usize) -> Result<TwinsCertificate> {
    let cert = match finder {
        Finder::Constructive => constructive::find(host, r)?.cert,
        Finder::Matching => matching::find(host, &GridParams::for_host(host.len(), r)?)?.cert,
        Finder::Baseline => baselines::es_twins(host, r)?,
        Finder::Exact => exact_twins_length(host, r, &OracleBudget::default())?.witness,
    };
    if !verify(host, &cert)? {
        return Err(TwinsError::InvalidCertificate(format!("{finder} output failed verification")));
    }
    Ok(cert)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig {
    pub finder: Finder,
    pub r: usize,
    pub n_grid: Vec<usize>,
    pub seeds_per_n: usize,
    pub base_seed: u64,
    /// Wall-clock timing per cell. Off gives byte-identical reruns.
    pub record_timing: bool,
}

/// One CSV row. `length` is empty for a failed cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub finder: Finder,
    pub r: usize,
    pub n: usize,
    pub seed: u64,
    pub length: Option<usize>,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellError {
    pub n: usize,
    pub seed: u64,
    pub message: String,
}

/// Per-n summary over the successful cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    pub n: usize,
    pub count: usize,
    pub mean: f64,
    pub min: usize,
    pub max: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRun {
    pub config: ScalingConfig,
    /// `1/2` for the monotone baseline, `r / (2r - 1)` otherwise.
    pub target_exponent: f64,
    pub records: Vec<CellRecord>,
    pub errors: Vec<CellError>,
    pub cells: Vec<CellStats>,
    pub fitted_exponent: Option<f64>,
    pub fit_r2: Option<f64>,
    pub min_fit: Option<LogLogFit>,
    pub max_fit: Option<LogLogFit>,
    /// Cells whose certificate failed the harness's own verification.
    pub verification_failures: usize,
}

/// Ordinary least squares of `ln y` on `ln x` over points with positive `y`.
/// Needs at least three such points.
pub fn fit_loglog(points: &[(f64, f64)]) -> Option<LogLogFit> {
    let pts: Vec<(f64, f64)> =
        points.iter().filter(|&&(x, y)| x > 0.0 && y > 0.0).map(|&(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 3 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LogLogFit { slope, intercept: my - slope * mx, r2 })
}

pub fn run_scaling(config: &ScalingConfig) -> Result<ScalingRun> {
    if config.seeds_per_n == 0 {
        return Err(TwinsError::Parse("seeds_per_n must be at least 1".into()));
    }
    if config.n_grid.is_empty() || config.n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(TwinsError::Parse("n_grid must be nonempty and strictly increasing".into()));
    }
    let jobs: Vec<(usize, u64)> = config
        .n_grid
        .iter()
        .flat_map(|&n| (0..config.seeds_per_n).map(move |i| (n, cell_seed(config.base_seed, n, i))))
        .collect();
    let outcomes: Vec<(CellRecord, Option<TwinsError>)> = jobs
        .par_iter()
        .map(|&(n, seed)| {
            let start = Instant::now();
            let result = random_permutation(n, seed).and_then(|host| run_finder(config.finder, &host, config.r));
            let runtime_ms = if config.record_timing { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
            let (length, err) = match result {
                Ok(c) => (Some(c.k), None),
                Err(e) => (None, Some(e)),
            };
            (CellRecord { finder: config.finder, r: config.r, n, seed, length, runtime_ms }, err)
        })
        .collect();

    let mut records = Vec::with_capacity(outcomes.len());
    let mut errors = Vec::new();
    let mut verification_failures = 0;
    for (rec, err) in outcomes {
        if let Some(e) = err {
            if matches!(e, TwinsError::InvalidCertificate(_)) {
                verification_failures += 1;
            }
            errors.push(CellError { n: rec.n, seed: rec.seed, message: e.to_string() });
        }
        records.push(rec);
    }

    let cells: Vec<CellStats> = config
        .n_grid
        .iter()
        .filter_map(|&n| {
            let lens: Vec<usize> = records.iter().filter(|c| c.n == n).filter_map(|c| c.length).collect();
            (!lens.is_empty()).then(|| CellStats {
                n,
                count: lens.len(),
                mean: lens.iter().sum::<usize>() as f64 / lens.len() as f64,
                min: *lens.iter().min().expect("nonempty"),
                max: *lens.iter().max().expect("nonempty"),
            })
        })
        .collect();
    let fit = |f: &dyn Fn(&CellStats) -> f64| fit_loglog(&cells.iter().map(|c| (c.n as f64, f(c))).collect::<Vec<_>>());
    let mean_fit = fit(&|c| c.mean);
    let min_fit = fit(&|c| c.min as f64);
    let max_fit = fit(&|c| c.max as f64);
    let r = config.r as f64;
    Ok(ScalingRun {
        config: config.clone(),
        target_exponent: if config.finder == Finder::Baseline { 0.5 } else { r / (2.0 * r - 1.0) },
        records,
        errors,
        cells,
        fitted_exponent: mean_fit.map(|f| f.slope),
        fit_r2: mean_fit.map(|f| f.r2),
        min_fit,
        max_fit,
        verification_failures,
    })
}

pub fn records_to_csv(records: &[CellRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for rec in records {
        w.serialize(rec).map_err(|e| TwinsError::Parse(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| TwinsError::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| TwinsError::Parse(e.to_string()))
}

pub fn records_from_csv(input: &str) -> Result<Vec<CellRecord>> {
    csv::Reader::from_reader(input.as_bytes())
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| TwinsError::Parse(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationConfig {
    pub n: usize,
    pub r: usize,
    pub samples: usize,
    pub base_seed: u64,
    /// Overrides the default block size.
    pub a: Option<usize>,
    /// Reuse one seed for every sample (a zero-spread sanity check).
    pub repeat_seed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRun {
    pub config: ConcentrationConfig,
    pub a: usize,
    pub sizes: Vec<usize>,
    pub mean: f64,
    pub stddev: f64,
    pub normalized_spread: f64,
    pub flagged: bool,
    /// Samples whose matching fell below `|E(B')| / (2 Δ(B'))`.
    pub bound_violations: usize,
    /// Samples whose extracted twins failed verification.
    pub verification_failures: usize,
    /// Bounded-difference constant for a swap of two entries.
    pub c: f64,
    /// Deviation scale `n^(2r/(4r-1))`.
    pub eta: f64,
}

/// Matching size over independent random hosts; reports spread, asserts nothing.
pub fn run_concentration(config: &ConcentrationConfig) -> Result<ConcentrationRun> {
    if config.samples < 2 {
        return Err(TwinsError::Parse("concentration needs at least 2 samples".into()));
    }
    let params = match config.a {
        Some(a) => GridParams::new(config.n, config.r, a, matching::DEFAULT_DEGREE_CUTOFF)?,
        None => GridParams::for_host(config.n, config.r)?,
    };
    let per_sample: Vec<(usize, bool, bool)> = (0..config.samples)
        .into_par_iter()
        .map(|i| {
            let seed = cell_seed(config.base_seed, config.n, if config.repeat_seed { 0 } else { i });
            let host = random_permutation(config.n, seed)?;
            let out = matching::find(&host, &params)?;
            let below = (out.matching_size as f64) < out.matching.greedy_bound();
            Ok((out.matching_size, below, !verify(&host, &out.cert)?))
        })
        .collect::<Result<_>>()?;
    let sizes: Vec<usize> = per_sample.iter().map(|s| s.0).collect();
    let (mean, stddev) = mean_stddev(&sizes.iter().map(|&s| s as f64).collect::<Vec<_>>());
    let normalized_spread = if mean > 0.0 { stddev / mean } else { f64::INFINITY };
    let r = config.r as f64;
    Ok(ConcentrationRun {
        config: config.clone(),
        a: params.a,
        mean,
        stddev,
        normalized_spread,
        flagged: normalized_spread > SPREAD_FLAG,
        bound_violations: per_sample.iter().filter(|s| s.1).count(),
        verification_failures: per_sample.iter().filter(|s| s.2).count(),
        sizes,
        c: 2.0,
        eta: (config.n as f64).powf(2.0 * r / (4.0 * r - 1.0)),
    })
}

/// Mean and sample standard deviation (denominator `len - 1`).
pub fn mean_stddev(xs: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, var.sqrt())
}

/// Largest `n!` enumerated when exhaustive moment checks are requested.
pub const EXHAUSTIVE_HOST_LIMIT: u64 = 40_320;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub hosts: u64,
    pub exhaustive: bool,
    /// `E X` as `numerator/denominator`.
    pub expected: String,
    pub expected_f64: f64,
    pub sample_mean: f64,
    pub sample_stddev: f64,
    /// `(mean - E X) / (stddev / sqrt(hosts))`; zero when both spread and error vanish.
    pub z_score: f64,
    /// Exact average over all hosts, when enumerated.
    pub exact_mean: Option<String>,
    pub exact_match: Option<bool>,
    /// Number of unordered families of r disjoint k-sets of positions.
    pub families: String,
    /// Observed fraction of families that are twins, against `1/(k!)^(r-1)`.
    pub match_fraction: f64,
    pub match_probability: f64,
}

/// Compares the twin count `X` at fixed `(n, k, r)` with `E X`, averaging
/// over all `n!` hosts when `samples == 0` (needs `n! <= EXHAUSTIVE_HOST_LIMIT`),
/// else over `samples` seeded random hosts.
pub fn run_moment_check(n: usize, k: usize, r: usize, samples: u64, base_seed: u64) -> Result<MomentReport> {
    let expected = expected_twin_count(n, k, r)?;
    let budget = CountBudget::default();
    let exhaustive = samples == 0;
    let hosts = if exhaustive {
        if n > 20 || factorial_u64(n) > EXHAUSTIVE_HOST_LIMIT {
            return Err(TwinsError::BudgetExceeded { lower_bound: None });
        }
        factorial_u64(n)
    } else {
        samples
    };
    let counts: Vec<u64> = (0..hosts)
        .into_par_iter()
        .map(|i| {
            let host = if exhaustive {
                nth_permutation(n, i)
            } else {
                random_permutation(n, cell_seed(base_seed, n, i as usize))?
            };
            count_twins(&host, k, r, &budget)
        })
        .collect::<Result<_>>()?;
    let (sample_mean, sample_stddev) = mean_stddev(&counts.iter().map(|&c| c as f64).collect::<Vec<_>>());
    let expected_f64 = expected.to_f64().unwrap_or(f64::INFINITY);
    let se = sample_stddev / (hosts as f64).sqrt();
    let diff = sample_mean - expected_f64;
    let z_score = if se > 0.0 {
        diff / se
    } else if diff.abs() < 1e-9 * expected_f64.max(1.0) {
        0.0
    } else {
        f64::INFINITY
    };
    let (exact_mean, exact_match) = if exhaustive {
        let total: u64 = counts.iter().sum();
        let q = BigRational::new(BigInt::from(total), BigInt::from(hosts));
        (Some(q.to_string()), Some(q == expected))
    } else {
        (None, None)
    };
    let p = position_match_probability(k, r);
    let families = &expected / &p;
    let families_f64 = families.to_f64().unwrap_or(f64::INFINITY);
    Ok(MomentReport {
        n,
        k,
        r,
        hosts,
        exhaustive,
        expected: expected.to_string(),
        expected_f64,
        sample_mean,
        sample_stddev,
        z_score,
        exact_mean,
        exact_match,
        families: families.to_string(),
        match_fraction: sample_mean / families_f64,
        match_probability: p.to_f64().unwrap_or(0.0),
    })
}

/// Writes `files` into a fresh directory `dir`, atomically: everything goes
/// to a sibling temporary directory that is renamed into place at the end.
/// Fails if `dir` already exists.
pub fn write_run_dir(dir: &Path, files: &[(&str, String)]) -> io::Result<()> {
    if dir.exists() {
        return Err(io::Error::new(io::ErrorKind::AlreadyExists, format!("{} already exists", dir.display())));
    }
    let parent = dir.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(parent)?;
    let tmp = tempfile::Builder::new().prefix(".run-").tempdir_in(parent)?;
    for (name, contents) in files {
        fs::write(tmp.path().join(name), contents)?;
    }
    fs::rename(tmp.keep(), dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(finder: Finder, r: usize, n_grid: Vec<usize>, seeds: usize) -> ScalingConfig {
        ScalingConfig { finder, r, n_grid, seeds_per_n: seeds, base_seed: 7, record_timing: false }
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        let a = cell_seed(1, 100, 0);
        assert_eq!(a, cell_seed(1, 100, 0));
        assert_ne!(a, cell_seed(1, 100, 1));
        assert_ne!(a, cell_seed(1, 101, 0));
        assert_ne!(a, cell_seed(2, 100, 0));
    }

    #[test]
    fn loglog_fit_recovers_power_law() {
        let pts: Vec<(f64, f64)> = [10.0, 100.0, 1000.0, 1e4].iter().map(|&x: &f64| (x, 3.0 * x.powf(0.6))).collect();
        let f = fit_loglog(&pts).unwrap();
        assert!((f.slope - 0.6).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        assert!(fit_loglog(&pts[..2]).is_none());
    }

    #[test]
    fn degenerate_grid_reports_cells_without_exponent() {
        let run = run_scaling(&config(Finder::Baseline, 2, vec![500], 4)).unwrap();
        assert_eq!(run.cells.len(), 1);
        assert_eq!(run.records.len(), 4);
        assert!(run.fitted_exponent.is_none());
    }

    #[test]
    fn invalid_configs() {
        assert!(run_scaling(&config(Finder::Baseline, 2, vec![10, 10, 20], 1)).is_err());
        assert!(run_scaling(&config(Finder::Baseline, 2, vec![10, 20, 30], 0)).is_err());
    }

    #[test]
    fn failed_cells_are_recorded() {
        let run = run_scaling(&config(Finder::Exact, 2, vec![8, 12, 40], 2)).unwrap();
        assert_eq!(run.errors.len(), 2);
        assert!(run.errors.iter().all(|e| e.n == 40));
        assert_eq!(run.cells.len(), 2);
        assert_eq!(run.verification_failures, 0);
    }

    #[test]
    fn csv_round_trip_and_reproducibility() {
        let cfg = config(Finder::Matching, 2, vec![1000, 2000, 4000], 3);
        let a = run_scaling(&cfg).unwrap();
        let b = run_scaling(&cfg).unwrap();
        let csv_a = records_to_csv(&a.records).unwrap();
        assert_eq!(csv_a, records_to_csv(&b.records).unwrap());
        assert!(csv_a.starts_with("finder,r,n,seed,length,runtime_ms\n"));
        assert_eq!(records_from_csv(&csv_a).unwrap(), a.records);
        let timed = run_scaling(&ScalingConfig { record_timing: true, ..cfg }).unwrap();
        assert_eq!(records_from_csv(&records_to_csv(&timed.records).unwrap()).unwrap(), timed.records);
    }

    #[test]
    fn identical_seeds_have_zero_spread() {
        let cfg = ConcentrationConfig { n: 2000, r: 2, samples: 2, base_seed: 3, a: None, repeat_seed: true };
        let run = run_concentration(&cfg).unwrap();
        assert_eq!(run.stddev, 0.0);
        assert_eq!(run.bound_violations, 0);
        assert_eq!(run.verification_failures, 0);
        assert!(run_concentration(&ConcentrationConfig { samples: 1, ..cfg }).is_err());
    }

    #[test]
    fn moment_checks() {
        let rep = run_moment_check(6, 2, 2, 0, 0).unwrap();
        assert_eq!(rep.exact_mean.as_deref(), Some("45/2"));
        assert_eq!(rep.exact_match, Some(true));
        let rep = run_moment_check(4, 1, 2, 0, 0).unwrap();
        assert_eq!(rep.sample_stddev, 0.0);
        assert_eq!(rep.z_score, 0.0);
        assert_eq!(rep.expected, "6");
        let rep = run_moment_check(10, 2, 2, 10_000, 11).unwrap();
        assert!(rep.z_score.abs() <= 4.0, "z = {}", rep.z_score);
        assert!((rep.match_fraction - 0.5).abs() < 0.01);
        assert_eq!(rep.families, "630");
        assert!(matches!(run_moment_check(12, 2, 2, 0, 0), Err(TwinsError::BudgetExceeded { .. })));
    }

    #[test]
    fn run_dir_is_atomic_and_exclusive() {
        let root = tempfile::tempdir().unwrap();
        let dir = root.path().join("run");
        write_run_dir(&dir, &[("a.csv", "x\n".into()), ("b.json", "{}".into())]).unwrap();
        assert_eq!(fs::read_to_string(dir.join("a.csv")).unwrap(), "x\n");
        assert!(write_run_dir(&dir, &[]).is_err());
        let leftovers = fs::read_dir(root.path()).unwrap().count();
        assert_eq!(leftovers, 1);
    }
}
