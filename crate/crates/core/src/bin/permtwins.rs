use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use permtwins::experiments::{self, ConcentrationConfig, Finder, ScalingConfig};
use permtwins::matching::{self, GridParams, DEFAULT_DEGREE_CUTOFF};
use permtwins::oracle::{exact_t_r_n, exact_twins_length, OnExceed, OracleBudget};
use permtwins::perm::{parse_any, random_permutation, to_json, to_text};
use permtwins::twins::{column_widths, CertificateJson};
use permtwins::{baselines, constructive, lcs, moments, verify, Permutation, TwinsCertificate, TwinsError};

#[derive(Parser)]
#[command(name = "permtwins", version, about = "Find, verify and measure r-twins in permutations")]
struct Cli {
    /// Base seed for random hosts.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write results into this (new) run directory instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineMode {
    Twins,
    Square,
}

#[derive(Clone, Copy, ValueEnum)]
enum FinderArg {
    Constructive,
    Matching,
    Baseline,
    Exact,
}

impl From<FinderArg> for Finder {
    fn from(f: FinderArg) -> Self {
        match f {
            FinderArg::Constructive => Finder::Constructive,
            FinderArg::Matching => Finder::Matching,
            FinderArg::Baseline => Finder::Baseline,
            FinderArg::Exact => Finder::Exact,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Uniform random permutations of [n].
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Check a certificate against a host.
    Verify {
        #[arg(long)]
        perm: PathBuf,
        #[arg(long)]
        cert: PathBuf,
    },
    /// Exact maximum twin length of each host, or the table of minima over all hosts.
    Exact {
        #[arg(long)]
        perm: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        r: usize,
        #[arg(long)]
        table: bool,
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        #[arg(long, default_value_t = 200_000_000)]
        max_nodes: u64,
        /// Report the best length found instead of failing when the budget runs out.
        #[arg(long)]
        lower_bound: bool,
    },
    /// Longest common sub-permutation; with --r and 2r-1 inputs, the best r of them.
    Lcs {
        #[arg(long)]
        perms: PathBuf,
        #[arg(long)]
        r: Option<usize>,
    },
    FindConstructive {
        #[arg(long)]
        perm: PathBuf,
        #[arg(long)]
        r: usize,
        /// Include per-round block renamings and selections.
        #[arg(long)]
        trace: bool,
    },
    FindMatching {
        #[arg(long)]
        perm: PathBuf,
        #[arg(long)]
        r: usize,
        /// Block size; defaults to the size tuned for the host length.
        #[arg(long)]
        a: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_DEGREE_CUTOFF)]
        cutoff: usize,
    },
    Baseline {
        #[arg(long, value_enum)]
        mode: BaselineMode,
        #[arg(long, default_value_t = 2)]
        r: usize,
        #[arg(long)]
        perm: PathBuf,
    },
    /// Expected twin count, checked against exhaustive (samples = 0) or sampled hosts.
    Moment {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value_t = 0)]
        samples: u64,
    },
    /// Twin length across a grid of host sizes, with a log-log exponent fit.
    Scale {
        #[arg(long, value_enum)]
        finder: FinderArg,
        #[arg(long)]
        r: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        n_grid: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        seeds: usize,
        /// Record wall-clock time per cell (reruns are then not byte-identical).
        #[arg(long)]
        timing: bool,
    },
    /// Spread of the matching size over random hosts.
    Concentration {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long)]
        a: Option<usize>,
    },
}

enum Failure {
    Verification(String),
    Budget(String),
    Config(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Self::Verification(_) => 1,
            Self::Budget(_) => 2,
            Self::Config(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Verification(m) | Self::Budget(m) | Self::Config(m) => m,
        }
    }
}

impl From<TwinsError> for Failure {
    fn from(e: TwinsError) -> Self {
        match e {
            TwinsError::BudgetExceeded { .. } => Self::Budget(e.to_string()),
            TwinsError::InvalidCertificate(_) | TwinsError::LemmaViolation { .. } | TwinsError::ConstructionBug(_) => {
                Self::Verification(e.to_string())
            }
            _ => Self::Config(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self::Config(e.to_string())
    }
}

type CliResult<T> = Result<T, Failure>;

fn read_input(path: &Path) -> CliResult<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
    }
}

fn read_perms(path: &Path) -> CliResult<Vec<Permutation>> {
    let perms = parse_any(&read_input(path)?)?;
    if perms.is_empty() {
        return Err(Failure::Config(format!("{}: no permutation found", path.display())));
    }
    Ok(perms)
}

fn read_host(path: &Path) -> CliResult<Permutation> {
    Ok(read_perms(path)?.swap_remove(0))
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize") + "\n"
}

/// Output sink: stdout, or named files gathered for one atomic run directory.
struct Sink {
    out: Option<PathBuf>,
    files: Vec<(&'static str, String)>,
}

impl Sink {
    fn emit(&mut self, name: &'static str, contents: String) {
        if self.out.is_some() {
            self.files.push((name, contents));
        } else {
            print!("{contents}");
        }
    }

    fn finish(self) -> CliResult<()> {
        if let Some(dir) = self.out {
            experiments::write_run_dir(&dir, &self.files)?;
        }
        Ok(())
    }
}

fn cert_line(finder: &str, r: usize, host: &Permutation, cert: &TwinsCertificate) -> String {
    format!("finder,r,n,length\n{finder},{r},{},{}\n", host.len(), cert.k)
}

fn emit_cert(
    sink: &mut Sink,
    format: Format,
    finder: &str,
    host: &Permutation,
    cert: &TwinsCertificate,
    extra: Option<serde_json::Value>,
) {
    match format {
        Format::Csv => sink.emit("result.csv", cert_line(finder, cert.r, host, cert)),
        Format::Json => {
            let mut doc = serde_json::to_value(cert.to_json()).expect("certificate serializes");
            if let Some(extra) = extra {
                doc["details"] = extra;
            }
            sink.emit("result.json", pretty(&doc));
        }
    }
}

fn ensure_verified(host: &Permutation, cert: &TwinsCertificate) -> CliResult<()> {
    if verify(host, cert)? {
        Ok(())
    } else {
        Err(Failure::Verification("finder output failed verification".into()))
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let format = cli.format;
    let seed = cli.seed;
    let mut sink = Sink { out: cli.out, files: Vec::new() };
    match cli.command {
        Command::Gen { n, count } => {
            let perms = (0..count)
                .map(|i| random_permutation(n, experiments::cell_seed(seed, n, i)))
                .collect::<Result<Vec<_>, _>>()?;
            match format {
                Format::Csv => sink.emit("perms.txt", perms.iter().map(|p| to_text(p) + "\n").collect()),
                Format::Json if count == 1 => sink.emit("perms.json", to_json(&perms[0]) + "\n"),
                Format::Json => sink.emit("perms.json", pretty(&perms)),
            }
        }
        Command::Verify { perm, cert } => {
            let host = read_host(&perm)?;
            let cert = CertificateJson::parse(&read_input(&cert)?)?.into_certificate(&host)?;
            let ok = verify(&host, &cert)?;
            let widths = if ok { Some(column_widths(&host, &cert)?.0) } else { None };
            match format {
                Format::Csv => sink.emit("verify.csv", format!("valid,r,k\n{ok},{},{}\n", cert.r, cert.k)),
                Format::Json => sink.emit(
                    "verify.json",
                    pretty(&json!({ "valid": ok, "r": cert.r, "k": cert.k, "pattern": cert.pattern.as_slice(), "column_widths": widths })),
                ),
            }
            sink.finish()?;
            return if ok { Ok(()) } else { Err(Failure::Verification("certificate rejected".into())) };
        }
        Command::Exact { perm, r, table, n_max, max_nodes, lower_bound } => {
            let on_exceed = if lower_bound { OnExceed::ReturnLowerBound } else { OnExceed::Fail };
            let budget = OracleBudget { max_nodes, on_exceed, ..OracleBudget::default() };
            if table {
                let mut rows = Vec::new();
                for n in 1..=n_max {
                    let (k, argmin) = exact_t_r_n(n, r, &budget)?;
                    rows.push((n, r, k, argmin));
                }
                match format {
                    Format::Csv => sink.emit(
                        "exact.csv",
                        std::iter::once("n,r,min_length,argmin\n".to_string())
                            .chain(rows.iter().map(|(n, r, k, p)| format!("{n},{r},{k},{}\n", to_text(p))))
                            .collect(),
                    ),
                    Format::Json => sink.emit(
                        "exact.json",
                        pretty(
                            &rows
                                .iter()
                                .map(|(n, r, k, p)| json!({ "n": n, "r": r, "min_length": k, "argmin": p }))
                                .collect::<Vec<_>>(),
                        ),
                    ),
                }
            } else {
                let path = perm.ok_or_else(|| Failure::Config("exact needs --perm or --table".into()))?;
                let mut docs = Vec::new();
                for host in read_perms(&path)? {
                    let o = exact_twins_length(&host, r, &budget)?;
                    docs.push(
                        json!({ "n": host.len(), "r": r, "length": o.k, "exact": o.exact, "witness": o.witness }),
                    );
                }
                match format {
                    Format::Csv => sink.emit(
                        "exact.csv",
                        std::iter::once("n,r,length,exact\n".to_string())
                            .chain(
                                docs.iter().map(|d| format!("{},{},{},{}\n", d["n"], d["r"], d["length"], d["exact"])),
                            )
                            .collect(),
                    ),
                    Format::Json => sink.emit("exact.json", pretty(&docs)),
                }
            }
        }
        Command::Lcs { perms, r } => {
            let perms = read_perms(&perms)?;
            let doc = match r {
                Some(r) => serde_json::to_value(lcs::best_r_of_2r_minus_1(&perms, r)?),
                None => serde_json::to_value(lcs::common_subperm(&perms)?),
            }
            .expect("lcs results serialize");
            sink.emit("lcs.json", pretty(&doc));
        }
        Command::FindConstructive { perm, r, trace } => {
            let host = read_host(&perm)?;
            let out = constructive::find(&host, r)?;
            ensure_verified(&host, &out.cert)?;
            let extra = json!({ "plan": out.plan, "fallback": out.fallback, "rounds": out.traces.len() });
            emit_cert(&mut sink, format, "constructive", &host, &out.cert, Some(extra));
            if trace {
                sink.emit("trace.json", pretty(&out.traces));
            }
        }
        Command::FindMatching { perm, r, a, cutoff } => {
            let host = read_host(&perm)?;
            let params = match a {
                Some(a) => GridParams::new(host.len(), r, a, cutoff)?,
                None => GridParams { degree_cutoff: cutoff.max(1), ..GridParams::for_host(host.len(), r)? },
            };
            let out = matching::find(&host, &params)?;
            ensure_verified(&host, &out.cert)?;
            let extra = json!({
                "params": out.params,
                "edge_count": out.edge_count,
                "degree_histogram": out.degree_histogram,
                "matching_size": out.matching_size,
                "greedy_bound": out.matching.greedy_bound(),
            });
            emit_cert(&mut sink, format, "matching", &host, &out.cert, Some(extra));
        }
        Command::Baseline { mode, r, perm } => {
            let host = read_host(&perm)?;
            match mode {
                BaselineMode::Twins => {
                    let cert = baselines::es_twins(&host, r)?;
                    ensure_verified(&host, &cert)?;
                    emit_cert(&mut sink, format, "baseline", &host, &cert, None);
                }
                BaselineMode::Square => {
                    let (cert, trace) = baselines::greedy_square_traced(&host)?;
                    ensure_verified(&host, &cert)?;
                    let n = host.len() as i64;
                    let side = cert.k as i64;
                    let extra = json!({ "trace": trace, "deficit": n - side * side });
                    emit_cert(&mut sink, format, "square", &host, &cert, Some(extra));
                }
            }
        }
        Command::Moment { n, k, r, samples } => {
            let rep = experiments::run_moment_check(n, k, r, samples, seed)?;
            let log_ex = moments::log_expected_twin_count(n, k, r);
            match format {
                Format::Csv => sink.emit(
                    "moment.csv",
                    format!(
                        "n,k,r,hosts,expected,sample_mean,z_score,log_expected\n{n},{k},{r},{},{},{},{},{log_ex}\n",
                        rep.hosts, rep.expected, rep.sample_mean, rep.z_score
                    ),
                ),
                Format::Json => sink.emit("moment.json", pretty(&json!({ "report": rep, "log_expected": log_ex }))),
            }
        }
        Command::Scale { finder, r, n_grid, seeds, timing } => {
            let config = ScalingConfig {
                finder: finder.into(),
                r,
                n_grid,
                seeds_per_n: seeds,
                base_seed: seed,
                record_timing: timing,
            };
            let run = experiments::run_scaling(&config)?;
            let failures = run.verification_failures;
            let summary = json!({
                "config": run.config,
                "target_exponent": run.target_exponent,
                "cells": run.cells,
                "fitted_exponent": run.fitted_exponent,
                "fit_r2": run.fit_r2,
                "min_fit": run.min_fit,
                "max_fit": run.max_fit,
                "errors": run.errors,
                "verification_failures": failures,
            });
            match (format, sink.out.is_some()) {
                (_, true) => {
                    sink.emit("cells.csv", experiments::records_to_csv(&run.records)?);
                    sink.emit("summary.json", pretty(&summary));
                }
                (Format::Csv, false) => sink.emit("cells.csv", experiments::records_to_csv(&run.records)?),
                (Format::Json, false) => sink.emit("summary.json", pretty(&summary)),
            }
            sink.finish()?;
            return if failures == 0 {
                Ok(())
            } else {
                Err(Failure::Verification(format!("{failures} cells failed verification")))
            };
        }
        Command::Concentration { n, r, samples, a } => {
            let config = ConcentrationConfig { n, r, samples, base_seed: seed, a, repeat_seed: false };
            let run = experiments::run_concentration(&config)?;
            if run.flagged {
                eprintln!(
                    "warning: normalized spread {:.3} exceeds {}",
                    run.normalized_spread,
                    experiments::SPREAD_FLAG
                );
            }
            match format {
                Format::Csv => sink.emit(
                    "concentration.csv",
                    format!(
                        "n,r,a,samples,mean,stddev,normalized_spread,flagged\n{n},{r},{},{samples},{},{},{},{}\n",
                        run.a, run.mean, run.stddev, run.normalized_spread, run.flagged
                    ),
                ),
                Format::Json => sink.emit("concentration.json", pretty(&run)),
            }
            let bad = run.verification_failures + run.bound_violations;
            sink.finish()?;
            return if bad == 0 { Ok(()) } else { Err(Failure::Verification(format!("{bad} samples failed checks"))) };
        }
    }
    sink.finish()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(3);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
