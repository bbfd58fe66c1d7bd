use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::SystemTime;

use clap::builder::PossibleValuesParser;
use clap::{Args, Parser, Subcommand};
use num_traits::ToPrimitive;
use serde::Serialize;

use invrep::combinat::{binomial, d_inv_count, gt_patterns, weyl_dim};
use invrep::entangle::{closed_form_mean_purity, h_max, h_max_spin, su2_mean_purity, PuritySummary};
use invrep::montecarlo::{run_experiment, run_experiment_with_threads, ExperimentConfig, RNG_ALGORITHM};
use invrep::report::{write_rows, PurityRow, RunManifest, CSV_COLUMNS};
use invrep::su2rep::racah_cgc_exact;
use invrep::verify::{run_suite, SUITES};
use invrep::{limits, Error, HalfInt, Partition};

#[derive(Parser)]
#[command(name = "invrep", version, about = "Invariant and near-invariant states of tensor-power irreps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Irrep dimensions, pattern counts and invariant-subspace dimensions.
    Dims(DimsArgs),
    /// A Clebsch-Gordan coefficient, exactly and in decimal.
    Cgc(CgcArgs),
    /// Mean purity of a random invariant state: exact and/or Monte Carlo.
    Purity(PurityArgs),
    /// Run a named verification suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct DimsArgs {
    #[arg(long)]
    d: usize,
    /// Highest weight, e.g. 2,1,0 (zero-padded to d parts).
    #[arg(long, conflicts_with_all = ["s", "n"])]
    lam: Option<String>,
    /// Spin for d = 2, number of boxes for d ≥ 3.
    #[arg(long, value_parser = parse_half, requires = "n")]
    s: Option<HalfInt>,
    #[arg(long, requires = "s")]
    n: Option<u32>,
    /// Print only the invariant-subspace dimension.
    #[arg(long, requires = "s")]
    dinv: bool,
}

#[derive(Args)]
struct CgcArgs {
    #[arg(long, value_parser = parse_half, allow_hyphen_values = true)]
    j1: HalfInt,
    #[arg(long, value_parser = parse_half, allow_hyphen_values = true)]
    j2: HalfInt,
    #[arg(long, value_parser = parse_half, allow_hyphen_values = true)]
    j: HalfInt,
    #[arg(long, value_parser = parse_half, allow_hyphen_values = true)]
    m1: HalfInt,
    #[arg(long, value_parser = parse_half, allow_hyphen_values = true)]
    m2: HalfInt,
    /// Defaults to m1 + m2.
    #[arg(long, value_parser = parse_half, allow_hyphen_values = true)]
    m: Option<HalfInt>,
}

#[derive(Args, Serialize)]
struct PurityArgs {
    /// Closed-form mean only; Monte Carlo columns stay empty.
    #[arg(long, conflicts_with = "mc")]
    exact: bool,
    /// Also sample random states.
    #[arg(long)]
    mc: bool,
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Comma-separated grid: spins for d = 2, box counts for d ≥ 3.
    #[arg(long, value_parser = parse_half, value_delimiter = ',', required = true)]
    s: Vec<HalfInt>,
    /// Number of sites.
    #[arg(long)]
    n: u32,
    /// Sites on side A.
    #[arg(long)]
    p: u32,
    /// Total-spin cutoff (d = 2).
    #[arg(long, value_parser = parse_half, default_value = "0")]
    j0: HalfInt,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Tail threshold on |η − 1|.
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// CSV path; the manifest goes to the same stem with `.manifest.json`.
    /// Without it the CSV is written to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_parser = PossibleValuesParser::new(SUITES))]
    suite: String,
    #[arg(long)]
    threads: Option<usize>,
}

fn parse_half(s: &str) -> Result<HalfInt, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Errors mapped to exit codes: 2 usage, 3 empty subspace, 4 resource cap.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) | Error::Parse(_) | Error::InvalidTolerance(_) => 2,
        Error::EmptySubspace(_) => 3,
        Error::DimensionOverflow { .. } => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Dims(a) => cmd_dims(&a),
        Command::Cgc(a) => cmd_cgc(&a),
        Command::Purity(a) => cmd_purity(&a),
        Command::Verify(a) => cmd_verify(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn io_err(e: io::Error) -> Error {
    Error::InvalidArgument(format!("i/o: {e}"))
}

/// Box count of the local irrep: `2s` for spins, `s` otherwise.
fn boxes(d: usize, s: HalfInt) -> invrep::Result<u64> {
    if s.twice() < 0 {
        return Err(Error::InvalidArgument(format!("s must be non-negative, got {s}")));
    }
    if d == 2 {
        Ok(s.twice() as u64)
    } else {
        s.as_integer().map(|v| v as u64).ok_or_else(|| {
            Error::InvalidArgument(format!("for d ≥ 3, s counts boxes and must be an integer, got {s}"))
        })
    }
}

fn cmd_dims(a: &DimsArgs) -> invrep::Result<ExitCode> {
    if a.d < 2 {
        return Err(Error::InvalidArgument(format!("need d ≥ 2, got {}", a.d)));
    }
    let mut out = io::stdout().lock();
    if let Some(lam) = &a.lam {
        let lam: Partition = lam.parse()?;
        let lam = lam
            .with_len(a.d)
            .ok_or_else(|| Error::InvalidArgument(format!("{lam} has more than d = {} parts", a.d)))?;
        let dim = weyl_dim(&lam);
        writeln!(out, "weyl_dim\t{dim}").map_err(io_err)?;
        limits::check(dim.to_u128().unwrap_or(u128::MAX))?;
        writeln!(out, "gt_patterns\t{}", gt_patterns(&lam).len()).map_err(io_err)?;
        return Ok(ExitCode::SUCCESS);
    }
    let (Some(s), Some(n)) = (a.s, a.n) else {
        return Err(Error::InvalidArgument("give either --lam or both --s and --n".into()));
    };
    let b = boxes(a.d, s)?;
    let dinv = d_inv_count(a.d, b, n, 0);
    if a.dinv {
        writeln!(out, "{dinv}").map_err(io_err)?;
    } else {
        let local = binomial(b + a.d as u64 - 1, a.d as u64 - 1);
        writeln!(out, "local_dim\t{local}").map_err(io_err)?;
        writeln!(out, "total_dim\t{}", local.pow(n)).map_err(io_err)?;
        writeln!(out, "d_inv\t{dinv}").map_err(io_err)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_cgc(a: &CgcArgs) -> invrep::Result<ExitCode> {
    let m = a.m.unwrap_or(a.m1 + a.m2);
    let c = racah_cgc_exact(a.j1, a.j2, a.j, a.m1, a.m2, m);
    println!("exact\t{c}");
    println!("decimal\t{}", c.to_f64());
    Ok(ExitCode::SUCCESS)
}

fn exact_summary(a: &PurityArgs, s: HalfInt, q: u32) -> invrep::Result<(PuritySummary, f64)> {
    if a.d == 2 {
        Ok((su2_mean_purity(s, a.p, q, a.j0)?, h_max_spin(s, a.p)))
    } else {
        let b = boxes(a.d, s)?;
        Ok((closed_form_mean_purity(a.d, b, a.p, q)?, h_max(a.d, b, a.p)))
    }
}

fn purity_row(a: &PurityArgs, s: HalfInt) -> invrep::Result<PurityRow> {
    if a.p == 0 || a.p >= a.n {
        return Err(Error::InvalidArgument(format!("need 1 ≤ p ≤ n − 1, got p={}, n={}", a.p, a.n)));
    }
    let q = a.n - a.p;
    let (summary, hm) = exact_summary(a, s, q)?;
    let mut row = PurityRow {
        d: a.d,
        s,
        n: a.n,
        p: a.p,
        j0: a.j0,
        d_inv: summary.d_inv.to_string(),
        h_max: hm,
        exact_mean: summary.mean_purity,
        mc_mean: None,
        mc_var: None,
        eta_mean: None,
        tail_fraction: None,
        trials: None,
        seed: None,
        k: summary.k(),
    };
    if a.mc {
        let mut cfg = ExperimentConfig::new(a.d, s, a.n, a.p, a.j0, a.trials, a.seed);
        cfg.delta = a.delta;
        let stats = match a.threads {
            Some(t) => run_experiment_with_threads(&cfg, t)?,
            None => run_experiment(&cfg)?,
        };
        row.mc_mean = Some(stats.mc_mean);
        row.mc_var = Some(stats.mc_var);
        row.eta_mean = Some(stats.eta_mean);
        row.tail_fraction = Some(stats.tail_fraction);
        row.trials = Some(a.trials);
        row.seed = Some(a.seed);
    }
    Ok(row)
}

fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

fn cmd_purity(a: &PurityArgs) -> invrep::Result<ExitCode> {
    if a.d < 2 {
        return Err(Error::InvalidArgument(format!("need d ≥ 2, got {}", a.d)));
    }
    let mut rows = Vec::new();
    let mut empty = Vec::new();
    for &s in &a.s {
        match purity_row(a, s) {
            Ok(r) => rows.push(r),
            Err(Error::EmptySubspace(why)) => {
                eprintln!("warning: skipping s={s}: {why}");
                empty.push(why);
            }
            Err(e) => return Err(e),
        }
    }
    if rows.is_empty() {
        return Err(Error::EmptySubspace(empty.join("; ")));
    }
    match &a.out {
        None => write_rows(io::stdout().lock(), &rows)?,
        Some(path) => {
            let file = File::create(path).map_err(io_err)?;
            write_rows(BufWriter::new(file), &rows)?;
            let manifest = RunManifest {
                tool: env!("CARGO_PKG_NAME").into(),
                version: env!("CARGO_PKG_VERSION").into(),
                command: "purity".into(),
                config: serde_json::to_value(a).map_err(|e| Error::Parse(format!("config: {e}")))?,
                seed: a.mc.then_some(a.seed),
                timestamp: humantime::format_rfc3339_seconds(SystemTime::now()).to_string(),
                rng_algorithm: RNG_ALGORITHM.into(),
                columns: CSV_COLUMNS.iter().map(|c| c.to_string()).collect(),
            };
            std::fs::write(manifest_path(path), manifest.to_json()? + "\n").map_err(io_err)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(a: &VerifyArgs) -> invrep::Result<ExitCode> {
    let result = match a.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(|| run_suite(&a.suite))?,
        None => run_suite(&a.suite)?,
    };
    print!("{result}");
    Ok(if result.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
