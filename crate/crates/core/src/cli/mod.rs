//! The `apdiv` command-line front end.
//!
//! Exit codes: 0 on success, 1 when a checked assertion fails, 2 on usage or
//! domain errors.

pub mod config;
pub mod report;
pub mod suites;
pub mod sweep;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::arith::{factorize, is_prime, multiplicative_profile, reduce};
use crate::bounds_opt::{
    admissible, divisorthm_rhs, factorize_to_windows, shortkloost_rhs, standard_windows,
    target_sizes, BoundReport, WindowFit,
};
use crate::divisor_ap::{
    divisor_main_term_with, divisor_sum_ap, error_term, error_term_with, rational_to_f64,
    rational_to_string, ApQuery, DivisorMethod,
};
use crate::error::{Error, Result};
use crate::kloosterman::{complete_kloosterman, incomplete_kloosterman, IntegerInterval};
use crate::vdc_lab::grids::GridSize;
use crate::vdc_lab::ModulusSplit;
use config::{Format, QSource, Residues, SweepConfig};
use report::fmt_real;
use suites::Suite;

#[derive(Debug, Parser)]
#[command(
    name = "apdiv",
    version,
    about = "Divisor sums in progressions and Kloosterman sums at desk scale"
)]
#[command(allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Hyperbola,
    Sieve,
}

impl From<Method> for DivisorMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Hyperbola => DivisorMethod::Hyperbola,
            Method::Sieve => DivisorMethod::Sieve,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Size {
    Small,
    Full,
}

impl From<Size> for GridSize {
    fn from(s: Size) -> Self {
        match s {
            Size::Small => GridSize::Small,
            Size::Full => GridSize::Full,
        }
    }
}

#[derive(Debug, Args)]
struct ProgressionArgs {
    #[arg(long)]
    x: u64,
    #[arg(long)]
    q: u64,
    #[arg(long, default_value_t = 0)]
    a: i64,
    #[arg(long, value_enum, default_value = "hyperbola")]
    method: Method,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Complete sum S(a, b; q), or the incomplete sum over [M, M+N) with --interval.
    #[command(allow_negative_numbers = true)]
    Kloosterman {
        a: i64,
        b: i64,
        q: u64,
        #[arg(long, num_args = 2, value_names = ["M", "N"])]
        interval: Option<Vec<i64>>,
    },
    /// D(x, q, a) and D(x, q).
    #[command(allow_negative_numbers = true)]
    Divisor(ProgressionArgs),
    /// E(x, q, a) = D(x, q, a) - D(x, q).
    #[command(allow_negative_numbers = true)]
    ErrorTerm(ProgressionArgs),
    /// Target sizes Q0..Q3, and the windows when --eta is given.
    Targets {
        #[arg(long)]
        x: u64,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        eta: Option<f64>,
    },
    /// Factorization of q, and its window split when --x and --eta are given.
    Factorize {
        #[arg(long)]
        q: u64,
        #[arg(long, requires = "eta")]
        x: Option<u64>,
        #[arg(long, requires = "x")]
        eta: Option<f64>,
    },
    /// Bound expressions and admissibility.
    #[command(allow_negative_numbers = true)]
    Bound(BoundArgs),
    /// Sweep E(x, q, a) over a grid and write a report.
    Sweep(SweepArgs),
    /// Run an exhaustive lemma-check suite.
    LemmaSuite {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(value_enum)]
        size_arg: Option<Size>,
        #[arg(long, value_enum, conflicts_with = "size_arg")]
        size: Option<Size>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Recompute a seeded fraction of a report's rows and compare E exactly.
    VerifyReport {
        path: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        fraction: f64,
        /// Defaults to the seed recorded in the report.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Args)]
struct BoundArgs {
    /// Parts q0,q1,... of the modulus.
    #[arg(long, value_delimiter = ',')]
    split: Option<Vec<u64>>,
    /// Interval length for the short Kloosterman bound.
    #[arg(long)]
    n: Option<u64>,
    /// Interval offset for the measured incomplete sum.
    #[arg(long, default_value_t = 0)]
    m: i64,
    #[arg(long)]
    x: Option<u64>,
    /// Modulus to split into windows when --split is absent.
    #[arg(long)]
    q: Option<u64>,
    /// Residue for the measured quantity (|S| or |E|).
    #[arg(long)]
    a: Option<i64>,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    varpi: Option<f64>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// JSON config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    x: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',', conflicts_with = "q_exp")]
    q: Option<Vec<u64>>,
    /// Smooth squarefree q in [x^LO, x^HI].
    #[arg(long, value_delimiter = ',', num_args = 1, value_names = ["LO,HI"])]
    q_exp: Option<Vec<f64>>,
    #[arg(long)]
    eta: Option<f64>,
    /// `all`, or the number of residues to sample per q.
    #[arg(long)]
    residues: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    record_timings: bool,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn execute(command: Command) -> Result<bool> {
    match command {
        Command::Kloosterman { a, b, q, interval } => cmd_kloosterman(a, b, q, interval),
        Command::Divisor(p) => cmd_divisor(&p),
        Command::ErrorTerm(p) => cmd_error_term(&p),
        Command::Targets { x, q, eta } => cmd_targets(x, q, eta),
        Command::Factorize { q, x, eta } => cmd_factorize(q, x.zip(eta)),
        Command::Bound(b) => cmd_bound(&b),
        Command::Sweep(s) => cmd_sweep(s),
        Command::LemmaSuite {
            suite,
            size_arg,
            size,
            jobs,
        } => {
            let size = size.or(size_arg).unwrap_or(Size::Small).into();
            cmd_lemma_suite(suite, size, jobs)
        }
        Command::VerifyReport {
            path,
            fraction,
            seed,
        } => cmd_verify(&path, fraction, seed),
    }
}

fn cmd_kloosterman(a: i64, b: i64, q: u64, interval: Option<Vec<i64>>) -> Result<bool> {
    match interval {
        None => {
            let s = complete_kloosterman(a, b, q)?;
            println!("S({a}, {b}; {q}) = {:.12} {:+.12}i", s.re + 0.0, s.im + 0.0);
            println!("err = {:.3e}", s.err);
            if is_prime(q) && reduce(a, q) != 0 && reduce(b, q) != 0 {
                println!("weil_ratio = {:.12}", s.abs() / (2.0 * (q as f64).sqrt()));
            }
        }
        Some(mn) => {
            let len = u64::try_from(mn[1])
                .map_err(|_| Error::domain("interval length N must be >= 0"))?;
            let i = IntegerInterval::new(mn[0], len);
            let s = incomplete_kloosterman(a, q, i)?;
            println!(
                "S_I({a}; {q}) over [{}, {}) = {:.12} {:+.12}i",
                i.offset,
                i.end(),
                s.re + 0.0,
                s.im + 0.0
            );
            println!("err = {:.3e}", s.err);
        }
    }
    Ok(true)
}

fn cmd_divisor(p: &ProgressionArgs) -> Result<bool> {
    let query = ApQuery::new(p.x, p.q, p.a)?;
    let d = divisor_sum_ap(&query, p.method.into())?;
    let main = divisor_main_term_with(p.x, p.q, p.method.into())?;
    println!("D({}, {}, {}) = {d}", p.x, p.q, p.a);
    println!(
        "D({}, {}) = {} ≈ {}",
        p.x,
        p.q,
        rational_to_string(&main),
        fmt_real(rational_to_f64(&main))
    );
    Ok(true)
}

fn cmd_error_term(p: &ProgressionArgs) -> Result<bool> {
    let query = ApQuery::new(p.x, p.q, p.a)?;
    let e = error_term_with(&query, p.method.into())?;
    println!(
        "E({}, {}, {}) = {} ≈ {}",
        p.x,
        p.q,
        p.a,
        rational_to_string(&e),
        fmt_real(rational_to_f64(&e))
    );
    Ok(true)
}

fn print_windows(x: u64, q: u64, eta: f64) -> Result<crate::bounds_opt::WindowSpec> {
    let w = standard_windows(x, q, eta)?;
    for (j, (lo, hi)) in w.windows().iter().enumerate() {
        println!("window q{j} = [{}, {}]", fmt_real(*lo), fmt_real(*hi));
    }
    Ok(w)
}

fn cmd_targets(x: u64, q: u64, eta: Option<f64>) -> Result<bool> {
    let t = target_sizes(x, q)?;
    for (j, v) in t.iter().enumerate() {
        println!("Q{j} = {}", fmt_real(*v));
    }
    println!("product = {}", fmt_real(t.iter().product()));
    if let Some(eta) = eta {
        print_windows(x, q, eta)?;
    }
    Ok(true)
}

fn cmd_factorize(q: u64, windows: Option<(u64, f64)>) -> Result<bool> {
    let f = factorize(q)?;
    let parts: Vec<String> = f
        .factors()
        .iter()
        .map(|&(p, e)| {
            if e == 1 {
                p.to_string()
            } else {
                format!("{p}^{e}")
            }
        })
        .collect();
    let profile = multiplicative_profile(&f, 2)?;
    println!(
        "{q} = {} (squarefree: {}, mu = {}, phi = {}, tau = {})",
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join(" * ")
        },
        f.is_squarefree(),
        profile.mu,
        profile.phi,
        profile.tau_l
    );
    if let Some((x, eta)) = windows {
        let w = print_windows(x, q, eta)?;
        match factorize_to_windows(&f, &w)? {
            WindowFit::Split(s) => println!("split = {:?}", s.parts()),
            WindowFit::Infeasible => println!("split = infeasible"),
        }
    }
    Ok(true)
}

fn print_bound(kind: &str, r: &BoundReport) {
    let p = &r.parameters;
    println!(
        "{kind} bound: q = {}, split = {:?}{}{}{}",
        p.q,
        p.split,
        p.x.map(|x| format!(", x = {x}")).unwrap_or_default(),
        p.n.map(|n| format!(", N = {n}")).unwrap_or_default(),
        p.delta
            .map(|d| format!(", delta = {d}"))
            .unwrap_or_default(),
    );
    let eps = r.at_eps.eps;
    let at_eps = |v: f64| {
        if eps > 0.0 {
            format!("  value(eps={eps}) = {}", fmt_real(v))
        } else {
            String::new()
        }
    };
    for (t0, te) in r.at_zero.terms.iter().zip(&r.at_eps.terms) {
        println!(
            "  {:<8} base = {}  value(eps=0) = {}{}",
            t0.name,
            fmt_real(t0.base),
            fmt_real(t0.value),
            at_eps(te.value)
        );
    }
    print!("  total(eps=0) = {}", fmt_real(r.at_zero.total));
    if eps > 0.0 {
        print!("  total(eps={eps}) = {}", fmt_real(r.at_eps.total));
    }
    println!();
    if let (Some(c), Some(ratio)) = (r.computed, r.ratio) {
        println!("  computed = {}  ratio = {}", fmt_real(c), fmt_real(ratio));
    }
}

fn cmd_bound(b: &BoundArgs) -> Result<bool> {
    let mut did = false;
    if let Some(varpi) = b.varpi {
        let eta = b.eta.ok_or_else(|| Error::domain("--varpi needs --eta"))?;
        println!(
            "admissible(varpi = {varpi}, eta = {eta}) = {}",
            admissible(varpi, eta)
        );
        did = true;
    }
    let split = match (&b.split, b.q, b.x, b.eta) {
        (Some(parts), _, _, _) => Some(ModulusSplit::new(parts.clone())?),
        (None, Some(q), Some(x), Some(eta)) => {
            let w = standard_windows(x, q, eta)?;
            match factorize_to_windows(&factorize(q)?, &w)? {
                WindowFit::Split(s) => Some(s),
                WindowFit::Infeasible => {
                    println!("no window split of {q} at x = {x}, eta = {eta}");
                    return Ok(true);
                }
            }
        }
        _ => None,
    };
    if let Some(split) = split {
        let q = split.modulus();
        if let Some(n) = b.n {
            let mut r = shortkloost_rhs(n, &split, b.eps)?;
            if let Some(a) = b.a {
                r = r.with_computed(
                    incomplete_kloosterman(a, q, IntegerInterval::new(b.m, n))?.abs(),
                );
            }
            print_bound("short Kloosterman", &r);
            did = true;
        }
        if let Some(x) = b.x {
            let mut r = divisorthm_rhs(x, &split, b.delta, b.eps)?;
            if let Some(a) = b.a {
                r = r.with_computed(rational_to_f64(&error_term(&ApQuery::new(x, q, a)?)?).abs());
            }
            print_bound("divisor", &r);
            did = true;
        }
    }
    if !did {
        return Err(Error::domain(
            "nothing to evaluate: give --varpi/--eta, or a split (or --q/--x/--eta) with --n or --x",
        ));
    }
    Ok(true)
}

fn sweep_config(s: SweepArgs) -> Result<SweepConfig> {
    let mut config = match &s.config {
        Some(path) => SweepConfig::load(path)?,
        None => {
            let x =
                s.x.clone()
                    .ok_or_else(|| Error::domain("sweep needs --config or --x"))?;
            let source = match (&s.q, &s.q_exp) {
                (Some(qs), _) => QSource::Explicit(qs.clone()),
                (None, Some(_)) => QSource::Smooth {
                    lo_exp: 0.0,
                    hi_exp: 0.0,
                },
                (None, None) => return Err(Error::domain("sweep needs --q or --q-exp")),
            };
            SweepConfig::new(x, source)
        }
    };
    if let Some(x) = s.x {
        config.x_values = x;
    }
    if let Some(q) = s.q {
        config.q_source = QSource::Explicit(q);
    }
    if let Some(e) = s.q_exp {
        if e.len() != 2 {
            return Err(Error::domain("--q-exp takes LO,HI"));
        }
        config.q_source = QSource::Smooth {
            lo_exp: e[0],
            hi_exp: e[1],
        };
    }
    if let Some(r) = s.residues {
        config.residues = if r == "all" {
            Residues::All
        } else {
            let count = r
                .parse()
                .map_err(|_| Error::domain("--residues takes `all` or a count"))?;
            Residues::Sample { count }
        };
    }
    if let Some(v) = s.eta {
        config.eta = v;
    }
    if let Some(v) = s.seed {
        config.seed = v;
    }
    if let Some(v) = s.delta {
        config.delta = v;
    }
    if let Some(v) = s.eps {
        config.eps = v;
    }
    if let Some(v) = s.jobs {
        config.parallelism = v;
    }
    if let Some(v) = s.format {
        config.format = v;
    }
    if let Some(v) = s.out {
        config.output = Some(v);
    }
    config.record_timings |= s.record_timings;
    config.validate()?;
    Ok(config)
}

fn cmd_sweep(s: SweepArgs) -> Result<bool> {
    let config = sweep_config(s)?;
    let (rows, summary) = sweep::run_sweep(&config)?;
    match &config.output {
        Some(path) => {
            let file = std::fs::File::create(path)
                .map_err(|e| Error::domain(format!("cannot create {}: {e}", path.display())))?;
            let mut w = std::io::BufWriter::new(file);
            report::write_report(&mut w, &config, &rows, &summary)?;
            w.flush().map_err(|e| Error::domain(e.to_string()))?;
            println!("{}", summary.line());
        }
        None => {
            let stdout = std::io::stdout();
            report::write_report(stdout.lock(), &config, &rows, &summary)?;
            eprintln!("{}", summary.line());
        }
    }
    Ok(true)
}

fn cmd_lemma_suite(suite: Suite, size: GridSize, jobs: Option<usize>) -> Result<bool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(Error::domain("--jobs must be positive"));
        }
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(|e| Error::domain(e.to_string()))?;
    let report = pool.install(|| suites::run_suite(suite, size));
    for line in &report.lines {
        println!("{line}");
    }
    println!("{}", if report.passed { "PASS" } else { "FAIL" });
    Ok(report.passed)
}

/// Indices of the rows a verifier recomputes: `ceil(fraction * n)` of them, at least one.
pub fn verification_sample(n: usize, fraction: f64, seed: u64) -> Vec<usize> {
    if n == 0 {
        return Vec::new();
    }
    let k = ((fraction * n as f64).ceil() as usize).clamp(1, n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, n, k).into_vec();
    idx.sort_unstable();
    idx
}

fn cmd_verify(path: &std::path::Path, fraction: f64, seed: Option<u64>) -> Result<bool> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::domain("--fraction must lie in (0, 1]"));
    }
    let (report_seed, rows) = report::read_report(path)?;
    let sample = verification_sample(rows.len(), fraction, seed.unwrap_or(report_seed));
    let (mut checked, mut skipped, mut mismatches) = (0, 0, 0);
    for &i in &sample {
        let row = &rows[i];
        let Some(stored) = &row.e_exact else {
            skipped += 1;
            continue;
        };
        let e = error_term(&ApQuery::new(row.x, row.q, row.a)?)?;
        checked += 1;
        if rational_to_string(&e) != *stored {
            mismatches += 1;
            println!(
                "mismatch at (x, q, a) = ({}, {}, {}): stored {stored}, recomputed {}",
                row.x,
                row.q,
                row.a,
                rational_to_string(&e)
            );
        }
    }
    println!(
        "verified {checked} of {} rows ({skipped} without E skipped): {mismatches} mismatches",
        rows.len()
    );
    Ok(mismatches == 0)
}
