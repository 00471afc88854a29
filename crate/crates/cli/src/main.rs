//! `progavg`: experiment driver for the binomial prime-count library.
//!
//! Every command writes its table to stdout or `--out`, and a run manifest to
//! `--manifest`, `<out>.manifest.json`, or stderr, in that order of preference.

mod manifest;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use progavg_core::arith::sieve_primes;
use progavg_core::counts::sweep_error_records;
use progavg_core::expsum::{build_arcs, eval, Alpha, ArcClass, Which};
use progavg_core::local::rho;
use progavg_core::series::{SeriesTables, TruncatedValue};
use progavg_core::variance::{run_variance, Variant};
use progavg_core::verify::{run_suite, Suite};
use progavg_core::{Error as CoreError, PolynomialSpec};

use manifest::RunManifest;
use output::{canonical_json, fmt_f, Csv, Sink};

#[derive(Debug, Parser, Serialize)]
#[command(name = "progavg", version, about = "Prime values of x^ℓ + u: densities, singular series, counts, variance and circle-method sums")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Serialize)]
struct Global {
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Where to write the run manifest.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum SeriesMethod {
    Product,
    DirichletSum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum VariantArg {
    Sigma,
    SigmaPrime,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Sigma => Variant::Sigma,
            VariantArg::SigmaPrime => Variant::SigmaPrime,
        }
    }
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Root counts ϱ_ℓ(p, u) for every prime p <= p-max.
    Rho {
        #[arg(long)]
        ell: u32,
        #[arg(long, allow_hyphen_values = true)]
        u: i64,
        #[arg(long)]
        p_max: u64,
    },
    /// Singular series by Euler product or truncated Dirichlet sum.
    Series {
        #[arg(long)]
        ell: u32,
        /// A single shift `u` or an inclusive range `lo:hi`.
        #[arg(long, allow_hyphen_values = true)]
        u: String,
        #[arg(long)]
        cutoff: f64,
        #[arg(long, value_enum, default_value = "sigma")]
        variant: VariantArg,
        #[arg(long, value_enum, default_value = "product")]
        method: SeriesMethod,
    },
    /// Weighted counts against their predictions for 1 <= u <= u-max.
    Count {
        #[arg(long)]
        ell: u32,
        #[arg(long)]
        x: u64,
        #[arg(long, visible_alias = "y")]
        u_max: u64,
        /// Euler-product cutoff for the prediction.
        #[arg(long, default_value_t = 1e5)]
        cutoff: f64,
        /// Count Σ Λ(m^ℓ+u) instead of Σ Λ(m)Λ(m^ℓ+u).
        #[arg(long)]
        outer: bool,
    },
    /// Mean-square error over 1 <= u <= y.
    Variance {
        #[arg(long)]
        ell: u32,
        #[arg(long)]
        x: u64,
        #[arg(long)]
        y: u64,
        #[arg(long, default_value_t = 1e5)]
        cutoff: f64,
        #[arg(long, value_enum, default_value = "sigma-prime")]
        variant: VariantArg,
        /// Also write the per-shift records as CSV.
        #[arg(long)]
        per_u: Option<PathBuf>,
    },
    /// One of the exponential sums I, J, I_ℓ, J_ℓ at a point.
    Expsum {
        #[arg(long)]
        ell: u32,
        #[arg(long)]
        z: f64,
        /// `p/q` or a decimal.
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, value_parser = ["I", "J", "Iell", "Jell"])]
        which: String,
    },
    /// Major arcs for (X, E) and the class of each supplied point.
    Arcs {
        #[arg(long)]
        x: u64,
        #[arg(long)]
        exponent: f64,
        /// Points to classify, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        alpha: Vec<String>,
    },
    /// Agreement of the fast routines with the brute-force oracles.
    Verify {
        #[arg(long, value_parser = ["local", "series", "circle", "all"], default_value = "all")]
        suite: String,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Rho { .. } => "rho",
            Command::Series { .. } => "series",
            Command::Count { .. } => "count",
            Command::Variance { .. } => "variance",
            Command::Expsum { .. } => "expsum",
            Command::Arcs { .. } => "arcs",
            Command::Verify { .. } => "verify",
        }
    }
}

/// Bad command-line values that clap cannot catch on its own.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug)]
struct VerificationFailed(String);

impl fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "verification failed: {}", self.0)
    }
}

impl std::error::Error for VerificationFailed {}

const EXIT_USAGE: u8 = 2;
const EXIT_RANGE: u8 = 3;
const EXIT_VERIFY: u8 = 4;

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return EXIT_USAGE;
        }
        if cause.is::<VerificationFailed>() {
            return EXIT_VERIFY;
        }
        if let Some(e) = cause.downcast_ref::<CoreError>() {
            return match e {
                CoreError::Range { .. } => EXIT_RANGE,
                CoreError::Numerical(_) => EXIT_VERIFY,
                _ => EXIT_USAGE,
            };
        }
    }
    1
}

fn parse_u_range(s: &str) -> Result<(i64, i64)> {
    let bad = || UsageError(format!("expected `u` or `lo:hi`, got {s:?}"));
    let (lo, hi) = match s.split_once(':') {
        Some((lo, hi)) => (lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?),
        None => {
            let u = s.trim().parse().map_err(|_| bad())?;
            (u, u)
        }
    };
    if lo > hi {
        return Err(bad().into());
    }
    Ok((lo, hi))
}

fn series_value(
    tables: &SeriesTables,
    spec: &PolynomialSpec,
    cutoff: f64,
    variant: VariantArg,
    method: SeriesMethod,
) -> progavg_core::Result<TruncatedValue> {
    match (variant, method) {
        (VariantArg::Sigma, SeriesMethod::Product) => tables.p_trunc(spec, cutoff),
        (VariantArg::Sigma, SeriesMethod::DirichletSum) => tables.s_trunc(spec, cutoff),
        (VariantArg::SigmaPrime, SeriesMethod::Product) => tables.p_prime_trunc(spec, cutoff),
        (VariantArg::SigmaPrime, SeriesMethod::DirichletSum) => tables.s_prime_trunc(spec, cutoff),
    }
}

fn render_rows<T: Serialize>(format: Format, header: &[&str], rows: &[T], csv_row: impl Fn(&T) -> Vec<String>) -> Result<String> {
    Ok(match format {
        Format::Json => canonical_json(&rows)?,
        Format::Csv => {
            let mut csv = Csv::new(header);
            for r in rows {
                csv.row(csv_row(r));
            }
            csv.into_string()
        }
    })
}

#[derive(Serialize)]
struct RhoRow {
    p: u64,
    rho: u64,
}

#[derive(Serialize)]
struct SeriesRow {
    u: i64,
    value: f64,
    method: &'static str,
    cutoff: f64,
}

#[derive(Serialize)]
struct CountRow {
    u: i64,
    count: f64,
    prediction: f64,
    error: f64,
}

#[derive(Serialize)]
struct ExpSumRow {
    which: String,
    alpha: String,
    z: f64,
    ell: u32,
    re: f64,
    im: f64,
    abs: f64,
    terms: u64,
    bound: f64,
}

#[derive(Serialize)]
struct ClassRow {
    alpha: String,
    class: &'static str,
    q: Option<u64>,
    a: Option<u64>,
}

#[derive(Serialize)]
struct ArcsOutput<'a> {
    partition: &'a progavg_core::expsum::ArcPartition,
    total_measure: f64,
    classifications: Vec<ClassRow>,
}

fn count_csv(rows: &[CountRow]) -> String {
    let mut csv = Csv::new(&["u", "count", "prediction", "error"]);
    for r in rows {
        csv.row([r.u.to_string(), fmt_f(r.count), fmt_f(r.prediction), fmt_f(r.error)]);
    }
    csv.into_string()
}

fn run(cli: &Cli, sink: &mut Sink) -> Result<()> {
    let format = cli.global.format;
    match &cli.command {
        Command::Rho { ell, u, p_max } => {
            let spec = PolynomialSpec::new(*ell, *u)?;
            let rows = sieve_primes(*p_max)
                .into_iter()
                .map(|p| Ok(RhoRow { p, rho: rho(p, &spec)? }))
                .collect::<progavg_core::Result<Vec<_>>>()?;
            let text = render_rows(format.unwrap_or(Format::Csv), &["p", "rho"], &rows, |r| {
                vec![r.p.to_string(), r.rho.to_string()]
            })?;
            sink.emit(&text)
        }
        Command::Series { ell, u, cutoff, variant, method } => {
            let (lo, hi) = parse_u_range(u)?;
            if !(*cutoff >= 1.0) || !cutoff.is_finite() {
                bail!(UsageError(format!("cutoff must be a finite number >= 1, got {cutoff}")));
            }
            let limit = cutoff.floor() as u64;
            let tables = match method {
                SeriesMethod::Product => SeriesTables::for_products(limit),
                SeriesMethod::DirichletSum => SeriesTables::new(limit, limit),
            };
            let rows = (lo..=hi)
                .map(|u| {
                    let spec = PolynomialSpec::new(*ell, u)?;
                    let v = series_value(&tables, &spec, *cutoff, *variant, *method)?;
                    Ok(SeriesRow { u, value: v.value, method: v.method.as_str(), cutoff: v.cutoff })
                })
                .collect::<progavg_core::Result<Vec<_>>>()?;
            let text = render_rows(format.unwrap_or(Format::Csv), &["u", "value", "method", "cutoff"], &rows, |r| {
                vec![r.u.to_string(), fmt_f(r.value), r.method.to_string(), fmt_f(r.cutoff)]
            })?;
            sink.emit(&text)
        }
        Command::Count { ell, x, u_max, cutoff, outer } => {
            let records = sweep_error_records(*ell, *x, *u_max, *cutoff, *outer)?;
            let rows: Vec<CountRow> = records
                .iter()
                .map(|r| CountRow { u: r.spec.u, count: r.count, prediction: r.prediction, error: r.error })
                .collect();
            let text = match format.unwrap_or(Format::Csv) {
                Format::Csv => count_csv(&rows),
                Format::Json => canonical_json(&records)?,
            };
            sink.emit(&text)
        }
        Command::Variance { ell, x, y, cutoff, variant, per_u } => {
            let run = run_variance((*variant).into(), *ell, *y, *x, *cutoff)?;
            let text = match format.unwrap_or(Format::Json) {
                Format::Json => canonical_json(&run.report)?,
                Format::Csv => {
                    let value = serde_json::to_value(&run.report)?;
                    let mut csv = Csv::new(&["key", "value"]);
                    flatten_csv(&mut csv, "", &value);
                    csv.into_string()
                }
            };
            sink.emit(&text)?;
            if let Some(path) = per_u {
                let rows: Vec<CountRow> = run
                    .records
                    .iter()
                    .map(|r| CountRow { u: r.spec.u, count: r.count, prediction: r.prediction, error: r.error })
                    .collect();
                sink.write_file(path, &count_csv(&rows))?;
            }
            Ok(())
        }
        Command::Expsum { ell, z, alpha, which } => {
            let a: Alpha = alpha.parse()?;
            let w: Which = which.parse()?;
            let v = eval(w, &a, *z, *ell)?;
            let row = ExpSumRow {
                which: which.clone(),
                alpha: a.to_string(),
                z: *z,
                ell: *ell,
                re: v.re,
                im: v.im,
                abs: v.norm(),
                terms: v.terms,
                bound: v.bound,
            };
            let text = match format.unwrap_or(Format::Csv) {
                Format::Json => canonical_json(&row)?,
                Format::Csv => {
                    let mut csv = Csv::new(&["which", "alpha", "z", "ell", "re", "im", "abs", "terms", "bound"]);
                    csv.row([
                        row.which,
                        row.alpha,
                        fmt_f(row.z),
                        row.ell.to_string(),
                        fmt_f(row.re),
                        fmt_f(row.im),
                        fmt_f(row.abs),
                        row.terms.to_string(),
                        fmt_f(row.bound),
                    ]);
                    csv.into_string()
                }
            };
            sink.emit(&text)
        }
        Command::Arcs { x, exponent, alpha } => {
            let partition = build_arcs(*x, *exponent)?;
            let classifications = alpha
                .iter()
                .map(|s| {
                    let a: Alpha = s.parse()?;
                    Ok(match partition.classify(&a) {
                        ArcClass::Major { q, a: num } => {
                            ClassRow { alpha: s.clone(), class: "MAJOR", q: Some(q), a: Some(num) }
                        }
                        ArcClass::Minor => ClassRow { alpha: s.clone(), class: "MINOR", q: None, a: None },
                    })
                })
                .collect::<progavg_core::Result<Vec<_>>>()?;
            let text = match format.unwrap_or(Format::Csv) {
                Format::Json => canonical_json(&ArcsOutput {
                    partition: &partition,
                    total_measure: partition.total_measure(),
                    classifications,
                })?,
                Format::Csv => {
                    let mut csv = Csv::new(&["q", "a", "lo", "hi"]);
                    for arc in &partition.major {
                        csv.row([arc.q.to_string(), arc.a.to_string(), fmt_f(arc.lo), fmt_f(arc.hi)]);
                    }
                    if !classifications.is_empty() {
                        csv.blank_line();
                        csv.row(["alpha", "class", "q", "a"].map(String::from));
                        for c in &classifications {
                            let opt = |v: Option<u64>| v.map(|v| v.to_string()).unwrap_or_default();
                            csv.row([c.alpha.clone(), c.class.to_string(), opt(c.q), opt(c.a)]);
                        }
                    }
                    csv.into_string()
                }
            };
            sink.emit(&text)
        }
        Command::Verify { suite } => {
            let suite: Suite = suite.parse()?;
            let reports = run_suite(suite)?;
            let text = match format.unwrap_or(Format::Csv) {
                Format::Json => canonical_json(&reports)?,
                Format::Csv => {
                    let mut csv = Csv::new(&["suite", "status", "checks", "mismatches"]);
                    for r in &reports {
                        let status = if r.passed() { "PASS" } else { "FAIL" };
                        csv.row([r.name.clone(), status.to_string(), r.checks.to_string(), r.mismatches.to_string()]);
                    }
                    csv.into_string()
                }
            };
            sink.emit(&text)?;
            let failed: Vec<String> = reports.iter().filter(|r| !r.passed()).map(|r| r.name.clone()).collect();
            if !failed.is_empty() {
                for r in reports.iter().filter(|r| !r.passed()) {
                    for d in &r.details {
                        eprintln!("{}: {d}", r.name);
                    }
                }
                bail!(VerificationFailed(failed.join(", ")));
            }
            Ok(())
        }
    }
}

fn flatten_csv(csv: &mut Csv, prefix: &str, value: &serde_json::Value) {
    match value {
        serde_json::Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten_csv(csv, &key, v);
            }
        }
        serde_json::Value::Number(n) if n.is_f64() => {
            csv.row([prefix.to_string(), fmt_f(n.as_f64().unwrap_or(f64::NAN))]);
        }
        serde_json::Value::String(s) => csv.row([prefix.to_string(), s.clone()]),
        other => csv.row([prefix.to_string(), other.to_string()]),
    }
}

fn write_manifest(cli: &Cli, manifest: &RunManifest) -> Result<()> {
    let text = manifest.to_json()?;
    let path = cli.global.manifest.clone().or_else(|| cli.global.out.as_deref().map(RunManifest::path_for));
    match path {
        Some(path) => std::fs::write(&path, text).with_context(|| format!("writing manifest {}", path.display())),
        None => {
            eprint!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let parameters = serde_json::to_value(&cli).unwrap_or(serde_json::Value::Null);
    let mut manifest = RunManifest::start(cli.command.name(), parameters);
    let mut sink = Sink::new(cli.global.out.clone());

    let result = (|| -> Result<()> {
        if let Some(n) = cli.global.threads {
            if n == 0 {
                bail!(UsageError("--threads must be positive".into()));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .context("configuring the worker pool")?;
        }
        run(&cli, &mut sink)
    })();

    let code = match &result {
        Ok(()) => 0,
        Err(e) => exit_code(e),
    };
    manifest.finish(&sink.written, code as i32, result.as_ref().err().map(|e| format!("{e:#}")));
    if let Err(e) = write_manifest(&cli, &manifest) {
        eprintln!("error: {e:#}");
    }
    if let Err(e) = &result {
        eprintln!("error: {e:#}");
    }
    ExitCode::from(code)
}
