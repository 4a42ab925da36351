//! Command-line front end.
//!
//! Every command prints a JSON [`RunReport`] (to stdout, or to `--out` for
//! `demo-growth`) and a short summary to stderr. Exit status is 0 when every
//! check passed, 1 when a check failed, and 2 for unusable input.

use std::ffi::OsString;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use thiserror::Error;

use crate::builder::Representation;
use crate::exactnum::Rational;
use crate::funcio::{load_table, parse_points, parse_representation, render_representation, E0Point, FuncError, FunctionSpec, Point};
use crate::rank::{certify_exp_matrix_nonsingular, lowerbound_check, Verdict};
use crate::report::{InputDigest, RunReport};

const MAX_GROWTH_SIZE: usize = 12;

#[derive(Debug, Parser)]
#[command(name = "davies", version, about = "Build and check pointwise-finite representations f(x,y) = Σ g(x,n)h(y,n)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a representation point by point and write it to a file.
    Build(BuildArgs),
    /// Reload a representation file and re-check every invariant.
    Verify(VerifyArgs),
    /// Certify that the matrix [exp(a_i b_j)] is nonsingular.
    RankCertify(RankCertifyArgs),
    /// Compare the terms used on a grid with the rank of f on it.
    Lowerbound(LowerboundArgs),
    /// Record active-term counts against grid ranks for growing point sets.
    DemoGrowth(DemoGrowthArgs),
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// JSON list of {label, payload}.
    #[arg(long)]
    pub points: PathBuf,
    /// product, zero, e0, expseries:K, randtable:SEED:M or table:PATH.
    #[arg(long)]
    pub function: String,
    #[arg(long)]
    pub out: PathBuf,
    /// Run the pair identities and the almost-disjointness check.
    #[arg(long)]
    pub verify: bool,
    /// Stress horizon; defaults to 4 times the largest milestone.
    #[arg(long)]
    pub horizon: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub representation: PathBuf,
    /// Defaults to the horizon stored in the file.
    #[arg(long)]
    pub horizon: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RankCertifyArgs {
    /// Comma-separated rationals.
    #[arg(long, required = true, allow_hyphen_values = true, value_delimiter = ',', value_parser = parse_rational)]
    pub a: Vec<Rational>,
    #[arg(long, required = true, allow_hyphen_values = true, value_delimiter = ',', value_parser = parse_rational)]
    pub b: Vec<Rational>,
    /// Initial entry tolerance.
    #[arg(long, default_value = "1/1000000", value_parser = parse_rational)]
    pub eps: Rational,
    #[arg(long, default_value_t = 20)]
    pub max_refine: u32,
}

#[derive(Debug, Args)]
pub struct LowerboundArgs {
    pub representation: PathBuf,
    /// Comma-separated row positions; defaults to all.
    #[arg(long, value_delimiter = ',')]
    pub rows: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub cols: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
pub struct DemoGrowthArgs {
    /// Inclusive range A..B of point counts.
    #[arg(long, value_parser = parse_sizes)]
    pub sizes: RangeInclusive<usize>,
    #[arg(long)]
    pub function: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Function(#[from] FuncError),
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    s.trim().parse::<Rational>().map_err(|e| format!("{s:?}: {e}"))
}

fn parse_sizes(s: &str) -> Result<RangeInclusive<usize>, String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("{s:?}: expected A..B"))?;
    let a: usize = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let b: usize = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    if a > b {
        return Err(format!("empty range {a}..{b}"));
    }
    if b > MAX_GROWTH_SIZE {
        return Err(format!("sizes above {MAX_GROWTH_SIZE} are not supported"));
    }
    Ok(a..=b)
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses the descriptor, folds its inputs into the digest and checks that a
/// table covers `points` positions.
fn function_input(descriptor: &str, points: usize, digest: InputDigest) -> Result<(FunctionSpec, InputDigest), CliError> {
    let spec: FunctionSpec = descriptor.parse()?;
    let mut digest = digest.field("function", spec.to_string().as_bytes());
    match &spec {
        FunctionSpec::Table { path } => {
            digest = digest.field("table", read(Path::new(path))?.as_bytes());
            load_table(path)?.check_covers(points)?;
        }
        FunctionSpec::RandTable { size, .. } if *size < points => {
            return Err(CliError::Usage(format!("{spec} covers {size} points, {points} requested")));
        }
        _ => {}
    }
    Ok((spec, digest))
}

fn horizon_bytes(h: Option<usize>) -> Vec<u8> {
    h.map_or_else(|| b"default".to_vec(), |h| h.to_string().into_bytes())
}

/// Pair identities and almost disjointness at `horizon`.
fn verify_checks(report: &mut RunReport, rep: &Representation, horizon: usize) -> bool {
    let n = rep.len();
    let pairs = report.timed("verify", || rep.verify_all(horizon));
    let pairs_ok = report
        .check_result(
            "pair identities",
            |v| format!("{} pairs exact through index {horizon}", v.pairs.len()),
            pairs,
        )
        .is_some();
    let s = report.timed("verify", || rep.check_s(n + 1, horizon));
    let s_ok = report
        .check_result(
            "almost disjointness",
            |s| format!("{} rows, {} bounded overlaps through index {horizon}", s.rows, s.overlaps.len()),
            s,
        )
        .is_some();
    pairs_ok && s_ok
}

fn cmd_build(args: &BuildArgs) -> Result<RunReport, CliError> {
    let text = read(&args.points)?;
    let points = parse_points(&text)?;
    let digest = InputDigest::new("build").field("points", text.as_bytes());
    let (spec, digest) = function_input(&args.function, points.len(), digest)?;
    let digest = digest
        .field("verify", &[args.verify as u8])
        .field("horizon", &horizon_bytes(args.horizon));
    let f = spec.instantiate()?;
    let mut report = RunReport::new("build", digest.finish());

    let n = points.len();
    let mut rep = Representation::new(f);
    let added = report.timed("build", || {
        for p in points {
            let label = p.label.clone();
            rep.add_point(p).map_err(|e| format!("point {label:?}: {e}"))?;
        }
        Ok::<_, String>(())
    });
    if !report.check("construction", added.is_ok(), added.err().unwrap_or_else(|| format!("{n} points added"))) {
        return Ok(report);
    }

    let stored = match rep.default_horizon() {
        Ok(h) => h,
        Err(e) => {
            report.check("milestones", false, e.to_string());
            return Ok(report);
        }
    };
    if args.verify && !verify_checks(&mut report, &rep, args.horizon.unwrap_or(stored)) {
        return Ok(report);
    }

    let rendered = report.timed("write", || render_representation(&rep));
    let Some(rendered) = report.check_result("serialize", |t| format!("{} bytes", t.len()), rendered) else {
        return Ok(report);
    };
    write(&args.out, &rendered)?;
    report.result = json!({
        "points": n,
        "function": spec.to_string(),
        "horizon": stored,
        "cutoffs": rep.cutoff_table().unwrap_or_default(),
    });
    Ok(report)
}

fn load_checked(report: &mut RunReport, text: &str) -> Option<Representation> {
    let loaded = report.timed("load", || parse_representation(text));
    report.check_result(
        "load",
        |r: &Representation| format!("{} points, stored invariants hold", r.len()),
        loaded,
    )
}

fn cmd_verify(args: &VerifyArgs) -> Result<RunReport, CliError> {
    let text = read(&args.representation)?;
    let digest = InputDigest::new("verify")
        .field("representation", text.as_bytes())
        .field("horizon", &horizon_bytes(args.horizon));
    let mut report = RunReport::new("verify", digest.finish());
    let Some(rep) = load_checked(&mut report, &text) else {
        return Ok(report);
    };
    let stored = rep.default_horizon().unwrap_or(0);
    let horizon = args.horizon.unwrap_or(stored);
    verify_checks(&mut report, &rep, horizon);
    report.result = json!({
        "points": rep.len(),
        "function": rep.function().descriptor(),
        "horizon": horizon,
        "stored_horizon": stored,
    });
    Ok(report)
}

fn cmd_rank_certify(args: &RankCertifyArgs) -> Result<RunReport, CliError> {
    let join = |xs: &[Rational]| xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(",");
    let digest = InputDigest::new("rank-certify")
        .field("a", join(&args.a).as_bytes())
        .field("b", join(&args.b).as_bytes())
        .field("eps", args.eps.to_string().as_bytes())
        .field("max_refine", args.max_refine.to_string().as_bytes());
    let mut report = RunReport::new("rank-certify", digest.finish());
    let cert = report.timed("certify", || certify_exp_matrix_nonsingular(&args.a, &args.b, &args.eps, args.max_refine));
    let cert = cert.map_err(|e| CliError::Usage(e.to_string()))?;
    let detail = match &cert.enclosure {
        Some(d) => format!(
            "det in [{}, {}] at eps {} after {} refinements",
            d.lo(),
            d.hi(),
            cert.eps,
            cert.refinements
        ),
        None => format!("no enclosure at eps {}", cert.eps),
    };
    report.check("nonsingular", cert.verdict == Verdict::NonsingularCertified, detail);
    report.result = serde_json::to_value(&cert).expect("certificate serializes");
    Ok(report)
}

fn positions(given: &Option<Vec<usize>>, n: usize, what: &str) -> Result<Vec<usize>, CliError> {
    let ps = given.clone().unwrap_or_else(|| (0..n).collect());
    if let Some(p) = ps.iter().find(|&&p| p >= n) {
        return Err(CliError::Usage(format!("{what} position {p} out of range ({n} points)")));
    }
    Ok(ps)
}

fn cmd_lowerbound(args: &LowerboundArgs) -> Result<RunReport, CliError> {
    let text = read(&args.representation)?;
    let list = |p: &Option<Vec<usize>>| p.as_ref().map_or_else(|| b"all".to_vec(), |v| format!("{v:?}").into_bytes());
    let digest = InputDigest::new("lowerbound")
        .field("representation", text.as_bytes())
        .field("rows", &list(&args.rows))
        .field("cols", &list(&args.cols));
    let mut report = RunReport::new("lowerbound", digest.finish());
    let Some(rep) = load_checked(&mut report, &text) else {
        return Ok(report);
    };
    let rows = positions(&args.rows, rep.len(), "row")?;
    let cols = positions(&args.cols, rep.len(), "column")?;
    let lb = report.timed("rank", || lowerbound_check(&rep, &rows, &cols));
    if let Some(lb) = report.check_result(
        "term count bound",
        |r| format!("{} active indices >= grid rank {}", r.active_indices, r.grid_rank),
        lb,
    ) {
        report.result = serde_json::to_value(&lb).expect("report serializes");
    }
    Ok(report)
}

/// Fresh points for a growth run: E0 points alternate tails, everything else
/// gets the integers `0..m`.
fn growth_points(spec: &FunctionSpec, m: usize) -> Vec<Point> {
    (0..m)
        .map(|k| match spec {
            FunctionSpec::E0 => {
                let e = E0Point::new(&format!("{k:b}"), (k % 2) as u8).expect("binary prefix");
                Point::e0(format!("e{k}"), e)
            }
            _ => Point::rational(format!("x{k}"), Rational::from(k as i64)),
        })
        .collect()
}

fn cmd_demo_growth(args: &DemoGrowthArgs) -> Result<RunReport, CliError> {
    let digest = InputDigest::new("demo-growth").field("sizes", format!("{}..{}", args.sizes.start(), args.sizes.end()).as_bytes());
    let (spec, digest) = function_input(&args.function, *args.sizes.end(), digest)?;
    let mut report = RunReport::new("demo-growth", digest.finish());
    let mut table = Vec::new();
    for m in args.sizes.clone() {
        let name = format!("size {m}");
        let mut rep = Representation::new(spec.instantiate()?);
        let built = report.timed("build", || growth_points(&spec, m).into_iter().try_for_each(|p| rep.add_point(p).map(|_| ())));
        if let Err(e) = built {
            report.check(name, false, e.to_string());
            continue;
        }
        let horizon = match rep.default_horizon() {
            Ok(h) => h,
            Err(e) => {
                report.check(name, false, e.to_string());
                continue;
            }
        };
        let verified = report.timed("verify", || rep.verify_all(horizon).and_then(|_| rep.check_s(m + 1, horizon)));
        if let Err(e) = verified {
            report.check(name, false, e.to_string());
            continue;
        }
        let all: Vec<usize> = (0..m).collect();
        match report.timed("rank", || lowerbound_check(&rep, &all, &all)) {
            Ok(lb) => {
                report.check(name, true, format!("{} active indices >= grid rank {}", lb.active_indices, lb.grid_rank));
                table.push(json!({
                    "size": m,
                    "active_indices": lb.active_indices,
                    "grid_rank": lb.grid_rank,
                    "horizon": horizon,
                }));
            }
            Err(e) => {
                report.check(name, false, e.to_string());
            }
        }
    }
    report.result = json!({ "function": spec.to_string(), "rows": table });
    write(&args.out, &report.to_json())?;
    Ok(report)
}

pub fn execute(cli: &Cli) -> Result<RunReport, CliError> {
    match &cli.command {
        Command::Build(a) => cmd_build(a),
        Command::Verify(a) => cmd_verify(a),
        Command::RankCertify(a) => cmd_rank_certify(a),
        Command::Lowerbound(a) => cmd_lowerbound(a),
        Command::DemoGrowth(a) => cmd_demo_growth(a),
    }
}

/// Parses `args`, runs the command, prints its report and returns the exit
/// status.
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
    match execute(&cli) {
        Ok(report) => {
            if !matches!(cli.command, Command::DemoGrowth(_)) {
                print!("{}", report.to_json());
            }
            eprint!("{}", report.summary());
            if report.passed() {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
