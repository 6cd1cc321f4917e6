//! Command-line front end.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analysis::{self, AnalysisError, CorridorRow, LsqLine};
use crate::data::{CsvStyle, Dataset, FitReport, FitStatus, ParamBox, SolutionKind, SortDirection};
use crate::interval::{Interval, Precision};
use crate::oracle;
use crate::seeding::{self, SeedError};
use crate::slicer::{self, SliceOptions, SolveError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_EMPTY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INDETERMINATE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "boxslice", version, about = "Interval line fitting by box slicing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Hull of the united, tolerable or controllable solution set.
    Fit(FitArgs),
    /// Escalate tolerated violations until a crude solution exists.
    Outliers(OutliersArgs),
    /// Longest prefix of x-sorted data whose hulls stay nested.
    Asymptote(AsymptoteArgs),
    /// Line-image table of a hull, optionally next to a least-squares band.
    Corridor(CorridorArgs),
    /// Compare a fit with a brute-force grid scan.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StyleArg {
    Bounds,
    CenterRadius,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
enum KindArg {
    United,
    Tolerable,
    Controllable,
}

impl From<KindArg> for SolutionKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::United => SolutionKind::United,
            KindArg::Tolerable => SolutionKind::Tolerable,
            KindArg::Controllable => SolutionKind::Controllable,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Rounding {
    Decimals,
    Significant,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DirectionArg {
    Asc,
    Desc,
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Measurement file (CSV, or JSON when the name ends in .json).
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "bounds")]
    csv_style: StyleArg,
}

#[derive(Debug, Args)]
struct SolverArgs {
    #[arg(long, default_value = "1e-6")]
    eps: f64,
    /// Half-width of the fallback seed box.
    #[arg(long, default_value = "1e40")]
    omega: f64,
    /// Bisection depth of the final tightening pass (0 disables it).
    #[arg(long, default_value_t = SliceOptions::default().refine_depth)]
    refine_depth: u32,
}

impl SolverArgs {
    fn options(&self) -> SliceOptions {
        SliceOptions { eps: self.eps, omega: self.omega, refine_depth: self.refine_depth, ..SliceOptions::default() }
    }
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Digits kept when rounding hull endpoints outward for display.
    #[arg(long, value_name = "INT")]
    sigfigs: Option<u32>,
    /// Whether --sigfigs counts decimal places or significant digits.
    #[arg(long, value_enum, default_value = "decimals")]
    rounding: Rounding,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

impl OutputArgs {
    fn precision(&self, default: u32) -> Precision {
        let n = self.sigfigs.unwrap_or(default);
        match self.rounding {
            Rounding::Decimals => Precision::Decimals(n),
            Rounding::Significant => Precision::Significant(n),
        }
    }
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value = "united")]
    kind: KindArg,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct OutliersArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Largest number of tolerated violations (default n - 2).
    #[arg(long, value_name = "INT")]
    max_k: Option<usize>,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct AsymptoteArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value = "asc")]
    direction: DirectionArg,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct CorridorArgs {
    /// Data to fit; the united hull is used.
    #[arg(long, value_name = "PATH", conflicts_with = "hull", required_unless_present = "hull")]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "bounds")]
    csv_style: StyleArg,
    /// Explicit hull instead of fitting: a_lo,a_hi,b_lo,b_hi.
    #[arg(long, value_name = "A_LO,A_HI,B_LO,B_HI", allow_hyphen_values = true)]
    hull: Option<String>,
    /// Abscissae, comma separated. Defaults to every x endpoint of the input.
    #[arg(long, value_name = "LIST", allow_hyphen_values = true, conflicts_with = "xs_file")]
    xs: Option<String>,
    /// File with abscissae separated by commas or whitespace.
    #[arg(long, value_name = "PATH")]
    xs_file: Option<PathBuf>,
    /// Least-squares line: a,b,sigma_a,sigma_b.
    #[arg(long, value_name = "A,B,SA,SB", allow_hyphen_values = true)]
    lsq: Option<String>,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value = "united")]
    kind: KindArg,
    /// Grid points per parameter.
    #[arg(long, default_value_t = 400)]
    resolution: usize,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    output: OutputArgs,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Failure { code: EXIT_USAGE, message: message.to_string() }
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        let code = match e {
            SolveError::Seed(SeedError::NoValidPair) | SolveError::Unbounded(_) => EXIT_INDETERMINATE,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Solve(s) => s.into(),
            AnalysisError::Exhausted(_) => Failure { code: EXIT_INDETERMINATE, message: e.to_string() },
            AnalysisError::EmptyStart(_) => Failure { code: EXIT_EMPTY, message: e.to_string() },
            _ => Failure::usage(e),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::usage(format!("write failed: {e}"))
    }
}

type CmdResult = Result<i32, Failure>;

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
                _ => {
                    let text = e.render().to_string();
                    let line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
                    let _ = writeln!(err, "{line}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Fit(a) => cmd_fit(&a, out, err),
        Command::Outliers(a) => cmd_outliers(&a, out),
        Command::Asymptote(a) => cmd_asymptote(&a, out),
        Command::Corridor(a) => cmd_corridor(&a, out),
        Command::Verify(a) => cmd_verify(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn load(path: &Path, style: StyleArg) -> Result<Dataset, Failure> {
    let file = File::open(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    let reader = BufReader::new(file);
    let is_json = path.extension().is_some_and(|x| x.eq_ignore_ascii_case("json"));
    let loaded = if is_json {
        Dataset::load_json(reader)
    } else {
        let style = match style {
            StyleArg::Bounds => CsvStyle::Bounds,
            StyleArg::CenterRadius => CsvStyle::CenterRadius,
        };
        Dataset::load_csv(reader, style)
    };
    loaded.map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn check_options(opts: &SliceOptions) -> Result<(), Failure> {
    opts.validate().map_err(Failure::usage)
}

/// JSON form of a fit. Endpoints are unrounded; empty components are null.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitJson {
    pub kind: SolutionKind,
    pub status: FitStatus,
    pub hull: HullJson,
    pub iterations: usize,
    pub eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HullJson {
    pub a: Option<[f64; 2]>,
    pub b: Option<[f64; 2]>,
}

impl From<&ParamBox> for HullJson {
    fn from(p: &ParamBox) -> Self {
        let pair = |iv: Interval| iv.bounds().map(|(l, h)| [l, h]);
        HullJson { a: pair(p.a), b: pair(p.b) }
    }
}

impl From<&FitReport> for FitJson {
    fn from(r: &FitReport) -> Self {
        FitJson { kind: r.kind, status: r.status, hull: (&r.hull).into(), iterations: r.outer_iterations, eps: r.eps_used }
    }
}

impl FitJson {
    pub fn render(&self) -> String {
        serde_json::to_string(self).expect("finite floats serialize")
    }
}

fn hull_text(h: &ParamBox, p: Precision) -> String {
    format!("a = {}  b = {}", h.a.display_rounded(p), h.b.display_rounded(p))
}

fn hull_csv_fields(h: &ParamBox) -> String {
    match (h.a.bounds(), h.b.bounds()) {
        (Some((al, ah)), Some((bl, bh))) => format!("{al:?},{ah:?},{bl:?},{bh:?}"),
        _ => ",,,".to_string(),
    }
}

fn fit_exit(status: FitStatus) -> i32 {
    match status {
        FitStatus::Solved => EXIT_OK,
        FitStatus::ProvenEmpty | FitStatus::SeedEmpty => EXIT_EMPTY,
    }
}

fn cmd_fit(a: &FitArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let opts = a.solver.options();
    check_options(&opts)?;
    let d = load(&a.input.input, a.input.csv_style)?;
    let r = slicer::solve(a.kind.into(), &d, &opts)?;
    match a.output.format {
        Format::Text => {
            let p = a.output.precision(5);
            writeln!(out, "{}  status={}  iterations={}", hull_text(&r.hull, p), r.status.name(), r.outer_iterations)?;
        }
        Format::Json => writeln!(out, "{}", FitJson::from(&r).render())?,
        Format::Csv => {
            writeln!(out, "kind,status,a_lo,a_hi,b_lo,b_hi,iterations,eps")?;
            writeln!(out, "{},{},{},{},{:?}", r.kind.name(), r.status.name(), hull_csv_fields(&r.hull), r.outer_iterations, r.eps_used)?;
        }
    }
    if r.is_solved() && r.witness.is_none() {
        writeln!(err, "warning: no line satisfying every measurement was found inside the hull")?;
    }
    if !r.idempotent {
        writeln!(err, "warning: iteration cap reached before a fixed point")?;
    }
    Ok(fit_exit(r.status))
}

#[derive(Serialize)]
struct OutliersJson {
    k_found: usize,
    outliers: Vec<usize>,
    hull: HullJson,
}

fn cmd_outliers(a: &OutliersArgs, out: &mut dyn Write) -> CmdResult {
    let opts = a.solver.options();
    check_options(&opts)?;
    let d = load(&a.input.input, a.input.csv_style)?;
    let max_k = a.max_k.unwrap_or(d.len().saturating_sub(2));
    let r = analysis::detect_outliers(&d, &opts, max_k)?;
    match a.output.format {
        Format::Text => {
            let list: Vec<String> = r.outlier_indices.iter().map(|i| i.to_string()).collect();
            let list = if list.is_empty() { "none".to_string() } else { list.join(",") };
            writeln!(out, "k_found={}  outliers={}", r.k_found, list)?;
            writeln!(out, "{}", hull_text(&r.hull, a.output.precision(5)))?;
        }
        Format::Json => {
            let j = OutliersJson { k_found: r.k_found, outliers: r.outlier_indices.clone(), hull: (&r.hull).into() };
            writeln!(out, "{}", serde_json::to_string(&j).expect("serializable"))?;
        }
        Format::Csv => {
            writeln!(out, "index,outlier")?;
            for m in d.iter() {
                writeln!(out, "{},{}", m.index, r.outlier_indices.contains(&m.index))?;
            }
        }
    }
    Ok(if r.outlier_indices.is_empty() { EXIT_OK } else { EXIT_EMPTY })
}

#[derive(Serialize)]
struct AsymptoteJson {
    n_used: usize,
    stop_reason: analysis::StopReason,
    hull: HullJson,
}

fn cmd_asymptote(a: &AsymptoteArgs, out: &mut dyn Write) -> CmdResult {
    let opts = a.solver.options();
    check_options(&opts)?;
    let d = load(&a.input.input, a.input.csv_style)?;
    let dir = match a.direction {
        DirectionArg::Asc => SortDirection::Ascending,
        DirectionArg::Desc => SortDirection::Descending,
    };
    let r = analysis::fit_asymptote(&d, dir, &opts)?;
    match a.output.format {
        Format::Text => {
            writeln!(out, "n_used={}  stop={}", r.n_used, r.stop_reason.name())?;
            writeln!(out, "{}", hull_text(&r.hull, a.output.precision(5)))?;
        }
        Format::Json => {
            let j = AsymptoteJson { n_used: r.n_used, stop_reason: r.stop_reason, hull: (&r.hull).into() };
            writeln!(out, "{}", serde_json::to_string(&j).expect("serializable"))?;
        }
        Format::Csv => {
            writeln!(out, "n_used,stop_reason,a_lo,a_hi,b_lo,b_hi")?;
            writeln!(out, "{},{},{}", r.n_used, r.stop_reason.name(), hull_csv_fields(&r.hull))?;
        }
    }
    Ok(EXIT_OK)
}

fn parse_reals(text: &str, what: &str) -> Result<Vec<f64>, Failure> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(Failure::usage(format!("malformed number {s:?} in {what}"))),
        })
        .collect()
}

fn parse_fixed<const N: usize>(text: &str, what: &str) -> Result<[f64; N], Failure> {
    let v = parse_reals(text, what)?;
    v.try_into().map_err(|_| Failure::usage(format!("{what} needs exactly {N} numbers")))
}

#[derive(Serialize)]
struct CorridorJson {
    x: f64,
    y_fit: [f64; 2],
    lsq_corridor: Option<[f64; 2]>,
    width_ratio: Option<f64>,
}

fn cmd_corridor(a: &CorridorArgs, out: &mut dyn Write) -> CmdResult {
    let opts = a.solver.options();
    check_options(&opts)?;
    let data = a.input.as_ref().map(|p| load(p, a.csv_style)).transpose()?;
    let hull = match (&a.hull, &data) {
        (Some(text), _) => {
            let [al, ah, bl, bh] = parse_fixed::<4>(text, "--hull")?;
            let iv = |l, h| Interval::new(l, h).map_err(|e| Failure::usage(format!("--hull: {e}")));
            ParamBox::new(iv(al, ah)?, iv(bl, bh)?)
        }
        (None, Some(d)) => {
            let r = slicer::solve(SolutionKind::United, d, &opts)?;
            if !r.is_solved() {
                return Err(Failure { code: EXIT_EMPTY, message: format!("united fit is {}", r.status.name()) });
            }
            r.hull
        }
        (None, None) => return Err(Failure::usage("either --input or --hull is required")),
    };
    let xs = if let Some(text) = &a.xs {
        parse_reals(text, "--xs")?
    } else if let Some(path) = &a.xs_file {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
        parse_reals(&text, &path.display().to_string())?
    } else if let Some(d) = &data {
        d.iter().flat_map(|m| [m.x.lo(), m.x.hi()]).collect()
    } else {
        return Err(Failure::usage("--xs or --xs-file is required with --hull"));
    };
    let lsq = a
        .lsq
        .as_ref()
        .map(|t| parse_fixed::<4>(t, "--lsq").map(|[a, b, sigma_a, sigma_b]| LsqLine { a, b, sigma_a, sigma_b }))
        .transpose()?;
    let rows = analysis::corridor_table(&hull, &xs, lsq.as_ref())?;
    render_corridor(&rows, a.output.format, a.output.precision(2), out)?;
    Ok(EXIT_OK)
}

fn render_corridor(rows: &[CorridorRow], format: Format, p: Precision, out: &mut dyn Write) -> std::io::Result<()> {
    match format {
        Format::Text => {
            writeln!(out, "{:>8}  {:<18} {:>10} {:>10} {:>8}", "x", "y_fit", "lsq_lo", "lsq_hi", "ratio")?;
            for r in rows {
                let (lsq_lo, lsq_hi) = match r.lsq_corridor {
                    Some((l, h)) => (format!("{l:.3}"), format!("{h:.3}")),
                    None => ("-".into(), "-".into()),
                };
                let ratio = r.width_ratio.map_or("-".into(), |w| format!("{w:.3}"));
                writeln!(out, "{:>8}  {:<18} {:>10} {:>10} {:>8}", r.x, r.y_fit.display_rounded(p), lsq_lo, lsq_hi, ratio)?;
            }
        }
        Format::Csv => {
            writeln!(out, "x,y_fit_lo,y_fit_hi,lsq_lo,lsq_hi,width_ratio")?;
            for r in rows {
                let (l, h) = r.lsq_corridor.map_or((String::new(), String::new()), |(l, h)| (format!("{l:?}"), format!("{h:?}")));
                let w = r.width_ratio.map_or(String::new(), |w| format!("{w:?}"));
                writeln!(out, "{:?},{:?},{:?},{l},{h},{w}", r.x, r.y_fit.lo(), r.y_fit.hi())?;
            }
        }
        Format::Json => {
            let rows: Vec<CorridorJson> = rows
                .iter()
                .map(|r| CorridorJson {
                    x: r.x,
                    y_fit: [r.y_fit.lo(), r.y_fit.hi()],
                    lsq_corridor: r.lsq_corridor.map(|(l, h)| [l, h]),
                    width_ratio: r.width_ratio,
                })
                .collect();
            writeln!(out, "{}", serde_json::to_string(&rows).expect("serializable"))?;
        }
    }
    Ok(())
}

/// Outcome of comparing a slicer hull with a grid scan of the seed box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verification {
    pub accepted: usize,
    pub contained: bool,
    /// Largest distance, in grid steps, between a slicer endpoint and the
    /// matching grid-hull endpoint. `None` when the grid accepted nothing.
    pub max_excess_steps: Option<f64>,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.contained && self.max_excess_steps.is_none_or(|s| s <= 2.0)
    }
}

pub fn compare_with_grid(hull: &ParamBox, scan: &oracle::GridScan) -> Verification {
    let contained = scan.hull.subset(hull);
    let max_excess_steps = (!scan.hull.is_empty() && !hull.is_empty()).then(|| {
        let (sa, sb) = scan.step;
        let steps = |d: f64, s: f64| {
            if s > 0.0 {
                d / s
            } else if d > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        };
        [
            steps(scan.hull.a.lo() - hull.a.lo(), sa),
            steps(hull.a.hi() - scan.hull.a.hi(), sa),
            steps(scan.hull.b.lo() - hull.b.lo(), sb),
            steps(hull.b.hi() - scan.hull.b.hi(), sb),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    });
    Verification { accepted: scan.accepted, contained, max_excess_steps }
}

#[derive(Serialize)]
struct VerifyJson {
    accepted: usize,
    contained: bool,
    max_excess_steps: Option<f64>,
    passed: bool,
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> CmdResult {
    let opts = a.solver.options();
    check_options(&opts)?;
    let d = load(&a.input.input, a.input.csv_style)?;
    let kind: SolutionKind = a.kind.into();
    let r = slicer::solve(kind, &d, &opts)?;
    let region = seeding::initial_union_box(&d, opts.omega);
    let scan = oracle::grid_hull(kind, &d, &region, a.resolution).map_err(Failure::usage)?;
    let v = compare_with_grid(&r.hull, &scan);
    let steps = v.max_excess_steps.map_or("-".to_string(), |s| format!("{s:.3}"));
    match a.output.format {
        Format::Text => {
            writeln!(out, "slicer: {}  status={}", hull_text(&r.hull, a.output.precision(5)), r.status.name())?;
            writeln!(out, "grid:   {}  accepted={}", hull_text(&scan.hull, a.output.precision(5)), scan.accepted)?;
            writeln!(out, "contained={}  max_excess_steps={}  {}", v.contained, steps, if v.passed() { "ok" } else { "FAILED" })?;
        }
        Format::Json => {
            let j = VerifyJson { accepted: v.accepted, contained: v.contained, max_excess_steps: v.max_excess_steps, passed: v.passed() };
            writeln!(out, "{}", serde_json::to_string(&j).expect("serializable"))?;
        }
        Format::Csv => {
            writeln!(out, "accepted,contained,max_excess_steps,passed")?;
            writeln!(
                out,
                "{},{},{},{}",
                v.accepted,
                v.contained,
                v.max_excess_steps.map_or(String::new(), |s| format!("{s:?}")),
                v.passed()
            )?;
        }
    }
    Ok(if v.passed() { EXIT_OK } else { EXIT_EMPTY })
}
