use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use jpk_core::cz::{self, CzEvaluator, KernelId, LaplaceProfile, MultiplierSpec, StieltjesMeasure};
use jpk_core::sharp::{Which, SHARP_CAP};
use jpk_core::spectral::{self, Expansion};
use jpk_core::{Deriv, EstimateReport, JacobiParams, Kernel, KernelQuery, Method};
use serde_json::{json, Value};

use jpk::config::{check_cap, check_tolerance, pick, pick_or, require, FileConfig};
use jpk::error::{CliError, CliResult};
use jpk::format::{fmt_f64, fmt_sig};
use jpk::grid::{parse_grid, parse_value};
use jpk::io::{self as jio, num, SampledFunction};
use jpk::scan::{self, CompareReport};

/// Jacobi-Poisson kernels, cross-method checks, estimate scans and spectral operators.
#[derive(Parser)]
#[command(name = "jpk", version, allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the kernel (or a derivative) at one point.
    Kernel(KernelArgs),
    /// Evaluate every method over a grid and report their largest disagreement.
    Compare(CompareArgs),
    /// Sharp two-sided or standard-estimate ratio scans.
    Scan(ScanArgs),
    /// Apply an operator to an expansion.
    Apply(ApplyArgs),
    /// Expansion coefficients of sampled data.
    Coeffs(CoeffsArgs),
}

#[derive(Args)]
struct Common {
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    /// JSON file with defaults for any of the options.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (standard output when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct KernelArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, allow_hyphen_values = true)]
    t: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<String>,
    /// series, f4, integral, general or auto.
    #[arg(long)]
    method: Option<String>,
    /// Orders of differentiation `M,N,L` in t, theta and phi.
    #[arg(long)]
    deriv: Option<String>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: Common,
    /// Grid: `a:b:n`, `log:a:b:n` or a comma list (values may use `pi`).
    #[arg(long, allow_hyphen_values = true)]
    t: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    /// Tolerance for `t <= 0.1` and `|theta - phi| < 0.05`.
    #[arg(long)]
    near_tol: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScanKind {
    Sharp,
    Growth,
    Gradient,
    Smoothness,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WhichArg {
    H,
    Script,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    scan: ScanKind,
    /// maximal, riesz1, riesz2, square:M,N, laplace:<profile> or stieltjes:<w@t;...>.
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<String>,
    /// Kernel compared in the sharp scan.
    #[arg(long, value_enum, default_value = "h")]
    which: WhichArg,
    #[arg(long)]
    cap: Option<f64>,
    /// Number of random triples for the smoothness scan.
    #[arg(long)]
    triples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Op {
    Semigroup,
    Riesz,
    Gfun,
    Multiplier,
}

#[derive(Args)]
struct ApplyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    op: Op,
    /// Expansion JSON `{alpha, beta, n_max, coeffs}`.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    t: Option<String>,
    /// Riesz order, or theta order of the g-function.
    #[arg(long = "N")]
    n: Option<u32>,
    /// t order of the g-function.
    #[arg(long = "M")]
    m: Option<u32>,
    /// const<c>, indicator:a,b or imag:gamma.
    #[arg(long, allow_hyphen_values = true)]
    laplace_profile: Option<String>,
    /// Atoms `w@t;w@t;...`.
    #[arg(long, allow_hyphen_values = true)]
    stieltjes: Option<String>,
    /// Points at which to sample the result instead of writing an expansion.
    #[arg(long, allow_hyphen_values = true)]
    eval_at: Option<String>,
}

#[derive(Args)]
struct CoeffsArgs {
    #[command(flatten)]
    common: Common,
    /// CSV `theta,f` with a header row.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    n_max: usize,
    /// Quadrature nodes (default `max(2 n_max + 2, 64)`).
    #[arg(long)]
    nodes: Option<usize>,
}

struct Ctx {
    file: FileConfig,
    out: Option<PathBuf>,
    format: Format,
}

impl Ctx {
    fn new(common: &Common) -> CliResult<Self> {
        let file = match &common.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let format = match (common.format, file.format.as_deref()) {
            (Some(f), _) => f,
            (None, None) => Format::Csv,
            (None, Some("csv")) => Format::Csv,
            (None, Some("json")) => Format::Json,
            (None, Some(other)) => return Err(CliError::usage(format!("unknown format '{other}'"))),
        };
        Ok(Self { out: common.out.clone(), format, file })
    }

    fn params(&self, common: &Common) -> CliResult<JacobiParams> {
        let alpha = require(common.alpha, self.file.alpha, "alpha")?;
        let beta = require(common.beta, self.file.beta, "beta")?;
        Ok(JacobiParams::new(alpha, beta)?)
    }

    fn write(&self, f: impl FnOnce(&mut dyn Write) -> CliResult<()>) -> CliResult<()> {
        match &self.out {
            Some(path) => {
                let file = File::create(path).map_err(|e| CliError::usage(format!("cannot create {}: {e}", path.display())))?;
                let mut w = BufWriter::new(file);
                f(&mut w)?;
                w.flush()?;
            }
            None => {
                let stdout = io::stdout();
                let mut w = stdout.lock();
                f(&mut w)?;
                w.flush()?;
            }
        }
        Ok(())
    }
}

fn grid(flag: Option<String>, file: Option<String>, default: &str, name: &str) -> CliResult<Vec<f64>> {
    let g = parse_grid(&pick_or(flag, file, default.to_string()))?;
    if g.is_empty() {
        return Err(CliError::usage(format!("{name} grid is empty")));
    }
    Ok(g)
}

fn point(flag: Option<String>, file: Option<String>, name: &str) -> CliResult<f64> {
    parse_value(&require(flag, file, name)?)
}

fn parse_deriv(s: &str) -> CliResult<Deriv> {
    let parts: Vec<u32> = s
        .split(',')
        .map(|p| p.trim().parse::<u32>().map_err(|_| CliError::usage(format!("cannot read derivative orders from '{s}'"))))
        .collect::<CliResult<_>>()?;
    match parts.as_slice() {
        &[m, n, l] => Ok(Deriv::new(m, n, l)),
        _ => Err(CliError::usage(format!("derivative orders need the form M,N,L (got '{s}')"))),
    }
}

fn cmd_kernel(a: KernelArgs) -> CliResult<()> {
    let ctx = Ctx::new(&a.common)?;
    let params = ctx.params(&a.common)?;
    let t = point(a.t, ctx.file.t.clone(), "t")?;
    let theta = point(a.theta, ctx.file.theta.clone(), "theta")?;
    let phi = point(a.phi, ctx.file.phi.clone(), "phi")?;
    let method: Method = pick_or(a.method, ctx.file.method.clone(), "auto".to_string()).parse()?;
    let deriv = a.deriv.as_deref().map(parse_deriv).transpose()?.unwrap_or(Deriv::ZERO);
    let kernel = Kernel::new(&params)?;
    let v = kernel.eval(&KernelQuery::new(t, theta, phi).with_deriv(deriv).with_method(method))?;
    ctx.write(|w| Ok(writeln!(w, "{}", fmt_sig(v, 15))?))
}

const COMPARE_T: &str = "0.1,0.5,1";
const COMPARE_ANGLES: &str = "0.01,pi/4,pi/2,3pi/4,pi-0.01";

fn compare_json(r: &CompareReport) -> Value {
    let rows: Vec<Value> = r
        .rows
        .iter()
        .map(|row| {
            let mut m = serde_json::Map::new();
            for (k, v) in [("t", row.t), ("theta", row.theta), ("phi", row.phi)] {
                m.insert(k.into(), num(v));
            }
            let mut errors = Vec::new();
            for (method, v) in scan::COMPARE_METHODS.iter().zip(&row.values) {
                match v {
                    Ok(x) => m.insert(method.name().into(), num(*x)),
                    Err(e) => {
                        errors.push(Value::String(e.clone()));
                        m.insert(method.name().into(), Value::Null)
                    }
                };
            }
            m.insert("max_rel_diff".into(), num(row.max_rel_diff));
            if !errors.is_empty() {
                m.insert("errors".into(), Value::Array(errors));
            }
            Value::Object(m)
        })
        .collect();
    json!({
        "name": "compare",
        "summary": compare_summary(r),
        "extras": { "near_tol": num(r.near_tol), "failures": r.failures() },
        "rows": rows,
    })
}

fn compare_summary(r: &CompareReport) -> Value {
    json!({ "min": num(r.min_rel_diff()), "max": num(r.max_rel_diff()), "cap": num(r.tol), "pass": r.pass() })
}

fn compare_csv(r: &CompareReport, out: &mut dyn Write) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(["t", "theta", "phi", "series", "f4", "integral", "general", "max_rel_diff"])?;
    for row in &r.rows {
        let mut rec = vec![fmt_f64(row.t), fmt_f64(row.theta), fmt_f64(row.phi)];
        rec.extend(row.values.iter().map(|v| fmt_f64(*v.as_ref().unwrap_or(&f64::NAN))));
        rec.push(fmt_f64(row.max_rel_diff));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_compare(a: CompareArgs) -> CliResult<()> {
    let ctx = Ctx::new(&a.common)?;
    let params = ctx.params(&a.common)?;
    let t = grid(a.t, ctx.file.t.clone(), COMPARE_T, "t")?;
    let theta = grid(a.theta, ctx.file.theta.clone(), COMPARE_ANGLES, "theta")?;
    let phi = grid(a.phi, ctx.file.phi.clone(), COMPARE_ANGLES, "phi")?;
    let tol = check_tolerance("tol", pick_or(a.tol, ctx.file.tol, 1e-6))?;
    let near_tol = check_tolerance("near-tol", pick_or(a.near_tol, ctx.file.near_tol, 1e-4))?;
    let pool = scan::thread_pool(scan::threads_from_env()?)?;
    let kernel = Kernel::new(&params)?;
    let report = scan::compare_grid(&pool, &kernel, &t, &theta, &phi, tol, near_tol);
    match ctx.format {
        Format::Csv => {
            ctx.write(|w| compare_csv(&report, w))?;
            eprintln!("{}", json!({ "summary": compare_summary(&report), "failures": report.failures() }));
        }
        Format::Json => ctx.write(|w| Ok(writeln!(w, "{}", serde_json::to_string_pretty(&compare_json(&report))?)?))?,
    }
    for row in report.rows.iter().filter(|r| r.failed()) {
        for e in row.values.iter().filter_map(|v| v.as_ref().err()) {
            eprintln!("t={} theta={} phi={}: {e}", fmt_f64(row.t), fmt_f64(row.theta), fmt_f64(row.phi));
        }
    }
    if report.failures() > 0 {
        Err(CliError::Numeric(format!("{} grid point(s) had a method failure", report.failures())))
    } else if !report.pass() {
        Err(CliError::CapViolation(format!("max_rel_diff {} exceeds tolerance", fmt_f64(report.max_rel_diff()))))
    } else {
        Ok(())
    }
}

const SHARP_T: &str = "0.05:1:20";
const SHARP_ANGLES: &str = "0:pi:25";
const CZ_GRID: usize = 15;

fn emit_report(ctx: &Ctx, report: &EstimateReport) -> CliResult<()> {
    match ctx.format {
        Format::Csv => {
            ctx.write(|w| jio::write_report_csv(report, w))?;
            let extras: serde_json::Map<String, Value> = report.extras.iter().map(|(k, v)| (k.clone(), num(*v))).collect();
            eprintln!("{}", json!({ "name": report.name, "summary": jio::summary_json(report), "extras": extras }));
        }
        Format::Json => ctx.write(|w| Ok(writeln!(w, "{}", serde_json::to_string_pretty(&jio::report_json(report))?)?))?,
    }
    if report.pass() {
        Ok(())
    } else {
        Err(CliError::CapViolation(format!("{} exceeds its cap {}", report.name, fmt_f64(report.summary.cap))))
    }
}

fn cmd_scan(a: ScanArgs) -> CliResult<()> {
    let ctx = Ctx::new(&a.common)?;
    let params = ctx.params(&a.common)?;
    let pool = scan::thread_pool(scan::threads_from_env()?)?;
    let file = &ctx.file;
    if a.scan == ScanKind::Sharp {
        let t = grid(a.t, file.t.clone(), SHARP_T, "t")?;
        let theta = grid(a.theta, file.theta.clone(), SHARP_ANGLES, "theta")?;
        let phi = grid(a.phi, file.phi.clone(), SHARP_ANGLES, "phi")?;
        let cap = check_cap(pick_or(a.cap, file.cap, SHARP_CAP))?;
        let which = match a.which {
            WhichArg::H => Which::H,
            WhichArg::Script => Which::Script,
        };
        let report = scan::sharp_scan(&pool, &Kernel::new(&params)?, &t, &theta, &phi, which, cap)?;
        return emit_report(&ctx, &report);
    }
    let id: KernelId = a.kernel.ok_or_else(|| CliError::usage("missing --kernel"))?.parse()?;
    id.validate()?;
    let cap = check_cap(pick_or(a.cap, file.cap, cz::CZ_CAP))?;
    let ev = CzEvaluator::new(&params)?;
    let ids = std::slice::from_ref(&id);
    let report = if a.scan == ScanKind::Smoothness {
        let count = pick_or(a.triples, file.triples, 100);
        if count == 0 {
            return Err(CliError::usage("--triples must be positive"));
        }
        let triples = scan::random_triples(count, pick_or(a.seed, file.seed, 1));
        scan::smoothness_scan(&pool, &ev, ids, &triples, cap)?.remove(0)
    } else {
        let pairs = match (pick(a.theta, file.theta.clone()), pick(a.phi, file.phi.clone())) {
            (None, None) => cz::off_diagonal_grid(CZ_GRID),
            (theta, phi) => {
                let default = format!("pi/{}:{}pi/{}:{CZ_GRID}", CZ_GRID + 1, CZ_GRID, CZ_GRID + 1);
                let theta = grid(theta, None, &default, "theta")?;
                let phi = grid(phi, None, &default, "phi")?;
                scan::off_diagonal_pairs(&theta, &phi)
            }
        };
        if pairs.is_empty() {
            return Err(CliError::usage("grid has no off-diagonal points"));
        }
        let (growth, gradient) = scan::growth_gradient_scan(&pool, &ev, ids, &pairs, cap)?.remove(0);
        if a.scan == ScanKind::Growth {
            growth
        } else {
            gradient
        }
    };
    emit_report(&ctx, &report)
}

fn read_expansion(path: &Path) -> CliResult<Expansion> {
    let f = File::open(path).map_err(|e| CliError::usage(format!("cannot open {}: {e}", path.display())))?;
    jio::read_expansion(io::BufReader::new(f))
}

fn eval_points(s: &str) -> CliResult<Vec<f64>> {
    let g = parse_grid(s)?;
    if g.is_empty() {
        return Err(CliError::usage("--eval-at grid is empty"));
    }
    Ok(g)
}

fn write_samples(ctx: &Ctx, thetas: &[f64], values: Vec<num_complex::Complex64>, real: bool) -> CliResult<()> {
    ctx.write(|w| {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        if real {
            out.write_record(["theta", "f"])?;
        } else {
            out.write_record(["theta", "re", "im"])?;
        }
        for (th, v) in thetas.iter().zip(values) {
            if real {
                out.write_record([fmt_f64(*th), fmt_f64(v.re)])?;
            } else {
                out.write_record([fmt_f64(*th), fmt_f64(v.re), fmt_f64(v.im)])?;
            }
        }
        out.flush()?;
        Ok(())
    })
}

fn cmd_apply(a: ApplyArgs) -> CliResult<()> {
    let ctx = Ctx::new(&a.common)?;
    let input = read_expansion(&a.input)?;
    let eval_at = a.eval_at.as_deref().map(eval_points).transpose()?;
    let (out, dropped_mode) = match a.op {
        Op::Semigroup => (input.semigroup_apply(point(a.t, ctx.file.t.clone(), "t")?)?, false),
        Op::Multiplier => {
            let spec = match (a.laplace_profile, a.stieltjes) {
                (Some(p), None) => MultiplierSpec::Laplace(p.parse::<LaplaceProfile>()?),
                (None, Some(s)) => MultiplierSpec::Stieltjes(s.parse::<StieltjesMeasure>()?),
                _ => return Err(CliError::usage("give exactly one of --laplace-profile and --stieltjes")),
            };
            let r = input.multiplier_apply(&spec)?;
            if r.dropped_mode {
                eprintln!("note: the zero eigenvalue mode was set to zero");
            }
            (r.expansion, r.dropped_mode)
        }
        Op::Riesz => {
            let thetas = eval_at.ok_or_else(|| CliError::usage("--op riesz needs --eval-at"))?;
            let series = input.riesz_apply(a.n.ok_or_else(|| CliError::usage("missing --N"))?)?;
            let values = thetas.iter().map(|&th| series.eval_complex(th)).collect::<jpk_core::Result<Vec<_>>>()?;
            return write_samples(&ctx, &thetas, values, input.is_real());
        }
        Op::Gfun => {
            let thetas = eval_at.ok_or_else(|| CliError::usage("--op gfun needs --eval-at"))?;
            let g = input.g_function(a.m.unwrap_or(0), a.n.unwrap_or(0), &thetas)?;
            return write_samples(&ctx, &thetas, g.into_iter().map(|x| x.into()).collect(), true);
        }
    };
    match eval_at {
        Some(thetas) => {
            let values = thetas.iter().map(|&th| out.synthesize_complex(th)).collect::<jpk_core::Result<Vec<_>>>()?;
            write_samples(&ctx, &thetas, values, out.is_real())
        }
        None => ctx.write(|w| Ok(w.write_all(jio::expansion_json(&out, dropped_mode).as_bytes())?)),
    }
}

fn cmd_coeffs(a: CoeffsArgs) -> CliResult<()> {
    let ctx = Ctx::new(&a.common)?;
    let params = ctx.params(&a.common)?;
    let f = File::open(&a.input).map_err(|e| CliError::usage(format!("cannot open {}: {e}", a.input.display())))?;
    let samples = SampledFunction::read(io::BufReader::new(f))?;
    let nodes = a.nodes.unwrap_or_else(|| spectral::default_nodes(a.n_max));
    let e = spectral::analyze(params, a.n_max, nodes, |th| samples.eval(th))?;
    ctx.write(|w| Ok(w.write_all(jio::expansion_json(&e, false).as_bytes())?))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Kernel(a) => cmd_kernel(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Apply(a) => cmd_apply(a),
        Command::Coeffs(a) => cmd_coeffs(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
